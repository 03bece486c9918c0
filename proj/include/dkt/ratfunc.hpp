#pragma once

// The rational function field K = F_q(theta). Elements are reduced fractions
// of polynomials in theta: gcd(num, den) = 1, den monic, zero = 0/1.

#include "common.hpp"
#include "fq.hpp"
#include "poly.hpp"
#include "factor.hpp"

#include <memory>

namespace dkt {

struct RatFunc {
    Poly<Fq> num;
    Poly<Fq> den;

    bool operator==(const RatFunc& o) const { return num == o.num && den == o.den; }
    bool operator!=(const RatFunc& o) const { return !(*this == o); }
};

class RatFuncField {
  public:
    using Elem = RatFunc;

    explicit RatFuncField(const Fq& coeff) : F_(coeff) {}

    const Fq& coeff_field() const { return F_; }
    u64 p() const { return F_.p(); }
    u64 fq_card() const { return F_.cardinality(); }
    const Fq& fq_field() const { return F_; }

    Elem zero() const { return {pz(), pone()}; }
    Elem one() const { return {pone(), pone()}; }
    Elem gen() const { return {Poly<Fq>::gen(F_, Var::theta), pone()}; }
    Elem from_int(u64 n) const { return {Poly<Fq>::constant(F_, Var::theta, F_.from_int(n)), pone()}; }
    Elem from_scalar(Fq::Elem c) const { return {Poly<Fq>::constant(F_, Var::theta, c), pone()}; }
    Elem from_poly(const Poly<Fq>& f) const {
        check_var(f);
        return {f, pone()};
    }
    Elem make(const Poly<Fq>& num, const Poly<Fq>& den) const {
        check_var(num);
        check_var(den);
        if (den.is_zero()) throw domain_error("rational function with zero denominator");
        return normalize(num, den);
    }

    Elem add(const Elem& a, const Elem& b) const {
        return normalize(a.num * b.den + b.num * a.den, a.den * b.den);
    }
    Elem sub(const Elem& a, const Elem& b) const {
        return normalize(a.num * b.den - b.num * a.den, a.den * b.den);
    }
    Elem neg(const Elem& a) const { return {-a.num, a.den}; }
    Elem mul(const Elem& a, const Elem& b) const { return normalize(a.num * b.num, a.den * b.den); }
    Elem inv(const Elem& a) const {
        if (a.num.is_zero()) throw domain_error("inverse of zero");
        return normalize(a.den, a.num);
    }
    Elem div(const Elem& a, const Elem& b) const { return mul(a, inv(b)); }
    Elem pow(Elem a, u64 e) const {
        Elem r = one();
        while (e) {
            if (e & 1) r = mul(r, a);
            a = mul(a, a);
            e >>= 1;
        }
        return r;
    }
    Elem frobenius(const Elem& a) const { return pow(a, fq_card()); }

    bool is_zero(const Elem& a) const { return a.num.is_zero(); }
    bool eq(const Elem& a, const Elem& b) const { return a == b; }
    bool same_field(const RatFuncField& o) const { return F_.same_field(o.F_); }

    // true integers of K: denominator 1
    bool is_integral(const Elem& a) const { return a.den.is_one(); }

    bool elem_less(const Elem& a, const Elem& b) const {
        if (!(a.den == b.den)) return poly_less(a.den, b.den);
        return poly_less(a.num, b.num);
    }

    // small random fractions, for property tests
    Elem random_elem(Rng& rng) const {
        std::vector<u64> n, d;
        for (int i = 0; i < 3; ++i) n.push_back(F_.random_elem(rng));
        for (int i = 0; i < 2; ++i) d.push_back(F_.random_elem(rng));
        d.push_back(F_.one());
        return normalize(Poly<Fq>(F_, Var::theta, n), Poly<Fq>(F_, Var::theta, d));
    }

  private:
    Poly<Fq> pz() const { return Poly<Fq>::zero(F_, Var::theta); }
    Poly<Fq> pone() const { return Poly<Fq>::one(F_, Var::theta); }
    void check_var(const Poly<Fq>& f) const {
        if (f.var() != Var::theta) throw domain_error("rational functions are in theta");
        if (!F_.same_field(f.field())) throw domain_error("rational function coefficient field mismatch");
    }
    Elem normalize(Poly<Fq> num, Poly<Fq> den) const {
        if (num.is_zero()) return {pz(), pone()};
        Poly<Fq> g = poly_gcd(num, den);
        num = num / g;
        den = den / g;
        Fq::Elem lead = den.lead();
        if (!F_.eq(lead, F_.one())) {
            Fq::Elem il = F_.inv(lead);
            num = num.scaled(il);
            den = den.scaled(il);
        }
        return {num, den};
    }

    Fq F_;
};

} // namespace dkt
