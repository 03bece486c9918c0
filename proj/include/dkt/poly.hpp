#pragma once

// Dense univariate polynomials over any of the library's field handles.
// A polynomial carries the variable it is written in: theta (elements of the
// rational function field), t (operator polynomials, levels, characteristics)
// or x (division polynomials and other generic uses). Mixing variables in a
// binary operation is a domain error; it always indicates a bookkeeping bug.

#include "common.hpp"

#include <algorithm>
#include <array>
#include <string>
#include <utility>
#include <vector>

namespace dkt {

enum class Var { theta, t, x };

inline const char* var_name(Var v) {
    switch (v) {
        case Var::theta: return "theta";
        case Var::t: return "t";
        default: return "x";
    }
}

template <class F>
class Poly {
  public:
    using Elem = typename F::Elem;

    Poly(const F& field, Var var) : field_(field), var_(var) {}
    Poly(const F& field, Var var, std::vector<Elem> coeffs)
        : field_(field), var_(var), c_(std::move(coeffs)) {
        trim();
    }

    static Poly zero(const F& field, Var var) { return Poly(field, var); }
    static Poly one(const F& field, Var var) { return Poly(field, var, {field.one()}); }
    static Poly gen(const F& field, Var var) { return Poly(field, var, {field.zero(), field.one()}); }
    static Poly constant(const F& field, Var var, const Elem& c) { return Poly(field, var, {c}); }

    const F& field() const { return field_; }
    Var var() const { return var_; }
    const std::vector<Elem>& coeffs() const { return c_; }

    // Degree of the zero polynomial is -1.
    int degree() const { return (int)c_.size() - 1; }
    bool is_zero() const { return c_.empty(); }

    Elem coeff(size_t i) const { return i < c_.size() ? c_[i] : field_.zero(); }

    Elem lead() const {
        if (is_zero()) throw domain_error("leading coefficient of zero polynomial");
        return c_.back();
    }

    bool is_monic() const { return !is_zero() && field_.eq(c_.back(), field_.one()); }

    bool is_one() const { return c_.size() == 1 && field_.eq(c_[0], field_.one()); }

    Poly retag(Var var) const { return Poly(field_, var, c_); }

    Poly operator+(const Poly& o) const {
        check(o);
        std::vector<Elem> r(std::max(c_.size(), o.c_.size()), field_.zero());
        for (size_t i = 0; i < r.size(); ++i) r[i] = field_.add(coeff(i), o.coeff(i));
        return Poly(field_, var_, std::move(r));
    }

    Poly operator-(const Poly& o) const {
        check(o);
        std::vector<Elem> r(std::max(c_.size(), o.c_.size()), field_.zero());
        for (size_t i = 0; i < r.size(); ++i) r[i] = field_.sub(coeff(i), o.coeff(i));
        return Poly(field_, var_, std::move(r));
    }

    Poly operator-() const {
        std::vector<Elem> r = c_;
        for (auto& e : r) e = field_.neg(e);
        return Poly(field_, var_, std::move(r));
    }

    Poly operator*(const Poly& o) const {
        check(o);
        if (is_zero() || o.is_zero()) return zero(field_, var_);
        std::vector<Elem> r(c_.size() + o.c_.size() - 1, field_.zero());
        for (size_t i = 0; i < c_.size(); ++i) {
            if (field_.is_zero(c_[i])) continue;
            for (size_t j = 0; j < o.c_.size(); ++j)
                r[i + j] = field_.add(r[i + j], field_.mul(c_[i], o.c_[j]));
        }
        return Poly(field_, var_, std::move(r));
    }

    Poly scaled(const Elem& s) const {
        std::vector<Elem> r = c_;
        for (auto& e : r) e = field_.mul(e, s);
        return Poly(field_, var_, std::move(r));
    }

    Poly shifted(size_t k) const {
        if (is_zero()) return *this;
        std::vector<Elem> r(c_.size() + k, field_.zero());
        for (size_t i = 0; i < c_.size(); ++i) r[i + k] = c_[i];
        return Poly(field_, var_, std::move(r));
    }

    bool operator==(const Poly& o) const {
        if (c_.size() != o.c_.size()) return false;
        for (size_t i = 0; i < c_.size(); ++i)
            if (!field_.eq(c_[i], o.c_[i])) return false;
        return true;
    }
    bool operator!=(const Poly& o) const { return !(*this == o); }

    // Euclidean division; the divisor may have any nonzero leading coefficient.
    std::pair<Poly, Poly> divmod(const Poly& d) const {
        check(d);
        if (d.is_zero()) throw domain_error("polynomial division by zero");
        Poly q = zero(field_, var_);
        Poly r = *this;
        Elem lead_inv = field_.inv(d.lead());
        std::vector<Elem> qc(r.degree() >= d.degree() ? r.degree() - d.degree() + 1 : 0, field_.zero());
        while (!r.is_zero() && r.degree() >= d.degree()) {
            Elem f = field_.mul(r.lead(), lead_inv);
            size_t shift = r.degree() - d.degree();
            qc[shift] = f;
            std::vector<Elem> rc = r.c_;
            for (size_t i = 0; i < d.c_.size(); ++i)
                rc[shift + i] = field_.sub(rc[shift + i], field_.mul(f, d.c_[i]));
            r = Poly(field_, var_, std::move(rc));
        }
        return {Poly(field_, var_, std::move(qc)), r};
    }

    Poly operator/(const Poly& d) const { return divmod(d).first; }
    Poly operator%(const Poly& d) const { return divmod(d).second; }

    bool divides(const Poly& other) const { return other.divmod(*this).second.is_zero(); }

    Poly monic() const {
        if (is_zero()) return *this;
        return scaled(field_.inv(lead()));
    }

    Elem eval(const Elem& x) const {
        Elem r = field_.zero();
        for (size_t i = c_.size(); i-- > 0;) r = field_.add(field_.mul(r, x), c_[i]);
        return r;
    }

    Poly derivative() const {
        if (c_.size() <= 1) return zero(field_, var_);
        std::vector<Elem> r(c_.size() - 1, field_.zero());
        for (size_t i = 1; i < c_.size(); ++i) {
            Elem s = field_.zero();
            for (size_t k = 0; k < i; ++k) s = field_.add(s, c_[i]);
            r[i - 1] = s;
        }
        return Poly(field_, var_, std::move(r));
    }

    // Substitution: this(g), a polynomial in g's variable.
    Poly compose(const Poly& g) const {
        Poly r = zero(field_, g.var());
        for (size_t i = c_.size(); i-- > 0;) {
            r = r * g + constant(field_, g.var(), c_[i]);
        }
        return r;
    }

  private:
    void check(const Poly& o) const {
        if (!field_.same_field(o.field_)) throw domain_error("polynomials over different fields");
        if (var_ != o.var_)
            throw domain_error(std::string("mixed polynomial variables: ") + var_name(var_) + " vs " +
                               var_name(o.var_));
    }

    void trim() {
        while (!c_.empty() && field_.is_zero(c_.back())) c_.pop_back();
    }

    F field_;
    Var var_;
    std::vector<Elem> c_;
};

template <class F>
Poly<F> poly_gcd(Poly<F> a, Poly<F> b) {
    while (!b.is_zero()) {
        Poly<F> r = a % b;
        a = b;
        b = r;
    }
    return a.monic();
}

template <class F>
Poly<F> poly_powmod(const Poly<F>& base, u64 e, const Poly<F>& mod) {
    Poly<F> r = Poly<F>::one(base.field(), base.var()) % mod;
    Poly<F> b = base % mod;
    while (e) {
        if (e & 1) r = (r * b) % mod;
        b = (b * b) % mod;
        e >>= 1;
    }
    return r;
}

// Extended gcd: returns (g, u, v) with u*a + v*b = g, g monic (or zero).
template <class F>
std::array<Poly<F>, 3> poly_xgcd(const Poly<F>& a, const Poly<F>& b) {
    const F& K = a.field();
    Poly<F> r0 = a, r1 = b;
    Poly<F> s0 = Poly<F>::one(K, a.var()), s1 = Poly<F>::zero(K, a.var());
    Poly<F> t0 = Poly<F>::zero(K, a.var()), t1 = Poly<F>::one(K, a.var());
    while (!r1.is_zero()) {
        auto [q, r] = r0.divmod(r1);
        r0 = r1; r1 = r;
        Poly<F> s = s0 - q * s1; s0 = s1; s1 = s;
        Poly<F> t = t0 - q * t1; t0 = t1; t1 = t;
    }
    if (!r0.is_zero()) {
        auto li = K.inv(r0.lead());
        r0 = r0.scaled(li); s0 = s0.scaled(li); t0 = t0.scaled(li);
    }
    return {r0, s0, t0};
}

} // namespace dkt
