#pragma once

// Twisted polynomials L{tau} with the commutation rule tau*c = c^q*tau,
// where q is the cardinality of the bottom coefficient field of L. Viewed as
// additive polynomials, f = sum c_i tau^i acts by f(x) = sum c_i x^(q^i);
// multiplication is composition.

#include "common.hpp"

#include <vector>

namespace dkt {

template <class F>
class OrePoly {
  public:
    using Elem = typename F::Elem;

    OrePoly(const F& field, std::vector<Elem> coeffs) : f_(field), c_(std::move(coeffs)) { trim(); }

    static OrePoly zero(const F& field) { return OrePoly(field, {}); }
    static OrePoly one(const F& field) { return OrePoly(field, {field.one()}); }
    static OrePoly tau(const F& field) { return OrePoly(field, {field.zero(), field.one()}); }
    static OrePoly constant(const F& field, const Elem& c) { return OrePoly(field, {c}); }
    static OrePoly monomial(const F& field, const Elem& c, unsigned i) {
        std::vector<Elem> v(i + 1, field.zero());
        v[i] = c;
        return OrePoly(field, std::move(v));
    }

    const F& field() const { return f_; }
    int degree() const { return (int)c_.size() - 1; }
    bool is_zero() const { return c_.empty(); }
    Elem coeff(size_t i) const { return i < c_.size() ? c_[i] : f_.zero(); }
    const std::vector<Elem>& coeffs() const { return c_; }
    Elem constant_term() const { return coeff(0); }
    Elem lead() const {
        if (is_zero()) throw domain_error("leading coefficient of zero");
        return c_.back();
    }

    // c^(q^i)
    Elem twist(const Elem& c, unsigned i) const {
        Elem r = c;
        for (unsigned j = 0; j < i; ++j) r = f_.frobenius(r);
        return r;
    }

    OrePoly operator+(const OrePoly& o) const {
        check(o);
        std::vector<Elem> r(std::max(c_.size(), o.c_.size()), f_.zero());
        for (size_t i = 0; i < r.size(); ++i) r[i] = f_.add(coeff(i), o.coeff(i));
        return OrePoly(f_, std::move(r));
    }
    OrePoly operator-(const OrePoly& o) const {
        check(o);
        std::vector<Elem> r(std::max(c_.size(), o.c_.size()), f_.zero());
        for (size_t i = 0; i < r.size(); ++i) r[i] = f_.sub(coeff(i), o.coeff(i));
        return OrePoly(f_, std::move(r));
    }
    OrePoly operator-() const {
        std::vector<Elem> r = c_;
        for (auto& x : r) x = f_.neg(x);
        return OrePoly(f_, std::move(r));
    }

    OrePoly operator*(const OrePoly& o) const {
        check(o);
        if (is_zero() || o.is_zero()) return zero(f_);
        std::vector<Elem> r(c_.size() + o.c_.size() - 1, f_.zero());
        for (size_t i = 0; i < c_.size(); ++i) {
            if (f_.is_zero(c_[i])) continue;
            for (size_t j = 0; j < o.c_.size(); ++j) {
                // (a tau^i)(b tau^j) = a b^(q^i) tau^(i+j)
                r[i + j] = f_.add(r[i + j], f_.mul(c_[i], twist(o.c_[j], (unsigned)i)));
            }
        }
        return OrePoly(f_, std::move(r));
    }

    bool operator==(const OrePoly& o) const {
        if (c_.size() != o.c_.size()) return false;
        for (size_t i = 0; i < c_.size(); ++i)
            if (!f_.eq(c_[i], o.c_[i])) return false;
        return true;
    }
    bool operator!=(const OrePoly& o) const { return !(*this == o); }

    // f(x) = sum c_i x^(q^i)
    Elem evaluate(const Elem& x) const {
        Elem acc = f_.zero();
        Elem xq = x;
        for (size_t i = 0; i < c_.size(); ++i) {
            if (i > 0) xq = f_.frobenius(xq);
            acc = f_.add(acc, f_.mul(c_[i], xq));
        }
        return acc;
    }

    // f = quotient * g + remainder with deg remainder < deg g
    std::pair<OrePoly, OrePoly> right_divide(const OrePoly& g) const {
        check(g);
        if (g.is_zero()) throw domain_error("right division by zero");
        OrePoly q = zero(f_), r = *this;
        Elem glead = g.lead();
        while (!r.is_zero() && r.degree() >= g.degree()) {
            unsigned shift = (unsigned)(r.degree() - g.degree());
            // (c tau^shift)(glead tau^(deg g)) has leading coefficient c*glead^(q^shift)
            Elem c = f_.mul(r.lead(), f_.inv(twist(glead, shift)));
            OrePoly term = monomial(f_, c, shift);
            q = q + term;
            r = r - term * g;
        }
        return {q, r};
    }

    // applies a coefficient map into another field (an embedding hom)
    template <class G, class Fn>
    OrePoly<G> map_coeffs(const G& target, Fn&& fn) const {
        std::vector<typename G::Elem> r;
        r.reserve(c_.size());
        for (auto& c : c_) r.push_back(fn(c));
        return OrePoly<G>(target, std::move(r));
    }

  private:
    void trim() {
        while (!c_.empty() && f_.is_zero(c_.back())) c_.pop_back();
    }
    void check(const OrePoly& o) const {
        if (!f_.same_field(o.f_)) throw domain_error("mixed coefficient fields");
    }

    F f_;
    std::vector<Elem> c_;
};

} // namespace dkt
