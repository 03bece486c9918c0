#pragma once

// K-rational roots of polynomials with coefficients in K = F_q(theta), by
// denominator clearing and the rational root theorem over F_q[theta]: after
// stripping x-factors, every root n/d (reduced, d monic) has d dividing the
// leading coefficient and n dividing the constant coefficient up to a unit.
// Every candidate is verified by exact substitution.

#include "common.hpp"
#include "ratfunc.hpp"

#include <algorithm>

namespace dkt {

// all monic divisors of a nonzero polynomial, in canonical order
inline std::vector<Poly<Fq>> monic_divisors(const Poly<Fq>& f) {
    if (f.is_zero()) throw domain_error("divisors of zero polynomial");
    Rng rng(fnv_offset);
    auto fac = factor(f, rng);
    std::vector<Poly<Fq>> divs{Poly<Fq>::one(f.field(), f.var())};
    for (auto& [g, m] : fac) {
        std::vector<Poly<Fq>> next;
        for (auto& d : divs) {
            Poly<Fq> acc = d;
            next.push_back(acc);
            for (unsigned e = 1; e <= m; ++e) {
                acc = acc * g;
                next.push_back(acc);
            }
        }
        divs = std::move(next);
    }
    std::sort(divs.begin(), divs.end(), [](const auto& a, const auto& b) { return poly_less(a, b); });
    return divs;
}

inline std::vector<RatFunc> rational_roots(const Poly<RatFuncField>& P) {
    if (P.is_zero()) throw domain_error("rational_roots: zero polynomial");
    const RatFuncField& K = P.field();
    const Fq& F = K.coeff_field();
    std::vector<RatFunc> roots;

    Poly<RatFuncField> Q = P;
    if (Q.degree() > 0 && K.is_zero(Q.coeff(0))) {
        roots.push_back(K.zero());
        Poly<RatFuncField> x = Poly<RatFuncField>::gen(K, Q.var());
        while (Q.degree() > 0 && K.is_zero(Q.coeff(0))) Q = Q / x;
    }
    if (Q.degree() == 0) return roots;

    // clear denominators
    Poly<Fq> lcm = Poly<Fq>::one(F, Var::theta);
    for (int i = 0; i <= Q.degree(); ++i) {
        const Poly<Fq>& d = Q.coeff(i).den;
        lcm = (lcm * d) / poly_gcd(lcm, d);
    }
    std::vector<Poly<Fq>> b((size_t)Q.degree() + 1, Poly<Fq>::zero(F, Var::theta));
    for (int i = 0; i <= Q.degree(); ++i) {
        const RatFunc& c = Q.coeff(i);
        b[(size_t)i] = c.num * (lcm / c.den);
    }
    // remove content
    Poly<Fq> content = b[0];
    for (size_t i = 1; i < b.size(); ++i) content = poly_gcd(content, b[i]);
    for (auto& bi : b) bi = bi / content;

    const Poly<Fq>& lead = b.back();
    const Poly<Fq>& cnst = b.front();
    bool monic_integral = true;
    for (int i = 0; i <= P.degree(); ++i)
        if (!K.is_integral(P.coeff(i))) monic_integral = false;
    if (!(P.lead() == K.one())) monic_integral = false;

    auto dens = monic_divisors(lead);
    auto nums = monic_divisors(cnst);
    for (auto& d : dens) {
        for (auto& n : nums) {
            for (u64 u = 1; u < F.cardinality(); ++u) {
                RatFunc cand = K.make(n.scaled(u), d);
                bool is_root = K.is_zero(Q.eval(cand));
                if (!is_root) continue;
                if (monic_integral && !K.is_integral(cand))
                    throw domain_error("rational_roots: non-integral root of monic integral polynomial");
                roots.push_back(cand);
            }
        }
    }
    std::sort(roots.begin(), roots.end(), [&](const auto& a, const auto& b2) { return K.elem_less(a, b2); });
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    return roots;
}

} // namespace dkt
