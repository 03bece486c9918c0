#pragma once

// Factorization of univariate polynomials over finite fields:
// squarefree decomposition, distinct-degree splitting, and seeded
// Cantor-Zassenhaus equal-degree splitting. The randomized steps draw from a
// caller-supplied deterministic generator, and all returned factor lists are
// sorted canonically, so results are reproducible bit for bit.

#include "common.hpp"
#include "poly.hpp"

#include <map>
#include <vector>

namespace dkt {

// Canonical order on polynomials over a finite field: by degree, then by
// coefficient comparison from the highest power down.
template <class F>
bool poly_less(const Poly<F>& a, const Poly<F>& b) {
    if (a.degree() != b.degree()) return a.degree() < b.degree();
    for (int i = a.degree(); i >= 0; --i) {
        auto ca = a.coeff(i), cb = b.coeff(i);
        if (!a.field().eq(ca, cb)) return a.field().elem_less(ca, cb);
    }
    return false;
}

// g^(|F|^k) mod f, by k*log_p|F| rounds of p-th powering (each round uses a
// machine-word exponent, so arbitrarily large fields are fine).
template <class F>
Poly<F> frobenius_powmod(const Poly<F>& g, u64 k, const Poly<F>& f) {
    Poly<F> r = g % f;
    u64 rounds = k * f.field().log_p_card();
    for (u64 i = 0; i < rounds; ++i) r = poly_powmod(r, f.field().p(), f);
    return r;
}

template <class F>
bool is_irreducible(const Poly<F>& f) {
    if (f.degree() <= 0) return false;
    if (f.degree() == 1) return true;
    const F& K = f.field();
    u64 n = (u64)f.degree();
    Poly<F> x = Poly<F>::gen(K, f.var()) % f;
    Poly<F> h = x;
    std::map<u64, Poly<F>> checkpoints; // i -> x^(|F|^i) mod f for i = n/ell
    std::vector<u64> subdegrees;
    for (u64 ell = 2; ell <= n; ++ell) {
        if (n % ell) continue;
        bool prime = true;
        for (u64 d = 2; d * d <= ell; ++d)
            if (ell % d == 0) { prime = false; break; }
        if (prime) subdegrees.push_back(n / ell);
    }
    for (u64 i = 1; i <= n; ++i) {
        h = frobenius_powmod(h, 1, f);
        for (u64 sd : subdegrees)
            if (sd == i) checkpoints.emplace(i, h);
        if (i == n) break;
    }
    if (!(h == x)) return false;
    for (auto& [i, hi] : checkpoints) {
        Poly<F> g = poly_gcd(hi - x, f);
        if (g.degree() != 0) return false;
    }
    return true;
}

namespace detail {

// Coefficient-wise p-th root: f must satisfy f' = 0, i.e. only exponents
// divisible by p occur.
template <class F>
Poly<F> poly_pth_root(const Poly<F>& f) {
    const F& K = f.field();
    u64 p = K.p();
    unsigned logp = K.log_p_card();
    std::vector<typename F::Elem> r;
    for (size_t i = 0; i * p <= (size_t)f.degree(); ++i) {
        auto c = f.coeff(i * p);
        // c^(|F|/p) = c^(p^(logp-1)); over F_p itself this is the identity
        for (unsigned j = 0; j + 1 < logp; ++j) c = K.pow(c, p);
        r.push_back(c);
    }
    return Poly<F>(K, f.var(), std::move(r));
}

// Splits a monic product of distinct irreducibles of the same degree d.
template <class F>
void equal_degree_split(const Poly<F>& f, u64 d, Rng& rng, std::vector<Poly<F>>& out) {
    const F& K = f.field();
    if ((u64)f.degree() == d) {
        out.push_back(f);
        return;
    }
    Poly<F> g = Poly<F>::one(K, f.var());
    while (true) {
        // random polynomial of degree < deg f
        std::vector<typename F::Elem> rc;
        for (int i = 0; i < f.degree(); ++i) rc.push_back(K.random_elem(rng));
        Poly<F> a(K, f.var(), std::move(rc));
        if (a.is_zero()) continue;
        g = poly_gcd(a, f);
        if (g.degree() > 0 && g.degree() < f.degree()) break;
        u64 m = (u64)K.log_p_card() * d; // factors live in a field of order p^m
        if (K.p() == 2) {
            // trace map: a + a^2 + ... + a^(2^(m-1))
            Poly<F> b = a % f, term = a % f;
            for (u64 i = 1; i < m; ++i) {
                term = (term * term) % f;
                b = b + term;
            }
            g = poly_gcd(b, f);
        } else {
            // a^((p^m - 1)/2) = (a^(1+p+...+p^(m-1)))^((p-1)/2), keeping
            // every exponent within machine range
            Poly<F> cur = a % f, prod = cur;
            for (u64 i = 1; i < m; ++i) {
                cur = poly_powmod(cur, K.p(), f);
                prod = (prod * cur) % f;
            }
            Poly<F> b = poly_powmod(prod, (K.p() - 1) / 2, f);
            g = poly_gcd(b - Poly<F>::one(K, f.var()), f);
        }
        if (g.degree() > 0 && g.degree() < f.degree()) break;
    }
    equal_degree_split(g, d, rng, out);
    equal_degree_split(f / g, d, rng, out);
}

template <class F>
void squarefree_factor(const Poly<F>& f, unsigned mult, Rng& rng,
                       std::vector<std::pair<Poly<F>, unsigned>>& out) {
    const F& K = f.field();
    if (f.degree() <= 0) return;
    // distinct-degree stage
    Poly<F> rest = f;
    Poly<F> x = Poly<F>::gen(K, f.var());
    Poly<F> h = x % rest;
    std::vector<std::pair<Poly<F>, u64>> stages; // (product of irreducibles, degree)
    for (u64 d = 1; rest.degree() > 0 && 2 * d <= (u64)rest.degree(); ++d) {
        h = frobenius_powmod(h, 1, rest);
        Poly<F> g = poly_gcd(h - x, rest);
        if (g.degree() > 0) {
            stages.push_back({g, d});
            rest = rest / g;
            h = h % rest;
        }
    }
    if (rest.degree() > 0) stages.push_back({rest, (u64)rest.degree()});
    for (auto& [prod, d] : stages) {
        std::vector<Poly<F>> irred;
        equal_degree_split(prod, d, rng, irred);
        for (auto& g : irred) out.push_back({g, mult});
    }
}

} // namespace detail

// Full factorization of a nonzero polynomial into monic irreducibles with
// multiplicities, sorted canonically. The unit leading coefficient is dropped.
template <class F>
std::vector<std::pair<Poly<F>, unsigned>> factor(const Poly<F>& f, Rng& rng) {
    if (f.is_zero()) throw domain_error("factor: zero polynomial");
    const F& K = f.field();
    std::vector<std::pair<Poly<F>, unsigned>> out;
    // squarefree decomposition
    struct Item { Poly<F> part; unsigned mult; };
    std::vector<Item> work{{f.monic(), 1}};
    while (!work.empty()) {
        auto [g, mult] = work.back();
        work.pop_back();
        if (g.degree() <= 0) continue;
        Poly<F> gp = g.derivative();
        if (gp.is_zero()) {
            work.push_back({detail::poly_pth_root(g), mult * (unsigned)K.p()});
            continue;
        }
        Poly<F> c = poly_gcd(g, gp);
        Poly<F> w = g / c;
        unsigned i = 1;
        while (w.degree() > 0) {
            Poly<F> y = poly_gcd(w, c);
            Poly<F> fac = w / y;
            if (fac.degree() > 0) detail::squarefree_factor(fac, mult * i, rng, out);
            w = y;
            c = c / y;
            ++i;
        }
        if (c.degree() > 0) work.push_back({detail::poly_pth_root(c), mult * (unsigned)K.p()});
    }
    // merge duplicates and sort canonically
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.first == b.first) return a.second < b.second;
        return poly_less(a.first, b.first);
    });
    std::vector<std::pair<Poly<F>, unsigned>> merged;
    for (auto& [g, m] : out) {
        if (!merged.empty() && merged.back().first == g) merged.back().second += m;
        else merged.push_back({g, m});
    }
    return merged;
}

// Roots of f in its own coefficient field, sorted canonically.
template <class F>
std::vector<typename F::Elem> roots_in_field(const Poly<F>& f, Rng& rng) {
    if (f.is_zero()) throw domain_error("roots of zero polynomial");
    const F& K = f.field();
    std::vector<typename F::Elem> roots;
    Poly<F> g = f.monic();
    Poly<F> x = Poly<F>::gen(K, f.var());
    // strip root 0
    if (K.is_zero(g.coeff(0)) && g.degree() > 0) {
        roots.push_back(K.zero());
        while (K.is_zero(g.coeff(0)) && g.degree() > 0) g = g / x;
    }
    if (g.degree() > 0) {
        Poly<F> xq = frobenius_powmod(x % g, 1, g);
        Poly<F> lin = poly_gcd(xq - x, g);
        if (lin.degree() > 0) {
            std::vector<Poly<F>> factors;
            detail::equal_degree_split(lin, 1, rng, factors);
            for (auto& l : factors) roots.push_back(K.neg(l.coeff(0)));
        }
    }
    std::sort(roots.begin(), roots.end(), [&](const auto& a, const auto& b) { return K.elem_less(a, b); });
    return roots;
}

// Number of monic irreducible polynomials of degree n over a field of
// cardinality q: (1/n) * sum_{d | n} mu(d) q^(n/d).
inline u64 irreducible_count(u64 q, u64 n) {
    if (n == 0) throw domain_error("irreducible_count: degree zero");
    i64 total = 0;
    for (u64 d = 1; d <= n; ++d) {
        if (n % d) continue;
        // Moebius mu(d)
        u64 m = d;
        int mu = 1;
        for (u64 pr = 2; pr * pr <= m; ++pr) {
            if (m % pr == 0) {
                m /= pr;
                if (m % pr == 0) { mu = 0; break; }
                mu = -mu;
            }
        }
        if (mu != 0 && m > 1) mu = -mu;
        if (mu == 0) continue;
        total += mu * (i64)checked_pow(q, (unsigned)(n / d));
    }
    if (total <= 0 || total % (i64)n != 0) throw domain_error("irreducible_count: internal error");
    return (u64)(total / (i64)n);
}

// All monic irreducibles of degree 1..max_degree in (degree, index) order.
// The index order enumerates coefficient vectors c_0, c_1, ... as digits of
// an integer in base |F|, least significant digit first.
template <class F>
std::vector<Poly<F>> irreducibles_up_to(const F& K, Var var, unsigned max_degree) {
    std::vector<Poly<F>> out;
    u64 q = K.cardinality();
    for (unsigned n = 1; n <= max_degree; ++n) {
        u64 count = checked_pow(q, n);
        for (u64 idx = 0; idx < count; ++idx) {
            std::vector<typename F::Elem> c(n + 1, K.zero());
            u64 v = idx;
            for (unsigned i = 0; i < n; ++i) { c[i] = K.elem_from_index(v % q); v /= q; }
            c[n] = K.one();
            Poly<F> f(K, var, std::move(c));
            if (n > 1 && K.is_zero(f.coeff(0))) continue;
            if (is_irreducible(f)) out.push_back(f);
        }
    }
    return out;
}

} // namespace dkt
