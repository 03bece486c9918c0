#pragma once

// The constant field F_q, q = p^e, realized as F_p[x]/(m) for the
// lexicographically least monic irreducible m of degree e (or a caller
// supplied modulus). Elements are stored as their index sum(c_i p^i), which
// keeps vectors of field elements flat and hashable. For small q all four
// operations are table driven.
//
// Fq is a cheap handle; copies share the underlying representation.

#include "common.hpp"
#include "prime_field.hpp"

#include <memory>
#include <vector>

namespace dkt {

namespace detail {

// Dense polynomial helpers over F_p on raw digit vectors (ascending).
inline void fp_trim(std::vector<u64>& v) {
    while (!v.empty() && v.back() == 0) v.pop_back();
}

inline std::vector<u64> fp_mul(const PrimeField& F, const std::vector<u64>& a, const std::vector<u64>& b) {
    if (a.empty() || b.empty()) return {};
    std::vector<u64> r(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (size_t j = 0; j < b.size(); ++j) r[i + j] = F.add(r[i + j], F.mul(a[i], b[j]));
    }
    fp_trim(r);
    return r;
}

// Remainder of a by monic b.
inline std::vector<u64> fp_rem(const PrimeField& F, std::vector<u64> a, const std::vector<u64>& b) {
    fp_trim(a);
    while (a.size() >= b.size()) {
        u64 c = a.back();
        size_t shift = a.size() - b.size();
        if (c != 0) {
            for (size_t i = 0; i < b.size(); ++i) a[shift + i] = F.sub(a[shift + i], F.mul(c, b[i]));
        }
        a.pop_back();
        fp_trim(a);
    }
    return a;
}

inline std::vector<u64> fp_mulmod(const PrimeField& F, const std::vector<u64>& a, const std::vector<u64>& b,
                                  const std::vector<u64>& mod) {
    return fp_rem(F, fp_mul(F, a, b), mod);
}

// x^(p^k) mod `mod` by repeated p-th powering.
inline std::vector<u64> fp_powmod_x(const PrimeField& F, u64 k, const std::vector<u64>& mod) {
    std::vector<u64> r = fp_rem(F, {0, 1}, mod);
    for (u64 step = 0; step < k; ++step) {
        // r <- r^p mod `mod`
        std::vector<u64> acc = {1};
        std::vector<u64> base = r;
        u64 e = F.p();
        while (e) {
            if (e & 1) acc = fp_mulmod(F, acc, base, mod);
            base = fp_mulmod(F, base, base, mod);
            e >>= 1;
        }
        r = acc;
    }
    return r;
}

inline std::vector<u64> fp_gcd(const PrimeField& F, std::vector<u64> a, std::vector<u64> b) {
    fp_trim(a);
    fp_trim(b);
    while (!b.empty()) {
        // make b monic for fp_rem
        u64 lead_inv = F.inv(b.back());
        std::vector<u64> bm = b;
        for (auto& c : bm) c = F.mul(c, lead_inv);
        std::vector<u64> r = fp_rem(F, a, bm);
        a = b;
        b = r;
        fp_trim(b);
    }
    if (!a.empty()) {
        u64 lead_inv = F.inv(a.back());
        for (auto& c : a) c = F.mul(c, lead_inv);
    }
    return a;
}

// Rabin irreducibility test for monic f over F_p.
inline bool fp_is_irreducible(const PrimeField& F, const std::vector<u64>& f) {
    size_t n = f.size() - 1;
    if (n == 0) return false;
    if (n == 1) return true;
    std::vector<u64> xq = fp_powmod_x(F, n, f);
    std::vector<u64> x = fp_rem(F, {0, 1}, f);
    std::vector<u64> diff = xq;
    diff.resize(std::max(diff.size(), x.size()), 0);
    for (size_t i = 0; i < x.size(); ++i) diff[i] = F.sub(diff[i], x[i]);
    fp_trim(diff);
    if (!diff.empty()) return false;
    for (u64 ell = 2; ell <= n; ++ell) {
        if (n % ell != 0) continue;
        bool prime = true;
        for (u64 d = 2; d * d <= ell; ++d)
            if (ell % d == 0) { prime = false; break; }
        if (!prime) continue;
        std::vector<u64> xe = fp_powmod_x(F, n / ell, f);
        std::vector<u64> g = xe;
        g.resize(std::max(g.size(), x.size()), 0);
        for (size_t i = 0; i < x.size(); ++i) g[i] = F.sub(g[i], x[i]);
        std::vector<u64> d = fp_gcd(F, g, f);
        if (d.size() != 1) return false;
    }
    return true;
}

// Lexicographically least monic irreducible of degree e over F_p, scanning
// candidates in index order of their coefficient vector.
inline std::vector<u64> fp_least_irreducible(const PrimeField& F, unsigned e) {
    if (e == 0) throw domain_error("extension of degree zero");
    u64 count = checked_pow(F.p(), e);
    for (u64 idx = 0; idx < count; ++idx) {
        std::vector<u64> f(e + 1, 0);
        u64 t = idx;
        for (unsigned i = 0; i < e; ++i) { f[i] = t % F.p(); t /= F.p(); }
        f[e] = 1;
        if (e > 1 && f[0] == 0) continue;
        if (fp_is_irreducible(F, f)) return f;
    }
    throw domain_error("no irreducible polynomial found (impossible)");
}

} // namespace detail

class Fq {
  public:
    using Elem = u64;

    // F_q with q = p^e and the canonical (lexicographically least) modulus.
    Fq(u64 p, unsigned e) : Fq(PrimeField(p), detail::fp_least_irreducible(PrimeField(p), e)) {}

    // Shorthand: F_q for a prime power q, factored automatically.
    static Fq of_order(u64 q) {
        if (q < 2) throw domain_error("field order must be at least 2");
        u64 p = 0;
        for (u64 d = 2; d * d <= q; ++d) {
            if (q % d == 0) { p = d; break; }
        }
        if (p == 0) return Fq(q, 1);
        unsigned e = 0;
        u64 t = q;
        while (t > 1) {
            if (t % p != 0) throw domain_error(std::to_string(q) + " is not a prime power");
            t /= p;
            ++e;
        }
        return Fq(p, e);
    }

    Fq(const PrimeField& base, std::vector<u64> modulus) {
        auto rep = std::make_shared<Rep>(base);
        if (modulus.size() < 2) throw domain_error("Fq: modulus must have positive degree");
        if (modulus.back() != 1) throw domain_error("Fq: modulus must be monic");
        for (u64 c : modulus)
            if (c >= base.p()) throw domain_error("Fq: modulus coefficient out of range");
        if (!detail::fp_is_irreducible(base, modulus)) throw domain_error("Fq: modulus is reducible");
        rep->modulus = std::move(modulus);
        rep->e = (unsigned)rep->modulus.size() - 1;
        rep->q = checked_pow(base.p(), rep->e);
        rep->build_tables();
        rep_ = std::move(rep);
    }

    u64 p() const { return rep_->base.p(); }
    unsigned ext_degree() const { return rep_->e; }
    unsigned log_p_card() const { return rep_->e; }
    u64 q() const { return rep_->q; }
    u64 cardinality() const { return rep_->q; }
    const std::vector<u64>& modulus() const { return rep_->modulus; }
    const PrimeField& prime_field() const { return rep_->base; }

    Elem zero() const { return 0; }
    Elem one() const { return 1 % rep_->q; }

    // Embeds an integer via F_p (constant polynomials).
    Elem from_int(u64 n) const { return n % p(); }

    // Elements are indexed 0..q-1; the index order is the canonical order.
    Elem elem_from_index(u64 i) const {
        if (i >= rep_->q) throw domain_error("element index out of range");
        return i;
    }
    u64 index_of(Elem a) const { return a; }
    bool elem_less(Elem a, Elem b) const { return a < b; }
    Elem random_elem(Rng& rng) const { return rng.below(rep_->q); }

    // This field is its own bottom coefficient field; extensions built on top
    // of it expose the same interface with fq_dim > 1.
    u64 fq_card() const { return rep_->q; }
    const Fq& fq_field() const { return *this; }
    unsigned fq_dim() const { return 1; }
    Elem frobenius(Elem a) const { return a; }
    std::vector<u64> fq_unpack(Elem a) const { return {a}; }
    Elem fq_pack(const std::vector<u64>& v) const {
        if (v.size() != 1) throw domain_error("fq_pack: wrong length");
        if (v[0] >= rep_->q) throw domain_error("fq_pack: value out of range");
        return v[0];
    }
    Elem fq_basis_elem(unsigned i) const {
        if (i != 0) throw domain_error("fq_basis_elem: index out of range");
        return one();
    }
    Elem fq_scale(u64 c, Elem a) const { return mul(c, a); }

    // Digits of the element in base p, ascending: its coefficient vector
    // over F_p.
    std::vector<u64> coeffs(Elem a) const {
        std::vector<u64> v(rep_->e);
        for (unsigned i = 0; i < rep_->e; ++i) { v[i] = a % p(); a /= p(); }
        return v;
    }

    Elem from_coeffs(const std::vector<u64>& v) const {
        if (v.size() > rep_->e) throw domain_error("Fq: coefficient vector too long");
        Elem a = 0;
        for (size_t i = v.size(); i-- > 0;) {
            if (v[i] >= p()) throw domain_error("Fq: coefficient out of range");
            a = a * p() + v[i];
        }
        return a;
    }

    Elem add(Elem a, Elem b) const {
        if (rep_->tabled()) return rep_->add_tab[a * rep_->q + b];
        return rep_->add_slow(a, b);
    }
    Elem mul(Elem a, Elem b) const {
        if (rep_->tabled()) return rep_->mul_tab[a * rep_->q + b];
        return rep_->mul_slow(a, b);
    }
    Elem neg(Elem a) const {
        if (rep_->tabled()) return rep_->neg_tab[a];
        return rep_->neg_slow(a);
    }
    Elem sub(Elem a, Elem b) const { return add(a, neg(b)); }

    Elem inv(Elem a) const {
        if (a == 0) throw domain_error("Fq: inverse of zero");
        if (rep_->tabled()) return rep_->inv_tab[a];
        return pow(a, rep_->q - 2);
    }

    Elem pow(Elem a, u64 e) const {
        Elem r = one(), b = a;
        while (e) {
            if (e & 1) r = mul(r, b);
            b = mul(b, b);
            e >>= 1;
        }
        return r;
    }

    bool is_zero(Elem a) const { return a == 0; }
    bool eq(Elem a, Elem b) const { return a == b; }

    bool same_field(const Fq& o) const {
        return rep_ == o.rep_ || (p() == o.p() && rep_->modulus == o.rep_->modulus);
    }

  private:
    struct Rep {
        PrimeField base;
        std::vector<u64> modulus;
        unsigned e = 1;
        u64 q = 2;
        std::vector<u64> add_tab, mul_tab, neg_tab, inv_tab;

        explicit Rep(const PrimeField& b) : base(b) {}

        static constexpr u64 table_limit = 512;
        bool tabled() const { return !add_tab.empty(); }

        Elem add_slow(Elem a, Elem b) const {
            Elem r = 0, m = 1;
            for (unsigned i = 0; i < e; ++i) {
                r += base.add(a % base.p(), b % base.p()) * m;
                a /= base.p();
                b /= base.p();
                m *= base.p();
            }
            return r;
        }

        Elem neg_slow(Elem a) const {
            Elem r = 0, m = 1;
            for (unsigned i = 0; i < e; ++i) {
                r += base.neg(a % base.p()) * m;
                a /= base.p();
                m *= base.p();
            }
            return r;
        }

        Elem mul_slow(Elem a, Elem b) const {
            std::vector<u64> va(e), vb(e);
            for (unsigned i = 0; i < e; ++i) { va[i] = a % base.p(); a /= base.p(); }
            for (unsigned i = 0; i < e; ++i) { vb[i] = b % base.p(); b /= base.p(); }
            std::vector<u64> prod = detail::fp_rem(base, detail::fp_mul(base, va, vb), modulus);
            Elem r = 0;
            for (size_t i = prod.size(); i-- > 0;) r = r * base.p() + prod[i];
            return r;
        }

        void build_tables() {
            if (q > table_limit) return;
            add_tab.resize(q * q);
            mul_tab.resize(q * q);
            neg_tab.resize(q);
            inv_tab.assign(q, 0);
            for (u64 a = 0; a < q; ++a) {
                neg_tab[a] = neg_slow(a);
                for (u64 b = 0; b < q; ++b) {
                    add_tab[a * q + b] = add_slow(a, b);
                    mul_tab[a * q + b] = mul_slow(a, b);
                }
            }
            for (u64 a = 1; a < q; ++a) {
                for (u64 b = 1; b < q; ++b)
                    if (mul_tab[a * q + b] == 1 % q) { inv_tab[a] = b; break; }
            }
        }
    };

    std::shared_ptr<const Rep> rep_;
};

} // namespace dkt
