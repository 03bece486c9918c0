#pragma once

// Finite extension fields built as B[y]/(m(y)) over a base field B, which is
// either an Fq or another TowerField (used for division-point ambients that
// extend a torsion ambient, so the inclusion map is the identity on
// coefficients). Elements are coefficient vectors over the base, lowest power
// first, always of length deg(m).
//
// Every tower knows the coefficient field F_q at the bottom and exposes its
// structure as an F_q-vector space (fq_dim / fq_unpack / fq_pack); all kernel
// and solve computations elsewhere flatten through that interface.

#include "common.hpp"
#include "fq.hpp"
#include "matrix.hpp"
#include "poly.hpp"
#include "factor.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace dkt {

template <class B>
class TowerField {
  public:
    using Base = B;
    using BElem = typename B::Elem;
    using Elem = std::vector<BElem>;

    TowerField(const B& base, const Poly<B>& modulus) {
        if (modulus.degree() < 1) throw domain_error("tower modulus must have degree >= 1");
        if (!modulus.is_monic()) throw domain_error("tower modulus must be monic");
        if (!is_irreducible(modulus)) throw domain_error("tower modulus must be irreducible");
        auto rep = std::make_shared<Rep>(Rep{base, modulus, (unsigned)modulus.degree(), {}});
        // reduction rows: y^(n+i) mod m for i = 0..n-2
        unsigned n = rep->n;
        Poly<B> ypow = Poly<B>::gen(base, modulus.var());
        ypow = poly_powmod(ypow, n, modulus);
        for (unsigned i = 0; i + 1 < n; ++i) {
            Elem row(n, base.zero());
            for (int j = 0; j <= ypow.degree(); ++j) row[(size_t)j] = ypow.coeff(j);
            rep->red.push_back(std::move(row));
            ypow = (ypow.shifted(1)) % modulus;
        }
        rep_ = std::move(rep);
    }

    // The extension with the canonical (index-least) modulus of the given
    // degree. Results are memoized per (base, degree) for Fq bases.
    static TowerField canonical(const B& base, unsigned degree, Var var = Var::x) {
        return TowerField(base, canonical_modulus(base, degree, var));
    }

    static Poly<B> canonical_modulus(const B& base, unsigned degree, Var var = Var::x);

    const B& base() const { return rep_->base; }
    const Poly<B>& modulus() const { return rep_->modulus; }
    unsigned degree() const { return rep_->n; }

    u64 p() const { return rep_->base.p(); }
    unsigned log_p_card() const { return rep_->base.log_p_card() * rep_->n; }
    u64 cardinality() const { return checked_pow(rep_->base.cardinality(), rep_->n); }

    // The coefficient field F_q at the bottom of the tower and the dimension
    // over it.
    u64 fq_card() const { return rep_->base.fq_card(); }
    const Fq& fq_field() const { return rep_->base.fq_field(); }
    unsigned fq_dim() const { return rep_->n * rep_->base.fq_dim(); }

    Elem zero() const { return Elem(rep_->n, rep_->base.zero()); }
    Elem one() const {
        Elem e = zero();
        e[0] = rep_->base.one();
        return e;
    }
    Elem gen() const {
        if (rep_->n == 1) {
            // y reduces to the negated constant term of the modulus
            Elem e = zero();
            e[0] = rep_->base.neg(rep_->modulus.coeff(0));
            return e;
        }
        Elem e = zero();
        e[1] = rep_->base.one();
        return e;
    }
    Elem from_int(u64 v) const {
        Elem e = zero();
        e[0] = rep_->base.from_int(v);
        return e;
    }
    Elem from_base(const BElem& c) const {
        Elem e = zero();
        e[0] = c;
        return e;
    }

    const std::vector<BElem>& coeffs(const Elem& a) const { return a; }
    Elem from_coeffs(std::vector<BElem> v) const {
        if (v.size() > rep_->n) throw domain_error("tower element: coefficient vector too long");
        v.resize(rep_->n, rep_->base.zero());
        return v;
    }

    Elem add(const Elem& a, const Elem& b) const {
        Elem r(rep_->n);
        for (unsigned i = 0; i < rep_->n; ++i) r[i] = rep_->base.add(a[i], b[i]);
        return r;
    }
    Elem sub(const Elem& a, const Elem& b) const {
        Elem r(rep_->n);
        for (unsigned i = 0; i < rep_->n; ++i) r[i] = rep_->base.sub(a[i], b[i]);
        return r;
    }
    Elem neg(const Elem& a) const {
        Elem r(rep_->n);
        for (unsigned i = 0; i < rep_->n; ++i) r[i] = rep_->base.neg(a[i]);
        return r;
    }

    Elem mul(const Elem& a, const Elem& b) const {
        unsigned n = rep_->n;
        const B& F = rep_->base;
        std::vector<BElem> conv(2 * n - 1, F.zero());
        for (unsigned i = 0; i < n; ++i) {
            if (F.is_zero(a[i])) continue;
            for (unsigned j = 0; j < n; ++j)
                conv[i + j] = F.add(conv[i + j], F.mul(a[i], b[j]));
        }
        for (unsigned i = 2 * n - 2; i >= n && i < conv.size(); --i) {
            BElem c = conv[i];
            if (!F.is_zero(c)) {
                const Elem& row = rep_->red[i - n];
                for (unsigned j = 0; j < n; ++j)
                    conv[j] = F.add(conv[j], F.mul(c, row[j]));
            }
            if (i == n) break;
        }
        conv.resize(n);
        return conv;
    }

    Elem inv(const Elem& a) const {
        if (is_zero(a)) throw domain_error("inverse of zero");
        Poly<B> ap(rep_->base, rep_->modulus.var(), a);
        auto [g, u, v] = poly_xgcd(ap, rep_->modulus);
        if (g.degree() != 0) throw domain_error("inverse: modulus not irreducible");
        Poly<B> r = u.scaled(rep_->base.inv(g.coeff(0)));
        Elem e = zero();
        for (int i = 0; i <= r.degree(); ++i) e[(size_t)i] = r.coeff(i);
        return e;
    }

    Elem pow(Elem a, u64 e) const {
        Elem r = one();
        while (e) {
            if (e & 1) r = mul(r, a);
            a = mul(a, a);
            e >>= 1;
        }
        return r;
    }

    // x^q for the bottom coefficient field cardinality q: the twist map of
    // the Ore ring over this field.
    Elem frobenius(const Elem& a) const { return pow(a, fq_card()); }

    bool is_zero(const Elem& a) const {
        for (auto& c : a)
            if (!rep_->base.is_zero(c)) return false;
        return true;
    }
    bool eq(const Elem& a, const Elem& b) const {
        for (unsigned i = 0; i < rep_->n; ++i)
            if (!rep_->base.eq(a[i], b[i])) return false;
        return true;
    }
    bool same_field(const TowerField& o) const {
        if (rep_ == o.rep_) return true;
        return rep_->base.same_field(o.rep_->base) && rep_->modulus == o.rep_->modulus;
    }

    // Canonical order: compare coefficient vectors from the highest power
    // down, coefficients ordered by the base order. Equals the numeric order
    // of element indices where those fit.
    bool elem_less(const Elem& a, const Elem& b) const {
        for (unsigned i = rep_->n; i-- > 0;) {
            if (!rep_->base.eq(a[i], b[i])) return rep_->base.elem_less(a[i], b[i]);
        }
        return false;
    }
    Elem elem_from_index(u64 idx) const {
        u64 bc = rep_->base.cardinality();
        Elem e = zero();
        for (unsigned i = 0; i < rep_->n; ++i) {
            e[i] = rep_->base.elem_from_index(idx % bc);
            idx /= bc;
        }
        if (idx) throw domain_error("element index out of range");
        return e;
    }
    u64 index_of(const Elem& a) const {
        u64 bc = rep_->base.cardinality();
        u64 idx = 0;
        for (unsigned i = rep_->n; i-- > 0;) {
            u64 d = rep_->base.index_of(a[i]);
            if (idx > (~u64(0) - d) / bc) throw cap_error("element index overflow");
            idx = idx * bc + d;
        }
        return idx;
    }
    Elem random_elem(Rng& rng) const {
        Elem e(rep_->n);
        for (unsigned i = 0; i < rep_->n; ++i) e[i] = rep_->base.random_elem(rng);
        return e;
    }

    // F_q-coordinates of an element (length fq_dim), lowest tower layer
    // varying fastest.
    std::vector<u64> fq_unpack(const Elem& a) const {
        std::vector<u64> out;
        out.reserve(fq_dim());
        for (auto& c : a) {
            auto sub = rep_->base.fq_unpack(c);
            out.insert(out.end(), sub.begin(), sub.end());
        }
        return out;
    }
    Elem fq_pack(const std::vector<u64>& v) const {
        if (v.size() != fq_dim()) throw domain_error("fq_pack: wrong length");
        unsigned bd = rep_->base.fq_dim();
        Elem e(rep_->n);
        for (unsigned i = 0; i < rep_->n; ++i)
            e[i] = rep_->base.fq_pack(std::vector<u64>(v.begin() + (size_t)i * bd,
                                                       v.begin() + (size_t)(i + 1) * bd));
        return e;
    }
    Elem fq_basis_elem(unsigned i) const {
        std::vector<u64> v(fq_dim(), fq_field().zero());
        v.at(i) = fq_field().one();
        return fq_pack(v);
    }
    // Scalar action of the coefficient field on an element.
    Elem fq_scale(u64 c, const Elem& a) const {
        auto v = fq_unpack(a);
        const Fq& F = fq_field();
        for (auto& x : v) x = F.mul(c, x);
        return fq_pack(v);
    }

  private:
    struct Rep {
        B base;
        Poly<B> modulus;
        unsigned n;
        std::vector<Elem> red; // y^(n+i) mod modulus
    };
    std::shared_ptr<const Rep> rep_;
};

// -------- canonical modulus search --------

namespace detail {

struct TowerModulusHooks {
    // disk-cache hooks installed by the cache layer; absent by default
    std::function<bool(u64 p, unsigned e, unsigned degree, std::vector<u64>&)> load;
    std::function<void(u64 p, unsigned e, unsigned degree, const std::vector<u64>&)> store;
};

inline TowerModulusHooks& tower_modulus_hooks() {
    static TowerModulusHooks h;
    return h;
}

inline std::map<std::tuple<u64, unsigned, unsigned>, std::vector<u64>>& tower_modulus_memo() {
    static std::map<std::tuple<u64, unsigned, unsigned>, std::vector<u64>> m;
    return m;
}

inline std::mutex& tower_modulus_mutex() {
    static std::mutex mu;
    return mu;
}

// Index-least monic irreducible of the given degree over Fq, found by direct
// scan. For prime fields the scan runs on raw F_p coefficient vectors.
inline std::vector<u64> least_irreducible_over_fq(const Fq& K, unsigned degree) {
    if (K.ext_degree() == 1) return fp_least_irreducible(K.prime_field(), degree);
    u64 q = K.cardinality();
    u64 count = checked_pow(q, degree);
    for (u64 idx = 0; idx < count; ++idx) {
        std::vector<Fq::Elem> c(degree + 1, K.zero());
        u64 v = idx;
        for (unsigned i = 0; i < degree; ++i) { c[i] = v % q; v /= q; }
        c[degree] = K.one();
        if (degree > 1 && K.is_zero(c[0])) continue;
        Poly<Fq> f(K, Var::x, c);
        if (is_irreducible(f)) {
            std::vector<u64> out(c.begin(), c.end());
            return out;
        }
    }
    throw domain_error("no irreducible polynomial found"); // unreachable
}

} // namespace detail

template <>
inline Poly<Fq> TowerField<Fq>::canonical_modulus(const Fq& base, unsigned degree, Var var) {
    if (degree == 0) throw domain_error("tower degree must be >= 1");
    auto key = std::make_tuple(base.p(), (unsigned)base.ext_degree(), degree);
    {
        std::lock_guard<std::mutex> lk(detail::tower_modulus_mutex());
        auto& memo = detail::tower_modulus_memo();
        auto it = memo.find(key);
        if (it != memo.end()) return Poly<Fq>(base, var, std::vector<u64>(it->second));
        auto& hooks = detail::tower_modulus_hooks();
        std::vector<u64> c;
        if (hooks.load && hooks.load(base.p(), base.ext_degree(), degree, c) && c.size() == degree + 1) {
            memo[key] = c;
            return Poly<Fq>(base, var, std::vector<u64>(c));
        }
    }
    std::vector<u64> c = detail::least_irreducible_over_fq(base, degree);
    {
        std::lock_guard<std::mutex> lk(detail::tower_modulus_mutex());
        detail::tower_modulus_memo()[key] = c;
        auto& hooks = detail::tower_modulus_hooks();
        if (hooks.store) hooks.store(base.p(), base.ext_degree(), degree, c);
    }
    return Poly<Fq>(base, var, std::move(c));
}

template <class B>
Poly<B> TowerField<B>::canonical_modulus(const B& base, unsigned degree, Var var) {
    if (degree == 0) throw domain_error("tower degree must be >= 1");
    // Scan coefficient vectors in index order with an odometer; the base
    // cardinality may exceed machine range, in which case the low digit never
    // wraps (the scan succeeds long before that matters).
    u64 bc = 0;
    bool have_bc = true;
    try {
        bc = base.cardinality();
    } catch (const cap_error&) {
        have_bc = false;
    }
    std::vector<u64> digits(degree, 0);
    while (true) {
        std::vector<typename B::Elem> c;
        c.reserve(degree + 1);
        for (unsigned i = 0; i < degree; ++i) c.push_back(base.elem_from_index(digits[i]));
        c.push_back(base.one());
        if (!(degree > 1 && base.is_zero(c[0]))) {
            Poly<B> f(base, var, std::move(c));
            if (is_irreducible(f)) return f;
        }
        unsigned pos = 0;
        while (pos < degree) {
            ++digits[pos];
            if (have_bc && digits[pos] == bc) { digits[pos] = 0; ++pos; }
            else break;
        }
        if (pos == degree) throw cap_error("canonical modulus scan exhausted");
    }
}

// -------- F_q-linear structure maps --------

// Matrix of x -> x^q on the field as an F_q-vector space (q = bottom
// coefficient field cardinality), columns indexed by the fq basis.
template <class T>
Matrix<Fq> sigma_matrix(const T& L) {
    unsigned n = L.fq_dim();
    Matrix<Fq> S(L.fq_field(), n, n);
    for (unsigned j = 0; j < n; ++j) {
        auto img = L.fq_unpack(L.frobenius(L.fq_basis_elem(j)));
        for (unsigned i = 0; i < n; ++i) S.at(i, j) = img[i];
    }
    return S;
}

// Matrix of multiplication by c.
template <class T>
Matrix<Fq> mult_matrix(const T& L, const typename T::Elem& c) {
    unsigned n = L.fq_dim();
    Matrix<Fq> M(L.fq_field(), n, n);
    for (unsigned j = 0; j < n; ++j) {
        auto img = L.fq_unpack(L.mul(c, L.fq_basis_elem(j)));
        for (unsigned i = 0; i < n; ++i) M.at(i, j) = img[i];
    }
    return M;
}

// Minimal polynomial of a over the bottom coefficient field, by linear
// algebra on successive powers.
template <class T>
Poly<Fq> minimal_polynomial(const T& L, const typename T::Elem& a, Var var = Var::x) {
    const Fq& F = L.fq_field();
    unsigned n = L.fq_dim();
    std::vector<std::vector<u64>> pows;
    typename T::Elem cur = L.one();
    for (unsigned d = 0; d <= n; ++d) {
        pows.push_back(L.fq_unpack(cur));
        // solve: does cur lie in the span of previous powers?
        Matrix<Fq> M(F, n, d);
        for (unsigned j = 0; j < d; ++j)
            for (unsigned i = 0; i < n; ++i) M.at(i, j) = pows[j][i];
        auto sol = M.solve(std::vector<u64>(pows[d].begin(), pows[d].end()));
        if (sol) {
            std::vector<u64> c(d + 1);
            for (unsigned j = 0; j < d; ++j) c[j] = F.neg((*sol)[j]);
            c[d] = F.one();
            return Poly<Fq>(F, var, std::move(c));
        }
        cur = L.mul(cur, a);
    }
    throw domain_error("minimal_polynomial: no relation found"); // unreachable
}

// -------- subfield root search --------

// Least root in L of an irreducible f over the bottom F_q with deg f | [L:F_q].
// The roots lie in the degree-d subfield W = ker(sigma^d - id); W is
// enumerated through its own multiplication table, so the search costs
// O(q^d d^2) rather than a factorization over L. An optional anchor restricts
// to roots whose induced embedding of F_q[x]/(f) maps `src` to `dst`:
// anchor_src is a polynomial over F_q evaluated at the root, anchor_dst an
// element of L.
template <class T>
std::optional<typename T::Elem>
least_root_in_subfield(const T& L, const Poly<Fq>& f,
                       const std::optional<std::pair<Poly<Fq>, typename T::Elem>>& anchor = {}) {
    const Fq& F = L.fq_field();
    if (!F.same_field(f.field())) throw domain_error("least_root_in_subfield: field mismatch");
    unsigned d = (unsigned)f.degree();
    unsigned n = L.fq_dim();
    if (d == 0 || n % d != 0) return std::nullopt;
    u64 wcard = checked_pow(F.cardinality(), d);
    if (wcard > (u64)1 << 22) throw cap_error("subfield root search: subfield too large");

    // basis of W = ker(S^d - I)
    Matrix<Fq> S = sigma_matrix(L);
    Matrix<Fq> Sd = S.pow(d);
    for (unsigned i = 0; i < n; ++i) Sd.at(i, i) = F.sub(Sd.at(i, i), F.one());
    auto wbasis = Sd.kernel_basis();
    if (wbasis.size() != d) throw domain_error("subfield root search: unexpected subfield dimension");

    std::vector<typename T::Elem> wb;
    for (auto& v : wbasis) wb.push_back(L.fq_pack(v));

    // structure constants: w_i * w_j in W-coordinates
    Matrix<Fq> Bm(F, n, d);
    for (unsigned j = 0; j < d; ++j)
        for (unsigned i = 0; i < n; ++i) Bm.at(i, j) = wbasis[j][i];
    auto wcoords = [&](const typename T::Elem& x) {
        auto sol = Bm.solve(L.fq_unpack(x));
        if (!sol) throw domain_error("subfield root search: element outside subfield");
        return *sol;
    };
    std::vector<std::vector<std::vector<u64>>> sc(d, std::vector<std::vector<u64>>(d));
    for (unsigned i = 0; i < d; ++i)
        for (unsigned j = 0; j <= i; ++j) {
            sc[i][j] = wcoords(L.mul(wb[i], wb[j]));
            sc[j][i] = sc[i][j];
        }
    auto wmul = [&](const std::vector<u64>& a, const std::vector<u64>& b) {
        std::vector<u64> r(d, 0);
        for (unsigned i = 0; i < d; ++i) {
            if (F.is_zero(a[i])) continue;
            for (unsigned j = 0; j < d; ++j) {
                if (F.is_zero(b[j])) continue;
                u64 c = F.mul(a[i], b[j]);
                for (unsigned l = 0; l < d; ++l) r[l] = F.add(r[l], F.mul(c, sc[i][j][l]));
            }
        }
        return r;
    };
    std::vector<u64> wone = wcoords(L.one());

    std::optional<typename T::Elem> best;
    for (u64 idx = 0; idx < wcard; ++idx) {
        std::vector<u64> x(d);
        u64 v = idx;
        for (unsigned i = 0; i < d; ++i) { x[i] = v % F.cardinality(); v /= F.cardinality(); }
        // Horner in W-coordinates
        std::vector<u64> acc(d, 0);
        for (unsigned l = 0; l < d; ++l) acc[l] = F.mul(f.coeff(f.degree()), wone[l]);
        for (int i = f.degree() - 1; i >= 0; --i) {
            acc = wmul(acc, x);
            u64 ci = f.coeff(i);
            for (unsigned l = 0; l < d; ++l) acc[l] = F.add(acc[l], F.mul(ci, wone[l]));
        }
        bool zero = true;
        for (auto c : acc)
            if (!F.is_zero(c)) { zero = false; break; }
        if (!zero) continue;
        // reconstruct ambient element
        std::vector<u64> amb(n, 0);
        for (unsigned i = 0; i < d; ++i)
            for (unsigned l = 0; l < n; ++l) amb[l] = F.add(amb[l], F.mul(x[i], wbasis[i][l]));
        auto cand = L.fq_pack(amb);
        if (anchor) {
            // evaluate the anchor polynomial at the candidate root
            typename T::Elem val = L.zero();
            for (int i = anchor->first.degree(); i >= 0; --i) {
                val = L.mul(val, cand);
                val = L.add(val, L.fq_scale(anchor->first.coeff(i), L.one()));
            }
            if (!L.eq(val, anchor->second)) continue;
        }
        if (!best || L.elem_less(cand, *best)) best = cand;
    }
    return best;
}

} // namespace dkt
