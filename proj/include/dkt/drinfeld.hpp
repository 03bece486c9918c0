#pragma once
// Drinfeld F_q[t]-modules: the homomorphism a -> phi_a, rank, characteristic,
// reduction at places, restriction to subrings F_q[b], isogenies, and a
// windowed homomorphism-space search.

#include <type_traits>
#include <utility>
#include <vector>

#include "dkt/ore.hpp"
#include "dkt/place.hpp"
#include "dkt/ratfunc.hpp"
#include "dkt/tower.hpp"

namespace dkt {

// Kernel of a -> d(phi_a): the zero ideal (generic) or a maximal ideal (p0).
struct Characteristic {
    bool generic;
    Poly<Fq> p0; // monic irreducible in t when special, zero when generic

    static Characteristic make_generic(const Fq& F) {
        return {true, Poly<Fq>::zero(F, Var::t)};
    }
    static Characteristic make_special(Poly<Fq> p) {
        if (p.degree() < 1) throw domain_error("characteristic: p0 must be nonconstant");
        return {false, std::move(p)};
    }

    // Every a is prime to the zero ideal; otherwise test gcd(a, p0) = 1.
    bool prime_to(const Poly<Fq>& a) const {
        if (generic) return !a.is_zero();
        return poly_gcd(a, p0).degree() == 0;
    }

    bool operator==(const Characteristic& o) const {
        if (generic != o.generic) return false;
        return generic || p0 == o.p0;
    }
    bool operator!=(const Characteristic& o) const { return !(*this == o); }
};

template <class F>
class DrinfeldModule {
  public:
    using Elem = typename F::Elem;

    DrinfeldModule(const F& base, const OrePoly<F>& phi_t) : base_(base), phi_t_(phi_t) {
        if (phi_t_.degree() < 1) throw domain_error("drinfeld: deg_tau(phi_t) must be >= 1");
    }

    const F& base() const { return base_; }
    const OrePoly<F>& phi_t() const { return phi_t_; }
    Elem gamma_t() const { return phi_t_.constant_term(); }
    unsigned rank() const { return (unsigned)phi_t_.degree(); }
    u64 q() const { return base_.fq_card(); }

    // Image of a(t) under the ring homomorphism, by Horner recursion in the
    // Ore ring; constant coefficients embed through the F_q-structure map.
    OrePoly<F> phi(const Poly<Fq>& a) const {
        if (!base_.fq_field().same_field(a.field()))
            throw domain_error("phi: level polynomial over the wrong constant field");
        if (a.var() != Var::t) throw domain_error("phi: level polynomial must be in t");
        OrePoly<F> acc = OrePoly<F>::zero(base_);
        for (int i = a.degree(); i >= 0; --i) {
            acc = acc * phi_t_;
            acc = acc + OrePoly<F>::constant(base_, embed_scalar(a.coeff((size_t)i)));
        }
        return acc;
    }

    // phi_a evaluated at a point of (an extension sharing) the base field.
    Elem act(const Poly<Fq>& a, const Elem& x) const { return phi(a).evaluate(x); }

    Characteristic characteristic() const {
        if constexpr (std::is_same_v<F, RatFuncField>) {
            RatFunc g = gamma_t();
            if (g.den.is_one() && g.num.degree() <= 0) {
                const Fq& C = base_.fq_field();
                Poly<Fq> p0 = Poly<Fq>::gen(C, Var::t) - Poly<Fq>::constant(C, Var::t, g.num.coeff(0));
                return Characteristic::make_special(std::move(p0));
            }
            return Characteristic::make_generic(base_.fq_field());
        } else {
            return Characteristic::make_special(minimal_polynomial(base_, gamma_t(), Var::t));
        }
    }

    // Restriction to B = F_q[u], u -> b(t): a Drinfeld B-module of rank r*deg(b).
    DrinfeldModule restrict(const Poly<Fq>& b) const {
        if (b.degree() < 1) throw domain_error("restrict: b must be nonconstant");
        return DrinfeldModule(base_, phi(b));
    }

    Elem embed_scalar(Fq::Elem c) const {
        if constexpr (std::is_same_v<F, RatFuncField>)
            return base_.from_scalar(c);
        else
            return base_.fq_scale(c, base_.one());
    }

    bool operator==(const DrinfeldModule& o) const {
        return base_.same_field(o.base_) && phi_t_ == o.phi_t_;
    }
    bool operator!=(const DrinfeldModule& o) const { return !(*this == o); }

  private:
    F base_;
    OrePoly<F> phi_t_;
};

// Good-reduction specialization at a place: coefficient-wise residue map.
// Poles and a vanishing leading coefficient are both bad reduction.
inline DrinfeldModule<TowerField<Fq>> reduce_at(const DrinfeldModule<RatFuncField>& d,
                                                const Place& v) {
    const TowerField<Fq>& kv = v.residue_field();
    auto pt = d.phi_t().template map_coeffs<TowerField<Fq>>(
        kv, [&](const RatFunc& c) { return v.reduce(c); });
    if (pt.degree() != (int)d.rank()) throw bad_reduction_error(v.name());
    return DrinfeldModule<TowerField<Fq>>(kv, pt);
}

// A nonzero twisted polynomial f with f*phi_t = phi'_t*f, checked at construction.
template <class F>
class Isogeny {
  public:
    Isogeny(DrinfeldModule<F> source, DrinfeldModule<F> target, OrePoly<F> f)
        : source_(std::move(source)), target_(std::move(target)), f_(std::move(f)) {
        if (!source_.base().same_field(target_.base()))
            throw domain_error("isogeny: source and target over different fields");
        if (f_.is_zero()) throw domain_error("isogeny: f = 0");
        if (f_ * source_.phi_t() != target_.phi_t() * f_)
            throw domain_error("isogeny: f does not intertwine phi_t and phi'_t");
    }

    const DrinfeldModule<F>& source() const { return source_; }
    const DrinfeldModule<F>& target() const { return target_; }
    const OrePoly<F>& f() const { return f_; }

  private:
    DrinfeldModule<F> source_;
    DrinfeldModule<F> target_;
    OrePoly<F> f_;
};

namespace detail {

// Flattens Ore polynomials with polynomial-in-theta coefficients into F_q
// rows indexed by (tau-degree, theta-degree), after clearing a per-tau-slot
// common denominator across the whole probe family.
inline std::vector<Poly<Fq>> clear_denominators(const RatFuncField& K,
                                                const std::vector<OrePoly<RatFuncField>>& probes,
                                                int tau_deg) {
    std::vector<Poly<Fq>> lcms;
    for (int j = 0; j <= tau_deg; ++j) {
        Poly<Fq> l = Poly<Fq>::one(K.fq_field(), Var::theta);
        for (const auto& pr : probes) {
            Poly<Fq> den = pr.coeff((size_t)j).den;
            l = (l * den).divmod(poly_gcd(l, den)).first.monic();
        }
        lcms.push_back(l);
    }
    return lcms;
}

} // namespace detail

// F_q-basis of {u : deg_tau(u) <= D, u*phi_t = phi'_t*u}, the homomorphism
// space window from d to d2.  The commutation equation is F_q-linear in the
// F_q-coordinates of u's coefficients: over F_q(theta) those coordinates are
// the theta-coefficients up to degree E, over a finite base the coordinates
// in a fixed F_q-basis.  The returned basis is in reduced echelon form with
// respect to the probe order, so it is deterministic, and every element is
// re-checked against the commutation identity exactly.
inline std::vector<OrePoly<RatFuncField>> hom_space(const DrinfeldModule<RatFuncField>& d,
                                                    const DrinfeldModule<RatFuncField>& d2,
                                                    unsigned D, unsigned E) {
    const RatFuncField& K = d.base();
    if (!K.same_field(d2.base())) throw domain_error("hom_space: mixed base fields");
    const Fq& C = K.fq_field();

    std::vector<OrePoly<RatFuncField>> units;   // probe u = theta^l tau^i
    std::vector<OrePoly<RatFuncField>> residual; // u*phi_t - phi'_t*u
    for (unsigned i = 0; i <= D; ++i)
        for (unsigned l = 0; l <= E; ++l) {
            RatFunc c = K.from_poly(Poly<Fq>::one(C, Var::theta).shifted(l));
            OrePoly<RatFuncField> u = OrePoly<RatFuncField>::monomial(K, c, i);
            units.push_back(u);
            residual.push_back(u * d.phi_t() - d2.phi_t() * u);
        }

    int rdeg = -1;
    for (const auto& r : residual) rdeg = std::max(rdeg, r.degree());
    std::vector<Poly<Fq>> lcms = detail::clear_denominators(K, residual, rdeg);

    // One F_q-column per probe; rows are (tau-slot, theta-coefficient) pairs.
    std::vector<std::vector<Poly<Fq>>> cleared(residual.size());
    std::vector<int> rows(std::max(rdeg + 1, 0), -1);
    for (size_t p = 0; p < residual.size(); ++p)
        for (int j = 0; j <= rdeg; ++j) {
            RatFunc c = residual[p].coeff((size_t)j);
            Poly<Fq> num = c.num * lcms[(size_t)j].divmod(c.den).first;
            rows[(size_t)j] = std::max(rows[(size_t)j], num.degree());
            cleared[p].push_back(std::move(num));
        }

    size_t nrows = 0;
    for (int j = 0; j <= rdeg; ++j) nrows += (size_t)(rows[(size_t)j] + 1);
    Matrix<Fq> M(C, nrows, units.size());
    for (size_t p = 0; p < units.size(); ++p) {
        size_t row = 0;
        for (int j = 0; j <= rdeg; ++j)
            for (int l = 0; l <= rows[(size_t)j]; ++l)
                M.at(row++, p) = cleared[p][(size_t)j].coeff((size_t)l);
    }

    std::vector<OrePoly<RatFuncField>> basis;
    for (const auto& vec : M.kernel_basis()) {
        OrePoly<RatFuncField> u = OrePoly<RatFuncField>::zero(K);
        for (size_t p = 0; p < units.size(); ++p)
            if (!C.is_zero(vec[p]))
                u = u + OrePoly<RatFuncField>::constant(K, K.from_scalar(vec[p])) * units[p];
        if (u * d.phi_t() != d2.phi_t() * u) throw domain_error("hom_space: verification failed");
        basis.push_back(std::move(u));
    }
    return basis;
}

template <class F>
std::vector<OrePoly<F>> hom_space(const DrinfeldModule<F>& d, const DrinfeldModule<F>& d2,
                                  unsigned D) {
    static_assert(!std::is_same_v<F, RatFuncField>, "rational base needs the (D, E) overload");
    const F& k = d.base();
    if (!k.same_field(d2.base())) throw domain_error("hom_space: mixed base fields");
    const Fq& C = k.fq_field();
    unsigned dim = k.fq_dim();

    std::vector<OrePoly<F>> units;
    std::vector<OrePoly<F>> residual;
    for (unsigned i = 0; i <= D; ++i)
        for (unsigned b = 0; b < dim; ++b) {
            OrePoly<F> u = OrePoly<F>::monomial(k, k.fq_basis_elem(b), i);
            units.push_back(u);
            residual.push_back(u * d.phi_t() - d2.phi_t() * u);
        }

    int rdeg = -1;
    for (const auto& r : residual) rdeg = std::max(rdeg, r.degree());
    size_t nrows = (size_t)(rdeg + 1) * dim;
    Matrix<Fq> M(C, nrows, units.size());
    for (size_t p = 0; p < units.size(); ++p)
        for (int j = 0; j <= rdeg; ++j) {
            std::vector<Fq::Elem> co = k.fq_unpack(residual[p].coeff((size_t)j));
            for (u64 l = 0; l < dim; ++l) M.at((size_t)j * dim + l, p) = co[l];
        }

    std::vector<OrePoly<F>> basis;
    for (const auto& vec : M.kernel_basis()) {
        OrePoly<F> u = OrePoly<F>::zero(k);
        for (size_t p = 0; p < units.size(); ++p)
            if (!C.is_zero(vec[p])) u = u + OrePoly<F>::constant(k, k.fq_scale(vec[p], k.one())) * units[p];
        if (u * d.phi_t() != d2.phi_t() * u) throw domain_error("hom_space: verification failed");
        basis.push_back(std::move(u));
    }
    return basis;
}

// Window defaults: deg_tau bound 2r, theta-degree bound twice the largest
// theta-degree appearing in phi_t (numerators and denominators both count).
inline unsigned hom_default_D(const DrinfeldModule<RatFuncField>& d) { return 2 * d.rank(); }

inline unsigned hom_default_E(const DrinfeldModule<RatFuncField>& d) {
    int m = 0;
    for (int i = 0; i <= d.phi_t().degree(); ++i) {
        const RatFunc& c = d.phi_t().coeff((size_t)i);
        m = std::max({m, c.num.degree(), c.den.degree()});
    }
    return 2u * (unsigned)m;
}

enum class IsoTriviality { yes, no, unknown };

// Twist test over K = F_q(theta): phi is isomorphic over K^sep to a module
// with constant coefficients iff every ratio a_i^(q^j-1) / a_j^(q^i-1) over
// pairs i < j of nonzero coefficient indices is itself constant.  The ratios
// are invariant under twisting by any c (the c-powers cancel), which makes
// "no" sound; a common twist exists whenever all ratios are constant, which
// makes "yes" sound.
inline IsoTriviality is_isotrivial(const DrinfeldModule<RatFuncField>& d) {
    const RatFuncField& K = d.base();
    u64 q = K.fq_card();
    auto constant = [&](const RatFunc& c) { return c.den.is_one() && c.num.degree() <= 0; };

    std::vector<unsigned> idx;
    for (int i = 0; i <= d.phi_t().degree(); ++i)
        if (!K.is_zero(d.phi_t().coeff((size_t)i))) idx.push_back((unsigned)i);

    for (size_t s = 0; s < idx.size(); ++s)
        for (size_t u = s + 1; u < idx.size(); ++u) {
            unsigned i = idx[s], j = idx[u];
            RatFunc num = K.pow(d.phi_t().coeff(i), checked_pow(q, j) - 1);
            RatFunc den = K.pow(d.phi_t().coeff(j), checked_pow(q, i) - 1);
            if (!constant(K.div(num, den))) return IsoTriviality::no;
        }
    return IsoTriviality::yes;
}

} // namespace dkt
