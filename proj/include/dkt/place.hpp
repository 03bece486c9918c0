#pragma once

// Places of K = F_q(theta) away from infinity: monic irreducible pi in
// F_q[theta], with residue field F_q[theta]/(pi) realized as an extension
// tower whose modulus is pi itself, so the reduction of theta is the tower
// generator. Place enumeration follows (degree, index) order, the same
// canonical order used everywhere else.

#include "common.hpp"
#include "ratfunc.hpp"
#include "tower.hpp"

#include <sstream>

namespace dkt {

// compact display form used in error messages and reports
template <class F>
std::string poly_string(const Poly<F>& f) {
    if (f.is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (int i = f.degree(); i >= 0; --i) {
        auto c = f.coeff(i);
        if (f.field().is_zero(c)) continue;
        if (!first) os << "+";
        first = false;
        u64 idx = f.field().index_of(c);
        if (i == 0) {
            os << idx;
        } else {
            if (idx != 1) os << idx << "*";
            os << var_name(f.var());
            if (i > 1) os << "^" << i;
        }
    }
    return os.str();
}

class Place {
  public:
    using Residue = TowerField<Fq>;

    explicit Place(const Poly<Fq>& pi)
        : pi_(pi), kv_(pi.field(), pi) {
        if (pi.var() != Var::theta) throw domain_error("place modulus must be a polynomial in theta");
        if (!pi.is_monic()) throw domain_error("place modulus must be monic");
        // irreducibility is validated by the tower constructor
    }

    const Poly<Fq>& pi() const { return pi_; }
    unsigned degree() const { return (unsigned)pi_.degree(); }
    const Residue& residue_field() const { return kv_; }

    // the distinguished root of pi: the class of theta
    Residue::Elem theta_bar() const { return kv_.gen(); }

    std::string name() const { return poly_string(pi_); }

    Residue::Elem reduce_poly(const Poly<Fq>& f) const {
        if (f.var() != Var::theta) throw domain_error("reduce: polynomial not in theta");
        // Horner at theta_bar
        Residue::Elem acc = kv_.zero();
        for (int i = f.degree(); i >= 0; --i) {
            acc = kv_.mul(acc, theta_bar());
            acc = kv_.add(acc, kv_.from_base(f.coeff(i)));
        }
        return acc;
    }

    Residue::Elem reduce(const RatFunc& x) const {
        Residue::Elem d = reduce_poly(x.den);
        if (kv_.is_zero(d)) throw bad_reduction_error(name());
        return kv_.mul(reduce_poly(x.num), kv_.inv(d));
    }

    bool operator==(const Place& o) const { return pi_ == o.pi_; }

  private:
    Poly<Fq> pi_;
    Residue kv_;
};

// all places of degree 1..max_degree in (degree, index) order
inline std::vector<Place> places_up_to(const Fq& F, unsigned max_degree) {
    std::vector<Place> out;
    for (auto& pi : irreducibles_up_to(F, Var::theta, max_degree)) out.emplace_back(pi);
    return out;
}

} // namespace dkt
