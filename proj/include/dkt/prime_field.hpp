#pragma once

// Prime field F_p with machine-word p. Elements are residues in [0, p).

#include "common.hpp"

namespace dkt {

class PrimeField {
  public:
    using Elem = u64;

    explicit PrimeField(u64 p) : p_(p) {
        if (!is_prime_u64(p)) throw domain_error("PrimeField: " + std::to_string(p) + " is not prime");
    }

    u64 p() const { return p_; }
    u64 cardinality() const { return p_; }
    unsigned log_p_card() const { return 1; }

    Elem zero() const { return 0; }
    Elem one() const { return 1 % p_; }
    Elem from_int(u64 n) const { return n % p_; }

    // Elements are indexed 0..p-1; the index order is the canonical order.
    Elem elem_from_index(u64 i) const {
        if (i >= p_) throw domain_error("element index out of range");
        return i;
    }
    u64 index_of(Elem a) const { return a; }
    bool elem_less(Elem a, Elem b) const { return a < b; }
    Elem random_elem(Rng& rng) const { return rng.below(p_); }

    Elem add(Elem a, Elem b) const { u64 s = a + b; return s >= p_ ? s - p_ : s; }
    Elem sub(Elem a, Elem b) const { return a >= b ? a - b : a + p_ - b; }
    Elem neg(Elem a) const { return a == 0 ? 0 : p_ - a; }
    Elem mul(Elem a, Elem b) const { return mul_mod(a, b, p_); }

    Elem inv(Elem a) const {
        if (a == 0) throw domain_error("PrimeField: inverse of zero");
        return pow_mod(a, p_ - 2, p_);
    }

    Elem pow(Elem a, u64 e) const { return pow_mod(a, e, p_); }

    bool is_zero(Elem a) const { return a == 0; }
    bool eq(Elem a, Elem b) const { return a == b; }
    bool same_field(const PrimeField& o) const { return p_ == o.p_; }

  private:
    u64 p_;
};

} // namespace dkt
