#pragma once

// Shared error types, deterministic RNG, and small integer helpers used
// throughout the library.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dkt {

using u64 = std::uint64_t;
using u128 = unsigned __int128;
using i64 = std::int64_t;

// Domain errors: invalid mathematical input (non-prime modulus, mixed fields,
// reducible modulus where an irreducible one is required, ...).
struct domain_error : std::invalid_argument {
    explicit domain_error(const std::string& what) : std::invalid_argument(what) {}
};

// Resource errors: a search or closure hit its configured cap.
struct cap_error : std::runtime_error {
    explicit cap_error(const std::string& what) : std::runtime_error(what) {}
};

// Reduction at a place failed (pole in a coefficient or vanishing leading
// coefficient). Carries the offending place as a printable string.
struct bad_reduction_error : std::runtime_error {
    std::string place;
    explicit bad_reduction_error(const std::string& place_str)
        : std::runtime_error("bad reduction at place " + place_str), place(place_str) {}
};

inline u64 mul_mod(u64 a, u64 b, u64 m) { return (u64)((u128)a * b % m); }

inline u64 pow_mod(u64 base, u64 exp, u64 m) {
    u64 r = 1 % m;
    base %= m;
    while (exp) {
        if (exp & 1) r = mul_mod(r, base, m);
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    return r;
}

// Deterministic Miller-Rabin, valid for all 64-bit inputs.
inline bool is_prime_u64(u64 n) {
    if (n < 2) return false;
    for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % p == 0) return n == p;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) { d >>= 1; ++s; }
    for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        u64 x = pow_mod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 1; i < s; ++i) {
            x = mul_mod(x, x, n);
            if (x == n - 1) { composite = false; break; }
        }
        if (composite) return false;
    }
    return true;
}

// Checked small-exponent power; throws on overflow instead of wrapping.
inline u64 checked_pow(u64 base, unsigned exp) {
    u64 r = 1;
    for (unsigned i = 0; i < exp; ++i) {
        if (base != 0 && r > ~u64(0) / base) throw cap_error("integer overflow in checked_pow");
        r *= base;
    }
    return r;
}

inline u64 gcd_u64(u64 a, u64 b) {
    while (b) { u64 t = a % b; a = b; b = t; }
    return a;
}

// FNV-1a, used to derive per-task RNG seeds from the experiment seed so that
// results do not depend on thread scheduling.
inline u64 fnv1a(u64 h, u64 x) {
    for (int i = 0; i < 8; ++i) {
        h ^= (x >> (8 * i)) & 0xff;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline u64 fnv1a(u64 h, const std::string& s) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

constexpr u64 fnv_offset = 0xcbf29ce484222325ull;

// splitmix64: tiny, fully specified, platform-independent generator.
// Used wherever the library needs randomization (equal-degree splitting,
// property sampling) so runs are reproducible from the config seed.
class Rng {
  public:
    explicit Rng(u64 seed) : state_(seed) {}

    u64 next() {
        u64 z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n).
    u64 below(u64 n) {
        if (n == 0) throw domain_error("Rng::below(0)");
        u64 limit = ~u64(0) - ~u64(0) % n;
        u64 x;
        do { x = next(); } while (x >= limit);
        return x % n;
    }

  private:
    u64 state_;
};

// Exact rational with 64-bit parts, for densities and z-scores in reports.
struct Rational {
    i64 num = 0;
    i64 den = 1;

    Rational() = default;
    Rational(i64 n, i64 d) : num(n), den(d) {
        if (den == 0) throw domain_error("rational with zero denominator");
        if (den < 0) { num = -num; den = -den; }
        i64 g = (i64)gcd_u64(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }

    double value() const { return (double)num / (double)den; }
    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
};

} // namespace dkt
