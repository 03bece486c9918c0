#pragma once

// Frobenius sampling across the places of K = F_q(theta), and sound
// finite-level classification of the mod-a image. The Frobenius at a good
// place acts on the a-torsion of the reduction; each place picks its own
// torsion basis, so the sampled matrix is meaningful up to conjugacy only.
// Verdicts therefore rest on conjugation-invariant evidence alone:
// characteristic polynomials, element orders, and determinants, measured
// against the full subgroup lattice of GL_r(A/(a)) when that is small
// enough to enumerate.

#include "torsion.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

namespace dkt {

// -------- display helpers --------

inline std::string ratfunc_string(const RatFunc& x) {
    if (x.den.is_one()) return poly_string(x.num);
    return "(" + poly_string(x.num) + ")/(" + poly_string(x.den) + ")";
}

inline std::string module_string(const DrinfeldModule<RatFuncField>& d) {
    std::ostringstream os;
    os << "phi_t = ";
    bool first = true;
    for (int i = 0; i <= d.phi_t().degree(); ++i) {
        RatFunc c = d.phi_t().coeff(i);
        if (d.base().is_zero(c)) continue;
        if (!first) os << " + ";
        first = false;
        if (i == 0) {
            os << ratfunc_string(c);
        } else {
            if (!(c == d.base().one())) os << "(" << ratfunc_string(c) << ")*";
            os << "tau";
            if (i > 1) os << "^" << i;
        }
    }
    return os.str();
}

// -------- characteristic polynomials over A/(a) --------

// det(x*I - m): coefficient list over A/(a), constant term first, monic of
// degree n. Laplace expansion on polynomials in x; ranks stay small.
inline std::vector<Poly<Fq>> pmat_char_poly(const LevelRing& R, const PMat& m) {
    size_t n = m.size();
    if (n == 0) throw domain_error("characteristic polynomial of empty matrix");
    for (auto& row : m)
        if (row.size() != n) throw domain_error("characteristic polynomial of non-square matrix");
    using XP = std::vector<Poly<Fq>>;
    auto xmul = [&](const XP& f, const XP& g) {
        XP h(f.size() + g.size() - 1, R.zero());
        for (size_t i = 0; i < f.size(); ++i)
            for (size_t j = 0; j < g.size(); ++j) h[i + j] = R.add(h[i + j], f[i] * g[j]);
        return h;
    };
    auto xadd = [&](XP f, const XP& g) {
        if (f.size() < g.size()) f.resize(g.size(), R.zero());
        for (size_t i = 0; i < g.size(); ++i) f[i] = R.add(f[i], g[i]);
        return f;
    };
    auto xneg = [&](XP f) {
        for (auto& c : f) c = R.neg(c);
        return f;
    };

    std::vector<std::vector<XP>> e(n, std::vector<XP>(n));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            if (i == j)
                e[i][j] = XP{R.neg(m[i][j]), R.one()};
            else
                e[i][j] = XP{R.neg(m[i][j])};
        }

    std::function<XP(const std::vector<std::vector<XP>>&)> det =
        [&](const std::vector<std::vector<XP>>& mat) -> XP {
        size_t k = mat.size();
        if (k == 1) return mat[0][0];
        XP acc{R.zero()};
        for (size_t i = 0; i < k; ++i) {
            std::vector<std::vector<XP>> sub;
            sub.reserve(k - 1);
            for (size_t i2 = 0; i2 < k; ++i2) {
                if (i2 == i) continue;
                sub.emplace_back(mat[i2].begin() + 1, mat[i2].end());
            }
            XP term = xmul(mat[i][0], det(sub));
            acc = xadd(std::move(acc), i % 2 == 0 ? term : xneg(term));
        }
        return acc;
    };

    XP cp = det(e);
    cp.resize(n + 1, R.zero());
    if (!R.eq(cp[n], R.one()))
        throw domain_error("characteristic polynomial is not monic");
    return cp;
}

inline bool pmat_annihilated_by(const LevelRing& R, const std::vector<Poly<Fq>>& cp,
                                const PMat& m) {
    size_t n = m.size();
    PMat acc = pmat_scalar(R, R.zero(), n);
    PMat pw = pmat_identity(R, n);
    for (size_t i = 0; i < cp.size(); ++i) {
        acc = pmat_add(R, acc, pmat_mul(R, pmat_scalar(R, cp[i], n), pw));
        if (i + 1 < cp.size()) pw = pmat_mul(R, pw, m);
    }
    return pmat_eq(R, acc, pmat_scalar(R, R.zero(), n));
}

inline std::string char_poly_string(const std::vector<Poly<Fq>>& cp) {
    std::ostringstream os;
    bool first = true;
    for (size_t i = cp.size(); i-- > 0;) {
        const Poly<Fq>& c = cp[i];
        if (c.is_zero() && i + 1 != cp.size()) continue;
        if (!first) os << " + ";
        first = false;
        if (i + 1 == cp.size()) {
            os << "x";
            if (i > 1) os << "^" << i;
        } else if (i == 0) {
            os << "(" << poly_string(c) << ")";
        } else {
            os << "(" << poly_string(c) << ")*x";
            if (i > 1) os << "^" << i;
        }
    }
    return os.str();
}

// -------- Frobenius samples --------

struct FrobeniusSample {
    Place place;
    Poly<Fq> level;
    PMat matrix;                      // basis local to the place
    std::vector<Poly<Fq>> char_poly;  // constant term first, monic
    Poly<Fq> det;
    u64 order = 0;

    unsigned rank() const { return (unsigned)matrix.size(); }
};

struct SkipRecord {
    std::string place;
    std::string reason;
};

struct SampleBatch {
    std::vector<FrobeniusSample> samples;
    std::vector<SkipRecord> skips;
};

// Sample of the Frobenius action on an already-built torsion space, with
// the conjugacy-invariant data cross-checked on construction.
template <class F>
FrobeniusSample frobenius_sample(const Place& v, const TorsionModule<F>& t) {
    LevelRing R(t.level());
    PMat fm = t.frobenius_matrix();
    auto cp = pmat_char_poly(R, fm);
    if (!pmat_annihilated_by(R, cp, fm))
        throw domain_error("characteristic polynomial fails to annihilate the Frobenius matrix");
    Poly<Fq> dt = pmat_det(R, fm);
    Poly<Fq> c0 = fm.size() % 2 == 0 ? cp[0] : R.neg(cp[0]);
    if (!R.eq(dt, c0))
        throw domain_error("determinant disagrees with the characteristic polynomial");
    auto ord = pmat_order(R, fm);
    if (!ord) throw cap_error("Frobenius order above the iteration cap");
    if (gl_order((unsigned)fm.size(), t.level()) % *ord != 0)
        throw domain_error("Frobenius order does not divide the group order");
    return {v, t.level(), std::move(fm), std::move(cp), std::move(dt), *ord};
}

// One sample per good-reduction place of degree <= max_place_degree whose
// residue characteristic is prime to the level, in canonical place order.
// Per-place failures (bad reduction, level meeting the residue
// characteristic, blown caps) become skip records.
inline SampleBatch sample_frobenii(
    const DrinfeldModule<RatFuncField>& d, const Poly<Fq>& a, unsigned max_place_degree,
    u64 point_cap = TorsionModule<TowerField<Fq>>::default_point_cap) {
    if (!d.characteristic().prime_to(a)) throw domain_error("level meets the characteristic");
    LevelRing R(a); // validates the level shape
    if (R.modulus().degree() < 1) throw domain_error("level must have positive degree");

    SampleBatch batch;
    for (const Place& v : places_up_to(d.base().fq_field(), max_place_degree)) {
        try {
            auto dv = reduce_at(d, v);
            if (!dv.characteristic().prime_to(a)) {
                batch.skips.push_back({v.name(), "level meets the residue characteristic"});
                continue;
            }
            auto t = torsion_space(dv, a, point_cap);
            batch.samples.push_back(frobenius_sample(v, t));
        } catch (const bad_reduction_error&) {
            batch.skips.push_back({v.name(), "bad reduction"});
        } catch (const cap_error& e) {
            batch.skips.push_back({v.name(), std::string("cap: ") + e.what()});
        }
    }
    return batch;
}

// -------- element keys and subgroup closure --------

inline u64 pmat_key(const LevelRing& R, const PMat& m) {
    u64 q = R.cardinality();
    u64 key = 0;
    for (auto& row : m)
        for (auto& x : row) {
            u64 i = R.index_of(x);
            if (__builtin_mul_overflow(key, q, &key) || __builtin_add_overflow(key, i, &key))
                throw cap_error("matrix key exceeds 64 bits");
        }
    return key;
}

inline PMat pmat_from_key(const LevelRing& R, size_t n, u64 key) {
    u64 q = R.cardinality();
    PMat m(n, std::vector<Poly<Fq>>(n, R.zero()));
    for (size_t i = n; i-- > 0;)
        for (size_t j = n; j-- > 0;) {
            m[i][j] = R.elem_from_index(key % q);
            key /= q;
        }
    return m;
}

struct ClosureResult {
    u64 order = 0;
    bool overflowed = false;
    std::vector<u64> element_keys; // sorted; empty when overflowed
};

// Breadth-first closure of the subgroup generated by invertible matrices.
// Finite order makes the multiplicative closure a group.
inline ClosureResult group_closure(const LevelRing& R, const std::vector<PMat>& gens,
                                   u64 cap = 10'000'000) {
    if (gens.empty()) throw domain_error("group closure needs at least one generator");
    size_t n = gens[0].size();
    for (auto& g : gens) {
        if (g.size() != n) throw domain_error("group closure: mixed matrix sizes");
        for (auto& row : g)
            if (row.size() != n) throw domain_error("group closure: non-square generator");
        if (!R.is_unit(pmat_det(R, g))) throw domain_error("group closure: singular generator");
    }
    PMat id = pmat_identity(R, n);
    std::set<u64> seen{pmat_key(R, id)};
    std::queue<PMat> work;
    work.push(std::move(id));
    while (!work.empty()) {
        PMat x = std::move(work.front());
        work.pop();
        for (auto& g : gens) {
            PMat y = pmat_mul(R, x, g);
            u64 key = pmat_key(R, y);
            if (seen.insert(key).second) {
                if (seen.size() > cap) return {0, true, {}};
                work.push(std::move(y));
            }
        }
    }
    ClosureResult res;
    res.order = seen.size();
    res.element_keys.assign(seen.begin(), seen.end());
    return res;
}

// -------- the subgroup lattice of GL_r(A/(a)) --------

// Every subgroup, as sorted element-id lists, with the conjugacy-invariant
// profile of each element precomputed. Conjugate subgroups carry identical
// profiles, so enumerating all subgroups rather than conjugacy classes
// costs memory but changes no verdict.
struct GlLattice {
    u64 order = 0;
    u64 sl_order = 0;
    std::vector<std::vector<u64>> pair_keys;      // pair id -> {c_0..c_{r-1}, order}
    std::vector<u64> elem_pair;                   // element id -> pair id
    std::vector<char> elem_in_sl;                 // det = 1
    std::vector<std::vector<u64>> subgroups;      // sorted element ids
    std::vector<std::vector<u64>> subgroup_pairs; // sorted pair ids realized
    size_t full_subgroup = 0;                     // index of the whole group
};

namespace detail {

inline std::vector<u64> join_closure(const std::vector<u64>& mul, u64 n, u64 one,
                                     const std::vector<u64>& h, u64 g) {
    std::vector<u64> gens = h;
    gens.push_back(g);
    std::vector<char> in(n, 0);
    std::vector<u64> members;
    std::deque<u64> work;
    in[one] = 1;
    members.push_back(one);
    work.push_back(one);
    while (!work.empty()) {
        u64 x = work.front();
        work.pop_front();
        for (u64 y : gens) {
            u64 z = mul[(size_t)x * n + y];
            if (!in[z]) {
                in[z] = 1;
                members.push_back(z);
                work.push_back(z);
            }
        }
    }
    std::sort(members.begin(), members.end());
    return members;
}

inline GlLattice build_gl_lattice(const Poly<Fq>& a, unsigned r, u64 order_cap,
                                  u64 subgroup_cap) {
    if (r == 0) throw domain_error("rank must be positive");
    LevelRing R(a);
    u64 glo = gl_order(r, a);
    if (glo > order_cap) throw cap_error("subgroup lattice: group order above cap");

    u64 q = R.cardinality();
    u64 total = 1;
    for (unsigned i = 0; i < r * r; ++i) {
        if (__builtin_mul_overflow(total, q, &total) || total > (u64(1) << 26))
            throw cap_error("subgroup lattice: matrix space too large to enumerate");
    }

    GlLattice lat;
    std::vector<PMat> elems;
    elems.reserve(glo);
    std::unordered_map<u64, u64> id;
    for (u64 key = 0; key < total; ++key) {
        PMat m = pmat_from_key(R, r, key);
        if (!R.is_unit(pmat_det(R, m))) continue;
        id.emplace(key, (u64)elems.size());
        elems.push_back(std::move(m));
    }
    if (elems.size() != glo)
        throw domain_error("unit enumeration disagrees with the group order formula");
    lat.order = glo;

    const u64 n = (u64)elems.size();
    std::vector<u64> mul((size_t)n * n);
    for (u64 i = 0; i < n; ++i)
        for (u64 j = 0; j < n; ++j)
            mul[(size_t)i * n + j] = id.at(pmat_key(R, pmat_mul(R, elems[i], elems[j])));
    const u64 one = id.at(pmat_key(R, pmat_identity(R, r)));

    std::map<std::vector<u64>, u64> pair_id;
    lat.elem_pair.resize(n);
    lat.elem_in_sl.resize(n);
    for (u64 i = 0; i < n; ++i) {
        auto cp = pmat_char_poly(R, elems[i]);
        u64 ord = 1;
        for (u64 cur = i; cur != one; cur = mul[(size_t)cur * n + i]) ++ord;
        std::vector<u64> key;
        key.reserve(r + 1);
        for (unsigned j = 0; j < r; ++j) key.push_back(R.index_of(cp[j]));
        key.push_back(ord);
        auto [it, fresh] = pair_id.emplace(key, (u64)lat.pair_keys.size());
        if (fresh) lat.pair_keys.push_back(key);
        lat.elem_pair[i] = it->second;
        lat.elem_in_sl[i] = R.eq(pmat_det(R, elems[i]), R.one()) ? 1 : 0;
        if (lat.elem_in_sl[i]) ++lat.sl_order;
    }

    std::set<std::vector<u64>> all;
    std::deque<std::vector<u64>> work;
    std::vector<u64> triv{one};
    all.insert(triv);
    work.push_back(std::move(triv));
    while (!work.empty()) {
        std::vector<u64> h = std::move(work.front());
        work.pop_front();
        for (u64 g = 0; g < n; ++g) {
            if (std::binary_search(h.begin(), h.end(), g)) continue;
            auto j = join_closure(mul, n, one, h, g);
            if (all.insert(j).second) {
                if (all.size() > subgroup_cap)
                    throw cap_error("subgroup lattice above the subgroup cap");
                work.push_back(std::move(j));
            }
        }
    }

    lat.subgroups.assign(all.begin(), all.end());
    lat.subgroup_pairs.reserve(lat.subgroups.size());
    lat.full_subgroup = lat.subgroups.size();
    for (size_t s = 0; s < lat.subgroups.size(); ++s) {
        std::vector<u64> pairs;
        for (u64 i : lat.subgroups[s]) pairs.push_back(lat.elem_pair[i]);
        std::sort(pairs.begin(), pairs.end());
        pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
        lat.subgroup_pairs.push_back(std::move(pairs));
        if (lat.subgroups[s].size() == n) lat.full_subgroup = s;
    }
    if (lat.full_subgroup == lat.subgroups.size())
        throw domain_error("subgroup enumeration lost the full group");
    return lat;
}

// Optional persistence for built lattices, installed by the cache layer.
// load returns false on a miss; a hit must supply a lattice equal to what
// build_gl_lattice would produce for the same key.
struct GlLatticeHooks {
    std::function<bool(u64 q, unsigned r, const std::string& a, GlLattice& out)> load;
    std::function<void(u64 q, unsigned r, const std::string& a, const GlLattice& lat)> store;
};

inline GlLatticeHooks& gl_lattice_hooks() {
    static GlLatticeHooks hooks;
    return hooks;
}

} // namespace detail

// Cached per (q, r, a); the lattice is immutable once built.
inline std::shared_ptr<const GlLattice> gl_lattice(const Poly<Fq>& a, unsigned r,
                                                   u64 order_cap = 2048,
                                                   u64 subgroup_cap = 100'000) {
    static std::mutex mu;
    static std::map<std::tuple<u64, unsigned, std::string>,
                    std::shared_ptr<const GlLattice>>
        cache;
    std::tuple<u64, unsigned, std::string> key{a.field().cardinality(), r,
                                               poly_string(a.monic())};
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) {
        // the cap is the caller's feasibility budget, cached or not
        if (it->second->order > order_cap)
            throw cap_error("subgroup lattice: group order above cap");
        return it->second;
    }
    auto& hooks = detail::gl_lattice_hooks();
    if (hooks.load) {
        GlLattice loaded;
        if (hooks.load(std::get<0>(key), r, std::get<2>(key), loaded)) {
            auto lat = std::make_shared<const GlLattice>(std::move(loaded));
            cache.emplace(std::move(key), lat);
            if (lat->order > order_cap)
                throw cap_error("subgroup lattice: group order above cap");
            return lat;
        }
    }
    auto lat = std::make_shared<const GlLattice>(
        detail::build_gl_lattice(a, r, order_cap, subgroup_cap));
    if (hooks.store) hooks.store(std::get<0>(key), r, std::get<2>(key), *lat);
    cache.emplace(std::move(key), lat);
    return lat;
}

// -------- classification --------

struct ImageVerdict {
    enum class Kind { full, contains_sl_index_known, cyclic_scalar, inconclusive };
    Kind kind = Kind::inconclusive;
    std::string justification;
};

inline const char* verdict_name(ImageVerdict::Kind k) {
    switch (k) {
        case ImageVerdict::Kind::full: return "full";
        case ImageVerdict::Kind::contains_sl_index_known: return "contains-SL-index-known";
        case ImageVerdict::Kind::cyclic_scalar: return "cyclic-scalar";
        case ImageVerdict::Kind::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

inline bool pmat_is_scalar(const LevelRing& R, const PMat& m) {
    for (size_t i = 0; i < m.size(); ++i)
        for (size_t j = 0; j < m.size(); ++j) {
            if (i == j ? !R.eq(m[i][j], m[0][0]) : !R.eq(m[i][j], R.zero())) return false;
        }
    return true;
}

// Sound finite-level verdict from conjugacy-invariant evidence only.
//   full:       only the whole group realizes every observed
//               (char_poly, order) pair, by subgroup-lattice exclusion.
//   contains-SL-index-known: every realizing subgroup contains SL_r; the
//               index is then read off the determinant subgroup.
//   cyclic-scalar: every sample is scalar and the scalars generate a
//               nontrivial group (the isotrivial expectation).
//   inconclusive: anything else, including lattices above the cap. Raw
//               matrix closures never enter: per-place bases make them
//               meaningful up to conjugacy only.
inline ImageVerdict classify_image(const std::vector<FrobeniusSample>& samples,
                                   const Poly<Fq>& a, unsigned r,
                                   u64 lattice_cap = 2048) {
    if (samples.empty()) throw domain_error("classification needs at least one sample");
    LevelRing R(a);
    for (auto& s : samples) {
        if (!(s.level == R.modulus()) || s.rank() != r)
            throw domain_error("sample does not match the requested level and rank");
    }
    u64 units = gl_order(1, a);

    if (r == 1) {
        std::vector<PMat> gens;
        gens.reserve(samples.size());
        for (auto& s : samples) gens.push_back(s.matrix);
        auto cl = group_closure(R, gens, units);
        std::ostringstream os;
        if (cl.order == units) {
            os << "sampled scalars generate the full unit group (order " << units << ")";
            return {ImageVerdict::Kind::full, os.str()};
        }
        if (cl.order > 1) {
            os << "sampled scalars generate a subgroup of order " << cl.order
               << " in the unit group of order " << units;
            return {ImageVerdict::Kind::cyclic_scalar, os.str()};
        }
        return {ImageVerdict::Kind::inconclusive, "every sample is the identity"};
    }

    bool all_scalar = true;
    for (auto& s : samples)
        if (!pmat_is_scalar(R, s.matrix)) {
            all_scalar = false;
            break;
        }
    if (all_scalar) {
        std::vector<PMat> diag;
        diag.reserve(samples.size());
        for (auto& s : samples) diag.push_back(PMat{{s.matrix[0][0]}});
        auto cl = group_closure(R, diag, units);
        if (cl.order > 1) {
            std::ostringstream os;
            os << "all " << samples.size()
               << " samples are scalar; the scalars generate a group of order " << cl.order;
            return {ImageVerdict::Kind::cyclic_scalar, os.str()};
        }
        return {ImageVerdict::Kind::inconclusive, "every sample is the identity"};
    }

    std::shared_ptr<const GlLattice> lat;
    try {
        lat = gl_lattice(a, r, lattice_cap);
    } catch (const cap_error&) {
        std::ostringstream os;
        os << "subgroup lattice infeasible: |GL| = " << gl_order(r, a)
           << " exceeds the cap " << lattice_cap;
        return {ImageVerdict::Kind::inconclusive, os.str()};
    }

    std::map<std::vector<u64>, u64> pair_id;
    for (u64 i = 0; i < lat->pair_keys.size(); ++i) pair_id.emplace(lat->pair_keys[i], i);
    std::set<u64> observed;
    for (auto& s : samples) {
        std::vector<u64> key;
        key.reserve(r + 1);
        for (unsigned j = 0; j < r; ++j) key.push_back(R.index_of(s.char_poly[j]));
        key.push_back(s.order);
        auto it = pair_id.find(key);
        if (it == pair_id.end())
            throw domain_error("observed invariants are not realized in the matrix group");
        observed.insert(it->second);
    }

    std::vector<size_t> candidates;
    for (size_t s = 0; s < lat->subgroups.size(); ++s) {
        const auto& have = lat->subgroup_pairs[s];
        bool ok = true;
        for (u64 p : observed)
            if (!std::binary_search(have.begin(), have.end(), p)) {
                ok = false;
                break;
            }
        if (ok) candidates.push_back(s);
    }
    if (candidates.empty()) throw domain_error("the full group lost its own invariants");

    if (candidates.size() == 1 && candidates[0] == lat->full_subgroup) {
        std::ostringstream os;
        os << "among " << lat->subgroups.size() << " subgroups of GL (order " << lat->order
           << "), only the full group realizes all " << observed.size()
           << " observed (char_poly, order) pairs";
        return {ImageVerdict::Kind::full, os.str()};
    }

    bool all_contain_sl = true;
    for (size_t s : candidates) {
        const auto& h = lat->subgroups[s];
        u64 in_sl = 0;
        for (u64 i : h) in_sl += lat->elem_in_sl[i];
        if (in_sl != lat->sl_order) {
            all_contain_sl = false;
            break;
        }
    }
    if (all_contain_sl) {
        std::vector<PMat> dets;
        dets.reserve(samples.size());
        for (auto& s : samples) dets.push_back(PMat{{s.det}});
        auto cl = group_closure(R, dets, units);
        std::ostringstream os;
        os << "every subgroup realizing the observed pairs contains SL (order " << lat->sl_order
           << "); sampled determinants generate a group of order " << cl.order
           << ", so the index in GL divides " << units / cl.order;
        return {ImageVerdict::Kind::contains_sl_index_known, os.str()};
    }

    std::ostringstream os;
    os << candidates.size() - 1 << " proper subgroups of GL (order " << lat->order
       << ") also realize every observed pair";
    return {ImageVerdict::Kind::inconclusive, os.str()};
}

// -------- assembled reports --------

struct ImageReport {
    explicit ImageReport(Poly<Fq> lvl) : level(std::move(lvl)) {}

    std::string module;
    Poly<Fq> level;
    unsigned rank = 0;
    unsigned degree_bound = 0;
    std::vector<FrobeniusSample> samples;
    std::vector<SkipRecord> skips;
    u64 unit_group_order = 0;
    u64 det_group_order = 0; // generated by the sampled determinants
    u64 det_one_count = 0;   // samples of determinant 1
    std::vector<std::pair<std::string, u64>> invariant_pairs; // (char_poly, order)
    u64 raw_closure_order = 0; // basis-dependent, informational only
    bool raw_closure_overflowed = false;
    ImageVerdict verdict;
};

// Analysis half: classify an already collected batch. Lets callers gather
// the samples themselves (e.g. sharded across workers) without changing
// what the verdict sees.
inline ImageReport build_image_report(const DrinfeldModule<RatFuncField>& d,
                                      const Poly<Fq>& a, unsigned max_place_degree,
                                      SampleBatch batch, u64 lattice_cap = 2048,
                                      u64 closure_cap = 1'000'000) {
    LevelRing R(a);
    ImageReport rep(R.modulus());
    rep.module = module_string(d);
    rep.rank = d.rank();
    rep.degree_bound = max_place_degree;

    rep.samples = std::move(batch.samples);
    rep.skips = std::move(batch.skips);
    rep.unit_group_order = gl_order(1, a);

    if (rep.samples.empty()) {
        rep.verdict = {ImageVerdict::Kind::inconclusive,
                       "no usable places below the degree bound"};
        return rep;
    }

    std::vector<PMat> dets, mats;
    std::set<std::pair<std::string, u64>> pairs;
    for (auto& s : rep.samples) {
        dets.push_back(PMat{{s.det}});
        mats.push_back(s.matrix);
        pairs.emplace(char_poly_string(s.char_poly), s.order);
        if (R.eq(s.det, R.one())) ++rep.det_one_count;
    }
    rep.det_group_order = group_closure(R, dets, rep.unit_group_order).order;
    if (rep.unit_group_order % rep.det_group_order != 0)
        throw domain_error("determinant subgroup order does not divide the unit group order");
    rep.invariant_pairs.assign(pairs.begin(), pairs.end());

    ClosureResult raw = group_closure(R, mats, closure_cap);
    rep.raw_closure_order = raw.order;
    rep.raw_closure_overflowed = raw.overflowed;

    rep.verdict = classify_image(rep.samples, a, d.rank(), lattice_cap);
    return rep;
}

inline ImageReport build_image_report(const DrinfeldModule<RatFuncField>& d,
                                      const Poly<Fq>& a, unsigned max_place_degree,
                                      u64 lattice_cap = 2048,
                                      u64 closure_cap = 1'000'000) {
    return build_image_report(d, a, max_place_degree, sample_frobenii(d, a, max_place_degree),
                              lattice_cap, closure_cap);
}

} // namespace dkt
