#pragma once

// Experiment harness behind the command-line tool. A flat JSON config names
// one experiment; the harness validates it against a closed schema, runs the
// computation (place sweeps sharded across worker threads, merged back in
// place order), and emits one report document. The payload of a report is a
// pure function of the config: reruns and different worker counts produce
// identical bytes, and only the wall_ms field outside the payload varies.
//
// Exit statuses: 0 for positive verdicts (holds / full / stabilized /
// computed), 1 for negative verdicts, 2 for inconclusive or aborted runs
// (undersampled sweeps, blown caps, inapplicable certificates), 3 for
// config errors.

#include "cache.hpp"
#include "serialize.hpp"

#include <chrono>
#include <cmath>
#include <optional>
#include <thread>

namespace dkt {

inline const char* tool_version() { return "dkt 0.1.0"; }

struct config_error : std::invalid_argument {
    explicit config_error(const std::string& what) : std::invalid_argument(what) {}
};

struct ExperimentResult {
    Json document;       // full report: config echo, payload, verdict, timing
    std::string payload; // canonical payload bytes, the determinism contract
    std::string verdict;
    int exit_status = 0;
};

namespace detail {

// -------- schema --------

struct KindRule {
    enum Base { rational_only, finite_only, either } base;
    std::set<std::string> keys; // kind-specific keys, required unless noted below
};

inline const std::map<std::string, KindRule>& experiment_kinds() {
    static const std::map<std::string, KindRule> kinds{
        {"torsion", {KindRule::rational_only, {"level", "place_degree_bound"}}},
        {"frobenius", {KindRule::rational_only, {"level", "place_degree_bound"}}},
        {"image", {KindRule::rational_only, {"level", "place_degree_bound"}}},
        {"kummer-density",
         {KindRule::rational_only,
          {"base_point", "level", "oracle_den", "oracle_num", "place_degree_bound"}}},
        {"division-hull", {KindRule::rational_only, {"degree_bound", "generators"}}},
        // window_theta_degree is required for the rational base and
        // meaningless for a finite one
        {"endring", {KindRule::either, {"window_tau_degree", "window_theta_degree"}}},
        {"index-bound", {KindRule::finite_only, {"generators", "level"}}},
        {"isogeny-check", {KindRule::finite_only, {"isogeny_f", "level", "phi_target"}}},
        {"restrict-check", {KindRule::finite_only, {"subring_b", "sublevel_w"}}},
    };
    return kinds;
}

inline const std::set<std::string>& common_keys() {
    static const std::set<std::string> keys{"base",   "base_degree", "kind", "output",
                                            "phi_t",  "q",           "seed", "workers"};
    return keys;
}

inline bool json_uint(const Json& v, u64& out) {
    if (v.is_number_unsigned()) {
        out = v.get<u64>();
        return true;
    }
    if (v.is_number_integer()) {
        i64 x = v.get<i64>();
        if (x < 0) return false;
        out = (u64)x;
        return true;
    }
    return false;
}

inline u64 config_u64(const Json& c, const std::string& key, u64 lo, u64 hi) {
    u64 x = 0;
    if (!json_uint(c.at(key), x))
        throw config_error("key '" + key + "' must be an unsigned integer");
    if (x < lo || x > hi)
        throw config_error("key '" + key + "' must lie in [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
    return x;
}

inline std::vector<u64> digit_list(const Json& v, const std::string& key, u64 q,
                                   size_t max_len) {
    if (!v.is_array()) throw config_error("key '" + key + "' must be a coefficient array");
    if (v.size() > max_len)
        throw config_error("key '" + key + "' has more than " + std::to_string(max_len) +
                           " coefficients");
    std::vector<u64> out;
    for (const Json& x : v) {
        u64 d = 0;
        if (!json_uint(x, d) || d >= q)
            throw config_error("key '" + key + "': coefficients are element indices below q");
        out.push_back(d);
    }
    return out;
}

inline std::pair<u64, unsigned> split_prime_power(u64 q) {
    for (u64 p = 2; p * p <= q; ++p) {
        if (q % p != 0) continue;
        unsigned e = 0;
        u64 m = q;
        while (m % p == 0) {
            m /= p;
            ++e;
        }
        if (m != 1) throw config_error("q must be a prime power");
        return {p, e};
    }
    return {q, 1};
}

inline void validate_config(const Json& c) {
    if (!c.is_object()) throw config_error("config must be a JSON object");
    if (!c.contains("kind") || !c.at("kind").is_string())
        throw config_error("key 'kind' is required and must name an experiment");
    const auto& kinds = experiment_kinds();
    auto kit = kinds.find(c.at("kind").get<std::string>());
    if (kit == kinds.end())
        throw config_error("unknown experiment kind '" + c.at("kind").get<std::string>() + "'");
    const KindRule& rule = kit->second;

    for (const auto& [key, value] : c.items()) {
        (void)value;
        if (!common_keys().count(key) && !rule.keys.count(key))
            throw config_error("unknown key '" + key + "' for kind '" + kit->first + "'");
    }

    for (const char* key : {"q", "base", "phi_t", "seed"})
        if (!c.contains(key)) throw config_error(std::string("key '") + key + "' is required");
    u64 seed = 0;
    if (!json_uint(c.at("seed"), seed))
        throw config_error("key 'seed' must be an unsigned integer");

    u64 q = config_u64(c, "q", 2, 64);
    split_prime_power(q);

    if (!c.at("base").is_string()) throw config_error("key 'base' must be a string");
    std::string base = c.at("base").get<std::string>();
    if (base != "rational" && base != "finite")
        throw config_error("key 'base' must be 'rational' or 'finite'");
    bool finite = base == "finite";
    if (finite && rule.base == KindRule::rational_only)
        throw config_error("kind '" + kit->first + "' sweeps places and needs base 'rational'");
    if (!finite && rule.base == KindRule::finite_only)
        throw config_error("kind '" + kit->first + "' needs base 'finite'");

    if (finite) {
        if (!c.contains("base_degree"))
            throw config_error("key 'base_degree' is required for a finite base");
        config_u64(c, "base_degree", 1, 12);
    } else if (c.contains("base_degree")) {
        throw config_error("key 'base_degree' only applies to a finite base");
    }

    const Json& pt = c.at("phi_t");
    if (!pt.is_array() || pt.size() < 2 || pt.size() > 5)
        throw config_error("key 'phi_t' must list rank+1 coefficient arrays (rank 1..4)");
    for (const Json& coeff : pt) digit_list(coeff, "phi_t", q, 17);

    if (c.contains("output") && !c.at("output").is_string())
        throw config_error("key 'output' must be a path string");
    if (c.contains("workers")) config_u64(c, "workers", 1, 64);

    for (const char* key : {"level", "subring_b", "sublevel_w"})
        if (rule.keys.count(key)) digit_list(c.at(key), key, q, 17);
    if (rule.keys.count("place_degree_bound")) config_u64(c, "place_degree_bound", 1, 16);
    if (rule.keys.count("degree_bound")) config_u64(c, "degree_bound", 1, 10);
    if (rule.keys.count("window_tau_degree")) config_u64(c, "window_tau_degree", 1, 8);
    if (kit->first == "endring") {
        if (finite) {
            if (c.contains("window_theta_degree"))
                throw config_error("key 'window_theta_degree' only applies to a rational base");
        } else {
            if (!c.contains("window_theta_degree"))
                throw config_error("key 'window_theta_degree' is required for a rational base");
            config_u64(c, "window_theta_degree", 0, 16);
        }
    }
    if (rule.keys.count("oracle_num")) {
        u64 den = config_u64(c, "oracle_den", 1, 1'000'000);
        u64 num = config_u64(c, "oracle_num", 1, den);
        (void)num;
    }
    if (rule.keys.count("generators")) {
        const Json& gens = c.at("generators");
        if (!gens.is_array() || gens.empty() || gens.size() > 8)
            throw config_error("key 'generators' must list 1..8 generators");
        if (kit->first == "index-bound" && gens.size() != 1)
            throw config_error("index-bound takes exactly one generator");
        for (const Json& g : gens) {
            if (finite) {
                digit_list(g, "generators", q, 13);
            } else {
                if (!g.is_array() || g.size() != 2)
                    throw config_error(
                        "rational generators are [numerator, denominator] coefficient pairs");
                digit_list(g[0], "generators", q, 17);
                digit_list(g[1], "generators", q, 17);
            }
        }
    }
    if (rule.keys.count("base_point")) {
        const Json& m = c.at("base_point");
        if (!m.is_array() || m.size() != 2)
            throw config_error("key 'base_point' must be [numerator, denominator] arrays");
        digit_list(m[0], "base_point", q, 17);
        digit_list(m[1], "base_point", q, 17);
    }
    if (rule.keys.count("isogeny_f")) {
        const Json& f = c.at("isogeny_f");
        if (!f.is_array() || f.empty() || f.size() > 6)
            throw config_error("key 'isogeny_f' must list 1..6 coefficient arrays");
        for (const Json& coeff : f) digit_list(coeff, "isogeny_f", q, 13);
        const Json& pt2 = c.at("phi_target");
        if (!pt2.is_array() || pt2.size() < 2 || pt2.size() > 5)
            throw config_error("key 'phi_target' must list rank+1 coefficient arrays");
        for (const Json& coeff : pt2) digit_list(coeff, "phi_target", q, 17);
    }
}

// Maps domain failures on well-formed but impossible inputs (reducible
// level, constant phi_t, non-intertwining isogeny) to config errors.
template <class Fn>
auto config_scope(Fn&& fn) {
    try {
        return fn();
    } catch (const domain_error& e) {
        throw config_error(e.what());
    }
}

// -------- element builders --------

inline Fq config_fq(const Json& c) {
    auto [p, e] = split_prime_power(c.at("q").get<u64>());
    return Fq(p, e);
}

inline Poly<Fq> config_tpoly(const Fq& F, const Json& v) {
    return Poly<Fq>(F, Var::t, v.get<std::vector<u64>>());
}

inline Poly<Fq> config_thpoly(const Fq& F, const Json& v) {
    return Poly<Fq>(F, Var::theta, v.get<std::vector<u64>>());
}

inline Poly<Fq> config_level(const Fq& F, const Json& v, const std::string& key) {
    Poly<Fq> a = config_tpoly(F, v);
    if (a.degree() < 1) throw config_error("key '" + key + "' must have positive degree");
    return a;
}

inline RatFunc config_point(const RatFuncField& K, const Json& v, const std::string& key) {
    Poly<Fq> den = config_thpoly(K.fq_field(), v[1]);
    if (den.is_zero()) throw config_error("key '" + key + "': zero denominator");
    return K.make(config_thpoly(K.fq_field(), v[0]), den);
}

inline TowerField<Fq>::Elem config_felem(const TowerField<Fq>& k, const Json& v) {
    std::vector<u64> digits = v.get<std::vector<u64>>();
    if (digits.size() > k.fq_dim())
        throw config_error("finite element has more coordinates than the base degree");
    digits.resize(k.fq_dim(), 0);
    return k.fq_pack(digits);
}

inline DrinfeldModule<RatFuncField> config_rational_module(const RatFuncField& K,
                                                           const Json& phi) {
    std::vector<RatFunc> coeffs;
    for (const Json& c : phi) coeffs.push_back(K.from_poly(config_thpoly(K.fq_field(), c)));
    return config_scope([&] {
        return DrinfeldModule<RatFuncField>(K, OrePoly<RatFuncField>(K, std::move(coeffs)));
    });
}

inline OrePoly<TowerField<Fq>> config_finite_ore(const TowerField<Fq>& k, const Json& v) {
    std::vector<TowerField<Fq>::Elem> coeffs;
    for (const Json& c : v) coeffs.push_back(config_felem(k, c));
    return OrePoly<TowerField<Fq>>(k, std::move(coeffs));
}

inline DrinfeldModule<TowerField<Fq>> config_finite_module(const TowerField<Fq>& k,
                                                           const Json& phi) {
    return config_scope(
        [&] { return DrinfeldModule<TowerField<Fq>>(k, config_finite_ore(k, phi)); });
}

// -------- sharded place sweeps --------

// Static index shards: worker j takes places j, j+w, j+2w, ... Results land
// in preallocated per-index slots, so the merged order is the place order no
// matter how the threads interleave.
template <class Task>
void run_sharded(unsigned workers, size_t n, const Task& task) {
    if (workers <= 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) task(i);
        return;
    }
    unsigned w = (unsigned)std::min<size_t>(workers, n);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(w);
    for (unsigned j = 0; j < w; ++j)
        pool.emplace_back([&, j] {
            try {
                for (size_t i = j; i < n; i += w) task(i);
            } catch (...) {
                errors[j] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);
}

struct DispatchOut {
    Json payload;
    std::string verdict;
    int exit_status = 0;
};

// -------- rational-base kinds --------

struct RationalSetup {
    RatFuncField K;
    DrinfeldModule<RatFuncField> d;
    unsigned workers;
};

inline RationalSetup rational_setup(const Json& c) {
    RatFuncField K(config_fq(c));
    auto d = config_rational_module(K, c.at("phi_t"));
    unsigned workers = c.contains("workers") ? (unsigned)c.at("workers").get<u64>() : 1;
    return {K, std::move(d), workers};
}

inline Poly<Fq> rational_level(const RationalSetup& s, const Json& c) {
    Poly<Fq> a = config_level(s.K.fq_field(), c.at("level"), "level");
    return config_scope([&] {
        if (!s.d.characteristic().prime_to(a))
            throw domain_error("level meets the characteristic");
        LevelRing R(a); // validates the level shape
        return R.modulus();
    });
}

inline DispatchOut run_torsion(const Json& c) {
    RationalSetup s = rational_setup(c);
    Poly<Fq> a = rational_level(s, c);
    unsigned B = (unsigned)c.at("place_degree_bound").get<u64>();
    u64 expected = checked_pow(s.K.fq_card(), (u64)s.d.rank() * (u64)a.degree());

    struct Outcome {
        std::optional<Json> row;
        std::optional<SkipRecord> skip;
    };
    auto places = places_up_to(s.K.fq_field(), B);
    std::vector<Outcome> out(places.size());
    run_sharded(s.workers, places.size(), [&](size_t i) {
        const Place& v = places[i];
        try {
            auto dv = reduce_at(s.d, v);
            if (!dv.characteristic().prime_to(a)) {
                out[i].skip = SkipRecord{v.name(), "level meets the residue characteristic"};
                return;
            }
            auto t = torsion_space(dv, a);
            out[i].row = Json{{"count", t.count()},
                              {"etale", t.etale()},
                              {"match", t.count() == expected},
                              {"place", v.name()},
                              {"place_degree", v.degree()},
                              {"splitting_degree", t.splitting_degree()}};
        } catch (const bad_reduction_error&) {
            out[i].skip = SkipRecord{v.name(), "bad reduction"};
        } catch (const cap_error& e) {
            out[i].skip = SkipRecord{v.name(), std::string("cap: ") + e.what()};
        }
    });

    Json rows = Json::array();
    std::vector<SkipRecord> skips;
    u64 mismatches = 0;
    for (auto& o : out) {
        if (o.skip) skips.push_back(*o.skip);
        if (!o.row) continue;
        if (!(*o.row)["match"].get<bool>()) ++mismatches;
        rows.push_back(std::move(*o.row));
    }
    DispatchOut r;
    r.payload = Json{{"expected_count", expected},
                     {"level", poly_string(a)},
                     {"mismatches", mismatches},
                     {"module", module_string(s.d)},
                     {"place_degree_bound", B},
                     {"places", std::move(rows)},
                     {"rank", s.d.rank()},
                     {"skips", json_skips(skips)}};
    u64 usable = r.payload["places"].size();
    if (usable == 0) {
        r.verdict = "inconclusive: no usable places below the degree bound";
        r.exit_status = 2;
    } else if (mismatches > 0) {
        r.verdict = "fail: " + std::to_string(mismatches) + " of " + std::to_string(usable) +
                    " places miss the expected torsion count";
        r.exit_status = 1;
    } else {
        r.verdict = "holds: all " + std::to_string(usable) + " usable places have " +
                    std::to_string(expected) + " torsion points";
        r.exit_status = 0;
    }
    return r;
}

// Shared by the frobenius and image kinds; replicates the sequential
// sampler's skip policy place by place.
inline SampleBatch sharded_frobenii(const RationalSetup& s, const Poly<Fq>& a, unsigned B) {
    struct Outcome {
        std::optional<FrobeniusSample> sample;
        std::optional<SkipRecord> skip;
    };
    auto places = places_up_to(s.K.fq_field(), B);
    std::vector<Outcome> out(places.size());
    run_sharded(s.workers, places.size(), [&](size_t i) {
        const Place& v = places[i];
        try {
            auto dv = reduce_at(s.d, v);
            if (!dv.characteristic().prime_to(a)) {
                out[i].skip = SkipRecord{v.name(), "level meets the residue characteristic"};
                return;
            }
            auto t = torsion_space(dv, a);
            out[i].sample = frobenius_sample(v, t);
        } catch (const bad_reduction_error&) {
            out[i].skip = SkipRecord{v.name(), "bad reduction"};
        } catch (const cap_error& e) {
            out[i].skip = SkipRecord{v.name(), std::string("cap: ") + e.what()};
        }
    });
    SampleBatch batch;
    for (auto& o : out) {
        if (o.sample) batch.samples.push_back(std::move(*o.sample));
        if (o.skip) batch.skips.push_back(std::move(*o.skip));
    }
    return batch;
}

inline DispatchOut run_frobenius(const Json& c) {
    RationalSetup s = rational_setup(c);
    Poly<Fq> a = rational_level(s, c);
    unsigned B = (unsigned)c.at("place_degree_bound").get<u64>();
    SampleBatch batch = sharded_frobenii(s, a, B);

    DispatchOut r;
    size_t n = batch.samples.size();
    r.payload = json_batch(batch);
    r.payload["level"] = poly_string(a);
    r.payload["module"] = module_string(s.d);
    r.payload["place_degree_bound"] = B;
    if (n == 0) {
        r.verdict = "inconclusive: no usable places below the degree bound";
        r.exit_status = 2;
    } else {
        r.verdict = "sampled: " + std::to_string(n) + " places";
        r.exit_status = 0;
    }
    return r;
}

inline DispatchOut run_image(const Json& c) {
    RationalSetup s = rational_setup(c);
    Poly<Fq> a = rational_level(s, c);
    unsigned B = (unsigned)c.at("place_degree_bound").get<u64>();
    ImageReport rep = build_image_report(s.d, a, B, sharded_frobenii(s, a, B));

    DispatchOut r;
    r.payload = json_image_report(rep);
    switch (rep.verdict.kind) {
        case ImageVerdict::Kind::full:
            r.verdict = "full: " + rep.verdict.justification;
            r.exit_status = 0;
            break;
        case ImageVerdict::Kind::contains_sl_index_known:
            r.verdict = "contains-SL-index-known: " + rep.verdict.justification;
            r.exit_status = 0;
            break;
        case ImageVerdict::Kind::cyclic_scalar:
            r.verdict = "cyclic-scalar: " + rep.verdict.justification;
            r.exit_status = 0;
            break;
        case ImageVerdict::Kind::inconclusive:
            r.verdict = "inconclusive: " + rep.verdict.justification;
            r.exit_status = 2;
            break;
    }
    return r;
}

inline DispatchOut run_kummer_density(const Json& c) {
    RationalSetup s = rational_setup(c);
    Poly<Fq> a = rational_level(s, c);
    unsigned B = (unsigned)c.at("place_degree_bound").get<u64>();
    RatFunc m = config_point(s.K, c.at("base_point"), "base_point");
    Rational oracle((i64)c.at("oracle_num").get<u64>(), (i64)c.at("oracle_den").get<u64>());
    LevelRing R(a);

    struct Outcome {
        int state = 0; // 0 skip, 1 miss, 2 hit
        std::optional<SkipRecord> skip;
    };
    auto places = places_up_to(s.K.fq_field(), B);
    std::vector<Outcome> out(places.size());
    run_sharded(s.workers, places.size(), [&](size_t i) {
        const Place& v = places[i];
        std::optional<DrinfeldModule<TowerField<Fq>>> dv;
        try {
            dv.emplace(reduce_at(s.d, v));
        } catch (const bad_reduction_error&) {
            out[i].skip = SkipRecord{v.name(), "bad reduction"};
            return;
        }
        if (!dv->characteristic().prime_to(a)) {
            out[i].skip = SkipRecord{v.name(), "level meets the residue characteristic"};
            return;
        }
        TowerField<Fq>::Elem mv;
        try {
            mv = v.reduce(m);
        } catch (const bad_reduction_error&) {
            out[i].skip = SkipRecord{v.name(), "pole of the base point"};
            return;
        }
        out[i].state = residue_divisible(*dv, v.residue_field(), mv, a) ? 2 : 1;
    });

    DensityReport rep{module_string(s.d), m, R.modulus(), B, 0, 0, {}, oracle};
    for (auto& o : out) {
        if (o.skip) rep.skips.push_back(std::move(*o.skip));
        if (o.state == 0) continue;
        ++rep.total;
        if (o.state == 2) ++rep.hits;
    }

    DispatchOut r;
    r.payload = json_density_report(rep);
    if (rep.total < 30) {
        r.verdict = "inconclusive: undersampled, " + std::to_string(rep.total) +
                    " usable places of degree <= " + std::to_string(B) + ", need 30";
        r.exit_status = 2;
        return r;
    }
    double z = rep.z_score();
    std::ostringstream os;
    os << "density " << rep.hits << "/" << rep.total << " vs oracle " << oracle.num << "/"
       << oracle.den << ", z = " << z;
    if (std::abs(z) <= 3.0) {
        r.verdict = "holds: " + os.str();
        r.exit_status = 0;
    } else {
        r.verdict = "fail: " + os.str();
        r.exit_status = 1;
    }
    return r;
}

inline DispatchOut run_division_hull(const Json& c) {
    RationalSetup s = rational_setup(c);
    std::vector<RatFunc> gens;
    for (const Json& g : c.at("generators"))
        gens.push_back(config_point(s.K, g, "generators"));
    unsigned B = (unsigned)c.at("degree_bound").get<u64>();
    DivisionHullReport rep = division_hull(s.d, gens, B);

    DispatchOut r;
    r.payload = json_hull_report(rep);
    std::ostringstream os;
    os << "index " << rep.index << ", structure [";
    for (size_t i = 0; i < rep.index_structure.size(); ++i)
        os << (i ? ", " : "") << rep.index_structure[i];
    os << "]";
    if (rep.stabilized) {
        r.verdict = "stabilized: " + os.str();
        r.exit_status = 0;
    } else {
        r.verdict = "inconclusive: new division points at the degree bound, " + os.str() +
                    " is only a lower bound";
        r.exit_status = 2;
    }
    return r;
}

// -------- endomorphism ring (either base) --------

inline DispatchOut run_endring(const Json& c) {
    unsigned D = (unsigned)c.at("window_tau_degree").get<u64>();
    DispatchOut r;
    Json basis = Json::array();
    if (c.at("base").get<std::string>() == "rational") {
        RationalSetup s = rational_setup(c);
        unsigned E = (unsigned)c.at("window_theta_degree").get<u64>();
        auto hom = hom_space(s.d, s.d, D, E);
        for (const auto& u : hom) basis.push_back(ore_string(u));
        r.payload = Json{{"basis", std::move(basis)},
                         {"dimension", hom.size()},
                         {"module", module_string(s.d)},
                         {"window_tau_degree", D},
                         {"window_theta_degree", E}};
        r.verdict = "computed: " + std::to_string(hom.size()) +
                    " endomorphisms inside the window";
    } else {
        Fq F = config_fq(c);
        auto k = TowerField<Fq>::canonical(F, (unsigned)c.at("base_degree").get<u64>());
        auto d = config_finite_module(k, c.at("phi_t"));
        auto hom = hom_space(d, d, D);
        for (const auto& u : hom) basis.push_back(ore_string(u));
        r.payload = Json{{"basis", std::move(basis)},
                         {"dimension", hom.size()},
                         {"module", module_string(d)},
                         {"window_tau_degree", D}};
        r.verdict = "computed: " + std::to_string(hom.size()) +
                    " endomorphisms inside the window";
    }
    r.exit_status = 0;
    return r;
}

// -------- finite-base kinds --------

struct FiniteSetup {
    TowerField<Fq> k;
    DrinfeldModule<TowerField<Fq>> d;
};

inline FiniteSetup finite_setup(const Json& c) {
    Fq F = config_fq(c);
    auto k = TowerField<Fq>::canonical(F, (unsigned)c.at("base_degree").get<u64>());
    auto d = config_finite_module(k, c.at("phi_t"));
    return {k, std::move(d)};
}

inline Poly<Fq> finite_level(const FiniteSetup& s, const Json& v, const std::string& key) {
    Poly<Fq> a = config_level(s.k.fq_field(), v, key);
    return config_scope([&] {
        if (!s.d.characteristic().prime_to(a))
            throw domain_error("level meets the characteristic");
        return a;
    });
}

inline DispatchOut run_index_bound(const Json& c) {
    FiniteSetup s = finite_setup(c);
    Poly<Fq> a = finite_level(s, c.at("level"), "level");
    auto m = config_felem(s.k, c.at("generators")[0]);
    if (s.k.is_zero(m)) throw config_error("the generator must be nonzero");
    IndexBoundReport rep = verify_index_bound(s.d, {m}, a);

    DispatchOut r;
    r.payload = json_index_bound_report(rep);
    switch (rep.verdict) {
        case IndexBound::holds:
            r.verdict = "holds: " + rep.certificate;
            r.exit_status = 0;
            break;
        case IndexBound::fails:
            r.verdict = "fail: " + rep.certificate;
            r.exit_status = 1;
            break;
        case IndexBound::inapplicable:
            r.verdict = "inconclusive: " + rep.certificate;
            r.exit_status = 2;
            break;
    }
    return r;
}

inline DispatchOut run_isogeny_check(const Json& c) {
    FiniteSetup s = finite_setup(c);
    auto d2 = config_finite_module(s.k, c.at("phi_target"));
    Poly<Fq> a = finite_level(s, c.at("level"), "level");
    auto f = config_finite_ore(s.k, c.at("isogeny_f"));
    auto iso = config_scope([&] { return Isogeny<TowerField<Fq>>(s.d, d2, f); });
    auto rep = isogeny_torsion_map(iso, a);

    DispatchOut r;
    r.payload = json_isogeny_report(rep);
    r.payload["f"] = ore_string(f);
    r.payload["source_module"] = module_string(s.d);
    r.payload["target_module"] = module_string(d2);
    if (rep.commutes_with_frobenius) {
        r.verdict = "holds: the induced torsion map conjugates Frobenius to Frobenius";
        r.exit_status = 0;
    } else {
        r.verdict = "fail: the induced torsion map does not respect Frobenius";
        r.exit_status = 1;
    }
    return r;
}

inline DispatchOut run_restrict_check(const Json& c) {
    FiniteSetup s = finite_setup(c);
    Poly<Fq> b = config_level(s.k.fq_field(), c.at("subring_b"), "subring_b");
    Poly<Fq> w = config_level(s.k.fq_field(), c.at("sublevel_w"), "sublevel_w");
    config_scope([&] {
        if (!s.d.characteristic().prime_to(w.compose(b)))
            throw domain_error("level meets the characteristic");
        return 0;
    });
    auto rep = restrict_check(s.d, b, w);

    DispatchOut r;
    r.payload = json_restrict_report(rep);
    r.payload["module"] = module_string(s.d);
    r.payload["subring_b"] = poly_string(b);
    r.payload["sublevel_w"] = poly_string(w);
    bool ok = rep.same_points && rep.frobenius_consistent && rep.orders_match;
    if (ok) {
        r.verdict = "holds: restricted torsion agrees with the full torsion as a module";
        r.exit_status = 0;
    } else {
        std::ostringstream os;
        os << "fail:";
        if (!rep.same_points) os << " point sets differ;";
        if (!rep.frobenius_consistent) os << " Frobenius actions differ;";
        if (!rep.orders_match) os << " annihilator orders differ;";
        r.verdict = os.str();
        r.exit_status = 1;
    }
    return r;
}

inline DispatchOut dispatch_experiment(const Json& c) {
    std::string kind = c.at("kind").get<std::string>();
    if (kind == "torsion") return run_torsion(c);
    if (kind == "frobenius") return run_frobenius(c);
    if (kind == "image") return run_image(c);
    if (kind == "kummer-density") return run_kummer_density(c);
    if (kind == "division-hull") return run_division_hull(c);
    if (kind == "endring") return run_endring(c);
    if (kind == "index-bound") return run_index_bound(c);
    if (kind == "isogeny-check") return run_isogeny_check(c);
    if (kind == "restrict-check") return run_restrict_check(c);
    throw config_error("unknown experiment kind '" + kind + "'");
}

} // namespace detail

// -------- entry points --------

inline ExperimentResult run_experiment(const Json& config) {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentResult res;
    Json doc;
    doc["tool"] = tool_version();
    doc["config"] = config;
    try {
        detail::validate_config(config);
        doc["kind"] = config.at("kind");
        detail::DispatchOut out = detail::dispatch_experiment(config);
        doc["payload"] = std::move(out.payload);
        res.verdict = std::move(out.verdict);
        res.exit_status = out.exit_status;
    } catch (const config_error& e) {
        res.verdict = std::string("config error: ") + e.what();
        res.exit_status = 3;
    } catch (const cap_error& e) {
        res.verdict = std::string("aborted: cap, ") + e.what();
        res.exit_status = 2;
    } catch (const bad_reduction_error& e) {
        res.verdict = std::string("aborted: bad reduction at ") + e.what();
        res.exit_status = 2;
    } catch (const domain_error& e) {
        // well-formed config, but the computation declined the inputs
        res.verdict = std::string("inconclusive: ") + e.what();
        res.exit_status = 2;
    }
    doc["verdict"] = res.verdict;
    doc["exit_status"] = res.exit_status;
    auto dt = std::chrono::steady_clock::now() - t0;
    doc["wall_ms"] = (u64)std::chrono::duration_cast<std::chrono::milliseconds>(dt).count();
    if (doc.contains("payload")) res.payload = canonical_dump(doc.at("payload"));
    res.document = std::move(doc);
    return res;
}

// Everything except the wall-time field; two runs of one config match here.
inline std::string report_fingerprint(const Json& document) {
    Json copy = document;
    copy.erase("wall_ms");
    return canonical_dump(copy);
}

inline Json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot read config file " + path);
    try {
        Json j;
        in >> j;
        return j;
    } catch (const std::exception& e) {
        throw config_error(std::string("config parse: ") + e.what());
    }
}

inline void write_report(const ExperimentResult& res, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report to " + path);
    out << canonical_dump(res.document);
}

} // namespace dkt
