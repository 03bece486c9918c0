#pragma once

// Canonical JSON renditions of every report type. Objects are map-backed,
// so keys always serialize sorted; a report built from the same data
// therefore dumps to the same bytes. Exact quantities stay exact: rationals
// ride as decimal strings, field elements and polynomials as their
// printable forms.

#include "kummer.hpp"

#include <json.hpp>

namespace dkt {

using Json = nlohmann::json;

inline std::string canonical_dump(const Json& j) { return j.dump(2) + "\n"; }

inline Json json_rational(const Rational& r) {
    return Json{{"den", std::to_string(r.den)}, {"num", std::to_string(r.num)}};
}

inline Json json_skips(const std::vector<SkipRecord>& skips) {
    Json arr = Json::array();
    for (const auto& s : skips) arr.push_back(Json{{"place", s.place}, {"reason", s.reason}});
    return arr;
}

inline Json json_pmat(const PMat& m) {
    Json rows = Json::array();
    for (const auto& row : m) {
        Json r = Json::array();
        for (const auto& x : row) r.push_back(poly_string(x));
        rows.push_back(std::move(r));
    }
    return rows;
}

inline std::string coeff_string(const RatFuncField&, const RatFunc& c) {
    return ratfunc_string(c);
}

template <class F>
std::string coeff_string(const F& k, const typename F::Elem& c) {
    return finite_elem_string(k, c);
}

template <class F>
std::string ore_string(const OrePoly<F>& u) {
    const F& k = u.field();
    std::ostringstream os;
    bool first = true;
    for (int i = 0; i <= u.degree(); ++i) {
        auto c = u.coeff((size_t)i);
        if (k.is_zero(c)) continue;
        if (!first) os << " + ";
        first = false;
        if (i == 0) {
            os << coeff_string(k, c);
            continue;
        }
        if (!k.eq(c, k.one())) os << "(" << coeff_string(k, c) << ")*";
        os << "tau";
        if (i > 1) os << "^" << i;
    }
    if (first) os << "0";
    return os.str();
}

inline Json json_sample(const FrobeniusSample& s) {
    return Json{{"char_poly", char_poly_string(s.char_poly)},
                {"det", poly_string(s.det)},
                {"level", poly_string(s.level)},
                {"matrix", json_pmat(s.matrix)},
                {"order", s.order},
                {"place", s.place.name()},
                {"place_degree", s.place.degree()}};
}

inline Json json_batch(const SampleBatch& b) {
    Json samples = Json::array();
    for (const auto& s : b.samples) samples.push_back(json_sample(s));
    return Json{{"samples", std::move(samples)}, {"skips", json_skips(b.skips)}};
}

inline Json json_image_report(const ImageReport& rep) {
    Json samples = Json::array();
    for (const auto& s : rep.samples) samples.push_back(json_sample(s));
    Json pairs = Json::array();
    for (const auto& [cp, order] : rep.invariant_pairs)
        pairs.push_back(Json{{"char_poly", cp}, {"order", order}});
    return Json{{"degree_bound", rep.degree_bound},
                {"det_group_order", rep.det_group_order},
                {"det_one_count", rep.det_one_count},
                {"invariant_pairs", std::move(pairs)},
                {"justification", rep.verdict.justification},
                {"level", poly_string(rep.level)},
                {"module", rep.module},
                {"rank", rep.rank},
                {"raw_closure_order", rep.raw_closure_order},
                {"raw_closure_overflowed", rep.raw_closure_overflowed},
                {"samples", std::move(samples)},
                {"skips", json_skips(rep.skips)},
                {"unit_group_order", rep.unit_group_order},
                {"verdict", verdict_name(rep.verdict.kind)}};
}

inline Json json_density_report(const DensityReport& rep) {
    return Json{{"base_point", ratfunc_string(rep.base_point)},
                {"degree_bound", rep.degree_bound},
                {"empirical", json_rational(Rational((i64)rep.hits,
                                                     (i64)(rep.total ? rep.total : 1)))},
                {"hits", rep.hits},
                {"level", poly_string(rep.level)},
                {"module", rep.module},
                {"oracle", json_rational(rep.oracle)},
                {"skips", json_skips(rep.skips)},
                {"total", rep.total},
                {"z_score", rep.z_score()}};
}

inline Json json_hull_report(const DivisionHullReport& rep) {
    Json gens = Json::array();
    for (const auto& g : rep.generators) gens.push_back(ratfunc_string(g));
    Json found = Json::array();
    for (const auto& hp : rep.found)
        found.push_back(Json{{"image", ratfunc_string(hp.image)},
                             {"point", ratfunc_string(hp.point)},
                             {"witness", poly_string(hp.witness)}});
    Json structure = Json::array();
    for (u64 n : rep.index_structure) structure.push_back(n);
    Json divisors = Json::array();
    for (const auto& p : rep.elementary_divisors) divisors.push_back(poly_string(p));
    return Json{{"annihilator", poly_string(rep.annihilator)},
                {"degree_bound", rep.degree_bound},
                {"double_witness_checks", rep.double_witness_checks},
                {"elementary_divisors", std::move(divisors)},
                {"found", std::move(found)},
                {"generators", std::move(gens)},
                {"index", rep.index},
                {"index_structure", std::move(structure)},
                {"module", rep.module},
                {"stabilized", rep.stabilized}};
}

inline Json json_index_bound_report(const IndexBoundReport& rep) {
    Json j{{"certificate", rep.certificate},
           {"congruence_ideal", poly_string(rep.congruence_ideal)},
           {"delta_order", rep.delta_order},
           {"hom_count", rep.hom_count},
           {"hull_ideal", poly_string(rep.hull_ideal)},
           {"level", poly_string(rep.level)},
           {"mapped_inside", rep.mapped_inside},
           {"module", rep.module},
           {"trace_ideal", poly_string(rep.trace_ideal)},
           {"verdict", index_bound_name(rep.verdict)}};
    if (rep.frobenius_poly) j["frobenius_poly"] = poly_string(*rep.frobenius_poly);
    return j;
}

template <class F>
Json json_isogeny_report(const IsogenyTorsionReport<F>& rep) {
    Json kernel = Json::array();
    for (const auto& x : rep.kernel)
        kernel.push_back(finite_elem_string(rep.source.ambient(), x));
    return Json{{"commutes_with_frobenius", rep.commutes_with_frobenius},
                {"kernel", std::move(kernel)},
                {"kernel_size", rep.kernel.size()},
                {"level", poly_string(rep.source.level())},
                {"matrix", json_pmat(rep.matrix)},
                {"source_count", rep.source.count()},
                {"source_splitting_degree", rep.source.splitting_degree()},
                {"target_count", rep.target.count()},
                {"target_splitting_degree", rep.target.splitting_degree()}};
}

template <class F>
Json json_restrict_report(const RestrictReport<F>& rep) {
    return Json{{"full_count", rep.full.count()},
                {"full_level", poly_string(rep.full.level())},
                {"frobenius_consistent", rep.frobenius_consistent},
                {"orders_match", rep.orders_match},
                {"restricted_count", rep.restricted.count()},
                {"restricted_level", poly_string(rep.restricted.level())},
                {"same_points", rep.same_points}};
}

} // namespace dkt
