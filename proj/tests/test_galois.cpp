#include <catch2/catch_amalgamated.hpp>

#include <dkt/galois.hpp>

#include <algorithm>
#include <map>
#include <set>

using namespace dkt;

namespace {

Poly<Fq> tpoly(const Fq& F, std::vector<u64> c) { return Poly<Fq>(F, Var::t, c); }

Poly<Fq> thpoly(const Fq& F, std::vector<u64> c) { return Poly<Fq>(F, Var::theta, c); }

// a polynomial in theta reread as a polynomial in t
Poly<Fq> retag_t(const Poly<Fq>& f) {
    std::vector<u64> c;
    for (int i = 0; i <= f.degree(); ++i) c.push_back(f.coeff((size_t)i));
    return Poly<Fq>(f.field(), Var::t, c);
}

DrinfeldModule<RatFuncField> carlitz(const RatFuncField& K) {
    return {K, OrePoly<RatFuncField>(K, {K.gen(), K.one()})};
}

// theta + tau + tau^2 over F_2(theta): rank 2, generic characteristic
DrinfeldModule<RatFuncField> rank2_generic(const RatFuncField& K) {
    return {K, OrePoly<RatFuncField>(K, {K.gen(), K.one(), K.one()})};
}

// matrix over A/(a) from constant entries
PMat pm(const Fq& F, std::vector<std::vector<u64>> rows) {
    PMat m;
    for (auto& r : rows) {
        std::vector<Poly<Fq>> row;
        for (u64 c : r) row.push_back(Poly<Fq>(F, Var::t, {c}));
        m.push_back(std::move(row));
    }
    return m;
}

// hand-built sample at a synthetic place, for classification tests
FrobeniusSample mk_sample(const LevelRing& R, const Place& v, const PMat& m) {
    auto cp = pmat_char_poly(R, m);
    auto ord = pmat_order(R, m);
    REQUIRE(ord.has_value());
    return {v, R.modulus(), m, cp, pmat_det(R, m), *ord};
}

std::set<std::pair<std::string, u64>> pair_set(const std::vector<FrobeniusSample>& samples) {
    std::set<std::pair<std::string, u64>> out;
    for (auto& s : samples) out.emplace(char_poly_string(s.char_poly), s.order);
    return out;
}

} // namespace

TEST_CASE("characteristic polynomials over A/(a)") {
    Fq F3(3, 1);
    LevelRing R(tpoly(F3, {0, 1}));

    SECTION("1x1: x - b, with the determinant in the constant term") {
        PMat m = pm(F3, {{2}});
        auto cp = pmat_char_poly(R, m);
        REQUIRE(cp.size() == 2);
        CHECK(R.eq(cp[0], tpoly(F3, {1})));  // -2 = 1 mod 3
        CHECK(R.eq(cp[1], R.one()));
        CHECK(pmat_annihilated_by(R, cp, m));
        CHECK(R.eq(pmat_det(R, m), R.neg(cp[0])));
    }

    SECTION("2x2 companion matrix recovers its polynomial") {
        Fq F2(2, 1);
        LevelRing R2(tpoly(F2, {0, 1}));
        // companion of x^2 + x + 1
        PMat m = pm(F2, {{0, 1}, {1, 1}});
        auto cp = pmat_char_poly(R2, m);
        REQUIRE(cp.size() == 3);
        CHECK(R2.eq(cp[0], R2.one()));
        CHECK(R2.eq(cp[1], R2.one()));
        CHECK(R2.eq(cp[2], R2.one()));
        CHECK(pmat_annihilated_by(R2, cp, m));
        CHECK(R2.eq(pmat_det(R2, m), cp[0]));
        CHECK(char_poly_string(cp) == "x^2 + (1)*x + (1)");
    }

    SECTION("3x3 identity: (x - 1)^3") {
        PMat m = pmat_identity(R, 3);
        auto cp = pmat_char_poly(R, m);
        REQUIRE(cp.size() == 4);
        CHECK(R.eq(cp[0], tpoly(F3, {2})));
        CHECK(R.eq(cp[1], R.zero()));
        CHECK(R.eq(cp[2], R.zero()));
        CHECK(R.eq(cp[3], R.one()));
        CHECK(pmat_annihilated_by(R, cp, m));
        // det = (-1)^3 * c_0
        CHECK(R.eq(pmat_det(R, m), R.neg(cp[0])));
    }

    SECTION("entries genuinely in A/(a), not just constants") {
        Fq F2(2, 1);
        LevelRing R2(tpoly(F2, {1, 1, 1}));
        Poly<Fq> t = tpoly(F2, {0, 1});
        PMat m{{t, R2.one()}, {R2.zero(), t}};
        auto cp = pmat_char_poly(R2, m);
        // (x - t)^2 = x^2 + 0x + t^2, and t^2 = t + 1 mod t^2+t+1
        CHECK(R2.eq(cp[0], tpoly(F2, {1, 1})));
        CHECK(R2.eq(cp[1], R2.zero()));
        CHECK(pmat_annihilated_by(R2, cp, m));
    }
}

TEST_CASE("group closure") {
    Fq F2(2, 1);
    LevelRing R(tpoly(F2, {0, 1}));

    SECTION("the identity alone closes to the trivial group") {
        auto cl = group_closure(R, {pmat_identity(R, 2)});
        CHECK(cl.order == 1);
        CHECK_FALSE(cl.overflowed);
        CHECK(cl.element_keys.size() == 1);
    }

    SECTION("a single matrix closes to the cyclic group of its order") {
        PMat m = pm(F2, {{0, 1}, {1, 1}});
        auto cl = group_closure(R, {m});
        auto ord = pmat_order(R, m);
        REQUIRE(ord.has_value());
        CHECK(cl.order == *ord);
        CHECK(cl.order == 3);
    }

    SECTION("two generators of GL_2(F_2) close to all six elements") {
        auto cl = group_closure(R, {pm(F2, {{1, 1}, {0, 1}}), pm(F2, {{0, 1}, {1, 0}})});
        CHECK(cl.order == 6);
        CHECK(cl.order == gl_order(2, tpoly(F2, {0, 1})));
    }

    SECTION("cap overflow is an explicit verdict, not an exception") {
        auto cl = group_closure(R, {pm(F2, {{0, 1}, {1, 1}})}, 2);
        CHECK(cl.overflowed);
        CHECK(cl.order == 0);
        CHECK(cl.element_keys.empty());
    }

    SECTION("singular generators are refused") {
        CHECK_THROWS_AS(group_closure(R, {pm(F2, {{1, 1}, {1, 1}})}), domain_error);
        CHECK_THROWS_AS(group_closure(R, {}), domain_error);
    }
}

TEST_CASE("frobenius samples for the carlitz module") {
    Fq F2(2, 1);
    RatFuncField K(F2);
    auto c = carlitz(K);

    SECTION("level t, places up to degree 3") {
        auto batch = sample_frobenii(c, tpoly(F2, {0, 1}), 3);
        // (theta) is the one place whose residue characteristic is t
        REQUIRE(batch.skips.size() == 1);
        CHECK(batch.skips[0].place == "theta");
        CHECK(batch.skips[0].reason == "level meets the residue characteristic");
        REQUIRE(batch.samples.size() == 4);
        for (auto& s : batch.samples) {
            REQUIRE(s.rank() == 1);
            LevelRing R(s.level);
            CHECK(R.eq(s.matrix[0][0], R.one()));
            CHECK(R.eq(s.det, R.one()));
            CHECK(s.order == 1);
            CHECK(pmat_annihilated_by(R, s.char_poly, s.matrix));
        }
    }

    SECTION("every sample is the scalar pi mod a") {
        Poly<Fq> a = tpoly(F2, {1, 1, 1});
        LevelRing R(a);
        auto batch = sample_frobenii(c, a, 4);
        // (theta^2+theta+1) is the one place with residue characteristic a
        REQUIRE(batch.skips.size() == 1);
        CHECK(batch.skips[0].place == "theta^2+theta+1");
        REQUIRE(batch.samples.size() == 7);
        for (auto& s : batch.samples) {
            Poly<Fq> pi_mod_a = R.reduce(retag_t(s.place.pi()));
            CHECK(R.eq(s.matrix[0][0], pi_mod_a));
            CHECK(R.eq(s.det, pi_mod_a));
        }
    }

    SECTION("a level meeting the generic characteristic is refused up front") {
        // characteristic of 1 + tau is special at t + 1
        DrinfeldModule<RatFuncField> iso(K, OrePoly<RatFuncField>(K, {K.one(), K.one()}));
        CHECK_THROWS_AS(sample_frobenii(iso, tpoly(F2, {1, 1}), 3), domain_error);
    }
}

TEST_CASE("bad reduction becomes a skip record") {
    Fq F2(2, 1);
    RatFuncField K(F2);
    // leading coefficient theta kills the rank at the place (theta)
    DrinfeldModule<RatFuncField> d(
        K, OrePoly<RatFuncField>(K, {K.gen(), K.one(), K.gen()}));
    auto batch = sample_frobenii(d, tpoly(F2, {1, 1}), 3);
    bool seen = false;
    for (auto& sk : batch.skips)
        if (sk.place == "theta") {
            seen = true;
            CHECK(sk.reason == "bad reduction");
        }
    CHECK(seen);
    CHECK_FALSE(batch.samples.empty());
}

TEST_CASE("carlitz samples cover the units and classify full") {
    Fq F2(2, 1);
    RatFuncField K(F2);
    auto c = carlitz(K);
    Poly<Fq> a = tpoly(F2, {1, 1, 1});
    LevelRing R(a);

    auto rep = build_image_report(c, a, 8);
    CHECK(rep.rank == 1);
    CHECK(rep.unit_group_order == 3);
    CHECK(rep.det_group_order == 3);
    CHECK(rep.verdict.kind == ImageVerdict::Kind::full);

    // the three scalars 1, t, t+1 all appear
    std::set<u64> seen;
    for (auto& s : rep.samples) seen.insert(R.index_of(s.matrix[0][0]));
    CHECK(seen == std::set<u64>{1, 2, 3});

    // raw closure of scalars is the unit group itself
    CHECK_FALSE(rep.raw_closure_overflowed);
    CHECK(rep.raw_closure_order == 3);

    // determinant-1 samples are exactly the pi = 1 mod a places
    u64 ones = 0;
    for (auto& s : rep.samples)
        if (R.eq(s.det, R.one())) ++ones;
    CHECK(rep.det_one_count == ones);
    CHECK(ones >= 1);
}

TEST_CASE("observed pairs grow monotonically in the degree bound") {
    Fq F2(2, 1);
    RatFuncField K(F2);
    auto d = rank2_generic(K);
    Poly<Fq> a = tpoly(F2, {0, 1});

    auto small = sample_frobenii(d, a, 4);
    auto large = sample_frobenii(d, a, 6);
    auto ps = pair_set(small.samples);
    auto pl = pair_set(large.samples);
    CHECK(std::includes(pl.begin(), pl.end(), ps.begin(), ps.end()));
    CHECK(small.samples.size() <= large.samples.size());
}

TEST_CASE("rank-two classification at the degree-one levels") {
    Fq F2(2, 1);
    RatFuncField K(F2);
    auto d = rank2_generic(K);

    for (auto coeffs : {std::vector<u64>{0, 1}, std::vector<u64>{1, 1}}) {
        Poly<Fq> a = tpoly(F2, coeffs);
        auto rep = build_image_report(d, a, 8);
        INFO("level " << poly_string(a));
        CHECK(rep.verdict.kind == ImageVerdict::Kind::full);

        // orders 2 and 3 both occur among the samples
        std::set<u64> orders;
        for (auto& s : rep.samples) orders.insert(s.order);
        CHECK(orders.count(2) == 1);
        CHECK(orders.count(3) == 1);
    }
}

TEST_CASE("classification on constructed samples") {
    Fq F2(2, 1);
    Fq F3(3, 1);
    Place v(thpoly(F2, {1, 1}));
    Place w(thpoly(F3, {1, 1}));

    SECTION("a single identity sample is inconclusive") {
        LevelRing R(tpoly(F2, {0, 1}));
        auto s = mk_sample(R, v, pmat_identity(R, 2));
        auto verdict = classify_image({s}, R.modulus(), 2);
        CHECK(verdict.kind == ImageVerdict::Kind::inconclusive);
    }

    SECTION("rank 1 is exact: full unit coverage vs a proper subgroup") {
        LevelRing R(tpoly(F3, {0, 1}));
        auto full = classify_image({mk_sample(R, w, pm(F3, {{2}}))}, R.modulus(), 1);
        CHECK(full.kind == ImageVerdict::Kind::full);

        // mod t(t+1) over F_3 the units have order 4; the scalar 2 has order 2
        LevelRing R2(tpoly(F3, {0, 1, 1}));
        auto part = classify_image({mk_sample(R2, w, pm(F3, {{2}}))}, R2.modulus(), 1);
        CHECK(part.kind == ImageVerdict::Kind::cyclic_scalar);

        auto none = classify_image({mk_sample(R, w, pm(F3, {{1}}))}, R.modulus(), 1);
        CHECK(none.kind == ImageVerdict::Kind::inconclusive);
    }

    SECTION("scalar samples of higher rank are cyclic-scalar") {
        LevelRing R(tpoly(F3, {0, 1}));
        auto s = mk_sample(R, w, pm(F3, {{2, 0}, {0, 2}}));
        auto verdict = classify_image({s}, R.modulus(), 2);
        CHECK(verdict.kind == ImageVerdict::Kind::cyclic_scalar);
    }

    SECTION("orders 2 and 3 in GL_2(F_2) force the full group") {
        LevelRing R(tpoly(F2, {0, 1}));
        auto s2 = mk_sample(R, v, pm(F2, {{1, 1}, {0, 1}}));
        auto s3 = mk_sample(R, v, pm(F2, {{0, 1}, {1, 1}}));
        CHECK(s2.order == 2);
        CHECK(s3.order == 3);
        auto verdict = classify_image({s2, s3}, R.modulus(), 2);
        CHECK(verdict.kind == ImageVerdict::Kind::full);
    }

    SECTION("unit-determinant elements of orders 3 and 4 pin SL_2(F_3)") {
        // the only subgroup of SL_2(F_3) with elements of order 3 and 4 is
        // SL_2(F_3) itself, and both characteristic polynomials force
        // determinant 1, so every candidate contains SL
        LevelRing R(tpoly(F3, {0, 1}));
        auto s3 = mk_sample(R, w, pm(F3, {{1, 1}, {0, 1}}));
        auto s4 = mk_sample(R, w, pm(F3, {{0, 2}, {1, 0}}));
        CHECK(s3.order == 3);
        CHECK(s4.order == 4);
        CHECK(R.eq(s3.det, R.one()));
        CHECK(R.eq(s4.det, R.one()));
        auto verdict = classify_image({s3, s4}, R.modulus(), 2);
        CHECK(verdict.kind == ImageVerdict::Kind::contains_sl_index_known);
        CHECK_THAT(verdict.justification,
                   Catch::Matchers::ContainsSubstring("divides 2"));
    }

    SECTION("a transvection alone is inconclusive") {
        // its invariant pair is realized by a cyclic subgroup of order 3
        LevelRing R(tpoly(F3, {0, 1}));
        auto s = mk_sample(R, w, pm(F3, {{1, 1}, {0, 1}}));
        auto verdict = classify_image({s}, R.modulus(), 2);
        CHECK(verdict.kind == ImageVerdict::Kind::inconclusive);
    }

    SECTION("a lattice above the cap degrades to inconclusive") {
        LevelRing R(tpoly(F3, {0, 1}));
        auto s = mk_sample(R, w, pm(F3, {{1, 1}, {0, 1}}));
        auto verdict = classify_image({s}, R.modulus(), 2, 4);
        CHECK(verdict.kind == ImageVerdict::Kind::inconclusive);
        CHECK_THAT(verdict.justification,
                   Catch::Matchers::ContainsSubstring("exceeds the cap"));
    }

    SECTION("empty and mismatched inputs are refused") {
        LevelRing R(tpoly(F2, {0, 1}));
        CHECK_THROWS_AS(classify_image({}, R.modulus(), 2), domain_error);
        auto s = mk_sample(R, v, pmat_identity(R, 2));
        CHECK_THROWS_AS(classify_image({s}, tpoly(F2, {1, 1}), 2), domain_error);
        CHECK_THROWS_AS(classify_image({s}, R.modulus(), 3), domain_error);
    }
}

TEST_CASE("invariants are independent of the per-place basis") {
    Fq F2(2, 1);
    RatFuncField K(F2);
    auto d = rank2_generic(K);
    Poly<Fq> a = tpoly(F2, {1, 1});
    LevelRing R(a);

    auto batch = sample_frobenii(d, a, 4);
    REQUIRE_FALSE(batch.samples.empty());
    const auto& s = batch.samples.front();

    // a permuted or sheared basis conjugates the matrix and changes nothing;
    // both changes of basis are involutions in characteristic 2
    for (auto p : {pm(F2, {{0, 1}, {1, 0}}), pm(F2, {{1, 1}, {0, 1}})}) {
        REQUIRE(pmat_eq(R, pmat_mul(R, p, p), pmat_identity(R, 2)));
        PMat conj = pmat_mul(R, pmat_mul(R, p, s.matrix), p);
        auto cp = pmat_char_poly(R, conj);
        REQUIRE(cp.size() == s.char_poly.size());
        for (size_t i = 0; i < cp.size(); ++i) CHECK(R.eq(cp[i], s.char_poly[i]));
        CHECK(R.eq(pmat_det(R, conj), s.det));
        auto ord = pmat_order(R, conj);
        REQUIRE(ord.has_value());
        CHECK(*ord == s.order);
    }
}

TEST_CASE("subgroup lattice of GL_2(F_2)") {
    Fq F2(2, 1);
    auto lat = gl_lattice(tpoly(F2, {0, 1}), 2);

    CHECK(lat->order == 6);
    CHECK(lat->sl_order == 6); // determinants are trivial over F_2
    REQUIRE(lat->subgroups.size() == 6);

    std::map<size_t, int> by_size;
    for (auto& h : lat->subgroups) ++by_size[h.size()];
    CHECK(by_size[1] == 1);
    CHECK(by_size[2] == 3);
    CHECK(by_size[3] == 1);
    CHECK(by_size[6] == 1);
    CHECK(lat->subgroups[lat->full_subgroup].size() == 6);
}

TEST_CASE("subgroup lattice of GL_2(F_3) satisfies lagrange and closure") {
    Fq F3(3, 1);
    auto lat = gl_lattice(tpoly(F3, {0, 1}), 2);

    CHECK(lat->order == 48);
    CHECK(lat->sl_order == 24);
    CHECK(lat->subgroups.size() >= 30);
    bool saw_sl = false;
    for (auto& h : lat->subgroups) {
        CHECK(lat->order % h.size() == 0);
        if (h.size() == 24) {
            u64 in_sl = 0;
            for (u64 i : h) in_sl += lat->elem_in_sl[i];
            if (in_sl == 24) saw_sl = true;
        }
    }
    CHECK(saw_sl);
}

TEST_CASE("image report assembly") {
    Fq F2(2, 1);
    RatFuncField K(F2);
    auto c = carlitz(K);
    Poly<Fq> a = tpoly(F2, {1, 1, 1});

    auto rep = build_image_report(c, a, 6);
    CHECK(rep.module == "phi_t = theta + tau");
    CHECK(rep.level == tpoly(F2, {1, 1, 1}));
    CHECK(rep.rank == 1);
    CHECK(rep.degree_bound == 6);
    CHECK(rep.samples.size() + rep.skips.size() ==
          places_up_to(F2, 6).size());
    CHECK(rep.invariant_pairs.size() == 3);
    CHECK(rep.unit_group_order % rep.det_group_order == 0);
    CHECK(verdict_name(rep.verdict.kind) == std::string("full"));

    // a bound with no usable places at all
    DrinfeldModule<RatFuncField> bad(
        K, OrePoly<RatFuncField>(K, {K.gen(), K.make(K.one().num, thpoly(F2, {1, 1}))}));
    auto empty = build_image_report(bad, tpoly(F2, {0, 1}), 1);
    CHECK(empty.samples.empty());
    CHECK(empty.verdict.kind == ImageVerdict::Kind::inconclusive);
}
