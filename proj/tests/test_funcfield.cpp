#include <catch2/catch_amalgamated.hpp>

#include <dkt/place.hpp>
#include <dkt/ratfunc.hpp>
#include <dkt/rational_roots.hpp>

using namespace dkt;

namespace {

RatFunc rf(const RatFuncField& K, std::vector<u64> num, std::vector<u64> den = {1}) {
    const Fq& F = K.coeff_field();
    return K.make(Poly<Fq>(F, Var::theta, num), Poly<Fq>(F, Var::theta, den));
}

} // namespace

TEST_CASE("rational functions normalize to reduced form") {
    Fq F(2, 1);
    RatFuncField K(F);
    // (theta^2+theta) / theta = theta + 1
    auto x = rf(K, {0, 1, 1}, {0, 1});
    CHECK(x == rf(K, {1, 1}));
    CHECK(K.is_integral(x));
    // zero is 0/1
    auto z = rf(K, {0}, {0, 1});
    CHECK(K.is_zero(z));
    CHECK(z.den.is_one());
    CHECK_THROWS_AS(K.make(Poly<Fq>(F, Var::theta, {1}), Poly<Fq>::zero(F, Var::theta)), domain_error);
}

TEST_CASE("rational function field axioms") {
    Fq F(3, 1);
    RatFuncField K(F);
    Rng rng(21);
    for (int i = 0; i < 300; ++i) {
        auto a = K.random_elem(rng), b = K.random_elem(rng), c = K.random_elem(rng);
        REQUIRE(K.add(a, b) == K.add(b, a));
        REQUIRE(K.mul(a, K.add(b, c)) == K.add(K.mul(a, b), K.mul(a, c)));
        REQUIRE(K.mul(K.mul(a, b), c) == K.mul(a, K.mul(b, c)));
        REQUIRE(K.is_zero(K.sub(a, a)));
        if (!K.is_zero(a)) REQUIRE(K.mul(a, K.inv(a)) == K.one());
    }
}

TEST_CASE("reduction at places: frozen examples") {
    Fq F(2, 1);
    RatFuncField K(F);
    // reduce(theta, v=(theta+1)) = 1
    Place v1(Poly<Fq>(F, Var::theta, {1, 1}));
    auto r1 = v1.reduce(K.gen());
    CHECK(v1.residue_field().eq(r1, v1.residue_field().one()));

    // reduce(1/theta, v=(theta)) -> pole
    Place v0(Poly<Fq>(F, Var::theta, {0, 1}));
    CHECK_THROWS_AS(v0.reduce(K.inv(K.gen())), bad_reduction_error);
    try {
        v0.reduce(K.inv(K.gen()));
    } catch (const bad_reduction_error& e) {
        CHECK(e.place == "theta");
    }

    // reduce(theta^2+theta, v=(theta^2+theta+1)) = 1
    Place v2(Poly<Fq>(F, Var::theta, {1, 1, 1}));
    auto r2 = v2.reduce(rf(K, {0, 1, 1}));
    CHECK(v2.residue_field().eq(r2, v2.residue_field().one()));
}

TEST_CASE("reduction is a ring homomorphism on random inputs") {
    for (u64 q : {2, 3}) {
        Fq F = Fq::of_order(q);
        RatFuncField K(F);
        auto places = places_up_to(F, 3);
        Rng rng(fnv1a(fnv_offset, q));
        int done = 0;
        while (done < 1000) {
            auto& v = places[rng.below(places.size())];
            auto x = K.random_elem(rng), y = K.random_elem(rng);
            const auto& kv = v.residue_field();
            try {
                auto rx = v.reduce(x), ry = v.reduce(y);
                auto rsum = v.reduce(K.add(x, y));
                auto rprod = v.reduce(K.mul(x, y));
                REQUIRE(kv.eq(rsum, kv.add(rx, ry)));
                REQUIRE(kv.eq(rprod, kv.mul(rx, ry)));
            } catch (const bad_reduction_error&) {
                continue; // pole: outside the domain of the homomorphism
            }
            ++done;
        }
    }
}

TEST_CASE("place enumeration order and residue fields") {
    Fq F(2, 1);
    auto places = places_up_to(F, 2);
    REQUIRE(places.size() == 3);
    CHECK(places[0].name() == "theta");
    CHECK(places[1].name() == "theta+1");
    CHECK(places[2].name() == "theta^2+theta+1");
    CHECK(places[2].residue_field().cardinality() == 4);
    // theta_bar satisfies pi: theta^2 + theta + 1 = 0
    const auto& kv = places[2].residue_field();
    auto tb = places[2].theta_bar();
    CHECK(kv.eq(kv.add(kv.add(kv.mul(tb, tb), tb), kv.one()), kv.zero()));
}

TEST_CASE("rational roots: frozen examples") {
    Fq F(2, 1);
    RatFuncField K(F);
    Var x = Var::x;

    // x^2 + theta x = x(x + theta) -> {0, theta}
    Poly<RatFuncField> P1(K, x, {K.zero(), K.gen(), K.one()});
    auto r1 = rational_roots(P1);
    REQUIRE(r1.size() == 2);
    CHECK(r1[0] == K.zero());
    CHECK(r1[1] == K.gen());

    // x^2 + theta x + theta -> no rational roots
    Poly<RatFuncField> P2(K, x, {K.gen(), K.gen(), K.one()});
    CHECK(rational_roots(P2).empty());

    // (x - 1/theta)(x - theta) -> {1/theta, theta}
    auto inv_theta = K.inv(K.gen());
    Poly<RatFuncField> lin1(K, x, {K.neg(inv_theta), K.one()});
    Poly<RatFuncField> lin2(K, x, {K.neg(K.gen()), K.one()});
    auto r3 = rational_roots(lin1 * lin2);
    REQUIRE(r3.size() == 2);
    CHECK((r3[0] == K.gen() || r3[1] == K.gen()));
    CHECK((r3[0] == inv_theta || r3[1] == inv_theta));
}

TEST_CASE("rational roots substitute to zero and respect degree bound") {
    Fq F(3, 1);
    RatFuncField K(F);
    Rng rng(31);
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<RatFunc> c;
        unsigned deg = 2 + (unsigned)rng.below(3);
        for (unsigned i = 0; i < deg; ++i) c.push_back(K.random_elem(rng));
        c.push_back(K.one());
        Poly<RatFuncField> P(K, Var::x, c);
        auto roots = rational_roots(P);
        REQUIRE(roots.size() <= (size_t)P.degree());
        for (auto& r : roots) REQUIRE(K.is_zero(P.eval(r)));
    }
    // planted roots are found
    for (int trial = 0; trial < 40; ++trial) {
        auto a = K.random_elem(rng), b = K.random_elem(rng);
        Poly<RatFuncField> P(K, Var::x, {K.mul(a, b), K.neg(K.add(a, b)), K.one()});
        auto roots = rational_roots(P);
        bool founda = false, foundb = false;
        for (auto& r : roots) {
            if (r == a) founda = true;
            if (r == b) foundb = true;
        }
        REQUIRE(founda);
        REQUIRE(foundb);
    }
}

TEST_CASE("monic divisor enumeration") {
    Fq F(2, 1);
    // theta^2+theta = theta(theta+1): divisors 1, theta, theta+1, theta^2+theta
    auto divs = monic_divisors(Poly<Fq>(F, Var::theta, {0, 1, 1}));
    REQUIRE(divs.size() == 4);
    CHECK(divs[0].is_one());
    CHECK(divs[3] == Poly<Fq>(F, Var::theta, {0, 1, 1}));
}
