#include <catch2/catch_amalgamated.hpp>

#include <dkt/drinfeld.hpp>

using namespace dkt;

namespace {

RatFunc rf(const RatFuncField& K, std::vector<u64> num, std::vector<u64> den = {1}) {
    const Fq& F = K.coeff_field();
    return K.make(Poly<Fq>(F, Var::theta, num), Poly<Fq>(F, Var::theta, den));
}

DrinfeldModule<RatFuncField> carlitz(const RatFuncField& K) {
    return {K, OrePoly<RatFuncField>(K, {rf(K, {0, 1}), rf(K, {1})})};
}

Poly<Fq> tpoly(const Fq& F, std::vector<u64> c) { return Poly<Fq>(F, Var::t, c); }

Poly<Fq> random_tpoly(const Fq& F, Rng& rng, int maxdeg) {
    std::vector<u64> c((size_t)rng.below((u64)maxdeg + 1) + 1);
    for (auto& x : c) x = F.random_elem(rng);
    return Poly<Fq>(F, Var::t, c);
}

} // namespace

TEST_CASE("phi is a ring homomorphism with the Carlitz oracle values") {
    Fq F(2, 1);
    RatFuncField K(F);
    auto d = carlitz(K);
    CHECK(d.rank() == 1);
    CHECK(d.gamma_t() == rf(K, {0, 1}));

    // phi_{t^2} = theta^2 + (theta + theta^2) tau + tau^2
    auto sq = d.phi(tpoly(F, {0, 0, 1}));
    CHECK(sq == OrePoly<RatFuncField>(K, {rf(K, {0, 0, 1}), rf(K, {0, 1, 1}), rf(K, {1})}));

    CHECK(d.phi(tpoly(F, {1})) == OrePoly<RatFuncField>::one(K));
    CHECK(d.phi(tpoly(F, {0, 1, 1})) == d.phi(tpoly(F, {0, 1})) * d.phi(tpoly(F, {1, 1})));
}

TEST_CASE("phi homomorphism law on random levels") {
    // Carlitz: coefficient degrees of phi_a stay near q^k(deg a - k), so
    // levels of degree <= 4 are cheap at q = 2.
    Fq F2(2, 1);
    RatFuncField K(F2);
    auto c = carlitz(K);
    Rng rng(401);
    for (int i = 0; i < 50; ++i) {
        auto a = random_tpoly(F2, rng, 4), b = random_tpoly(F2, rng, 4);
        REQUIRE(c.phi(a * b) == c.phi(a) * c.phi(b));
        REQUIRE(c.phi(a + b) == c.phi(a) + c.phi(b));
        if (!a.is_zero()) REQUIRE(c.phi(a).degree() == a.degree());
    }

    // rank 2 over a finite base: coefficients live in F_9, no degree growth
    Fq F3(3, 1);
    auto L = TowerField<Fq>::canonical(F3, 2);
    DrinfeldModule<TowerField<Fq>> d(L, OrePoly<TowerField<Fq>>(L, {L.gen(), L.one(), L.gen()}));
    for (int i = 0; i < 50; ++i) {
        auto a = random_tpoly(F3, rng, 4), b = random_tpoly(F3, rng, 4);
        REQUIRE(d.phi(a * b) == d.phi(a) * d.phi(b));
        REQUIRE(d.phi(a + b) == d.phi(a) + d.phi(b));
        if (!a.is_zero()) REQUIRE(d.phi(a).degree() == 2 * a.degree());
        // constant term of phi_a is a(gamma_t)
        auto ct = L.zero();
        for (int j = a.degree(); j >= 0; --j)
            ct = L.add(L.mul(ct, d.gamma_t()), d.embed_scalar(a.coeff((size_t)j)));
        REQUIRE(L.eq(d.phi(a).constant_term(), ct));
    }
}

TEST_CASE("characteristic: generic over the rational field, special otherwise") {
    Fq F2(2, 1);
    RatFuncField K(F2);
    CHECK(carlitz(K).characteristic().generic);

    // phi_t = 1 + tau over the base F_2 itself
    DrinfeldModule<Fq> d(F2, OrePoly<Fq>(F2, {1, 1}));
    auto ch = d.characteristic();
    CHECK_FALSE(ch.generic);
    CHECK(ch.p0 == tpoly(F2, {1, 1}));
    CHECK_FALSE(ch.prime_to(tpoly(F2, {1, 1})));
    CHECK(ch.prime_to(tpoly(F2, {0, 1})));

    // Carlitz reduced at theta^2+theta+1: minimal polynomial of theta-bar
    Place v(Poly<Fq>(F2, Var::theta, {1, 1, 1}));
    auto red = reduce_at(carlitz(K), v);
    auto chr = red.characteristic();
    CHECK_FALSE(chr.generic);
    CHECK(chr.p0 == tpoly(F2, {1, 1, 1}));
}

TEST_CASE("reduction at places keeps rank on good reduction and names bad places") {
    Fq F(2, 1);
    RatFuncField K(F);

    Place v1(Poly<Fq>(F, Var::theta, {1, 1}));
    auto red = reduce_at(carlitz(K), v1);
    const auto& kv = v1.residue_field();
    CHECK(red.rank() == 1);
    CHECK(kv.eq(red.gamma_t(), kv.one()));
    CHECK(kv.eq(red.phi_t().coeff(1), kv.one()));

    // pole of 1/theta at (theta)
    DrinfeldModule<RatFuncField> bad(K, OrePoly<RatFuncField>(K, {rf(K, {0, 1}), rf(K, {1}), rf(K, {1}, {0, 1})}));
    Place v0(Poly<Fq>(F, Var::theta, {0, 1}));
    try {
        reduce_at(bad, v0);
        FAIL("expected bad reduction");
    } catch (const bad_reduction_error& e) {
        CHECK(e.place == "theta");
    }

    // rank-2 module with unit leading coefficient reduces with rank 2 everywhere
    DrinfeldModule<RatFuncField> r2(K, OrePoly<RatFuncField>(K, {rf(K, {0, 1}), rf(K, {1}), rf(K, {1})}));
    for (const auto& v : places_up_to(F, 3)) REQUIRE(reduce_at(r2, v).rank() == 2);
}

TEST_CASE("restriction to F_q[b] multiplies the rank and transforms the characteristic") {
    Fq F(2, 1);
    RatFuncField K(F);
    auto d = carlitz(K);

    auto s = d.restrict(tpoly(F, {0, 0, 1}));
    CHECK(s.rank() == 2);
    CHECK(s.phi_t() == OrePoly<RatFuncField>(K, {rf(K, {0, 0, 1}), rf(K, {0, 1, 1}), rf(K, {1})}));
    CHECK(d.restrict(tpoly(F, {0, 1})) == d);
    CHECK_THROWS_AS(d.restrict(tpoly(F, {1})), domain_error);

    // special-characteristic module: q0 = minimal polynomial of b(gamma_t)
    DrinfeldModule<Fq> u(F, OrePoly<Fq>(F, {1, 1}));
    auto r = u.restrict(tpoly(F, {0, 0, 1}));
    CHECK(r.rank() == 2);
    CHECK(r.characteristic().p0 == tpoly(F, {1, 1}));

    // restriction composes: psi_w = phi_{w(b)}
    Rng rng(77);
    for (int i = 0; i < 25; ++i) {
        auto b = random_tpoly(F, rng, 3);
        if (b.degree() < 1) continue;
        auto w = random_tpoly(F, rng, 2);
        REQUIRE(d.restrict(b).phi(w) == d.phi(w.compose(b)));
    }
}

TEST_CASE("hom space window: Carlitz endomorphisms are the A-scalars") {
    Fq F(2, 1);
    RatFuncField K(F);
    auto d = carlitz(K);

    auto basis = hom_space(d, d, 1, 1);
    REQUIRE(basis.size() == 2);
    CHECK(basis[0] == OrePoly<RatFuncField>::one(K));
    CHECK(basis[1] == d.phi_t());

    // enlarging the window adds exactly phi_{t^2}
    auto wider = hom_space(d, d, 2, 2);
    REQUIRE(wider.size() == 3);
    CHECK(wider[2] == d.phi(tpoly(F, {0, 0, 1})));

    CHECK(hom_default_D(d) == 2);
    CHECK(hom_default_E(d) == 2);
}

TEST_CASE("hom space over a finite base and the zero window") {
    Fq F2(2, 1);
    // over F_2 every coefficient is Frobenius-fixed, so tau is an endomorphism
    DrinfeldModule<Fq> d(F2, OrePoly<Fq>(F2, {1, 1}));
    auto basis = hom_space(d, d, 1);
    REQUIRE(basis.size() == 2);
    CHECK(basis[1] == OrePoly<Fq>::tau(F2));

    // Carlitz vs theta + theta*tau: no nonzero constant intertwines them
    RatFuncField K(F2);
    DrinfeldModule<RatFuncField> tw(K, OrePoly<RatFuncField>(K, {rf(K, {0, 1}), rf(K, {0, 1})}));
    CHECK(hom_space(carlitz(K), tw, 0, 2).empty());
}

TEST_CASE("hom space respects window monotonicity over a tower base") {
    Fq F(2, 2);
    auto L = TowerField<Fq>::canonical(F, 2); // F_16 over F_4
    DrinfeldModule<TowerField<Fq>> d(L, OrePoly<TowerField<Fq>>(L, {L.one(), L.gen(), L.one()}));
    size_t prev = 0;
    for (unsigned D = 0; D <= 4; ++D) {
        auto basis = hom_space(d, d, D);
        REQUIRE(basis.size() >= prev);
        prev = basis.size();
    }
    // the scalar multiplications by F_q always commute
    auto b0 = hom_space(d, d, 0);
    CHECK(b0.size() == 1);
}

TEST_CASE("isogenies check the intertwining identity and keep the characteristic") {
    Fq F2(2, 1);
    auto L = TowerField<Fq>::canonical(F2, 2); // F_4, q = 2
    auto w = L.gen();

    DrinfeldModule<TowerField<Fq>> d1(L, OrePoly<TowerField<Fq>>(L, {L.one(), L.one()}));
    DrinfeldModule<TowerField<Fq>> d2(L, OrePoly<TowerField<Fq>>(L, {L.one(), w}));

    // constant c intertwines 1+tau with 1 + c^{-1} tau
    auto f = OrePoly<TowerField<Fq>>::constant(L, L.inv(w));
    Isogeny<TowerField<Fq>> iso(d1, d2, f);
    CHECK(iso.source().characteristic() == iso.target().characteristic());

    CHECK_THROWS_AS(Isogeny<TowerField<Fq>>(d1, d2, OrePoly<TowerField<Fq>>::tau(L)), domain_error);
    CHECK_THROWS_AS(Isogeny<TowerField<Fq>>(d1, d2, OrePoly<TowerField<Fq>>::zero(L)), domain_error);

    // phi_b is an endo-isogeny for every nonzero b
    RatFuncField K(F2);
    auto c = carlitz(K);
    Rng rng(90);
    for (int i = 0; i < 20; ++i) {
        auto b = random_tpoly(F2, rng, 3);
        if (b.is_zero()) continue;
        Isogeny<RatFuncField> e(c, c, c.phi(b));
        REQUIRE(e.source().characteristic() == e.target().characteristic());
    }
}

TEST_CASE("isotriviality twist criterion") {
    Fq F(2, 1);
    RatFuncField K(F);

    // constant coefficients
    DrinfeldModule<RatFuncField> c0(K, OrePoly<RatFuncField>(K, {rf(K, {1}), rf(K, {1}), rf(K, {1})}));
    CHECK(is_isotrivial(c0) == IsoTriviality::yes);

    CHECK(is_isotrivial(carlitz(K)) == IsoTriviality::no);

    // gamma_t = theta is transcendental; the (0,1) ratio theta^{q-1} is nonconstant
    DrinfeldModule<RatFuncField> tt(K, OrePoly<RatFuncField>(K, {rf(K, {0, 1}), rf(K, {0, 1})}));
    CHECK(is_isotrivial(tt) == IsoTriviality::no);

    // 1 + theta*tau twists to 1 + tau via c^{q-1} = 1/theta
    DrinfeldModule<RatFuncField> ot(K, OrePoly<RatFuncField>(K, {rf(K, {1}), rf(K, {0, 1})}));
    CHECK(is_isotrivial(ot) == IsoTriviality::yes);

    // rank 2: 1 + theta*tau + theta^3*tau^2 admits the same twist
    DrinfeldModule<RatFuncField> r2y(K, OrePoly<RatFuncField>(K, {rf(K, {1}), rf(K, {0, 1}), rf(K, {0, 0, 0, 1})}));
    CHECK(is_isotrivial(r2y) == IsoTriviality::yes);

    // rank 2 with a (1,2) obstruction: theta^{q^2-1}/theta^{q-1} = theta^2
    DrinfeldModule<RatFuncField> r2n(K, OrePoly<RatFuncField>(K, {rf(K, {1}), rf(K, {0, 1}), rf(K, {0, 1})}));
    CHECK(is_isotrivial(r2n) == IsoTriviality::no);

    // vanishing middle coefficient: only the (0,2) pair constrains
    DrinfeldModule<RatFuncField> gap(K, OrePoly<RatFuncField>(K, {rf(K, {1}), rf(K, {0}), rf(K, {0, 1})}));
    CHECK(is_isotrivial(gap) == IsoTriviality::yes);
}
