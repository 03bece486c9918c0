#include <catch2/catch_amalgamated.hpp>

#include <dkt/ore.hpp>
#include <dkt/ratfunc.hpp>
#include <dkt/tower.hpp>

using namespace dkt;

namespace {

template <class F>
OrePoly<F> random_ore(const F& K, Rng& rng, unsigned maxdeg) {
    std::vector<typename F::Elem> c;
    unsigned d = (unsigned)rng.below(maxdeg + 1);
    for (unsigned i = 0; i <= d; ++i) c.push_back(K.random_elem(rng));
    return OrePoly<F>(K, std::move(c));
}

} // namespace

TEST_CASE("defining relation tau c = c^q tau") {
    Fq F2(2, 1);
    RatFuncField K(F2);
    auto tau = OrePoly<RatFuncField>::tau(K);
    auto c = OrePoly<RatFuncField>::constant(K, K.gen()); // theta
    auto lhs = tau * c;
    // theta^2 tau
    auto rhs = OrePoly<RatFuncField>::monomial(K, K.mul(K.gen(), K.gen()), 1);
    CHECK(lhs == rhs);
    CHECK(lhs != c * tau); // non-commutativity witness for c outside F_q
}

TEST_CASE("Carlitz square: (theta + tau)^2 over F_2(theta)") {
    Fq F(2, 1);
    RatFuncField K(F);
    OrePoly<RatFuncField> phi_t(K, {K.gen(), K.one()});
    auto sq = phi_t * phi_t;
    REQUIRE(sq.degree() == 2);
    auto theta2 = K.mul(K.gen(), K.gen());
    CHECK(sq.coeff(0) == theta2);
    CHECK(sq.coeff(1) == K.add(K.gen(), theta2)); // theta + theta^2
    CHECK(sq.coeff(2) == K.one());
}

TEST_CASE("associativity and distributivity on random triples") {
    Fq F4(2, 2);
    Rng rng(123);
    for (int i = 0; i < 1000; ++i) {
        auto f = random_ore(F4, rng, 3), g = random_ore(F4, rng, 3), h = random_ore(F4, rng, 3);
        REQUIRE((f * g) * h == f * (g * h));
        REQUIRE(f * (g + h) == f * g + f * h);
        if (!f.is_zero() && !g.is_zero()) REQUIRE((f * g).degree() == f.degree() + g.degree());
    }
    Fq F3(3, 1);
    RatFuncField K(F3);
    Rng rng2(124);
    for (int i = 0; i < 200; ++i) {
        auto f = random_ore(K, rng2, 2), g = random_ore(K, rng2, 2), h = random_ore(K, rng2, 2);
        REQUIRE((f * g) * h == f * (g * h));
        REQUIRE(f * (g + h) == f * g + f * h);
    }
}

TEST_CASE("evaluation: frozen examples and the composition law") {
    Fq F(2, 1);
    RatFuncField K(F);
    auto tau = OrePoly<RatFuncField>::tau(K);
    Rng xr(5);
    auto x = K.random_elem(xr);
    CHECK(tau.evaluate(x) == K.mul(x, x));

    // Carlitz phi_t(theta) = theta^2 + theta^2 = 0
    OrePoly<RatFuncField> phi_t(K, {K.gen(), K.one()});
    CHECK(K.is_zero(phi_t.evaluate(K.gen())));

    Rng rng(55);
    for (int i = 0; i < 200; ++i) {
        auto f = random_ore(K, rng, 2), g = random_ore(K, rng, 2);
        auto y = K.random_elem(rng);
        REQUIRE((f * g).evaluate(y) == f.evaluate(g.evaluate(y)));
    }
}

TEST_CASE("evaluation is F_q-linear") {
    Fq F(3, 1);
    using T = TowerField<Fq>;
    T L = T::canonical(F, 3);
    Rng rng(77);
    for (int i = 0; i < 300; ++i) {
        auto f = random_ore(L, rng, 3);
        auto x = L.random_elem(rng), y = L.random_elem(rng);
        u64 alpha = F.random_elem(rng);
        auto lhs = f.evaluate(L.add(L.fq_scale(alpha, x), y));
        auto rhs = L.add(L.fq_scale(alpha, f.evaluate(x)), f.evaluate(y));
        REQUIRE(L.eq(lhs, rhs));
    }
}

TEST_CASE("constant term is multiplicative") {
    Fq F(5, 1);
    auto tau = OrePoly<Fq>::tau(F);
    CHECK(tau.constant_term() == F.zero());
    RatFuncField K(Fq(2, 1));
    OrePoly<RatFuncField> f(K, {K.gen(), K.one()});
    CHECK(f.constant_term() == K.gen());
    Rng rng(91);
    for (int i = 0; i < 300; ++i) {
        auto a = random_ore(F, rng, 4), b = random_ore(F, rng, 4);
        REQUIRE((a * b).constant_term() == F.mul(a.constant_term(), b.constant_term()));
    }
}

TEST_CASE("right division") {
    Fq F4(2, 2);
    Rng rng(200);
    for (int i = 0; i < 300; ++i) {
        auto g = random_ore(F4, rng, 3);
        if (g.is_zero()) continue;
        auto f = random_ore(F4, rng, 5);
        auto [q, r] = f.right_divide(g);
        REQUIRE(f == q * g + r);
        REQUIRE(r.degree() < g.degree());
        // trivial cases
        auto [q2, r2] = g.right_divide(g);
        REQUIRE(q2 == OrePoly<Fq>::one(F4));
        REQUIRE(r2.is_zero());
        if (f.degree() < g.degree()) {
            auto [q3, r3] = f.right_divide(g);
            REQUIRE(q3.is_zero());
            REQUIRE(r3 == f);
        }
    }
    CHECK_THROWS_AS(OrePoly<Fq>::one(F4).right_divide(OrePoly<Fq>::zero(F4)), domain_error);
}

TEST_CASE("kernel of a separable additive polynomial has at most q^deg points") {
    // ker(tau - 1) on the F_4 tower over F_2: solutions of x^2 = x are F_2
    Fq F(2, 1);
    auto L = TowerField<Fq>::canonical(F, 2);
    OrePoly<TowerField<Fq>> f(L, {L.neg(L.one()), L.one()});
    unsigned count = 0;
    for (u64 i = 0; i < L.cardinality(); ++i)
        if (L.is_zero(f.evaluate(L.elem_from_index(i)))) ++count;
    CHECK(count == 2);
}

TEST_CASE("coefficient mapping into an extension") {
    Fq F(2, 1);
    RatFuncField K(F);
    auto L = TowerField<Fq>::canonical(F, 2);
    OrePoly<RatFuncField> f(K, {K.one(), K.one()});
    auto g = f.map_coeffs(L, [&](const RatFunc& c) {
        // constants only in this test
        return L.from_base(c.num.coeff(0));
    });
    CHECK(g.degree() == 1);
    CHECK(L.eq(g.evaluate(L.gen()), L.add(L.gen(), L.mul(L.gen(), L.gen()))));
}
