#include "doctest.h"

#include <cmath>

#include "nsolab/oracles.hpp"
#include "nsolab/rng.hpp"
#include "properties.hpp"
#include "reference.hpp"

using namespace nsolab;

TEST_CASE("catalog values at documented points") {
    CHECK(catalog_get("relu_net").value({1.0, 1.0, 0.0}) == 1.0);
    CHECK(catalog_get("abs1d").value({0.0}) == 0.0);
    CHECK(catalog_get("global_l1").value({1.0, -1.0}) == 0.0);
    CHECK(catalog_get("global_pow32").value({1.0, -1.0}) == 0.0);
    CHECK(catalog_get("verdier_ok").value({2.0, 0.5}) == 0.0);
    CHECK(catalog_get("sin_example").value({0.0}) == 0.0);
    CHECK(catalog_get("strict2d").value({0.0, 0.0}) == 0.0);
    CHECK(catalog_get("quad", {3, 0}).value({1.0, 2.0, 2.0}) == 4.5);
}

TEST_CASE("unknown ids list the catalog") {
    try {
        catalog_get("nope");
        FAIL("expected a catalog error");
    } catch (const CatalogError& e) {
        const std::string msg = e.what();
        for (const auto& id : catalog_ids()) CHECK(msg.find(id) != std::string::npos);
    }
}

TEST_CASE("every entry matches the reference closed form") {
    for (const auto& id : catalog_ids()) {
        const auto spec = catalog_get(id);
        CounterRng rng(5, id.size());
        for (int k = 0; k < 200; ++k) {
            const Point x = k % 2 ? testing::sample_point(spec, rng) : testing::sample_kink(spec, rng);
            CHECK(spec.value(x) == doctest::Approx(testing::ref_value(spec, x)).epsilon(1e-13));
        }
    }
}

TEST_CASE("subgradient selection examples") {
    const auto sin = catalog_get("sin_example");
    for (const auto& sel : {SubgradientSelection::min_norm(), SubgradientSelection::sign(),
                            SubgradientSelection::random_extreme(3)})
        CHECK(subgradient_select(sin, {0.0}, sel)[0] == 0.0);
    const auto abs = catalog_get("abs1d");
    for (const auto& sel : {SubgradientSelection::min_norm(), SubgradientSelection::sign(),
                            SubgradientSelection::random_extreme(3)})
        CHECK(subgradient_select(abs, {2.0}, sel)[0] == 1.0);
    const auto relu = catalog_get("relu_net");
    for (const auto& sel : {SubgradientSelection::min_norm(), SubgradientSelection::sign(),
                            SubgradientSelection::random_extreme(3)}) {
        const auto g = subgradient_select(relu, {1.0, 1.0, 0.1}, sel);
        CHECK(g[0] == doctest::Approx(0.1));
        CHECK(g[1] == doctest::Approx(0.0));
        CHECK(g[2] == doctest::Approx(1.0));
    }
    CHECK(subgradient_select(abs, {0.0}, SubgradientSelection::sign())[0] == 0.0);
    const double e = subgradient_select(abs, {0.0}, SubgradientSelection::random_extreme(8))[0];
    CHECK(std::abs(e) == 1.0);
    CHECK_THROWS(subgradient_select(abs, {0.0, 1.0}, SubgradientSelection::sign()));
}

TEST_CASE("random extreme selection is reproducible") {
    const auto spec = catalog_get("global_l1");
    const Point x{1.0, -1.0};
    const auto a = subgradient_select(spec, x, SubgradientSelection::random_extreme(4));
    const auto b = subgradient_select(spec, x, SubgradientSelection::random_extreme(4));
    CHECK(a == b);
}

TEST_CASE("min-norm subgradient examples") {
    auto r = min_norm_subgradient(catalog_get("abs1d"), {0.0});
    CHECK(r.norm == 0.0);
    CHECK(r.vector[0] == 0.0);
    r = min_norm_subgradient(catalog_get("quad"), {3.0, 4.0});
    CHECK(r.norm == doctest::Approx(5.0));
    CHECK(r.vector == Point{3.0, 4.0});
    // At (0, 0.5) the piece -18 x1^2 + 12|x2| = 6 is the larger one, so the
    // gradient is (0, 12).
    const auto strict = catalog_get("strict2d");
    r = min_norm_subgradient(strict, {0.0, 0.5});
    CHECK(r.norm == doctest::Approx(12.0));
    CounterRng rng(1);
    CHECK(testing::brute_force_min_norm(strict.generators({0.0, 0.5}), 10000, rng) == doctest::Approx(12.0));
    // Where the second piece is active the gradient is (0, 3).
    r = min_norm_subgradient(strict, {0.5, 0.5});
    CHECK(r.norm == doctest::Approx(std::hypot(6.0, 3.0)));
    r = min_norm_subgradient(catalog_get("global_l1"), {1.0, -1.0});
    CHECK(r.norm < 1e-12);
}

TEST_CASE("min-norm on rpca needs a generator oracle at kinks") {
    const auto spec = catalog_get("rpca_l1");
    CHECK_THROWS_AS(min_norm_subgradient(spec, spec.rpca->x_star), UnsupportedOracleError);
    CounterRng rng(1);
    const Point x = testing::sample_point(spec, rng);
    const auto r = min_norm_subgradient(spec, x);
    CHECK(r.norm == doctest::Approx(norm(testing::ref_gradient(spec, x))));
}

TEST_CASE("distance to the critical set") {
    const auto relu = catalog_get("relu_net");
    CHECK(distance_to_critical(relu, {1.02, 0.97, -0.05}) == doctest::Approx(0.05));
    CHECK(distance_to_critical(relu, {1.0, 1.0, 0.0}) == 0.0);
    CHECK_THROWS_AS(distance_to_critical(relu, {2.0, 1.0, 0.0}), OutOfNeighborhoodError);
    const auto rpca = catalog_get("rpca_l1");
    CHECK(distance_to_critical(rpca, rpca.rpca->x_star) == 0.0);
    CHECK_THROWS_AS(distance_to_critical(catalog_get("abs1d"), {0.0}), UnsupportedOracleError);
}

TEST_CASE("critical-set oracle invariants") {
    for (const std::string id : {"relu_net", "rpca_l1", "verdier_ok", "verdier_bad", "quad"}) {
        const auto spec = catalog_get(id);
        const auto& cs = *spec.critical_set;
        CounterRng rng(2, id.size());
        const double radius = std::isfinite(cs.valid_radius) ? cs.valid_radius : 1.0;
        for (int k = 0; k < 200; ++k) {
            const Point x = rng.in_ball(cs.anchor, 0.9 * radius);
            const Point p = cs.project(x);
            CHECK(cs.distance(p) <= 1e-12);
            CHECK(std::abs(distance(x, p) - cs.distance(x)) <= 1e-10);
            const Point v = rng.in_ball(Point(spec.n, 0.0), 2.0);
            const Point w = rng.in_ball(Point(spec.n, 0.0), 2.0);
            const Point tv = cs.tangent_project(p, v);
            CHECK(distance(cs.tangent_project(p, tv), tv) <= 1e-12);
            const Point lin = cs.tangent_project(p, add(scaled(v, 2.0), w));
            CHECK(distance(lin, add(scaled(tv, 2.0), cs.tangent_project(p, w))) <= 1e-12);
        }
    }
}

TEST_CASE("rpca instance structure") {
    const auto inst = make_rpca_instance(0);
    CHECK(inst.M.size() == 240);
    for (std::size_t i = 0; i < inst.r; ++i)
        for (std::size_t j = 0; j < inst.n; ++j) CHECK(inst.M[i * inst.n + j] == 0.0);
    CHECK(inst.sigma_min == doctest::Approx(1.0));
    const auto spec = catalog_get("rpca_l1");
    CHECK(spec.value(inst.x_star) == doctest::Approx(inst.l1_norm_M()));
    CHECK(make_rpca_instance(0).M == make_rpca_instance(0).M);
    CHECK(make_rpca_instance(1).M != make_rpca_instance(0).M);
    CHECK_THROWS_AS(make_rpca_instance(0, 3, 4, 3), CatalogError);
}

TEST_CASE("Chetaev function of relu_net increases by alpha |x3| per step") {
    const auto spec = catalog_get("relu_net");
    const auto& ch = *spec.chetaev;
    CounterRng rng(6);
    for (int k = 0; k < 100; ++k) {
        const Point x = rng.in_ball({1.0, 1.0, 0.0}, 0.3);
        const Point g = subgradient_select(spec, x, SubgradientSelection::sign());
        const Point y = sub(x, scaled(g, 0.1));
        CHECK(std::abs(ch.C(y) - ch.C(x) - ch.predicted_increment(x, g, 0.1)) <= 1e-14);
    }
}

TEST_CASE("property suites: membership, finite differences, component sums, rpca structure") {
    for (const auto& r : {testing::membership_suite(300), testing::finite_difference_suite(300),
                          testing::component_sum_suite(500), testing::rpca_structure_suite(30)}) {
        INFO(testing::describe(r));
        CHECK(r.pass);
        CHECK(r.checks > 0);
    }
}

TEST_CASE("component regularity is documented for the component-sum entries") {
    CHECK(catalog_get("global_l1").components_regular);
    CHECK(catalog_get("global_pow32").components_regular);
    CHECK_FALSE(catalog_get("relu_net").components_regular);
}
