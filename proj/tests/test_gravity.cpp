#include "helpers.hpp"

#include "wtw/errors.hpp"
#include "wtw/gravity.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace wtw;

namespace {

struct Planted {
    WeightedGraph graph;
    NodeAttributes attrs;
};

/// w_ij = K f_i f_j / d_ij^gamma on every pair, quantized with `unit`.
Planted planted(std::size_t n, double lnK, double a, double gamma, double unit, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> lf(0.0, 3.0), lat(-60, 60), lon(-180, 180);
    std::vector<double> f(n);
    std::vector<GeoPoint> pos(n);
    for (std::size_t i = 0; i < n; ++i) {
        f[i] = std::pow(10.0, lf(rng));
        pos[i] = {lat(rng), lon(rng)};
    }
    NodeAttributes attrs(f, pos);
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double flow = std::exp(lnK) * std::pow(f[i] * f[j], a) / std::pow(attrs.distance(i, j), gamma);
            edges.push_back({i, j, static_cast<Weight>(std::floor(flow / unit + 0.5))});
        }
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i)
        labels.push_back("n" + std::to_string(i));
    return {WeightedGraph(labels, edges, unit), attrs};
}

} // namespace

TEST_SUITE("gravity") {

TEST_CASE("rounded planted flows recover the exponents approximately") {
    const auto p = planted(40, std::log(1e7), 1.0, 1.0, 1.0, 1);
    const auto fit = fit_gravity(p.graph, p.attrs);
    CHECK(fit.alpha == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(fit.beta == fit.alpha);
    CHECK(fit.gamma == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(fit.lnK == doctest::Approx(std::log(1e7)).epsilon(1e-3));
}

TEST_CASE("finely quantized planted flows recover the coefficients tightly") {
    const auto p = planted(30, 0.7, 0.9, 1.3, 1e-14, 2);
    const auto fit = fit_gravity(p.graph, p.attrs);
    CHECK(std::abs(fit.lnK - 0.7) < 1e-7);
    CHECK(std::abs(fit.alpha - 0.9) < 1e-8);
    CHECK(std::abs(fit.gamma - 1.3) < 1e-8);
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.n_obs == 30 * 29 / 2);
    CHECK(fit.n_excluded == 0);
}

TEST_CASE("canonical mode fixes the exponents") {
    const auto p = planted(20, 2.0, 1.0, 1.0, 1e-6, 3);
    const auto fit = fit_gravity(p.graph, p.attrs, GravityMode::Canonical);
    CHECK(fit.alpha == 1.0);
    CHECK(fit.beta == 1.0);
    CHECK(fit.gamma == 1.0);
    CHECK(fit.lnK == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(gravity_mode_name(fit.mode) == "canonical");
}

TEST_CASE("prediction is complete, positive and symmetric") {
    const auto p = planted(15, 1.0, 1.0, 1.0, 1e-3, 4);
    const auto fit = fit_gravity(p.graph, p.attrs);
    const auto pm = predict_gravity(fit, p.attrs, p.graph.unit());
    for (std::size_t i = 0; i < pm.n; ++i)
        for (std::size_t j = 0; j < pm.n; ++j) {
            if (i == j)
                continue;
            CHECK(pm.p_at(i, j) == 1.0);
            CHECK(pm.ew_at(i, j) > 0.0);
            CHECK(pm.ew_at(i, j) == pm.ew_at(j, i));
        }
    CHECK(gravity_flow(fit, 1e-300, 1.0, 10.0) < 1e-250);
}

TEST_CASE("property: predicted flows invariant under fitness rescaling") {
    auto p = planted(25, 0.5, 1.1, 0.8, 1e-8, 5);
    const auto fit = fit_gravity(p.graph, p.attrs);
    const auto scaled = p.attrs.scaled_fitness(37.0);
    const auto fit2 = fit_gravity(p.graph, scaled);
    const auto a = predict_gravity(fit, p.attrs), b = predict_gravity(fit2, scaled);
    for (std::size_t i = 0; i < a.ew.size(); ++i)
        CHECK(b.ew[i] == doctest::Approx(a.ew[i]).epsilon(1e-9));
    CHECK(fit2.lnK != doctest::Approx(fit.lnK));
}

TEST_CASE("zero flows are excluded and counted") {
    auto p = planted(12, 3.0, 1.0, 1.0, 1e-6, 6);
    std::vector<Edge> kept;
    for (const auto& e : p.graph.edges())
        if ((e.i + e.j) % 3 != 0)
            kept.push_back(e);
    const WeightedGraph g(p.graph.labels(), kept, p.graph.unit());
    const auto fit = fit_gravity(g, p.attrs);
    CHECK(fit.n_obs == kept.size());
    CHECK(fit.n_excluded == 66 - kept.size());
    CHECK(fit.alpha == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("errors") {
    const std::vector<Edge> three{{0, 1, 1}, {1, 2, 2}, {2, 3, 3}};
    const auto g = WeightedGraph::with_nodes(4, three);
    const NodeAttributes attrs({1, 2, 3, 4}, std::nullopt,
                               std::vector<double>{0, 1, 2, 3, 1, 0, 4, 5, 2, 4, 0, 6, 3, 5, 6, 0});
    CHECK_THROWS_AS(fit_gravity(g, attrs), InputError);

    const std::vector<Edge> four{{0, 1, 1}, {1, 2, 2}, {2, 3, 3}, {0, 3, 4}};
    const auto g4 = WeightedGraph::with_nodes(4, four);
    const NodeAttributes zero_d({1, 2, 3, 4}, std::nullopt,
                                std::vector<double>{0, 0, 2, 3, 0, 0, 4, 5, 2, 4, 0, 6, 3, 5, 6, 0});
    CHECK_THROWS_AS(fit_gravity(g4, zero_d), InputError);

    // equal fitness: the mass regressor is constant
    const NodeAttributes flat({2, 2, 2, 2}, std::nullopt,
                              std::vector<double>{0, 1, 2, 3, 1, 0, 4, 5, 2, 4, 0, 6, 3, 5, 6, 0});
    CHECK_THROWS_AS(fit_gravity(g4, flat), InputError);
}

} // TEST_SUITE
