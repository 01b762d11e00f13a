#include "helpers.hpp"

#include "wtw/ensemble.hpp"
#include "wtw/errors.hpp"
#include "wtw/solver.hpp"
#include "wtw/statmech.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace wtw;

namespace {

std::vector<double> expected_degrees(const std::vector<double>& x) {
    std::vector<double> k(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j)
            if (i != j)
                k[i] += x[i] * x[j] / (1 + x[i] * x[j]);
    return k;
}

std::vector<double> expected_strengths(const std::vector<double>& y) {
    std::vector<double> s(y.size(), 0.0);
    for (std::size_t i = 0; i < y.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j)
            if (i != j)
                s[i] += y[i] * y[j] / (1 - y[i] * y[j]);
    return s;
}

double max_rel(const std::vector<double>& got, const std::vector<double>& want) {
    double r = 0;
    for (std::size_t i = 0; i < got.size(); ++i)
        r = std::max(r, std::abs(got[i] - want[i]) / std::max(want[i], 1.0));
    return r;
}

std::vector<double> vals(const MetricVector& v) { return values_or(v, 0.0); }

} // namespace

TEST_SUITE("solver") {

TEST_CASE("bcm on the 4-cycle") {
    const auto fm = solve_bcm(std::vector<double>{2, 2, 2, 2});
    REQUIRE(fm.converged);
    for (double x : fm.spec.x)
        CHECK(x == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
    const Ensemble e(fm.spec);
    CHECK(std::abs(e.pair(0, 1).p - 2.0 / 3.0) < 1e-10);
    CHECK(fm.max_residual() < 1e-10);
}

TEST_CASE("bcm degenerate and regular inputs") {
    const auto zero = solve_bcm(std::vector<double>{0, 0, 0});
    CHECK(zero.converged);
    CHECK(zero.spec.x == std::vector<double>{0, 0, 0});

    const auto reg = solve_bcm(std::vector<double>(10, 3.0));
    REQUIRE(reg.converged);
    const Ensemble e(reg.spec);
    for (std::size_t j = 1; j < 10; ++j)
        CHECK(e.pair(0, j).p == doctest::Approx(3.0 / 9.0).epsilon(1e-10));

    const auto mixed_zero = solve_bcm(std::vector<double>{0, 1, 2, 1, 2});
    REQUIRE(mixed_zero.converged);
    CHECK(mixed_zero.spec.x[0] == 0.0);
}

TEST_CASE("bcm saturated degree is reported infeasible") {
    const auto fm = solve_bcm(std::vector<double>{3, 1, 1, 1, 0});
    CHECK_FALSE(fm.converged);
    CHECK(fm.status == FitStatus::Infeasible);
    CHECK_FALSE(fm.diagnosis.empty());
    CHECK_THROWS_AS(solve_bcm(std::vector<double>{5, 1, 1}), InputError);
}

TEST_CASE("bcm on random degrees matches an independent constraint evaluation") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto g = testing::random_graph(60, 0.15, 1.0, seed);
        const auto k = vals(degree(g));
        const auto fm = solve_bcm(k);
        REQUIRE(fm.converged);
        CHECK(max_rel(expected_degrees(fm.spec.x), k) < 1e-10);
    }
}

TEST_CASE("wcm examples") {
    const auto a = solve_wcm(std::vector<double>{3, 3, 3, 3});
    REQUIRE(a.converged);
    for (double y : a.spec.y)
        CHECK(y == doctest::Approx(std::sqrt(0.5)).epsilon(1e-10));
    CHECK(std::abs(Ensemble(a.spec).pair(0, 1).ew - 1.0) < 1e-10);

    const auto z = solve_wcm(std::vector<double>{0, 0, 0});
    CHECK(z.converged);
    CHECK(z.spec.y == std::vector<double>{0, 0, 0});

    const auto two = solve_wcm(std::vector<double>{5, 5});
    REQUIRE(two.converged);
    CHECK(two.spec.y[0] * two.spec.y[1] == doctest::Approx(5.0 / 6.0).epsilon(1e-10));
}

TEST_CASE("wcm single active node is infeasible") {
    const auto fm = solve_wcm(std::vector<double>{4, 0, 0});
    CHECK(fm.status == FitStatus::Infeasible);
}

TEST_CASE("wcm on heterogeneous strengths stays in the bosonic domain") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const auto g = testing::random_graph(50, 0.3, 20.0, seed);
        const auto s = vals(strength(g));
        const auto fm = solve_wcm(s);
        REQUIRE(fm.converged);
        for (std::size_t i = 0; i < fm.spec.n; ++i)
            for (std::size_t j = i + 1; j < fm.spec.n; ++j)
                CHECK(fm.spec.y[i] * fm.spec.y[j] < 1.0);
        CHECK(max_rel(expected_strengths(fm.spec.y), s) < 1e-10);
    }
}

TEST_CASE("bounded model matches strengths and reduces to wcm for large w_max") {
    const std::vector<double> s{3, 4, 5, 2, 6};
    const auto fm = solve_bounded(s, 3);
    REQUIRE(fm.converged);
    std::vector<double> got(s.size(), 0.0);
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j)
            if (i != j) {
                double mean = 0;
                for (int w = 0; w <= 3; ++w)
                    mean += w * statmech::bounded_pmf(fm.spec.y[i] * fm.spec.y[j], 3, w);
                got[i] += mean;
            }
    CHECK(max_rel(got, s) < 1e-10);

    const auto big = solve_bounded(s, 1000000);
    const auto wcm = solve_wcm(s);
    REQUIRE(big.converged);
    for (std::size_t i = 0; i < s.size(); ++i)
        CHECK(big.spec.y[i] == doctest::Approx(wcm.spec.y[i]).epsilon(1e-8));

    CHECK(solve_bounded(std::vector<double>{7, 1, 1}, 3).status == FitStatus::Infeasible);
}

TEST_CASE("mixed examples") {
    const auto fm = solve_mixed(std::vector<double>{2, 2, 2, 2}, std::vector<double>{4, 4, 4, 4});
    REQUIRE(fm.converged);
    CHECK(fm.max_residual() < 1e-10);
    const auto st = Ensemble(fm.spec).pair(0, 1);
    CHECK(st.p == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
    CHECK(st.ew == doctest::Approx(4.0 / 3.0).epsilon(1e-10));

    const auto g = testing::random_graph(30, 0.3, 0.0, 5);
    const auto k = vals(degree(g));
    const auto unit = solve_mixed(k, k);
    REQUIRE(unit.converged);
    CHECK(unit.max_residual() < 1e-10);

    CHECK_THROWS_AS(solve_mixed(std::vector<double>{2, 1, 1}, std::vector<double>{1, 1, 1}), InputError);
    CHECK_THROWS_AS(solve_mixed(std::vector<double>{1, 1, 0}, std::vector<double>{1, 1, 2}), InputError);
}

TEST_CASE("mixed matches both constraint sets on a weighted random graph") {
    const auto g = testing::random_graph(60, 0.3, 6.0, 8);
    const auto k = vals(degree(g)), s = vals(strength(g));
    const auto fm = solve_mixed(k, s);
    REQUIRE(fm.converged);
    std::vector<double> ek(k.size(), 0.0), es(k.size(), 0.0);
    for (std::size_t i = 0; i < k.size(); ++i)
        for (std::size_t j = 0; j < k.size(); ++j)
            if (i != j) {
                const double X = fm.spec.x[i] * fm.spec.x[j], Y = fm.spec.y[i] * fm.spec.y[j];
                const double a = X * Y / (1 - Y + X * Y);
                ek[i] += a;
                es[i] += a / (1 - Y);
            }
    CHECK(max_rel(ek, k) < 1e-10);
    CHECK(max_rel(es, s) < 1e-10);
}

TEST_CASE("fitness z fit") {
    const NodeAttributes attrs({1.0, 1.0, 1.0});
    const auto fm = fit_fitness(attrs, FitnessTargets{1.0, 0.0}, false);
    REQUIRE(fm.converged);
    CHECK(fm.spec.z == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(statmech::fitness_probability(fm.spec.z, 1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));

    const auto zero = fit_fitness(attrs, FitnessTargets{0.0, 0.0}, false);
    CHECK(zero.spec.z == 0.0);
    CHECK(fit_fitness(attrs, FitnessTargets{3.0, 0.0}, false).status == FitStatus::Infeasible);
}

TEST_CASE("fitness distance model recovers planted parameters") {
    std::mt19937_64 rng(42);
    std::lognormal_distribution<double> fit_dist(0.0, 1.5);
    std::uniform_real_distribution<double> lat(-60, 60), lon(-180, 180);
    const std::size_t n = 60;
    std::vector<double> f(n);
    std::vector<GeoPoint> pos(n);
    for (std::size_t i = 0; i < n; ++i) {
        f[i] = fit_dist(rng);
        pos[i] = {lat(rng), lon(rng)};
    }
    const NodeAttributes attrs(f, pos);
    const double z_star = 0.3, g_star = 3e-4;
    FitnessTargets t;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = attrs.distance(i, j);
            const double p = statmech::fitness_probability(z_star, f[i], f[j], d, g_star);
            t.links += p;
            t.filling += p * d;
        }
    const auto fm = fit_fitness(attrs, t, true);
    REQUIRE(fm.converged);
    CHECK(std::abs(fm.spec.z - z_star) < 1e-6 * z_star);
    CHECK(std::abs(fm.spec.gamma - g_star) < 1e-6 * g_star);
}

TEST_CASE("constraint residuals") {
    const auto g = testing::cycle4();
    const auto fm = solve_bcm(vals(degree(g)));
    for (double r : constraint_residuals(fm, g))
        CHECK(r < 1e-10);

    const auto h = testing::random_graph(20, 0.3, 1.0, 9);
    auto pert = solve_bcm(vals(degree(h)));
    const auto base = constraint_residuals(pert, h);
    pert.spec.x[3] *= 1.01;
    const auto moved = constraint_residuals(pert, h);
    double other = 0;
    for (std::size_t i = 0; i < moved.size(); ++i)
        if (i != 3)
            other = std::max(other, moved[i]);
    CHECK(moved[3] > base[3]);
    CHECK(moved[3] > other);

    auto iso = solve_bcm(std::vector<double>{0, 1, 1});
    iso.spec.x[0] = 0.5;
    const std::vector<Edge> e{{1, 2, 1}};
    const auto small = WeightedGraph::with_nodes(3, e);
    const auto r = constraint_residuals(iso, small);
    const double k0 = 2 * 0.5 * iso.spec.x[1] / (1 + 0.5 * iso.spec.x[1]);
    CHECK(r[0] == doctest::Approx(k0).epsilon(1e-12));

    CHECK_THROWS_AS(constraint_residuals(fm, testing::triangle()), InputError);
}

TEST_CASE("property: fixed point of the bcm update") {
    const auto g = testing::random_graph(40, 0.2, 1.0, 12);
    const auto k = vals(degree(g));
    const auto fm = solve_bcm(k);
    REQUIRE(fm.converged);
    const auto& x = fm.spec.x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (k[i] == 0)
            continue;
        double denom = 0;
        for (std::size_t j = 0; j < x.size(); ++j)
            if (j != i)
                denom += x[j] / (1 + x[i] * x[j]);
        CHECK(k[i] / denom == doctest::Approx(x[i]).epsilon(1e-9));
    }
}

TEST_CASE("property: equal constraints give equal multipliers and zeros stay exact") {
    const std::vector<double> k{3, 1, 3, 0, 2, 2, 1, 3};
    const auto fm = solve_bcm(k);
    REQUIRE(fm.converged);
    CHECK(fm.spec.x[0] == fm.spec.x[2]);
    CHECK(fm.spec.x[0] == fm.spec.x[7]);
    CHECK(fm.spec.x[4] == fm.spec.x[5]);
    CHECK(fm.spec.x[3] == 0.0);
    const std::vector<double> s{5, 5, 0, 9, 2};
    const auto w = solve_wcm(s);
    REQUIRE(w.converged);
    CHECK(w.spec.y[0] == w.spec.y[1]);
    CHECK(w.spec.y[2] == 0.0);
}

TEST_CASE("property: permutation equivariance") {
    const auto g = testing::random_graph(40, 0.25, 5.0, 21);
    const auto k = vals(degree(g)), s = vals(strength(g));
    std::vector<std::size_t> perm(k.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(5));
    std::vector<double> kp(k.size()), sp(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) {
        kp[i] = k[perm[i]];
        sp[i] = s[perm[i]];
    }
    const auto a = solve_mixed(k, s), b = solve_mixed(kp, sp);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    for (std::size_t i = 0; i < k.size(); ++i) {
        CHECK(b.spec.x[i] == doctest::Approx(a.spec.x[perm[i]]).epsilon(1e-8));
        CHECK(b.spec.y[i] == doctest::Approx(a.spec.y[perm[i]]).epsilon(1e-8));
    }
}

TEST_CASE("property: random restarts reach the same multipliers") {
    const auto g = testing::random_graph(80, 0.2, 4.0, 33);
    const auto k = vals(degree(g)), s = vals(strength(g));
    SolverConfig base;
    base.tolerance = 1e-12;
    const auto ref_b = solve_bcm(k, base), ref_w = solve_wcm(s, base), ref_m = solve_mixed(k, s, base);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SolverConfig cfg = base;
        cfg.initializer = Initializer::Random;
        cfg.seed = seed;
        const auto b = solve_bcm(k, cfg), w = solve_wcm(s, cfg), m = solve_mixed(k, s, cfg);
        REQUIRE(b.converged);
        REQUIRE(w.converged);
        REQUIRE(m.converged);
        for (std::size_t i = 0; i < k.size(); ++i) {
            CHECK(std::abs(b.spec.x[i] - ref_b.spec.x[i]) < 1e-8 * std::max(1.0, ref_b.spec.x[i]));
            CHECK(std::abs(w.spec.y[i] - ref_w.spec.y[i]) < 1e-8);
            CHECK(std::abs(m.spec.x[i] - ref_m.spec.x[i]) < 1e-8 * std::max(1.0, ref_m.spec.x[i]));
            CHECK(std::abs(m.spec.y[i] - ref_m.spec.y[i]) < 1e-8);
        }
    }
}

TEST_CASE("pure fixed-point iteration also converges") {
    SolverConfig cfg;
    cfg.newton = false;
    const auto g = testing::random_graph(30, 0.3, 2.0, 4);
    const auto fm = solve_bcm(vals(degree(g)), cfg);
    CHECK(fm.converged);
    cfg.max_iterations = 3;
    const auto capped = solve_wcm(vals(strength(testing::random_graph(30, 0.3, 30.0, 4))), cfg);
    CHECK_FALSE(capped.converged);
    CHECK(capped.status == FitStatus::NotConverged);
    CHECK(capped.residuals.size() == 30);
}

TEST_CASE("solver config validation") {
    SolverConfig cfg;
    cfg.tolerance = 0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg = {};
    cfg.damping = 1.5;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg = {};
    cfg.max_iterations = 0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
}

TEST_CASE("fit_model dispatches on the family") {
    const auto g = testing::random_graph(20, 0.4, 3.0, 17);
    FitOptions opt;
    opt.family = Family::ErdosRenyi;
    const auto er = fit_model(opt, g, std::nullopt);
    CHECK(er.spec.p == doctest::Approx(density(g)));
    CHECK(er.labels == g.labels());
    opt.family = Family::MixedBoseFermi;
    CHECK(fit_model(opt, g, std::nullopt).converged);
    opt.family = Family::FitnessGDP;
    CHECK_THROWS_AS(fit_model(opt, g, std::nullopt), InputError);
}

} // TEST_SUITE
