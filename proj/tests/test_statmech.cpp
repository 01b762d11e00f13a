#include "helpers.hpp"

#include "wtw/ensemble.hpp"
#include "wtw/errors.hpp"
#include "wtw/statmech.hpp"

#include <doctest.h>

#include <cmath>

using namespace wtw;
using namespace wtw::statmech;

namespace {

/// Direct finite sums of the unnormalized bounded weights y^w.
struct BoundedSums {
    long double z = 0, m1 = 0, m2 = 0;
    BoundedSums(double y, std::int64_t w_max) {
        long double t = 1;
        for (std::int64_t w = 0; w <= w_max; ++w) {
            z += t;
            m1 += t * w;
            m2 += t * w * w;
            t *= y;
        }
    }
    double p_nonzero() const { return static_cast<double>(1 - 1 / z); }
    double mean() const { return static_cast<double>(m1 / z); }
    double var() const { return static_cast<double>(m2 / z - (m1 / z) * (m1 / z)); }
};

} // namespace

TEST_SUITE("statmech") {

TEST_CASE("fermi-dirac examples") {
    CHECK(fd_probability(1, 1) == 0.5);
    CHECK(fd_probability(0, 7) == 0.0);
    CHECK(fd_probability(2, 3) == doctest::Approx(6.0 / 7.0).epsilon(1e-15));
    CHECK_THROWS_AS(fd_probability(-1, 1), DomainError);
}

TEST_CASE("bose-einstein examples") {
    const auto a = be_stats_from_product(0.5);
    CHECK(a.p == 0.5);
    CHECK(a.ew == 1.0);
    const auto b = be_stats_from_product(0.0);
    CHECK(b.p == 0.0);
    CHECK(b.ew == 0.0);
    CHECK(be_stats_from_product(0.999).ew == doctest::Approx(999.0).epsilon(1e-12));
    CHECK_THROWS_AS(be_stats(1.0, 1.0), DivergenceError);
    CHECK_THROWS_AS(be_stats_from_product(1.5), DivergenceError);
}

TEST_CASE("bounded nonzero probability examples") {
    CHECK(bounded_nonzero_probability(1, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(bounded_nonzero_probability(1, 2) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(bounded_nonzero_probability(1, 3) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(bounded_nonzero_probability(0.5, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(std::abs(bounded_nonzero_probability(0.5, 60) - 0.5) <= 1e-15);
    CHECK_THROWS_AS(bounded_nonzero_probability(-0.1, 3), DomainError);
    CHECK_THROWS_AS(bounded_nonzero_probability(0.5, 0), DomainError);
}

TEST_CASE("bounded pmf examples") {
    for (int w = 0; w <= 3; ++w)
        CHECK(bounded_pmf(1.0, 3, w) == doctest::Approx(0.25).epsilon(1e-15));
    double total = 0;
    for (int w = 0; w <= 5; ++w)
        total += bounded_pmf(0.7, 5, w);
    CHECK(std::abs(total - 1.0) < 1e-12);
    CHECK(bounded_pmf(0.5, 1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK_THROWS_AS(bounded_pmf(0.5, 3, 4), DomainError);
    CHECK_THROWS_AS(bounded_pmf(0.5, 3, -1), DomainError);
}

TEST_CASE("bounded closed forms agree with finite sums, including near y = 1") {
    for (std::int64_t w_max : {1, 2, 3, 10, 100}) {
        for (double y : {0.0, 1e-6, 0.1, 0.5, 0.9, 0.99, 1.0 - 1e-10, 1.0, 1.0 + 1e-10, 1.01, 1.2, 1.5}) {
            const BoundedSums ref(y, w_max);
            CAPTURE(w_max);
            CAPTURE(y);
            CHECK(bounded_nonzero_probability(y, w_max) == doctest::Approx(ref.p_nonzero()).epsilon(1e-12));
            CHECK(std::abs(bounded_expected_weight(y, w_max) - ref.mean()) <= 1e-10 * std::max(1.0, ref.mean()));
            CHECK(std::abs(bounded_weight_variance(y, w_max) - ref.var()) <= 1e-8 * std::max(1.0, ref.var()));
            double total = 0, mean = 0;
            for (std::int64_t w = 0; w <= w_max; ++w) {
                const double q = bounded_pmf(y, w_max, w);
                total += q;
                mean += q * static_cast<double>(w);
                if (q > 1e-300)
                    CHECK(std::log(q) == doctest::Approx(bounded_log_pmf(y, w_max, w)).epsilon(1e-10));
            }
            CHECK(std::abs(total - 1.0) < 1e-12);
            CHECK(std::abs(mean - ref.mean()) <= 1e-10 * std::max(1.0, ref.mean()));
        }
    }
}

TEST_CASE("bounded draw inverts the cumulative distribution") {
    for (double y : {0.3, 1.0, 1.7}) {
        const std::int64_t w_max = 6;
        double cdf = 0;
        for (std::int64_t w = 0; w <= w_max; ++w) {
            const double lo = cdf;
            cdf += bounded_pmf(y, w_max, w);
            const double mid = std::min(0.5 * (lo + cdf), 1.0 - 1e-12);
            CHECK(bounded_draw(y, w_max, mid) == w);
        }
    }
}

TEST_CASE("mixed statistics examples") {
    for (double yy : {0.0, 0.2, 0.5, 0.9}) {
        const auto m = mixed_stats_from_products(1.0, yy);
        const auto b = be_stats_from_product(yy);
        CHECK(m.p == doctest::Approx(b.p).epsilon(1e-15));
        CHECK(m.ew == doctest::Approx(b.ew).epsilon(1e-15));
    }
    const auto z = mixed_stats_from_products(3.0, 0.0);
    CHECK(z.p == 0.0);
    CHECK(z.ew == 0.0);
    const auto m = mixed_stats_from_products(2.0, 0.5);
    CHECK(m.p == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(m.ew == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK_THROWS_AS(mixed_stats(1, 1, 1, 1), DivergenceError);
}

TEST_CASE("mixed pmf examples and series oracle") {
    CHECK(mixed_pmf_from_products(2.0, 0.5, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    double tail = 0;
    for (int w = 1; w < 200; ++w)
        tail += mixed_pmf_from_products(2.0, 0.5, w);
    CHECK(tail == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    for (int w = 0; w < 20; ++w)
        CHECK(mixed_pmf_from_products(1.0, 0.3, w) == doctest::Approx(std::pow(0.3, w) * 0.7).epsilon(1e-14));
    CHECK(mixed_pmf_from_products(5.0, 0.0, 0) == 1.0);
}

TEST_CASE("mixed moments agree with truncated series") {
    for (double xx : {0.1, 1.0, 7.0})
        for (double yy : {0.05, 0.5, 0.95}) {
            long double a = 0, w1 = 0, w2 = 0;
            for (int w = 1; w < 4000; ++w) {
                const long double q = mixed_pmf_from_products(xx, yy, w);
                a += q;
                w1 += q * w;
                w2 += q * w * w;
            }
            const auto mm = mixed_moments(xx, yy);
            CHECK(mm.mean_a == doctest::Approx(static_cast<double>(a)).epsilon(1e-12));
            CHECK(mm.mean_w == doctest::Approx(static_cast<double>(w1)).epsilon(1e-10));
            CHECK(mm.var_w == doctest::Approx(static_cast<double>(w2 - w1 * w1)).epsilon(1e-9));
            CHECK(mm.cov_aw == doctest::Approx(static_cast<double>(w1 - a * w1)).epsilon(1e-10));
        }
}

TEST_CASE("bose-einstein expected weight and variance match series") {
    for (double yy : {0.01, 0.3, 0.8, 0.99}) {
        long double t = 0, w1 = 0, w2 = 0;
        for (int w = 0; w < 20000; ++w) {
            const long double q = be_pmf(yy, w);
            t += q;
            w1 += q * w;
            w2 += q * w * w;
        }
        CHECK(static_cast<double>(t) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(be_stats_from_product(yy).ew == doctest::Approx(static_cast<double>(w1)).epsilon(1e-10));
        CHECK(be_weight_variance(yy) == doctest::Approx(static_cast<double>(w2 - w1 * w1)).epsilon(1e-8));
    }
}

TEST_CASE("fitness probability examples") {
    CHECK(fitness_probability(1, 1, 1) == 0.5);
    for (double d : {0.0, 1.0, 123.0})
        CHECK(fitness_probability(2.0, 3.0, 4.0, d, 0.0) == fitness_probability(2.0, 3.0, 4.0));
    const double v = 3.0 * std::exp(-1.0);
    CHECK(fitness_probability(0.5, 2, 3, 10, 0.1) == doctest::Approx(v / (1 + v)).epsilon(1e-15));
    CHECK(fitness_probability(0.5, 2, 3, 10, 0.1) == doctest::Approx(0.5246331).epsilon(1e-6));
    CHECK(fitness_probability(1.0, 2.0, 3.0, 10.0, 0.5, DistanceKernel::Log) ==
          doctest::Approx(6.0 / std::sqrt(10.0) / (1 + 6.0 / std::sqrt(10.0))).epsilon(1e-15));
    CHECK_THROWS_AS(fitness_probability(1, 0, 1), DomainError);
    CHECK_THROWS_AS(fitness_probability(-1, 1, 1), DomainError);
}

TEST_CASE("erdos-renyi log probability") {
    CHECK(er_log_probability(0.5, testing::triangle()) == doctest::Approx(std::log(1.0 / 8.0)).epsilon(1e-15));
    CHECK(er_log_probability(0.5, WeightedGraph::with_nodes(3)) == doctest::Approx(std::log(1.0 / 8.0)));
    CHECK(er_log_probability(1.0, testing::triangle()) == 0.0);
    CHECK(er_log_probability(1.0 - 1e-12, testing::triangle()) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(std::isinf(er_log_probability(1.0, testing::path3())));
}

TEST_CASE("log likelihood examples") {
    const auto tri = testing::triangle();
    const auto bcm = ModelSpec::binary_cm({1, 1, 1});
    CHECK(log_likelihood(bcm, tri).value == doctest::Approx(std::log(1.0 / 8.0)));

    const double y = std::sqrt(0.5);
    const std::vector<Edge> e{{0, 1, 1}};
    const auto single = WeightedGraph::with_nodes(2, e);
    CHECK(log_likelihood(ModelSpec::weighted_cm({y, y}), single).value == doctest::Approx(std::log(0.25)));

    const auto g = testing::random_graph(12, 0.4, 2.0, 3);
    std::vector<double> ys(12);
    for (std::size_t i = 0; i < ys.size(); ++i)
        ys[i] = 0.2 + 0.05 * static_cast<double>(i);
    const auto wcm = log_likelihood(ModelSpec::weighted_cm(ys), g);
    const auto mixed = log_likelihood(ModelSpec::mixed(std::vector<double>(12, 1.0), ys), g);
    CHECK(mixed.value == doctest::Approx(wcm.value).epsilon(1e-13));

    const auto zero = ModelSpec::binary_cm({0, 1, 1});
    const auto ll = log_likelihood(zero, tri);
    CHECK_FALSE(ll.finite());
    CHECK(ll.impossible_pair == std::make_pair(std::size_t{0}, std::size_t{1}));
}

TEST_CASE("model spec validation") {
    CHECK_THROWS_AS(ModelSpec::erdos_renyi(3, 1.5).validate(), DomainError);
    CHECK_THROWS_AS(ModelSpec::binary_cm({-1.0, 1.0}).validate(), DomainError);
    CHECK_THROWS_AS(ModelSpec::weighted_cm({1.0, 1.0}).validate(), DivergenceError);
    CHECK_NOTHROW(ModelSpec::bounded_cm({1.0, 1.0}, 3).validate());
    CHECK_THROWS_AS(ModelSpec::mixed({1.0, 1.0}, {1.0, 1.0}).validate(), DomainError);
    CHECK_THROWS_AS(ModelSpec::fitness(3, -1.0).validate(), DomainError);
    CHECK_THROWS_AS(Ensemble(ModelSpec::fitness(3, 1.0)), InputError);
}

TEST_CASE("property: monotonicity and fermi bound") {
    double prev = -1;
    for (double x = 0; x < 50; x += 0.37) {
        const double p = fd_probability(x, 1.3);
        CHECK(p > prev);
        CHECK(p < 1.0);
        prev = p;
    }
    prev = -1;
    for (double yy = 0; yy < 0.999; yy += 0.01) {
        const double ew = be_stats_from_product(yy).ew;
        CHECK(ew > prev);
        prev = ew;
    }
    prev = -1;
    for (double f = 0.1; f < 20; f += 0.3) {
        const double p = fitness_probability(0.2, f, 2.0, 3.0, 0.4);
        CHECK(p > prev);
        prev = p;
    }
    for (std::int64_t w_max = 1; w_max < 200; w_max *= 2)
        CHECK(bounded_nonzero_probability(0.8, w_max) < bounded_nonzero_probability(0.8, w_max * 2) + 1e-16);
}

} // TEST_SUITE
