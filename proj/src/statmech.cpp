#include "wtw/statmech.hpp"

#include "wtw/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace wtw::statmech {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Relative window around y = 1 where the bounded law is evaluated by series.
constexpr double kUnitWindow = 1e-9;

void require_nonneg(double v, const char* what) {
    if (!(v >= 0.0) || !std::isfinite(v))
        throw DomainError(std::string(what) + " must be a finite non-negative number");
}

void require_wmax(std::int64_t w_max) {
    if (w_max < 1)
        throw DomainError("w_max must be at least 1");
}

void require_subcritical(double yy) {
    if (yy >= 1.0)
        throw DivergenceError("bosonic condensation: expected weight infinite (y_i y_j >= 1)");
}

// m(a) = 1/(1 - e^-a) - 1/a - 1/2, odd and analytic at 0. Series valid for |a| < 0.25.
double m_series(double a) {
    const double a2 = a * a;
    return a * (1.0 / 12.0 + a2 * (-1.0 / 720.0 + a2 * (1.0 / 30240.0 + a2 * (-1.0 / 1209600.0 + a2 / 47900160.0))));
}

// m'(a), even.
double dm_series(double a) {
    const double a2 = a * a;
    return 1.0 / 12.0 + a2 * (-1.0 / 240.0 + a2 * (1.0 / 6048.0 + a2 * (-1.0 / 172800.0 + a2 / 5322240.0)));
}

// e^-|a| / (1 - e^-|a|)^2 = 1 / (4 sinh^2(a/2)).
double inv_sinh2(double a) {
    const double b = std::abs(a);
    const double em1 = std::expm1(-b);
    return std::exp(-b) / (em1 * em1);
}

/// ln sum_{w=0}^{w_max} e^{w t}.
double bounded_log_partition(double t, std::int64_t w_max) {
    const double A = static_cast<double>(w_max) + 1.0;
    const double M = static_cast<double>(w_max);
    if (t == 0.0)
        return std::log(A);
    if (t > 0.0)
        return M * t + bounded_log_partition(-t, w_max);
    if (std::abs(std::expm1(t)) < kUnitWindow)
        return std::log(A) + std::log1p(t * M / 2.0 + t * t * M * (2.0 * M + 1.0) / 12.0);
    return std::log(-std::expm1(A * t)) - std::log(-std::expm1(t));
}

} // namespace

double fd_probability_from_product(double xx) {
    require_nonneg(xx, "x_i x_j");
    return xx / (1.0 + xx);
}

double fd_probability(double x_i, double x_j) {
    require_nonneg(x_i, "x_i");
    require_nonneg(x_j, "x_j");
    return fd_probability_from_product(x_i * x_j);
}

double fd_log_pmf(double xx, bool linked) {
    require_nonneg(xx, "x_i x_j");
    if (linked)
        return xx == 0.0 ? -kInf : -std::log1p(1.0 / xx);
    return -std::log1p(xx);
}

PairStatistics be_stats_from_product(double yy) {
    require_nonneg(yy, "y_i y_j");
    require_subcritical(yy);
    return {yy, yy / (1.0 - yy)};
}

PairStatistics be_stats(double y_i, double y_j) {
    require_nonneg(y_i, "y_i");
    require_nonneg(y_j, "y_j");
    return be_stats_from_product(y_i * y_j);
}

double be_pmf(double yy, Weight w) {
    if (w < 0)
        throw DomainError("weight must be non-negative");
    return std::exp(be_log_pmf(yy, w));
}

double be_log_pmf(double yy, Weight w) {
    require_nonneg(yy, "y_i y_j");
    require_subcritical(yy);
    if (w < 0)
        throw DomainError("weight must be non-negative");
    if (w == 0)
        return std::log1p(-yy);
    if (yy == 0.0)
        return -kInf;
    return static_cast<double>(w) * std::log(yy) + std::log1p(-yy);
}

double be_weight_variance(double yy) {
    require_nonneg(yy, "y_i y_j");
    require_subcritical(yy);
    const double d = 1.0 - yy;
    return yy / (d * d);
}

double bounded_nonzero_probability(double y, std::int64_t w_max) {
    require_nonneg(y, "y_ij");
    require_wmax(w_max);
    if (y == 0.0)
        return 0.0;
    const double M = static_cast<double>(w_max);
    if (w_max == 1)
        return y / (1.0 + y);
    if (y == 1.0)
        return M / (M + 1.0);
    if (std::abs(y - 1.0) < kUnitWindow)
        return -std::expm1(-bounded_log_partition(std::log1p(y - 1.0), w_max));
    const double A = M + 1.0;
    if (y < 1.0) {
        const double t = std::log(y);
        return y * (std::expm1(M * t) / std::expm1(A * t));
    }
    const double s = -std::log(y);
    return std::expm1(M * s) / std::expm1(A * s);
}

double bounded_log_pmf(double y, std::int64_t w_max, std::int64_t w) {
    require_nonneg(y, "y_ij");
    require_wmax(w_max);
    if (w < 0 || w > w_max)
        throw DomainError("weight outside [0, w_max]");
    if (y == 0.0)
        return w == 0 ? 0.0 : -kInf;
    const double t = std::log(y);
    return static_cast<double>(w) * t - bounded_log_partition(t, w_max);
}

double bounded_pmf(double y, std::int64_t w_max, std::int64_t w) {
    require_nonneg(y, "y_ij");
    require_wmax(w_max);
    if (w < 0 || w > w_max)
        throw DomainError("weight outside [0, w_max]");
    if (y == 1.0)
        return 1.0 / (static_cast<double>(w_max) + 1.0);
    if (y == 0.0)
        return w == 0 ? 1.0 : 0.0;
    const double M = static_cast<double>(w_max);
    const double A = M + 1.0;
    const double W = static_cast<double>(w);
    if (std::abs(y - 1.0) < kUnitWindow)
        return std::exp(bounded_log_pmf(y, w_max, w));
    if (y < 1.0) {
        const double t = std::log(y);
        return std::exp(W * t) * (std::expm1(t) / std::expm1(A * t));
    }
    const double s = -std::log(y);
    return std::exp((M - W) * s) * (std::expm1(s) / std::expm1(A * s));
}

double bounded_expected_weight(double y, std::int64_t w_max) {
    require_nonneg(y, "y_ij");
    require_wmax(w_max);
    if (y == 0.0)
        return 0.0;
    const double M = static_cast<double>(w_max);
    const double A = M + 1.0;
    const double t = std::log(y);
    if (std::abs(A * t) < 0.25)
        return M / 2.0 + A * m_series(A * t) - m_series(t);
    if (t > 0.0)
        return M - bounded_expected_weight(1.0 / y, w_max);
    return 1.0 / std::expm1(-t) - A / std::expm1(-A * t);
}

double bounded_weight_variance(double y, std::int64_t w_max) {
    require_nonneg(y, "y_ij");
    require_wmax(w_max);
    if (y == 0.0)
        return 0.0;
    const double A = static_cast<double>(w_max) + 1.0;
    const double t = std::log(y);
    if (std::abs(A * t) < 0.25)
        return A * A * dm_series(A * t) - dm_series(t);
    return inv_sinh2(t) - A * A * inv_sinh2(A * t);
}

std::int64_t bounded_draw(double y, std::int64_t w_max, double u) {
    require_nonneg(y, "y_ij");
    require_wmax(w_max);
    if (y == 0.0)
        return 0;
    const double M = static_cast<double>(w_max);
    const double A = M + 1.0;
    double w = 0.0;
    if (y == 1.0) {
        w = std::floor(u * A);
    } else if (y < 1.0) {
        const double t = std::log(y);
        w = std::floor(std::log1p(u * std::expm1(A * t)) / t);
    } else {
        // mirror image of the y < 1 case; 1 - u keeps the draw monotone in u
        const double s = -std::log(y);
        w = M - std::floor(std::log1p((1.0 - u) * std::expm1(A * s)) / s);
    }
    if (!(w >= 0.0))
        return 0;
    if (w > M)
        return w_max;
    return static_cast<std::int64_t>(w);
}

PairStatistics mixed_stats_from_products(double xx, double yy) {
    require_nonneg(xx, "x_i x_j");
    require_nonneg(yy, "y_i y_j");
    require_subcritical(yy);
    const double xy = xx * yy;
    if (xy == 0.0)
        return {0.0, 0.0};
    const double a = xy / ((1.0 - yy) + xy);
    return {a, a / (1.0 - yy)};
}

PairStatistics mixed_stats(double x_i, double x_j, double y_i, double y_j) {
    require_nonneg(x_i, "x_i");
    require_nonneg(x_j, "x_j");
    require_nonneg(y_i, "y_i");
    require_nonneg(y_j, "y_j");
    return mixed_stats_from_products(x_i * x_j, y_i * y_j);
}

double mixed_log_pmf(double xx, double yy, Weight w) {
    require_nonneg(xx, "x_i x_j");
    require_nonneg(yy, "y_i y_j");
    require_subcritical(yy);
    if (w < 0)
        throw DomainError("weight must be non-negative");
    const double log_norm = std::log1p(-yy) - std::log((1.0 - yy) + xx * yy);
    if (w == 0)
        return log_norm;
    if (xx == 0.0 || yy == 0.0)
        return -kInf;
    return std::log(xx) + static_cast<double>(w) * std::log(yy) + log_norm;
}

double mixed_pmf_from_products(double xx, double yy, Weight w) {
    return std::exp(mixed_log_pmf(xx, yy, w));
}

double mixed_pmf(double x_i, double x_j, double y_i, double y_j, Weight w) {
    require_nonneg(x_i, "x_i");
    require_nonneg(x_j, "x_j");
    require_nonneg(y_i, "y_i");
    require_nonneg(y_j, "y_j");
    return mixed_pmf_from_products(x_i * x_j, y_i * y_j, w);
}

PairMoments mixed_moments(double xx, double yy) {
    const auto st = mixed_stats_from_products(xx, yy);
    const double one_minus = 1.0 - yy;
    PairMoments m;
    m.mean_a = st.p;
    m.mean_w = st.ew;
    m.var_a = st.p * (1.0 - st.p);
    m.var_w = st.p * (1.0 + yy - st.p) / (one_minus * one_minus);
    m.cov_aw = st.ew * (1.0 - st.p);
    return m;
}

double apply_kernel(DistanceKernel kernel, double d) {
    if (!(d >= 0.0))
        throw DomainError("distance must be non-negative");
    switch (kernel) {
    case DistanceKernel::Identity:
        return d;
    case DistanceKernel::Log:
        if (d == 0.0)
            throw DomainError("log distance kernel needs d > 0");
        return std::log(d);
    }
    return d;
}

double fitness_probability(double z, double f_i, double f_j) {
    require_nonneg(z, "z");
    if (!(f_i > 0.0) || !(f_j > 0.0))
        throw DomainError("fitness must be positive");
    const double v = z * f_i * f_j;
    if (std::isinf(v))
        return 1.0;
    return v / (1.0 + v);
}

double fitness_probability(double z, double f_i, double f_j, double d, double gamma, DistanceKernel kernel) {
    require_nonneg(z, "z");
    if (!(f_i > 0.0) || !(f_j > 0.0))
        throw DomainError("fitness must be positive");
    if (!std::isfinite(gamma))
        throw DomainError("gamma must be finite");
    const double decay = gamma == 0.0 ? 1.0 : std::exp(-gamma * apply_kernel(kernel, d));
    const double v = z * f_i * f_j * decay;
    if (std::isinf(v))
        return 1.0;
    return v / (1.0 + v);
}

double er_log_probability(double p, const WeightedGraph& g) {
    if (!(p >= 0.0 && p <= 1.0))
        throw DomainError("p must lie in [0, 1]");
    const double n = static_cast<double>(g.size());
    const double pairs = n * (n - 1.0) / 2.0;
    const double links = static_cast<double>(g.num_links());
    const double absent = pairs - links;
    double lp = 0.0;
    if (links > 0.0)
        lp += p == 0.0 ? -kInf : links * std::log(p);
    if (absent > 0.0)
        lp += p == 1.0 ? -kInf : absent * std::log1p(-p);
    return lp;
}

} // namespace wtw::statmech
