#pragma once

#include "wtw/graph.hpp"

#include <cstdint>

/// Closed-form single-pair statistics of the maximum-entropy ensembles.
///
/// Every ensemble factorizes over unordered pairs, so each function here is a
/// pure function of the pair's multipliers (or their product). Functions taking
/// a `*_product` argument expect the already multiplied value x_i x_j or y_i y_j.
namespace wtw::statmech {

struct PairStatistics {
    double p = 0.0;   ///< probability that the pair is linked
    double ew = 0.0;  ///< expected weight
};

/// Second moments of (a, w) for one pair.
struct PairMoments {
    double mean_a = 0.0;
    double mean_w = 0.0;
    double var_a = 0.0;
    double var_w = 0.0;
    double cov_aw = 0.0;
};

// Fermi-Dirac (binary configuration model)

double fd_probability(double x_i, double x_j);
double fd_probability_from_product(double xx);
/// ln q(a) for a in {0, 1}.
double fd_log_pmf(double xx, bool linked);

// Bose-Einstein (weighted configuration model)

/// p = yy, <w> = yy / (1 - yy). Throws DivergenceError when yy >= 1.
PairStatistics be_stats(double y_i, double y_j);
PairStatistics be_stats_from_product(double yy);
/// q(w) = yy^w (1 - yy).
double be_pmf(double yy, Weight w);
double be_log_pmf(double yy, Weight w);
/// Var(w) = yy / (1 - yy)^2.
double be_weight_variance(double yy);

// Bounded statistics, w in [0, w_max]

/// P(w > 0) = y (1 - y^w_max) / (1 - y^(w_max + 1)); w_max / (w_max + 1) at y = 1.
double bounded_nonzero_probability(double y, std::int64_t w_max);
double bounded_pmf(double y, std::int64_t w_max, std::int64_t w);
double bounded_log_pmf(double y, std::int64_t w_max, std::int64_t w);
double bounded_expected_weight(double y, std::int64_t w_max);
double bounded_weight_variance(double y, std::int64_t w_max);
/// Inverse-transform draw from the bounded law given a uniform u in [0, 1).
std::int64_t bounded_draw(double y, std::int64_t w_max, double u);

// Mixed Bose-Fermi statistics (degree and strength constraints)

/// <a> = XY / (1 - Y + XY), <w> = <a> / (1 - Y), with X = x_i x_j, Y = y_i y_j.
PairStatistics mixed_stats(double x_i, double x_j, double y_i, double y_j);
PairStatistics mixed_stats_from_products(double xx, double yy);
double mixed_pmf(double x_i, double x_j, double y_i, double y_j, Weight w);
double mixed_pmf_from_products(double xx, double yy, Weight w);
double mixed_log_pmf(double xx, double yy, Weight w);
PairMoments mixed_moments(double xx, double yy);

// Fitness (GDP) models

enum class DistanceKernel { Identity, Log };

/// f(d): d for Identity, ln d for Log (d > 0 required).
double apply_kernel(DistanceKernel kernel, double d);

double fitness_probability(double z, double f_i, double f_j);
/// p = z f_i f_j e^{-gamma f(d)} / (1 + z f_i f_j e^{-gamma f(d)}).
double fitness_probability(double z, double f_i, double f_j, double d, double gamma,
                           DistanceKernel kernel = DistanceKernel::Identity);

// Erdos-Renyi

/// ln P(A) = L ln p + (n(n-1)/2 - L) ln(1 - p); -infinity when p in {0, 1}
/// contradicts the graph.
double er_log_probability(double p, const WeightedGraph& g);

} // namespace wtw::statmech
