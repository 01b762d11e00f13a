#pragma once

#include "wtw/graph.hpp"

#include <optional>
#include <vector>

namespace wtw {

/// One value per node; std::nullopt marks an undefined entry (e.g. k_i <= 1 for clustering).
using MetricVector = std::vector<std::optional<double>>;

MetricVector degree(const WeightedGraph& g);
MetricVector strength(const WeightedGraph& g);

/// k^nn_i = sum_j a_ij k_j / k_i; undefined when k_i = 0.
MetricVector avg_nn_degree(const WeightedGraph& g);
/// s^nn_i = sum_j a_ij s_j / k_i; undefined when k_i = 0.
MetricVector avg_nn_strength(const WeightedGraph& g);

/// Local link density among the partners of i; undefined when k_i <= 1.
MetricVector clustering(const WeightedGraph& g);

/// c^w_i = sum_{j != k} (w_ij w_jk w_ki)^(1/3) / (W k_i (k_i - 1)) with W the total
/// weight, i.e. the geometric-mean triple form on weights rescaled by W.
/// Throws InputError when the graph has no weight.
MetricVector weighted_clustering(const WeightedGraph& g);

/// L / (n (n - 1) / 2). Throws InputError when n < 2.
double density(const WeightedGraph& g);

/// Plain values with undefined entries replaced by `fill`.
std::vector<double> values_or(const MetricVector& v, double fill);

} // namespace wtw
