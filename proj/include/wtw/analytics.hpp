#pragma once

#include "wtw/ensemble.hpp"
#include "wtw/gravity.hpp"
#include "wtw/metrics.hpp"
#include "wtw/solver.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wtw {

/// Plug-in expectations: every metric evaluated with a_ij -> p_ij and w_ij -> <w_ij>.
/// Clustering denominators use k_i (k_i - 1) = sum_{j != l} a_ij a_il, i.e.
/// sum_{j != l} p_ij p_il; undefined when <k_i> <= 1.
struct ExpectedMetrics {
    MetricVector k;
    MetricVector s;
    MetricVector knn;
    /// Unnormalized sum_j p_ij <s_j> / <k_i>.
    MetricVector snn;
    MetricVector c;
    /// sum_{j,k} p_ij p_jk p_ki (v_ij v_jk v_ki)^(1/3) / sum_{j != k} p_ij p_ik with
    /// v_ij = <w_ij> / (p_ij W), W the expected total weight.
    MetricVector cw;
    double links = 0.0;
    double total_weight = 0.0;
    double density = 0.0;
};

/// `weighted` enables s, s^nn and c^w (otherwise left empty).
ExpectedMetrics expected_metrics(const PairMatrix& pm, bool weighted = true);
ExpectedMetrics expected_metrics(const FittedModel& fm, const std::optional<NodeAttributes>& attrs = std::nullopt);

/// Pearson correlation over entries defined in both vectors; nullopt with fewer
/// than two such entries or zero variance.
std::optional<double> pearson(const MetricVector& a, const MetricVector& b);

/// Coefficient of variation (population std / mean) over defined entries.
std::optional<double> coefficient_of_variation(const MetricVector& v);

struct MetricComparison {
    std::string metric;
    MetricVector observed;
    MetricVector expected;
    /// Gravity reference values when a gravity fit was supplied.
    std::optional<MetricVector> gravity;

    friend bool operator==(const MetricComparison&, const MetricComparison&) = default;
};

struct GravityReference {
    GravityFit fit;
    double expected_density = 1.0;
    bool complete_topology = true;
    std::string diagnosis;

    friend bool operator==(const GravityReference&, const GravityReference&) = default;
};

struct ComparisonReport {
    std::string model;
    std::string estimator = "plug-in";
    std::vector<std::string> nodes;
    std::vector<MetricComparison> metrics;
    std::map<std::string, std::optional<double>> correlations;
    double observed_density = 0.0;
    double expected_density = 0.0;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> m;
    std::optional<GravityReference> gravity;

    const MetricComparison& at(const std::string& metric) const;
    friend bool operator==(const ComparisonReport&, const ComparisonReport&) = default;
};

/// Metric names reported for a model: knn, c and, for weighted models, snn, cw
/// (rescaled by their own total weight) plus snn_obsnorm, cw_obsnorm (rescaled
/// by the observed total weight).
std::vector<std::string> report_metrics(bool weighted);

/// Observed-versus-expected table for an arbitrary expected pair matrix.
ComparisonReport compare(const WeightedGraph& g, const PairMatrix& expected, const std::string& model, bool weighted,
                         const std::optional<GravityFit>& gravity = std::nullopt,
                         const std::optional<NodeAttributes>& attrs = std::nullopt);

/// Throws InputError on a model/graph size mismatch.
ComparisonReport compare(const WeightedGraph& g, const FittedModel& fm,
                         const std::optional<NodeAttributes>& attrs = std::nullopt,
                         const std::optional<GravityFit>& gravity = std::nullopt);

} // namespace wtw
