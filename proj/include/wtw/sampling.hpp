#pragma once

#include "wtw/ensemble.hpp"
#include "wtw/metrics.hpp"
#include "wtw/solver.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wtw {

struct SampleOptions {
    /// k^nn, c (and s^nn for weighted models).
    bool ratio_metrics = true;
    /// c^w on each sample, rescaled by the sample's own total weight. O(sum k_i^2) per graph.
    bool weighted_clustering = false;
    /// Worker threads; results do not depend on this value.
    std::size_t threads = 1;
};

/// Per-node Monte Carlo mean and standard error of one metric. Ratio metrics are
/// averaged over the samples where they are defined (`defined` counts them).
struct MonteCarloMetric {
    std::string metric;
    MetricVector mean;
    MetricVector se;
    std::vector<std::size_t> defined;
};

struct ScalarEstimate {
    double mean = 0.0;
    double se = 0.0;
};

struct SampleSet {
    std::string model;
    std::uint64_t seed = 0;
    std::size_t m = 0;
    std::vector<MonteCarloMetric> metrics;
    ScalarEstimate links;
    ScalarEstimate total_weight;

    const MonteCarloMetric& at(const std::string& metric) const;
};

/// Draws m graphs pair by pair from the exact per-pair law. Pair (i, j) of sample
/// t uses the SplitMix64 stream stream_key(seed, t, i, j).
SampleSet sample(const Ensemble& ensemble, std::size_t m, std::uint64_t seed, const SampleOptions& options = {});

/// Throws InfeasibleError for an infeasible fit.
SampleSet sample(const FittedModel& fm, std::size_t m, std::uint64_t seed,
                 const std::optional<NodeAttributes>& attrs = std::nullopt, const SampleOptions& options = {});

/// One graph from the ensemble (sample index `index` of the stream family `seed`).
WeightedGraph draw_graph(const Ensemble& ensemble, std::uint64_t seed, std::uint64_t index = 0);

} // namespace wtw
