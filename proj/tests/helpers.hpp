#pragma once

#include "wtw/graph.hpp"
#include "wtw/metrics.hpp"

#include <cmath>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace testing {

inline wtw::WeightedGraph triangle(wtw::Weight w = 1) {
    const std::vector<wtw::Edge> e{{0, 1, w}, {0, 2, w}, {1, 2, w}};
    return wtw::WeightedGraph({"A", "B", "C"}, e);
}

inline wtw::WeightedGraph path3(wtw::Weight ab = 3, wtw::Weight bc = 2) {
    const std::vector<wtw::Edge> e{{0, 1, ab}, {1, 2, bc}};
    return wtw::WeightedGraph({"A", "B", "C"}, e);
}

inline wtw::WeightedGraph cycle4() {
    const std::vector<wtw::Edge> e{{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {0, 3, 1}};
    return wtw::WeightedGraph::with_nodes(4, e);
}

/// Erdos-Renyi graph with geometric weights from std::mt19937_64.
inline wtw::WeightedGraph random_graph(std::size_t n, double p, double mean_extra, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::geometric_distribution<int> geo(1.0 / (1.0 + mean_extra));
    std::vector<wtw::Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (u(rng) < p)
                edges.push_back({i, j, 1 + geo(rng)});
    return wtw::WeightedGraph::with_nodes(n, edges);
}

inline std::vector<double> plain(const wtw::MetricVector& v) { return wtw::values_or(v, std::nan("")); }

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("wtw_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace testing
