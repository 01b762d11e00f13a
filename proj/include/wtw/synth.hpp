#pragma once

#include "wtw/graph.hpp"
#include "wtw/statmech.hpp"

#include <cstdint>
#include <optional>

namespace wtw {

/// Generator for trade-like networks.
///
/// Fitness is log-spaced on [fitness_min, fitness_max]. Pair (i, j) is linked with
/// the fitness probability z f_i f_j e^{-gamma f(d_ij)} / (1 + ...). A linked pair
/// carries w = 1 + G with G geometric, P(G = g) = Y^g (1 - Y), where
/// Y = min(mu / (1 + mu), weight_cap) and mu = weight_scale (f_i f_j / fitness_max^2)^weight_exponent.
struct SynthConfig {
    std::size_t n = 162;
    double fitness_min = 1.0;
    double fitness_max = 10000.0;
    /// Fixed z; when absent z is tuned so that the expected density equals target_density.
    std::optional<double> z;
    double target_density = 0.55;
    double weight_scale = 10000.0;
    double weight_exponent = 0.5;
    double weight_cap = 0.99999;
    /// Node positions uniform on the sphere; needed for gamma != 0.
    bool positions = false;
    double gamma = 0.0;
    statmech::DistanceKernel kernel = statmech::DistanceKernel::Identity;
    std::uint64_t seed = 1;

    /// Throws InputError on out-of-range settings.
    void validate() const;
};

struct SynthNetwork {
    WeightedGraph graph;
    AttributeTable attributes;
    double z = 0.0;
};

SynthNetwork synthesize(const SynthConfig& cfg);

} // namespace wtw
