#pragma once

#include "wtw/graph.hpp"
#include "wtw/statmech.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wtw {

enum class Family {
    ErdosRenyi,
    BinaryCM,
    WeightedCM,
    BoundedCM,
    MixedBoseFermi,
    FitnessGDP,
    FitnessGDPDistance,
};

/// Short CLI/JSON name: er, bcm, wcm, bounded, mixed, fitness, fitness-dist.
std::string_view family_name(Family f);
std::optional<Family> parse_family(std::string_view name);

/// True for families whose links carry integer weights > 1.
bool is_weighted(Family f);

/// A model family together with its parameters.
///
/// Only the fields relevant to `family` are meaningful:
///   ErdosRenyi: p          BinaryCM: x          WeightedCM: y
///   BoundedCM: y, w_max    MixedBoseFermi: x, y
///   FitnessGDP: z          FitnessGDPDistance: z, gamma, kernel
struct ModelSpec {
    Family family = Family::ErdosRenyi;
    std::size_t n = 0;
    double p = 0.0;
    std::vector<double> x;
    std::vector<double> y;
    std::int64_t w_max = 1;
    double z = 0.0;
    double gamma = 0.0;
    statmech::DistanceKernel kernel = statmech::DistanceKernel::Identity;

    static ModelSpec erdos_renyi(std::size_t n, double p);
    static ModelSpec binary_cm(std::vector<double> x);
    static ModelSpec weighted_cm(std::vector<double> y);
    static ModelSpec bounded_cm(std::vector<double> y, std::int64_t w_max);
    static ModelSpec mixed(std::vector<double> x, std::vector<double> y);
    static ModelSpec fitness(std::size_t n, double z);
    static ModelSpec fitness_distance(std::size_t n, double z, double gamma,
                                      statmech::DistanceKernel kernel = statmech::DistanceKernel::Identity);

    bool weighted() const { return is_weighted(family); }

    /// Throws DomainError (DivergenceError for y_i y_j >= 1) on invalid parameters.
    void validate() const;
};

/// Dense symmetric n x n per-pair statistics (zero diagonal).
struct PairMatrix {
    std::size_t n = 0;
    std::vector<double> p;
    std::vector<double> ew;

    double p_at(std::size_t i, std::size_t j) const { return p[i * n + j]; }
    double ew_at(std::size_t i, std::size_t j) const { return ew[i * n + j]; }
};

/// A validated model bound to the node attributes it needs; evaluates the
/// per-pair law on demand.
class Ensemble {
public:
    /// Fitness families require `attrs` (and distances for the distance variant);
    /// throws InputError otherwise.
    explicit Ensemble(ModelSpec spec, std::optional<NodeAttributes> attrs = std::nullopt);

    const ModelSpec& spec() const noexcept { return spec_; }
    std::size_t size() const noexcept { return spec_.n; }
    bool weighted() const noexcept { return spec_.weighted(); }

    statmech::PairStatistics pair(std::size_t i, std::size_t j) const;
    /// ln q_ij(w); for binary families w is read as a_ij = [w > 0].
    double log_pmf(std::size_t i, std::size_t j, Weight w) const;
    /// Exact draw of w_ij from two independent uniforms in (0, 1).
    Weight draw(std::size_t i, std::size_t j, double u1, double u2) const;

    /// z f_i f_j e^{-gamma f(d_ij)} for fitness families.
    double fitness_product(std::size_t i, std::size_t j) const;

private:
    ModelSpec spec_;
    std::optional<NodeAttributes> attrs_;
};

PairMatrix materialize(const Ensemble& ensemble);

/// Deterministic "model" that reproduces an observed graph: p_ij = a_ij, ew_ij = w_ij.
PairMatrix observed_pairs(const WeightedGraph& g);

struct LogLikelihood {
    double value = 0.0;
    /// First pair (i < j) whose realized value has zero probability, if any.
    std::optional<std::pair<std::size_t, std::size_t>> impossible_pair;

    bool finite() const { return !impossible_pair.has_value(); }
};

/// Sum over pairs i < j of ln q_ij(w_ij) (weighted families) or ln q_ij(a_ij).
LogLikelihood log_likelihood(const ModelSpec& spec, const WeightedGraph& g,
                             const std::optional<NodeAttributes>& attrs = std::nullopt);

} // namespace wtw
