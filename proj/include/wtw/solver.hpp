#pragma once

#include "wtw/ensemble.hpp"
#include "wtw/graph.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wtw {

enum class Initializer {
    /// x_i = k_i / sqrt(2L), y_i = s_i / sqrt(2W), clipped so that y_i y_j <= 0.99.
    Heuristic,
    /// Heuristic start perturbed by a factor e^U, U ~ uniform(-1, 1), drawn from `seed`.
    Random,
};

struct SolverConfig {
    /// Bound on max_i |expected_i - observed_i| / max(observed_i, 1).
    double tolerance = 1e-10;
    std::size_t max_iterations = 100000;
    /// Fixed-point blend factor in (0, 1]; halved whenever the residual grows.
    double damping = 1.0;
    Initializer initializer = Initializer::Heuristic;
    std::uint64_t seed = 0;
    /// Switch to Newton steps on the log-parameters after `warmup` fixed-point sweeps.
    bool newton = true;
    std::size_t warmup = 20;

    /// Throws InputError on out-of-range settings.
    void validate() const;
};

enum class FitStatus { Converged, NotConverged, Infeasible };

std::string_view status_name(FitStatus s);

struct FittedModel {
    ModelSpec spec;
    /// Per-constraint |expected - observed| / max(observed, 1); degrees first
    /// then strengths for the mixed model, (L, F) for fitness models.
    std::vector<double> residuals;
    std::size_t iterations = 0;
    bool converged = false;
    FitStatus status = FitStatus::NotConverged;
    std::string diagnosis;
    double tolerance = 0.0;
    /// Node labels of the graph the model was fitted on (may be empty).
    std::vector<std::string> labels;

    double max_residual() const;
};

FittedModel solve_er(const WeightedGraph& g);

/// Binary configuration model: sum_{j != i} x_i x_j / (1 + x_i x_j) = k_i.
FittedModel solve_bcm(std::span<const double> k, const SolverConfig& cfg = {});

/// Weighted configuration model: sum_{j != i} y_i y_j / (1 - y_i y_j) = s_i.
FittedModel solve_wcm(std::span<const double> s, const SolverConfig& cfg = {});

/// Bounded-weight model on strengths, weights in [0, w_max].
FittedModel solve_bounded(std::span<const double> s, std::int64_t w_max, const SolverConfig& cfg = {});

/// Mixed Bose-Fermi model: degrees and strengths matched simultaneously.
/// Throws InputError when s_i < k_i or exactly one of k_i, s_i is zero.
FittedModel solve_mixed(std::span<const double> k, std::span<const double> s, const SolverConfig& cfg = {});

struct FitnessTargets {
    double links = 0.0;    ///< L
    double filling = 0.0;  ///< F = sum_{i<j} a_ij f(d_ij)
};

FitnessTargets fitness_targets(const WeightedGraph& g, const NodeAttributes& attrs, bool with_distance,
                               statmech::DistanceKernel kernel = statmech::DistanceKernel::Identity);

/// z from <L> = L by bisection; with distances, (z, gamma) from <L> = L, <F> = F.
FittedModel fit_fitness(const NodeAttributes& attrs, const FitnessTargets& targets, bool with_distance,
                        const SolverConfig& cfg = {},
                        statmech::DistanceKernel kernel = statmech::DistanceKernel::Identity);

FittedModel fit_fitness(const WeightedGraph& g, const NodeAttributes& attrs, bool with_distance,
                        const SolverConfig& cfg = {},
                        statmech::DistanceKernel kernel = statmech::DistanceKernel::Identity);

struct FitOptions {
    Family family = Family::BinaryCM;
    std::int64_t w_max = 1;
    statmech::DistanceKernel kernel = statmech::DistanceKernel::Identity;
};

/// Fits `options.family` to the graph's own constraints and records its labels.
FittedModel fit_model(const FitOptions& options, const WeightedGraph& g,
                      const std::optional<NodeAttributes>& attrs, const SolverConfig& cfg = {});

/// Recomputes the residual vector of a fitted model against a graph.
/// Throws InputError on size mismatch.
std::vector<double> constraint_residuals(const FittedModel& fm, const WeightedGraph& g,
                                         const std::optional<NodeAttributes>& attrs = std::nullopt);

} // namespace wtw
