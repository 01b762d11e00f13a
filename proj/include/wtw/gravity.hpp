#pragma once

#include "wtw/ensemble.hpp"
#include "wtw/graph.hpp"

#include <cstddef>
#include <string_view>

namespace wtw {

enum class GravityMode {
    /// OLS of ln w on (1, ln f_i + ln f_j, -ln d); alpha = beta.
    Fitted,
    /// alpha = beta = gamma = 1, only lnK estimated (mean log residual).
    Canonical,
};

std::string_view gravity_mode_name(GravityMode m);

/// <w_ij> = e^lnK f_i^alpha f_j^beta / d_ij^gamma, in the graph's original weight scale.
struct GravityFit {
    double lnK = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double r_squared = 0.0;
    std::size_t n_obs = 0;
    /// Pairs with zero flow, left out of the regression.
    std::size_t n_excluded = 0;
    GravityMode mode = GravityMode::Fitted;

    friend bool operator==(const GravityFit&, const GravityFit&) = default;
};

/// Regresses ln(w_ij * unit) over linked pairs. Throws InputError with fewer than
/// 4 linked pairs, a non-positive distance on a linked pair, or a rank-deficient design.
GravityFit fit_gravity(const WeightedGraph& g, const NodeAttributes& attrs,
                       GravityMode mode = GravityMode::Fitted);

/// p_ij = 1 for every pair; ew_ij is the gravity flow expressed in units of `unit`.
/// Pairs at zero distance get an infinite flow when gamma > 0.
PairMatrix predict_gravity(const GravityFit& fit, const NodeAttributes& attrs, double unit = 1.0);

double gravity_flow(const GravityFit& fit, double f_i, double f_j, double d);

} // namespace wtw
