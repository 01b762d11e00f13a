#include "wtw/synth.hpp"

#include "wtw/errors.hpp"
#include "wtw/random.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace wtw {

namespace {

// Stream tags keep positions, links and weights on disjoint streams.
constexpr std::uint64_t kPositionStream = 1;
constexpr std::uint64_t kPairStream = 2;

std::string label(std::size_t i, std::size_t n) {
    const int width = n > 1 ? static_cast<int>(std::to_string(n - 1).size()) : 1;
    char buf[32];
    std::snprintf(buf, sizeof buf, "N%0*zu", width, i);
    return buf;
}

} // namespace

void SynthConfig::validate() const {
    if (n < 2)
        throw InputError("synth needs n >= 2");
    if (!(fitness_min > 0.0) || !std::isfinite(fitness_max) || !(fitness_max >= fitness_min))
        throw InputError("fitness range must satisfy 0 < fitness_min <= fitness_max < inf");
    if (z && (!(*z >= 0.0) || !std::isfinite(*z)))
        throw InputError("z must be finite and non-negative");
    if (!z && !(target_density > 0.0 && target_density < 1.0))
        throw InputError("target density must lie in (0, 1)");
    if (!(weight_scale >= 0.0) || !std::isfinite(weight_scale))
        throw InputError("weight scale must be finite and non-negative");
    if (!std::isfinite(weight_exponent))
        throw InputError("weight exponent must be finite");
    if (!(weight_cap > 0.0 && weight_cap < 1.0))
        throw InputError("weight cap must lie in (0, 1) so that y_i y_j < 1");
    if (!std::isfinite(gamma))
        throw InputError("gamma must be finite");
    if (gamma != 0.0 && !positions)
        throw InputError("gamma != 0 requires positions");
}

SynthNetwork synthesize(const SynthConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.n;
    AttributeTable table;
    table.fitness.resize(n);
    const double span = std::log(cfg.fitness_max / cfg.fitness_min);
    for (std::size_t i = 0; i < n; ++i) {
        table.nodes.push_back(label(i, n));
        table.fitness[i] = cfg.fitness_min * std::exp(span * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    if (cfg.positions) {
        std::vector<GeoPoint> pos(n);
        for (std::size_t i = 0; i < n; ++i) {
            SplitMix64 rng(stream_key(cfg.seed, kPositionStream, i, 0));
            const double u = rng.uniform();
            const double v = rng.uniform();
            pos[i] = {std::asin(2.0 * u - 1.0) * 180.0 / std::numbers::pi, 360.0 * v - 180.0};
        }
        table.positions = std::move(pos);
    }
    const NodeAttributes attrs(table.fitness, table.positions);

    // log of z f_i f_j e^{-gamma f(d)} without z
    std::vector<double> base(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double b = std::log(table.fitness[i]) + std::log(table.fitness[j]);
            if (cfg.gamma != 0.0)
                b -= cfg.gamma * statmech::apply_kernel(cfg.kernel, attrs.distance(i, j));
            base[i * n + j] = b;
        }

    double z = 0.0;
    if (cfg.z) {
        z = *cfg.z;
    } else {
        const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
        auto density_at = [&](double lz) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                    s += 1.0 / (1.0 + std::exp(-(lz + base[i * n + j])));
            return s / pairs;
        };
        double lo = -50.0, hi = 50.0;
        while (density_at(lo) > cfg.target_density)
            lo -= 50.0;
        while (density_at(hi) < cfg.target_density)
            hi += 50.0;
        for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
            const double mid = 0.5 * (lo + hi);
            (density_at(mid) < cfg.target_density ? lo : hi) = mid;
        }
        z = std::exp(0.5 * (lo + hi));
    }

    std::vector<Edge> edges;
    if (z > 0.0) {
        const double f2 = cfg.fitness_max * cfg.fitness_max;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                SplitMix64 rng(stream_key(cfg.seed, kPairStream, i, j));
                const double v = z * std::exp(base[i * n + j]);
                const double p = std::isinf(v) ? 1.0 : v / (1.0 + v);
                const double u_link = rng.uniform();
                const double u_weight = rng.uniform();
                if (!(u_link < p))
                    continue;
                const double mu =
                    cfg.weight_scale * std::pow(table.fitness[i] * table.fitness[j] / f2, cfg.weight_exponent);
                const double Y = std::min(mu / (1.0 + mu), cfg.weight_cap);
                Weight w = 1;
                if (Y > 0.0)
                    w += static_cast<Weight>(std::floor(std::log(u_weight) / std::log(Y)));
                edges.push_back({i, j, w});
            }
    }
    return {WeightedGraph(table.nodes, edges), std::move(table), z};
}

} // namespace wtw
