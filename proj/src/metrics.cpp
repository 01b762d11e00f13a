#include "wtw/metrics.hpp"

#include "wtw/errors.hpp"

#include <cmath>

namespace wtw {

namespace {

/// Dense 0/1 rows for triangle counting.
std::vector<std::vector<char>> adjacency_rows(const WeightedGraph& g) {
    const std::size_t n = g.size();
    std::vector<std::vector<char>> rows(n, std::vector<char>(n, 0));
    for (const Edge& e : g.edges()) {
        rows[e.i][e.j] = 1;
        rows[e.j][e.i] = 1;
    }
    return rows;
}

} // namespace

MetricVector degree(const WeightedGraph& g) {
    MetricVector k(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        k[i] = static_cast<double>(g.neighbors(i).size());
    return k;
}

MetricVector strength(const WeightedGraph& g) {
    MetricVector s(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        double total = 0.0;
        for (const auto& nb : g.neighbors(i))
            total += static_cast<double>(nb.weight);
        s[i] = total;
    }
    return s;
}

MetricVector avg_nn_degree(const WeightedGraph& g) {
    MetricVector out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto nbs = g.neighbors(i);
        if (nbs.empty())
            continue;
        double sum = 0.0;
        for (const auto& nb : nbs)
            sum += static_cast<double>(g.neighbors(nb.node).size());
        out[i] = sum / static_cast<double>(nbs.size());
    }
    return out;
}

MetricVector avg_nn_strength(const WeightedGraph& g) {
    const auto s = strength(g);
    MetricVector out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto nbs = g.neighbors(i);
        if (nbs.empty())
            continue;
        double sum = 0.0;
        for (const auto& nb : nbs)
            sum += *s[nb.node];
        out[i] = sum / static_cast<double>(nbs.size());
    }
    return out;
}

MetricVector clustering(const WeightedGraph& g) {
    const auto rows = adjacency_rows(g);
    MetricVector out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto nbs = g.neighbors(i);
        const double k = static_cast<double>(nbs.size());
        if (nbs.size() <= 1)
            continue;
        double closed = 0.0;
        for (std::size_t a = 0; a < nbs.size(); ++a)
            for (std::size_t b = a + 1; b < nbs.size(); ++b)
                closed += rows[nbs[a].node][nbs[b].node];
        out[i] = 2.0 * closed / (k * (k - 1.0));
    }
    return out;
}

MetricVector weighted_clustering(const WeightedGraph& g) {
    if (g.total_weight() <= 0)
        throw InputError("empty weighted graph");
    const double total = static_cast<double>(g.total_weight());
    MetricVector out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto nbs = g.neighbors(i);
        const double k = static_cast<double>(nbs.size());
        if (nbs.size() <= 1)
            continue;
        double sum = 0.0;
        for (std::size_t a = 0; a < nbs.size(); ++a) {
            for (std::size_t b = a + 1; b < nbs.size(); ++b) {
                const Weight w_jk = g.weight(nbs[a].node, nbs[b].node);
                if (w_jk == 0)
                    continue;
                const double prod = (static_cast<double>(nbs[a].weight) / total) *
                                    (static_cast<double>(w_jk) / total) *
                                    (static_cast<double>(nbs[b].weight) / total);
                sum += std::cbrt(prod);
            }
        }
        out[i] = 2.0 * sum / (k * (k - 1.0));
    }
    return out;
}

double density(const WeightedGraph& g) {
    const std::size_t n = g.size();
    if (n < 2)
        throw InputError("density needs at least two nodes");
    return static_cast<double>(g.num_links()) / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

std::vector<double> values_or(const MetricVector& v, double fill) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out[i] = v[i].value_or(fill);
    return out;
}

} // namespace wtw
