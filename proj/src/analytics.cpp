#include "wtw/analytics.hpp"

#include "wtw/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wtw {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// diag(A^3) for symmetric A.
Eigen::VectorXd closed_triples(const RowMatrix& a) {
    const RowMatrix a2 = a * a;
    return a2.cwiseProduct(a).rowwise().sum();
}

MetricVector scaled(const MetricVector& v, double factor) {
    MetricVector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i])
            out[i] = *v[i] * factor;
    return out;
}

MetricVector undefined(std::size_t n) { return MetricVector(n); }

struct Normalized {
    MetricVector knn, c, snn, cw, snn_obs, cw_obs;
};

/// Expected-side metric columns, rescaled by own and observed total weight.
Normalized expected_columns(const ExpectedMetrics& em, double w_obs, bool weighted) {
    Normalized out{em.knn, em.c, {}, {}, {}, {}};
    if (!weighted)
        return out;
    const std::size_t n = em.knn.size();
    out.snn = em.total_weight > 0.0 ? scaled(em.snn, 1.0 / em.total_weight) : undefined(n);
    out.cw = em.cw;
    out.snn_obs = w_obs > 0.0 ? scaled(em.snn, 1.0 / w_obs) : undefined(n);
    out.cw_obs = w_obs > 0.0 ? scaled(em.cw, em.total_weight / w_obs) : undefined(n);
    return out;
}

const MetricVector& column(const Normalized& nm, const std::string& metric) {
    if (metric == "knn")
        return nm.knn;
    if (metric == "c")
        return nm.c;
    if (metric == "snn")
        return nm.snn;
    if (metric == "cw")
        return nm.cw;
    if (metric == "snn_obsnorm")
        return nm.snn_obs;
    return nm.cw_obs;
}

} // namespace

ExpectedMetrics expected_metrics(const PairMatrix& pm, bool weighted) {
    const std::size_t n = pm.n;
    const auto ni = static_cast<Eigen::Index>(n);
    const Eigen::Map<const RowMatrix> P(pm.p.data(), ni, ni);
    ExpectedMetrics em;
    em.k.resize(n);
    em.knn.resize(n);
    em.c.resize(n);
    const Eigen::VectorXd k = P.rowwise().sum();
    const Eigen::VectorXd pk = P * k;
    const Eigen::VectorXd tri = closed_triples(P);
    // sum_{j != l} p_ij p_il, the plug-in of k_i (k_i - 1)
    const Eigen::VectorXd pairs = k.cwiseProduct(k) - P.cwiseProduct(P).rowwise().sum();
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        em.k[i] = k[ii];
        if (k[ii] > 0.0)
            em.knn[i] = pk[ii] / k[ii];
        if (k[ii] > 1.0 && pairs[ii] > 0.0)
            em.c[i] = tri[ii] / pairs[ii];
    }
    em.links = k.sum() / 2.0;
    em.density = n >= 2 ? em.links / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0) : 0.0;
    if (!weighted)
        return em;

    const Eigen::Map<const RowMatrix> E(pm.ew.data(), ni, ni);
    const Eigen::VectorXd s = E.rowwise().sum();
    const Eigen::VectorXd ps = P * s;
    em.total_weight = s.sum() / 2.0;
    em.s.resize(n);
    em.snn.resize(n);
    em.cw.resize(n);
    Eigen::VectorXd wtri = Eigen::VectorXd::Zero(ni);
    if (em.total_weight > 0.0) {
        // a_ij -> p_ij and, on a present link, w_ij -> <w_ij | a_ij = 1> = <w_ij> / p_ij
        RowMatrix C = RowMatrix::Zero(ni, ni);
        for (Eigen::Index i = 0; i < ni; ++i)
            for (Eigen::Index j = 0; j < ni; ++j)
                if (P(i, j) > 0.0)
                    C(i, j) = P(i, j) * std::cbrt(E(i, j) / (P(i, j) * em.total_weight));
        wtri = closed_triples(C);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        em.s[i] = s[ii];
        if (k[ii] > 0.0)
            em.snn[i] = ps[ii] / k[ii];
        if (k[ii] > 1.0 && pairs[ii] > 0.0 && em.total_weight > 0.0)
            em.cw[i] = wtri[ii] / pairs[ii];
    }
    return em;
}

ExpectedMetrics expected_metrics(const FittedModel& fm, const std::optional<NodeAttributes>& attrs) {
    if (fm.status == FitStatus::Infeasible)
        throw InfeasibleError("model is infeasible: " + fm.diagnosis);
    const Ensemble e(fm.spec, attrs);
    return expected_metrics(materialize(e), fm.spec.weighted());
}

std::optional<double> pearson(const MetricVector& a, const MetricVector& b) {
    if (a.size() != b.size())
        throw InputError("correlation of vectors with different lengths");
    double n = 0.0, ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] && b[i]) {
            n += 1.0;
            ma += *a[i];
            mb += *b[i];
        }
    }
    if (n < 2.0)
        return std::nullopt;
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] && b[i]) {
            const double da = *a[i] - ma, db = *b[i] - mb;
            sab += da * db;
            saa += da * da;
            sbb += db * db;
        }
    }
    if (saa <= 0.0 || sbb <= 0.0)
        return std::nullopt;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::optional<double> coefficient_of_variation(const MetricVector& v) {
    double n = 0.0, mean = 0.0;
    for (const auto& x : v)
        if (x) {
            n += 1.0;
            mean += *x;
        }
    if (n < 1.0 || mean == 0.0)
        return std::nullopt;
    mean /= n;
    double var = 0.0;
    for (const auto& x : v)
        if (x)
            var += (*x - mean) * (*x - mean);
    return std::sqrt(var / n) / std::abs(mean);
}

const MetricComparison& ComparisonReport::at(const std::string& metric) const {
    for (const auto& mc : metrics)
        if (mc.metric == metric)
            return mc;
    throw InputError("report has no metric '" + metric + "'");
}

std::vector<std::string> report_metrics(bool weighted) {
    if (!weighted)
        return {"knn", "c"};
    return {"knn", "c", "snn", "cw", "snn_obsnorm", "cw_obsnorm"};
}

ComparisonReport compare(const WeightedGraph& g, const PairMatrix& expected, const std::string& model, bool weighted,
                         const std::optional<GravityFit>& gravity, const std::optional<NodeAttributes>& attrs) {
    const std::size_t n = g.size();
    if (expected.n != n)
        throw InputError("model has " + std::to_string(expected.n) + " nodes but graph has " + std::to_string(n));
    if (gravity && (!attrs || attrs->size() != n))
        throw InputError("gravity reference needs node attributes matching the graph");

    const double w_obs = static_cast<double>(g.total_weight());
    Normalized obs{avg_nn_degree(g), clustering(g), {}, {}, {}, {}};
    if (weighted) {
        obs.snn = w_obs > 0.0 ? scaled(avg_nn_strength(g), 1.0 / w_obs) : undefined(n);
        obs.cw = w_obs > 0.0 ? weighted_clustering(g) : undefined(n);
        obs.snn_obs = obs.snn;
        obs.cw_obs = obs.cw;
    }
    const Normalized exp = expected_columns(expected_metrics(expected, weighted), w_obs, weighted);

    ComparisonReport r;
    r.model = model;
    r.nodes = g.labels();
    r.observed_density = n >= 2 ? density(g) : 0.0;
    r.expected_density = expected_metrics(expected, false).density;

    std::optional<Normalized> grav;
    if (gravity) {
        const PairMatrix gp = predict_gravity(*gravity, *attrs, g.unit());
        const ExpectedMetrics gm = expected_metrics(gp, true);
        grav = expected_columns(gm, w_obs, weighted);
        GravityReference ref;
        ref.fit = *gravity;
        ref.expected_density = gm.density;
        ref.complete_topology = gm.density == 1.0;
        std::ostringstream os;
        os << "gravity predicts a strictly positive flow for every pair (expected density " << gm.density
           << ", observed " << r.observed_density << "); it cannot reproduce missing links";
        ref.diagnosis = os.str();
        r.gravity = ref;
    }

    for (const auto& name : report_metrics(weighted)) {
        MetricComparison mc{name, column(obs, name), column(exp, name), std::nullopt};
        if (grav)
            mc.gravity = column(*grav, name);
        r.correlations[name] = pearson(mc.observed, mc.expected);
        r.metrics.push_back(std::move(mc));
    }
    return r;
}

ComparisonReport compare(const WeightedGraph& g, const FittedModel& fm, const std::optional<NodeAttributes>& attrs,
                         const std::optional<GravityFit>& gravity) {
    if (fm.spec.n != g.size())
        throw InputError("model has " + std::to_string(fm.spec.n) + " nodes but graph has " +
                         std::to_string(g.size()));
    if (fm.status == FitStatus::Infeasible)
        throw InfeasibleError("model is infeasible: " + fm.diagnosis);
    const Ensemble e(fm.spec, attrs);
    return compare(g, materialize(e), std::string(family_name(fm.spec.family)), fm.spec.weighted(), gravity, attrs);
}

} // namespace wtw
