#include "wtw/gravity.hpp"

#include "wtw/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace wtw {

std::string_view gravity_mode_name(GravityMode m) {
    return m == GravityMode::Canonical ? "canonical" : "fitted";
}

double gravity_flow(const GravityFit& fit, double f_i, double f_j, double d) {
    return std::exp(fit.lnK + fit.alpha * std::log(f_i) + fit.beta * std::log(f_j) - fit.gamma * std::log(d));
}

GravityFit fit_gravity(const WeightedGraph& g, const NodeAttributes& attrs, GravityMode mode) {
    if (attrs.size() != g.size())
        throw InputError("node attributes do not match the graph");
    const std::size_t n = g.size();
    const std::size_t pairs = n * (n - (n > 0 ? 1 : 0)) / 2;

    std::vector<double> yv, mass, dist;
    yv.reserve(g.num_links());
    for (const Edge& e : g.edges()) {
        const double d = attrs.distance(e.i, e.j);
        if (!(d > 0.0)) {
            std::ostringstream os;
            os << "distance between " << g.labels()[e.i] << " and " << g.labels()[e.j]
               << " is not positive; ln d undefined for a nonzero flow";
            throw InputError(os.str());
        }
        yv.push_back(std::log(static_cast<double>(e.w) * g.unit()));
        mass.push_back(std::log(attrs.fitness(e.i)) + std::log(attrs.fitness(e.j)));
        dist.push_back(std::log(d));
    }
    if (yv.size() < 4)
        throw InputError("gravity regression needs at least 4 linked pairs, found " + std::to_string(yv.size()));

    GravityFit fit;
    fit.mode = mode;
    fit.n_obs = yv.size();
    fit.n_excluded = pairs - yv.size();
    const auto m = static_cast<Eigen::Index>(yv.size());
    const Eigen::Map<const Eigen::VectorXd> y(yv.data(), m);
    Eigen::VectorXd fitted(m);

    if (mode == GravityMode::Canonical) {
        double s = 0.0;
        for (Eigen::Index r = 0; r < m; ++r)
            s += y[r] - mass[static_cast<std::size_t>(r)] + dist[static_cast<std::size_t>(r)];
        fit.lnK = s / static_cast<double>(m);
        fit.alpha = fit.beta = fit.gamma = 1.0;
        for (Eigen::Index r = 0; r < m; ++r)
            fitted[r] = fit.lnK + mass[static_cast<std::size_t>(r)] - dist[static_cast<std::size_t>(r)];
    } else {
        Eigen::MatrixXd X(m, 3);
        for (Eigen::Index r = 0; r < m; ++r) {
            X(r, 0) = 1.0;
            X(r, 1) = mass[static_cast<std::size_t>(r)];
            X(r, 2) = -dist[static_cast<std::size_t>(r)];
        }
        // Centering keeps the normal equations well conditioned.
        const Eigen::RowVector3d mean = X.colwise().mean();
        Eigen::MatrixXd Xc = X.rowwise() - mean;
        const double ybar = y.mean();
        const Eigen::Matrix2d G = Xc.rightCols<2>().transpose() * Xc.rightCols<2>();
        const Eigen::Vector2d rhs = Xc.rightCols<2>().transpose() * (y.array() - ybar).matrix();
        const double scale = std::max(G.diagonal().maxCoeff(), 1e-300);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(G);
        if (eig.eigenvalues().minCoeff() <= 1e-12 * scale) {
            std::ostringstream os;
            os << "rank-deficient gravity design: ";
            if (G(0, 0) <= 1e-12 * scale)
                os << "log fitness products do not vary across linked pairs";
            else if (G(1, 1) <= 1e-12 * scale)
                os << "log distances do not vary across linked pairs";
            else
                os << "log fitness products and log distances are collinear";
            throw InputError(os.str());
        }
        const Eigen::Vector2d b = G.ldlt().solve(rhs);
        fit.alpha = fit.beta = b[0];
        fit.gamma = b[1];
        fit.lnK = ybar - b[0] * mean[1] - b[1] * mean[2];
        fitted = X * Eigen::Vector3d(fit.lnK, b[0], b[1]);
    }

    const double ss_tot = (y.array() - y.mean()).square().sum();
    const double ss_res = (y - fitted).squaredNorm();
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

PairMatrix predict_gravity(const GravityFit& fit, const NodeAttributes& attrs, double unit) {
    if (!(unit > 0.0))
        throw InputError("unit must be positive");
    const std::size_t n = attrs.size();
    PairMatrix pm{n, std::vector<double>(n * n, 0.0), std::vector<double>(n * n, 0.0)};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double w = gravity_flow(fit, attrs.fitness(i), attrs.fitness(j), attrs.distance(i, j)) / unit;
            pm.p[i * n + j] = pm.p[j * n + i] = 1.0;
            pm.ew[i * n + j] = pm.ew[j * n + i] = w;
        }
    return pm;
}

} // namespace wtw
