#include "wtw/solver.hpp"

#include "wtw/errors.hpp"
#include "wtw/metrics.hpp"
#include "wtw/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace wtw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double softplus(double v) { return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }

// Per-pair laws in natural parameters: u = theta_i + theta_j, multiplier product e^{-u}.
// log_z is +inf outside the domain of the law.

template <int K>
struct LawEval {
    double log_z = 0.0;
    std::array<double, K> mean{};
    std::array<double, K * K> cov{};
};

struct FermiLaw {
    static constexpr int K = 1;
    LawEval<1> operator()(const double* u) const {
        LawEval<1> e;
        const double p = 1.0 / (1.0 + std::exp(u[0]));
        e.log_z = softplus(-u[0]);
        e.mean[0] = p;
        e.cov[0] = p * (1.0 - p);
        return e;
    }
};

struct BoseLaw {
    static constexpr int K = 1;
    LawEval<1> operator()(const double* u) const {
        LawEval<1> e;
        if (!(u[0] > 0.0)) {
            e.log_z = kInf;
            return e;
        }
        const double m = 1.0 / std::expm1(u[0]);
        e.log_z = -std::log(-std::expm1(-u[0]));
        e.mean[0] = m;
        e.cov[0] = m * (1.0 + m);
        return e;
    }
};

struct BoundedLaw {
    static constexpr int K = 1;
    std::int64_t w_max = 1;
    LawEval<1> operator()(const double* u) const {
        LawEval<1> e;
        const double v = std::exp(-std::clamp(u[0], -700.0, 700.0));
        e.log_z = -statmech::bounded_log_pmf(v, w_max, 0);
        e.mean[0] = statmech::bounded_expected_weight(v, w_max);
        e.cov[0] = statmech::bounded_weight_variance(v, w_max);
        return e;
    }
};

/// Components: 0 -> degree (a), 1 -> strength (w).
struct MixedLaw {
    static constexpr int K = 2;
    LawEval<2> operator()(const double* u) const {
        LawEval<2> e;
        if (!(u[1] > 0.0)) {
            e.log_z = kInf;
            return e;
        }
        const double one_minus = -std::expm1(-u[1]);
        const double xy = std::exp(-(u[0] + u[1]));
        const double d = one_minus + xy;
        const double a = xy / d;
        const double not_a = one_minus / d;
        const double w = a / one_minus;
        const double yy = std::exp(-u[1]);
        e.log_z = std::log(d) - std::log(one_minus);
        e.mean = {a, w};
        e.cov = {a * not_a, w * not_a, w * not_a, a * (1.0 + yy - a) / (one_minus * one_minus)};
        return e;
    }
};

/// Nodes sharing identical constraint values share one unknown.
struct Groups {
    static constexpr std::size_t kInactive = static_cast<std::size_t>(-1);
    std::vector<std::size_t> of_node;
    std::vector<double> count;
    std::vector<double> targets;  // count.size() * K
    std::vector<std::size_t> representative;
};

template <int K>
Groups make_groups(const std::vector<std::array<double, K>>& constraints) {
    Groups g;
    g.of_node.assign(constraints.size(), Groups::kInactive);
    std::map<std::array<double, K>, std::size_t> index;
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        const auto& c = constraints[i];
        if (std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; }))
            continue;
        const auto [it, inserted] = index.emplace(c, g.count.size());
        if (inserted) {
            g.count.push_back(0.0);
            g.targets.insert(g.targets.end(), c.begin(), c.end());
            g.representative.push_back(i);
        }
        g.of_node[i] = it->second;
        g.count[it->second] += 1.0;
    }
    return g;
}

struct Evaluation {
    double phi = kInf;
    std::vector<double> expected;
    Eigen::MatrixXd hessian;
};

/// Negative log-likelihood over the reduced (grouped) unknowns theta = -ln(multiplier).
template <class Law>
class Reduced {
public:
    static constexpr int K = Law::K;

    Reduced(Law law, const Groups& groups) : law_(law), groups_(groups) {}

    std::size_t groups() const { return groups_.count.size(); }
    std::size_t dim() const { return groups() * K; }

    Evaluation evaluate(const std::vector<double>& theta, bool with_hessian) const {
        const std::size_t d = groups();
        const auto& m = groups_.count;
        Evaluation ev;
        ev.expected.assign(dim(), 0.0);
        if (with_hessian)
            ev.hessian = Eigen::MatrixXd::Zero(dim(), dim());
        double phi = 0.0;
        for (std::size_t g = 0; g < d; ++g)
            for (int a = 0; a < K; ++a)
                phi += m[g] * groups_.targets[g * K + a] * theta[g * K + a];

        std::array<double, K> u{};
        for (std::size_t g = 0; g < d; ++g) {
            for (std::size_t h = g; h < d; ++h) {
                const double pairs = (g == h) ? m[g] * (m[g] - 1.0) / 2.0 : m[g] * m[h];
                if (pairs == 0.0)
                    continue;
                for (int a = 0; a < K; ++a)
                    u[a] = theta[g * K + a] + theta[h * K + a];
                const auto e = law_(u.data());
                if (!std::isfinite(e.log_z)) {
                    ev.phi = kInf;
                    return ev;
                }
                phi += pairs * e.log_z;
                for (int a = 0; a < K; ++a) {
                    if (g == h) {
                        ev.expected[g * K + a] += (m[g] - 1.0) * e.mean[a];
                    } else {
                        ev.expected[g * K + a] += m[h] * e.mean[a];
                        ev.expected[h * K + a] += m[g] * e.mean[a];
                    }
                }
                if (!with_hessian)
                    continue;
                for (int a = 0; a < K; ++a) {
                    for (int b = 0; b < K; ++b) {
                        const double c = e.cov[a * K + b];
                        if (g == h) {
                            ev.hessian(g * K + a, g * K + b) += 2.0 * m[g] * (m[g] - 1.0) * c;
                        } else {
                            const double v = m[g] * m[h] * c;
                            ev.hessian(g * K + a, h * K + b) += v;
                            ev.hessian(h * K + a, g * K + b) += v;
                            ev.hessian(g * K + a, g * K + b) += v;
                            ev.hessian(h * K + a, h * K + b) += v;
                        }
                    }
                }
            }
        }
        ev.phi = phi;
        return ev;
    }

    double max_residual(const std::vector<double>& expected) const {
        double r = 0.0;
        for (std::size_t q = 0; q < dim(); ++q) {
            const double c = groups_.targets[q];
            r = std::max(r, std::abs(expected[q] - c) / std::max(c, 1.0));
        }
        return r;
    }

    std::vector<double> gradient(const std::vector<double>& expected) const {
        std::vector<double> grad(dim());
        for (std::size_t q = 0; q < dim(); ++q)
            grad[q] = groups_.count[q / K] * (groups_.targets[q] - expected[q]);
        return grad;
    }

private:
    Law law_;
    const Groups& groups_;
};

struct SolveState {
    std::vector<double> theta;
    double residual = kInf;
    std::size_t iterations = 0;
    bool converged = false;
    std::string note;
};

std::vector<double> to_theta(const std::vector<double>& mult) {
    std::vector<double> t(mult.size());
    for (std::size_t q = 0; q < mult.size(); ++q)
        t[q] = -std::log(std::max(mult[q], 1e-300));
    return t;
}

std::vector<double> to_mult(const std::vector<double>& theta) {
    std::vector<double> m(theta.size());
    for (std::size_t q = 0; q < theta.size(); ++q)
        m[q] = std::exp(-theta[q]);
    return m;
}

/// Rescales the strength multipliers so that every realized pair has y_g y_h <= 0.999.
void bosonic_guard(std::vector<double>& mult, const Groups& groups, int K, int y_component) {
    const std::size_t d = groups.count.size();
    double worst = 0.0;
    for (std::size_t g = 0; g < d; ++g)
        for (std::size_t h = g; h < d; ++h) {
            if (g == h && groups.count[g] < 2.0)
                continue;
            worst = std::max(worst, mult[g * K + y_component] * mult[h * K + y_component]);
        }
    if (worst >= 1.0) {
        const double scale = std::sqrt(0.999 / worst);
        for (std::size_t g = 0; g < d; ++g)
            mult[g * K + y_component] *= scale;
    }
}

/// Damped fixed-point sweeps followed (optionally) by Newton steps on theta.
template <class Law>
SolveState run_solver(const Reduced<Law>& problem, std::vector<double> mult,
                      const std::function<std::vector<double>(const std::vector<double>&, const Evaluation&)>& update,
                      const std::function<void(std::vector<double>&)>& guard, const SolverConfig& cfg) {
    SolveState st;
    guard(mult);
    st.theta = to_theta(mult);
    Evaluation ev = problem.evaluate(st.theta, false);
    if (!std::isfinite(ev.phi))
        throw InfeasibleError("initial point outside the model domain");
    st.residual = problem.max_residual(ev.expected);
    double damping = cfg.damping;
    const std::size_t fp_limit = cfg.newton ? std::min(cfg.warmup, cfg.max_iterations) : cfg.max_iterations;
    // lowest-objective iterate, where Newton starts
    std::vector<double> best_theta = st.theta;
    double best_phi = ev.phi, best_residual = st.residual;

    while (st.residual > cfg.tolerance && st.iterations < fp_limit) {
        auto proposal = update(mult, ev);
        for (std::size_t q = 0; q < mult.size(); ++q)
            proposal[q] = (1.0 - damping) * mult[q] + damping * proposal[q];
        guard(proposal);
        auto theta = to_theta(proposal);
        auto next = problem.evaluate(theta, false);
        ++st.iterations;
        if (!std::isfinite(next.phi)) {
            damping = std::max(damping / 2.0, 1e-6);
            continue;
        }
        const double r = problem.max_residual(next.expected);
        if (r > st.residual)
            damping = std::max(damping / 2.0, 1e-6);
        mult = std::move(proposal);
        st.theta = std::move(theta);
        ev = std::move(next);
        st.residual = r;
        if (ev.phi < best_phi) {
            best_theta = st.theta;
            best_phi = ev.phi;
            best_residual = r;
        }
    }

    if (cfg.newton) {
        st.theta = best_theta;
        st.residual = best_residual;
        ev = problem.evaluate(st.theta, true);
        std::size_t stalled = 0;
        while (st.residual > cfg.tolerance && st.iterations < cfg.max_iterations) {
            const auto grad = problem.gradient(ev.expected);
            const Eigen::Map<const Eigen::VectorXd> g(grad.data(), static_cast<Eigen::Index>(grad.size()));
            Eigen::VectorXd step;
            Eigen::MatrixXd H = ev.hessian;
            double ridge = 0.0;
            const double scale = std::max(H.diagonal().cwiseAbs().maxCoeff(), 1e-300);
            for (int attempt = 0; attempt < 12; ++attempt) {
                Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
                step = -ldlt.solve(g);
                if (ldlt.info() == Eigen::Success && step.allFinite() && ldlt.isPositive())
                    break;
                ridge = ridge == 0.0 ? 1e-12 * scale : ridge * 100.0;
                H = ev.hessian;
                H.diagonal().array() += ridge;
            }
            ++st.iterations;
            if (!step.allFinite()) {
                st.note = "singular Newton system";
                break;
            }
            const double slope = g.dot(step);  // directional derivative of phi
            double t = 1.0;
            bool accepted = false;
            std::vector<double> trial(st.theta.size());
            for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
                for (std::size_t q = 0; q < trial.size(); ++q)
                    trial[q] = st.theta[q] + t * step[static_cast<Eigen::Index>(q)];
                auto cand = problem.evaluate(trial, false);
                if (!std::isfinite(cand.phi))
                    continue;
                const double r = problem.max_residual(cand.expected);
                // near the optimum phi stops resolving progress; then a smaller residual suffices
                const bool armijo = cand.phi <= ev.phi + 1e-4 * t * slope;
                const bool flat = cand.phi <= ev.phi + 1e-12 * std::abs(ev.phi) && r < st.residual;
                if (armijo || flat) {
                    st.theta = trial;
                    st.residual = r;
                    accepted = true;
                    break;
                }
            }
            if (!accepted || t < 1e-12) {
                if (++stalled > 3) {
                    st.note = "line search stalled";
                    break;
                }
                if (!accepted)
                    continue;
            } else {
                stalled = 0;
            }
            ev = problem.evaluate(st.theta, true);
            st.residual = problem.max_residual(ev.expected);
        }
    }
    st.converged = st.residual <= cfg.tolerance;
    return st;
}

std::vector<double> initial_multipliers(const std::vector<double>& targets, std::size_t K, std::size_t component,
                                        double total, const SolverConfig& cfg, std::size_t salt) {
    const std::size_t d = targets.size() / K;
    std::vector<double> out(d);
    const double norm = std::sqrt(std::max(total, 1e-300));
    SplitMix64 rng(stream_key(cfg.seed, salt, component, 0));
    for (std::size_t g = 0; g < d; ++g) {
        double v = std::max(targets[g * K + component], 1e-8) / norm;
        if (cfg.initializer == Initializer::Random)
            v *= std::exp(2.0 * rng.uniform() - 1.0);
        out[g] = v;
    }
    return out;
}

/// Clips so that the largest realized product is at most 0.99.
void clip_products(std::vector<double>& y, const Groups& groups) {
    double worst = 0.0;
    const std::size_t d = y.size();
    for (std::size_t g = 0; g < d; ++g)
        for (std::size_t h = g; h < d; ++h) {
            if (g == h && groups.count[g] < 2.0)
                continue;
            worst = std::max(worst, y[g] * y[h]);
        }
    if (worst > 0.99) {
        const double s = std::sqrt(0.99 / worst);
        for (auto& v : y)
            v *= s;
    }
}

std::vector<double> expand(const std::vector<double>& per_group, const Groups& groups, std::size_t K,
                           std::size_t component) {
    std::vector<double> out(groups.of_node.size(), 0.0);
    for (std::size_t i = 0; i < out.size(); ++i)
        if (groups.of_node[i] != Groups::kInactive)
            out[i] = per_group[groups.of_node[i] * K + component];
    return out;
}

void check_targets(std::span<const double> v, const char* name) {
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!(v[i] >= 0.0) || !std::isfinite(v[i]))
            throw InputError(std::string(name) + "[" + std::to_string(i) + "] must be finite and non-negative");
}

std::size_t active_count(const Groups& groups) {
    return static_cast<std::size_t>(std::count_if(groups.of_node.begin(), groups.of_node.end(),
                                                  [](std::size_t g) { return g != Groups::kInactive; }));
}

void finish(FittedModel& fm, const SolveState& st, const SolverConfig& cfg) {
    fm.iterations = st.iterations;
    fm.converged = st.converged;
    fm.status = st.converged ? FitStatus::Converged : FitStatus::NotConverged;
    fm.tolerance = cfg.tolerance;
    if (!st.converged) {
        std::ostringstream os;
        os << "no convergence after " << st.iterations << " iterations (max relative residual " << st.residual << ")";
        if (!st.note.empty())
            os << ": " << st.note;
        fm.diagnosis = os.str();
    }
}

FittedModel infeasible(ModelSpec spec, std::string why, const SolverConfig& cfg, std::vector<double> residuals) {
    FittedModel fm;
    fm.spec = std::move(spec);
    fm.status = FitStatus::Infeasible;
    fm.converged = false;
    fm.diagnosis = std::move(why);
    fm.tolerance = cfg.tolerance;
    fm.residuals = std::move(residuals);
    return fm;
}

/// Degree constraints that force some p_ij = 1 cannot be met with finite multipliers.
std::optional<std::string> saturated_degree(std::span<const double> k, const Groups& groups) {
    const double active = static_cast<double>(active_count(groups));
    for (std::size_t i = 0; i < k.size(); ++i) {
        if (groups.of_node[i] != Groups::kInactive && k[i] >= active - 1.0) {
            std::ostringstream os;
            os << "node " << i << " has degree " << k[i] << " but only " << active - 1.0
               << " partners with nonzero constraints: requires p_ij = 1 (infinite multiplier)";
            return os.str();
        }
    }
    return std::nullopt;
}

std::vector<double> node_residuals(std::span<const double> target, const std::vector<double>& expected) {
    std::vector<double> r(target.size());
    for (std::size_t i = 0; i < target.size(); ++i)
        r[i] = std::abs(expected[i] - target[i]) / std::max(target[i], 1.0);
    return r;
}

/// <k_i> and <s_i> of an ensemble.
std::pair<std::vector<double>, std::vector<double>> expected_sums(const Ensemble& e) {
    const std::size_t n = e.size();
    std::vector<double> k(n, 0.0), s(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto st = e.pair(i, j);
            k[i] += st.p;
            k[j] += st.p;
            s[i] += st.ew;
            s[j] += st.ew;
        }
    return {k, s};
}

std::vector<double> residuals_for(const ModelSpec& spec, std::span<const double> k, std::span<const double> s) {
    const Ensemble e(spec);
    const auto [ek, es] = expected_sums(e);
    switch (spec.family) {
    case Family::BinaryCM:
        return node_residuals(k, ek);
    case Family::WeightedCM:
    case Family::BoundedCM:
        return node_residuals(s, es);
    case Family::MixedBoseFermi: {
        auto r = node_residuals(k, ek);
        const auto rs = node_residuals(s, es);
        r.insert(r.end(), rs.begin(), rs.end());
        return r;
    }
    default:
        return {};
    }
}

} // namespace

void SolverConfig::validate() const {
    if (!(tolerance > 0.0))
        throw InputError("solver tolerance must be positive");
    if (!(damping > 0.0 && damping <= 1.0))
        throw InputError("damping must lie in (0, 1]");
    if (max_iterations == 0)
        throw InputError("max_iterations must be positive");
}

std::string_view status_name(FitStatus s) {
    switch (s) {
    case FitStatus::Converged:
        return "converged";
    case FitStatus::NotConverged:
        return "not_converged";
    case FitStatus::Infeasible:
        return "infeasible";
    }
    return "unknown";
}

double FittedModel::max_residual() const {
    double r = 0.0;
    for (double v : residuals)
        r = std::max(r, v);
    return r;
}

FittedModel solve_er(const WeightedGraph& g) {
    const double n = static_cast<double>(g.size());
    const double pairs = n * (n - 1.0) / 2.0;
    if (pairs <= 0.0)
        throw InputError("Erdos-Renyi fit needs at least two nodes");
    const double L = static_cast<double>(g.num_links());
    FittedModel fm;
    fm.spec = ModelSpec::erdos_renyi(g.size(), L / pairs);
    fm.residuals = {std::abs(fm.spec.p * pairs - L) / std::max(L, 1.0)};
    fm.converged = true;
    fm.status = FitStatus::Converged;
    fm.tolerance = SolverConfig{}.tolerance;
    return fm;
}

FittedModel solve_bcm(std::span<const double> k, const SolverConfig& cfg) {
    cfg.validate();
    check_targets(k, "k");
    const std::size_t n = k.size();
    for (std::size_t i = 0; i < n; ++i)
        if (k[i] > static_cast<double>(n) - 1.0)
            throw InputError("degree of node " + std::to_string(i) + " exceeds n - 1");

    std::vector<std::array<double, 1>> cons(n);
    for (std::size_t i = 0; i < n; ++i)
        cons[i] = {k[i]};
    const Groups groups = make_groups<1>(cons);
    if (auto why = saturated_degree(k, groups))
        return infeasible(ModelSpec::binary_cm(std::vector<double>(n, 0.0)), *why, cfg, std::vector<double>(n, 0.0));

    FittedModel fm;
    if (groups.count.empty()) {
        fm.spec = ModelSpec::binary_cm(std::vector<double>(n, 0.0));
        fm.residuals.assign(n, 0.0);
        finish(fm, SolveState{{}, 0.0, 0, true, {}}, cfg);
        return fm;
    }
    const double total = std::accumulate(k.begin(), k.end(), 0.0);
    const Reduced<FermiLaw> problem(FermiLaw{}, groups);
    const auto& m = groups.count;
    const auto& c = groups.targets;
    const std::size_t d = m.size();
    auto update = [&](const std::vector<double>& x, const Evaluation&) {
        std::vector<double> out(d);
        for (std::size_t g = 0; g < d; ++g) {
            double denom = 0.0;
            for (std::size_t h = 0; h < d; ++h) {
                const double mult = (h == g) ? m[g] - 1.0 : m[h];
                if (mult > 0.0)
                    denom += mult * x[h] / (1.0 + x[g] * x[h]);
            }
            out[g] = denom > 0.0 ? c[g] / denom : x[g];
        }
        return out;
    };
    const auto st = run_solver(problem, initial_multipliers(c, 1, 0, total, cfg, 1), update,
                               [](std::vector<double>&) {}, cfg);
    fm.spec = ModelSpec::binary_cm(expand(to_mult(st.theta), groups, 1, 0));
    fm.residuals = residuals_for(fm.spec, k, {});
    finish(fm, st, cfg);
    return fm;
}

FittedModel solve_wcm(std::span<const double> s, const SolverConfig& cfg) {
    cfg.validate();
    check_targets(s, "s");
    const std::size_t n = s.size();
    std::vector<std::array<double, 1>> cons(n);
    for (std::size_t i = 0; i < n; ++i)
        cons[i] = {s[i]};
    const Groups groups = make_groups<1>(cons);
    FittedModel fm;
    if (groups.count.empty()) {
        fm.spec = ModelSpec::weighted_cm(std::vector<double>(n, 0.0));
        fm.residuals.assign(n, 0.0);
        finish(fm, SolveState{{}, 0.0, 0, true, {}}, cfg);
        return fm;
    }
    if (active_count(groups) < 2)
        return infeasible(ModelSpec::weighted_cm(std::vector<double>(n, 0.0)),
                          "a single node with positive strength has no partner", cfg, std::vector<double>(n, 0.0));

    const double total = std::accumulate(s.begin(), s.end(), 0.0);
    const Reduced<BoseLaw> problem(BoseLaw{}, groups);
    const auto& m = groups.count;
    const auto& c = groups.targets;
    const std::size_t d = m.size();
    auto update = [&](const std::vector<double>& y, const Evaluation&) {
        std::vector<double> out(d);
        for (std::size_t g = 0; g < d; ++g) {
            double denom = 0.0;
            for (std::size_t h = 0; h < d; ++h) {
                const double mult = (h == g) ? m[g] - 1.0 : m[h];
                if (mult > 0.0)
                    denom += mult * y[h] / (1.0 - y[g] * y[h]);
            }
            out[g] = denom > 0.0 ? c[g] / denom : y[g];
        }
        return out;
    };
    auto init = initial_multipliers(c, 1, 0, total, cfg, 2);
    clip_products(init, groups);
    const auto st = run_solver(problem, init, update,
                               [&](std::vector<double>& y) { bosonic_guard(y, groups, 1, 0); }, cfg);
    fm.spec = ModelSpec::weighted_cm(expand(to_mult(st.theta), groups, 1, 0));
    fm.residuals = residuals_for(fm.spec, {}, s);
    finish(fm, st, cfg);
    return fm;
}

FittedModel solve_bounded(std::span<const double> s, std::int64_t w_max, const SolverConfig& cfg) {
    cfg.validate();
    check_targets(s, "s");
    if (w_max < 1)
        throw InputError("w_max must be at least 1");
    const std::size_t n = s.size();
    std::vector<std::array<double, 1>> cons(n);
    for (std::size_t i = 0; i < n; ++i)
        cons[i] = {s[i]};
    const Groups groups = make_groups<1>(cons);
    FittedModel fm;
    if (groups.count.empty()) {
        fm.spec = ModelSpec::bounded_cm(std::vector<double>(n, 0.0), w_max);
        fm.residuals.assign(n, 0.0);
        finish(fm, SolveState{{}, 0.0, 0, true, {}}, cfg);
        return fm;
    }
    const double cap = static_cast<double>(active_count(groups) - 1) * static_cast<double>(w_max);
    for (std::size_t i = 0; i < n; ++i) {
        if (groups.of_node[i] != Groups::kInactive && s[i] >= cap) {
            std::ostringstream os;
            os << "node " << i << " has strength " << s[i] << " but at most " << cap
               << " is reachable with w_max = " << w_max << " (requires infinite multiplier)";
            return infeasible(ModelSpec::bounded_cm(std::vector<double>(n, 0.0), w_max), os.str(), cfg,
                              std::vector<double>(n, 0.0));
        }
    }

    const double total = std::accumulate(s.begin(), s.end(), 0.0);
    const Reduced<BoundedLaw> problem(BoundedLaw{w_max}, groups);
    const auto& c = groups.targets;
    const std::size_t d = c.size();
    auto update = [&](const std::vector<double>& y, const Evaluation& ev) {
        std::vector<double> out(d);
        for (std::size_t g = 0; g < d; ++g)
            out[g] = ev.expected[g] > 0.0 ? y[g] * c[g] / ev.expected[g] : y[g] * 2.0;
        return out;
    };
    auto init = initial_multipliers(c, 1, 0, total, cfg, 3);
    const auto st = run_solver(problem, init, update, [](std::vector<double>&) {}, cfg);
    fm.spec = ModelSpec::bounded_cm(expand(to_mult(st.theta), groups, 1, 0), w_max);
    fm.residuals = residuals_for(fm.spec, {}, s);
    finish(fm, st, cfg);
    return fm;
}

FittedModel solve_mixed(std::span<const double> k, std::span<const double> s, const SolverConfig& cfg) {
    cfg.validate();
    check_targets(k, "k");
    check_targets(s, "s");
    if (k.size() != s.size())
        throw InputError("degree and strength sequences differ in length");
    const std::size_t n = k.size();
    for (std::size_t i = 0; i < n; ++i) {
        if ((k[i] > 0.0) != (s[i] > 0.0))
            throw InputError("node " + std::to_string(i) + ": degree and strength must be both zero or both positive");
        if (s[i] < k[i])
            throw InputError("node " + std::to_string(i) + ": strength below degree (weights are integers >= 1)");
        if (k[i] > static_cast<double>(n) - 1.0)
            throw InputError("degree of node " + std::to_string(i) + " exceeds n - 1");
    }

    std::vector<std::array<double, 2>> cons(n);
    for (std::size_t i = 0; i < n; ++i)
        cons[i] = {k[i], s[i]};
    const Groups groups = make_groups<2>(cons);
    const auto zeros = std::vector<double>(n, 0.0);
    if (auto why = saturated_degree(k, groups))
        return infeasible(ModelSpec::mixed(zeros, zeros), *why, cfg, std::vector<double>(2 * n, 0.0));

    FittedModel fm;
    if (groups.count.empty()) {
        fm.spec = ModelSpec::mixed(zeros, zeros);
        fm.residuals.assign(2 * n, 0.0);
        finish(fm, SolveState{{}, 0.0, 0, true, {}}, cfg);
        return fm;
    }

    const Reduced<MixedLaw> problem(MixedLaw{}, groups);
    const auto& m = groups.count;
    const auto& c = groups.targets;
    const std::size_t d = m.size();
    auto update = [&](const std::vector<double>& v, const Evaluation&) {
        std::vector<double> out(2 * d);
        for (std::size_t g = 0; g < d; ++g) {
            double dx = 0.0, dy = 0.0;
            for (std::size_t h = 0; h < d; ++h) {
                const double mult = (h == g) ? m[g] - 1.0 : m[h];
                if (mult <= 0.0)
                    continue;
                const double X = v[2 * g] * v[2 * h];
                const double Y = v[2 * g + 1] * v[2 * h + 1];
                const double D = (1.0 - Y) + X * Y;
                dx += mult * v[2 * h] * Y / D;
                dy += mult * X * v[2 * h + 1] / (D * (1.0 - Y));
            }
            out[2 * g] = dx > 0.0 ? c[2 * g] / dx : v[2 * g];
            out[2 * g + 1] = dy > 0.0 ? c[2 * g + 1] / dy : v[2 * g + 1];
        }
        return out;
    };

    std::vector<double> kt(d), st_(d);
    for (std::size_t g = 0; g < d; ++g) {
        kt[g] = c[2 * g];
        st_[g] = c[2 * g + 1];
    }
    const double L2 = std::accumulate(k.begin(), k.end(), 0.0);
    const double W2 = std::accumulate(s.begin(), s.end(), 0.0);
    auto x0 = initial_multipliers(c, 2, 0, L2, cfg, 4);
    auto y0 = initial_multipliers(c, 2, 1, W2, cfg, 4);
    clip_products(y0, groups);
    std::vector<double> init(2 * d);
    for (std::size_t g = 0; g < d; ++g) {
        init[2 * g] = x0[g];
        init[2 * g + 1] = y0[g];
    }
    const auto st = run_solver(problem, init, update,
                               [&](std::vector<double>& v) { bosonic_guard(v, groups, 2, 1); }, cfg);
    const auto mult = to_mult(st.theta);
    fm.spec = ModelSpec::mixed(expand(mult, groups, 2, 0), expand(mult, groups, 2, 1));
    fm.residuals = residuals_for(fm.spec, k, s);
    finish(fm, st, cfg);
    return fm;
}

FitnessTargets fitness_targets(const WeightedGraph& g, const NodeAttributes& attrs, bool with_distance,
                               statmech::DistanceKernel kernel) {
    if (attrs.size() != g.size())
        throw InputError("node attributes do not match the graph");
    FitnessTargets t;
    t.links = static_cast<double>(g.num_links());
    if (with_distance)
        for (const Edge& e : g.edges())
            t.filling += statmech::apply_kernel(kernel, attrs.distance(e.i, e.j));
    return t;
}

FittedModel fit_fitness(const NodeAttributes& attrs, const FitnessTargets& targets, bool with_distance,
                        const SolverConfig& cfg, statmech::DistanceKernel kernel) {
    cfg.validate();
    const std::size_t n = attrs.size();
    if (n < 2)
        throw InputError("fitness fit needs at least two nodes");
    if (with_distance && !attrs.has_distances())
        throw InputError("distance fitness model requires positions or a distance matrix");
    const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
    const double L = targets.links;
    const double F = targets.filling;
    if (!(L >= 0.0) || L > pairs)
        throw InputError("link target must lie in [0, n(n-1)/2]");

    auto make_spec = [&](double z, double gamma) {
        return with_distance ? ModelSpec::fitness_distance(n, z, gamma, kernel) : ModelSpec::fitness(n, z);
    };

    // log(f_i f_j) and kernel values per pair, i < j
    std::vector<double> base, fd;
    base.reserve(static_cast<std::size_t>(pairs));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            base.push_back(std::log(attrs.fitness(i)) + std::log(attrs.fitness(j)));
            fd.push_back(with_distance ? statmech::apply_kernel(kernel, attrs.distance(i, j)) : 0.0);
        }

    auto resid = [&](double eL, double eF) {
        std::vector<double> r{std::abs(eL - L) / std::max(L, 1.0)};
        if (with_distance)
            r.push_back(std::abs(eF - F) / std::max(F, 1.0));
        return r;
    };

    FittedModel fm;
    fm.tolerance = cfg.tolerance;
    if (L == 0.0) {
        fm.spec = make_spec(0.0, 0.0);
        fm.residuals = resid(0.0, 0.0);
        fm.converged = true;
        fm.status = FitStatus::Converged;
        return fm;
    }
    if (L >= pairs)
        return infeasible(make_spec(0.0, 0.0), "complete graph: <L> = n(n-1)/2 needs z = infinity", cfg,
                          resid(0.0, 0.0));

    auto expected_links = [&](double lz, double gamma) {
        double s = 0.0;
        for (std::size_t q = 0; q < base.size(); ++q)
            s += 1.0 / (1.0 + std::exp(-(lz + base[q] - gamma * fd[q])));
        return s;
    };

    // scalar z by bisection on ln z; <L> is strictly increasing in z
    double lo = -1.0, hi = 1.0;
    {
        double mean_base = 0.0;
        for (double b : base)
            mean_base += b;
        mean_base /= static_cast<double>(base.size());
        const double guess = std::log(L / (pairs - L)) - mean_base;
        lo = guess - 1.0;
        hi = guess + 1.0;
    }
    while (expected_links(lo, 0.0) > L)
        lo -= 2.0 * (hi - lo);
    while (expected_links(hi, 0.0) < L)
        hi += 2.0 * (hi - lo);
    std::size_t iters = 0;
    double lz = 0.5 * (lo + hi);
    double eL = expected_links(lz, 0.0);
    while (iters < 400 && std::abs(eL - L) > cfg.tolerance * std::max(L, 1.0) * 1e-3 && hi - lo > 1e-15 * std::max(1.0, std::abs(lz))) {
        (eL < L ? lo : hi) = lz;
        lz = 0.5 * (lo + hi);
        eL = expected_links(lz, 0.0);
        ++iters;
    }

    if (!with_distance) {
        fm.spec = make_spec(std::exp(lz), 0.0);
        fm.iterations = iters;
        fm.residuals = resid(eL, 0.0);
        fm.converged = fm.max_residual() <= cfg.tolerance;
        fm.status = fm.converged ? FitStatus::Converged : FitStatus::NotConverged;
        if (!fm.converged)
            fm.diagnosis = "bisection ended above tolerance";
        return fm;
    }

    // (ln z, gamma): Newton on the convex negative log-likelihood
    struct Eval2 {
        double phi, eL, eF;
        Eigen::Matrix2d H;
    };
    auto evaluate = [&](double a, double gamma) {
        Eval2 e{-(L * a - gamma * F), 0.0, 0.0, Eigen::Matrix2d::Zero()};
        for (std::size_t q = 0; q < base.size(); ++q) {
            const double eta = a + base[q] - gamma * fd[q];
            const double p = 1.0 / (1.0 + std::exp(-eta));
            const double v = p * (1.0 - p);
            e.phi += softplus(eta);
            e.eL += p;
            e.eF += p * fd[q];
            e.H(0, 0) += v;
            e.H(0, 1) -= v * fd[q];
            e.H(1, 1) += v * fd[q] * fd[q];
        }
        e.H(1, 0) = e.H(0, 1);
        return e;
    };
    double gamma = 0.0;
    Eval2 ev = evaluate(lz, gamma);
    auto max_res = [&](const Eval2& e) {
        const auto r = resid(e.eL, e.eF);
        return *std::max_element(r.begin(), r.end());
    };
    double res = max_res(ev);
    std::size_t it = 0;
    while (res > cfg.tolerance && it < std::min<std::size_t>(cfg.max_iterations, 500)) {
        ++it;
        // gradient of phi: (<L> - L, F - <F>)
        const Eigen::Vector2d grad(ev.eL - L, F - ev.eF);
        Eigen::Vector2d step = -ev.H.ldlt().solve(grad);
        if (!step.allFinite())
            break;
        double t = 1.0;
        bool ok = false;
        for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
            const Eval2 cand = evaluate(lz + t * step[0], gamma + t * step[1]);
            if (!std::isfinite(cand.phi))
                continue;
            const double r = max_res(cand);
            if (cand.phi <= ev.phi + 1e-4 * t * grad.dot(step) || r < res) {
                lz += t * step[0];
                gamma += t * step[1];
                ev = cand;
                res = r;
                ok = true;
                break;
            }
        }
        if (!ok)
            break;
    }
    fm.spec = make_spec(std::exp(lz), gamma);
    fm.iterations = iters + it;
    fm.residuals = resid(ev.eL, ev.eF);
    fm.converged = res <= cfg.tolerance;
    fm.status = fm.converged ? FitStatus::Converged : FitStatus::NotConverged;
    if (!fm.converged)
        fm.diagnosis = "(z, gamma) system did not converge; the filling target may be unreachable";
    return fm;
}

FittedModel fit_fitness(const WeightedGraph& g, const NodeAttributes& attrs, bool with_distance,
                        const SolverConfig& cfg, statmech::DistanceKernel kernel) {
    return fit_fitness(attrs, fitness_targets(g, attrs, with_distance, kernel), with_distance, cfg, kernel);
}

FittedModel fit_model(const FitOptions& options, const WeightedGraph& g, const std::optional<NodeAttributes>& attrs,
                      const SolverConfig& cfg) {
    const auto k = values_or(degree(g), 0.0);
    const auto s = values_or(strength(g), 0.0);
    FittedModel fm;
    switch (options.family) {
    case Family::ErdosRenyi:
        fm = solve_er(g);
        break;
    case Family::BinaryCM:
        fm = solve_bcm(k, cfg);
        break;
    case Family::WeightedCM:
        fm = solve_wcm(s, cfg);
        break;
    case Family::BoundedCM:
        fm = solve_bounded(s, options.w_max, cfg);
        break;
    case Family::MixedBoseFermi:
        fm = solve_mixed(k, s, cfg);
        break;
    case Family::FitnessGDP:
    case Family::FitnessGDPDistance:
        if (!attrs)
            throw InputError("fitness models require node attributes");
        fm = fit_fitness(g, *attrs, options.family == Family::FitnessGDPDistance, cfg, options.kernel);
        break;
    }
    fm.labels = g.labels();
    return fm;
}

std::vector<double> constraint_residuals(const FittedModel& fm, const WeightedGraph& g,
                                         const std::optional<NodeAttributes>& attrs) {
    if (fm.spec.n != g.size())
        throw InputError("model has " + std::to_string(fm.spec.n) + " nodes but graph has " +
                         std::to_string(g.size()));
    const auto k = values_or(degree(g), 0.0);
    const auto s = values_or(strength(g), 0.0);
    switch (fm.spec.family) {
    case Family::ErdosRenyi: {
        const double n = static_cast<double>(g.size());
        const double L = static_cast<double>(g.num_links());
        return {std::abs(fm.spec.p * n * (n - 1.0) / 2.0 - L) / std::max(L, 1.0)};
    }
    case Family::FitnessGDP:
    case Family::FitnessGDPDistance: {
        if (!attrs)
            throw InputError("fitness models require node attributes");
        const bool with_distance = fm.spec.family == Family::FitnessGDPDistance;
        const auto t = fitness_targets(g, *attrs, with_distance, fm.spec.kernel);
        const Ensemble e(fm.spec, attrs);
        double eL = 0.0, eF = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
            for (std::size_t j = i + 1; j < g.size(); ++j) {
                const double p = e.pair(i, j).p;
                eL += p;
                if (with_distance)
                    eF += p * statmech::apply_kernel(fm.spec.kernel, attrs->distance(i, j));
            }
        std::vector<double> r{std::abs(eL - t.links) / std::max(t.links, 1.0)};
        if (with_distance)
            r.push_back(std::abs(eF - t.filling) / std::max(t.filling, 1.0));
        return r;
    }
    default:
        return residuals_for(fm.spec, k, s);
    }
}

} // namespace wtw
