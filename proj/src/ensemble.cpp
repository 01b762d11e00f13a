#include "wtw/ensemble.hpp"

#include "wtw/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace wtw {

namespace {

constexpr std::array<std::pair<Family, std::string_view>, 7> kFamilyNames{{
    {Family::ErdosRenyi, "er"},
    {Family::BinaryCM, "bcm"},
    {Family::WeightedCM, "wcm"},
    {Family::BoundedCM, "bounded"},
    {Family::MixedBoseFermi, "mixed"},
    {Family::FitnessGDP, "fitness"},
    {Family::FitnessGDPDistance, "fitness-dist"},
}};

void check_multipliers(const std::vector<double>& v, std::size_t n, const char* name) {
    if (v.size() != n)
        throw DomainError(std::string(name) + " has " + std::to_string(v.size()) + " entries, expected " +
                          std::to_string(n));
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] >= 0.0) || !std::isfinite(v[i]))
            throw DomainError(std::string(name) + "[" + std::to_string(i) + "] must be finite and non-negative");
    }
}

/// Largest y_i y_j over distinct pairs.
double max_pair_product(const std::vector<double>& y) {
    if (y.size() < 2)
        return 0.0;
    double a = 0.0, b = 0.0;
    for (double v : y) {
        if (v > a) {
            b = a;
            a = v;
        } else if (v > b) {
            b = v;
        }
    }
    return a * b;
}

} // namespace

std::string_view family_name(Family f) {
    for (const auto& [fam, name] : kFamilyNames)
        if (fam == f)
            return name;
    return "unknown";
}

std::optional<Family> parse_family(std::string_view name) {
    for (const auto& [fam, n] : kFamilyNames)
        if (n == name)
            return fam;
    return std::nullopt;
}

bool is_weighted(Family f) {
    return f == Family::WeightedCM || f == Family::BoundedCM || f == Family::MixedBoseFermi;
}

ModelSpec ModelSpec::erdos_renyi(std::size_t n, double p) {
    ModelSpec s;
    s.family = Family::ErdosRenyi;
    s.n = n;
    s.p = p;
    return s;
}

ModelSpec ModelSpec::binary_cm(std::vector<double> x) {
    ModelSpec s;
    s.family = Family::BinaryCM;
    s.n = x.size();
    s.x = std::move(x);
    return s;
}

ModelSpec ModelSpec::weighted_cm(std::vector<double> y) {
    ModelSpec s;
    s.family = Family::WeightedCM;
    s.n = y.size();
    s.y = std::move(y);
    return s;
}

ModelSpec ModelSpec::bounded_cm(std::vector<double> y, std::int64_t w_max) {
    ModelSpec s;
    s.family = Family::BoundedCM;
    s.n = y.size();
    s.y = std::move(y);
    s.w_max = w_max;
    return s;
}

ModelSpec ModelSpec::mixed(std::vector<double> x, std::vector<double> y) {
    ModelSpec s;
    s.family = Family::MixedBoseFermi;
    s.n = x.size();
    s.x = std::move(x);
    s.y = std::move(y);
    return s;
}

ModelSpec ModelSpec::fitness(std::size_t n, double z) {
    ModelSpec s;
    s.family = Family::FitnessGDP;
    s.n = n;
    s.z = z;
    return s;
}

ModelSpec ModelSpec::fitness_distance(std::size_t n, double z, double gamma, statmech::DistanceKernel kernel) {
    ModelSpec s;
    s.family = Family::FitnessGDPDistance;
    s.n = n;
    s.z = z;
    s.gamma = gamma;
    s.kernel = kernel;
    return s;
}

void ModelSpec::validate() const {
    switch (family) {
    case Family::ErdosRenyi:
        if (!(p >= 0.0 && p <= 1.0))
            throw DomainError("Erdos-Renyi p must lie in [0, 1]");
        break;
    case Family::BinaryCM:
        check_multipliers(x, n, "x");
        break;
    case Family::WeightedCM:
        check_multipliers(y, n, "y");
        if (max_pair_product(y) >= 1.0)
            throw DivergenceError("bosonic condensation: some y_i y_j >= 1");
        break;
    case Family::BoundedCM:
        check_multipliers(y, n, "y");
        if (w_max < 1)
            throw DomainError("w_max must be at least 1");
        break;
    case Family::MixedBoseFermi:
        check_multipliers(x, n, "x");
        check_multipliers(y, n, "y");
        if (n >= 2 && std::all_of(y.begin(), y.end(), [](double v) { return v == 1.0; }))
            throw DomainError("mixed model with y = 1 (no strength constraints) is undefined: expected weights diverge");
        if (max_pair_product(y) >= 1.0)
            throw DivergenceError("bosonic condensation: some y_i y_j >= 1");
        break;
    case Family::FitnessGDP:
    case Family::FitnessGDPDistance:
        if (!(z >= 0.0) || !std::isfinite(z))
            throw DomainError("z must be finite and non-negative");
        if (!std::isfinite(gamma))
            throw DomainError("gamma must be finite");
        break;
    }
}

Ensemble::Ensemble(ModelSpec spec, std::optional<NodeAttributes> attrs)
    : spec_(std::move(spec)), attrs_(std::move(attrs)) {
    spec_.validate();
    if (spec_.family == Family::FitnessGDP || spec_.family == Family::FitnessGDPDistance) {
        if (!attrs_)
            throw InputError("fitness models require node attributes");
        if (attrs_->size() != spec_.n)
            throw InputError("node attributes do not match the model size");
        if (spec_.family == Family::FitnessGDPDistance && !attrs_->has_distances())
            throw InputError("distance fitness model requires positions or a distance matrix");
    }
}

double Ensemble::fitness_product(std::size_t i, std::size_t j) const {
    const double base = spec_.z * attrs_->fitness(i) * attrs_->fitness(j);
    if (spec_.family != Family::FitnessGDPDistance || spec_.gamma == 0.0)
        return base;
    return base * std::exp(-spec_.gamma * statmech::apply_kernel(spec_.kernel, attrs_->distance(i, j)));
}

statmech::PairStatistics Ensemble::pair(std::size_t i, std::size_t j) const {
    if (i == j)
        return {};
    switch (spec_.family) {
    case Family::ErdosRenyi:
        return {spec_.p, spec_.p};
    case Family::BinaryCM: {
        const double p = statmech::fd_probability_from_product(spec_.x[i] * spec_.x[j]);
        return {p, p};
    }
    case Family::WeightedCM:
        return statmech::be_stats_from_product(spec_.y[i] * spec_.y[j]);
    case Family::BoundedCM: {
        const double y = spec_.y[i] * spec_.y[j];
        return {statmech::bounded_nonzero_probability(y, spec_.w_max),
                statmech::bounded_expected_weight(y, spec_.w_max)};
    }
    case Family::MixedBoseFermi:
        return statmech::mixed_stats_from_products(spec_.x[i] * spec_.x[j], spec_.y[i] * spec_.y[j]);
    case Family::FitnessGDP:
    case Family::FitnessGDPDistance: {
        const double v = fitness_product(i, j);
        const double p = std::isinf(v) ? 1.0 : v / (1.0 + v);
        return {p, p};
    }
    }
    return {};
}

double Ensemble::log_pmf(std::size_t i, std::size_t j, Weight w) const {
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    const bool linked = w > 0;
    switch (spec_.family) {
    case Family::ErdosRenyi:
        if (linked)
            return spec_.p == 0.0 ? kNegInf : std::log(spec_.p);
        return spec_.p == 1.0 ? kNegInf : std::log1p(-spec_.p);
    case Family::BinaryCM:
        return statmech::fd_log_pmf(spec_.x[i] * spec_.x[j], linked);
    case Family::WeightedCM:
        return statmech::be_log_pmf(spec_.y[i] * spec_.y[j], w);
    case Family::BoundedCM:
        if (w > spec_.w_max)
            return kNegInf;
        return statmech::bounded_log_pmf(spec_.y[i] * spec_.y[j], spec_.w_max, w);
    case Family::MixedBoseFermi:
        return statmech::mixed_log_pmf(spec_.x[i] * spec_.x[j], spec_.y[i] * spec_.y[j], w);
    case Family::FitnessGDP:
    case Family::FitnessGDPDistance: {
        const double v = fitness_product(i, j);
        if (linked)
            return v == 0.0 ? kNegInf : -std::log1p(1.0 / v);
        return -std::log1p(v);
    }
    }
    return kNegInf;
}

Weight Ensemble::draw(std::size_t i, std::size_t j, double u1, double u2) const {
    switch (spec_.family) {
    case Family::WeightedCM: {
        const double yy = spec_.y[i] * spec_.y[j];
        if (yy == 0.0)
            return 0;
        return static_cast<Weight>(std::floor(std::log(u1) / std::log(yy)));
    }
    case Family::BoundedCM:
        return statmech::bounded_draw(spec_.y[i] * spec_.y[j], spec_.w_max, u1);
    case Family::MixedBoseFermi: {
        const double xx = spec_.x[i] * spec_.x[j];
        const double yy = spec_.y[i] * spec_.y[j];
        if (xx == 0.0 || yy == 0.0)
            return 0;
        const double q0 = (1.0 - yy) / ((1.0 - yy) + xx * yy);
        if (u1 < q0)
            return 0;
        return 1 + static_cast<Weight>(std::floor(std::log(u2) / std::log(yy)));
    }
    default:
        return u1 < pair(i, j).p ? 1 : 0;
    }
}

PairMatrix materialize(const Ensemble& ensemble) {
    const std::size_t n = ensemble.size();
    PairMatrix m{n, std::vector<double>(n * n, 0.0), std::vector<double>(n * n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto st = ensemble.pair(i, j);
            m.p[i * n + j] = m.p[j * n + i] = st.p;
            m.ew[i * n + j] = m.ew[j * n + i] = st.ew;
        }
    }
    return m;
}

PairMatrix observed_pairs(const WeightedGraph& g) {
    const std::size_t n = g.size();
    PairMatrix m{n, std::vector<double>(n * n, 0.0), std::vector<double>(n * n, 0.0)};
    for (const Edge& e : g.edges()) {
        m.p[e.i * n + e.j] = m.p[e.j * n + e.i] = 1.0;
        m.ew[e.i * n + e.j] = m.ew[e.j * n + e.i] = static_cast<double>(e.w);
    }
    return m;
}

LogLikelihood log_likelihood(const ModelSpec& spec, const WeightedGraph& g,
                             const std::optional<NodeAttributes>& attrs) {
    if (spec.n != g.size())
        throw InputError("model has " + std::to_string(spec.n) + " nodes but graph has " + std::to_string(g.size()));
    const Ensemble ensemble(spec, attrs);
    LogLikelihood ll;
    const std::size_t n = g.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double term = ensemble.log_pmf(i, j, g.weight(i, j));
            if (term == -std::numeric_limits<double>::infinity()) {
                if (!ll.impossible_pair)
                    ll.impossible_pair = std::make_pair(i, j);
                ll.value = term;
            } else if (ll.finite()) {
                ll.value += term;
            }
        }
    }
    return ll;
}

} // namespace wtw
