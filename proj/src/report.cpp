#include "wtw/report.hpp"

#include "csv.hpp"
#include "wtw/errors.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace wtw {

namespace {

std::string cell(const std::optional<double>& v) { return v ? detail::format_double(*v) : std::string(); }

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> number_or_null(const Json& j) {
    if (j.is_null())
        return std::nullopt;
    return j.get<double>();
}

template <class T>
T require(const Json& j, const char* key) {
    if (!j.contains(key))
        throw InputError(std::string("JSON is missing '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("JSON field '") + key + "': " + e.what());
    }
}

std::string_view kernel_name(statmech::DistanceKernel k) {
    return k == statmech::DistanceKernel::Log ? "log" : "identity";
}

statmech::DistanceKernel parse_kernel(const std::string& s) {
    if (s == "identity")
        return statmech::DistanceKernel::Identity;
    if (s == "log")
        return statmech::DistanceKernel::Log;
    throw InputError("unknown distance kernel '" + s + "'");
}

} // namespace

Json to_json(const FittedModel& fm) {
    const ModelSpec& s = fm.spec;
    Json params = Json::object();
    switch (s.family) {
    case Family::ErdosRenyi:
        params["n"] = s.n;
        params["p"] = s.p;
        break;
    case Family::BinaryCM:
        params["x"] = s.x;
        break;
    case Family::WeightedCM:
        params["y"] = s.y;
        break;
    case Family::BoundedCM:
        params["y"] = s.y;
        params["w_max"] = s.w_max;
        break;
    case Family::MixedBoseFermi:
        params["x"] = s.x;
        params["y"] = s.y;
        break;
    case Family::FitnessGDP:
        params["n"] = s.n;
        params["z"] = s.z;
        break;
    case Family::FitnessGDPDistance:
        params["n"] = s.n;
        params["z"] = s.z;
        params["gamma"] = s.gamma;
        params["kernel"] = kernel_name(s.kernel);
        break;
    }
    Json j;
    j["family"] = family_name(s.family);
    j["parameters"] = params;
    j["residuals"] = fm.residuals;
    j["max_residual"] = fm.max_residual();
    j["iterations"] = fm.iterations;
    j["converged"] = fm.converged;
    j["tolerance"] = fm.tolerance;
    j["status"] = status_name(fm.status);
    j["diagnosis"] = fm.diagnosis;
    j["nodes"] = fm.labels;
    return j;
}

FittedModel fitted_model_from_json(const Json& j) {
    const auto family = parse_family(require<std::string>(j, "family"));
    if (!family)
        throw InputError("unknown model family '" + j.at("family").get<std::string>() + "'");
    const Json params = require<Json>(j, "parameters");
    ModelSpec s;
    switch (*family) {
    case Family::ErdosRenyi:
        s = ModelSpec::erdos_renyi(require<std::size_t>(params, "n"), require<double>(params, "p"));
        break;
    case Family::BinaryCM:
        s = ModelSpec::binary_cm(require<std::vector<double>>(params, "x"));
        break;
    case Family::WeightedCM:
        s = ModelSpec::weighted_cm(require<std::vector<double>>(params, "y"));
        break;
    case Family::BoundedCM:
        s = ModelSpec::bounded_cm(require<std::vector<double>>(params, "y"), require<std::int64_t>(params, "w_max"));
        break;
    case Family::MixedBoseFermi:
        s = ModelSpec::mixed(require<std::vector<double>>(params, "x"), require<std::vector<double>>(params, "y"));
        if (s.x.size() != s.y.size())
            throw InputError("mixed model x and y differ in length");
        break;
    case Family::FitnessGDP:
        s = ModelSpec::fitness(require<std::size_t>(params, "n"), require<double>(params, "z"));
        break;
    case Family::FitnessGDPDistance:
        s = ModelSpec::fitness_distance(require<std::size_t>(params, "n"), require<double>(params, "z"),
                                        require<double>(params, "gamma"),
                                        parse_kernel(params.value("kernel", std::string("identity"))));
        break;
    }
    try {
        s.validate();
    } catch (const DomainError& e) {
        throw InputError(std::string("invalid model parameters: ") + e.what());
    }
    FittedModel fm;
    fm.spec = std::move(s);
    fm.residuals = j.value("residuals", std::vector<double>{});
    fm.iterations = j.value("iterations", std::size_t{0});
    fm.converged = j.value("converged", false);
    fm.tolerance = j.value("tolerance", 0.0);
    const std::string status = j.value("status", std::string(fm.converged ? "converged" : "not_converged"));
    if (status == "converged")
        fm.status = FitStatus::Converged;
    else if (status == "infeasible")
        fm.status = FitStatus::Infeasible;
    else
        fm.status = FitStatus::NotConverged;
    fm.diagnosis = j.value("diagnosis", std::string());
    fm.labels = j.value("nodes", std::vector<std::string>{});
    return fm;
}

Json to_json(const GravityFit& fit) {
    Json j;
    j["mode"] = gravity_mode_name(fit.mode);
    j["lnK"] = fit.lnK;
    j["alpha"] = fit.alpha;
    j["beta"] = fit.beta;
    j["gamma"] = fit.gamma;
    j["r_squared"] = fit.r_squared;
    j["n_obs"] = fit.n_obs;
    j["n_excluded"] = fit.n_excluded;
    return j;
}

GravityFit gravity_fit_from_json(const Json& j) {
    GravityFit fit;
    fit.mode = j.value("mode", std::string("fitted")) == "canonical" ? GravityMode::Canonical : GravityMode::Fitted;
    fit.lnK = require<double>(j, "lnK");
    fit.alpha = require<double>(j, "alpha");
    fit.beta = require<double>(j, "beta");
    fit.gamma = require<double>(j, "gamma");
    fit.r_squared = j.value("r_squared", 0.0);
    fit.n_obs = j.value("n_obs", std::size_t{0});
    fit.n_excluded = j.value("n_excluded", std::size_t{0});
    return fit;
}

Json report_summary(const ComparisonReport& r) {
    Json j;
    j["model"] = r.model;
    j["estimator"] = r.estimator;
    Json corr = Json::object();
    for (const auto& mc : r.metrics)
        corr[mc.metric] = optional_number(r.correlations.at(mc.metric));
    j["correlations"] = corr;
    j["observed_density"] = r.observed_density;
    j["expected_density"] = r.expected_density;
    j["seed"] = r.seed ? Json(*r.seed) : Json(nullptr);
    j["m"] = r.m ? Json(*r.m) : Json(nullptr);
    j["n"] = r.nodes.size();
    Json metrics = Json::array();
    for (const auto& mc : r.metrics)
        metrics.push_back(mc.metric);
    j["metrics"] = metrics;
    if (r.gravity) {
        Json g;
        g["expected_density"] = r.gravity->expected_density;
        g["complete_topology"] = r.gravity->complete_topology;
        g["diagnosis"] = r.gravity->diagnosis;
        g["fit"] = to_json(r.gravity->fit);
        j["gravity"] = g;
    } else {
        j["gravity"] = nullptr;
    }
    return j;
}

void write_report_csv(std::ostream& out, const ComparisonReport& r) {
    const bool grav = r.gravity.has_value();
    out << "node,metric,observed,expected,defined" << (grav ? ",gravity" : "") << '\n';
    for (const auto& mc : r.metrics) {
        for (std::size_t i = 0; i < r.nodes.size(); ++i) {
            out << detail::csv_field(r.nodes[i]) << ',' << mc.metric << ',' << cell(mc.observed[i]) << ','
                << cell(mc.expected[i]) << ',' << ((mc.observed[i] && mc.expected[i]) ? 1 : 0);
            if (grav)
                out << ',' << (mc.gravity ? cell((*mc.gravity)[i]) : std::string());
            out << '\n';
        }
    }
}

ComparisonReport read_report(std::istream& csv, const Json& summary) {
    ComparisonReport r;
    r.model = require<std::string>(summary, "model");
    r.estimator = summary.value("estimator", std::string("plug-in"));
    r.observed_density = require<double>(summary, "observed_density");
    r.expected_density = require<double>(summary, "expected_density");
    if (summary.contains("seed") && !summary["seed"].is_null())
        r.seed = summary["seed"].get<std::uint64_t>();
    if (summary.contains("m") && !summary["m"].is_null())
        r.m = summary["m"].get<std::size_t>();
    const auto names = require<std::vector<std::string>>(summary, "metrics");
    const std::size_t n = require<std::size_t>(summary, "n");
    const Json corr = require<Json>(summary, "correlations");
    for (const auto& name : names)
        r.correlations[name] = corr.contains(name) ? number_or_null(corr.at(name)) : std::nullopt;
    const bool grav = summary.contains("gravity") && !summary["gravity"].is_null();
    if (grav) {
        const Json& g = summary["gravity"];
        r.gravity = GravityReference{gravity_fit_from_json(require<Json>(g, "fit")),
                                     require<double>(g, "expected_density"), require<bool>(g, "complete_topology"),
                                     require<std::string>(g, "diagnosis")};
    }

    std::map<std::string, std::size_t> slot;
    for (const auto& name : names) {
        slot[name] = r.metrics.size();
        MetricComparison mc{name, MetricVector(n), MetricVector(n), std::nullopt};
        if (grav)
            mc.gravity = MetricVector(n);
        r.metrics.push_back(std::move(mc));
    }

    std::string line;
    std::size_t line_no = 0;
    if (!detail::next_line(csv, line, line_no))
        throw InputError("report CSV is empty");
    std::vector<std::size_t> seen(names.size(), 0);
    while (detail::next_line(csv, line, line_no)) {
        const auto cells = detail::split_csv(line);
        if (cells.size() < 5)
            throw InputError("line " + std::to_string(line_no) + ": expected at least 5 columns");
        const auto it = slot.find(cells[1]);
        if (it == slot.end())
            throw InputError("line " + std::to_string(line_no) + ": unknown metric '" + cells[1] + "'");
        auto& mc = r.metrics[it->second];
        const std::size_t i = seen[it->second]++;
        if (i >= n)
            throw InputError("line " + std::to_string(line_no) + ": too many rows for metric " + cells[1]);
        if (it->second == 0)
            r.nodes.push_back(cells[0]);
        mc.observed[i] = detail::parse_double(cells[2]);
        mc.expected[i] = detail::parse_double(cells[3]);
        if (grav && cells.size() > 5)
            (*mc.gravity)[i] = detail::parse_double(cells[5]);
    }
    return r;
}

void write_expected_csv(std::ostream& out, const std::vector<std::string>& nodes, const ExpectedMetrics& em) {
    const bool weighted = !em.s.empty();
    out << "node,k,knn,c" << (weighted ? ",s,snn,cw,snn_norm" : "") << '\n';
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        out << detail::csv_field(nodes[i]) << ',' << cell(em.k[i]) << ',' << cell(em.knn[i]) << ',' << cell(em.c[i]);
        if (weighted) {
            std::optional<double> norm;
            if (em.snn[i] && em.total_weight > 0.0)
                norm = *em.snn[i] / em.total_weight;
            out << ',' << cell(em.s[i]) << ',' << cell(em.snn[i]) << ',' << cell(em.cw[i]) << ',' << cell(norm);
        }
        out << '\n';
    }
}

void write_samples_csv(std::ostream& out, const std::vector<std::string>& nodes, const SampleSet& set) {
    out << "node,metric,mean,se,defined_samples\n";
    for (const auto& mc : set.metrics)
        for (std::size_t i = 0; i < nodes.size(); ++i)
            out << detail::csv_field(nodes[i]) << ',' << mc.metric << ',' << cell(mc.mean[i]) << ','
                << cell(mc.se[i]) << ',' << mc.defined[i] << '\n';
}

Json samples_summary(const SampleSet& set) {
    Json j;
    j["model"] = set.model;
    j["seed"] = set.seed;
    j["m"] = set.m;
    j["links"] = {{"mean", set.links.mean}, {"se", set.links.se}};
    j["total_weight"] = {{"mean", set.total_weight.mean}, {"se", set.total_weight.se}};
    Json metrics = Json::array();
    for (const auto& mc : set.metrics)
        metrics.push_back(mc.metric);
    j["metrics"] = metrics;
    return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    out.flush();
    if (!out)
        throw IoError("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace wtw
