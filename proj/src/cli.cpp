#include "wtw/cli.hpp"

#include "wtw/analytics.hpp"
#include "wtw/errors.hpp"
#include "wtw/gravity.hpp"
#include "wtw/report.hpp"
#include "wtw/sampling.hpp"
#include "wtw/solver.hpp"
#include "wtw/synth.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;

namespace wtw::cli {

namespace {

struct RunConfig {
    std::string edges;
    std::string attrs;
    std::string distances;
    std::string model = "bcm";
    std::string fitted;
    std::string out = ".";
    std::string kernel = "identity";
    std::string gravity_mode = "fitted";
    std::int64_t wmax = 1;
    double unit = 1.0;
    double tol = 1e-10;
    std::size_t max_iter = 100000;
    std::size_t m = 1000;
    std::size_t threads = 1;
    std::uint64_t seed = 0;
    bool with_gravity = false;
    bool cw = false;
    std::string config;
};

struct SynthOptions {
    SynthConfig cfg;
    std::optional<double> z;
    std::string kernel = "identity";
    std::string out = ".";
    std::string config;
};

const std::vector<std::string> kModels{"er", "bcm", "wcm", "bounded", "mixed", "fitness", "fitness-dist", "gravity"};

bool is_fitness(const std::string& model) { return model == "fitness" || model == "fitness-dist"; }

bool has_path(const std::string& p) { return !p.empty() && p != "none"; }

statmech::DistanceKernel kernel_of(const std::string& k) {
    return k == "log" ? statmech::DistanceKernel::Log : statmech::DistanceKernel::Identity;
}

/// Reads `key = value` lines ('#' comments) into `--key=value` tokens.
std::vector<std::string> config_tokens(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot read config file " + path);
    std::vector<std::string> tokens;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos)
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r\"");
            const auto e = s.find_last_not_of(" \t\r\"");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || key == "config")
            throw InputError(path + ":" + std::to_string(line_no) + ": invalid key");
        tokens.push_back("--" + key + "=" + value);
    }
    return tokens;
}

/// Command line with config-file entries inserted right after the subcommand, so
/// that explicit flags (parsed later, last value wins) override the file.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
    }
    if (path.empty() || args.empty())
        return args;
    const auto tokens = config_tokens(path);
    args.insert(args.begin() + 1, tokens.begin(), tokens.end());
    return args;
}

void add_common(CLI::App& sub, RunConfig& rc) {
    sub.add_option("--edges", rc.edges, "Edge list CSV (src,dst,weight)");
    sub.add_option("--attrs", rc.attrs, "Node attributes CSV (node,fitness[,lat,lon]); 'none' for no attributes");
    sub.add_option("--distances", rc.distances, "Distance matrix CSV with labels in first row and column");
    sub.add_option("--model", rc.model, "Model family")->check(CLI::IsMember(kModels));
    sub.add_option("--fitted", rc.fitted, "Previously fitted model JSON instead of fitting inline");
    sub.add_option("--wmax", rc.wmax, "Maximum weight of the bounded model");
    sub.add_option("--unit", rc.unit, "Weight quantization unit");
    sub.add_option("--tol", rc.tol, "Solver tolerance on the relative residual");
    sub.add_option("--max-iter", rc.max_iter, "Solver iteration cap");
    sub.add_option("--kernel", rc.kernel, "Distance kernel f(d)")->check(CLI::IsMember({"identity", "log"}));
    sub.add_option("--gravity-mode", rc.gravity_mode, "Gravity exponents")->check(CLI::IsMember({"fitted", "canonical"}));
    sub.add_option("--seed", rc.seed, "Random seed");
    sub.add_option("--threads", rc.threads, "Worker threads");
    sub.add_option("--out", rc.out, "Output directory");
    sub.add_option("--config", rc.config, "key = value file; flags override it");
}

// ---------------------------------------------------------------------------

struct Inputs {
    std::optional<WeightedGraph> graph;
    std::optional<NodeAttributes> attrs;
    std::vector<std::string> labels;
};

bool needs_attrs(const RunConfig& rc) { return is_fitness(rc.model) || rc.model == "gravity" || rc.with_gravity; }

bool needs_distances(const RunConfig& rc) {
    return rc.model == "fitness-dist" || rc.model == "gravity" || rc.with_gravity;
}

void validate(const RunConfig& rc, const std::string& command) {
    const bool need_graph = command != "sample" || rc.fitted.empty();
    if (need_graph && rc.edges.empty())
        throw InputError("--edges is required");
    if (needs_attrs(rc) && !has_path(rc.attrs))
        throw InputError("model '" + rc.model + "'" + (rc.with_gravity ? " with gravity" : "") +
                         " requires node attributes (--attrs)");
    for (const auto& [flag, p] : {std::pair<const char*, std::string>{"--edges", rc.edges},
                                  {"--attrs", has_path(rc.attrs) ? rc.attrs : ""},
                                  {"--distances", rc.distances},
                                  {"--fitted", rc.fitted}})
        if (!p.empty() && !fs::is_regular_file(p))
            throw InputError(std::string(flag) + ": no such file '" + p + "'");
    if (!rc.distances.empty() && !has_path(rc.attrs))
        throw InputError("--distances requires --attrs");
    if (rc.wmax < 1)
        throw InputError("--wmax must be at least 1");
    if (rc.model != "bounded" && rc.wmax != 1 && rc.fitted.empty())
        throw InputError("--wmax only applies to the bounded model");
    if (!(rc.unit > 0.0) || !std::isfinite(rc.unit))
        throw InputError("--unit must be positive");
    if (rc.m < 1)
        throw InputError("--m must be at least 1");
    if (rc.threads < 1)
        throw InputError("--threads must be at least 1");
    if (rc.model == "gravity" && command == "sample")
        throw InputError("the gravity model has no sampling law");
    if (rc.model == "gravity" && rc.with_gravity)
        throw InputError("--with-gravity is redundant with --model gravity");
    SolverConfig cfg;
    cfg.tolerance = rc.tol;
    cfg.max_iterations = rc.max_iter;
    cfg.validate();
}

void prepare_out(const std::string& out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out))
        throw IoError("cannot create output directory " + out);
}

Inputs load_inputs(const RunConfig& rc) {
    Inputs in;
    std::optional<AttributeTable> table;
    if (has_path(rc.attrs))
        table = load_attribute_table(fs::path(rc.attrs));
    if (!rc.edges.empty()) {
        LoadOptions lo;
        lo.unit = rc.unit;
        if (table)
            lo.extra_nodes = table->nodes;
        in.graph = load_graph(fs::path(rc.edges), lo);
        in.labels = in.graph->labels();
    }
    if (table) {
        std::optional<DistanceTable> dist;
        if (!rc.distances.empty())
            dist = load_distance_table(fs::path(rc.distances));
        if (in.graph) {
            in.attrs = align_attributes(*in.graph, *table, dist ? &*dist : nullptr);
        } else {
            const auto g = WeightedGraph(table->nodes, {});
            in.attrs = align_attributes(g, *table, dist ? &*dist : nullptr);
            in.labels = table->nodes;
        }
        if (needs_distances(rc) && !in.attrs->has_distances())
            throw InputError("model '" + rc.model + "' needs distances: give lat,lon columns or --distances");
    }
    return in;
}

SolverConfig solver_config(const RunConfig& rc) {
    SolverConfig cfg;
    cfg.tolerance = rc.tol;
    cfg.max_iterations = rc.max_iter;
    cfg.seed = rc.seed;
    return cfg;
}

GravityMode gravity_mode(const RunConfig& rc) {
    return rc.gravity_mode == "canonical" ? GravityMode::Canonical : GravityMode::Fitted;
}

/// Fitted model from --fitted or an inline fit.
FittedModel obtain_model(const RunConfig& rc, const Inputs& in) {
    FittedModel fm;
    if (!rc.fitted.empty()) {
        Json j;
        try {
            j = Json::parse(read_text(rc.fitted));
        } catch (const Json::parse_error& e) {
            throw InputError("--fitted: " + std::string(e.what()));
        }
        fm = fitted_model_from_json(j);
        const std::size_t n = in.graph ? in.graph->size() : in.labels.size();
        if (n != 0 && fm.spec.n != n)
            throw InputError("fitted model has " + std::to_string(fm.spec.n) + " nodes but the input has " +
                             std::to_string(n));
        if (in.graph && !fm.labels.empty() && fm.labels != in.graph->labels())
            throw InputError("fitted model node labels do not match the graph");
        if ((fm.spec.family == Family::FitnessGDP || fm.spec.family == Family::FitnessGDPDistance) && !in.attrs)
            throw InputError("fitness models require node attributes (--attrs)");
        return fm;
    }
    FitOptions opt;
    opt.family = *parse_family(rc.model);
    opt.w_max = rc.wmax;
    opt.kernel = kernel_of(rc.kernel);
    return fit_model(opt, *in.graph, in.attrs, solver_config(rc));
}

int status_exit(const FittedModel& fm) {
    if (fm.status == FitStatus::Infeasible) {
        std::cerr << "infeasible: " << fm.diagnosis << '\n';
        return kExitInvalid;
    }
    if (!fm.converged) {
        std::cerr << "not converged: " << fm.diagnosis << '\n';
        return kExitNotConverged;
    }
    return kExitOk;
}

void print_fit(std::ostream& os, const FittedModel& fm) {
    os << "model " << family_name(fm.spec.family) << ": " << status_name(fm.status) << ", " << fm.iterations
       << " iterations, max relative residual " << fm.max_residual() << '\n';
}

int cmd_fit(const RunConfig& rc) {
    const Inputs in = load_inputs(rc);
    if (rc.model == "gravity") {
        const GravityFit fit = fit_gravity(*in.graph, *in.attrs, gravity_mode(rc));
        write_text(fs::path(rc.out) / "gravity.json", dump(to_json(fit)));
        std::cout << "gravity (" << gravity_mode_name(fit.mode) << "): lnK " << fit.lnK << ", alpha " << fit.alpha
                  << ", beta " << fit.beta << ", gamma " << fit.gamma << ", R^2 " << fit.r_squared << ", "
                  << fit.n_obs << " flows (" << fit.n_excluded << " zero pairs excluded)\n";
        return kExitOk;
    }
    const FittedModel fm = obtain_model(rc, in);
    write_text(fs::path(rc.out) / "model.json", dump(to_json(fm)));
    print_fit(std::cout, fm);
    return status_exit(fm);
}

int cmd_expect(const RunConfig& rc) {
    const Inputs in = load_inputs(rc);
    if (rc.model == "gravity" && rc.fitted.empty()) {
        const GravityFit fit = fit_gravity(*in.graph, *in.attrs, gravity_mode(rc));
        const ExpectedMetrics em = expected_metrics(predict_gravity(fit, *in.attrs, in.graph->unit()), true);
        std::ostringstream csv;
        write_expected_csv(csv, in.labels, em);
        write_text(fs::path(rc.out) / "expected.csv", csv.str());
        write_text(fs::path(rc.out) / "gravity.json", dump(to_json(fit)));
        std::cout << "gravity expected density " << em.density << '\n';
        return kExitOk;
    }
    const FittedModel fm = obtain_model(rc, in);
    if (fm.status == FitStatus::Infeasible)
        return status_exit(fm);
    const ExpectedMetrics em = expected_metrics(fm, in.attrs);
    std::ostringstream csv;
    write_expected_csv(csv, fm.labels.empty() ? in.labels : fm.labels, em);
    write_text(fs::path(rc.out) / "expected.csv", csv.str());
    write_text(fs::path(rc.out) / "model.json", dump(to_json(fm)));
    print_fit(std::cout, fm);
    std::cout << "expected links " << em.links << ", density " << em.density;
    if (fm.spec.weighted() && em.total_weight > 0.0) {
        MetricVector norm(em.snn.size());
        for (std::size_t i = 0; i < em.snn.size(); ++i)
            if (em.snn[i])
                norm[i] = *em.snn[i] / em.total_weight;
        double mean = 0.0, count = 0.0;
        for (const auto& v : norm)
            if (v) {
                mean += *v;
                count += 1.0;
            }
        std::cout << "; s^nn / W mean " << mean / count << " (2/n = " << 2.0 / static_cast<double>(em.snn.size())
                  << "), CV " << coefficient_of_variation(norm).value_or(0.0);
    }
    std::cout << '\n';
    return status_exit(fm);
}

int cmd_sample(const RunConfig& rc) {
    const Inputs in = load_inputs(rc);
    const FittedModel fm = obtain_model(rc, in);
    if (fm.status == FitStatus::Infeasible)
        return status_exit(fm);
    SampleOptions opt;
    opt.threads = rc.threads;
    opt.weighted_clustering = rc.cw;
    const SampleSet set = sample(fm, rc.m, rc.seed, in.attrs, opt);
    const auto& labels = !fm.labels.empty() ? fm.labels : in.labels;
    std::vector<std::string> nodes = labels;
    if (nodes.size() != fm.spec.n) {
        nodes.clear();
        for (std::size_t i = 0; i < fm.spec.n; ++i)
            nodes.push_back(std::to_string(i));
    }
    std::ostringstream csv;
    write_samples_csv(csv, nodes, set);
    write_text(fs::path(rc.out) / "samples.csv", csv.str());
    write_text(fs::path(rc.out) / "samples.json", dump(samples_summary(set)));
    std::cout << "sampled " << set.m << " graphs (seed " << set.seed << "): L = " << set.links.mean << " +- "
              << set.links.se << ", W = " << set.total_weight.mean << " +- " << set.total_weight.se << '\n';
    return status_exit(fm);
}

int cmd_compare(const RunConfig& rc, bool monte_carlo) {
    const Inputs in = load_inputs(rc);
    std::optional<GravityFit> grav;
    if (rc.with_gravity || rc.model == "gravity")
        grav = fit_gravity(*in.graph, *in.attrs, gravity_mode(rc));

    ComparisonReport report;
    int code = kExitOk;
    std::optional<FittedModel> fm;
    if (rc.model == "gravity" && rc.fitted.empty()) {
        report = compare(*in.graph, predict_gravity(*grav, *in.attrs, in.graph->unit()), "gravity", true, grav,
                         in.attrs);
    } else {
        fm = obtain_model(rc, in);
        if (fm->status == FitStatus::Infeasible)
            return status_exit(*fm);
        report = compare(*in.graph, *fm, in.attrs, grav);
        code = status_exit(*fm);
        write_text(fs::path(rc.out) / "model.json", dump(to_json(*fm)));
    }
    if (monte_carlo && fm) {
        SampleOptions opt;
        opt.threads = rc.threads;
        const SampleSet set = sample(*fm, rc.m, rc.seed, in.attrs, opt);
        std::ostringstream csv;
        write_samples_csv(csv, in.graph->labels(), set);
        write_text(fs::path(rc.out) / "samples.csv", csv.str());
        report.seed = rc.seed;
        report.m = rc.m;
    }
    std::ostringstream csv;
    write_report_csv(csv, report);
    write_text(fs::path(rc.out) / "report.csv", csv.str());
    write_text(fs::path(rc.out) / "summary.json", dump(report_summary(report)));

    std::cout << "model " << report.model << " (" << report.estimator << "): observed density "
              << report.observed_density << ", expected density " << report.expected_density << '\n';
    for (const auto& mc : report.metrics) {
        const auto& c = report.correlations.at(mc.metric);
        std::cout << "  corr(" << mc.metric << ") = ";
        if (c)
            std::cout << *c;
        else
            std::cout << "undefined";
        std::cout << '\n';
    }
    if (report.gravity)
        std::cout << "  gravity: " << report.gravity->diagnosis << '\n';
    return code;
}

int cmd_synth(const SynthOptions& so) {
    SynthConfig cfg = so.cfg;
    cfg.z = so.z;
    cfg.kernel = kernel_of(so.kernel);
    cfg.validate();
    prepare_out(so.out);
    const SynthNetwork net = synthesize(cfg);
    std::ostringstream edges, attrs;
    write_edge_list(edges, net.graph);
    write_attribute_table(attrs, net.attributes);
    write_text(fs::path(so.out) / "edges.csv", edges.str());
    write_text(fs::path(so.out) / "attributes.csv", attrs.str());
    std::cout << "synthesized n = " << net.graph.size() << ", L = " << net.graph.num_links() << ", density "
              << (net.graph.size() >= 2 ? density(net.graph) : 0.0) << ", W = " << net.graph.total_weight()
              << ", z = " << net.z << '\n';
    return kExitOk;
}

} // namespace

int run(int argc, char** argv) {
    CLI::App app{"Maximum-entropy null models for weighted trade-like networks", "wtw"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);

    RunConfig rc;
    auto* fit = app.add_subcommand("fit", "Fit a model and write model.json (gravity.json for --model gravity)");
    add_common(*fit, rc);
    auto* expect = app.add_subcommand("expect", "Plug-in expected metrics (expected.csv)");
    add_common(*expect, rc);
    auto* samp = app.add_subcommand("sample", "Monte Carlo means and standard errors (samples.csv)");
    add_common(*samp, rc);
    samp->add_option("--m", rc.m, "Number of sampled graphs");
    samp->add_flag("--cw", rc.cw, "Also estimate weighted clustering");
    auto* cmp = app.add_subcommand("compare", "Observed versus expected report (report.csv, summary.json)");
    add_common(*cmp, rc);
    cmp->add_flag("--with-gravity", rc.with_gravity, "Add the gravity baseline columns");
    auto* cmp_m = cmp->add_option("--m", rc.m, "Also write Monte Carlo estimates from this many samples");

    SynthOptions so;
    auto* syn = app.add_subcommand("synth", "Generate a synthetic trade-like network (edges.csv, attributes.csv)");
    syn->add_option("--n", so.cfg.n, "Number of nodes");
    syn->add_option("--fmin", so.cfg.fitness_min, "Smallest fitness");
    syn->add_option("--fmax", so.cfg.fitness_max, "Largest fitness");
    syn->add_option("--z", so.z, "Fixed z (otherwise tuned to --density)");
    syn->add_option("--density", so.cfg.target_density, "Target expected density when z is tuned");
    syn->add_option("--weight-scale", so.cfg.weight_scale, "Mean extra weight of the strongest pair");
    syn->add_option("--weight-exponent", so.cfg.weight_exponent, "Exponent on the fitness product for weights");
    syn->add_option("--weight-cap", so.cfg.weight_cap, "Upper bound on the geometric parameter");
    syn->add_flag("--positions", so.cfg.positions, "Draw node positions uniformly on the sphere");
    syn->add_option("--gamma", so.cfg.gamma, "Distance decay (requires --positions)");
    syn->add_option("--kernel", so.kernel, "Distance kernel")->check(CLI::IsMember({"identity", "log"}));
    syn->add_option("--seed", so.cfg.seed, "Random seed");
    syn->add_option("--out", so.out, "Output directory");
    syn->add_option("--config", so.config, "key = value file; flags override it");

    try {
        auto args = expand_config(argc, argv);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalid;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    }

    try {
        if (syn->parsed())
            return cmd_synth(so);
        const std::string command = app.get_subcommands().front()->get_name();
        validate(rc, command);
        prepare_out(rc.out);
        if (command == "fit")
            return cmd_fit(rc);
        if (command == "expect")
            return cmd_expect(rc);
        if (command == "sample")
            return cmd_sample(rc);
        return cmd_compare(rc, cmp_m->count() > 0);
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace wtw::cli
