#include "helpers.hpp"

#include "wtw/analytics.hpp"
#include "wtw/errors.hpp"
#include "wtw/gravity.hpp"
#include "wtw/report.hpp"
#include "wtw/solver.hpp"

#include <doctest.h>

#include <sstream>

using namespace wtw;

namespace {

struct Fixture {
    WeightedGraph g = testing::random_graph(25, 0.35, 6.0, 31);
    NodeAttributes attrs;
    Fixture() {
        std::vector<double> f;
        std::vector<GeoPoint> pos;
        for (std::size_t i = 0; i < g.size(); ++i) {
            f.push_back(1.0 + static_cast<double>(i * 7 % 11));
            pos.push_back({static_cast<double>(i) * 2.5 - 30.0, static_cast<double>(i * 13 % 29) * 6.0});
        }
        attrs = NodeAttributes(f, pos);
    }
};

} // namespace

TEST_SUITE("report") {

TEST_CASE("csv has one row per node and metric") {
    Fixture fx;
    const auto fm = solve_mixed(values_or(degree(fx.g), 0.0), values_or(strength(fx.g), 0.0));
    const auto r = compare(fx.g, fm);
    std::ostringstream out;
    write_report_csv(out, r);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "node,metric,observed,expected,defined");
    std::size_t rows = 0;
    while (std::getline(in, line))
        ++rows;
    CHECK(rows == fx.g.size() * r.metrics.size());
}

TEST_CASE("report round trips through csv and json") {
    Fixture fx;
    const auto fit = fit_gravity(fx.g, fx.attrs);
    for (Family fam : {Family::BinaryCM, Family::MixedBoseFermi}) {
        FitOptions opt;
        opt.family = fam;
        const auto fm = fit_model(opt, fx.g, fx.attrs);
        auto r = compare(fx.g, fm, fx.attrs, fit);
        r.seed = 7;
        r.m = 1000;
        std::ostringstream csv;
        write_report_csv(csv, r);
        const Json summary = Json::parse(dump(report_summary(r)));
        std::istringstream in(csv.str());
        const auto back = read_report(in, summary);
        CHECK(back == r);
    }
}

TEST_CASE("summary carries the documented keys") {
    Fixture fx;
    const auto r = compare(fx.g, solve_bcm(values_or(degree(fx.g), 0.0)));
    const Json j = report_summary(r);
    for (const char* key : {"model", "correlations", "observed_density", "expected_density", "seed", "m"})
        CHECK(j.contains(key));
    CHECK(j["seed"].is_null());
}

TEST_CASE("fitted model json round trip") {
    Fixture fx;
    for (Family fam : {Family::ErdosRenyi, Family::BinaryCM, Family::WeightedCM, Family::BoundedCM,
                       Family::MixedBoseFermi, Family::FitnessGDP, Family::FitnessGDPDistance}) {
        FitOptions opt;
        opt.family = fam;
        opt.w_max = 40;
        const auto fm = fit_model(opt, fx.g, fx.attrs);
        const auto back = fitted_model_from_json(Json::parse(dump(to_json(fm))));
        CHECK(back.spec.family == fm.spec.family);
        CHECK(back.spec.x == fm.spec.x);
        CHECK(back.spec.y == fm.spec.y);
        CHECK(back.spec.z == fm.spec.z);
        CHECK(back.spec.gamma == fm.spec.gamma);
        CHECK(back.spec.p == fm.spec.p);
        CHECK(back.spec.w_max == fm.spec.w_max);
        CHECK(back.residuals == fm.residuals);
        CHECK(back.converged == fm.converged);
        CHECK(back.labels == fm.labels);
    }
    CHECK_THROWS_AS(fitted_model_from_json(Json::parse(R"({"family":"bcm"})")), InputError);
    CHECK_THROWS_AS(fitted_model_from_json(Json::parse(R"({"family":"nope","parameters":{}})")), InputError);
}

TEST_CASE("gravity json round trip") {
    Fixture fx;
    const auto fit = fit_gravity(fx.g, fx.attrs);
    CHECK(gravity_fit_from_json(Json::parse(dump(to_json(fit)))) == fit);
}

TEST_CASE("byte-identical output for identical input") {
    Fixture fx;
    auto render = [&] {
        const auto fm = solve_mixed(values_or(degree(fx.g), 0.0), values_or(strength(fx.g), 0.0));
        const auto r = compare(fx.g, fm);
        std::ostringstream csv;
        write_report_csv(csv, r);
        return csv.str() + dump(report_summary(r));
    };
    CHECK(render() == render());
}

TEST_CASE("unwritable destination raises an I/O error") {
    CHECK_THROWS_AS(write_text("/nonexistent_dir_for_wtw/x.json", "{}"), IoError);
    CHECK_THROWS_AS(read_text("/nonexistent_dir_for_wtw/x.json"), IoError);
}

} // TEST_SUITE
