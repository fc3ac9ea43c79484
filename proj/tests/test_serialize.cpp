#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "rdplan/clustering.hpp"
#include "rdplan/errors.hpp"
#include "rdplan/serialize.hpp"

using namespace rdplan;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("rdplan_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("timeseries CSV round trip") {
    TempDir dir;
    const auto p = dir.file("ts.csv");
    {
        std::ofstream out(p);
        out << "hour,load,wind\n";
        testsupport::Rng rng(3);
        for (int h = 0; h < 48; ++h)
            out << h << "," << 100.0 + 10.0 * rng.uniform() << "," << rng.uniform() << "\n";
    }
    const auto [load, wind] = serialize::read_timeseries_csv(p);
    CHECK(load.hours() == 48);
    CHECK(wind.hours() == 48);
    CHECK(load.name == "load");
    CHECK(load.values[0] >= 100.0);
}

TEST_CASE("timeseries CSV rejects bad headers, gaps, and junk") {
    TempDir dir;
    const auto p = dir.file("bad.csv");
    {
        std::ofstream out(p);
        out << "time,load,wind\n0,1,2\n";
    }
    CHECK_THROWS_AS(serialize::read_timeseries_csv(p), ValidationError);
    {
        std::ofstream out(p);
        out << "hour,load,wind\n0,1,0.5\n2,1,0.5\n";  // hour gap
    }
    CHECK_THROWS_AS(serialize::read_timeseries_csv(p), ValidationError);
    {
        std::ofstream out(p);
        out << "hour,load,wind\n0,abc,0.5\n";
    }
    CHECK_THROWS_AS(serialize::read_timeseries_csv(p), ValidationError);
    CHECK_THROWS_AS(serialize::read_timeseries_csv(dir.file("absent.csv")), IoError);
}

TEST_CASE("system model JSON round trip") {
    TempDir dir;
    const auto m = testsupport::grid_6bus();
    const auto p = dir.file("system.json");
    serialize::write_system_json(m, p);
    const auto back = serialize::read_system_json(p);
    CHECK(back.buses == m.buses);
    REQUIRE(back.existing_lines.size() == m.existing_lines.size());
    CHECK(back.existing_lines[0].susceptance == m.existing_lines[0].susceptance);
    REQUIRE(back.candidate_lines.size() == m.candidate_lines.size());
    CHECK(back.candidate_lines[0].invest_cost == m.candidate_lines[0].invest_cost);
    REQUIRE(back.thermal_units.size() == m.thermal_units.size());
    CHECK(back.thermal_units[2].marginal_cost == m.thermal_units[2].marginal_cost);
    REQUIRE(back.candidate_wind.size() == m.candidate_wind.size());
    CHECK(back.voll == m.voll);
    CHECK(back.reference_bus == m.reference_bus);
    CHECK(sysmodel::validate(back).ok());
}

TEST_CASE("scenario set JSON round trip preserves features bitwise") {
    TempDir dir;
    const auto set = testsupport::coastal_days();
    const auto p = dir.file("set.json");
    serialize::write_scenario_set_json(set, p);
    const auto back = serialize::read_scenario_set_json(p);
    REQUIRE(back.size() == set.size());
    CHECK(back.kind == set.kind);
    for (int i = 0; i < set.size(); ++i) {
        CHECK(back.entries[i].weight == set.entries[i].weight);
        CHECK(back.entries[i].features == set.entries[i].features);
        CHECK(back.provenance[i] == set.provenance[i]);
    }
}

TEST_CASE("plan JSON round trip") {
    TempDir dir;
    solve::PlanResult plan;
    plan.decision.line_built = {true, false};
    plan.decision.wind_built = {false, true, true};
    plan.invest_cost = 123.5;
    plan.op_cost = 88.25;
    plan.total_cost = plan.invest_cost + plan.op_cost;
    const auto p = dir.file("plan.json");
    serialize::write_plan_json(plan, p);
    const auto back = serialize::read_plan_json(p);
    CHECK(back.decision == plan.decision);
    CHECK(back.total_cost == plan.total_cost);
    CHECK(back.invest_cost == plan.invest_cost);
    CHECK(back.op_cost == plan.op_cost);
}

TEST_CASE("partition JSON carries members, means, and weights") {
    TempDir dir;
    const auto set = testsupport::coastal_days();
    const auto part = clustering::agglomerate(set, 4);
    const auto p = dir.file("partition.json");
    serialize::write_partition_json(part, p);
    const auto text = slurp(p);
    CHECK(text.find("\"clusters\"") != std::string::npos);
    CHECK(text.find("\"members\"") != std::string::npos);
    CHECK(text.find("\"weight\"") != std::string::npos);
}

TEST_CASE("error report JSON and CSVs") {
    TempDir dir;
    metrics::ErrorReport r;
    r.simplification_error = -4.0;
    r.decision_error = 2.0;
    r.op_estimation_error = -6.0;
    r.op_estimation_error_ref = -3.0;
    r.normalizer = 100.0;
    r.per_rd_errors = {{0, -6.0}, {1, 0.0}};
    r.per_day_errors = {{0, -2.0}, {1, -4.0}, {2, 0.0}};
    r.per_day_ts_errors = {{0, 0.5}, {1, 0.25}, {2, 0.0}};
    r.bound_verdicts = metrics::check_bounds(r);

    serialize::write_error_report_json(r, dir.file("report.json"));
    const auto text = slurp(dir.file("report.json"));
    CHECK(text.find("\"normalized\"") != std::string::npos);
    CHECK(text.find("\"bound_verdicts\"") != std::string::npos);

    serialize::write_per_day_errors_csv(r, dir.file("per_day.csv"));
    const auto day_csv = slurp(dir.file("per_day.csv"));
    CHECK(day_csv.rfind("day_id,op_err,ts_err\n", 0) == 0);
    CHECK(day_csv.find("\n1,-4,0.25\n") != std::string::npos);

    scenario::ScenarioSet reduced;
    reduced.kind = scenario::SetKind::Reduced;
    reduced.entries.resize(2);
    reduced.entries[0].weight = 2.0;
    reduced.entries[1].weight = 1.0;
    reduced.provenance = {{0, 1}, {2}};
    serialize::write_per_rd_errors_csv(r, reduced, dir.file("per_rd.csv"));
    const auto rd_csv = slurp(dir.file("per_rd.csv"));
    CHECK(rd_csv.rfind("k,weight,op_err\n", 0) == 0);
    CHECK(rd_csv.find("\n0,2,-6\n") != std::string::npos);
}

TEST_CASE("feedback trace CSV has the documented shape") {
    TempDir dir;
    feedback::FeedbackTrace t;
    feedback::LoopRecord a;
    a.rd_count = 4;
    a.plan.total_cost = 100.0;
    a.total_on_full = 110.0;
    a.op_estimation_error = -10.0;
    a.replaced_rds = {1, 3};
    t.loops.push_back(a);
    feedback::LoopRecord b = a;
    b.rd_count = 5;
    b.replaced_rds = {};
    t.loops.push_back(b);

    solve::PlanResult ref;
    ref.total_cost = 105.0;
    serialize::write_feedback_trace_csv(t, &ref, dir.file("trace.csv"));
    const auto text = slurp(dir.file("trace.csv"));
    CHECK(text.rfind("rd_count,total_reduced,total_full,op_err,decision_err,replaced_rds\n", 0) ==
          0);
    CHECK(text.find("4,100,110,-10,5,1;3\n") != std::string::npos);
    CHECK(text.find("5,100,110,-10,5,\n") != std::string::npos);

    serialize::write_feedback_trace_json(t, dir.file("trace.json"));
    CHECK(slurp(dir.file("trace.json")).find("\"replaced_rds\"") != std::string::npos);
}

TEST_CASE("sweep CSV fills reference columns only when available") {
    TempDir dir;
    metrics::ErrorReport with_ref;
    with_ref.op_estimation_error = -5.0;
    with_ref.decision_error = 1.0;
    with_ref.simplification_error = -4.0;
    with_ref.normalizer = 50.0;
    metrics::ErrorReport no_ref;
    no_ref.op_estimation_error = -7.0;
    serialize::write_sweep_csv({{10, with_ref}, {20, no_ref}}, dir.file("sweep.csv"));
    const auto text = slurp(dir.file("sweep.csv"));
    const auto row_start = text.find("10,-5,1,-4,");
    REQUIRE(row_start != std::string::npos);
    // The normalized columns round-trip numerically.
    const auto rest = text.substr(row_start + std::string("10,-5,1,-4,").size());
    char* end = nullptr;
    CHECK(std::strtod(rest.c_str(), &end) == doctest::Approx(-0.1).epsilon(1e-15));
    CHECK(*end == ',');
    CHECK(std::strtod(end + 1, nullptr) == doctest::Approx(0.02).epsilon(1e-15));
    CHECK(text.find("20,-7,,,,\n") != std::string::npos);
}
