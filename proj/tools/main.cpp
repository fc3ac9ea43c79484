#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rdplan/clustering.hpp"
#include "rdplan/errors.hpp"
#include "rdplan/feedback.hpp"
#include "rdplan/metrics.hpp"
#include "rdplan/opcost.hpp"
#include "rdplan/scenario.hpp"
#include "rdplan/serialize.hpp"
#include "rdplan/solve.hpp"
#include "rdplan/sysmodel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitIo = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitValidation = 4;

struct Cfg {
    std::string system_path;
    std::string timeseries_path;
    std::string out_dir = "run";
    int jobs = 1;
    int enum_limit = 16;
    int k = 0;
    int n0 = 0;
    int n_loop = 0;
    int n_step = 1;
    int n_bad = 1;
    std::vector<int> rd_counts;
    bool keep_trace = false;
    bool with_reference = false;
    bool dump_dispatch = false;
};

/// One command per run directory at a time.
class RunLock {
public:
    explicit RunLock(const fs::path& dir) : path_(dir / ".lock") {
        fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd_ < 0) {
            throw rdplan::IoError("run directory is locked (found " + path_.string() +
                                  "); remove the file if no other command is running");
        }
    }
    ~RunLock() {
        if (fd_ >= 0) {
            ::close(fd_);
            std::error_code ec;
            fs::remove(path_, ec);
        }
    }
    RunLock(const RunLock&) = delete;
    RunLock& operator=(const RunLock&) = delete;

private:
    fs::path path_;
    int fd_ = -1;
};

std::uint64_t fnv1a_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw rdplan::IoError("cannot open " + p.string());
    std::uint64_t h = 1469598103934665603ull;
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

void write_run_meta(const fs::path& dir, const std::string& command) {
    json j;
    j["command"] = command;
    const auto now = std::chrono::system_clock::now();
    j["timestamp_unix"] =
        std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
    std::ofstream out(dir / "run_meta.json");
    out << j.dump(2) << "\n";
}

fs::path prepare_out_dir(const Cfg& cfg) {
    fs::path dir(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw rdplan::IoError("cannot create output directory " + dir.string());
    return dir;
}

rdplan::sysmodel::SystemModel load_validated_system(const Cfg& cfg) {
    if (cfg.system_path.empty())
        throw rdplan::ValidationError("--system is required for this command");
    auto m = rdplan::serialize::read_system_json(cfg.system_path);
    const auto result = rdplan::sysmodel::validate(m);
    for (const auto& v : result.violations) {
        if (v.severity == rdplan::sysmodel::Violation::Severity::Warning)
            std::cerr << "warning: " << v.where << ": " << v.message << "\n";
    }
    if (!result.ok()) {
        std::ostringstream msg;
        msg << cfg.system_path << ": invalid system model:";
        for (const auto& v : result.violations)
            if (v.severity == rdplan::sysmodel::Violation::Severity::Error)
                msg << "\n  " << v.where << ": " << v.message;
        throw rdplan::ValidationError(msg.str());
    }
    return m;
}

rdplan::scenario::ScenarioSet full_set_from_timeseries(const std::string& path) {
    auto [load, wind] = rdplan::serialize::read_timeseries_csv(path);
    const auto days = rdplan::scenario::segment_days(rdplan::scenario::normalize(load),
                                                     rdplan::scenario::normalize(wind));
    return rdplan::scenario::to_full_set(days);
}

rdplan::scenario::ScenarioSet load_full_set(const Cfg& cfg, const fs::path& dir) {
    const fs::path cached = dir / "full_set.json";
    if (fs::exists(cached)) return rdplan::serialize::read_scenario_set_json(cached.string());
    if (cfg.timeseries_path.empty()) {
        throw rdplan::IoError("no full_set.json in " + dir.string() +
                              " and no --timeseries given; run `cluster` first or pass the CSV");
    }
    return full_set_from_timeseries(cfg.timeseries_path);
}

rdplan::solve::PlanOptions plan_options(const Cfg& cfg, rdplan::opcost::DayCostCache* cache) {
    rdplan::solve::PlanOptions o;
    o.enum_limit = cfg.enum_limit;
    o.jobs = cfg.jobs;
    o.cache = cache;
    return o;
}

int cmd_cluster(const Cfg& cfg) {
    if (cfg.k < 1) throw rdplan::ValidationError("cluster: --k must be >= 1");
    if (cfg.timeseries_path.empty())
        throw rdplan::ValidationError("cluster: --timeseries is required");
    const fs::path dir = prepare_out_dir(cfg);
    RunLock lock(dir);

    const auto full = full_set_from_timeseries(cfg.timeseries_path);
    const auto partition = rdplan::clustering::agglomerate(full, cfg.k);
    const auto reduced = rdplan::clustering::make_representatives(partition);

    rdplan::serialize::write_scenario_set_json(full, (dir / "full_set.json").string());
    rdplan::serialize::write_partition_json(partition, (dir / "partition.json").string());
    rdplan::serialize::write_scenario_set_json(reduced, (dir / "reduced_set.json").string());
    write_run_meta(dir, "cluster");
    std::cout << "cluster: " << full.size() << " days -> " << reduced.size()
              << " representatives (total weight " << reduced.total_weight() << ")\n";
    return kExitOk;
}

int cmd_plan(const Cfg& cfg) {
    const fs::path dir = prepare_out_dir(cfg);
    RunLock lock(dir);
    const auto m = load_validated_system(cfg);
    const fs::path reduced_path = dir / "reduced_set.json";
    if (!fs::exists(reduced_path)) {
        throw rdplan::IoError("missing " + reduced_path.string() + "; run `cluster` first");
    }
    const auto reduced = rdplan::serialize::read_scenario_set_json(reduced_path.string());

    rdplan::opcost::DayCostCache cache;
    auto opts = plan_options(cfg, &cache);
    if (cfg.keep_trace) {
        opts.keep_trace = true;
        opts.prune = false;  // a complete, deterministic audit trace
    }
    const auto result = rdplan::solve::plan(m, reduced, opts);
    rdplan::serialize::write_plan_json(result, (dir / "plan.json").string());
    if (cfg.keep_trace)
        rdplan::serialize::write_plan_trace_csv(result, (dir / "plan_trace.csv").string());
    write_run_meta(dir, "plan");
    std::cout << "plan: decision " << result.decision.bits() << " total " << result.total_cost
              << " (invest " << result.invest_cost << ", op " << result.op_cost << ")\n";
    return kExitOk;
}

int cmd_reference(const Cfg& cfg) {
    const fs::path dir = prepare_out_dir(cfg);
    RunLock lock(dir);
    const auto m = load_validated_system(cfg);
    const auto full = load_full_set(cfg, dir);

    // An hours-scale solve is worth caching: reuse the stored result when the
    // inputs are unchanged.
    std::uint64_t input_hash = fnv1a_file(cfg.system_path);
    const fs::path full_path = dir / "full_set.json";
    if (fs::exists(full_path)) input_hash ^= fnv1a_file(full_path);
    const fs::path ref_path = dir / "reference.json";
    if (fs::exists(ref_path)) {
        const json j = json::parse(std::ifstream(ref_path));
        if (j.contains("input_hash") && j["input_hash"].get<std::uint64_t>() == input_hash) {
            std::cout << "reference: cache hit, inputs unchanged\n";
            return kExitOk;
        }
    }

    rdplan::opcost::DayCostCache cache;
    const auto result = rdplan::solve::reference_solution(m, full, plan_options(cfg, &cache));
    rdplan::serialize::write_plan_json(result, ref_path.string());
    // Append the input hash for cache validation on reruns.
    json j = json::parse(std::ifstream(ref_path));
    j["input_hash"] = input_hash;
    std::ofstream out(ref_path);
    out << j.dump(2) << "\n";
    write_run_meta(dir, "reference");
    std::cout << "reference: decision " << result.decision.bits() << " total "
              << result.total_cost << "\n";
    return kExitOk;
}

int cmd_evaluate(const Cfg& cfg) {
    const fs::path dir = prepare_out_dir(cfg);
    RunLock lock(dir);
    const auto m = load_validated_system(cfg);
    const auto full = load_full_set(cfg, dir);
    const fs::path plan_path = dir / "plan.json";
    if (!fs::exists(plan_path)) {
        throw rdplan::IoError("missing " + plan_path.string() + "; run `plan` first");
    }
    const auto plan = rdplan::serialize::read_plan_json(plan_path.string());

    rdplan::opcost::DayCostCache cache;
    rdplan::opcost::OpCostOptions op_opts;
    op_opts.cache = &cache;
    op_opts.keep_dispatches = cfg.dump_dispatch;
    const auto op = rdplan::opcost::op_cost(m, plan.decision, full, op_opts);
    const double invest = rdplan::sysmodel::invest_cost(m, plan.decision);

    json j;
    j["decision"] = {{"line_built", plan.decision.line_built},
                     {"wind_built", plan.decision.wind_built},
                     {"bits", plan.decision.bits()}};
    j["invest_cost"] = invest;
    j["op_cost"] = op.total;
    j["total_cost"] = invest + op.total;
    std::ofstream out(dir / "evaluation.json");
    out << j.dump(2) << "\n";
    if (cfg.dump_dispatch)
        rdplan::opcost::write_dispatch_csv(m, plan.decision, op, (dir / "dispatch.csv").string());
    write_run_meta(dir, "evaluate");
    std::cout << "evaluate: decision " << plan.decision.bits() << " total on this set "
              << invest + op.total << "\n";
    return kExitOk;
}

int cmd_feedback(const Cfg& cfg) {
    if (cfg.n0 < 1) throw rdplan::ValidationError("feedback: --n0 must be >= 1");
    const fs::path dir = prepare_out_dir(cfg);
    RunLock lock(dir);
    const auto m = load_validated_system(cfg);
    const auto full = load_full_set(cfg, dir);
    if (!fs::exists(dir / "full_set.json"))
        rdplan::serialize::write_scenario_set_json(full, (dir / "full_set.json").string());

    rdplan::opcost::DayCostCache cache;
    const auto popts = plan_options(cfg, &cache);

    std::optional<rdplan::solve::PlanResult> reference;
    const fs::path ref_path = dir / "reference.json";
    if (fs::exists(ref_path)) {
        reference = rdplan::serialize::read_plan_json(ref_path.string());
    } else if (cfg.with_reference) {
        reference = rdplan::solve::reference_solution(m, full, popts);
        rdplan::serialize::write_plan_json(*reference, ref_path.string());
    }

    rdplan::feedback::FeedbackConfig fcfg{cfg.n0, cfg.n_loop, cfg.n_step, cfg.n_bad};
    rdplan::feedback::FeedbackOptions fopts;
    fopts.plan = popts;
    fopts.reference = reference ? &*reference : nullptr;
    rdplan::metrics::MetricsOptions mopts;
    mopts.cache = &cache;
    fopts.on_loop = [&](int loop, const rdplan::scenario::ScenarioSet& reduced,
                        const rdplan::feedback::LoopRecord& rec) {
        const auto report = rdplan::metrics::build_report(m, full, reduced, rec.plan,
                                                          reference ? &*reference : nullptr, mopts);
        rdplan::serialize::write_error_report_json(
            report, (dir / ("errors_loop_" + std::to_string(loop) + ".json")).string());
    };

    const auto result = rdplan::feedback::run_feedback(m, full, fcfg, fopts);
    rdplan::serialize::write_scenario_set_json(result.final_set,
                                               (dir / "final_set.json").string());
    rdplan::serialize::write_feedback_trace_json(result.trace, (dir / "trace.json").string());
    rdplan::serialize::write_feedback_trace_csv(
        result.trace, reference ? &*reference : nullptr, (dir / "trace.csv").string());
    write_run_meta(dir, "feedback");
    const auto& last = result.trace.loops.back();
    std::cout << "feedback: " << result.trace.loops.size() << " planning rounds, final "
              << last.rd_count << " representatives, op estimation error "
              << last.op_estimation_error << "\n";
    return kExitOk;
}

int cmd_report(const Cfg& cfg) {
    const fs::path dir = prepare_out_dir(cfg);
    RunLock lock(dir);
    const auto m = load_validated_system(cfg);
    const auto full = load_full_set(cfg, dir);
    const fs::path reduced_path = dir / "reduced_set.json";
    const fs::path plan_path = dir / "plan.json";
    if (!fs::exists(reduced_path) || !fs::exists(plan_path)) {
        throw rdplan::IoError("report needs reduced_set.json and plan.json in " + dir.string());
    }
    const auto reduced = rdplan::serialize::read_scenario_set_json(reduced_path.string());
    const auto plan = rdplan::serialize::read_plan_json(plan_path.string());

    std::optional<rdplan::solve::PlanResult> reference;
    if (fs::exists(dir / "reference.json"))
        reference = rdplan::serialize::read_plan_json((dir / "reference.json").string());

    rdplan::opcost::DayCostCache cache;
    rdplan::metrics::MetricsOptions mopts;
    mopts.cache = &cache;
    const auto report = rdplan::metrics::build_report(m, full, reduced, plan,
                                                      reference ? &*reference : nullptr, mopts);
    rdplan::serialize::write_error_report_json(report, (dir / "report.json").string());
    rdplan::serialize::write_per_day_errors_csv(report, (dir / "per_day_errors.csv").string());
    rdplan::serialize::write_per_rd_errors_csv(report, reduced,
                                               (dir / "per_rd_errors.csv").string());

    std::vector<int> counts = cfg.rd_counts;
    if (counts.empty()) counts = {reduced.size()};
    const auto sweep = rdplan::feedback::baseline_sweep(
        m, full, counts, reference ? &*reference : nullptr, plan_options(cfg, &cache));
    rdplan::serialize::write_sweep_csv(sweep, (dir / "sweep.csv").string());

    // Markdown summary.
    std::ofstream md(dir / "summary.md");
    md << "# Aggregation error report\n\n";
    md << "| metric | value |\n|---|---|\n";
    auto row = [&](const std::string& name, const std::optional<double>& v) {
        md << "| " << name << " | " << (v ? std::to_string(*v) : "N/A") << " |\n";
    };
    row("operational estimation error", report.op_estimation_error);
    row("simplification error", report.simplification_error);
    row("decision error", report.decision_error);
    row("op estimation error (reference)", report.op_estimation_error_ref);
    row("normalizer (reference total)", report.normalizer);
    md << "\n## Bound verdicts\n\n| bound | evaluable | pass | margin |\n|---|---|---|---|\n";
    for (const auto& [name, v] : report.bound_verdicts) {
        md << "| " << name << " | " << (v.evaluable ? "yes" : "no") << " | "
           << (v.evaluable ? (v.pass ? "pass" : "FAIL") : "-") << " | " << v.margin << " |\n";
    }
    md << "\nPractical bound on the decision error: " << -report.op_estimation_error << "\n";
    write_run_meta(dir, "report");
    std::cout << "report: wrote report.json, per_day_errors.csv, per_rd_errors.csv, sweep.csv, "
                 "summary.md\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Representative-day planning toolkit: clustering, expansion planning, "
                 "aggregation error metrics, bound checks, and feedback re-clustering"};
    app.set_config("--config", "", "key=value configuration file; flags take precedence");
    app.fallthrough();

    Cfg cfg;
    app.add_option("--system", cfg.system_path, "system model JSON")->configurable(true);
    app.add_option("--timeseries", cfg.timeseries_path, "hour,load,wind CSV")->configurable(true);
    app.add_option("--out", cfg.out_dir, "run directory")->configurable(true);
    app.add_option("--jobs", cfg.jobs, "parallel decision evaluations")->configurable(true);
    app.add_option("--enum-limit", cfg.enum_limit, "max candidate count for enumeration")
        ->configurable(true);

    // Command parameters live on the app so a flat key=value config file can
    // set any of them; fallthrough lets them follow the subcommand on the
    // command line as usual.
    app.add_option("--k", cfg.k, "number of representatives (cluster)")->configurable(true);
    app.add_flag("--trace", cfg.keep_trace, "write the full per-decision audit trace (plan)");
    app.add_flag("--dump-dispatch", cfg.dump_dispatch, "write per-day dispatch CSV (evaluate)");
    app.add_option("--n0", cfg.n0, "initial representative count (feedback)")->configurable(true);
    app.add_option("--loops", cfg.n_loop, "feedback loop count")->configurable(true);
    app.add_option("--step", cfg.n_step, "RDs added per loop")->configurable(true);
    app.add_option("--bad", cfg.n_bad, "worst RDs refined per loop")->configurable(true);
    app.add_flag("--with-reference", cfg.with_reference,
                 "solve the reference problem for decision-error columns (feedback)");
    app.add_option("--rd-counts", cfg.rd_counts, "sweep counts for sweep.csv (report)")
        ->delimiter(',')
        ->configurable(true);

    auto* cluster = app.add_subcommand("cluster", "build full and reduced scenario sets");
    auto* plan = app.add_subcommand("plan", "plan on the reduced set");
    app.add_subcommand("reference", "plan on the full set (cached)");
    auto* evaluate = app.add_subcommand("evaluate", "evaluate plan.json's decision on the full set");
    auto* feedback = app.add_subcommand("feedback", "iterative re-clustering of the worst RDs");
    auto* report = app.add_subcommand("report", "emit plot-ready CSVs and the summary");

    app.require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (cluster->parsed()) return cmd_cluster(cfg);
        if (plan->parsed()) return cmd_plan(cfg);
        if (app.get_subcommand("reference")->parsed()) return cmd_reference(cfg);
        if (evaluate->parsed()) return cmd_evaluate(cfg);
        if (feedback->parsed()) return cmd_feedback(cfg);
        if (report->parsed()) return cmd_report(cfg);
        std::cerr << "no command given\n";
        return kExitValidation;
    } catch (const rdplan::CapacityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCapacity;
    } catch (const rdplan::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const rdplan::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
