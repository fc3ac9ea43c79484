#include "rdplan/serialize.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rdplan/errors.hpp"

namespace rdplan::serialize {

using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    return out;
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

void dump_json(const json& j, const std::string& path) {
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

double parse_double(std::string_view field, const std::string& where) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        throw ValidationError(where + ": cannot parse number '" + std::string(field) + "'");
    }
    return v;
}

std::array<double, scenario::kFeatureDim> to_features(const json& arr, const std::string& where) {
    if (!arr.is_array() || arr.size() != scenario::kFeatureDim) {
        throw ValidationError(where + ": features must be an array of 48 numbers");
    }
    std::array<double, scenario::kFeatureDim> f{};
    for (int i = 0; i < scenario::kFeatureDim; ++i) f[i] = arr[i].get<double>();
    return f;
}

json from_features(const std::array<double, scenario::kFeatureDim>& f) {
    json arr = json::array();
    for (double v : f) arr.push_back(v);
    return arr;
}

}  // namespace

std::pair<scenario::HourlySeries, scenario::HourlySeries> read_timeseries_csv(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "hour,load,wind") {
        throw ValidationError(path + ": expected header 'hour,load,wind', got '" + line + "'");
    }
    scenario::HourlySeries load{"load", {}};
    scenario::HourlySeries wind{"wind", {}};
    int expected_hour = 0;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(line_no);
        const size_t c1 = line.find(',');
        const size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) {
            throw ValidationError(where + ": expected 3 comma-separated fields");
        }
        const std::string_view sv(line);
        const double hour = parse_double(sv.substr(0, c1), where);
        if (hour != expected_hour) {
            throw ValidationError(where + ": hour column must be consecutive from 0, got " +
                                  std::string(sv.substr(0, c1)));
        }
        load.values.push_back(parse_double(sv.substr(c1 + 1, c2 - c1 - 1), where));
        wind.values.push_back(parse_double(sv.substr(c2 + 1), where));
        ++expected_hour;
    }
    if (load.values.empty()) throw ValidationError(path + ": no data rows");
    return {std::move(load), std::move(wind)};
}

sysmodel::SystemModel read_system_json(const std::string& path) {
    const json j = load_json(path);
    sysmodel::SystemModel m;
    try {
        m.buses = j.at("buses").get<std::vector<int>>();
        auto line_from = [](const json& e, bool candidate) {
            sysmodel::Line l;
            l.from_bus = e.at("from_bus").get<int>();
            l.to_bus = e.at("to_bus").get<int>();
            l.susceptance = e.at("susceptance").get<double>();
            l.capacity = e.at("capacity").get<double>();
            if (candidate) l.invest_cost = e.at("invest_cost").get<double>();
            return l;
        };
        for (const auto& e : j.at("lines")) m.existing_lines.push_back(line_from(e, false));
        for (const auto& e : j.at("candidate_lines"))
            m.candidate_lines.push_back(line_from(e, true));
        for (const auto& e : j.at("thermal")) {
            sysmodel::ThermalGen g;
            g.bus = e.at("bus").get<int>();
            g.p_min = e.value("p_min", 0.0);
            g.p_max = e.at("p_max").get<double>();
            g.marginal_cost = e.at("marginal_cost").get<double>();
            g.ramp = e.at("ramp").get<double>();
            m.thermal_units.push_back(g);
        }
        for (const auto& e : j.at("candidate_wind")) {
            sysmodel::WindFarm w;
            w.bus = e.at("bus").get<int>();
            w.capacity = e.at("capacity").get<double>();
            w.invest_cost = e.at("invest_cost").get<double>();
            m.candidate_wind.push_back(w);
        }
        for (const auto& e : j.at("loads")) {
            m.loads.push_back({e.at("bus").get<int>(), e.at("peak").get<double>()});
        }
        m.voll = j.at("voll").get<double>();
        m.curtail_price = j.value("curtail_price", 0.0);
        m.reference_bus = j.at("reference_bus").get<int>();
    } catch (const json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return m;
}

void write_system_json(const sysmodel::SystemModel& m, const std::string& path) {
    json j;
    j["buses"] = m.buses;
    auto line_json = [](const sysmodel::Line& l, bool candidate) {
        json e{{"from_bus", l.from_bus},
               {"to_bus", l.to_bus},
               {"susceptance", l.susceptance},
               {"capacity", l.capacity}};
        if (candidate) e["invest_cost"] = l.invest_cost;
        return e;
    };
    j["lines"] = json::array();
    for (const auto& l : m.existing_lines) j["lines"].push_back(line_json(l, false));
    j["candidate_lines"] = json::array();
    for (const auto& l : m.candidate_lines) j["candidate_lines"].push_back(line_json(l, true));
    j["thermal"] = json::array();
    for (const auto& g : m.thermal_units) {
        j["thermal"].push_back({{"bus", g.bus},
                                {"p_min", g.p_min},
                                {"p_max", g.p_max},
                                {"marginal_cost", g.marginal_cost},
                                {"ramp", g.ramp}});
    }
    j["candidate_wind"] = json::array();
    for (const auto& w : m.candidate_wind) {
        j["candidate_wind"].push_back(
            {{"bus", w.bus}, {"capacity", w.capacity}, {"invest_cost", w.invest_cost}});
    }
    j["loads"] = json::array();
    for (const auto& l : m.loads) j["loads"].push_back({{"bus", l.bus}, {"peak", l.peak}});
    j["voll"] = m.voll;
    j["curtail_price"] = m.curtail_price;
    j["reference_bus"] = m.reference_bus;
    dump_json(j, path);
}

scenario::ScenarioSet read_scenario_set_json(const std::string& path) {
    const json j = load_json(path);
    scenario::ScenarioSet set;
    try {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "full") {
            set.kind = scenario::SetKind::Full;
        } else if (kind == "reduced") {
            set.kind = scenario::SetKind::Reduced;
        } else {
            throw ValidationError(path + ": kind must be 'full' or 'reduced'");
        }
        for (const auto& e : j.at("entries")) {
            scenario::ScenarioEntry entry;
            entry.weight = e.at("weight").get<double>();
            entry.features = to_features(e.at("features"), path);
            set.entries.push_back(entry);
        }
        set.provenance = j.at("provenance").get<std::vector<std::vector<int>>>();
    } catch (const json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
    if (set.provenance.size() != set.entries.size()) {
        throw ValidationError(path + ": provenance and entries must have the same length");
    }
    return set;
}

void write_scenario_set_json(const scenario::ScenarioSet& set, const std::string& path) {
    json j;
    j["kind"] = set.kind == scenario::SetKind::Full ? "full" : "reduced";
    j["entries"] = json::array();
    for (const auto& e : set.entries) {
        j["entries"].push_back({{"weight", e.weight}, {"features", from_features(e.features)}});
    }
    j["provenance"] = set.provenance;
    dump_json(j, path);
}

void write_partition_json(const clustering::Partition& p, const std::string& path) {
    json j;
    j["clusters"] = json::array();
    for (const auto& c : p.clusters) {
        j["clusters"].push_back({{"members", c.member_day_ids},
                                 {"mean", from_features(c.mean_features)},
                                 {"weight", c.weight()}});
    }
    dump_json(j, path);
}

solve::PlanResult read_plan_json(const std::string& path) {
    const json j = load_json(path);
    solve::PlanResult p;
    try {
        p.decision.line_built = j.at("decision").at("line_built").get<std::vector<bool>>();
        p.decision.wind_built = j.at("decision").at("wind_built").get<std::vector<bool>>();
        p.total_cost = j.at("total_cost").get<double>();
        p.invest_cost = j.at("invest_cost").get<double>();
        p.op_cost = j.at("op_cost").get<double>();
    } catch (const json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return p;
}

void write_plan_json(const solve::PlanResult& plan, const std::string& path) {
    json j;
    j["decision"] = {{"line_built", plan.decision.line_built},
                     {"wind_built", plan.decision.wind_built},
                     {"bits", plan.decision.bits()}};
    j["total_cost"] = plan.total_cost;
    j["invest_cost"] = plan.invest_cost;
    j["op_cost"] = plan.op_cost;
    dump_json(j, path);
}

void write_plan_trace_csv(const solve::PlanResult& plan, const std::string& path) {
    auto out = open_out(path);
    out << "decision,invest,op,total\n";
    for (const auto& row : plan.per_decision_trace) {
        out << row.decision.bits() << "," << fmt(row.invest) << "," << fmt(row.op) << ","
            << fmt(row.total) << "\n";
    }
}

namespace {

json verdicts_json(const std::map<std::string, metrics::BoundVerdict>& verdicts) {
    json v;
    for (const auto& [name, b] : verdicts) {
        v[name] = {{"evaluable", b.evaluable}, {"pass", b.pass}, {"margin", b.margin}};
    }
    return v;
}

json optional_json(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

}  // namespace

void write_error_report_json(const metrics::ErrorReport& r, const std::string& path) {
    json j;
    j["simplification_error"] = optional_json(r.simplification_error);
    j["decision_error"] = optional_json(r.decision_error);
    j["op_estimation_error"] = r.op_estimation_error;
    j["op_estimation_error_ref"] = optional_json(r.op_estimation_error_ref);
    j["normalizer"] = optional_json(r.normalizer);
    if (r.normalizer && *r.normalizer != 0.0) {
        const double n = *r.normalizer;
        j["normalized"] = {
            {"op_estimation_error", r.op_estimation_error / n},
            {"decision_error", r.decision_error ? json(*r.decision_error / n) : json(nullptr)},
            {"simplification_error",
             r.simplification_error ? json(*r.simplification_error / n) : json(nullptr)}};
    }
    j["per_rd_errors"] = json::array();
    for (const auto& [k, e] : r.per_rd_errors) j["per_rd_errors"].push_back({{"k", k}, {"error", e}});
    j["per_day_errors"] = json::array();
    for (const auto& [d, e] : r.per_day_errors)
        j["per_day_errors"].push_back({{"day", d}, {"error", e}});
    j["per_day_ts_errors"] = json::array();
    for (const auto& [d, e] : r.per_day_ts_errors)
        j["per_day_ts_errors"].push_back({{"day", d}, {"distance", e}});
    j["bound_verdicts"] = verdicts_json(r.bound_verdicts);
    dump_json(j, path);
}

void write_per_day_errors_csv(const metrics::ErrorReport& r, const std::string& path) {
    auto out = open_out(path);
    out << "day_id,op_err,ts_err\n";
    std::map<int, double> ts;
    for (const auto& [d, e] : r.per_day_ts_errors) ts[d] = e;
    for (const auto& [d, e] : r.per_day_errors) {
        out << d << "," << fmt(e) << "," << fmt(ts.count(d) ? ts.at(d) : 0.0) << "\n";
    }
}

void write_per_rd_errors_csv(const metrics::ErrorReport& r,
                             const scenario::ScenarioSet& reduced, const std::string& path) {
    auto out = open_out(path);
    out << "k,weight,op_err\n";
    for (const auto& [k, e] : r.per_rd_errors) {
        const double w = k < reduced.size() ? reduced.entries[k].weight : 0.0;
        out << k << "," << fmt(w) << "," << fmt(e) << "\n";
    }
}

void write_feedback_trace_json(const feedback::FeedbackTrace& t, const std::string& path) {
    json j;
    j["loops"] = json::array();
    for (const auto& rec : t.loops) {
        json rd_errors = json::array();
        for (const auto& [k, e] : rec.per_rd_errors)
            rd_errors.push_back({{"k", k}, {"error", e}});
        j["loops"].push_back({{"rd_count", rec.rd_count},
                              {"decision",
                               {{"line_built", rec.plan.decision.line_built},
                                {"wind_built", rec.plan.decision.wind_built},
                                {"bits", rec.plan.decision.bits()}}},
                              {"total_reduced", rec.plan.total_cost},
                              {"total_full", rec.total_on_full},
                              {"op_estimation_error", rec.op_estimation_error},
                              {"per_rd_errors", rd_errors},
                              {"replaced_rds", rec.replaced_rds}});
    }
    dump_json(j, path);
}

void write_feedback_trace_csv(const feedback::FeedbackTrace& t, const solve::PlanResult* reference,
                              const std::string& path) {
    auto out = open_out(path);
    out << "rd_count,total_reduced,total_full,op_err,decision_err,replaced_rds\n";
    for (const auto& rec : t.loops) {
        out << rec.rd_count << "," << fmt(rec.plan.total_cost) << "," << fmt(rec.total_on_full)
            << "," << fmt(rec.op_estimation_error) << ",";
        if (reference) out << fmt(rec.total_on_full - reference->total_cost);
        out << ",";
        for (size_t i = 0; i < rec.replaced_rds.size(); ++i) {
            if (i) out << ";";
            out << rec.replaced_rds[i];
        }
        out << "\n";
    }
}

void write_sweep_csv(const std::vector<std::pair<int, metrics::ErrorReport>>& sweep,
                     const std::string& path) {
    auto out = open_out(path);
    out << "rd_count,op_err,decision_err,simplification_err,norm_op_err,norm_decision_err\n";
    for (const auto& [count, r] : sweep) {
        out << count << "," << fmt(r.op_estimation_error) << ",";
        if (r.decision_error) out << fmt(*r.decision_error);
        out << ",";
        if (r.simplification_error) out << fmt(*r.simplification_error);
        out << ",";
        if (r.normalizer && *r.normalizer != 0.0) {
            out << fmt(r.op_estimation_error / *r.normalizer) << ",";
            if (r.decision_error) out << fmt(*r.decision_error / *r.normalizer);
        } else {
            out << ",";
        }
        out << "\n";
    }
}

}  // namespace rdplan::serialize
