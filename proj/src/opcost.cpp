#include "rdplan/opcost.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <mutex>
#include <unordered_map>
#include <unordered_set>

#include "rdplan/errors.hpp"
#include "rdplan/simplex.hpp"

namespace rdplan::opcost {

namespace {

std::unordered_map<sysmodel::BusId, int> bus_indices(const SystemModel& m) {
    std::unordered_map<sysmodel::BusId, int> idx;
    for (int i = 0; i < static_cast<int>(m.buses.size()); ++i) idx[m.buses[i]] = i;
    return idx;
}

void check_dimensions(const SystemModel& m, const InvestmentDecision& x) {
    if (x.line_built.size() != m.candidate_lines.size() ||
        x.wind_built.size() != m.candidate_wind.size()) {
        throw ValidationError("opcost: decision dimensions do not match the candidate lists");
    }
}

std::string status_name(lp::LpStatus s) {
    switch (s) {
        case lp::LpStatus::Optimal: return "optimal";
        case lp::LpStatus::Infeasible: return "infeasible";
        case lp::LpStatus::Unbounded: return "unbounded";
        default: return "iteration-limit";
    }
}

}  // namespace

DailyLpStructure::DailyLpStructure(const SystemModel& m, const InvestmentDecision& x)
    : model_(&m) {
    check_dimensions(m, x);
    auto bus_idx = bus_indices(m);

    n_buses_ = static_cast<int>(m.buses.size());
    n_units_ = static_cast<int>(m.thermal_units.size());
    for (size_t i = 0; i < m.candidate_wind.size(); ++i)
        if (x.wind_built[i]) built_wind_.push_back(static_cast<int>(i));
    n_wind_ = static_cast<int>(built_wind_.size());

    // In-service lines: all existing plus built candidates, in that order.
    auto add_line = [&](const sysmodel::Line& l) {
        service_from_.push_back(bus_idx.at(l.from_bus));
        service_to_.push_back(bus_idx.at(l.to_bus));
        service_cap_.push_back(l.capacity);
    };
    std::vector<double> susceptance;
    for (const auto& l : m.existing_lines) {
        add_line(l);
        susceptance.push_back(l.susceptance);
    }
    for (size_t i = 0; i < m.candidate_lines.size(); ++i) {
        if (x.line_built[i]) {
            add_line(m.candidate_lines[i]);
            susceptance.push_back(m.candidate_lines[i].susceptance);
        }
    }
    n_lines_ = static_cast<int>(service_from_.size());

    bus_peak_.assign(n_buses_, 0.0);
    for (const auto& l : m.loads) bus_peak_[bus_idx.at(l.bus)] += l.peak;

    const int ref = bus_idx.at(m.reference_bus);
    const double inf = lp::kInf;

    // Variables, block by block, hour-minor within each asset.
    gen0_ = lp_.num_vars();
    for (int u = 0; u < n_units_; ++u) {
        const auto& g = m.thermal_units[u];
        for (int t = 0; t < kHoursPerDay; ++t) lp_.add_var(g.p_min, g.p_max, g.marginal_cost);
    }
    wind0_ = lp_.num_vars();
    for (int w = 0; w < n_wind_; ++w)
        for (int t = 0; t < kHoursPerDay; ++t) lp_.add_var(0.0, inf, 0.0);
    curt0_ = lp_.num_vars();
    for (int w = 0; w < n_wind_; ++w)
        for (int t = 0; t < kHoursPerDay; ++t) lp_.add_var(0.0, inf, m.curtail_price);
    ang0_ = lp_.num_vars();
    for (int b = 0; b < n_buses_; ++b) {
        const bool fixed = b == ref;
        for (int t = 0; t < kHoursPerDay; ++t)
            lp_.add_var(fixed ? 0.0 : -inf, fixed ? 0.0 : inf, 0.0);
    }
    flow0_ = lp_.num_vars();
    for (int l = 0; l < n_lines_; ++l)
        for (int t = 0; t < kHoursPerDay; ++t)
            lp_.add_var(-service_cap_[l], service_cap_[l], 0.0);
    shed0_ = lp_.num_vars();
    for (int b = 0; b < n_buses_; ++b)
        for (int t = 0; t < kHoursPerDay; ++t) lp_.add_var(0.0, inf, m.voll);

    auto angle_var = [&](int b, int t) { return ang0_ + b * kHoursPerDay + t; };
    auto wind_var = [&](int w, int t) { return wind0_ + w * kHoursPerDay + t; };
    auto curt_var = [&](int w, int t) { return curt0_ + w * kHoursPerDay + t; };
    auto flow_var = [&](int l, int t) { return flow0_ + l * kHoursPerDay + t; };

    // Power balance per bus-hour; the day's load lands on the RHS.
    balance_row0_ = lp_.num_rows();
    std::vector<int> cols;
    std::vector<double> vals;
    for (int b = 0; b < n_buses_; ++b) {
        for (int t = 0; t < kHoursPerDay; ++t) {
            cols.clear();
            vals.clear();
            for (int u = 0; u < n_units_; ++u) {
                if (bus_idx.at(m.thermal_units[u].bus) == b) {
                    cols.push_back(gen_var(u, t));
                    vals.push_back(1.0);
                }
            }
            for (int w = 0; w < n_wind_; ++w) {
                if (bus_idx.at(m.candidate_wind[built_wind_[w]].bus) == b) {
                    cols.push_back(wind_var(w, t));
                    vals.push_back(1.0);
                }
            }
            for (int l = 0; l < n_lines_; ++l) {
                if (service_to_[l] == b) {
                    cols.push_back(flow_var(l, t));
                    vals.push_back(1.0);
                } else if (service_from_[l] == b) {
                    cols.push_back(flow_var(l, t));
                    vals.push_back(-1.0);
                }
            }
            cols.push_back(shed_var(b, t));
            vals.push_back(1.0);
            lp_.add_row(cols, vals, 0.0, 0.0);
        }
    }

    // DC flow definition: flow - B*(theta_from - theta_to) = 0.
    for (int l = 0; l < n_lines_; ++l) {
        for (int t = 0; t < kHoursPerDay; ++t) {
            const int c[3] = {flow_var(l, t), angle_var(service_from_[l], t),
                              angle_var(service_to_[l], t)};
            const double v[3] = {1.0, -susceptance[l], susceptance[l]};
            lp_.add_row(c, v, 0.0, 0.0);
        }
    }

    // Wind availability per built farm-hour; the day's wind lands on the RHS.
    windbal_row0_ = lp_.num_rows();
    for (int w = 0; w < n_wind_; ++w) {
        for (int t = 0; t < kHoursPerDay; ++t) {
            const int c[2] = {wind_var(w, t), curt_var(w, t)};
            const double v[2] = {1.0, 1.0};
            lp_.add_row(c, v, 0.0, 0.0);
        }
    }

    // Intra-day ramping, first hour unconstrained by the previous day.
    for (int u = 0; u < n_units_; ++u) {
        const double ramp = m.thermal_units[u].ramp;
        for (int t = 1; t < kHoursPerDay; ++t) {
            const int c[2] = {gen_var(u, t), gen_var(u, t - 1)};
            const double v[2] = {1.0, -1.0};
            lp_.add_row(c, v, -ramp, ramp);
        }
    }
}

void DailyLpStructure::day_row_bounds(std::span<const double> features,
                                      std::vector<double>& lower,
                                      std::vector<double>& upper) const {
    if (features.size() != kFeatureDim) {
        throw ValidationError("day_row_bounds: feature vector must have 48 entries");
    }
    lower = lp_.row_lower;
    upper = lp_.row_upper;
    for (int b = 0; b < n_buses_; ++b) {
        for (int t = 0; t < kHoursPerDay; ++t) {
            const double rhs = bus_peak_[b] * features[t];
            lower[balance_row0_ + b * kHoursPerDay + t] = rhs;
            upper[balance_row0_ + b * kHoursPerDay + t] = rhs;
        }
    }
    for (int w = 0; w < n_wind_; ++w) {
        const double cap = model_->candidate_wind[built_wind_[w]].capacity;
        for (int t = 0; t < kHoursPerDay; ++t) {
            const double rhs = cap * features[kHoursPerDay + t];
            lower[windbal_row0_ + w * kHoursPerDay + t] = rhs;
            upper[windbal_row0_ + w * kHoursPerDay + t] = rhs;
        }
    }
}

DailyDispatch DailyLpStructure::extract(const lp::LpSolution& sol) const {
    DailyDispatch d;
    d.cost = sol.objective;
    d.built_wind_indices = built_wind_;
    auto unpack = [&](int base, int count) {
        std::vector<std::array<double, kHoursPerDay>> block(count);
        for (int i = 0; i < count; ++i)
            for (int t = 0; t < kHoursPerDay; ++t)
                block[i][t] = sol.x[base + i * kHoursPerDay + t];
        return block;
    };
    d.generation = unpack(gen0_, n_units_);
    d.wind_output = unpack(wind0_, n_wind_);
    d.curtailed = unpack(curt0_, n_wind_);
    d.angles = unpack(ang0_, n_buses_);
    d.flows = unpack(flow0_, n_lines_);
    d.shed = unpack(shed0_, n_buses_);
    return d;
}

lp::LpProblem build_daily_lp(const SystemModel& m, const InvestmentDecision& x,
                             std::span<const double> features) {
    DailyLpStructure s(m, x);
    lp::LpProblem p = s.lp_;
    s.day_row_bounds(features, p.row_lower, p.row_upper);
    return p;
}

double DailyDispatch::max_balance_residual(const SystemModel& m, const InvestmentDecision& x,
                                           std::span<const double> features) const {
    auto bus_idx = bus_indices(m);
    std::vector<double> peak(m.buses.size(), 0.0);
    for (const auto& l : m.loads) peak[bus_idx.at(l.bus)] += l.peak;

    std::vector<int> from, to;
    for (const auto& l : m.existing_lines) {
        from.push_back(bus_idx.at(l.from_bus));
        to.push_back(bus_idx.at(l.to_bus));
    }
    for (size_t i = 0; i < m.candidate_lines.size(); ++i) {
        if (x.line_built[i]) {
            from.push_back(bus_idx.at(m.candidate_lines[i].from_bus));
            to.push_back(bus_idx.at(m.candidate_lines[i].to_bus));
        }
    }

    double worst = 0.0;
    for (size_t b = 0; b < m.buses.size(); ++b) {
        for (int t = 0; t < kHoursPerDay; ++t) {
            double acc = shed[b][t] - peak[b] * features[t];
            for (size_t u = 0; u < m.thermal_units.size(); ++u)
                if (bus_idx.at(m.thermal_units[u].bus) == static_cast<int>(b))
                    acc += generation[u][t];
            for (size_t w = 0; w < built_wind_indices.size(); ++w)
                if (bus_idx.at(m.candidate_wind[built_wind_indices[w]].bus) ==
                    static_cast<int>(b))
                    acc += wind_output[w][t];
            for (size_t l = 0; l < from.size(); ++l) {
                if (to[l] == static_cast<int>(b)) acc += flows[l][t];
                if (from[l] == static_cast<int>(b)) acc -= flows[l][t];
            }
            worst = std::max(worst, std::abs(acc));
        }
    }
    return worst;
}

double DailyDispatch::max_flow_excess(const SystemModel& m, const InvestmentDecision& x) const {
    std::vector<double> cap;
    for (const auto& l : m.existing_lines) cap.push_back(l.capacity);
    for (size_t i = 0; i < m.candidate_lines.size(); ++i)
        if (x.line_built[i]) cap.push_back(m.candidate_lines[i].capacity);
    double worst = 0.0;
    for (size_t l = 0; l < cap.size(); ++l)
        for (int t = 0; t < kHoursPerDay; ++t)
            worst = std::max(worst, std::abs(flows[l][t]) - cap[l]);
    return worst;
}

size_t DayCostCache::KeyHash::operator()(const Key& k) const {
    size_t h = std::hash<std::uint64_t>{}(k.mask);
    for (double f : k.features) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(f));
        std::memcpy(&bits, &f, sizeof(bits));
        h ^= std::hash<std::uint64_t>{}(bits) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
}

std::optional<double> DayCostCache::lookup(
    std::uint64_t mask, const std::array<double, kFeatureDim>& features) const {
    std::shared_lock lock(mutex_);
    auto it = map_.find(Key{mask, features});
    if (it == map_.end()) return std::nullopt;
    return it->second;
}

void DayCostCache::store(std::uint64_t mask, const std::array<double, kFeatureDim>& features,
                         double cost) {
    std::unique_lock lock(mutex_);
    map_.emplace(Key{mask, features}, cost);
}

size_t DayCostCache::size() const {
    std::shared_lock lock(mutex_);
    return map_.size();
}

namespace {

// Solves one day at a time for a fixed (model, decision), reusing the LP
// structure and the previous day's basis between solves.
class DayEvaluator {
public:
    DayEvaluator(const SystemModel& m, const InvestmentDecision& x, const OpCostOptions& opts)
        : model_(m), decision_(x), options_(opts), mask_(x.mask()) {}

    double cost(const std::array<double, kFeatureDim>& features, const std::string& what) {
        if (options_.cache) {
            if (auto hit = options_.cache->lookup(mask_, features)) return *hit;
        }
        const lp::LpSolution sol = solve(features, what);
        if (options_.cache) options_.cache->store(mask_, features, sol.objective);
        return sol.objective;
    }

    lp::LpSolution solve(const std::array<double, kFeatureDim>& features,
                         const std::string& what) {
        ensure_backend();
        structure_->day_row_bounds(features, row_lo_, row_hi_);
        backend_->set_row_bounds(row_lo_, row_hi_);
        lp::LpSolution sol = backend_->solve();
        if (sol.status != lp::LpStatus::Optimal) {
            throw BackendError("op_cost: " + what + ": LP " + status_name(sol.status));
        }
        return sol;
    }

    const DailyLpStructure& structure() {
        ensure_backend();
        return *structure_;
    }

private:
    void ensure_backend() {
        if (backend_) return;
        structure_.emplace(model_, decision_);
        backend_ = options_.backend ? options_.backend() : lp::default_backend_factory()();
        backend_->load(structure_->base_problem());
    }

    const SystemModel& model_;
    const InvestmentDecision& decision_;
    const OpCostOptions& options_;
    std::uint64_t mask_;
    std::optional<DailyLpStructure> structure_;
    std::unique_ptr<lp::LpBackend> backend_;
    std::vector<double> row_lo_, row_hi_;
};

}  // namespace

OpCostResult op_cost(const SystemModel& m, const InvestmentDecision& x, const ScenarioSet& set,
                     const OpCostOptions& options) {
    check_dimensions(m, x);
    OpCostResult res;
    res.per_entry.resize(set.size(), 0.0);
    DayEvaluator eval(m, x, options);
    for (int k = 0; k < set.size(); ++k) {
        const auto& entry = set.entries[k];
        const std::string what = "entry " + std::to_string(k);
        double day_cost;
        if (options.keep_dispatches) {
            const lp::LpSolution sol = eval.solve(entry.features, what);
            res.dispatches.push_back(eval.structure().extract(sol));
            day_cost = sol.objective;
            if (options.cache) options.cache->store(x.mask(), entry.features, day_cost);
        } else {
            day_cost = eval.cost(entry.features, what);
        }
        if (!std::isfinite(day_cost)) {
            throw BackendError("op_cost: entry " + std::to_string(k) + ": non-finite optimum");
        }
        res.per_entry[k] = entry.weight * day_cost;
        res.total += res.per_entry[k];
    }
    return res;
}

std::vector<std::pair<double, double>> per_cluster_costs(const SystemModel& m,
                                                         const InvestmentDecision& x,
                                                         const ScenarioSet& full,
                                                         const ScenarioSet& reduced,
                                                         const OpCostOptions& options) {
    check_dimensions(m, x);

    // The reduced set's provenance must partition the full set's day ids.
    std::unordered_map<int, int> full_entry_of_day;
    for (int i = 0; i < full.size(); ++i) {
        if (full.provenance[i].size() != 1) {
            throw ValidationError("per_cluster_costs: full set entry " + std::to_string(i) +
                                  " is not a single original day");
        }
        full_entry_of_day[full.provenance[i][0]] = i;
    }
    std::unordered_set<int> seen;
    size_t covered = 0;
    for (const auto& members : reduced.provenance) {
        for (int id : members) {
            if (!full_entry_of_day.count(id) || !seen.insert(id).second) {
                throw ValidationError(
                    "per_cluster_costs: provenance does not partition the full set (day " +
                    std::to_string(id) + ")");
            }
            ++covered;
        }
    }
    if (covered != static_cast<size_t>(full.size())) {
        throw ValidationError("per_cluster_costs: provenance covers " + std::to_string(covered) +
                              " of " + std::to_string(full.size()) + " days");
    }

    DayEvaluator eval(m, x, options);
    std::vector<std::pair<double, double>> out(reduced.size());
    for (int k = 0; k < reduced.size(); ++k) {
        out[k].first = reduced.entries[k].weight *
                       eval.cost(reduced.entries[k].features, "representative " + std::to_string(k));
    }
    for (int k = 0; k < reduced.size(); ++k) {
        double member_sum = 0.0;
        std::vector<int> members = reduced.provenance[k];
        std::sort(members.begin(), members.end());
        for (int id : members) {
            const int i = full_entry_of_day.at(id);
            member_sum += full.entries[i].weight *
                          eval.cost(full.entries[i].features, "day " + std::to_string(id));
        }
        out[k].second = member_sum;
    }
    return out;
}

void write_dispatch_csv(const SystemModel& m, const InvestmentDecision& x,
                        const OpCostResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");

    std::vector<sysmodel::Line> in_service = m.existing_lines;
    for (size_t c = 0; c < m.candidate_lines.size(); ++c)
        if (x.line_built[c]) in_service.push_back(m.candidate_lines[c]);

    out << "entry,hour,bus,gen,wind,shed,net_flow\n";
    char buf[256];
    for (size_t e = 0; e < result.dispatches.size(); ++e) {
        const auto& d = result.dispatches[e];
        for (size_t b = 0; b < m.buses.size(); ++b) {
            for (int t = 0; t < kHoursPerDay; ++t) {
                double gen = 0.0, wind = 0.0, net_flow = 0.0;
                for (size_t u = 0; u < m.thermal_units.size(); ++u)
                    if (m.thermal_units[u].bus == m.buses[b]) gen += d.generation[u][t];
                for (size_t w = 0; w < d.built_wind_indices.size(); ++w)
                    if (m.candidate_wind[d.built_wind_indices[w]].bus == m.buses[b])
                        wind += d.wind_output[w][t];
                for (size_t li = 0; li < in_service.size(); ++li) {
                    if (in_service[li].to_bus == m.buses[b]) net_flow += d.flows[li][t];
                    if (in_service[li].from_bus == m.buses[b]) net_flow -= d.flows[li][t];
                }
                std::snprintf(buf, sizeof(buf), "%zu,%d,%d,%.10g,%.10g,%.10g,%.10g\n", e, t,
                              m.buses[b], gen, wind, d.shed[b][t], net_flow);
                out << buf;
            }
        }
    }
}

}  // namespace rdplan::opcost
