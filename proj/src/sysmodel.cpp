#include "rdplan/sysmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "rdplan/errors.hpp"

namespace rdplan::sysmodel {

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

std::uint64_t InvestmentDecision::mask() const {
    std::uint64_t m = 0;
    int bit = 0;
    for (bool b : line_built) m |= (b ? 1ull : 0ull) << bit++;
    for (bool b : wind_built) m |= (b ? 1ull : 0ull) << bit++;
    return m;
}

std::string InvestmentDecision::bits() const {
    std::string s;
    s.reserve(line_built.size() + wind_built.size());
    for (bool b : line_built) s.push_back(b ? '1' : '0');
    for (bool b : wind_built) s.push_back(b ? '1' : '0');
    return s;
}

ValidationResult validate(const SystemModel& m) {
    ValidationResult r;
    auto error = [&](std::string where, std::string msg) {
        r.violations.push_back({Violation::Severity::Error, std::move(where), std::move(msg)});
    };
    auto warning = [&](std::string where, std::string msg) {
        r.violations.push_back({Violation::Severity::Warning, std::move(where), std::move(msg)});
    };

    std::unordered_map<BusId, int> bus_index;
    for (int i = 0; i < static_cast<int>(m.buses.size()); ++i) {
        if (!bus_index.emplace(m.buses[i], i).second) {
            error("buses[" + std::to_string(i) + "]",
                  "duplicate bus id " + std::to_string(m.buses[i]));
        }
    }
    if (m.buses.empty()) error("buses", "no buses defined");

    auto known_bus = [&](BusId b) { return bus_index.count(b) > 0; };
    auto check_line = [&](const Line& l, const std::string& where) {
        if (l.from_bus == l.to_bus)
            error(where, "self-loop at bus " + std::to_string(l.from_bus));
        if (!known_bus(l.from_bus))
            error(where, "unknown from_bus " + std::to_string(l.from_bus));
        if (!known_bus(l.to_bus))
            error(where, "unknown to_bus " + std::to_string(l.to_bus));
        if (!(l.susceptance > 0.0)) error(where, "susceptance must be > 0");
        if (!(l.capacity > 0.0)) error(where, "capacity must be > 0");
        if (l.invest_cost < 0.0) error(where, "invest_cost must be >= 0");
    };
    for (size_t i = 0; i < m.existing_lines.size(); ++i)
        check_line(m.existing_lines[i], "existing_lines[" + std::to_string(i) + "]");
    for (size_t i = 0; i < m.candidate_lines.size(); ++i)
        check_line(m.candidate_lines[i], "candidate_lines[" + std::to_string(i) + "]");

    double max_marginal = 0.0;
    for (size_t i = 0; i < m.thermal_units.size(); ++i) {
        const auto& g = m.thermal_units[i];
        const std::string where = "thermal[" + std::to_string(i) + "]";
        if (!known_bus(g.bus)) error(where, "unknown bus " + std::to_string(g.bus));
        if (g.p_min < 0.0 || g.p_min > g.p_max) error(where, "need 0 <= p_min <= p_max");
        if (!(g.ramp > 0.0)) error(where, "ramp must be > 0");
        if (g.marginal_cost < 0.0) error(where, "marginal_cost must be >= 0");
        max_marginal = std::max(max_marginal, g.marginal_cost);
        if (g.p_min > 0.0)
            warning(where, "p_min > 0 can make low-load days infeasible since the "
                           "balance admits no over-generation");
    }
    for (size_t i = 0; i < m.candidate_wind.size(); ++i) {
        const auto& w = m.candidate_wind[i];
        const std::string where = "candidate_wind[" + std::to_string(i) + "]";
        if (!known_bus(w.bus)) error(where, "unknown bus " + std::to_string(w.bus));
        if (!(w.capacity > 0.0)) error(where, "capacity must be > 0");
        if (w.invest_cost < 0.0) error(where, "invest_cost must be >= 0");
    }
    for (size_t i = 0; i < m.loads.size(); ++i) {
        const auto& l = m.loads[i];
        const std::string where = "loads[" + std::to_string(i) + "]";
        if (!known_bus(l.bus)) error(where, "unknown bus " + std::to_string(l.bus));
        if (l.peak < 0.0) error(where, "peak must be >= 0");
    }
    if (!known_bus(m.reference_bus))
        error("reference_bus", "unknown bus " + std::to_string(m.reference_bus));
    if (!(m.voll > max_marginal))
        error("voll", "voll must exceed the largest thermal marginal cost");
    if (m.curtail_price < 0.0) error("curtail_price", "curtail_price must be >= 0");

    // Islands: every bus with load or generation must be reachable over the
    // existing grid (candidates may not be built).
    if (!m.buses.empty() && bus_index.size() == m.buses.size()) {
        UnionFind uf(static_cast<int>(m.buses.size()));
        for (const auto& l : m.existing_lines) {
            if (known_bus(l.from_bus) && known_bus(l.to_bus))
                uf.unite(bus_index[l.from_bus], bus_index[l.to_bus]);
        }
        std::set<BusId> live;
        for (const auto& l : m.loads)
            if (l.peak > 0.0 && known_bus(l.bus)) live.insert(l.bus);
        for (const auto& g : m.thermal_units)
            if (g.p_max > 0.0 && known_bus(g.bus)) live.insert(g.bus);
        if (live.size() > 1) {
            const int root = uf.find(bus_index[*live.begin()]);
            for (BusId b : live) {
                if (uf.find(bus_index[b]) != root) {
                    error("existing_lines", "island: bus " + std::to_string(b) +
                                                " is disconnected from bus " +
                                                std::to_string(*live.begin()));
                }
            }
        }
    }
    return r;
}

double invest_cost(const SystemModel& m, const InvestmentDecision& x) {
    if (x.line_built.size() != m.candidate_lines.size() ||
        x.wind_built.size() != m.candidate_wind.size()) {
        throw ValidationError("invest_cost: decision dimensions (" +
                              std::to_string(x.line_built.size()) + "," +
                              std::to_string(x.wind_built.size()) +
                              ") do not match candidates (" +
                              std::to_string(m.candidate_lines.size()) + "," +
                              std::to_string(m.candidate_wind.size()) + ")");
    }
    double c = 0.0;
    for (size_t i = 0; i < x.line_built.size(); ++i)
        if (x.line_built[i]) c += m.candidate_lines[i].invest_cost;
    for (size_t i = 0; i < x.wind_built.size(); ++i)
        if (x.wind_built[i]) c += m.candidate_wind[i].invest_cost;
    return c;
}

InvestmentDecision decision_from_index(const SystemModel& m, std::uint64_t index) {
    const int nl = static_cast<int>(m.candidate_lines.size());
    const int nw = static_cast<int>(m.candidate_wind.size());
    const int n = nl + nw;
    InvestmentDecision x;
    x.line_built.resize(nl);
    x.wind_built.resize(nw);
    for (int c = 0; c < n; ++c) {
        const bool bit = (index >> (n - 1 - c)) & 1ull;
        if (c < nl)
            x.line_built[c] = bit;
        else
            x.wind_built[c - nl] = bit;
    }
    return x;
}

std::vector<InvestmentDecision> enumerate_decisions(const SystemModel& m, int limit) {
    const int n = m.candidate_count();
    if (n > limit) {
        throw CapacityError("enumerate_decisions: " + std::to_string(n) +
                            " candidates exceed the enumeration limit of " +
                            std::to_string(limit) + "; raise --enum-limit to override");
    }
    const std::uint64_t count = 1ull << n;
    std::vector<InvestmentDecision> out;
    out.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) out.push_back(decision_from_index(m, i));
    return out;
}

}  // namespace rdplan::sysmodel
