#pragma once

#include <cstdint>
#include <vector>

#include "rdplan/clustering.hpp"
#include "rdplan/scenario.hpp"
#include "rdplan/sysmodel.hpp"

namespace rdplan::testsupport {

/// Deterministic PRNG (splitmix64) so fixtures are identical on every
/// platform, independent of the standard library's distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int integer(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }

private:
    std::uint64_t state_;
};

/// A day with constant load and wind factors.
scenario::DayProfile flat_day(double load_factor, double wind_factor, int day_id = 0,
                              double weight = 1.0);

/// Single bus, one thermal unit, no network. Good for hand-solvable LPs.
sysmodel::SystemModel one_bus_system(double marginal_cost = 10.0, double p_max = 100.0,
                                     double peak_load = 50.0, double voll = 1000.0,
                                     double ramp = 1000.0);

/// Two buses joined by one limited line; cheap unit at bus 1, dear unit at 2.
sysmodel::SystemModel two_bus_system();

/// Synthetic heterogeneous days: `n_mild` ordinary days followed by `n_peak`
/// high-load low-wind days, shuffled into chronological positions by seed.
std::vector<scenario::DayProfile> synthetic_days(int n_mild, int n_peak, std::uint64_t seed);

/// Acceptance fixtures: small meshed systems with candidate assets that are
/// worth building under the right day mix.
sysmodel::SystemModel coastal_3bus();
sysmodel::SystemModel valley_4bus();
sysmodel::SystemModel grid_6bus();

scenario::ScenarioSet coastal_days();  // 24 days, 4 of them peak
scenario::ScenarioSet valley_days();   // 32 days, 5 of them peak
scenario::ScenarioSet grid_days();     // 40 days, 5 of them peak

/// Exhaustive greedy-merge oracle for agglomerative clustering: every step
/// scans all pairs with freshly recomputed means, applying the same linkage
/// and tie-break the library promises. Deliberately independent of the
/// library's incremental distance bookkeeping.
clustering::Partition oracle_agglomerate(const scenario::ScenarioSet& set, int k);

}  // namespace rdplan::testsupport
