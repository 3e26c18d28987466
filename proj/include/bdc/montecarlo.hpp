#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bdc/analytics.hpp"
#include "bdc/chain.hpp"
#include "bdc/stopping.hpp"

namespace bdc {

// A trajectory that runs this long without stopping is recorded as a cap hit
// and excluded from estimates (with a warning count) instead of spinning
// forever.
inline constexpr std::int64_t kDefaultStepCap = 100'000'000;

// ---------------------------------------------------------------------------
// Counter-based randomness: each path owns a generator keyed by
// (seed, path_index), so path j draws the same numbers no matter which worker
// runs it or in what order.  The stream is splitmix64 from a mixed starting
// state.
// ---------------------------------------------------------------------------
class CounterRng {
public:
    // The (seed, path) pair is avalanched into the initial state.  Merely
    // offsetting a shared state by the path index would hand consecutive
    // paths shifted copies of one stream; the outer mix makes the streams
    // statistically independent.
    CounterRng(std::uint64_t seed, std::uint64_t path_index)
        : state_(mix(mix(seed) + path_index * 0x9e3779b97f4a7c15ULL)) {}

    std::uint64_t next_bits() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with the full 53 bits of double precision.
    double next_unit() { return std::ldexp(static_cast<double>(next_bits() >> 11), -53); }

private:
    static std::uint64_t mix(std::uint64_t v) {
        v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ULL;
        v = (v ^ (v >> 27)) * 0x94d049bb133111ebULL;
        return v ^ (v >> 31);
    }

    std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// One simulated trajectory.
// ---------------------------------------------------------------------------
struct PathRecord {
    std::int64_t stopping_time = 0;
    std::int64_t terminal_state = 0;
    std::vector<std::int64_t> visits;  // visits[n] = times X equalled n strictly before stopping
    bool cap_hit = false;
};

// One trajectory from X_0 = k under the rule, deterministic given
// (seed, path_index).  Steps right with probability r_n; stops at absorption
// or when the rule fires, whichever is first.
PathRecord simulate_path(const ChainSpec& spec, const StoppingRule& rule, std::uint64_t seed,
                         std::uint64_t path_index, std::int64_t step_cap = kDefaultStepCap);

// ---------------------------------------------------------------------------
// Estimators.  All of them accumulate in integers, so merging partial results
// is exact and associative: identical output for any worker count.
// ---------------------------------------------------------------------------
struct EstimateWithCI {
    double mean = 0.0;
    double half_width_95 = 0.0;  // 1.96 * sample std / sqrt(paths)
    std::uint64_t paths = 0;     // paths contributing (cap hits excluded)
    std::uint64_t seed = 0;
    StoppingRule rule;
    std::int64_t cap_hits = 0;
};

EstimateWithCI estimate_expectation(const ChainSpec& spec, const StoppingRule& rule,
                                    std::uint64_t paths, std::uint64_t seed, int workers = 1,
                                    std::int64_t step_cap = kDefaultStepCap);

struct OccupationEstimate {
    std::int64_t start = 0;
    StoppingRule rule;
    std::uint64_t paths = 0;
    std::uint64_t seed = 0;
    std::int64_t cap_hits = 0;
    std::vector<double> mean;           // state n at [n-1]
    std::vector<double> half_width_95;  // same indexing

    // View as an occupation profile (for the monotonicity checks shared with
    // the closed-form and oracle layers).
    [[nodiscard]] OccupationProfile<double> to_profile() const {
        return {start, regime(), mean};
    }

private:
    [[nodiscard]] OccupationRegime regime() const { return rule; }
};

OccupationEstimate estimate_occupation(const ChainSpec& spec, const StoppingRule& rule,
                                       std::uint64_t paths, std::uint64_t seed, int workers = 1,
                                       std::int64_t step_cap = kDefaultStepCap);

// ---------------------------------------------------------------------------
// Convergence sweeps: one estimate per grid point, the grid indexing a
// non-decreasing rule family (step budget m for truncation, barrier b for
// interval exit), together with the analytic limit when it is determined.
// ---------------------------------------------------------------------------
enum class RuleFamily { Truncation, IntervalExit };

StoppingRule make_rule(RuleFamily family, std::int64_t index);

struct SweepPoint {
    std::int64_t index = 0;  // the grid value (m or b)
    EstimateWithCI estimate;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    bool limit_known = false;
    ExtendedValue analytic_limit;  // meaningful when limit_known
    std::string limit_note;        // diagnostic when it is not
};

SweepResult convergence_sweep(const ChainSpec& spec, RuleFamily family,
                              const std::vector<std::int64_t>& grid, std::uint64_t paths,
                              std::uint64_t seed, int workers = 1,
                              std::int64_t step_cap = kDefaultStepCap);

}  // namespace bdc
