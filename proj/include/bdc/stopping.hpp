#pragma once

#include <cstdint>
#include <string>
#include <variant>

namespace bdc {

// Stopping rules for a walk started at k >= 1.  Each is almost surely finite
// and has finite expectation, which is what makes optional stopping usable.
//
// Truncation: stop at absorption or after m steps, whichever comes first.
// IntervalExit: stop when the walk first leaves the open interval (0, upper),
//   i.e. hits 0 or reaches upper.
// TruncatedIntervalExit: interval exit with an additional step cap m.
struct Truncation {
    std::int64_t steps = 0;
};

struct IntervalExit {
    std::int64_t upper = 0;
};

struct TruncatedIntervalExit {
    std::int64_t steps = 0;
    std::int64_t upper = 0;
};

using StoppingRule = std::variant<Truncation, IntervalExit, TruncatedIntervalExit>;

inline std::string describe(const StoppingRule& rule) {
    if (const auto* t = std::get_if<Truncation>(&rule))
        return "stop after " + std::to_string(t->steps) + " steps or at absorption";
    if (const auto* e = std::get_if<IntervalExit>(&rule))
        return "stop on exit from (0, " + std::to_string(e->upper) + ")";
    const auto& te = std::get<TruncatedIntervalExit>(rule);
    return "stop on exit from (0, " + std::to_string(te.upper) + ") or after " +
           std::to_string(te.steps) + " steps";
}

}  // namespace bdc
