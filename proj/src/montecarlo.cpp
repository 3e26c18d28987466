#include "bdc/montecarlo.hpp"

#include <algorithm>
#include <exception>
#include <stdexcept>
#include <thread>
#include <utility>

namespace bdc {
namespace {

// Dense per-state probability lookup, grown on demand.  Each worker owns one,
// so growth needs no synchronization; states beyond the dense limit (rare,
// deep excursions only) fall back to direct evaluation.
class ProbCache {
public:
    explicit ProbCache(const ChainSpec& spec) : spec_(&spec) {}

    ProbPair<double> at(std::int64_t n) {
        if (n <= static_cast<std::int64_t>(dense_.size())) return dense_[static_cast<std::size_t>(n - 1)];
        if (n > kDenseLimit) return spec_->probs(n);
        const std::int64_t target =
            std::min<std::int64_t>(kDenseLimit,
                                   std::max<std::int64_t>(n, 2 * static_cast<std::int64_t>(dense_.size()) + 8));
        for (std::int64_t m = static_cast<std::int64_t>(dense_.size()) + 1; m <= target; ++m)
            dense_.push_back(spec_->probs(m));
        return dense_[static_cast<std::size_t>(n - 1)];
    }

private:
    static constexpr std::int64_t kDenseLimit = std::int64_t{1} << 16;

    const ChainSpec* spec_;
    std::vector<ProbPair<double>> dense_;
};

bool rule_fires(const StoppingRule& rule, std::int64_t steps, std::int64_t state) {
    if (const auto* t = std::get_if<Truncation>(&rule)) return steps >= t->steps;
    if (const auto* e = std::get_if<IntervalExit>(&rule)) return state >= e->upper;
    const auto& both = std::get<TruncatedIntervalExit>(rule);
    return steps >= both.steps || state >= both.upper;
}

void validate_rule(const StoppingRule& rule) {
    if (const auto* t = std::get_if<Truncation>(&rule)) {
        if (t->steps < 0) throw std::invalid_argument("truncation step budget must be >= 0");
        return;
    }
    if (const auto* e = std::get_if<IntervalExit>(&rule)) {
        if (e->upper < 1) throw std::invalid_argument("exit barrier must be >= 1");
        return;
    }
    const auto& both = std::get<TruncatedIntervalExit>(rule);
    if (both.steps < 0) throw std::invalid_argument("truncation step budget must be >= 0");
    if (both.upper < 1) throw std::invalid_argument("exit barrier must be >= 1");
}

struct WalkOutcome {
    std::int64_t steps = 0;
    std::int64_t state = 0;
    bool cap_hit = false;
};

// One trajectory.  When `visits` is given, per-state counts are tallied into
// it and the states touched are appended to `touched` (so the caller can
// reset only those slots between paths).
WalkOutcome run_walk(ProbCache& probs, std::int64_t start, const StoppingRule& rule,
                     CounterRng rng, std::int64_t step_cap, std::vector<std::int64_t>* visits,
                     std::vector<std::int64_t>* touched) {
    std::int64_t state = start;
    std::int64_t steps = 0;
    for (;;) {
        if (state == 0 || rule_fires(rule, steps, state)) return {steps, state, false};
        if (steps >= step_cap) return {steps, state, true};
        if (visits != nullptr) {
            if (state >= static_cast<std::int64_t>(visits->size()))
                visits->resize(static_cast<std::size_t>(state) + 1, 0);
            if ((*visits)[static_cast<std::size_t>(state)] == 0)
                touched->push_back(state);
            ++(*visits)[static_cast<std::size_t>(state)];
        }
        const ProbPair<double> pr = probs.at(state);
        state += (rng.next_unit() < pr.right) ? 1 : -1;
        ++steps;
    }
}

std::uint64_t mix64(std::uint64_t v) {
    v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ULL;
    v = (v ^ (v >> 27)) * 0x94d049bb133111ebULL;
    return v ^ (v >> 31);
}

// Runs `body(range_begin, range_end, slot)` over a static contiguous
// partition of [0, paths); exceptions from workers are rethrown here.
template <class Body>
void run_partitioned(std::uint64_t paths, int workers, std::vector<std::exception_ptr>& errors,
                     Body body) {
    const int use = std::clamp(workers, 1, 256);
    errors.assign(static_cast<std::size_t>(use), nullptr);
    if (use == 1) {
        try {
            body(std::uint64_t{0}, paths, 0);
        } catch (...) {
            errors[0] = std::current_exception();
        }
    } else {
        const std::uint64_t chunk = (paths + static_cast<std::uint64_t>(use) - 1) /
                                    static_cast<std::uint64_t>(use);
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(use));
        for (int w = 0; w < use; ++w) {
            const std::uint64_t begin = std::min(paths, chunk * static_cast<std::uint64_t>(w));
            const std::uint64_t end = std::min(paths, begin + chunk);
            pool.emplace_back([&, begin, end, w] {
                try {
                    body(begin, end, w);
                } catch (...) {
                    errors[static_cast<std::size_t>(w)] = std::current_exception();
                }
            });
        }
        for (std::thread& th : pool) th.join();
    }
    for (const std::exception_ptr& err : errors)
        if (err) std::rethrow_exception(err);
}

}  // namespace

PathRecord simulate_path(const ChainSpec& spec, const StoppingRule& rule, std::uint64_t seed,
                         std::uint64_t path_index, std::int64_t step_cap) {
    validate_rule(rule);
    ProbCache cache(spec);
    std::vector<std::int64_t> visits;
    std::vector<std::int64_t> touched;
    const WalkOutcome outcome = run_walk(cache, spec.start_state(), rule,
                                         CounterRng(seed, path_index), step_cap, &visits,
                                         &touched);
    PathRecord record;
    record.stopping_time = outcome.steps;
    record.terminal_state = outcome.state;
    record.visits = std::move(visits);
    record.cap_hit = outcome.cap_hit;
    return record;
}

EstimateWithCI estimate_expectation(const ChainSpec& spec, const StoppingRule& rule,
                                    std::uint64_t paths, std::uint64_t seed, int workers,
                                    std::int64_t step_cap) {
    validate_rule(rule);
    if (paths < 2) throw std::invalid_argument("estimates need at least 2 paths");

    struct Accum {
        unsigned __int128 sum = 0;
        unsigned __int128 sum_sq = 0;
        std::uint64_t used = 0;
        std::int64_t cap_hits = 0;
    };
    std::vector<Accum> parts(static_cast<std::size_t>(std::clamp(workers, 1, 256)));
    std::vector<std::exception_ptr> errors;
    run_partitioned(paths, workers, errors,
                    [&](std::uint64_t begin, std::uint64_t end, int slot) {
                        ProbCache cache(spec);
                        Accum local;
                        for (std::uint64_t j = begin; j < end; ++j) {
                            const WalkOutcome out =
                                run_walk(cache, spec.start_state(), rule, CounterRng(seed, j),
                                         step_cap, nullptr, nullptr);
                            if (out.cap_hit) {
                                ++local.cap_hits;
                                continue;
                            }
                            const auto v = static_cast<unsigned __int128>(out.state);
                            local.sum += v;
                            local.sum_sq += v * v;
                            ++local.used;
                        }
                        parts[static_cast<std::size_t>(slot)] = local;
                    });

    Accum total;
    for (const Accum& part : parts) {
        total.sum += part.sum;
        total.sum_sq += part.sum_sq;
        total.used += part.used;
        total.cap_hits += part.cap_hits;
    }
    if (total.used == 0)
        throw std::runtime_error("every simulated path hit the step cap; no estimate possible");

    EstimateWithCI est;
    est.paths = total.used;
    est.seed = seed;
    est.rule = rule;
    est.cap_hits = total.cap_hits;
    const long double n = static_cast<long double>(total.used);
    const long double sum = static_cast<long double>(total.sum);
    est.mean = static_cast<double>(sum / n);
    if (total.used >= 2) {
        const long double sum_sq = static_cast<long double>(total.sum_sq);
        const long double var = std::max<long double>(0.0L, (sum_sq - sum * sum / n) / (n - 1));
        est.half_width_95 = static_cast<double>(1.96L * std::sqrt(var / n));
    } else {
        est.half_width_95 = std::numeric_limits<double>::infinity();
    }
    return est;
}

OccupationEstimate estimate_occupation(const ChainSpec& spec, const StoppingRule& rule,
                                       std::uint64_t paths, std::uint64_t seed, int workers,
                                       std::int64_t step_cap) {
    validate_rule(rule);
    if (paths < 2) throw std::invalid_argument("estimates need at least 2 paths");

    struct Accum {
        std::vector<unsigned __int128> sum;     // indexed by state
        std::vector<unsigned __int128> sum_sq;  // indexed by state
        std::uint64_t used = 0;
        std::int64_t cap_hits = 0;
    };
    std::vector<Accum> parts(static_cast<std::size_t>(std::clamp(workers, 1, 256)));
    std::vector<std::exception_ptr> errors;
    run_partitioned(
        paths, workers, errors, [&](std::uint64_t begin, std::uint64_t end, int slot) {
            ProbCache cache(spec);
            Accum local;
            std::vector<std::int64_t> visits;
            std::vector<std::int64_t> touched;
            for (std::uint64_t j = begin; j < end; ++j) {
                touched.clear();
                const WalkOutcome out = run_walk(cache, spec.start_state(), rule,
                                                 CounterRng(seed, j), step_cap, &visits, &touched);
                if (out.cap_hit) {
                    ++local.cap_hits;
                    for (const std::int64_t n : touched) visits[static_cast<std::size_t>(n)] = 0;
                    continue;
                }
                ++local.used;
                for (const std::int64_t n : touched) {
                    const std::size_t i = static_cast<std::size_t>(n);
                    if (i >= local.sum.size()) {
                        local.sum.resize(i + 1, 0);
                        local.sum_sq.resize(i + 1, 0);
                    }
                    const auto v = static_cast<unsigned __int128>(visits[i]);
                    local.sum[i] += v;
                    local.sum_sq[i] += v * v;
                    visits[i] = 0;
                }
            }
            parts[static_cast<std::size_t>(slot)] = std::move(local);
        });

    Accum total;
    for (Accum& part : parts) {
        if (part.sum.size() > total.sum.size()) {
            total.sum.resize(part.sum.size(), 0);
            total.sum_sq.resize(part.sum.size(), 0);
        }
        for (std::size_t i = 0; i < part.sum.size(); ++i) {
            total.sum[i] += part.sum[i];
            total.sum_sq[i] += part.sum_sq[i];
        }
        total.used += part.used;
        total.cap_hits += part.cap_hits;
    }
    if (total.used == 0)
        throw std::runtime_error("every simulated path hit the step cap; no estimate possible");

    OccupationEstimate est;
    est.start = spec.start_state();
    est.rule = rule;
    est.paths = total.used;
    est.seed = seed;
    est.cap_hits = total.cap_hits;
    const std::size_t top = total.sum.size();  // highest visited state + 1
    const long double n = static_cast<long double>(total.used);
    for (std::size_t state = 1; state < top; ++state) {
        const long double sum = static_cast<long double>(total.sum[state]);
        const long double sum_sq = static_cast<long double>(total.sum_sq[state]);
        est.mean.push_back(static_cast<double>(sum / n));
        const long double var = std::max<long double>(0.0L, (sum_sq - sum * sum / n) / (n - 1));
        est.half_width_95.push_back(static_cast<double>(1.96L * std::sqrt(var / n)));
    }
    return est;
}

StoppingRule make_rule(RuleFamily family, std::int64_t index) {
    if (family == RuleFamily::Truncation) return Truncation{index};
    return IntervalExit{index};
}

SweepResult convergence_sweep(const ChainSpec& spec, RuleFamily family,
                              const std::vector<std::int64_t>& grid, std::uint64_t paths,
                              std::uint64_t seed, int workers, std::int64_t step_cap) {
    if (grid.empty()) throw std::invalid_argument("sweep grid must not be empty");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1])
            throw std::invalid_argument("sweep grid must be strictly increasing");

    SweepResult out;
    out.points.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        // Independent draws per grid point, derived deterministically from the
        // base seed and the point's position.
        const std::uint64_t point_seed = mix64(seed + 0x9e3779b97f4a7c15ULL * (i + 1));
        out.points.push_back({grid[i], estimate_expectation(spec, make_rule(family, grid[i]),
                                                            paths, point_seed, workers,
                                                            step_cap)});
    }
    try {
        const LimitExpectation limit = limit_expectation(spec);
        out.limit_known = true;
        out.analytic_limit = limit.value;
    } catch (const UndeterminedTailError& refusal) {
        out.limit_note = refusal.what();
    }
    return out;
}

}  // namespace bdc
