#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "bdc/chain.hpp"
#include "bdc/stopping.hpp"

namespace bdc {

// ---------------------------------------------------------------------------
// Tail behaviour of the ratio sequence t_n as n -> infinity.
//
// t_n is a product of positive factors, so when the limit exists it lies in
// [0, +inf].  Three determined outcomes:
//   Zero           t_n -> 0        (limiting expectation +infinity)
//   PositiveFinite t_n -> v > 0    (limiting expectation x_k / v)
//   Infinite       t_n -> +inf     (limiting expectation 0)
// Undetermined is a verdict about the available evidence, not about the
// chain: the numeric scan could not separate the cases within its horizon
// (the limit may also genuinely fail to exist).
// ---------------------------------------------------------------------------
enum class TailKind { PositiveFinite, Zero, Infinite, Undetermined };

struct TailClass {
    TailKind kind = TailKind::Undetermined;
    double value = 0.0;                   // the limit, when PositiveFinite
    std::optional<Rational> exact_value;  // set when the verdict is symbolic and exact
    bool symbolic = false;                // closed-form verdict vs numeric scan
    std::string evidence;                 // how the verdict was reached
};

// ---------------------------------------------------------------------------
// Ratio sequence and its prefix sums.
//
// t_0 = 1 and t_n = t_{n-1} * l_n / r_n, so t_n = (l_1...l_n)/(r_1...r_n).
// x_n = t_0 + ... + t_{n-1} with x_0 = 0 (empty sum); x_1 = 1 always.
// Everything downstream — exit probabilities, extinction, occupation counts,
// the limiting expectation — is a ratio of these quantities.
// ---------------------------------------------------------------------------
template <Scalar S>
struct RatioTable {
    std::vector<S> t;   // t[n], n = 0..N
    std::vector<S> x;   // x[n], n = 0..N+1
    TailClass t_limit;  // behaviour beyond the table
};

// Fills t and x through index N (x through N+1) and classifies the tail.
// Float mode throws std::range_error if t_n underflows to exactly zero (all
// later ratios would be meaningless); exact mode cannot overflow.
template <Scalar S>
RatioTable<S> ratio_table(const ChainSpec& spec, std::int64_t max_n);

// Classifies lim t_n.  Families whose tails are analytically known are
// answered symbolically; table and rational-expression chains get a numeric
// verdict: PositiveFinite if t_n stabilizes within `tolerance` (relative)
// over the last horizon/10 indices, Zero / Infinite on monotone decay or
// growth past 1e-12 / 1e12, Undetermined otherwise — never a guess.
TailClass classify_tail(const ChainSpec& spec, double tolerance = 1e-9,
                        std::int64_t horizon = 100000);

// A nonnegative quantity that may be genuinely infinite (the limiting
// expectation, for one).  Infinity is an answer here, not an error, and the
// finite branch keeps an exact rational alongside the double when one is
// known so exact-mode checks never round.
struct ExtendedValue {
    bool infinite = false;
    double value = 0.0;             // finite branch
    std::optional<Rational> exact;  // set when the finite value is exactly known

    [[nodiscard]] double as_double() const {
        return infinite ? std::numeric_limits<double>::infinity() : value;
    }
};

// ---------------------------------------------------------------------------
// Exit probabilities from the interval (a, b): started at `start` strictly
// between them, the walk leaves through a or through b with
//   P(hit a) = (x_b - x_start) / (x_b - x_a),   P(hit b) the complement.
// ---------------------------------------------------------------------------
template <Scalar S>
struct ExitSplit {
    S hit_lower{};
    S hit_upper{};
};

template <Scalar S>
ExitSplit<S> exit_probabilities(const ChainSpec& spec, std::int64_t a, std::int64_t start,
                                std::int64_t b);

// Same computation against a prebuilt table (x filled through at least b);
// lets callers sweep many (a, start, b) triples over one chain cheaply.
template <Scalar S>
ExitSplit<S> exit_probabilities(const RatioTable<S>& table, std::int64_t a, std::int64_t start,
                                std::int64_t b);

// ---------------------------------------------------------------------------
// Extinction probability from the start state k:
//   P(hit 0) = (sum_{n>=k} t_n) / (sum_{n>=0} t_n),
// interpreted as 1 when the series diverge.  Divergence/convergence is
// decided in closed form where the family allows it; otherwise numerically,
// with an explicit error bound and an honest `conclusive = false` when the
// partial sums do not settle.
// ---------------------------------------------------------------------------
struct ExtinctionResult {
    bool conclusive = false;
    double probability = 0.0;       // in [0,1]; meaningful when conclusive
    std::optional<Rational> exact;  // closed form, when available
    double error_bound = 0.0;       // bound on |probability - truth| (0 when exact)
    std::string method;             // how the verdict was reached
};

ExtinctionResult extinction_probability(const ChainSpec& spec,
                                        std::int64_t series_horizon = 1000000,
                                        double tolerance = 1e-9);

// Recurrence status derived from the same series analysis: Recurrent means
// extinction is certain, Transient means escape to infinity has positive
// probability, Unknown means the numeric evidence did not settle it.
enum class Recurrence { Recurrent, Transient, Unknown };

Recurrence recurrence_verdict(const ChainSpec& spec, std::int64_t series_horizon = 1000000);

// ---------------------------------------------------------------------------
// Expected occupation counts: E[G_T^n] = expected number of visits to state
// n strictly before the stopping time T.  The regime records which T the
// values describe — absorption itself, or an explicit stopping rule (the
// latter regime is produced by the oracle and simulation layers).
// ---------------------------------------------------------------------------
struct UntilExtinction {};
using OccupationRegime = std::variant<UntilExtinction, StoppingRule>;

template <Scalar S>
struct OccupationProfile {
    std::int64_t start = 0;        // the k the counts were computed for
    OccupationRegime regime = UntilExtinction{};
    std::vector<S> expected_visits;  // state n = 1..size() stored at [n-1]
};

// E[G^n] until absorption: min(x_n, x_k) / (t_{n-1} l_n).  Valid only when
// extinction is certain; on a transient (or unsettled) chain the counts for
// n >= k are infinite and the call throws std::domain_error.
template <Scalar S>
S occupation_until_extinction(const ChainSpec& spec, std::int64_t n);

template <Scalar S>
OccupationProfile<S> occupation_profile(const ChainSpec& spec, std::int64_t max_n);

// Right-hand side of the stopped-expectation identity
//   E[X_T] = k + sum_n E[G_T^n] (r_n - l_n),
// evaluated for externally supplied occupation counts; cross-checks any
// expectation computed another way.  Double mode rejects non-finite input.
template <Scalar S>
S stopping_identity_rhs(const ChainSpec& spec, const OccupationProfile<S>& profile);

// ---------------------------------------------------------------------------
// The limiting expectation lim_m E[X_{T_m}] = x_k / t_inf, the same value for
// every non-decreasing family of finite-mean stopping times increasing to
// the absorption time.  t_inf = 0 gives +infinity, t_inf = +infinity gives
// 0; a transient chain gives +infinity as well (its t_inf is 0).  An
// Undetermined tail that cannot be rescued by the recurrence analysis is a
// refusal, not a number.
// ---------------------------------------------------------------------------
struct UndeterminedTailError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LimitExpectation {
    ExtendedValue value;
    TailClass tail;  // the classification the value was derived from
};

LimitExpectation limit_expectation(const ChainSpec& spec, std::int64_t horizon = 100000);

// ---------------------------------------------------------------------------
// Convergence criterion: sum_n |1 - l_n/r_n| < infinity forces t_n to a
// limit in (0, inf).  The condition is sufficient, not necessary, and for
// user-supplied chains only partial sums are observable — hence a
// three-valued verdict.
// ---------------------------------------------------------------------------
enum class CriterionVerdict { Satisfied, Violated, Inconclusive };

struct CriterionResult {
    CriterionVerdict verdict = CriterionVerdict::Inconclusive;
    double partial_sum = 0.0;  // sum of |1 - l_n/r_n| over the examined range
    std::string evidence;
};

CriterionResult convergence_criterion(const ChainSpec& spec, std::int64_t horizon = 100000);

}  // namespace bdc
