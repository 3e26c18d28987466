#pragma once

#include "bdc/rational.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace bdc {

// One-step transition probabilities out of a state: left (down) and right (up).
template <Scalar S>
struct ProbPair {
    S left;
    S right;
};

using RatPair = ProbPair<Rational>;

// Builds a double pair (l, 1-l) that sums to exactly 1.  Rounding each side
// of a rational pair separately leaves l + r off by an ulp, which turns the
// one-step equations into a slightly unnormalized system and costs several
// digits in anything ill-conditioned downstream.  Subtracting from 1 is exact
// for operands in [1/2, 1] (Sterbenz), so the smaller side is derived from
// the rounded larger one; each side stays within an ulp of the request.
inline ProbPair<double> exact_complement(double left) {
    if (left >= 0.5) return {left, 1.0 - left};
    const double right = 1.0 - left;  // the one inexact step
    return {1.0 - right, right};
}

// What a finite transition table prescribes beyond its last row.
struct TailRule {
    enum class Kind { ConstantHalf, ConstantDrift, RepeatLast };
    Kind kind = Kind::ConstantHalf;
    Rational up = Rational(1, 2);  // right-step probability, ConstantDrift only
};

// ---------------------------------------------------------------------------
// Chain families. A family fixes (l_n, r_n) for every state n >= 1; state 0 is
// always absorbing and never described.

struct SimpleSymmetricFamily {};  // l_n = r_n = 1/2

struct ConstantDriftFamily {  // r_n = up for all n
    Rational up;
};

struct Example1Family {};  // l_n = n/(2n+1), r_n = (n+1)/(2n+1)

struct Example1MirroredFamily {};  // the same pair with left and right exchanged

struct EventuallyConstantFamily {  // explicit rows 1..M, then l = r = 1/2
    std::vector<RatPair> prefix;
};

struct TableFamily {  // explicit rows 1..len, then the tail rule
    std::vector<RatPair> rows;
    TailRule tail;
    bool exact = true;  // false when rows came in as floating-point literals
    // cached double views, built once at construction
    std::vector<ProbPair<double>> rows_d;
    ProbPair<double> tail_d{0.5, 0.5};
};

struct RationalExpressionFamily {  // l_n = num(n)/den(n), r_n = 1 - l_n
    std::vector<Rational> num;  // polynomial coefficients, ascending degree
    std::vector<Rational> den;
    std::vector<double> num_d;
    std::vector<double> den_d;
};

using Family = std::variant<SimpleSymmetricFamily, ConstantDriftFamily, Example1Family,
                            Example1MirroredFamily, EventuallyConstantFamily, TableFamily,
                            RationalExpressionFamily>;

TableFamily make_table_family(std::vector<RatPair> rows, TailRule tail, bool exact);
RationalExpressionFamily make_rational_expression_family(std::vector<Rational> num,
                                                         std::vector<Rational> den);

// ---------------------------------------------------------------------------
// ChainSpec: immutable description of one birth-death chain plus its start
// state. All accessors are pure; instances are safe to share across threads.

class ChainSpec {
public:
    ChainSpec(Family family, std::int64_t start_state, std::string name = {});

    const Family& family() const { return family_; }
    std::int64_t start_state() const { return start_state_; }
    const std::string& name() const { return name_; }

    // True when every row is an exact rational (everything except a table fed
    // with floating-point literals). Exact chains make equality tests
    // tolerance-free.
    bool exact() const { return exact_; }

    // (l_n, r_n) for n >= 1. State 0 is absorbing and has no pair.
    RatPair probs_exact(std::int64_t n) const;
    ProbPair<double> probs(std::int64_t n) const;

    template <Scalar S>
    ProbPair<S> probs_at(std::int64_t n) const {
        if constexpr (std::same_as<S, Rational>) {
            return probs_exact(n);
        } else {
            return probs(n);
        }
    }

private:
    Family family_;
    std::int64_t start_state_;
    std::string name_;
    bool exact_;
};

// ---------------------------------------------------------------------------
// Validation: checks the per-state invariants 0 < l_n, r_n < 1 and
// l_n + r_n = 1 at states 1..probe_depth, plus the start state. Violations are
// reported, never thrown. Exact families are checked with exact arithmetic;
// float tables get a 1e-15 tolerance on normalization.

struct Violation {
    std::int64_t state = 0;  // 0 for spec-level problems (bad start state)
    std::string message;
};

struct ValidationReport {
    bool valid = true;
    std::optional<Violation> violation;
};

ValidationReport validate(const ChainSpec& spec, std::int64_t probe_depth);

}  // namespace bdc
