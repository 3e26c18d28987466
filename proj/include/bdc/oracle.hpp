#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "bdc/chain.hpp"

namespace bdc {

// ---------------------------------------------------------------------------
// Brute-force reference computations on a finite truncation of the chain:
// states 0..N with BOTH 0 and N absorbing.  Everything here works directly on
// the transition data — first-step recursions, fundamental-matrix solves,
// exact distribution evolution — and deliberately never touches the ratio
// sequence t_n, so the closed-form layer can be validated against it without
// shared code paths.
// ---------------------------------------------------------------------------
template <Scalar S>
struct TruncatedChainModel {
    std::int64_t top = 0;             // N: the upper absorbing barrier
    std::vector<ProbPair<S>> steps;   // (l_n, r_n) for n = 1..N-1 at [n-1]

    static TruncatedChainModel from_spec(const ChainSpec& spec, std::int64_t top);
};

// Probability mass over states 0..N at a fixed time.
template <Scalar S>
struct DistributionVector {
    std::vector<S> mass;    // index = state, size N+1
    std::int64_t time = 0;  // number of transitions applied
};

// Probability of absorption at 0 (rather than at N) from every interior
// start: result[n] = P(hit 0 before N | X_0 = n) for n = 0..N, solved in one
// tridiagonal elimination of h_n = l_n h_{n-1} + r_n h_{n+1}, h_0 = 1,
// h_N = 0.
template <Scalar S>
std::vector<S> hit_zero_profile(const TruncatedChainModel<S>& model);

// (P(hit 0 first), P(hit N first)) from one start.
template <Scalar S>
std::pair<S, S> exit_probs_by_recursion(const TruncatedChainModel<S>& model, std::int64_t start);

// Expected visits to each interior state before absorption (at either
// barrier), from `start`: row `start` of the fundamental matrix, obtained by
// one tridiagonal solve of the transposed (I - Q) system.  result[n-1] is the
// count for state n, n = 1..N-1.
template <Scalar S>
std::vector<S> occupation_by_fundamental_matrix(const TruncatedChainModel<S>& model,
                                                std::int64_t start);

// ---------------------------------------------------------------------------
// Exact forward evolution of the state distribution, one transition at a
// time, accumulating the running occupation expectations
//   G[n] at time m  =  sum_{m'=0}^{m-1} P(X_{m'} = n)
// alongside (float mode keeps compensated accumulators).  The incremental
// class serves sweeps that need the state at many intermediate times.
// ---------------------------------------------------------------------------
template <Scalar S>
class DistributionEvolver {
public:
    DistributionEvolver(TruncatedChainModel<S> model, std::int64_t start);

    void step();
    void advance(std::int64_t steps);

    [[nodiscard]] std::int64_t time() const { return time_; }
    [[nodiscard]] const std::vector<S>& mass() const { return mass_; }
    [[nodiscard]] const std::vector<S>& occupation() const { return occupation_; }
    [[nodiscard]] DistributionVector<S> distribution() const { return {mass_, time_}; }
    [[nodiscard]] S expected_value() const;

private:
    TruncatedChainModel<S> model_;
    std::vector<S> mass_;        // current distribution over 0..N
    std::vector<S> scratch_;     // next distribution, swapped each step
    std::vector<S> occupation_;  // accumulated visits for states 1..N-1 at [n-1]
    std::vector<S> occ_carry_;   // Kahan compensation (float mode only)
    std::int64_t time_ = 0;
    std::int64_t lo_ = 0, hi_ = 0;  // current support window
};

template <Scalar S>
struct EvolutionResult {
    DistributionVector<S> dist;
    std::vector<S> occupation;  // E[G^n] for n = 1..N-1 at [n-1]
};

template <Scalar S>
EvolutionResult<S> evolve_distribution(const TruncatedChainModel<S>& model, std::int64_t start,
                                       std::int64_t steps);

template <Scalar S>
S expected_value_of(const DistributionVector<S>& dist);

// Smallest truncation level N <= max_top whose escape probability from the
// start state is below `escape_bound` (so the two-barrier model stands in for
// the one-barrier chain).  Fails with std::runtime_error when no such N
// exists below the cap — the signature of a transient chain.
std::int64_t choose_truncation(const ChainSpec& spec, double escape_bound = 1e-10,
                               std::int64_t max_top = 2000000);

}  // namespace bdc
