#include "bdc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bdc {
namespace {

// Gaussian elimination with partial pivoting on a tridiagonal system,
// consuming its inputs.  Row swaps bound the multipliers by 1 and create a
// second superdiagonal (fill); without them the weakly diagonally dominant
// systems here can shrink their pivots and lose digits.
template <typename E>
std::vector<E> eliminate_tridiagonal(std::vector<E> sub, std::vector<E> diag, std::vector<E> sup,
                                     std::vector<E> rhs) {
    const std::size_t m = diag.size();
    auto check_pivot = [](const E& pivot, std::size_t row) {
        if constexpr (std::same_as<E, Rational>) {
            if (pivot == 0)
                throw std::logic_error("tridiagonal elimination hit a zero pivot at row " +
                                       std::to_string(row));
        } else {
            if (std::abs(pivot) < 1e-280)
                throw std::runtime_error("tridiagonal elimination hit a near-zero pivot at row " +
                                         std::to_string(row) +
                                         "; the float-mode solve lost the system");
        }
    };
    std::vector<E> fill(m, E(0));
    for (std::size_t i = 0; i + 1 < m; ++i) {
        bool swap_rows;
        if constexpr (std::same_as<E, Rational>) {
            swap_rows = diag[i] == 0;  // exact arithmetic only needs to dodge a zero pivot
        } else {
            swap_rows = std::abs(diag[i]) < std::abs(sub[i + 1]);
        }
        if (swap_rows) {
            std::swap(diag[i], sub[i + 1]);
            std::swap(sup[i], diag[i + 1]);
            std::swap(fill[i], sup[i + 1]);
            std::swap(rhs[i], rhs[i + 1]);
        }
        check_pivot(diag[i], i);
        const E w = sub[i + 1] / diag[i];
        diag[i + 1] -= w * sup[i];
        sup[i + 1] -= w * fill[i];
        rhs[i + 1] -= w * rhs[i];
    }
    check_pivot(diag[m - 1], m - 1);
    std::vector<E> x(m);
    x[m - 1] = rhs[m - 1] / diag[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) {
        E acc = rhs[i] - sup[i] * x[i + 1];
        if (i + 2 < m) acc -= fill[i] * x[i + 2];
        x[i] = acc / diag[i];
    }
    return x;
}

// Solves sub[i]*x[i-1] + diag[i]*x[i] + sup[i]*x[i+1] = rhs[i] for
// i = 0..m-1 (sub[0] and sup[m-1] unused).  The float instantiation runs the
// elimination in extended precision: the inverse of these systems holds
// occupation-scale entries, so a plain double solve would leave forward
// errors a few orders above rounding even though it is backward stable.
template <Scalar S>
std::vector<S> solve_tridiagonal(std::vector<S> sub, std::vector<S> diag, std::vector<S> sup,
                                 std::vector<S> rhs) {
    if constexpr (std::same_as<S, double>) {
        auto widen = [](const std::vector<double>& v) {
            return std::vector<long double>(v.begin(), v.end());
        };
        const std::vector<long double> a = widen(sub), d = widen(diag), c = widen(sup),
                                       b = widen(rhs);
        const std::size_t m = d.size();
        std::vector<long double> x = eliminate_tridiagonal(a, d, c, b);
        // One step of iterative refinement: the systems can be ill-conditioned
        // enough (inverse entries at occupation scale) that even the extended
        // sweep leaves its forward error well above double rounding.
        std::vector<long double> res(m);
        for (std::size_t i = 0; i < m; ++i) {
            long double acc = b[i] - d[i] * x[i];
            if (i > 0) acc -= a[i] * x[i - 1];
            if (i + 1 < m) acc -= c[i] * x[i + 1];
            res[i] = acc;
        }
        const std::vector<long double> dx = eliminate_tridiagonal(a, d, c, std::move(res));
        for (std::size_t i = 0; i < m; ++i) x[i] += dx[i];
        return std::vector<double>(x.begin(), x.end());
    } else {
        return eliminate_tridiagonal(std::move(sub), std::move(diag), std::move(sup),
                                     std::move(rhs));
    }
}

template <Scalar S>
void require_interior(const TruncatedChainModel<S>& model, std::int64_t start) {
    if (model.top < 2) throw std::invalid_argument("truncated model needs at least states 0..2");
    if (start <= 0 || start >= model.top)
        throw std::invalid_argument("start must lie strictly between the absorbing barriers");
}

}  // namespace

template <Scalar S>
TruncatedChainModel<S> TruncatedChainModel<S>::from_spec(const ChainSpec& spec, std::int64_t top) {
    if (top < 2) throw std::invalid_argument("truncated model needs at least states 0..2");
    TruncatedChainModel<S> model;
    model.top = top;
    model.steps.reserve(static_cast<std::size_t>(top - 1));
    for (std::int64_t n = 1; n < top; ++n) model.steps.push_back(spec.probs_at<S>(n));
    return model;
}

template <Scalar S>
std::vector<S> hit_zero_profile(const TruncatedChainModel<S>& model) {
    if (model.top < 2) throw std::invalid_argument("truncated model needs at least states 0..2");
    const std::size_t m = static_cast<std::size_t>(model.top - 1);
    // h_n - l_n h_{n-1} - r_n h_{n+1} = 0 with h_0 = 1, h_N = 0: the boundary
    // terms move to the right-hand side.
    std::vector<S> sub(m), diag(m, S(1)), sup(m), rhs(m, S(0));
    for (std::size_t i = 0; i < m; ++i) {
        sub[i] = -model.steps[i].left;
        sup[i] = -model.steps[i].right;
    }
    rhs[0] = model.steps[0].left;  // l_1 * h_0
    std::vector<S> interior = solve_tridiagonal(std::move(sub), std::move(diag), std::move(sup),
                                                std::move(rhs));
    std::vector<S> profile(static_cast<std::size_t>(model.top) + 1, S(0));
    profile[0] = S(1);
    for (std::size_t i = 0; i < m; ++i) profile[i + 1] = std::move(interior[i]);
    return profile;
}

template <Scalar S>
std::pair<S, S> exit_probs_by_recursion(const TruncatedChainModel<S>& model, std::int64_t start) {
    require_interior(model, start);
    const std::vector<S> profile = hit_zero_profile(model);
    S down = profile[static_cast<std::size_t>(start)];
    S up = S(1) - down;
    return {std::move(down), std::move(up)};
}

template <Scalar S>
std::vector<S> occupation_by_fundamental_matrix(const TruncatedChainModel<S>& model,
                                                std::int64_t start) {
    require_interior(model, start);
    const std::size_t m = static_cast<std::size_t>(model.top - 1);
    // Row `start` of (I - Q)^{-1} is the solution of the transposed system
    // (I - Q)^T v = e_start: diagonal 1, below-diagonal -r_{n-1}, above
    // -l_{n+1} (coefficients of the transpose, states n = 1..N-1).
    std::vector<S> sub(m), diag(m, S(1)), sup(m), rhs(m, S(0));
    for (std::size_t i = 1; i < m; ++i) sub[i] = -model.steps[i - 1].right;
    for (std::size_t i = 0; i + 1 < m; ++i) sup[i] = -model.steps[i + 1].left;
    rhs[static_cast<std::size_t>(start - 1)] = S(1);
    return solve_tridiagonal(std::move(sub), std::move(diag), std::move(sup), std::move(rhs));
}

// ---------------------------------------------------------------------------
// Distribution evolution.
// ---------------------------------------------------------------------------
template <Scalar S>
DistributionEvolver<S>::DistributionEvolver(TruncatedChainModel<S> model, std::int64_t start)
    : model_(std::move(model)) {
    if (model_.top < 2) throw std::invalid_argument("truncated model needs at least states 0..2");
    if (start < 0 || start > model_.top)
        throw std::invalid_argument("start must lie within 0..N");
    const std::size_t states = static_cast<std::size_t>(model_.top) + 1;
    mass_.assign(states, S(0));
    scratch_.assign(states, S(0));
    occupation_.assign(static_cast<std::size_t>(model_.top - 1), S(0));
    if constexpr (std::same_as<S, double>)
        occ_carry_.assign(occupation_.size(), 0.0);
    mass_[static_cast<std::size_t>(start)] = S(1);
    lo_ = hi_ = start;
}

template <Scalar S>
void DistributionEvolver<S>::step() {
    // Visits count states strictly before the stopping time, so the current
    // mass joins the occupation tallies before the transition is applied.
    for (std::int64_t n = std::max<std::int64_t>(lo_, 1); n <= std::min(hi_, model_.top - 1);
         ++n) {
        const std::size_t i = static_cast<std::size_t>(n - 1);
        if constexpr (std::same_as<S, double>) {
            const double y = mass_[static_cast<std::size_t>(n)] - occ_carry_[i];
            const double t = occupation_[i] + y;
            occ_carry_[i] = (t - occupation_[i]) - y;
            occupation_[i] = t;
        } else {
            occupation_[i] += mass_[static_cast<std::size_t>(n)];
        }
    }

    const std::int64_t next_lo = std::max<std::int64_t>(lo_ - 1, 0);
    const std::int64_t next_hi = std::min<std::int64_t>(hi_ + 1, model_.top);
    for (std::int64_t n = next_lo; n <= next_hi; ++n)
        scratch_[static_cast<std::size_t>(n)] = S(0);
    for (std::int64_t n = lo_; n <= hi_; ++n) {
        const S& p = mass_[static_cast<std::size_t>(n)];
        if (n == 0 || n == model_.top) {
            scratch_[static_cast<std::size_t>(n)] += p;
        } else {
            const ProbPair<S>& pr = model_.steps[static_cast<std::size_t>(n - 1)];
            scratch_[static_cast<std::size_t>(n - 1)] += pr.left * p;
            scratch_[static_cast<std::size_t>(n + 1)] += pr.right * p;
        }
    }
    mass_.swap(scratch_);
    lo_ = next_lo;
    hi_ = next_hi;
    ++time_;
}

template <Scalar S>
void DistributionEvolver<S>::advance(std::int64_t steps) {
    if (steps < 0) throw std::invalid_argument("cannot evolve backwards");
    for (std::int64_t i = 0; i < steps; ++i) step();
}

template <Scalar S>
S DistributionEvolver<S>::expected_value() const {
    S acc(0);
    for (std::int64_t n = std::max<std::int64_t>(lo_, 1); n <= hi_; ++n)
        acc += S(n) * mass_[static_cast<std::size_t>(n)];
    return acc;
}

template <Scalar S>
EvolutionResult<S> evolve_distribution(const TruncatedChainModel<S>& model, std::int64_t start,
                                       std::int64_t steps) {
    DistributionEvolver<S> evolver(model, start);
    evolver.advance(steps);
    return {evolver.distribution(), evolver.occupation()};
}

template <Scalar S>
S expected_value_of(const DistributionVector<S>& dist) {
    S acc(0);
    for (std::size_t n = 1; n < dist.mass.size(); ++n) acc += S(static_cast<std::int64_t>(n)) * dist.mass[n];
    return acc;
}

std::int64_t choose_truncation(const ChainSpec& spec, double escape_bound, std::int64_t max_top) {
    if (escape_bound <= 0 || escape_bound >= 1)
        throw std::invalid_argument("escape bound must lie in (0, 1)");
    const std::int64_t k = spec.start_state();
    double t = 1.0;
    double x = 1.0;  // x_1
    double x_at_k = (k == 1) ? 1.0 : 0.0;
    std::int64_t stalled = 0;  // consecutive steps with x unchanged in double
    for (std::int64_t n = 1; n <= max_top; ++n) {
        if (n == k) x_at_k = x;
        if (n > k && x_at_k / x <= escape_bound) return n;
        const ProbPair<double> pr = spec.probs(n);
        t *= pr.left / pr.right;
        if (t == 0.0)
            throw std::runtime_error(
                "escape probability stalls near " + std::to_string(x_at_k / x) +
                ": the prefix sums x_n converge, the signature of a transient chain");
        const double grown = x + t;
        if (grown == x) {
            // t can creep along subnormals without ever reaching zero; once x
            // has been frozen for this long the escape ratio can no longer
            // move at double precision.
            if (++stalled >= 4096 && n > k)
                throw std::runtime_error(
                    "the prefix sums x_n stopped advancing at n = " + std::to_string(n) +
                    " with escape probability stuck near " + std::to_string(x_at_k / x) +
                    ": the signature of a transient chain");
        } else {
            stalled = 0;
        }
        x = grown;
        if (std::isinf(x)) return n + 1;  // escape already far below any bound
    }
    throw std::runtime_error("escape probability still " + std::to_string(x_at_k / x) +
                             " at the cap N = " + std::to_string(max_top) +
                             "; raise the cap or loosen the bound");
}

template struct TruncatedChainModel<Rational>;
template struct TruncatedChainModel<double>;
template std::vector<Rational> hit_zero_profile<Rational>(const TruncatedChainModel<Rational>&);
template std::vector<double> hit_zero_profile<double>(const TruncatedChainModel<double>&);
template std::pair<Rational, Rational> exit_probs_by_recursion<Rational>(
    const TruncatedChainModel<Rational>&, std::int64_t);
template std::pair<double, double> exit_probs_by_recursion<double>(
    const TruncatedChainModel<double>&, std::int64_t);
template std::vector<Rational> occupation_by_fundamental_matrix<Rational>(
    const TruncatedChainModel<Rational>&, std::int64_t);
template std::vector<double> occupation_by_fundamental_matrix<double>(
    const TruncatedChainModel<double>&, std::int64_t);
template class DistributionEvolver<Rational>;
template class DistributionEvolver<double>;
template EvolutionResult<Rational> evolve_distribution<Rational>(
    const TruncatedChainModel<Rational>&, std::int64_t, std::int64_t);
template EvolutionResult<double> evolve_distribution<double>(const TruncatedChainModel<double>&,
                                                             std::int64_t, std::int64_t);
template Rational expected_value_of<Rational>(const DistributionVector<Rational>&);
template double expected_value_of<double>(const DistributionVector<double>&);

}  // namespace bdc
