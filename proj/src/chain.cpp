#include "bdc/chain.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace bdc {
namespace {

const Rational kHalf(1, 2);

Rational eval_poly(const std::vector<Rational>& coeffs, std::int64_t n) {
    Rational acc = 0;
    const Rational arg(n);
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * arg + *it;
    return acc;
}

double eval_poly(const std::vector<double>& coeffs, double n) {
    double acc = 0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * n + *it;
    return acc;
}

bool family_is_exact(const Family& family) {
    if (const auto* table = std::get_if<TableFamily>(&family)) return table->exact;
    return true;
}

}  // namespace

TableFamily make_table_family(std::vector<RatPair> rows, TailRule tail, bool exact) {
    TableFamily fam;
    fam.rows = std::move(rows);
    fam.tail = tail;
    fam.exact = exact;
    fam.rows_d.reserve(fam.rows.size());
    for (const auto& row : fam.rows) fam.rows_d.push_back(exact_complement(to_double(row.left)));
    switch (tail.kind) {
        case TailRule::Kind::ConstantHalf:
            fam.tail_d = {0.5, 0.5};
            break;
        case TailRule::Kind::ConstantDrift:
            fam.tail_d = exact_complement(to_double(Rational(1) - tail.up));
            break;
        case TailRule::Kind::RepeatLast:
            if (!fam.rows_d.empty()) fam.tail_d = fam.rows_d.back();
            break;
    }
    return fam;
}

RationalExpressionFamily make_rational_expression_family(std::vector<Rational> num,
                                                         std::vector<Rational> den) {
    RationalExpressionFamily fam;
    fam.num = std::move(num);
    fam.den = std::move(den);
    for (const auto& c : fam.num) fam.num_d.push_back(to_double(c));
    for (const auto& c : fam.den) fam.den_d.push_back(to_double(c));
    return fam;
}

ChainSpec::ChainSpec(Family family, std::int64_t start_state, std::string name)
    : family_(std::move(family)),
      start_state_(start_state),
      name_(std::move(name)),
      exact_(family_is_exact(family_)) {}

RatPair ChainSpec::probs_exact(std::int64_t n) const {
    if (n <= 0)
        throw std::domain_error("state 0 is absorbing and has no transition pair");
    return std::visit(
        [n](const auto& fam) -> RatPair {
            using F = std::decay_t<decltype(fam)>;
            if constexpr (std::same_as<F, SimpleSymmetricFamily>) {
                return {kHalf, kHalf};
            } else if constexpr (std::same_as<F, ConstantDriftFamily>) {
                return {Rational(1) - fam.up, fam.up};
            } else if constexpr (std::same_as<F, Example1Family>) {
                const Rational den(2 * n + 1);
                return {Rational(n) / den, Rational(n + 1) / den};
            } else if constexpr (std::same_as<F, Example1MirroredFamily>) {
                const Rational den(2 * n + 1);
                return {Rational(n + 1) / den, Rational(n) / den};
            } else if constexpr (std::same_as<F, EventuallyConstantFamily>) {
                if (n <= static_cast<std::int64_t>(fam.prefix.size()))
                    return fam.prefix[static_cast<std::size_t>(n - 1)];
                return {kHalf, kHalf};
            } else if constexpr (std::same_as<F, TableFamily>) {
                if (n <= static_cast<std::int64_t>(fam.rows.size()))
                    return fam.rows[static_cast<std::size_t>(n - 1)];
                switch (fam.tail.kind) {
                    case TailRule::Kind::ConstantHalf: return {kHalf, kHalf};
                    case TailRule::Kind::ConstantDrift:
                        return {Rational(1) - fam.tail.up, fam.tail.up};
                    case TailRule::Kind::RepeatLast:
                        if (fam.rows.empty())
                            throw std::domain_error("repeat-last tail on an empty table");
                        return fam.rows.back();
                }
                throw std::logic_error("unreachable tail rule");
            } else {
                static_assert(std::same_as<F, RationalExpressionFamily>);
                const Rational left = eval_poly(fam.num, n) / eval_poly(fam.den, n);
                return {left, Rational(1) - left};
            }
        },
        family_);
}

ProbPair<double> ChainSpec::probs(std::int64_t n) const {
    if (n <= 0)
        throw std::domain_error("state 0 is absorbing and has no transition pair");
    return std::visit(
        [n](const auto& fam) -> ProbPair<double> {
            using F = std::decay_t<decltype(fam)>;
            if constexpr (std::same_as<F, SimpleSymmetricFamily>) {
                return {0.5, 0.5};
            } else if constexpr (std::same_as<F, ConstantDriftFamily>) {
                return exact_complement(to_double(Rational(1) - fam.up));
            } else if constexpr (std::same_as<F, Example1Family>) {
                const double den = static_cast<double>(2 * n + 1);
                return exact_complement(static_cast<double>(n) / den);
            } else if constexpr (std::same_as<F, Example1MirroredFamily>) {
                const double den = static_cast<double>(2 * n + 1);
                return exact_complement(static_cast<double>(n + 1) / den);
            } else if constexpr (std::same_as<F, EventuallyConstantFamily>) {
                if (n <= static_cast<std::int64_t>(fam.prefix.size())) {
                    const auto& row = fam.prefix[static_cast<std::size_t>(n - 1)];
                    return exact_complement(to_double(row.left));
                }
                return {0.5, 0.5};
            } else if constexpr (std::same_as<F, TableFamily>) {
                if (n <= static_cast<std::int64_t>(fam.rows_d.size()))
                    return fam.rows_d[static_cast<std::size_t>(n - 1)];
                if (fam.tail.kind == TailRule::Kind::RepeatLast && fam.rows_d.empty())
                    throw std::domain_error("repeat-last tail on an empty table");
                return fam.tail_d;
            } else {
                static_assert(std::same_as<F, RationalExpressionFamily>);
                const double arg = static_cast<double>(n);
                const double left = eval_poly(fam.num_d, arg) / eval_poly(fam.den_d, arg);
                return exact_complement(left);
            }
        },
        family_);
}

ValidationReport validate(const ChainSpec& spec, std::int64_t probe_depth) {
    ValidationReport report;
    auto flag = [&report](std::int64_t state, std::string message) {
        report.valid = false;
        report.violation = Violation{state, std::move(message)};
    };
    if (spec.start_state() < 1) {
        flag(0, "invalid start state: must be >= 1");
        return report;
    }
    const bool exact = spec.exact();
    for (std::int64_t n = 1; n <= probe_depth; ++n) {
        try {
            if (exact) {
                const RatPair pair = spec.probs_exact(n);
                if (pair.left <= 0 || pair.right <= 0) {
                    flag(n, "probability not strictly positive");
                    return report;
                }
                if (pair.left >= 1 || pair.right >= 1) {
                    flag(n, "probability not strictly less than 1");
                    return report;
                }
                if (pair.left + pair.right != 1) {
                    flag(n, "not normalized: l + r != 1");
                    return report;
                }
            } else {
                const ProbPair<double> pair = spec.probs(n);
                if (!(pair.left > 0.0) || !(pair.right > 0.0)) {
                    flag(n, "probability not strictly positive");
                    return report;
                }
                if (!(pair.left < 1.0) || !(pair.right < 1.0)) {
                    flag(n, "probability not strictly less than 1");
                    return report;
                }
                if (std::abs(pair.left + pair.right - 1.0) > 1e-15) {
                    flag(n, "not normalized: |l + r - 1| > 1e-15");
                    return report;
                }
            }
        } catch (const std::exception& e) {
            flag(n, std::string("probability evaluation failed: ") + e.what());
            return report;
        }
    }
    return report;
}

}  // namespace bdc
