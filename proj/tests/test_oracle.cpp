#include <cmath>
#include <cstdint>

#include "bdc/analytics.hpp"
#include "bdc/chain_io.hpp"
#include "bdc/oracle.hpp"
#include "doctest.h"

using namespace bdc;

namespace {

ChainSpec chain(const char* text) { return parse_spec_text(text); }

const char* kSrw5 = R"({"family":"simple-symmetric","k":5})";
const char* kDrift23 = R"({"family":"constant","k":1,"p":"2/3"})";
const char* kExample1 = R"({"family":"example1","k":1})";
const char* kMirrored = R"({"family":"example1-mirrored","k":1})";
const char* kEventually = R"({"family":"eventually-constant","k":2,"M":1,"prefix":[["2/3","1/3"]]})";

}  // namespace

TEST_CASE("first-step recursion reproduces the hand-solved systems") {
    const auto srw = TruncatedChainModel<Rational>::from_spec(chain(kSrw5), 2);
    const auto even = exit_probs_by_recursion(srw, 1);
    CHECK(even.first == Rational(1, 2));
    CHECK(even.second == Rational(1, 2));

    const auto drift = TruncatedChainModel<Rational>::from_spec(chain(kDrift23), 3);
    const auto pulled = exit_probs_by_recursion(drift, 1);
    CHECK(pulled.first == Rational(3, 7));
    CHECK(pulled.second == Rational(4, 7));

    const auto ex1 = TruncatedChainModel<Rational>::from_spec(chain(kExample1), 4);
    const auto skewed = exit_probs_by_recursion(ex1, 2);
    CHECK(skewed.first == Rational(7, 25));
    CHECK(skewed.second == Rational(18, 25));
}

TEST_CASE("recursion and closed form agree exactly across families and starts") {
    const char* documents[] = {
        kSrw5,
        kDrift23,
        kExample1,
        kMirrored,
        kEventually,
        R"({"family":"table","k":1,"table":[["1/4","3/4"],["3/5","2/5"]],)"
        R"("tail":{"rule":"constant","p":"2/5"}})",
        R"({"family":"rational-expression","k":1,"num":["1","1"],"den":["3","2"]})",
    };
    for (const char* doc : documents) {
        CAPTURE(doc);
        const ChainSpec spec = chain(doc);
        for (const std::int64_t top : {5, 17, 50}) {
            const auto model = TruncatedChainModel<Rational>::from_spec(spec, top);
            const std::vector<Rational> profile = hit_zero_profile(model);
            const RatioTable<Rational> table = ratio_table<Rational>(spec, top - 1);
            for (std::int64_t start = 1; start < top; ++start) {
                const ExitSplit<Rational> split = exit_probabilities(table, 0, start, top);
                if (split.hit_lower != profile[static_cast<std::size_t>(start)]) {
                    CAPTURE(top);
                    CAPTURE(start);
                    REQUIRE(split.hit_lower == profile[static_cast<std::size_t>(start)]);
                }
            }
        }
    }
}

TEST_CASE("recursion rejects degenerate truncations and exterior starts") {
    const auto model = TruncatedChainModel<Rational>::from_spec(chain(kSrw5), 10);
    CHECK_THROWS_AS(exit_probs_by_recursion(model, 0), std::invalid_argument);
    CHECK_THROWS_AS(exit_probs_by_recursion(model, 10), std::invalid_argument);
    CHECK_THROWS_AS(TruncatedChainModel<Rational>::from_spec(chain(kSrw5), 1),
                    std::invalid_argument);
}

TEST_CASE("fundamental-matrix counts match the two-barrier closed form") {
    // symmetric walk: expected visits to j from s with barriers {0, N} are
    // 2 min(s,j) (N - max(s,j)) / N
    const auto model = TruncatedChainModel<Rational>::from_spec(
        chain(R"({"family":"simple-symmetric","k":3})"), 10);
    const std::vector<Rational> counts = occupation_by_fundamental_matrix(model, 3);
    for (std::int64_t j = 1; j <= 9; ++j) {
        const Rational expected =
            Rational(2 * std::min<std::int64_t>(3, j) * (10 - std::max<std::int64_t>(3, j)), 10);
        CHECK(counts[static_cast<std::size_t>(j - 1)] == expected);
    }
    CHECK(counts[1] == Rational(14, 5));  // state 2: 2.8
}

TEST_CASE("the start state is always visited at least once") {
    for (const char* doc : {kSrw5, kDrift23, kExample1, kMirrored}) {
        CAPTURE(doc);
        const ChainSpec spec = chain(doc);
        const auto model = TruncatedChainModel<Rational>::from_spec(spec, 30);
        const std::vector<Rational> counts =
            occupation_by_fundamental_matrix(model, spec.start_state());
        CHECK(counts[static_cast<std::size_t>(spec.start_state() - 1)] >= 1);
    }
}

TEST_CASE("fundamental-matrix count at the start equals the first-return formula") {
    // Visits to the start k before absorption follow 1/(1 - return prob);
    // for k = 1 the return probability is r_1 (1 - t_1/(x_N - x_1)), giving
    // G = 1/(l_1 + r_1 t_1/(x_N - x_1)) — an independent derivation to pin
    // the transposed solve down exactly.
    const ChainSpec spec = chain(kExample1);
    for (const std::int64_t top : {10, 40}) {
        const auto model = TruncatedChainModel<Rational>::from_spec(spec, top);
        const std::vector<Rational> counts = occupation_by_fundamental_matrix(model, 1);
        const RatioTable<Rational> table = ratio_table<Rational>(spec, top);
        const RatPair first = spec.probs_exact(1);
        const Rational expected =
            1 / (first.left + first.right * table.t[1] /
                                  (table.x[static_cast<std::size_t>(top)] - table.x[1]));
        CHECK(counts[0] == expected);
    }
}

TEST_CASE("occupation counts grow with the truncation toward the absorption formula") {
    for (const char* doc : {kExample1, R"({"family":"simple-symmetric","k":3})"}) {
        CAPTURE(doc);
        const ChainSpec spec = chain(doc);
        const std::int64_t k = spec.start_state();
        for (std::int64_t state = 1; state <= k + 1; ++state) {
            const double formula = occupation_until_extinction<double>(spec, state);
            double previous = 0.0;
            for (const std::int64_t top : {100, 1000, 10000}) {
                const auto model = TruncatedChainModel<double>::from_spec(spec, top);
                const std::vector<double> counts = occupation_by_fundamental_matrix(model, k);
                const double value = counts[static_cast<std::size_t>(state - 1)];
                CHECK(value > previous);             // monotone in the truncation
                CHECK(value <= formula * (1 + 1e-9));  // never above the limit
                previous = value;
            }
            CHECK(formula - previous < formula * 0.2);  // visibly approaching it
        }
    }
}

TEST_CASE("evolution with zero steps is the initial point mass") {
    const auto model = TruncatedChainModel<Rational>::from_spec(chain(kSrw5), 20);
    const EvolutionResult<Rational> result = evolve_distribution(model, 5, 0);
    CHECK(result.dist.mass[5] == 1);
    CHECK(expected_value_of(result.dist) == 5);
    for (const Rational& g : result.occupation) CHECK(g == 0);
}

TEST_CASE("three symmetric steps spread into the exact binomial profile") {
    const auto model = TruncatedChainModel<Rational>::from_spec(chain(kSrw5), 1000);
    const EvolutionResult<Rational> result = evolve_distribution(model, 5, 3);
    CHECK(result.dist.mass[2] == Rational(1, 8));
    CHECK(result.dist.mass[4] == Rational(3, 8));
    CHECK(result.dist.mass[6] == Rational(3, 8));
    CHECK(result.dist.mass[8] == Rational(1, 8));
    CHECK(result.dist.mass[5] == 0);
}

TEST_CASE("one drifting step from the boundary neighbour") {
    // from state 1: down to 0 with probability 1/3, up to 2 with 2/3
    const auto model = TruncatedChainModel<Rational>::from_spec(chain(kExample1), 10);
    const EvolutionResult<Rational> result = evolve_distribution(model, 1, 1);
    CHECK(result.dist.mass[0] == Rational(1, 3));
    CHECK(result.dist.mass[2] == Rational(2, 3));
    CHECK(expected_value_of(result.dist) == Rational(4, 3));
    CHECK(result.occupation[0] == 1);  // the single visit to state 1 at time 0
}

TEST_CASE("expected value of a hand-built distribution") {
    const DistributionVector<Rational> uniform{
        {Rational(1, 3), Rational(1, 3), Rational(1, 3)}, 0};
    CHECK(expected_value_of(uniform) == 1);
}

TEST_CASE("mass is conserved exactly, step by step") {
    const auto model = TruncatedChainModel<Rational>::from_spec(chain(kExample1), 12);
    DistributionEvolver<Rational> evolver(model, 3);
    for (int step = 0; step < 50; ++step) {
        evolver.step();
        Rational total = 0;
        for (const Rational& p : evolver.mass()) total += p;
        if (total != 1) {
            CAPTURE(step);
            REQUIRE(total == 1);
        }
    }
}

TEST_CASE("the symmetric walk keeps its stopped expectation at the start") {
    const auto model = TruncatedChainModel<double>::from_spec(chain(kSrw5), 1000);
    DistributionEvolver<double> evolver(model, 5);
    evolver.advance(200);
    CHECK(std::abs(evolver.expected_value() - 5.0) <= 1e-12);
}

TEST_CASE("long evolution approaches the limiting expectation") {
    const ChainSpec spec = chain(kEventually);
    const auto model = TruncatedChainModel<double>::from_spec(spec, 2000);
    const EvolutionResult<double> result = evolve_distribution(model, 2, 10000);
    const double limit = 1.5;  // x_2 / t_inf = 3/2
    CHECK(std::abs(expected_value_of(result.dist) - limit) < 0.01 * limit);
}

TEST_CASE("stopped expectation equals the identity right side, exactly") {
    const ChainSpec spec = chain(kDrift23);
    const auto model = TruncatedChainModel<Rational>::from_spec(spec, 20);
    const EvolutionResult<Rational> result = evolve_distribution(model, 1, 15);
    const OccupationProfile<Rational> profile{1, StoppingRule{Truncation{15}},
                                              result.occupation};
    CHECK(expected_value_of(result.dist) == stopping_identity_rhs(spec, profile));
}

TEST_CASE("stopped expectation matches the identity right side in float mode") {
    const ChainSpec spec = chain(kDrift23);
    const auto model = TruncatedChainModel<double>::from_spec(spec, 1003);
    DistributionEvolver<double> evolver(model, 1);
    for (const std::int64_t m : {10, 100, 1000}) {
        evolver.advance(m - evolver.time());
        const OccupationProfile<double> profile{1, StoppingRule{Truncation{m}},
                                                evolver.occupation()};
        const double lhs = evolver.expected_value();
        const double rhs = stopping_identity_rhs(spec, profile);
        CHECK(std::abs(lhs - rhs) <= 1e-10);
    }
}

TEST_CASE("normalized accumulated occupation decreases strictly past the start") {
    const char* documents[] = {kSrw5, kDrift23, kExample1, kMirrored, kEventually};
    for (const char* doc : documents) {
        CAPTURE(doc);
        const ChainSpec spec = chain(doc);
        const std::int64_t k = spec.start_state();
        for (const std::int64_t m : {10, 1000}) {
            const std::int64_t top = k + m + 2;
            const auto model = TruncatedChainModel<double>::from_spec(spec, top);
            const EvolutionResult<double> result = evolve_distribution(model, k, m);
            double t_prev = 1.0;
            double prev_norm = 0.0;
            bool have_prev = false;
            for (std::int64_t n = 1; n < top; ++n) {
                const ProbPair<double> pr = spec.probs(n);
                if (n >= k) {
                    const double norm =
                        result.occupation[static_cast<std::size_t>(n - 1)] * t_prev * pr.left;
                    if (norm <= 0.0) break;
                    if (have_prev) {
                        if (!(norm < prev_norm)) {
                            CAPTURE(m);
                            CAPTURE(n);
                            REQUIRE(norm < prev_norm);
                        }
                    }
                    prev_norm = norm;
                    have_prev = true;
                }
                t_prev *= pr.left / pr.right;
                if (t_prev == 0.0) break;
            }
        }
    }
}

TEST_CASE("truncation picker certifies the requested escape bound") {
    const ChainSpec srw = chain(R"({"family":"simple-symmetric","k":1})");
    const std::int64_t top = choose_truncation(srw, 1e-3);
    const RatioTable<double> table = ratio_table<double>(srw, top);
    CHECK(table.x[1] / table.x[static_cast<std::size_t>(top)] <= 1e-3);
    CHECK(table.x[1] / table.x[static_cast<std::size_t>(top - 1)] > 1e-3);

    const ChainSpec mirrored = chain(kMirrored);
    const std::int64_t quick = choose_truncation(mirrored, 1e-3);
    const RatioTable<double> fast = ratio_table<double>(mirrored, quick);
    CHECK(fast.x[1] / fast.x[static_cast<std::size_t>(quick)] <= 1e-3);
    CHECK(quick < top);  // quadratic growth outruns the linear walk

    CHECK_THROWS_WITH_AS(choose_truncation(chain(kDrift23), 1e-6),
                         doctest::Contains("transient"), std::runtime_error);
}
