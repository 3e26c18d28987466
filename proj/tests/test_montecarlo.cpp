#include <cmath>
#include <cstdint>
#include <numeric>
#include <variant>

#include "bdc/chain_io.hpp"
#include "bdc/montecarlo.hpp"
#include "bdc/oracle.hpp"
#include "doctest.h"

using namespace bdc;

namespace {

ChainSpec chain(const char* text) { return parse_spec_text(text); }

const char* kSrw1 = R"({"family":"simple-symmetric","k":1})";
const char* kSrw5 = R"({"family":"simple-symmetric","k":5})";
const char* kDrift23 = R"({"family":"constant","k":1,"p":"2/3"})";
const char* kExample1 = R"({"family":"example1","k":1})";
const char* kMirrored = R"({"family":"example1-mirrored","k":1})";
const char* kEventually = R"({"family":"eventually-constant","k":2,"M":1,"prefix":[["2/3","1/3"]]})";

}  // namespace

TEST_CASE("the unit generator stays in range and is unbiased enough to trust") {
    CounterRng rng(42, 7);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.next_unit();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("a zero-step truncation stops immediately") {
    const PathRecord record = simulate_path(chain(kSrw5), Truncation{0}, 1, 0);
    CHECK(record.stopping_time == 0);
    CHECK(record.terminal_state == 5);
    CHECK_FALSE(record.cap_hit);
    CHECK(std::accumulate(record.visits.begin(), record.visits.end(), std::int64_t{0}) == 0);

    const OccupationEstimate none = estimate_occupation(chain(kSrw5), Truncation{0}, 100, 1);
    for (const double g : none.mean) CHECK(g == 0.0);
}

TEST_CASE("every path is internally consistent") {
    for (const char* doc : {kDrift23, kExample1}) {
        CAPTURE(doc);
        const ChainSpec spec = chain(doc);
        const std::int64_t k = spec.start_state();
        for (std::uint64_t index = 0; index < 200; ++index) {
            const PathRecord trunc = simulate_path(spec, Truncation{50}, 9, index);
            REQUIRE_FALSE(trunc.cap_hit);
            // stopping time = total visits counted strictly before it
            CHECK(std::accumulate(trunc.visits.begin(), trunc.visits.end(), std::int64_t{0}) ==
                  trunc.stopping_time);
            // +-1 steps: parity and range of the terminal state
            CHECK((trunc.terminal_state - k - trunc.stopping_time) % 2 == 0);
            CHECK(std::abs(trunc.terminal_state - k) <= trunc.stopping_time);
            CHECK(trunc.stopping_time <= 50);
            if (trunc.stopping_time < 50) CHECK(trunc.terminal_state == 0);

            const PathRecord exit = simulate_path(spec, IntervalExit{8}, 9, index);
            REQUIRE_FALSE(exit.cap_hit);
            CHECK((exit.terminal_state == 0 || exit.terminal_state == 8));
        }
    }
}

TEST_CASE("paths are reproducible and estimates are worker-count invariant") {
    const ChainSpec spec = chain(kExample1);
    const PathRecord once = simulate_path(spec, Truncation{300}, 1234, 56);
    const PathRecord again = simulate_path(spec, Truncation{300}, 1234, 56);
    CHECK(once.stopping_time == again.stopping_time);
    CHECK(once.terminal_state == again.terminal_state);
    CHECK(once.visits == again.visits);

    const EstimateWithCI serial = estimate_expectation(spec, Truncation{200}, 5000, 7, 1);
    const EstimateWithCI rerun = estimate_expectation(spec, Truncation{200}, 5000, 7, 1);
    const EstimateWithCI parallel = estimate_expectation(spec, Truncation{200}, 5000, 7, 8);
    CHECK(serial.mean == rerun.mean);
    CHECK(serial.half_width_95 == rerun.half_width_95);
    CHECK(serial.mean == parallel.mean);
    CHECK(serial.half_width_95 == parallel.half_width_95);
    CHECK(serial.paths == parallel.paths);

    const OccupationEstimate occ1 = estimate_occupation(spec, Truncation{200}, 3000, 11, 1);
    const OccupationEstimate occ8 = estimate_occupation(spec, Truncation{200}, 3000, 11, 8);
    CHECK(occ1.mean == occ8.mean);
    CHECK(occ1.half_width_95 == occ8.half_width_95);
}

TEST_CASE("truncation times are non-decreasing in m along a fixed path") {
    const ChainSpec spec = chain(kSrw1);
    for (std::uint64_t index = 0; index < 50; ++index) {
        const PathRecord coarse = simulate_path(spec, Truncation{10}, 3, index);
        const PathRecord mid = simulate_path(spec, Truncation{100}, 3, index);
        const PathRecord fine = simulate_path(spec, Truncation{100000}, 3, index);
        CHECK(coarse.stopping_time <= mid.stopping_time);
        CHECK(mid.stopping_time <= fine.stopping_time);
        // once a path has been absorbed, refining the rule changes nothing
        if (mid.terminal_state == 0) {
            CHECK(fine.stopping_time == mid.stopping_time);
            CHECK(fine.terminal_state == 0);
        }
    }
}

TEST_CASE("interval-exit frequencies match the closed-form split") {
    // symmetric from 1 with barrier 2: mean terminal = 2 * (1/2)
    const EstimateWithCI even = estimate_expectation(chain(kSrw1), IntervalExit{2}, 100000, 21);
    CHECK(std::abs(even.mean - 1.0) <= 3 * even.half_width_95);

    // upward drift from 1 with barrier 3: P(hit 3) = 4/7
    const EstimateWithCI drift =
        estimate_expectation(chain(kDrift23), IntervalExit{3}, 100000, 22);
    CHECK(std::abs(drift.mean - 3.0 * 4.0 / 7.0) <= 3 * drift.half_width_95);
}

TEST_CASE("the driftless walk keeps its mean at the start state") {
    const EstimateWithCI est = estimate_expectation(chain(kSrw5), Truncation{100}, 100000, 23);
    CHECK(std::abs(est.mean - 5.0) <= 3 * est.half_width_95);
    CHECK(est.cap_hits == 0);
    CHECK(est.paths == 100000);
}

TEST_CASE("the eventually-driftless chain lands on its limiting mean") {
    const EstimateWithCI est =
        estimate_expectation(chain(kEventually), Truncation{10000}, 100000, 42);
    CHECK(std::abs(est.mean - 1.5) <= 3 * est.half_width_95);
}

TEST_CASE("sampled occupation counts agree with the brute-force solves") {
    // two-barrier exit at 100 from 3: expected visits to 2 are known in
    // closed form and via the fundamental matrix
    const ChainSpec srw3 = chain(R"({"family":"simple-symmetric","k":3})");
    const OccupationEstimate exit_occ =
        estimate_occupation(srw3, IntervalExit{100}, 100000, 31);
    const auto model = TruncatedChainModel<double>::from_spec(srw3, 100);
    const std::vector<double> oracle = occupation_by_fundamental_matrix(model, 3);
    CHECK(std::abs(exit_occ.mean[1] - oracle[1]) <= 4 * exit_occ.half_width_95[1]);
    CHECK(oracle[1] == doctest::Approx(2.0 * 2.0 * 97.0 / 100.0).epsilon(1e-12));

    // truncation rule: compare against the exact distribution evolution
    const ChainSpec ex1 = chain(kExample1);
    const OccupationEstimate trunc_occ =
        estimate_occupation(ex1, Truncation{1000}, 20000, 32);
    const auto evo_model = TruncatedChainModel<double>::from_spec(ex1, 1003);
    const EvolutionResult<double> evolved = evolve_distribution(evo_model, 1, 1000);
    CHECK(std::abs(trunc_occ.mean[0] - evolved.occupation[0]) <=
          4 * trunc_occ.half_width_95[0]);
}

TEST_CASE("estimator and exact evolution agree for most seeds") {
    const ChainSpec spec = chain(R"({"family":"simple-symmetric","k":2})");
    const auto model = TruncatedChainModel<double>::from_spec(spec, 67);
    const EvolutionResult<double> evolved = evolve_distribution(model, 2, 64);
    const double exact = expected_value_of(evolved.dist);
    int within = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const EstimateWithCI est = estimate_expectation(spec, Truncation{64}, 4000, seed);
        if (std::abs(est.mean - exact) <= 4 * est.half_width_95) ++within;
    }
    CHECK(within >= 95);
}

TEST_CASE("step caps are counted and excluded rather than hidden") {
    const EstimateWithCI est =
        estimate_expectation(chain(kSrw1), IntervalExit{100}, 5000, 13, 1, /*step_cap=*/10);
    CHECK(est.cap_hits > 0);
    CHECK(est.paths + static_cast<std::uint64_t>(est.cap_hits) == 5000);
}

TEST_CASE("rule construction picks the requested family") {
    CHECK(std::holds_alternative<Truncation>(make_rule(RuleFamily::Truncation, 100)));
    CHECK(std::get<Truncation>(make_rule(RuleFamily::Truncation, 100)).steps == 100);
    CHECK(std::get<IntervalExit>(make_rule(RuleFamily::IntervalExit, 64)).upper == 64);
}

TEST_CASE("sweeps validate their grid") {
    const ChainSpec spec = chain(kSrw1);
    CHECK_THROWS_AS(convergence_sweep(spec, RuleFamily::Truncation, {}, 100, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(convergence_sweep(spec, RuleFamily::Truncation, {10, 10}, 100, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(convergence_sweep(spec, RuleFamily::Truncation, {100, 10}, 100, 1),
                    std::invalid_argument);
}

TEST_CASE("sweeps carry the analytic limit when it is determined") {
    const SweepResult srw =
        convergence_sweep(chain(kSrw5), RuleFamily::Truncation, {10, 100}, 2000, 5);
    REQUIRE(srw.points.size() == 2);
    CHECK(srw.points[0].index == 10);
    CHECK(srw.points[1].index == 100);
    REQUIRE(srw.limit_known);
    CHECK_FALSE(srw.analytic_limit.infinite);
    CHECK(srw.analytic_limit.value == 5.0);

    const SweepResult mirrored =
        convergence_sweep(chain(kMirrored), RuleFamily::Truncation, {100, 1000}, 2000, 5);
    REQUIRE(mirrored.limit_known);
    CHECK(mirrored.analytic_limit.as_double() == 0.0);
    // the sampled means shadow the limit: terminal states concentrate at 0
    CHECK(mirrored.points[1].estimate.mean < mirrored.points[0].estimate.mean);

    const SweepResult unsettled = convergence_sweep(
        chain(R"({"family":"rational-expression","k":1,"num":["0","1"],"den":["1","2"]})"),
        RuleFamily::Truncation, {10, 100}, 500, 5);
    CHECK_FALSE(unsettled.limit_known);
    CHECK_FALSE(unsettled.limit_note.empty());
}

TEST_CASE("sweep results are identical across worker counts") {
    const ChainSpec spec = chain(kEventually);
    const SweepResult one =
        convergence_sweep(spec, RuleFamily::Truncation, {10, 100, 1000}, 4000, 42, 1);
    const SweepResult four =
        convergence_sweep(spec, RuleFamily::Truncation, {10, 100, 1000}, 4000, 42, 4);
    REQUIRE(one.points.size() == four.points.size());
    for (std::size_t i = 0; i < one.points.size(); ++i) {
        CHECK(one.points[i].estimate.mean == four.points[i].estimate.mean);
        CHECK(one.points[i].estimate.half_width_95 == four.points[i].estimate.half_width_95);
    }
}

TEST_CASE("estimates need enough paths for a confidence interval") {
    CHECK_THROWS_AS(estimate_expectation(chain(kSrw1), Truncation{10}, 0, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(estimate_expectation(chain(kSrw1), Truncation{10}, 1, 1),
                    std::invalid_argument);
}
