#include <cmath>
#include <variant>

#include "bdc/chain.hpp"
#include "bdc/chain_io.hpp"
#include "doctest.h"

using namespace bdc;

TEST_CASE("parse round-trips through serialize for every family") {
    const char* documents[] = {
        R"({"family":"simple-symmetric","k":5,"name":"srw"})",
        R"({"family":"constant","k":1,"p":"2/3"})",
        R"({"family":"example1","k":1})",
        R"({"family":"example1-mirrored","k":1})",
        R"({"family":"eventually-constant","k":2,"M":1,"prefix":[["2/3","1/3"]]})",
        R"({"family":"table","k":3,"table":[["1/4","3/4"],["2/5","3/5"]],)"
        R"("tail":{"rule":"constant","p":"3/5"}})",
        R"({"family":"table","k":1,"table":[["1/2","1/2"]],"tail":{"rule":"repeat-last"}})",
        R"({"family":"rational-expression","k":2,"num":["0","1"],"den":["1","2"]})",
    };
    for (const char* doc : documents) {
        CAPTURE(doc);
        const ChainSpec spec = parse_spec_text(doc);
        const ChainSpec again = parse_spec_text(serialize_spec(spec).dump());
        CHECK(spec == again);
    }
}

TEST_CASE("scalar parameters written as floats snap to the intended rational") {
    const ChainSpec spec =
        parse_spec_text(R"({"family":"constant","k":1,"p":0.6666666666666666})");
    CHECK(std::get<ConstantDriftFamily>(spec.family()).up == Rational(2, 3));
    CHECK(spec.exact());
}

TEST_CASE("table rows written as floats keep the chain in float mode") {
    const ChainSpec spec = parse_spec_text(
        R"({"family":"table","k":1,"table":[[0.3,0.7]],"tail":{"rule":"constant-half"}})");
    CHECK_FALSE(spec.exact());
    CHECK(spec.probs(1).left == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(spec.probs(2).left == 0.5);  // tail rule takes over past the rows
}

TEST_CASE("table rows written as \"a/b\" strings keep the chain exact") {
    const ChainSpec spec = parse_spec_text(
        R"({"family":"table","k":1,"table":[["1/3","2/3"]],"tail":{"rule":"repeat-last"}})");
    CHECK(spec.exact());
    CHECK(spec.probs_exact(1).left == Rational(1, 3));
    CHECK(spec.probs_exact(99).right == Rational(2, 3));  // repeat-last extends the row
}

TEST_CASE("malformed documents are rejected with the offending field named") {
    struct Case {
        const char* text;
        const char* needle;
    };
    const Case cases[] = {
        {R"({"family":"constant","k":1})", "missing required parameter \"p\""},
        {R"({"family":"warp","k":1})", "unknown family"},
        {R"({"family":"constant","k":0,"p":"1/2"})", "k must be an integer >= 1"},
        {R"({"family":"constant","k":1,"p":"3/2"})", "p out of range"},
        {R"({"family":"constant","k":1,"p":"1/2","q":3})", "unknown field \"q\""},
        {R"({"family":"table","k":1,"table":[],"tail":{"rule":"constant-half"}})",
         "at least one row"},
        {R"({"family":"table","k":1,"table":[["1/2","1/2"]],"tail":{"rule":"sometimes"}})",
         "unknown tail rule"},
        {R"({"family":"eventually-constant","k":1,"M":2,"prefix":[["1/2","1/2"]]})",
         "prefix length must equal M"},
        {R"({"family":"rational-expression","k":1,"num":["1"],"den":["0","0"]})",
         "den must be a nonzero polynomial"},
        {R"(not json at all)", "malformed document"},
    };
    for (const Case& c : cases) {
        CAPTURE(c.text);
        CHECK_THROWS_WITH_AS(parse_spec_text(c.text), doctest::Contains(c.needle), SpecError);
    }
}

TEST_CASE("validate reports the first broken invariant with its state") {
    const ChainSpec bad_sum = parse_spec_text(
        R"({"family":"table","k":1,"table":[["1/2","1/2"],["1/3","1/3"]],)"
        R"("tail":{"rule":"constant-half"}})");
    const ValidationReport report = validate(bad_sum, 16);
    REQUIRE_FALSE(report.valid);
    CHECK(report.violation->state == 2);
    CHECK(report.violation->message == "not normalized: l + r != 1");

    const ChainSpec degenerate = parse_spec_text(
        R"({"family":"table","k":1,"table":[["0","1"]],"tail":{"rule":"constant-half"}})");
    const ValidationReport degenerate_report = validate(degenerate, 4);
    REQUIRE_FALSE(degenerate_report.valid);
    CHECK(degenerate_report.violation->state == 1);
    CHECK(degenerate_report.violation->message == "probability not strictly positive");

    const ChainSpec fine = parse_spec_text(R"({"family":"example1","k":3})");
    CHECK(validate(fine, 512).valid);
}

TEST_CASE("the drifting example has r - l = 1/(2n+1) exactly") {
    const ChainSpec spec = parse_spec_text(R"({"family":"example1","k":1})");
    const ChainSpec mirrored = parse_spec_text(R"({"family":"example1-mirrored","k":1})");
    for (std::int64_t n = 1; n <= 64; ++n) {
        const RatPair pair = spec.probs_exact(n);
        CHECK(pair.left == Rational(n, 2 * n + 1));
        CHECK(pair.right == Rational(n + 1, 2 * n + 1));
        CHECK(pair.right - pair.left == Rational(1, 2 * n + 1));
        // the mirror swaps the step directions
        const RatPair swapped = mirrored.probs_exact(n);
        CHECK(swapped.left == pair.right);
        CHECK(swapped.right == pair.left);
    }
}

TEST_CASE("a polynomial ratio can reproduce the drifting example") {
    // l_n = n / (2n + 1) as a ratio of polynomials in n
    const ChainSpec poly = parse_spec_text(
        R"({"family":"rational-expression","k":1,"num":["0","1"],"den":["1","2"]})");
    const ChainSpec reference = parse_spec_text(R"({"family":"example1","k":1})");
    for (std::int64_t n = 1; n <= 32; ++n) {
        const RatPair a = poly.probs_exact(n);
        const RatPair b = reference.probs_exact(n);
        CHECK(a.left == b.left);
        CHECK(a.right == b.right);
    }
}

TEST_CASE("exact and float evaluations agree per state") {
    const char* documents[] = {
        R"({"family":"constant","k":1,"p":"2/3"})",
        R"({"family":"example1","k":1})",
        R"({"family":"eventually-constant","k":2,"M":1,"prefix":[["2/3","1/3"]]})",
        R"({"family":"rational-expression","k":1,"num":["1","1"],"den":["3","2"]})",
    };
    for (const char* doc : documents) {
        CAPTURE(doc);
        const ChainSpec spec = parse_spec_text(doc);
        for (std::int64_t n = 1; n <= 50; ++n) {
            const RatPair exact = spec.probs_exact(n);
            const ProbPair<double> approx = spec.probs(n);
            CHECK(approx.left == doctest::Approx(to_double(exact.left)).epsilon(1e-14));
            CHECK(approx.right == doctest::Approx(to_double(exact.right)).epsilon(1e-14));
        }
    }
}

TEST_CASE("float rows stay normalized over a deep scan") {
    const ChainSpec spec = parse_spec_text(R"({"family":"example1","k":1})");
    double worst = 0.0;
    for (std::int64_t n = 1; n <= 1000000; ++n) {
        const ProbPair<double> pair = spec.probs(n);
        worst = std::max(worst, std::abs(pair.left + pair.right - 1.0));
    }
    CHECK(worst <= 1e-15);
}
