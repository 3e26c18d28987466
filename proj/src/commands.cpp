#include "bdc/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "bdc/analytics.hpp"
#include "bdc/chain_io.hpp"
#include "bdc/montecarlo.hpp"
#include "bdc/oracle.hpp"

namespace bdc {
namespace {

using nlohmann::ordered_json;

ChainSpec load_validated(const ExperimentConfig& cfg) {
    if (cfg.chain.empty()) throw SpecError("no chain spec given (use --chain)");
    const std::size_t first = cfg.chain.find_first_not_of(" \t\r\n");
    ChainSpec spec = (first != std::string::npos && cfg.chain[first] == '{')
                         ? parse_spec_text(cfg.chain)
                         : load_spec_file(cfg.chain);
    const ValidationReport report = validate(spec, 256);
    if (!report.valid) {
        const Violation& v = *report.violation;
        throw SpecError("invalid chain at state " + std::to_string(v.state) + ": " + v.message);
    }
    return spec;
}

std::string tail_kind_name(TailKind kind) {
    switch (kind) {
        case TailKind::PositiveFinite: return "positive-finite";
        case TailKind::Zero: return "zero";
        case TailKind::Infinite: return "infinite";
        case TailKind::Undetermined: return "undetermined";
    }
    return "undetermined";
}

ordered_json tail_block(const TailClass& tail) {
    ordered_json block;
    block["provenance"] = "analytic";
    block["kind"] = tail_kind_name(tail.kind);
    if (tail.kind == TailKind::PositiveFinite) {
        block["value"] = tail.value;
        if (tail.exact_value) block["exact"] = format_rational(*tail.exact_value);
    }
    block["error"] = tail.symbolic ? "exact" : "numeric verdict";
    block["evidence"] = tail.evidence;
    return block;
}

ordered_json extinction_block(const ExtinctionResult& ext) {
    ordered_json block;
    block["provenance"] = "analytic";
    block["conclusive"] = ext.conclusive;
    block["probability"] = ext.probability;
    if (ext.exact) block["exact"] = format_rational(*ext.exact);
    block["error"] = ext.exact ? ordered_json("exact") : ordered_json(ext.error_bound);
    block["method"] = ext.method;
    return block;
}

ordered_json limit_block(const LimitExpectation& lim) {
    ordered_json block;
    block["provenance"] = "analytic";
    block["infinite"] = lim.value.infinite;
    if (lim.value.infinite) {
        block["value"] = "inf";
    } else {
        block["value"] = lim.value.value;
        if (lim.value.exact) block["exact"] = format_rational(*lim.value.exact);
    }
    block["error"] = (lim.tail.symbolic || lim.value.infinite) ? "exact" : "from numeric tail value";
    block["tail_kind"] = tail_kind_name(lim.tail.kind);
    return block;
}

void append_csv_cell(std::string& out, const ordered_json& value) {
    if (value.is_string()) {
        const std::string& raw = value.get_ref<const std::string&>();
        if (raw.find_first_of(",\"\n") == std::string::npos) {
            out += raw;
        } else {
            out += '"';
            for (const char c : raw) {
                if (c == '"') out += '"';
                out += c;
            }
            out += '"';
        }
    } else {
        out += value.dump();
    }
}

void flatten_csv(const ordered_json& node, const std::string& prefix, std::string& out) {
    if (node.is_object()) {
        for (const auto& item : node.items())
            flatten_csv(item.value(), prefix.empty() ? item.key() : prefix + "." + item.key(), out);
        return;
    }
    if (node.is_array()) {
        for (std::size_t i = 0; i < node.size(); ++i)
            flatten_csv(node[i], prefix + "[" + std::to_string(i) + "]", out);
        return;
    }
    out += prefix;
    out += ',';
    append_csv_cell(out, node);
    out += '\n';
}

}  // namespace

CommandResult cmd_analyze(const ExperimentConfig& cfg) {
    const ChainSpec spec = load_validated(cfg);
    CommandResult res;
    ordered_json& body = res.body;
    body["command"] = "analyze";
    body["chain"] = serialize_spec(spec);
    body["config"] =
        ordered_json{{"table_rows", cfg.table_rows}, {"horizon", cfg.horizon}};
    ordered_json warnings = ordered_json::array();

    const std::int64_t rows = std::max<std::int64_t>(1, cfg.table_rows);
    ordered_json table;
    table["provenance"] = "analytic";
    table["error"] = spec.exact() ? "exact" : "float rounding only";
    ordered_json row_list = ordered_json::array();
    if (spec.exact()) {
        const RatioTable<Rational> rt = ratio_table<Rational>(spec, rows);
        for (std::int64_t n = 0; n <= rows; ++n) {
            row_list.push_back({{"n", n},
                                {"t", format_rational(rt.t[static_cast<std::size_t>(n)])},
                                {"t_value", to_double(rt.t[static_cast<std::size_t>(n)])},
                                {"x", format_rational(rt.x[static_cast<std::size_t>(n)])},
                                {"x_value", to_double(rt.x[static_cast<std::size_t>(n)])}});
        }
    } else {
        const RatioTable<double> rt = ratio_table<double>(spec, rows);
        for (std::int64_t n = 0; n <= rows; ++n) {
            row_list.push_back({{"n", n},
                                {"t_value", rt.t[static_cast<std::size_t>(n)]},
                                {"x_value", rt.x[static_cast<std::size_t>(n)]}});
        }
    }
    table["rows"] = row_list;
    body["ratio_table"] = table;

    body["tail"] = tail_block(classify_tail(spec, 1e-9, cfg.horizon));

    const ExtinctionResult ext = extinction_probability(spec);
    body["extinction"] = extinction_block(ext);
    if (!ext.conclusive)
        warnings.push_back("extinction probability inconclusive: " + ext.method);

    try {
        body["limit_expectation"] = limit_block(limit_expectation(spec, cfg.horizon));
    } catch (const UndeterminedTailError& refusal) {
        ordered_json block;
        block["provenance"] = "analytic";
        block["undetermined"] = true;
        block["evidence"] = refusal.what();
        body["limit_expectation"] = block;
        warnings.push_back("limiting expectation refused: tail classification did not settle");
        res.exit_code = 3;
    }

    body["warnings"] = warnings;
    return res;
}

CommandResult cmd_criterion(const ExperimentConfig& cfg) {
    const ChainSpec spec = load_validated(cfg);
    CommandResult res;
    ordered_json& body = res.body;
    body["command"] = "criterion";
    body["chain"] = serialize_spec(spec);
    body["config"] = ordered_json{{"horizon", cfg.horizon}};
    ordered_json warnings = ordered_json::array();

    const CriterionResult crit = convergence_criterion(spec, cfg.horizon);
    ordered_json block;
    block["provenance"] = "analytic";
    switch (crit.verdict) {
        case CriterionVerdict::Satisfied: block["verdict"] = "satisfied"; break;
        case CriterionVerdict::Violated: block["verdict"] = "violated"; break;
        case CriterionVerdict::Inconclusive: block["verdict"] = "inconclusive"; break;
    }
    block["partial_sum"] = crit.partial_sum;
    block["evidence"] = crit.evidence;
    body["criterion"] = block;

    if (crit.verdict == CriterionVerdict::Satisfied) {
        // A satisfied criterion pins the ratio limit inside (0, inf), so the
        // limiting expectation is finite and positive: report it alongside.
        try {
            body["limit_expectation"] = limit_block(limit_expectation(spec, cfg.horizon));
        } catch (const UndeterminedTailError& refusal) {
            warnings.push_back(std::string("criterion satisfied but the tail scan disagreed: ") +
                               refusal.what());
        }
    } else if (crit.verdict == CriterionVerdict::Inconclusive) {
        res.exit_code = 3;
    }

    body["warnings"] = warnings;
    return res;
}

CommandResult cmd_simulate(const ExperimentConfig& cfg) {
    const ChainSpec spec = load_validated(cfg);
    RuleFamily family;
    if (cfg.stopping == "truncation") {
        family = RuleFamily::Truncation;
    } else if (cfg.stopping == "interval-exit") {
        family = RuleFamily::IntervalExit;
    } else {
        throw std::invalid_argument("unknown stopping family \"" + cfg.stopping +
                                    "\" (expected truncation or interval-exit)");
    }

    CommandResult res;
    ordered_json& body = res.body;
    body["command"] = "simulate";
    body["chain"] = serialize_spec(spec);
    body["config"] = ordered_json{{"seed", cfg.seed},
                                  {"paths", cfg.paths},
                                  {"stopping", cfg.stopping},
                                  {"m_grid", cfg.m_grid}};
    ordered_json warnings = ordered_json::array();
    if (family == RuleFamily::IntervalExit) {
        for (const std::int64_t b : cfg.m_grid)
            if (b <= spec.start_state()) {
                warnings.push_back("exit barrier " + std::to_string(b) +
                                   " does not exceed the start state; paths stop immediately");
                break;
            }
    }

    const SweepResult sweep =
        convergence_sweep(spec, family, cfg.m_grid, cfg.paths, cfg.seed, cfg.workers);

    ordered_json block;
    block["provenance"] = "monte-carlo";
    ordered_json points = ordered_json::array();
    std::int64_t cap_hits = 0;
    for (const SweepPoint& point : sweep.points) {
        points.push_back({{"m", point.index},
                          {"mean", point.estimate.mean},
                          {"ci_half_width", point.estimate.half_width_95},
                          {"paths", point.estimate.paths},
                          {"cap_hits", point.estimate.cap_hits}});
        cap_hits += point.estimate.cap_hits;
    }
    block["points"] = points;
    if (sweep.limit_known) {
        block["analytic_limit"] =
            sweep.analytic_limit.infinite ? ordered_json("inf")
                                          : ordered_json(sweep.analytic_limit.as_double());
        if (sweep.analytic_limit.exact)
            block["analytic_limit_exact"] = format_rational(*sweep.analytic_limit.exact);
    } else {
        block["analytic_limit"] = nullptr;
        block["analytic_limit_note"] = sweep.limit_note;
    }
    body["sweep"] = block;

    if (cap_hits > 0)
        warnings.push_back(std::to_string(cap_hits) +
                           " paths hit the step cap and were excluded from the estimates");
    body["warnings"] = warnings;
    return res;
}

CommandResult cmd_verify(const ExperimentConfig& cfg) {
    const ChainSpec spec = load_validated(cfg);
    const std::int64_t k = spec.start_state();
    const double tol = cfg.tolerance;
    const bool exact_mode = spec.exact();

    CommandResult res;
    ordered_json& body = res.body;
    body["command"] = "verify";
    body["chain"] = serialize_spec(spec);
    body["config"] = ordered_json{{"oracle_top", cfg.oracle_top}, {"tolerance", tol}};
    ordered_json checks = ordered_json::array();
    ordered_json warnings = ordered_json::array();
    bool all_pass = true;
    double max_float_diff = 0.0;

    // --- interval exit probabilities: closed form vs first-step recursion ---
    {
        const std::vector<std::int64_t> barriers = {10, 25, 50};
        std::size_t cases = 0;
        double worst = 0.0;
        bool pass = true;
        for (const std::int64_t b : barriers) {
            if (exact_mode) {
                const auto model = TruncatedChainModel<Rational>::from_spec(spec, b);
                const std::vector<Rational> profile = hit_zero_profile(model);
                const RatioTable<Rational> rt = ratio_table<Rational>(spec, b - 1);
                for (std::int64_t start = 1; start < b; ++start) {
                    const ExitSplit<Rational> split = exit_probabilities(rt, 0, start, b);
                    const Rational diff =
                        abs(split.hit_lower - profile[static_cast<std::size_t>(start)]);
                    worst = std::max(worst, to_double(diff));
                    if (diff != 0) pass = false;
                    ++cases;
                }
            } else {
                const auto model = TruncatedChainModel<double>::from_spec(spec, b);
                const std::vector<double> profile = hit_zero_profile(model);
                const RatioTable<double> rt = ratio_table<double>(spec, b - 1);
                for (std::int64_t start = 1; start < b; ++start) {
                    const ExitSplit<double> split = exit_probabilities(rt, 0, start, b);
                    const double diff =
                        std::abs(split.hit_lower - profile[static_cast<std::size_t>(start)]);
                    worst = std::max(worst, diff);
                    if (diff > tol) pass = false;
                    ++cases;
                }
            }
        }
        if (!exact_mode) max_float_diff = std::max(max_float_diff, worst);
        all_pass = all_pass && pass;
        checks.push_back({{"name", "interval-exit-probabilities"},
                          {"comparison", "closed form vs first-step recursion"},
                          {"mode", exact_mode ? "exact" : "float"},
                          {"cases", cases},
                          {"max_abs_diff", worst},
                          {"pass", pass}});
    }

    // --- one exact evolution serves three checks: the stopped-expectation
    // identity, mass conservation, and normalized occupation monotonicity ---
    {
        const std::int64_t m_max = 1000;
        const std::int64_t top = k + m_max + 2;  // barriers never touched within m_max steps
        const auto model = TruncatedChainModel<double>::from_spec(spec, top);
        DistributionEvolver<double> evolver(model, k);

        const std::vector<std::int64_t> stops = {10, 100, 1000};
        double worst_identity = 0.0;
        ordered_json identity_rows = ordered_json::array();
        for (const std::int64_t m : stops) {
            evolver.advance(m - evolver.time());
            const double lhs = evolver.expected_value();
            const OccupationProfile<double> profile{k, StoppingRule{Truncation{m}},
                                                    evolver.occupation()};
            const double rhs = stopping_identity_rhs(spec, profile);
            const double diff = std::abs(lhs - rhs);
            worst_identity = std::max(worst_identity, diff);
            identity_rows.push_back(
                {{"m", m}, {"evolved", lhs}, {"identity_rhs", rhs}, {"abs_diff", diff}});
        }
        const bool identity_pass = worst_identity <= tol;
        max_float_diff = std::max(max_float_diff, worst_identity);
        all_pass = all_pass && identity_pass;
        checks.push_back({{"name", "stopped-expectation-identity"},
                          {"comparison", "evolved E[X] vs start + sum of visits*(r-l)"},
                          {"mode", "float"},
                          {"rows", identity_rows},
                          {"max_abs_diff", worst_identity},
                          {"pass", identity_pass}});

        double mass = 0.0;
        for (const double p : evolver.mass()) mass += p;
        const double defect = std::abs(mass - 1.0);
        const bool mass_pass = defect <= 1e-12;
        max_float_diff = std::max(max_float_diff, defect);
        all_pass = all_pass && mass_pass;
        checks.push_back({{"name", "mass-conservation"},
                          {"mode", "float"},
                          {"at_time", evolver.time()},
                          {"max_abs_defect", defect},
                          {"pass", mass_pass}});

        // Normalized counts G_n * t_{n-1} * l_n must strictly decrease over
        // n >= start wherever they are positive.
        const std::vector<double>& counts = evolver.occupation();
        double t_prev = 1.0;
        double prev_norm = 0.0;
        bool have_prev = false;
        bool monotone = true;
        std::int64_t states_checked = 0;
        for (std::int64_t n = 1; n < top; ++n) {
            const ProbPair<double> pr = spec.probs(n);
            if (n >= k) {
                const double norm = counts[static_cast<std::size_t>(n - 1)] * t_prev * pr.left;
                if (norm <= 0.0) break;  // past the explored support
                if (have_prev && !(norm < prev_norm)) monotone = false;
                prev_norm = norm;
                have_prev = true;
                ++states_checked;
            }
            t_prev *= pr.left / pr.right;
            if (t_prev == 0.0) break;
        }
        all_pass = all_pass && monotone;
        checks.push_back({{"name", "normalized-occupation-monotonicity"},
                          {"mode", "float"},
                          {"states_checked", states_checked},
                          {"pass", monotone}});
    }

    // --- occupation counts on growing truncations vs the absorption formula ---
    {
        const Recurrence rec = recurrence_verdict(spec);
        if (rec != Recurrence::Recurrent) {
            checks.push_back(
                {{"name", "occupation-convergence"},
                 {"skipped", true},
                 {"reason", rec == Recurrence::Transient
                                ? "chain is transient: counts until absorption are infinite"
                                : "certain extinction not established numerically"},
                 {"pass", true}});
            warnings.push_back("occupation convergence skipped: absorption is not certain");
        } else {
            std::vector<std::int64_t> tops = {std::max<std::int64_t>(k + 2, cfg.oracle_top / 100),
                                              std::max<std::int64_t>(k + 2, cfg.oracle_top / 10),
                                              std::max<std::int64_t>(k + 2, cfg.oracle_top)};
            tops.erase(std::unique(tops.begin(), tops.end()), tops.end());
            const std::int64_t max_state = std::min<std::int64_t>(k + 3, tops.front() - 1);
            bool pass = true;
            double final_gap = 0.0;
            ordered_json level_rows = ordered_json::array();
            std::vector<std::vector<double>> per_level;
            for (const std::int64_t top : tops) {
                const auto model = TruncatedChainModel<double>::from_spec(spec, top);
                const std::vector<double> occ = occupation_by_fundamental_matrix(model, k);
                std::vector<double> sampled;
                for (std::int64_t n = 1; n <= max_state; ++n)
                    sampled.push_back(occ[static_cast<std::size_t>(n - 1)]);
                per_level.push_back(std::move(sampled));
            }
            for (std::int64_t n = 1; n <= max_state; ++n) {
                const double formula = occupation_until_extinction<double>(spec, n);
                double previous = 0.0;
                for (std::size_t level = 0; level < per_level.size(); ++level) {
                    const double value = per_level[level][static_cast<std::size_t>(n - 1)];
                    if (value + 1e-12 * std::abs(value) < previous) pass = false;  // not increasing
                    if (value > formula * (1.0 + 1e-9) + 1e-12) pass = false;      // above the bound
                    previous = value;
                }
                const double last = per_level.back()[static_cast<std::size_t>(n - 1)];
                const double gap = formula > 0.0 ? (formula - last) / formula : 0.0;
                final_gap = std::max(final_gap, gap);
                level_rows.push_back({{"state", n}, {"formula", formula}, {"at_top", last}});
            }
            all_pass = all_pass && pass;
            checks.push_back({{"name", "occupation-convergence"},
                              {"comparison", "fundamental-matrix counts vs absorption formula"},
                              {"mode", "float"},
                              {"levels", tops},
                              {"states", level_rows},
                              {"final_relative_gap", final_gap},
                              {"pass", pass}});
        }
    }

    body["checks"] = checks;
    body["max_float_discrepancy"] = max_float_diff;
    if (exact_mode) body["exact_mode"] = true;
    body["pass"] = all_pass;
    body["warnings"] = warnings;
    res.exit_code = all_pass ? 0 : 2;
    return res;
}

std::string render_report(const ordered_json& body, const std::string& format) {
    if (format == "json") return body.dump(2) + "\n";
    if (format != "csv")
        throw std::invalid_argument("unknown format \"" + format + "\" (expected json or csv)");

    std::string out;
    if (body.contains("sweep")) {
        const ordered_json& sweep = body.at("sweep");
        std::string limit_cell;
        if (sweep.contains("analytic_limit") && !sweep.at("analytic_limit").is_null()) {
            ordered_json cell = sweep.at("analytic_limit");
            limit_cell = cell.is_string() ? cell.get<std::string>() : cell.dump();
        }
        out = "m,mean,ci_half_width,analytic_limit\n";
        for (const ordered_json& point : sweep.at("points")) {
            out += point.at("m").dump();
            out += ',';
            out += point.at("mean").dump();
            out += ',';
            out += point.at("ci_half_width").dump();
            out += ',';
            out += limit_cell;
            out += '\n';
        }
        return out;
    }
    out = "key,value\n";
    flatten_csv(body, "", out);
    return out;
}

}  // namespace bdc
