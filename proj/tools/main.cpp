#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "bdc/analytics.hpp"
#include "bdc/chain_io.hpp"
#include "bdc/commands.hpp"

namespace {

void add_common_options(CLI::App* cmd, bdc::ExperimentConfig& cfg) {
    cmd->add_option("--chain", cfg.chain,
                    "chain description: path to a JSON file, or inline JSON starting with '{'")
        ->required();
    cmd->add_option("--format", cfg.format, "report format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    cmd->add_option("--seed", cfg.seed, "base seed for anything randomized")
        ->capture_default_str();
    cmd->add_option("--out", cfg.out_path, "write the report to this file instead of stdout");
}

int emit(const bdc::CommandResult& result, const bdc::ExperimentConfig& cfg) {
    const std::string text = bdc::render_report(result.body, cfg.format);
    if (cfg.out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(cfg.out_path, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot open " << cfg.out_path << " for writing\n";
            return 1;
        }
        out << text;
    }
    return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact and simulated stopping-time expectations for birth-death chains"};
    app.require_subcommand(1);
    bdc::ExperimentConfig cfg;

    CLI::App* analyze =
        app.add_subcommand("analyze", "ratio table, tail class, extinction, limiting expectation");
    add_common_options(analyze, cfg);
    analyze->add_option("--table-rows", cfg.table_rows, "how many ratio-table rows to print")
        ->check(CLI::Range(std::int64_t{1}, std::int64_t{100000}))
        ->capture_default_str();
    analyze->add_option("--horizon", cfg.horizon, "scan depth for numeric tail classification")
        ->check(CLI::Range(std::int64_t{100}, std::int64_t{100000000}))
        ->capture_default_str();

    CLI::App* verify = app.add_subcommand(
        "verify", "check the closed forms against brute-force solves on truncated chains");
    add_common_options(verify, cfg);
    verify->add_option("--oracle-n", cfg.oracle_top, "largest truncation level for the solves")
        ->check(CLI::Range(std::int64_t{10}, std::int64_t{2000000}))
        ->capture_default_str();
    verify->add_option("--tol", cfg.tolerance, "comparison tolerance for float-mode checks")
        ->capture_default_str();

    CLI::App* simulate =
        app.add_subcommand("simulate", "Monte Carlo sweep of stopped means against the limit");
    add_common_options(simulate, cfg);
    simulate->add_option("--m-grid", cfg.m_grid, "comma-separated stopping indices, increasing")
        ->delimiter(',')
        ->capture_default_str();
    simulate->add_option("--paths", cfg.paths, "sample paths per grid point")
        ->check(CLI::Range(std::uint64_t{2}, std::uint64_t{100000000}))
        ->capture_default_str();
    simulate->add_option("--stopping", cfg.stopping, "stopping family: truncation | interval-exit")
        ->check(CLI::IsMember({"truncation", "interval-exit"}))
        ->capture_default_str();
    simulate->add_option("--workers", cfg.workers, "worker threads (does not change the numbers)")
        ->check(CLI::Range(1, 256));

    CLI::App* criterion = app.add_subcommand(
        "criterion", "sufficient-condition verdict for a finite positive limiting expectation");
    add_common_options(criterion, cfg);
    criterion->add_option("--horizon", cfg.horizon, "how many terms of the series to examine")
        ->check(CLI::Range(std::int64_t{100}, std::int64_t{100000000}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& help) {
        return app.exit(help);
    } catch (const CLI::ParseError& error) {
        app.exit(error);
        return 1;  // any usage problem is a configuration error
    }

    try {
        bdc::CommandResult result;
        if (analyze->parsed()) {
            result = bdc::cmd_analyze(cfg);
        } else if (verify->parsed()) {
            result = bdc::cmd_verify(cfg);
        } else if (simulate->parsed()) {
            result = bdc::cmd_simulate(cfg);
        } else {
            result = bdc::cmd_criterion(cfg);
        }
        return emit(result, cfg);
    } catch (const bdc::UndeterminedTailError& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 3;
    } catch (const bdc::SpecError& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }
}
