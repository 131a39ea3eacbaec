#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "fedea/runner.hpp"

namespace {

struct CommonFlags {
    std::string config_file;
    std::map<std::string, std::string> overrides;

    void add_to(CLI::App& app) {
        app.add_option("--config", config_file, "key = value config file");
        auto opt = [&](const std::string& flag, const std::string& key, const std::string& help) {
            app.add_option_function<std::string>(
                flag, [this, key](const std::string& v) { overrides[key] = v; }, help);
        };
        opt("--problem", "problem", "benchmark name(s), e.g. dtlz2 or dtlz2,wfg4");
        opt("--objectives", "objectives", "objective count(s): 3, 5, 10");
        opt("--dims", "dims", "decision variables (default 20)");
        opt("--clients", "clients", "client count K (default 4)");
        opt("--mode", "mode", "plaintext | dh | dh-big | dh-big-wo");
        opt("--noise-factor", "noise-factor", "mask scale factor (default by mode)");
        opt("--t", "t", "FLCB trade-off constant (default 2)");
        opt("--tm", "tm", "iterations per acquisition optimization (default 20)");
        opt("--mu", "mu", "query batch size (default 5)");
        opt("--budget", "budget", "total new evaluations (default 120)");
        opt("--seed", "seed", "master seed (default 1)");
        opt("--runs", "runs", "repetitions per cell (default 1)");
        opt("--out", "out", "output directory");
        opt("--group", "group", "test-64bit | rfc-2048 | rfc-3072");
        opt("--epochs", "epochs", "local training epochs (default 20)");
        opt("--lr", "lr", "client learning rate (default 0.06)");
        opt("--g0", "g0", "initial points per client (default 219)");
        opt("--np", "np", "population size (default by objectives)");
        opt("--normalize", "normalize", "on | off (default by mode)");
        opt("--warm-start", "warm-start", "retrain from the global model (default true)");
        opt("--reuse-population", "reuse-population", "carry population across rounds");
        opt("--parallel", "parallel", "worker threads for matrix cells (default 1)");
    }

    fedea::runner::MatrixSpec parse() const {
        std::optional<std::string> text;
        if (!config_file.empty()) {
            std::ifstream f(config_file);
            if (!f) throw std::invalid_argument("config: cannot open file " + config_file);
            std::ostringstream buf;
            buf << f.rdbuf();
            text = buf.str();
        }
        return fedea::runner::parse_config(text, overrides);
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fedea: secure federated data-driven evolutionary multi-objective optimization"};
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "run a single experiment cell");
    CommonFlags run_flags;
    run_flags.add_to(*run_cmd);

    auto* matrix_cmd = app.add_subcommand("matrix", "run a problem x objectives x mode matrix");
    CommonFlags matrix_flags;
    matrix_flags.add_to(*matrix_cmd);

    auto* report_cmd = app.add_subcommand("report", "aggregate run CSVs into a summary table");
    std::string report_dir = "fedea-runs";
    std::string baseline;
    report_cmd->add_option("--out", report_dir, "directory holding the cell outputs");
    report_cmd->add_option("--baseline", baseline, "mode to compare against (+/-/= marks)");

    auto* selftest_cmd =
        app.add_subcommand("secagg-selftest", "mask-cancellation and DH test vectors");
    std::string emit_path, check_path;
    selftest_cmd->add_option("--emit", emit_path, "write test vectors to this file");
    selftest_cmd->add_option("--check", check_path, "verify a test vectors file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run_cmd->parsed()) {
            auto spec = run_flags.parse();
            if (spec.problems.size() != 1 || spec.objectives.size() != 1 ||
                spec.modes.size() != 1) {
                std::cerr << "run: expected a single problem/objectives/mode; use `matrix` "
                             "for lists\n";
                return 2;
            }
            return fedea::runner::run_matrix(spec, std::cout);
        }
        if (matrix_cmd->parsed()) {
            return fedea::runner::run_matrix(matrix_flags.parse(), std::cout);
        }
        if (report_cmd->parsed()) {
            return fedea::runner::report(report_dir, baseline, std::cout);
        }
        if (selftest_cmd->parsed()) {
            std::optional<std::string> emit, check;
            if (!emit_path.empty()) emit = emit_path;
            if (!check_path.empty()) check = check_path;
            return fedea::runner::secagg_selftest(emit, check, std::cout);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
