#ifndef FEDEA_RUNNER_HPP
#define FEDEA_RUNNER_HPP

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fedea/federation.hpp"

namespace fedea::runner {

/// A run matrix: the cross product of problems x objective counts x modes,
/// each cell repeated `runs` times with disjoint derived seeds.
struct MatrixSpec {
    std::vector<std::string> problems;
    std::vector<std::size_t> objectives;
    std::vector<std::string> modes;
    fed::ExperimentConfig base;
    std::size_t runs = 1;
    std::string out_dir;
    std::size_t parallel = 1;
};

/// Parses `key = value` config text (# comments, comma lists for problem /
/// objectives / mode), then applies flag overrides (same keys). Throws
/// std::invalid_argument naming the offending or missing key.
MatrixSpec parse_config(const std::optional<std::string>& file_text,
                        const std::map<std::string, std::string>& overrides);

std::string cell_name(const std::string& problem, std::size_t M, const std::string& mode);

/// Stable content hash of a resolved cell config (drives resumability).
std::uint64_t config_hash(const fed::ExperimentConfig& config, std::size_t runs);

std::string resolved_config_text(const fed::ExperimentConfig& config, std::size_t runs);

/// Per-repetition seed: derived from the cell content, not its position, so
/// removing one cell leaves the others' outputs byte-identical.
std::uint64_t cell_seed(std::uint64_t master, const std::string& problem, std::size_t M,
                        const std::string& mode, std::size_t rep);

/// Executes every cell (parallel across repetitions), writes per-run CSVs and
/// per-cell summaries under out_dir, then prints the aggregate table.
/// Returns 0 on success, 1 if any cell failed.
int run_matrix(const MatrixSpec& spec, std::ostream& os);

/// Aggregates finals.csv files under out_dir into a median/mean/std table
/// with Wilcoxon rank-sum significance marks against `baseline_mode`.
int report(const std::string& out_dir, const std::string& baseline_mode, std::ostream& os);

/// Normal-approximation Wilcoxon rank-sum z statistic (tie-corrected).
double wilcoxon_ranksum_z(const std::vector<double>& a, const std::vector<double>& b);

/// '+' cell better than baseline (lower median, significant at 0.05),
/// '-' worse, '=' otherwise.
char significance_mark(const std::vector<double>& cell, const std::vector<double>& baseline);

/// Mask-cancellation property trials plus fixed DH test vectors; optionally
/// emits or checks a vectors file. Returns 0 when everything passes.
int secagg_selftest(const std::optional<std::string>& emit_path,
                    const std::optional<std::string>& check_path, std::ostream& os);

}  // namespace fedea::runner

#endif
