#ifndef FEDEA_METRICS_HPP
#define FEDEA_METRICS_HPP

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fedea/core.hpp"

namespace fedea::metrics {

/// Inverted generational distance: mean over reference points of the minimal
/// Euclidean distance to any solution. Lower is better.
double igd(const Matrix& solutions, const Matrix& reference);

struct RankCorrelation {
    double rho = 0.0;
    bool degenerate = false;  // set when either input is constant
};

/// Spearman rank correlation with average ranks for ties. Requires equal
/// lengths >= 2; a constant input yields rho = 0 with the degenerate flag set.
RankCorrelation rank_correlation(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------
// Message trace and communication accounting
// ---------------------------------------------------------------------------

enum class MessageKind {
    PublicKey,
    Salt,
    Candidates,
    MaskedPredictions,
    ForwardBundle,
    FlcbValues,
    QueryResult,
    GlobalWeights,
    MaskedWeights,
};

std::string to_string(MessageKind kind);

constexpr int kServerId = -1;

/// One transmitted message. `payload_units` counts per-client objective-value
/// matrices for data-phase kinds and group elements for PublicKey; zero for
/// kinds the closed-form accounting does not cover.
struct MessageRecord {
    std::size_t round = 0;      // 0 = setup phase
    std::size_t iteration = 0;  // 0 = outside the acquisition loop
    MessageKind kind = MessageKind::Salt;
    int sender = kServerId;
    int receiver = kServerId;
    std::uint64_t byte_size = 0;
    std::uint64_t payload_units = 0;
};

/// Observed payload-unit tallies versus the closed-form communication costs.
///
/// Unit convention: a data-phase unit is one per-client masked objective
/// matrix crossing one link (a MaskedPredictions message carries 1 unit, a
/// ForwardBundle carries K-1); a key-phase unit is one group element crossing
/// a client-side link. Role costs follow the three-party breakdown: the
/// server counts both its receives and forwards, a representative normal
/// client counts its uploads plus its key exchange, and the aggregator counts
/// the forwarded bundles plus its key exchange. The total is the sum of those
/// three role costs.
struct MetricReport {
    std::uint64_t server_units = 0;          // expected 2*(K-1)*t_m*N_r
    std::uint64_t normal_client_units = 0;   // representative; expected 2*(K-1) + t_m*N_r
    std::uint64_t aggregator_units = 0;      // expected 2*(K-1) + (K-1)*t_m*N_r
    std::uint64_t total_units = 0;           // expected (3K-2)*t_m*N_r + 4*(K-1)
    std::uint64_t expected_server_units = 0;
    std::uint64_t expected_normal_client_units = 0;
    std::uint64_t expected_aggregator_units = 0;
    std::uint64_t expected_total_units = 0;
    bool match = false;
    std::map<std::string, std::uint64_t> bytes_by_kind;
    std::uint64_t bytes_total = 0;
    std::string detail;  // attribution of any delta, empty on exact match
};

/// Tallies a complete dh-mode message trace against the closed forms for the
/// given protocol parameters. Throws std::invalid_argument on an empty trace.
MetricReport comm_check(const std::vector<MessageRecord>& trace, std::size_t K,
                        std::size_t t_m, std::size_t N_r);

// ---------------------------------------------------------------------------
// CSV export
// ---------------------------------------------------------------------------

/// Stable header: round,iteration,kind,sender,receiver,byte_size
std::string trace_csv(const std::vector<MessageRecord>& trace);

struct RoundMetricsRow {
    std::size_t run = 0;
    std::size_t round = 0;
    std::size_t evals = 0;
    double igd = 0.0;
    double rho_mean = 0.0;
    std::uint64_t bytes_total = 0;
};

/// Stable header: run,round,evals,igd,rho_mean,bytes_total
std::string round_metrics_csv(const std::vector<RoundMetricsRow>& rows);

}  // namespace fedea::metrics

#endif
