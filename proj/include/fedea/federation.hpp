#ifndef FEDEA_FEDERATION_HPP
#define FEDEA_FEDERATION_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fedea/core.hpp"
#include "fedea/metrics.hpp"
#include "fedea/problems.hpp"
#include "fedea/secagg.hpp"
#include "fedea/surrogate.hpp"

namespace fedea::fed {

enum class Mode { Plaintext, Dh, DhBig, DhBigWo };

Mode parse_mode(const std::string& name);  // plaintext / dh / dh-big / dh-big-wo
std::string to_string(Mode mode);

struct ExperimentConfig {
    problems::ProblemName problem = problems::ProblemName::DTLZ2;
    std::size_t M = 3;
    std::size_t D = 20;
    std::size_t K = 4;            // clients
    std::size_t population = 0;   // 0 = by M (105 / 126 / 230)
    std::size_t t_m = 20;         // iterations per acquisition optimization
    std::size_t mu = 5;           // query batch size
    std::size_t g0 = 219;         // initial points per client
    std::size_t budget = 120;     // total new evaluations (divisible by mu)
    Mode mode = Mode::Dh;
    double noise_factor = -1.0;   // negative = mode default (0 / 10 / 100 / 100)
    double t = 2.0;               // FLCB trade-off constant
    std::optional<bool> normalize;  // default: on, except dh-big-wo
    secagg::GroupPreset group = secagg::GroupPreset::Test64;
    std::uint64_t master_seed = 1;
    std::size_t epochs = 20;
    double learning_rate = 0.06;
    bool warm_start = true;        // retrain from the received global model
    bool reuse_population = false; // carry the MOEA population across rounds
    double alpha = 2.0;            // APD progress exponent

    std::size_t rounds() const { return mu == 0 ? 0 : budget / mu; }
    double resolved_noise_factor() const;
    bool resolved_normalize() const;
};

/// Fills mode-dependent defaults and checks the config invariants; throws
/// std::invalid_argument with the offending key in the message.
ExperimentConfig resolve_config(const ExperimentConfig& config);

struct RoundRecord {
    std::size_t round = 0;
    int aggregator = -1;
    std::size_t evals_total = 0;
    double igd = 0.0;
    std::uint64_t bytes_total = 0;
    std::map<std::string, std::uint64_t> bytes_by_kind;
    double rho_mean_abs = 0.0;  // mean |Spearman rho| of this round's samples
    std::size_t rho_count = 0;
    Matrix query_points;
    std::size_t privacy_violations = 0;
    std::vector<std::uint64_t> selection_hashes;  // one per iteration
};

struct RunLog {
    ExperimentConfig config;
    std::vector<RoundRecord> rounds;
    std::vector<metrics::MessageRecord> trace;
    std::vector<double> rho_samples;  // signed, per (iteration, sender, column)
    double initial_igd = 0.0;
    double final_igd = 0.0;
    std::size_t evals_total = 0;
    Matrix archive_objectives;  // union of all clients' true-evaluated points
    std::vector<double> mask_scale;  // per-objective prediction mask scale
    std::string hash_name = "SHA-256";
    std::vector<std::string> notes;  // resolved open-choice metadata

    /// Canonical serialization with exact double round-trips; two runs are
    /// byte-identical iff these strings match.
    std::string canonical_text() const;
    std::vector<metrics::RoundMetricsRow> metric_rows(std::size_t run_index) const;
};

/// Rejects salt reuse within a run.
class SaltRegistry {
public:
    /// Registers a salt; throws std::runtime_error on reuse.
    void register_salt(const secagg::Salt& salt);
    bool seen(const secagg::Salt& salt) const { return used_.count(salt) > 0; }

private:
    std::set<secagg::Salt> used_;
};

/// One in-flight protocol message: routing metadata plus payload. Exactly the
/// members relevant to the kind are populated.
struct BusMessage {
    metrics::MessageRecord meta;
    Matrix matrix;                                      // Candidates, FlcbValues, GlobalWeights
    secagg::MaskedObjectiveMatrix masked;               // MaskedPredictions, MaskedWeights
    std::vector<secagg::MaskedObjectiveMatrix> bundle;  // ForwardBundle: K-1 masked matrices
    Matrix server_prediction;                           // ForwardBundle: global-model output
    secagg::Salt salt;                                  // Candidates, Salt
    std::string group_element_hex;                      // PublicKey
    std::uint64_t count = 0;                            // QueryResult
};

/// In-process loopback transport: synchronous mailboxes addressed by party id
/// (metrics::kServerId for the server) plus the cumulative metadata trace.
/// The protocol logic talks only to post/drain, so a remote transport can be
/// substituted by reimplementing these two calls with real serialization.
class Bus {
public:
    void post(BusMessage message);
    /// All pending messages for one party, in arrival order.
    std::vector<BusMessage> drain(int receiver);
    const std::vector<metrics::MessageRecord>& trace() const { return trace_; }
    std::size_t trace_size() const { return trace_.size(); }

private:
    std::map<int, std::vector<BusMessage>> mailboxes_;
    std::vector<metrics::MessageRecord> trace_;
};

/// Nondominated filtering, k-means (k = mu) in FLCB space, one representative
/// per cluster, archive duplicates replaced by the next-closest member.
Matrix select_query_points(const Matrix& candidates, const Matrix& flcb_values, std::size_t mu,
                           const Matrix& archive_inputs, std::uint64_t seed);

/// Full deterministic experiment: setup, budget/mu protocol rounds, per-round
/// metrics and privacy audit.
RunLog run_experiment(const ExperimentConfig& config);

}  // namespace fedea::fed

#endif
