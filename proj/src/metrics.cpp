#include "fedea/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace fedea::metrics {

double igd(const Matrix& solutions, const Matrix& reference) {
    if (solutions.rows() == 0 || reference.rows() == 0)
        throw std::invalid_argument("igd: empty input");
    if (solutions.cols() != reference.cols())
        throw std::invalid_argument("igd: objective-count mismatch");
    double total = 0.0;
    for (std::size_t r = 0; r < reference.rows(); ++r) {
        auto ref = reference.row(r);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < solutions.rows(); ++s) {
            auto sol = solutions.row(s);
            double d = 0.0;
            for (std::size_t m = 0; m < ref.size(); ++m) {
                const double diff = sol[m] - ref[m];
                d += diff * diff;
            }
            best = std::min(best, d);
        }
        total += std::sqrt(best);
    }
    return total / static_cast<double>(reference.rows());
}

namespace {

// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

RankCorrelation rank_correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("rank_correlation: length mismatch");
    if (a.size() < 2)
        throw std::invalid_argument("rank_correlation: need at least two samples");
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double ma = vec_mean(ra), mb = vec_mean(rb);
    double num = 0.0, da = 0.0, db = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        num += (ra[i] - ma) * (rb[i] - mb);
        da += (ra[i] - ma) * (ra[i] - ma);
        db += (rb[i] - mb) * (rb[i] - mb);
    }
    if (da == 0.0 || db == 0.0) return {0.0, true};
    return {num / std::sqrt(da * db), false};
}

std::string to_string(MessageKind kind) {
    switch (kind) {
        case MessageKind::PublicKey: return "PublicKey";
        case MessageKind::Salt: return "Salt";
        case MessageKind::Candidates: return "Candidates";
        case MessageKind::MaskedPredictions: return "MaskedPredictions";
        case MessageKind::ForwardBundle: return "ForwardBundle";
        case MessageKind::FlcbValues: return "FlcbValues";
        case MessageKind::QueryResult: return "QueryResult";
        case MessageKind::GlobalWeights: return "GlobalWeights";
        case MessageKind::MaskedWeights: return "MaskedWeights";
    }
    return "?";
}

MetricReport comm_check(const std::vector<MessageRecord>& trace, std::size_t K,
                        std::size_t t_m, std::size_t N_r) {
    if (trace.empty()) throw std::invalid_argument("comm_check: empty trace");
    MetricReport rep;

    std::uint64_t masked_sent = 0;       // MaskedPredictions units, clients -> server
    std::uint64_t bundle_units = 0;      // ForwardBundle units, server -> aggregator
    std::uint64_t key_client_hops = 0;   // PublicKey units with a client endpoint
    for (const auto& m : trace) {
        rep.bytes_by_kind[to_string(m.kind)] += m.byte_size;
        rep.bytes_total += m.byte_size;
        switch (m.kind) {
            case MessageKind::MaskedPredictions: masked_sent += m.payload_units; break;
            case MessageKind::ForwardBundle: bundle_units += m.payload_units; break;
            case MessageKind::PublicKey:
                if (m.sender != kServerId || m.receiver != kServerId)
                    key_client_hops += m.payload_units;
                break;
            default: break;
        }
    }

    rep.server_units = masked_sent + bundle_units;
    const std::uint64_t key_per_client = key_client_hops / K;
    rep.normal_client_units = (K > 1 ? masked_sent / (K - 1) : 0) + key_per_client;
    rep.aggregator_units = bundle_units + key_per_client;
    rep.total_units = rep.server_units + rep.normal_client_units + rep.aggregator_units;

    const std::uint64_t tn = static_cast<std::uint64_t>(t_m) * N_r;
    rep.expected_server_units = 2 * (K - 1) * tn;
    rep.expected_normal_client_units = 2 * (K - 1) + tn;
    rep.expected_aggregator_units = 2 * (K - 1) + (K - 1) * tn;
    rep.expected_total_units = (3 * K - 2) * tn + 4 * (K - 1);

    rep.match = rep.server_units == rep.expected_server_units &&
                rep.normal_client_units == rep.expected_normal_client_units &&
                rep.aggregator_units == rep.expected_aggregator_units &&
                rep.total_units == rep.expected_total_units;
    if (!rep.match) {
        std::ostringstream os;
        os << "server " << rep.server_units << "/" << rep.expected_server_units
           << ", normal " << rep.normal_client_units << "/" << rep.expected_normal_client_units
           << ", aggregator " << rep.aggregator_units << "/" << rep.expected_aggregator_units
           << ", total " << rep.total_units << "/" << rep.expected_total_units;
        rep.detail = os.str();
    }
    return rep;
}

std::string trace_csv(const std::vector<MessageRecord>& trace) {
    std::ostringstream os;
    os << "round,iteration,kind,sender,receiver,byte_size\n";
    for (const auto& m : trace) {
        os << m.round << ',' << m.iteration << ',' << to_string(m.kind) << ','
           << m.sender << ',' << m.receiver << ',' << m.byte_size << '\n';
    }
    return os.str();
}

std::string round_metrics_csv(const std::vector<RoundMetricsRow>& rows) {
    std::ostringstream os;
    os << "run,round,evals,igd,rho_mean,bytes_total\n";
    os.precision(17);
    for (const auto& r : rows) {
        os << r.run << ',' << r.round << ',' << r.evals << ',' << r.igd << ','
           << r.rho_mean << ',' << r.bytes_total << '\n';
    }
    return os.str();
}

}  // namespace fedea::metrics
