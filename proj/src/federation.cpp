#include "fedea/federation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "fedea/acquisition.hpp"
#include "fedea/moea.hpp"

namespace fedea::fed {

using metrics::MessageKind;
using metrics::MessageRecord;
using secagg::MaskScale;
using secagg::Salt;

Mode parse_mode(const std::string& name) {
    if (name == "plaintext") return Mode::Plaintext;
    if (name == "dh") return Mode::Dh;
    if (name == "dh-big") return Mode::DhBig;
    if (name == "dh-big-wo") return Mode::DhBigWo;
    throw std::invalid_argument("unknown mode: " + name);
}

std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::Plaintext: return "plaintext";
        case Mode::Dh: return "dh";
        case Mode::DhBig: return "dh-big";
        case Mode::DhBigWo: return "dh-big-wo";
    }
    return "?";
}

double ExperimentConfig::resolved_noise_factor() const {
    if (noise_factor >= 0.0) return noise_factor;
    switch (mode) {
        case Mode::Plaintext: return 0.0;
        case Mode::Dh: return 10.0;
        case Mode::DhBig:
        case Mode::DhBigWo: return 100.0;
    }
    return 0.0;
}

bool ExperimentConfig::resolved_normalize() const {
    if (normalize) return *normalize;
    return mode != Mode::DhBigWo;
}

ExperimentConfig resolve_config(const ExperimentConfig& config) {
    ExperimentConfig c = config;
    problems::make_problem(c.problem, c.M, c.D);  // validates problem/M/D/k
    if (c.K < 2) throw std::invalid_argument("config: clients must be at least 2");
    if (c.mu < 1) throw std::invalid_argument("config: mu must be at least 1");
    if (c.budget % c.mu != 0)
        throw std::invalid_argument("config: budget must be divisible by mu");
    if (c.t_m < 1) throw std::invalid_argument("config: tm must be at least 1");
    if (c.epochs < 1) throw std::invalid_argument("config: epochs must be at least 1");
    if (c.learning_rate <= 0.0) throw std::invalid_argument("config: lr must be positive");
    if (c.g0 < surrogate::default_center_count(c.M, c.D))
        throw std::invalid_argument("config: g0 must be at least the surrogate center count");
    if (c.population == 0) {
        const auto layers = moea::default_layers(c.M);
        c.population = moea::simplex_lattice_refvecs(c.M, layers).vectors.rows();
    }
    if (c.population < 2) throw std::invalid_argument("config: population must be at least 2");
    return c;
}

void SaltRegistry::register_salt(const Salt& salt) {
    if (!used_.insert(salt).second)
        throw std::runtime_error("salt reuse detected (round " + std::to_string(salt.round) +
                                 ", iteration " + std::to_string(salt.iteration) + ")");
}

void Bus::post(BusMessage message) {
    trace_.push_back(message.meta);
    mailboxes_[message.meta.receiver].push_back(std::move(message));
}

std::vector<BusMessage> Bus::drain(int receiver) {
    auto it = mailboxes_.find(receiver);
    if (it == mailboxes_.end()) return {};
    std::vector<BusMessage> out = std::move(it->second);
    mailboxes_.erase(it);
    return out;
}

// ---------------------------------------------------------------------------
// Query-point selection
// ---------------------------------------------------------------------------

namespace {

bool rows_equal(std::span<const double> a, std::span<const double> b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin());
}

bool row_in_matrix(std::span<const double> row, const Matrix& m) {
    if (m.cols() != row.size()) return false;
    for (std::size_t r = 0; r < m.rows(); ++r)
        if (rows_equal(row, m.row(r))) return true;
    return false;
}

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace

Matrix select_query_points(const Matrix& candidates, const Matrix& flcb_values, std::size_t mu,
                           const Matrix& archive_inputs, std::uint64_t seed) {
    if (candidates.rows() == 0) throw std::invalid_argument("select_query_points: empty population");
    if (candidates.rows() != flcb_values.rows())
        throw std::invalid_argument("select_query_points: FLCB row mismatch");

    std::vector<std::size_t> pool = nondominated_indices(flcb_values);
    if (pool.size() < mu) {
        // Fill from dominated candidates, least-dominated first.
        std::vector<std::pair<std::size_t, std::size_t>> rest;  // (domination count, index)
        std::vector<bool> in_pool(candidates.rows(), false);
        for (std::size_t i : pool) in_pool[i] = true;
        for (std::size_t i = 0; i < candidates.rows(); ++i) {
            if (in_pool[i]) continue;
            std::size_t cnt = 0;
            for (std::size_t j = 0; j < candidates.rows(); ++j)
                if (j != i && dominates(flcb_values.row(j), flcb_values.row(i))) ++cnt;
            rest.emplace_back(cnt, i);
        }
        std::sort(rest.begin(), rest.end());
        for (const auto& [cnt, idx] : rest) {
            if (pool.size() >= mu) break;
            pool.push_back(idx);
        }
    }

    Rng rng(seed);
    if (pool.size() <= mu) {
        // Take everything, then top up with random candidate rows.
        std::vector<std::size_t> chosen = pool;
        while (chosen.size() < mu) chosen.push_back(rng.index(candidates.rows()));
        return candidates.select_rows(chosen);
    }

    const Matrix pool_flcb = flcb_values.select_rows(pool);
    const auto km = kmeans(pool_flcb, mu, 100, seed);

    std::vector<std::size_t> chosen;
    std::vector<bool> taken(pool.size(), false);
    for (std::size_t c = 0; c < mu; ++c) {
        // Pool members sorted by distance to this centroid (ties by index).
        std::vector<std::pair<double, std::size_t>> order;
        order.reserve(pool.size());
        for (std::size_t i = 0; i < pool.size(); ++i)
            order.emplace_back(sq_dist(pool_flcb.row(i), km.centroids.row(c)), i);
        std::sort(order.begin(), order.end());
        std::size_t pick = pool.size();
        for (const auto& [dist, i] : order) {
            if (taken[i]) continue;
            if (row_in_matrix(candidates.row(pool[i]), archive_inputs)) continue;
            pick = i;
            break;
        }
        if (pick == pool.size()) {
            // Every remaining member duplicates the archive; fall back to the
            // closest untaken one.
            for (const auto& [dist, i] : order) {
                if (!taken[i]) {
                    pick = i;
                    break;
                }
            }
        }
        taken[pick] = true;
        chosen.push_back(pool[pick]);
    }
    return candidates.select_rows(chosen);
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

namespace {

constexpr std::uint64_t kHeaderBytes = 24;
constexpr std::uint64_t kSaltBytes = 24;

std::uint64_t fnv_bytes(std::uint64_t h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t hash_matrix(const Matrix& a, const Matrix& b) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = fnv_bytes(h, a.data().data(), a.data().size() * sizeof(double));
    h = fnv_bytes(h, b.data().data(), b.data().size() * sizeof(double));
    return h;
}

MessageRecord meta(std::size_t round, std::size_t iter, MessageKind kind, int sender,
                   int receiver, std::uint64_t payload_bytes, std::uint64_t units) {
    return {round, iter, kind, sender, receiver, kHeaderBytes + payload_bytes, units};
}

struct ClientState {
    int id = -1;
    surrogate::Dataset data;
    surrogate::RBFNModel model;
    secagg::KeyPair keypair;
    secagg::Keyring keyring;
    std::optional<surrogate::RBFNModel> global_model;
    SaltRegistry seen_salts;
};

struct Simulation {
    ExperimentConfig cfg;
    problems::ProblemInstance problem;
    secagg::GroupParams group;
    std::uint64_t element_bytes = 0;
    std::vector<ClientState> clients;
    std::optional<surrogate::RBFNModel> global_model;
    SaltRegistry issued_salts;
    moea::ReferenceVectorSet refvec_template;
    Matrix reference_front;
    MaskScale pred_scale;
    double weight_scale = 0.0;
    Rng agg_rng;
    Bus bus;
    RunLog log;
    Matrix carried_population;  // for reuse_population

    explicit Simulation(const ExperimentConfig& resolved)
        : cfg(resolved),
          problem(problems::make_problem(cfg.problem, cfg.M, cfg.D)),
          agg_rng(derive_seed(cfg.master_seed, "aggregator")) {
        log.config = cfg;
    }

    std::size_t center_count() const { return surrogate::default_center_count(cfg.M, cfg.D); }
    std::size_t flat_len() const {
        return surrogate::flat_size(center_count(), cfg.D, cfg.M);
    }
    bool dh_mode() const { return cfg.mode != Mode::Plaintext; }
    bool noise_active() const {
        return std::any_of(pred_scale.per_column.begin(), pred_scale.per_column.end(),
                           [](double s) { return s > 0.0; });
    }

    void setup();
    void exchange_keys();
    void aggregate_weights(std::size_t round, Rng& salt_rng, RoundRecord* rec);
    RoundRecord run_round(std::size_t round);
    double archive_igd() const;
};

void Simulation::setup() {
    group = secagg::gen_group_params(cfg.group);
    element_bytes = (group.p.bit_length() + 7) / 8;

    const surrogate::TrainConfig tc0{cfg.epochs, cfg.learning_rate, 0};
    clients.resize(cfg.K);
    for (std::size_t i = 0; i < cfg.K; ++i) {
        auto& c = clients[i];
        c.id = static_cast<int>(i);
        c.data.owner = c.id;
        c.data.inputs = problems::latin_hypercube(cfg.g0, problem,
                                                  derive_seed(cfg.master_seed, "design", i));
        c.data.targets = problems::evaluate(problem, c.data.inputs);
        surrogate::TrainConfig tc = tc0;
        tc.seed = derive_seed(cfg.master_seed, "train", 0, i);
        c.model = surrogate::train_rbfn(c.data, tc);
        c.keypair = secagg::keygen(group, derive_seed(cfg.master_seed, "keys", i));
        c.keyring.owner = c.id;
    }
    log.evals_total = cfg.K * cfg.g0;

    exchange_keys();

    // Run-level mask scale: noise_factor times the per-objective range of
    // client 0's initial targets (a public run parameter).
    const double nf = cfg.resolved_noise_factor();
    pred_scale.per_column.assign(cfg.M, 0.0);
    for (std::size_t m = 0; m < cfg.M; ++m) {
        double lo = clients[0].data.targets(0, m), hi = lo;
        for (std::size_t r = 1; r < cfg.g0; ++r) {
            lo = std::min(lo, clients[0].data.targets(r, m));
            hi = std::max(hi, clients[0].data.targets(r, m));
        }
        const double range = (hi > lo) ? hi - lo : 1.0;
        pred_scale.per_column[m] = nf * range;
    }
    weight_scale = nf;
    log.mask_scale = pred_scale.per_column;

    log.notes.push_back("training updates centers, widths, and output weights");
    log.notes.push_back(std::string("warm-start=") + (cfg.warm_start ? "global-model" : "scratch"));
    log.notes.push_back(std::string("flcb-normalize=") + (cfg.resolved_normalize() ? "on" : "off"));
    log.notes.push_back("mask-prf=SHA-256 counter expansion");

    refvec_template =
        moea::simplex_lattice_refvecs(cfg.M, moea::default_layers(cfg.M));
    if (cfg.population != refvec_template.vectors.rows()) {
        // Population explicitly overridden: size the vector set accordingly.
        std::vector<moea::Layer> layers;
        unsigned H = 1;
        while (moea::lattice_count(cfg.M, H) < cfg.population) ++H;
        layers.push_back({H, 1.0});
        refvec_template = moea::simplex_lattice_refvecs(cfg.M, layers);
    }
    reference_front = problems::sample_pareto_front(problem, 10 * cfg.population);

    Rng salt_rng(derive_seed(cfg.master_seed, "salt", 0));
    aggregate_weights(0, salt_rng, nullptr);
    log.initial_igd = archive_igd();
    log.final_igd = log.initial_igd;
}

// Pairwise Diffie-Hellman routed through the server, one exchange per pair:
// each client sends and receives K-1 group elements.
void Simulation::exchange_keys() {
    const std::uint64_t pk_bytes = element_bytes + 4;
    for (std::size_t i = 0; i < cfg.K; ++i) {
        for (std::size_t j = i + 1; j < cfg.K; ++j) {
            const int ci = clients[i].id, cj = clients[j].id;
            BusMessage up_i;
            up_i.meta = meta(0, 0, MessageKind::PublicKey, ci, metrics::kServerId, pk_bytes, 1);
            up_i.group_element_hex = clients[i].keypair.public_key.to_hex();
            bus.post(std::move(up_i));
            auto fwd_i = bus.drain(metrics::kServerId).front();
            fwd_i.meta = meta(0, 0, MessageKind::PublicKey, metrics::kServerId, cj, pk_bytes, 1);
            bus.post(std::move(fwd_i));

            BusMessage up_j;
            up_j.meta = meta(0, 0, MessageKind::PublicKey, cj, metrics::kServerId, pk_bytes, 1);
            up_j.group_element_hex = clients[j].keypair.public_key.to_hex();
            bus.post(std::move(up_j));
            auto fwd_j = bus.drain(metrics::kServerId).front();
            fwd_j.meta = meta(0, 0, MessageKind::PublicKey, metrics::kServerId, ci, pk_bytes, 1);
            bus.post(std::move(fwd_j));

            const auto peer_of_j = secagg::Bigint::from_hex(bus.drain(cj).front().group_element_hex);
            const auto peer_of_i = secagg::Bigint::from_hex(bus.drain(ci).front().group_element_hex);
            const auto kij = secagg::derive_shared_key(group, clients[i].keypair.secret_exponent,
                                                       peer_of_i);
            const auto kji = secagg::derive_shared_key(group, clients[j].keypair.secret_exponent,
                                                       peer_of_j);
            if (kij != kji) throw std::runtime_error("setup: pairwise keys disagree");
            clients[i].keyring.shared[cj] = kij;
            clients[j].keyring.shared[ci] = kji;
        }
    }
}

void Simulation::aggregate_weights(std::size_t round, Rng& salt_rng, RoundRecord* rec) {
    const std::size_t L = flat_len();
    const Salt wsalt = secagg::make_salt(static_cast<std::uint32_t>(round),
                                         static_cast<std::uint32_t>(cfg.t_m + 1), salt_rng);
    issued_salts.register_salt(wsalt);
    for (auto& c : clients) {
        BusMessage m;
        m.meta = meta(round, cfg.t_m + 1, MessageKind::Salt, metrics::kServerId, c.id,
                      kSaltBytes, 0);
        m.salt = wsalt;
        bus.post(std::move(m));
    }

    const MaskScale wscale = MaskScale::uniform(weight_scale, L);
    std::vector<std::vector<double>> shadow(cfg.K);  // plaintext weights, audit only
    for (auto& c : clients) {
        const Salt received = bus.drain(c.id).front().salt;
        c.seen_salts.register_salt(received);
        shadow[c.id] = c.model.flatten();
        Matrix masked(1, L);
        std::copy(shadow[c.id].begin(), shadow[c.id].end(), masked.data().begin());
        masked += secagg::compute_mask(c.id, c.keyring, received, 1, L, wscale, cfg.K - 1);
        BusMessage m;
        m.meta = meta(round, cfg.t_m + 1, MessageKind::MaskedWeights, c.id, metrics::kServerId,
                      L * 8 + kSaltBytes, 0);
        m.masked = {std::move(masked), received, c.id};
        bus.post(std::move(m));
    }

    Matrix acc(1, L);
    for (const auto& m : bus.drain(metrics::kServerId)) {
        if (rec != nullptr && weight_scale > 0.0) {
            bool differs = false;
            for (std::size_t i = 0; i < L; ++i)
                if (m.masked.values.data()[i] != shadow[m.masked.sender][i]) {
                    differs = true;
                    break;
                }
            if (!differs) ++rec->privacy_violations;  // server saw plaintext weights
        }
        acc += m.masked.values;
    }
    acc *= 1.0 / static_cast<double>(cfg.K);
    global_model = surrogate::unflatten(acc.row(0), center_count(), cfg.D, cfg.M);
    for (auto& c : clients) {
        BusMessage m;
        m.meta = meta(round, cfg.t_m + 1, MessageKind::GlobalWeights, metrics::kServerId, c.id,
                      L * 8, 0);
        m.matrix = acc;
        bus.post(std::move(m));
    }
    for (auto& c : clients) {
        const Matrix omega = bus.drain(c.id).front().matrix;
        c.global_model = surrogate::unflatten(omega.row(0), center_count(), cfg.D, cfg.M);
    }
}

double Simulation::archive_igd() const {
    Matrix archive;
    for (const auto& c : clients) archive = archive.vcat(c.data.targets);
    const auto nd = nondominated_indices(archive);
    return metrics::igd(archive.select_rows(nd), reference_front);
}

RoundRecord Simulation::run_round(std::size_t round) {
    RoundRecord rec;
    rec.round = round;
    const std::size_t trace_start = bus.trace_size();
    const std::size_t rho_start = log.rho_samples.size();

    const int c_r = static_cast<int>(agg_rng.index(cfg.K));
    rec.aggregator = c_r;

    Rng pop_rng(derive_seed(cfg.master_seed, "population", round));
    Rng var_rng(derive_seed(cfg.master_seed, "variation", round));
    Rng salt_rng(derive_seed(cfg.master_seed, "salt", round));

    Matrix pop = (cfg.reuse_population && !carried_population.empty())
                     ? carried_population
                     : moea::random_population(cfg.population, problem.lower, problem.upper,
                                               pop_rng);
    moea::ReferenceVectorSet refvecs = refvec_template;
    const std::size_t adapt_every = static_cast<std::size_t>(
        std::ceil(0.1 * static_cast<double>(cfg.t_m)));
    const moea::VariationParams var_params{};
    const bool normalize = cfg.resolved_normalize();
    const bool noisy = dh_mode() && noise_active();

    Matrix last_candidates, last_flcb;
    for (std::size_t j = 1; j <= cfg.t_m; ++j) {
        const Matrix offspring = moea::generate_offspring(pop, problem.lower, problem.upper,
                                                          cfg.population, var_params, var_rng);
        const Matrix cands = pop.vcat(offspring);
        const std::size_t N = cands.rows();

        const Salt salt = secagg::make_salt(static_cast<std::uint32_t>(round),
                                            static_cast<std::uint32_t>(j), salt_rng);
        issued_salts.register_salt(salt);
        for (auto& c : clients) {
            BusMessage m;
            m.meta = meta(round, j, MessageKind::Candidates, metrics::kServerId, c.id,
                          N * cfg.D * 8 + kSaltBytes, 0);
            m.matrix = cands;
            m.salt = salt;
            bus.post(std::move(m));
        }

        // Client side: receive the batch, check the salt, predict, and (in dh
        // mode, unless aggregator) upload the masked prediction.
        std::vector<Matrix> preds(cfg.K);
        for (std::size_t i = 0; i < cfg.K; ++i) {
            auto inbox = bus.drain(clients[i].id);
            const BusMessage& received = inbox.front();
            clients[i].seen_salts.register_salt(received.salt);
            preds[i] = surrogate::predict(clients[i].model, received.matrix);
            const bool uploads = dh_mode() ? static_cast<int>(i) != c_r : true;
            if (!uploads) continue;
            Matrix payload = preds[i];
            if (dh_mode()) {
                payload += secagg::compute_mask(clients[i].id, clients[i].keyring, received.salt,
                                                N, cfg.M, pred_scale, cfg.K - 1);
            }
            BusMessage m;
            m.meta = meta(round, j, MessageKind::MaskedPredictions, clients[i].id,
                          metrics::kServerId, N * cfg.M * 8 + kSaltBytes + 4, 1);
            m.masked = {std::move(payload), received.salt, clients[i].id};
            bus.post(std::move(m));
        }

        // Server side: collect uploads, predict with the global model, and in
        // dh mode forward the individual masked matrices to the aggregator.
        auto uploads = bus.drain(metrics::kServerId);
        const Matrix server_pred = surrogate::predict(*global_model, cands);
        if (noisy) {
            for (const auto& m : uploads) {
                const Matrix& plain = preds[m.masked.sender];
                bool differs = false;
                for (std::size_t e = 0; e < plain.size(); ++e)
                    if (m.masked.values.data()[e] != plain.data()[e]) {
                        differs = true;
                        break;
                    }
                if (!differs) ++rec.privacy_violations;  // plaintext reached the server
                std::vector<double> col_true(N), col_masked(N);
                for (std::size_t col = 0; col < cfg.M; ++col) {
                    for (std::size_t r2 = 0; r2 < N; ++r2) {
                        col_true[r2] = plain(r2, col);
                        col_masked[r2] = m.masked.values(r2, col);
                    }
                    const auto rc = metrics::rank_correlation(col_true, col_masked);
                    if (!rc.degenerate) log.rho_samples.push_back(rc.rho);
                }
            }
        }

        acq::AcquisitionInputs inputs;
        inputs.t = cfg.t;
        inputs.server_prediction = &server_pred;
        Matrix exact_sum;
        Matrix flcb_for_selection;
        std::vector<secagg::MaskedObjectiveMatrix> bundle_storage;

        if (dh_mode()) {
            BusMessage fwd;
            fwd.meta = meta(round, j, MessageKind::ForwardBundle, metrics::kServerId, c_r,
                            (cfg.K - 1) * (N * cfg.M * 8 + 4) + N * cfg.M * 8 + kSaltBytes,
                            cfg.K - 1);
            for (auto& m : uploads) fwd.bundle.push_back(std::move(m.masked));
            fwd.server_prediction = server_pred;
            fwd.salt = salt;
            bus.post(std::move(fwd));

            // Aggregator side: exact sum via unmasking; sigma sees the masked
            // matrices of the others plus the aggregator's own plaintext.
            BusMessage received = std::move(bus.drain(c_r).front());
            bundle_storage = std::move(received.bundle);
            const Matrix own_mask = secagg::compute_mask(c_r, clients[c_r].keyring,
                                                         received.salt, N, cfg.M, pred_scale,
                                                         cfg.K - 1);
            exact_sum = secagg::unmask_aggregate(bundle_storage, preds[c_r], own_mask, c_r,
                                                 received.salt);
            std::map<int, const Matrix*> by_sender;
            for (const auto& m : bundle_storage) by_sender[m.sender] = &m.values;
            for (std::size_t i = 0; i < cfg.K; ++i)
                inputs.per_source.push_back(static_cast<int>(i) == c_r
                                                ? &preds[i]
                                                : by_sender.at(static_cast<int>(i)));
            inputs.exact_client_sum = &exact_sum;
            const acq::AcquisitionOutput out = acq::compute_flcb(inputs, normalize);

            BusMessage reply;
            reply.meta = meta(round, j, MessageKind::FlcbValues, c_r, metrics::kServerId,
                              N * cfg.M * 8, 0);
            reply.matrix = out.flcb;
            bus.post(std::move(reply));
            flcb_for_selection = bus.drain(metrics::kServerId).front().matrix;
        } else {
            // Plaintext baseline: the server aggregates and scores itself.
            exact_sum = Matrix(N, cfg.M);
            for (const auto& m : uploads) exact_sum += m.masked.values;
            for (const auto& m : uploads) inputs.per_source.push_back(&m.masked.values);
            inputs.exact_client_sum = &exact_sum;
            const acq::AcquisitionOutput out = acq::compute_flcb(inputs, normalize);
            flcb_for_selection = out.flcb;
            if (j == cfg.t_m) {
                // Ship the final scores to the selected client for query
                // selection.
                BusMessage m;
                m.meta = meta(round, j, MessageKind::FlcbValues, metrics::kServerId, c_r,
                              N * cfg.M * 8, 0);
                m.matrix = flcb_for_selection;
                bus.post(std::move(m));
            }
        }

        moea::Population selected =
            moea::apd_select({cands, flcb_for_selection}, refvecs,
                             static_cast<double>(j) / static_cast<double>(cfg.t_m), cfg.alpha);
        if (selected.decisions.rows() < 2) {
            // Degenerate landscape collapsed everything into one subregion.
            std::vector<std::size_t> pad{0, 1};
            selected.decisions = selected.decisions.vcat(cands.select_rows(pad));
            selected.fitness = selected.fitness.vcat(flcb_for_selection.select_rows(pad));
        }
        if (adapt_every > 0 && j % adapt_every == 0) {
            std::vector<double> ranges(cfg.M, 0.0);
            for (std::size_t m = 0; m < cfg.M; ++m) {
                double lo = selected.fitness(0, m), hi = lo;
                for (std::size_t r2 = 1; r2 < selected.fitness.rows(); ++r2) {
                    lo = std::min(lo, selected.fitness(r2, m));
                    hi = std::max(hi, selected.fitness(r2, m));
                }
                ranges[m] = hi - lo;
            }
            refvecs = moea::adapt_refvecs(refvecs, ranges);
        }
        rec.selection_hashes.push_back(hash_matrix(selected.decisions, selected.fitness));
        pop = std::move(selected.decisions);

        if (j == cfg.t_m) {
            last_candidates = cands;
            last_flcb = dh_mode() ? flcb_for_selection
                                  : bus.drain(c_r).front().matrix;  // as received by c_r
        }
    }
    carried_population = pop;

    // Query selection, true evaluation and dataset growth happen on c_r only.
    rec.query_points = select_query_points(last_candidates, last_flcb, cfg.mu,
                                           clients[c_r].data.inputs,
                                           derive_seed(cfg.master_seed, "kmeans-query", round));
    const Matrix query_values = problems::evaluate(problem, rec.query_points);
    clients[c_r].data.append(rec.query_points, query_values);
    log.evals_total += cfg.mu;
    {
        BusMessage m;
        m.meta = meta(round, cfg.t_m, MessageKind::QueryResult, c_r, metrics::kServerId, 8, 0);
        m.count = cfg.mu;
        bus.post(std::move(m));
        bus.drain(metrics::kServerId);  // completion notice, count only
    }

    for (std::size_t i = 0; i < cfg.K; ++i) {
        surrogate::TrainConfig tc{cfg.epochs, cfg.learning_rate,
                                  derive_seed(cfg.master_seed, "train", round, i)};
        const auto warm = cfg.warm_start ? clients[i].global_model : std::nullopt;
        clients[i].model = surrogate::train_rbfn(clients[i].data, tc, warm);
    }
    aggregate_weights(round, salt_rng, &rec);

    // Trace predicates for the honest-but-curious model.
    const auto& trace = bus.trace();
    for (std::size_t idx = trace_start; idx < trace.size(); ++idx) {
        const auto& m = trace[idx];
        switch (m.kind) {
            case MessageKind::MaskedPredictions:
            case MessageKind::MaskedWeights:
                if (m.receiver != metrics::kServerId) ++rec.privacy_violations;
                break;
            case MessageKind::ForwardBundle:
                if (m.receiver != c_r) ++rec.privacy_violations;
                break;
            case MessageKind::FlcbValues:
                if (m.sender != c_r && m.receiver != c_r) ++rec.privacy_violations;
                break;
            case MessageKind::QueryResult:
                // Carries a count only; any payload sized for decision rows
                // would leak the selected points.
                if (m.byte_size != kHeaderBytes + 8) ++rec.privacy_violations;
                break;
            default: break;
        }
    }

    rec.evals_total = log.evals_total;
    rec.igd = archive_igd();
    for (std::size_t idx = trace_start; idx < trace.size(); ++idx) {
        rec.bytes_total += trace[idx].byte_size;
        rec.bytes_by_kind[metrics::to_string(trace[idx].kind)] += trace[idx].byte_size;
    }
    rec.rho_count = log.rho_samples.size() - rho_start;
    if (rec.rho_count > 0) {
        double s = 0.0;
        for (std::size_t i = rho_start; i < log.rho_samples.size(); ++i)
            s += std::fabs(log.rho_samples[i]);
        rec.rho_mean_abs = s / static_cast<double>(rec.rho_count);
    }
    return rec;
}

}  // namespace

RunLog run_experiment(const ExperimentConfig& config) {
    const ExperimentConfig cfg = resolve_config(config);
    Simulation sim(cfg);
    sim.setup();
    const std::size_t n_rounds = cfg.rounds();
    sim.log.rounds.reserve(n_rounds);
    for (std::size_t r = 1; r <= n_rounds; ++r) {
        sim.log.rounds.push_back(sim.run_round(r));
        sim.log.final_igd = sim.log.rounds.back().igd;
    }
    for (const auto& c : sim.clients)
        sim.log.archive_objectives = sim.log.archive_objectives.vcat(c.data.targets);
    sim.log.trace = sim.bus.trace();
    return sim.log;
}

// ---------------------------------------------------------------------------
// RunLog serialization
// ---------------------------------------------------------------------------

namespace {

void print_double(std::ostringstream& os, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
}

}  // namespace

std::string RunLog::canonical_text() const {
    std::ostringstream os;
    os << "problem=" << problems::to_string(config.problem) << " M=" << config.M
       << " D=" << config.D << " K=" << config.K << " Np=" << config.population
       << " tm=" << config.t_m << " mu=" << config.mu << " g0=" << config.g0
       << " budget=" << config.budget << " mode=" << to_string(config.mode)
       << " nf=";
    print_double(os, config.resolved_noise_factor());
    os << " t=";
    print_double(os, config.t);
    os << " normalize=" << (config.resolved_normalize() ? 1 : 0)
       << " group=" << secagg::to_string(config.group) << " seed=" << config.master_seed
       << " hash=" << hash_name << "\n";
    os << "scale=";
    for (double s : mask_scale) {
        print_double(os, s);
        os << ' ';
    }
    os << "\ninitial_igd=";
    print_double(os, initial_igd);
    os << " final_igd=";
    print_double(os, final_igd);
    os << " evals=" << evals_total << "\n";
    for (const auto& r : rounds) {
        os << "round " << r.round << " agg=" << r.aggregator << " evals=" << r.evals_total
           << " igd=";
        print_double(os, r.igd);
        os << " bytes=" << r.bytes_total << " rho_mean=";
        print_double(os, r.rho_mean_abs);
        os << " rho_n=" << r.rho_count << " violations=" << r.privacy_violations << "\nsel=";
        for (auto h : r.selection_hashes) os << h << ' ';
        os << "\nXq=";
        for (std::size_t i = 0; i < r.query_points.size(); ++i) {
            print_double(os, r.query_points.data()[i]);
            os << ' ';
        }
        os << "\n";
    }
    os << metrics::trace_csv(trace);
    os << "rho=";
    for (double v : rho_samples) {
        print_double(os, v);
        os << ' ';
    }
    os << "\n";
    for (const auto& n : notes) os << "note: " << n << "\n";
    return os.str();
}

std::vector<metrics::RoundMetricsRow> RunLog::metric_rows(std::size_t run_index) const {
    std::vector<metrics::RoundMetricsRow> rows;
    rows.reserve(rounds.size());
    for (const auto& r : rounds)
        rows.push_back({run_index, r.round, r.evals_total, r.igd, r.rho_mean_abs, r.bytes_total});
    return rows;
}

}  // namespace fedea::fed
