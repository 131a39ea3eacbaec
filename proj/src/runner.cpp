#include "fedea/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fedea/metrics.hpp"

namespace fedea::runner {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "off" || v == "0" || v == "no") return false;
    throw std::invalid_argument("config: invalid boolean for key '" + key + "': " + v);
}

std::size_t parse_size(const std::string& key, const std::string& v) {
    try {
        return static_cast<std::size_t>(std::stoull(v));
    } catch (const std::exception&) {
        throw std::invalid_argument("config: invalid integer for key '" + key + "': " + v);
    }
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        return std::stod(v);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: invalid number for key '" + key + "': " + v);
    }
}

const std::vector<std::string> kKnownKeys = {
    "problem", "objectives", "dims", "clients", "mode", "noise-factor", "t",
    "tm", "mu", "budget", "seed", "runs", "out", "group", "epochs", "lr",
    "g0", "np", "normalize", "warm-start", "reuse-population", "parallel",
};

}  // namespace

MatrixSpec parse_config(const std::optional<std::string>& file_text,
                        const std::map<std::string, std::string>& overrides) {
    std::map<std::string, std::string> kv;
    if (file_text) {
        std::stringstream ss(*file_text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(ss, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                            " is not 'key = value'");
            kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
        }
    }
    for (const auto& [k, v] : overrides) kv[k] = v;

    for (const auto& [k, v] : kv)
        if (std::find(kKnownKeys.begin(), kKnownKeys.end(), k) == kKnownKeys.end())
            throw std::invalid_argument("config: unknown key '" + k + "'");
    if (kv.find("problem") == kv.end())
        throw std::invalid_argument("config: missing required keys: problem");

    MatrixSpec spec;
    spec.problems = split_list(kv["problem"]);
    if (spec.problems.empty())
        throw std::invalid_argument("config: key 'problem' has no values");
    for (const auto& p : spec.problems) problems::parse_problem_name(p);  // validate

    if (auto it = kv.find("objectives"); it != kv.end()) {
        for (const auto& s : split_list(it->second))
            spec.objectives.push_back(parse_size("objectives", s));
    }
    if (spec.objectives.empty()) spec.objectives.push_back(3);

    if (auto it = kv.find("mode"); it != kv.end()) {
        spec.modes = split_list(it->second);
    }
    if (spec.modes.empty()) spec.modes.push_back("dh");
    for (const auto& m : spec.modes) fed::parse_mode(m);  // validate

    auto& base = spec.base;
    if (auto it = kv.find("dims"); it != kv.end()) base.D = parse_size("dims", it->second);
    if (auto it = kv.find("clients"); it != kv.end()) base.K = parse_size("clients", it->second);
    if (auto it = kv.find("noise-factor"); it != kv.end())
        base.noise_factor = parse_double("noise-factor", it->second);
    if (auto it = kv.find("t"); it != kv.end()) base.t = parse_double("t", it->second);
    if (auto it = kv.find("tm"); it != kv.end()) base.t_m = parse_size("tm", it->second);
    if (auto it = kv.find("mu"); it != kv.end()) base.mu = parse_size("mu", it->second);
    if (auto it = kv.find("budget"); it != kv.end())
        base.budget = parse_size("budget", it->second);
    if (auto it = kv.find("seed"); it != kv.end())
        base.master_seed = parse_size("seed", it->second);
    if (auto it = kv.find("group"); it != kv.end())
        base.group = secagg::parse_group_preset(it->second);
    if (auto it = kv.find("epochs"); it != kv.end())
        base.epochs = parse_size("epochs", it->second);
    if (auto it = kv.find("lr"); it != kv.end())
        base.learning_rate = parse_double("lr", it->second);
    if (auto it = kv.find("g0"); it != kv.end()) base.g0 = parse_size("g0", it->second);
    if (auto it = kv.find("np"); it != kv.end()) base.population = parse_size("np", it->second);
    if (auto it = kv.find("normalize"); it != kv.end())
        base.normalize = parse_bool("normalize", it->second);
    if (auto it = kv.find("warm-start"); it != kv.end())
        base.warm_start = parse_bool("warm-start", it->second);
    if (auto it = kv.find("reuse-population"); it != kv.end())
        base.reuse_population = parse_bool("reuse-population", it->second);
    if (auto it = kv.find("runs"); it != kv.end()) spec.runs = parse_size("runs", it->second);
    if (auto it = kv.find("out"); it != kv.end()) spec.out_dir = it->second;
    if (auto it = kv.find("parallel"); it != kv.end())
        spec.parallel = std::max<std::size_t>(1, parse_size("parallel", it->second));
    if (spec.runs == 0) throw std::invalid_argument("config: runs must be at least 1");

    // Validate each cell eagerly so errors surface before any run starts.
    for (const auto& p : spec.problems)
        for (std::size_t m : spec.objectives)
            for (const auto& mode : spec.modes) {
                fed::ExperimentConfig c = base;
                c.problem = problems::parse_problem_name(p);
                c.M = m;
                c.mode = fed::parse_mode(mode);
                fed::resolve_config(c);
            }
    return spec;
}

std::string cell_name(const std::string& problem, std::size_t M, const std::string& mode) {
    std::string p = problem;
    for (auto& ch : p) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return p + "_m" + std::to_string(M) + "_" + mode;
}

std::string resolved_config_text(const fed::ExperimentConfig& config, std::size_t runs) {
    const auto c = fed::resolve_config(config);
    std::ostringstream os;
    os << "# fedea " << kVersion << "\n"
       << "problem = " << problems::to_string(c.problem) << "\n"
       << "objectives = " << c.M << "\n"
       << "dims = " << c.D << "\n"
       << "clients = " << c.K << "\n"
       << "mode = " << fed::to_string(c.mode) << "\n"
       << "noise-factor = " << c.resolved_noise_factor() << "\n"
       << "t = " << c.t << "\n"
       << "tm = " << c.t_m << "\n"
       << "mu = " << c.mu << "\n"
       << "budget = " << c.budget << "\n"
       << "g0 = " << c.g0 << "\n"
       << "np = " << c.population << "\n"
       << "epochs = " << c.epochs << "\n"
       << "lr = " << c.learning_rate << "\n"
       << "normalize = " << (c.resolved_normalize() ? "on" : "off") << "\n"
       << "warm-start = " << (c.warm_start ? "true" : "false") << "\n"
       << "reuse-population = " << (c.reuse_population ? "true" : "false") << "\n"
       << "group = " << secagg::to_string(c.group) << "\n"
       << "seed = " << c.master_seed << "\n"
       << "runs = " << runs << "\n";
    return os.str();
}

std::uint64_t config_hash(const fed::ExperimentConfig& config, std::size_t runs) {
    const std::string text = resolved_config_text(config, runs);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char ch : text) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t cell_seed(std::uint64_t master, const std::string& problem, std::size_t M,
                        const std::string& mode, std::size_t rep) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const std::string tag = cell_name(problem, M, mode);
    for (char ch : tag) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return derive_seed(master, "cell", h, rep);
}

// ---------------------------------------------------------------------------
// Matrix execution
// ---------------------------------------------------------------------------

namespace {

struct Cell {
    std::string problem;
    std::size_t M = 3;
    std::string mode;
    fed::ExperimentConfig config;  // resolved base for this cell (seed = master)
    fs::path dir;
    std::vector<double> finals;    // final IGD per repetition
    std::vector<std::uint64_t> seeds;
    bool ok = true;
    bool skipped = false;
    std::string error;
};

struct FinalsRow {
    std::size_t rep;
    std::uint64_t seed;
    double final_igd;
};

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << content;
}

std::optional<std::vector<FinalsRow>> read_finals(const fs::path& path) {
    std::ifstream f(path);
    if (!f) return std::nullopt;
    std::string line;
    if (!std::getline(f, line)) return std::nullopt;  // header
    std::vector<FinalsRow> rows;
    while (std::getline(f, line)) {
        if (trim(line).empty()) continue;
        FinalsRow r{};
        std::stringstream ss(line);
        std::string tok;
        if (!std::getline(ss, tok, ',')) return std::nullopt;
        r.rep = std::stoull(tok);
        if (!std::getline(ss, tok, ',')) return std::nullopt;
        r.seed = std::stoull(tok);
        if (!std::getline(ss, tok, ',')) return std::nullopt;
        r.final_igd = std::stod(tok);
        rows.push_back(r);
    }
    return rows;
}

struct CellStats {
    std::string problem;
    std::size_t M = 0;
    std::string mode;
    std::vector<double> finals;
};

void print_summary_table(const std::vector<CellStats>& cells, const std::string& baseline_mode,
                         std::ostream& os, std::string* csv_out) {
    std::ostringstream csv;
    csv << "problem,M,mode,n,igd_median,igd_mean,igd_std,mark\n";
    os << std::left << std::setw(8) << "problem" << std::setw(4) << "M" << std::setw(11) << "mode"
       << std::setw(4) << "n" << std::setw(13) << "median" << std::setw(13) << "mean"
       << std::setw(13) << "std" << "mark\n";
    for (const auto& c : cells) {
        char mark = ' ';
        if (!baseline_mode.empty() && c.mode != baseline_mode) {
            for (const auto& b : cells) {
                if (b.problem == c.problem && b.M == c.M && b.mode == baseline_mode) {
                    mark = significance_mark(c.finals, b.finals);
                    break;
                }
            }
        }
        const double med = vec_median(c.finals);
        const double mean = vec_mean(c.finals);
        const double sd = vec_stddev(c.finals);
        os << std::left << std::setw(8) << c.problem << std::setw(4) << c.M << std::setw(11)
           << c.mode << std::setw(4) << c.finals.size();
        os << std::scientific << std::setprecision(3) << std::setw(13) << med << std::setw(13)
           << mean << std::setw(13) << sd;
        os.unsetf(std::ios::scientific);
        os << (mark == ' ' ? "" : std::string(1, mark)) << "\n";
        csv << c.problem << ',' << c.M << ',' << c.mode << ',' << c.finals.size() << ','
            << std::scientific << std::setprecision(6) << med << ',' << mean << ',' << sd << ','
            << (mark == ' ' ? "" : std::string(1, mark)) << "\n";
        csv.unsetf(std::ios::scientific);
    }
    if (csv_out != nullptr) *csv_out = csv.str();
}

}  // namespace

int run_matrix(const MatrixSpec& spec, std::ostream& os) {
    const std::string out_dir = spec.out_dir.empty() ? "fedea-runs" : spec.out_dir;
    fs::create_directories(out_dir);

    std::vector<Cell> cells;
    for (const auto& p : spec.problems)
        for (std::size_t m : spec.objectives)
            for (const auto& mode : spec.modes) {
                Cell cell;
                cell.problem = problems::to_string(problems::parse_problem_name(p));
                cell.M = m;
                cell.mode = mode;
                cell.config = spec.base;
                cell.config.problem = problems::parse_problem_name(p);
                cell.config.M = m;
                cell.config.mode = fed::parse_mode(mode);
                cell.dir = fs::path(out_dir) / cell_name(p, m, mode);
                cell.finals.assign(spec.runs, 0.0);
                cell.seeds.resize(spec.runs);
                for (std::size_t rep = 0; rep < spec.runs; ++rep)
                    cell.seeds[rep] = cell_seed(spec.base.master_seed, p, m, mode, rep);
                cells.push_back(std::move(cell));
            }

    // Resumability: a cell whose DONE marker matches the config hash is
    // loaded from its finals.csv instead of re-run.
    std::vector<std::pair<std::size_t, std::size_t>> tasks;  // (cell, rep)
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        auto& cell = cells[ci];
        const auto hash = std::to_string(config_hash(cell.config, spec.runs));
        const fs::path done = cell.dir / "DONE";
        if (fs::exists(done)) {
            std::ifstream f(done);
            std::string existing;
            f >> existing;
            if (existing == hash) {
                if (auto finals = read_finals(cell.dir / "finals.csv");
                    finals && finals->size() == spec.runs) {
                    for (const auto& row : *finals) cell.finals[row.rep] = row.final_igd;
                    cell.skipped = true;
                    os << "cell " << cell.dir.filename().string() << ": up to date, skipping\n";
                    continue;
                }
            }
            fs::remove(done);
        }
        fs::create_directories(cell.dir);
        write_file(cell.dir / "config.resolved", resolved_config_text(cell.config, spec.runs));
        for (std::size_t rep = 0; rep < spec.runs; ++rep) tasks.emplace_back(ci, rep);
    }

    std::mutex mtx;
    std::size_t next_task = 0;
    auto worker = [&]() {
        for (;;) {
            std::size_t task_idx;
            {
                std::lock_guard lock(mtx);
                if (next_task >= tasks.size()) return;
                task_idx = next_task++;
            }
            const auto [ci, rep] = tasks[task_idx];
            auto& cell = cells[ci];
            try {
                fed::ExperimentConfig cfg = cell.config;
                cfg.master_seed = cell.seeds[rep];
                const fed::RunLog log = fed::run_experiment(cfg);
                write_file(cell.dir / ("run" + std::to_string(rep) + ".rounds.csv"),
                           metrics::round_metrics_csv(log.metric_rows(rep)));
                write_file(cell.dir / ("run" + std::to_string(rep) + ".trace.csv"),
                           metrics::trace_csv(log.trace));
                std::lock_guard lock(mtx);
                cell.finals[rep] = log.final_igd;
            } catch (const std::exception& e) {
                std::lock_guard lock(mtx);
                cell.ok = false;
                cell.error = e.what();
            }
        }
    };
    const std::size_t n_workers = std::min<std::size_t>(std::max<std::size_t>(spec.parallel, 1),
                                                        std::max<std::size_t>(tasks.size(), 1));
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    bool any_failed = false;
    std::vector<CellStats> stats;
    for (auto& cell : cells) {
        if (!cell.ok) {
            any_failed = true;
            os << "cell " << cell.dir.filename().string() << ": FAILED: " << cell.error << "\n";
            continue;
        }
        if (!cell.skipped) {
            std::ostringstream finals;
            finals << "rep,seed,final_igd\n";
            finals.precision(17);
            for (std::size_t rep = 0; rep < spec.runs; ++rep)
                finals << rep << ',' << cell.seeds[rep] << ',' << cell.finals[rep] << "\n";
            write_file(cell.dir / "finals.csv", finals.str());
            write_file(cell.dir / "DONE", std::to_string(config_hash(cell.config, spec.runs)));
        }
        stats.push_back({cell.problem, cell.M, cell.mode, cell.finals});
    }

    std::string csv;
    print_summary_table(stats, spec.modes.size() > 1 ? spec.modes.front() : "", os, &csv);
    write_file(fs::path(out_dir) / "summary.csv", csv);
    return any_failed ? 1 : 0;
}

int report(const std::string& out_dir, const std::string& baseline_mode, std::ostream& os) {
    std::vector<CellStats> stats;
    if (!fs::is_directory(out_dir)) {
        os << "report: no such directory: " << out_dir << "\n";
        return 2;
    }
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(out_dir))
        if (entry.is_directory() && fs::exists(entry.path() / "finals.csv"))
            dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());
    for (const auto& dir : dirs) {
        const auto finals = read_finals(dir / "finals.csv");
        if (!finals) continue;
        // Cell identity from the frozen config copy.
        std::ifstream cf(dir / "config.resolved");
        std::string line, problem, mode;
        std::size_t M = 0;
        while (std::getline(cf, line)) {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            const auto key = trim(line.substr(0, eq));
            const auto val = trim(line.substr(eq + 1));
            if (key == "problem") problem = val;
            if (key == "objectives") M = std::stoull(val);
            if (key == "mode") mode = val;
        }
        if (problem.empty()) continue;
        CellStats cs{problem, M, mode, {}};
        for (const auto& r : *finals) cs.finals.push_back(r.final_igd);
        stats.push_back(std::move(cs));
    }
    if (stats.empty()) {
        os << "report: no completed cells under " << out_dir << "\n";
        return 1;
    }
    print_summary_table(stats, baseline_mode, os, nullptr);
    return 0;
}

// ---------------------------------------------------------------------------
// Wilcoxon rank-sum
// ---------------------------------------------------------------------------

double wilcoxon_ranksum_z(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n1 = a.size(), n2 = b.size();
    if (n1 == 0 || n2 == 0) return 0.0;
    std::vector<double> all;
    all.reserve(n1 + n2);
    all.insert(all.end(), a.begin(), a.end());
    all.insert(all.end(), b.begin(), b.end());
    std::vector<std::size_t> order(all.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return all[x] < all[y]; });
    std::vector<double> ranks(all.size());
    double tie_term = 0.0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j + 1 < all.size() && all[order[j + 1]] == all[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    double w = 0.0;
    for (std::size_t k = 0; k < n1; ++k) w += ranks[k];
    const double n = static_cast<double>(n1 + n2);
    const double mean = static_cast<double>(n1) * (n + 1.0) / 2.0;
    const double var = static_cast<double>(n1) * static_cast<double>(n2) / 12.0 *
                       ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (var <= 0.0) return 0.0;
    return (w - mean) / std::sqrt(var);
}

char significance_mark(const std::vector<double>& cell, const std::vector<double>& baseline) {
    const double z = wilcoxon_ranksum_z(cell, baseline);
    if (std::fabs(z) < 1.959963985) return '=';
    return vec_median(cell) < vec_median(baseline) ? '+' : '-';
}

// ---------------------------------------------------------------------------
// secagg self-test
// ---------------------------------------------------------------------------

namespace {

secagg::SharedKey random_key(Rng& rng) {
    secagg::SharedKey key{};
    for (std::size_t i = 0; i < key.size(); i += 8) {
        const std::uint64_t w = rng.next_u64();
        for (std::size_t b = 0; b < 8; ++b)
            key[i + b] = static_cast<std::uint8_t>(w >> (8 * b));
    }
    return key;
}

bool cancellation_trials(std::ostream& os) {
    Rng rng(20240 /* fixed self-test seed */);
    const std::size_t trials_per_k = 50;
    double worst_ratio = 0.0;
    for (std::size_t K : {2u, 3u, 4u, 8u}) {
        for (std::size_t trial = 0; trial < trials_per_k; ++trial) {
            const std::size_t rows = 1 + rng.index(230);
            const std::size_t cols = 1 + rng.index(10);
            const double scale = rng.uniform(0.0, 1e6);
            std::map<std::pair<int, int>, secagg::SharedKey> pair_keys;
            std::vector<secagg::Keyring> rings(K);
            for (std::size_t i = 0; i < K; ++i) rings[i].owner = static_cast<int>(i);
            for (std::size_t i = 0; i < K; ++i)
                for (std::size_t j = i + 1; j < K; ++j) {
                    const auto key = random_key(rng);
                    rings[i].shared[static_cast<int>(j)] = key;
                    rings[j].shared[static_cast<int>(i)] = key;
                }
            Rng salt_rng(rng.next_u64());
            const auto salt = secagg::make_salt(1, static_cast<std::uint32_t>(trial), salt_rng);
            const auto scale_vec = secagg::MaskScale::uniform(scale, cols);
            Matrix sum(rows, cols);
            for (std::size_t i = 0; i < K; ++i)
                sum += secagg::compute_mask(static_cast<int>(i), rings[i], salt, rows, cols,
                                            scale_vec, K - 1);
            const double bound =
                static_cast<double>(K) * std::numeric_limits<double>::epsilon() * scale * 16.0;
            for (double v : sum.data()) {
                if (std::fabs(v) > bound) {
                    os << "[FAIL] mask cancellation: residual " << std::fabs(v) << " > bound "
                       << bound << " (K=" << K << ")\n";
                    return false;
                }
                if (bound > 0.0) worst_ratio = std::max(worst_ratio, std::fabs(v) / bound);
            }
        }
    }
    os << "[PASS] mask cancellation: 200 trials, worst residual at " << worst_ratio
       << " of bound\n";
    return true;
}

std::string vectors_text() {
    std::ostringstream os;
    os << "# fedea dh test vectors\n";
    os << "# keypair <group> seed=<dec> secret=<hex> public=<hex>\n";
    os << "# shared <group> a=<hex> b=<hex> key=<hex sha256>\n";
    const auto group = secagg::gen_group_params(secagg::GroupPreset::Test64);
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const auto kp = secagg::keygen(group, seed);
        os << "keypair test-64bit seed=" << seed << " secret=" << kp.secret_exponent.to_hex()
           << " public=" << kp.public_key.to_hex() << "\n";
    }
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto ka = secagg::keygen(group, 2 * seed);
        const auto kb = secagg::keygen(group, 2 * seed + 1);
        const auto shared =
            secagg::derive_shared_key(group, ka.secret_exponent, kb.public_key);
        os << "shared test-64bit a=" << ka.secret_exponent.to_hex()
           << " b=" << kb.secret_exponent.to_hex() << " key=" << secagg::to_hex(shared) << "\n";
    }
    return os.str();
}

bool check_vectors(const std::string& text, std::ostream& os) {
    std::stringstream ss(text);
    std::string line;
    std::size_t checked = 0;
    const auto group = secagg::gen_group_params(secagg::GroupPreset::Test64);
    while (std::getline(ss, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ls(line);
        std::string kind, grp;
        ls >> kind >> grp;
        if (grp != "test-64bit") {
            os << "[FAIL] vectors: unsupported group " << grp << "\n";
            return false;
        }
        std::map<std::string, std::string> fields;
        std::string tok;
        while (ls >> tok) {
            const auto eq = tok.find('=');
            if (eq != std::string::npos) fields[tok.substr(0, eq)] = tok.substr(eq + 1);
        }
        if (kind == "keypair") {
            const auto kp = secagg::keygen(group, std::stoull(fields["seed"]));
            if (kp.secret_exponent.to_hex() != fields["secret"] ||
                kp.public_key.to_hex() != fields["public"]) {
                os << "[FAIL] vectors: keypair mismatch for seed " << fields["seed"] << "\n";
                return false;
            }
        } else if (kind == "shared") {
            const auto a = secagg::Bigint::from_hex(fields["a"]);
            const auto b = secagg::Bigint::from_hex(fields["b"]);
            const auto pub_b = secagg::keypair_from_secret(group, b).public_key;
            const auto key = secagg::derive_shared_key(group, a, pub_b);
            if (secagg::to_hex(key) != fields["key"]) {
                os << "[FAIL] vectors: shared-key mismatch\n";
                return false;
            }
        } else {
            os << "[FAIL] vectors: unknown record '" << kind << "'\n";
            return false;
        }
        ++checked;
    }
    os << "[PASS] vectors file: " << checked << " records verified\n";
    return checked > 0;
}

}  // namespace

int secagg_selftest(const std::optional<std::string>& emit_path,
                    const std::optional<std::string>& check_path, std::ostream& os) {
    bool ok = true;

    // Fixed demo-group vectors (full-group generator 5 over p = 23).
    {
        secagg::GroupParams demo;
        demo.p = secagg::Bigint(23);
        demo.q = secagg::Bigint(11);
        demo.g = secagg::Bigint(5);
        const auto ka = secagg::keypair_from_secret(demo, secagg::Bigint(6));
        const auto kb = secagg::keypair_from_secret(demo, secagg::Bigint(15));
        const bool pub_ok = ka.public_key == secagg::Bigint(8) &&
                            kb.public_key == secagg::Bigint(19);
        const auto s1 = secagg::mod_exp(kb.public_key, secagg::Bigint(6), demo.p);
        const auto s2 = secagg::mod_exp(ka.public_key, secagg::Bigint(15), demo.p);
        const bool shared_ok = s1 == secagg::Bigint(2) && s2 == secagg::Bigint(2);
        os << (pub_ok && shared_ok ? "[PASS]" : "[FAIL]")
           << " demo group vectors (p=23, g=5, secrets 6/15 -> publics 8/19, shared 2)\n";
        ok = ok && pub_ok && shared_ok;
    }

    // Group invariants for every preset.
    for (auto preset : {secagg::GroupPreset::Test64, secagg::GroupPreset::Rfc2048,
                        secagg::GroupPreset::Rfc3072}) {
        const auto gp = secagg::gen_group_params(preset);
        const bool valid = secagg::validate_group(gp);
        os << (valid ? "[PASS]" : "[FAIL]") << " group invariants: " << secagg::to_string(preset)
           << " (" << gp.p.bit_length() << "-bit prime)\n";
        ok = ok && valid;
    }

    // Symmetric key derivation on the test group.
    {
        const auto group = secagg::gen_group_params(secagg::GroupPreset::Test64);
        bool sym = true;
        for (std::uint64_t s = 0; s < 50; ++s) {
            const auto a = secagg::keygen(group, 1000 + s);
            const auto b = secagg::keygen(group, 2000 + s);
            const auto kab = secagg::derive_shared_key(group, a.secret_exponent, b.public_key);
            const auto kba = secagg::derive_shared_key(group, b.secret_exponent, a.public_key);
            if (kab != kba) sym = false;
        }
        os << (sym ? "[PASS]" : "[FAIL]") << " symmetric key derivation (50 random pairs)\n";
        ok = ok && sym;
    }

    ok = cancellation_trials(os) && ok;

    if (emit_path) {
        std::ofstream f(*emit_path);
        if (!f) {
            os << "[FAIL] cannot write vectors to " << *emit_path << "\n";
            return 1;
        }
        f << vectors_text();
        os << "[PASS] vectors written to " << *emit_path << "\n";
    }
    if (check_path) {
        std::ifstream f(*check_path);
        if (!f) {
            os << "[FAIL] cannot read vectors from " << *check_path << "\n";
            return 1;
        }
        std::ostringstream buf;
        buf << f.rdbuf();
        ok = check_vectors(buf.str(), os) && ok;
    }
    return ok ? 0 : 1;
}

}  // namespace fedea::runner
