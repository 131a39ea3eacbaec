#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fedea/metrics.hpp"
#include "oracles.hpp"

using namespace fedea;
using namespace fedea::metrics;

namespace {

Matrix random_matrix(std::size_t n, std::size_t m, std::uint64_t seed, double lo = 0.0,
                     double hi = 1.0) {
    Rng rng(seed);
    Matrix out(n, m);
    for (auto& v : out.data()) v = rng.uniform(lo, hi);
    return out;
}

// Idealized dh-mode trace for the closed-form accounting.
std::vector<MessageRecord> synthetic_trace(std::size_t K, std::size_t t_m, std::size_t N_r) {
    std::vector<MessageRecord> trace;
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = i + 1; j < K; ++j) {
            trace.push_back({0, 0, MessageKind::PublicKey, static_cast<int>(i), kServerId, 40, 1});
            trace.push_back({0, 0, MessageKind::PublicKey, kServerId, static_cast<int>(j), 40, 1});
            trace.push_back({0, 0, MessageKind::PublicKey, static_cast<int>(j), kServerId, 40, 1});
            trace.push_back({0, 0, MessageKind::PublicKey, kServerId, static_cast<int>(i), 40, 1});
        }
    for (std::size_t r = 1; r <= N_r; ++r) {
        const int agg = static_cast<int>(r % K);
        for (std::size_t j = 1; j <= t_m; ++j) {
            for (std::size_t i = 0; i < K; ++i)
                trace.push_back({r, j, MessageKind::Candidates, kServerId,
                                 static_cast<int>(i), 800, 0});
            for (std::size_t i = 0; i < K; ++i)
                if (static_cast<int>(i) != agg)
                    trace.push_back({r, j, MessageKind::MaskedPredictions, static_cast<int>(i),
                                     kServerId, 240, 1});
            trace.push_back({r, j, MessageKind::ForwardBundle, kServerId, agg, 960,
                             static_cast<std::uint64_t>(K - 1)});
            trace.push_back({r, j, MessageKind::FlcbValues, agg, kServerId, 240, 0});
        }
        trace.push_back({r, t_m, MessageKind::QueryResult, agg, kServerId, 32, 0});
    }
    return trace;
}

}  // namespace

TEST_SUITE_BEGIN("metrics");

TEST_CASE("igd basic values") {
    Matrix ref = Matrix::from_rows({{0.0, 0.0}});
    Matrix sol = Matrix::from_rows({{3.0, 4.0}});
    CHECK(igd(sol, ref) == doctest::Approx(5.0).epsilon(1e-15));

    // Reference contained in the solutions -> 0.
    Matrix sols = Matrix::from_rows({{0.1, 0.2}, {0.5, 0.5}, {1.0, 0.0}});
    Matrix refs = Matrix::from_rows({{0.5, 0.5}, {0.1, 0.2}});
    CHECK(igd(sols, refs) == 0.0);
}

TEST_CASE("igd matches the brute-force double loop") {
    const auto ref = random_matrix(100, 3, 1);
    const auto sol = random_matrix(50, 3, 2);
    CHECK(igd(sol, ref) == doctest::Approx(oracles::igd_brute_force(sol, ref)).epsilon(1e-12));
}

TEST_CASE("igd monotonicity and scale covariance") {
    const auto ref = random_matrix(60, 3, 3);
    const auto sol = random_matrix(30, 3, 4);
    const double base = igd(sol, ref);
    const auto extra = sol.vcat(random_matrix(10, 3, 5));
    CHECK(igd(extra, ref) <= base + 1e-15);

    Matrix ref2 = ref, sol2 = sol;
    ref2 *= 2.5;
    sol2 *= 2.5;
    CHECK(igd(sol2, ref2) == doctest::Approx(2.5 * base).epsilon(1e-12));
}

TEST_CASE("igd errors") {
    Matrix empty;
    Matrix one = Matrix::from_rows({{1.0, 2.0}});
    CHECK_THROWS_AS(igd(empty, one), std::invalid_argument);
    CHECK_THROWS_AS(igd(one, empty), std::invalid_argument);
    Matrix three = Matrix::from_rows({{1.0, 2.0, 3.0}});
    CHECK_THROWS_AS(igd(one, three), std::invalid_argument);
}

TEST_CASE("rank correlation endpoints") {
    std::vector<double> a{1, 2, 3, 4, 5};
    std::vector<double> up{10, 20, 30, 40, 50};
    std::vector<double> down{5, 4, 3, 2, 1};
    CHECK(rank_correlation(a, up).rho == doctest::Approx(1.0));
    CHECK(rank_correlation(a, down).rho == doctest::Approx(-1.0));
}

TEST_CASE("rank correlation equals the no-ties closed form") {
    // rho = 1 - 6 * sum(d^2) / (n (n^2 - 1)) when there are no ties.
    Rng rng(7);
    std::vector<double> a(40), b(40);
    for (std::size_t i = 0; i < 40; ++i) {
        a[i] = rng.uniform();
        b[i] = rng.uniform();
    }
    auto rank_of = [](const std::vector<double>& v) {
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            for (std::size_t j = 0; j < v.size(); ++j)
                if (v[j] < v[i]) r[i] += 1.0;
        return r;
    };
    const auto ra = rank_of(a), rb = rank_of(b);
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
    const double n = 40.0;
    const double expected = 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
    CHECK(rank_correlation(a, b).rho == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("rank correlation symmetry and monotone invariance") {
    Rng rng(8);
    std::vector<double> a(30), b(30);
    for (std::size_t i = 0; i < 30; ++i) {
        a[i] = rng.uniform();
        b[i] = rng.uniform();
    }
    CHECK(rank_correlation(a, b).rho == doctest::Approx(rank_correlation(b, a).rho));
    auto b2 = b;
    for (auto& v : b2) v = std::exp(3.0 * v) + 7.0;  // strictly increasing transform
    CHECK(rank_correlation(a, b2).rho == doctest::Approx(rank_correlation(a, b).rho));
}

TEST_CASE("rank correlation degenerate and error cases") {
    std::vector<double> constant{2.0, 2.0, 2.0};
    std::vector<double> vary{1.0, 2.0, 3.0};
    const auto rc = rank_correlation(constant, vary);
    CHECK(rc.degenerate);
    CHECK(rc.rho == 0.0);
    std::vector<double> one{1.0};
    CHECK_THROWS_AS(rank_correlation(one, one), std::invalid_argument);
    std::vector<double> two{1.0, 2.0};
    CHECK_THROWS_AS(rank_correlation(two, vary), std::invalid_argument);
}

TEST_CASE("comm_check matches the closed forms on idealized traces") {
    const struct {
        std::size_t K, t_m, N_r;
    } cases[] = {{4, 20, 24}, {3, 5, 4}, {8, 10, 2}};
    for (const auto& c : cases) {
        const auto trace = synthetic_trace(c.K, c.t_m, c.N_r);
        const auto rep = comm_check(trace, c.K, c.t_m, c.N_r);
        INFO("K=", c.K, " t_m=", c.t_m, " N_r=", c.N_r, " detail=", rep.detail);
        CHECK(rep.match);
        CHECK(rep.total_units == (3 * c.K - 2) * c.t_m * c.N_r + 4 * (c.K - 1));
        CHECK(rep.server_units == 2 * (c.K - 1) * c.t_m * c.N_r);
        CHECK(rep.normal_client_units == 2 * (c.K - 1) + c.t_m * c.N_r);
        CHECK(rep.aggregator_units == 2 * (c.K - 1) + (c.K - 1) * c.t_m * c.N_r);
        // Self-consistency: roles sum to the reported total.
        CHECK(rep.server_units + rep.normal_client_units + rep.aggregator_units ==
              rep.total_units);
    }
    // The paper-scale triple evaluates to 4812 payload units.
    const auto rep = comm_check(synthetic_trace(4, 20, 24), 4, 20, 24);
    CHECK(rep.total_units == 4812);
}

TEST_CASE("comm_check key phase only (zero budget)") {
    const std::size_t K = 4;
    const auto trace = synthetic_trace(K, 20, 0);
    const auto rep = comm_check(trace, K, 20, 0);
    CHECK(rep.match);
    CHECK(rep.total_units == 4 * (K - 1));
    CHECK(rep.server_units == 0);
}

TEST_CASE("comm_check reports deltas with attribution") {
    auto trace = synthetic_trace(3, 2, 1);
    trace.pop_back();                       // drop the QueryResult (no units)
    trace.pop_back();                       // drop the final FlcbValues (no units)
    trace.pop_back();                       // drop the final ForwardBundle (K-1 units)
    const auto rep = comm_check(trace, 3, 2, 1);
    CHECK(!rep.match);
    CHECK(!rep.detail.empty());
    CHECK_THROWS_AS(comm_check({}, 3, 2, 1), std::invalid_argument);
}

TEST_CASE("csv schemas use the documented headers") {
    const auto trace = synthetic_trace(2, 1, 1);
    const auto csv = trace_csv(trace);
    CHECK(csv.rfind("round,iteration,kind,sender,receiver,byte_size\n", 0) == 0);

    std::vector<RoundMetricsRow> rows{{0, 1, 881, 0.5, 0.01, 1234}};
    const auto rcsv = round_metrics_csv(rows);
    CHECK(rcsv.rfind("run,round,evals,igd,rho_mean,bytes_total\n", 0) == 0);
    CHECK(rcsv.find("0,1,881,0.5,0.01,1234") != std::string::npos);
}

TEST_SUITE_END();
