#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "fedea/moea.hpp"
#include "oracles.hpp"

using namespace fedea;
using namespace fedea::moea;

namespace {

Matrix random_matrix(std::size_t n, std::size_t m, std::uint64_t seed, double lo = 0.0,
                     double hi = 1.0) {
    Rng rng(seed);
    Matrix out(n, m);
    for (auto& v : out.data()) v = rng.uniform(lo, hi);
    return out;
}

std::multiset<std::vector<double>> row_multiset(const Matrix& m) {
    std::multiset<std::vector<double>> out;
    for (std::size_t r = 0; r < m.rows(); ++r) out.insert(m.row_copy(r));
    return out;
}

}  // namespace

TEST_SUITE_BEGIN("moea");

TEST_CASE("reference-vector counts match the population sizes") {
    const Layer l3[] = {{13, 1.0}};
    CHECK(simplex_lattice_refvecs(3, l3).vectors.rows() == 105);
    CHECK(oracles::binomial(15, 2) == 105);

    const Layer l5[] = {{5, 1.0}};
    CHECK(simplex_lattice_refvecs(5, l5).vectors.rows() == 126);
    CHECK(oracles::binomial(9, 4) == 126);

    const Layer l10[] = {{3, 1.0}, {1, 0.5}};
    CHECK(simplex_lattice_refvecs(10, l10).vectors.rows() == 230);
    CHECK(oracles::binomial(12, 9) + oracles::binomial(10, 9) == 230);

    CHECK(simplex_lattice_refvecs(3, default_layers(3)).vectors.rows() == 105);
    CHECK(simplex_lattice_refvecs(5, default_layers(5)).vectors.rows() == 126);
    CHECK(simplex_lattice_refvecs(10, default_layers(10)).vectors.rows() == 230);
}

TEST_CASE("reference vectors are unit length and nonnegative") {
    const auto set = simplex_lattice_refvecs(10, default_layers(10));
    for (std::size_t r = 0; r < set.vectors.rows(); ++r) {
        double norm = 0.0;
        for (std::size_t m = 0; m < 10; ++m) {
            CHECK(set.vectors(r, m) >= 0.0);
            norm += set.vectors(r, m) * set.vectors(r, m);
        }
        CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("offspring with zero variation are shuffled copies of the parents") {
    const auto parents = random_matrix(12, 4, 1);
    std::vector<double> lo(4, 0.0), hi(4, 1.0);
    VariationParams params;
    params.crossover_prob = 0.0;
    params.mutation_prob = 0.0;
    Rng rng(2);
    const auto children = generate_offspring(parents, lo, hi, 12, params, rng);
    CHECK(row_multiset(children) == row_multiset(parents));
    CHECK(!(children == parents));  // order did change for this seed
}

TEST_CASE("offspring stay within bounds for many seeds") {
    const auto parents = random_matrix(9, 3, 3, 0.0, 1.0);
    std::vector<double> lo(3, 0.0), hi(3, 1.0);
    const VariationParams params{};
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        Rng rng(seed);
        const auto children = generate_offspring(parents, lo, hi, 9, params, rng);
        for (double v : children.data()) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("offspring generation is deterministic and validates input") {
    const auto parents = random_matrix(8, 3, 4);
    std::vector<double> lo(3, 0.0), hi(3, 1.0);
    const VariationParams params{};
    Rng r1(7), r2(7);
    CHECK(generate_offspring(parents, lo, hi, 10, params, r1) ==
          generate_offspring(parents, lo, hi, 10, params, r2));
    const auto lone = random_matrix(1, 3, 5);
    Rng r3(8);
    CHECK_THROWS_AS(generate_offspring(lone, lo, hi, 4, params, r3), std::invalid_argument);
}

TEST_CASE("apd selection keeps one candidate per populated subregion") {
    // Candidates exactly on distinct reference vectors: selection is identity.
    const Layer layers[] = {{4, 1.0}};
    const auto refvecs = simplex_lattice_refvecs(3, layers);  // 15 vectors
    Matrix fitness(15, 3);
    for (std::size_t r = 0; r < 15; ++r)
        for (std::size_t m = 0; m < 3; ++m)
            fitness(r, m) = 2.0 * refvecs.vectors(r, m) + 1.0;  // +1 cancelled by ideal shift
    Population pop{random_matrix(15, 5, 6), fitness};
    const auto sel = apd_select(pop, refvecs, 0.5, 2.0);
    CHECK(sel.decisions.rows() == 15);
    CHECK(row_multiset(sel.fitness) == row_multiset(fitness));
}

TEST_CASE("same direction, smaller norm wins") {
    const Layer layers[] = {{1, 1.0}};
    const auto refvecs = simplex_lattice_refvecs(2, layers);  // (1,0),(0,1) normalized
    Matrix fitness = Matrix::from_rows({{1.0, 1.0}, {2.0, 2.0}, {5.0, 0.0}});
    Population pop{random_matrix(3, 2, 7), fitness};
    const auto sel = apd_select(pop, refvecs, 0.5, 2.0);
    // Candidates 0 and 1 share a direction (after ideal translation) with
    // theta = 0 to one vector; the norm-1 candidate must be retained.
    bool has_small = false, has_large = false;
    for (std::size_t r = 0; r < sel.fitness.rows(); ++r) {
        if (sel.fitness(r, 0) == 1.0 && sel.fitness(r, 1) == 1.0) has_small = true;
        if (sel.fitness(r, 0) == 2.0 && sel.fitness(r, 1) == 2.0) has_large = true;
    }
    CHECK(has_small);
    CHECK(!has_large);
}

TEST_CASE("apd selection matches the brute-force oracle on 200 candidates") {
    const auto refvecs = simplex_lattice_refvecs(3, default_layers(3));  // 105 vectors
    const auto fitness = random_matrix(200, 3, 8, 0.0, 4.0);
    Population pop{random_matrix(200, 6, 9), fitness};
    const auto sel = apd_select(pop, refvecs, 0.5, 2.0);
    const auto oracle = oracles::apd_brute_force(fitness, refvecs.vectors, 0.5, 2.0);
    REQUIRE(sel.fitness.rows() == oracle.size());
    for (std::size_t i = 0; i < oracle.size(); ++i)
        for (std::size_t m = 0; m < 3; ++m)
            CHECK(sel.fitness(i, m) == fitness(oracle[i], m));
}

TEST_CASE("apd selection is invariant to per-column constant shifts") {
    const auto refvecs = simplex_lattice_refvecs(3, default_layers(3));
    const auto fitness = random_matrix(80, 3, 10, 0.0, 2.0);
    Matrix shifted = fitness;
    for (std::size_t r = 0; r < shifted.rows(); ++r) {
        shifted(r, 0) += 11.0;
        shifted(r, 1) -= 3.0;
        shifted(r, 2) += 0.25;
    }
    const auto ids = random_matrix(80, 4, 11);
    const auto a = apd_select({ids, fitness}, refvecs, 0.3, 2.0);
    const auto b = apd_select({ids, shifted}, refvecs, 0.3, 2.0);
    CHECK(a.decisions == b.decisions);
}

TEST_CASE("selection size never exceeds candidates or vectors") {
    const auto refvecs = simplex_lattice_refvecs(3, default_layers(3));
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const std::size_t n = 5 + seed * 30;
        Population pop{random_matrix(n, 3, 100 + seed), random_matrix(n, 3, 200 + seed)};
        const auto sel = apd_select(pop, refvecs, 1.0, 2.0);
        CHECK(sel.decisions.rows() <= std::min<std::size_t>(n, refvecs.vectors.rows()));
        CHECK(sel.decisions.rows() >= 1);
    }
    Population empty;
    CHECK_THROWS_AS(apd_select(empty, refvecs, 0.5, 2.0), std::invalid_argument);
}

TEST_CASE("selected candidates minimize APD within their subregion") {
    const auto refvecs = simplex_lattice_refvecs(3, default_layers(3));
    const auto fitness = random_matrix(150, 3, 12, 0.0, 1.0);
    Population pop{random_matrix(150, 3, 13), fitness};
    const double progress = 0.7, alpha = 2.0;
    const auto sel = apd_select(pop, refvecs, progress, alpha);

    // Recompute assignments and APDs directly.
    const auto oracle = oracles::apd_brute_force(fitness, refvecs.vectors, progress, alpha);
    std::multiset<std::vector<double>> expect;
    for (std::size_t i : oracle) expect.insert(fitness.row_copy(i));
    CHECK(row_multiset(sel.fitness) == expect);
}

TEST_CASE("reference-vector adaptation") {
    const Layer layers[] = {{4, 1.0}};
    const auto base = simplex_lattice_refvecs(2, layers);

    // Equal ranges leave the set unchanged.
    std::vector<double> equal{2.0, 2.0};
    const auto same = adapt_refvecs(base, equal);
    for (std::size_t i = 0; i < base.vectors.size(); ++i)
        CHECK(same.vectors.data()[i] == doctest::Approx(base.vectors.data()[i]).epsilon(1e-14));

    // Hand-checked rescaling: (1,1)/sqrt(2) with ranges (1,2) -> (1,2)/sqrt(5).
    ReferenceVectorSet diag;
    diag.vectors = Matrix::from_rows({{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)}});
    diag.originals = diag.vectors;
    std::vector<double> ranges{1.0, 2.0};
    const auto adapted = adapt_refvecs(diag, ranges);
    CHECK(adapted.vectors(0, 0) == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-12));
    CHECK(adapted.vectors(0, 1) == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-12));

    // Zero-range column passes through unscaled; vectors stay unit norm.
    std::vector<double> degenerate{0.0, 3.0};
    const auto deg = adapt_refvecs(base, degenerate);
    for (std::size_t r = 0; r < deg.vectors.rows(); ++r) {
        double norm = 0.0;
        for (std::size_t m = 0; m < 2; ++m) norm += deg.vectors(r, m) * deg.vectors(r, m);
        CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
    }

    std::vector<double> negative{-1.0, 1.0};
    CHECK_THROWS_AS(adapt_refvecs(base, negative), std::invalid_argument);
}

TEST_CASE("adaptation rescales the originals, not the current vectors") {
    const Layer layers[] = {{6, 1.0}};
    const auto base = simplex_lattice_refvecs(3, layers);
    std::vector<double> r1{1.0, 4.0, 2.0};
    std::vector<double> r2{1.0, 1.0, 1.0};
    const auto once = adapt_refvecs(base, r1);
    const auto back = adapt_refvecs(once, r2);  // equal ranges restore the originals
    for (std::size_t i = 0; i < base.vectors.size(); ++i)
        CHECK(back.vectors.data()[i] == doctest::Approx(base.vectors.data()[i]).epsilon(1e-14));
}

TEST_CASE("random population respects bounds") {
    std::vector<double> lo{0.0, -2.0}, hi{1.0, 5.0};
    Rng rng(14);
    const auto pop = random_population(50, lo, hi, rng);
    for (std::size_t r = 0; r < 50; ++r) {
        CHECK(pop(r, 0) >= 0.0);
        CHECK(pop(r, 0) < 1.0);
        CHECK(pop(r, 1) >= -2.0);
        CHECK(pop(r, 1) < 5.0);
    }
}

TEST_SUITE_END();
