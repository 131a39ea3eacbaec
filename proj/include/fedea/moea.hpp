#ifndef FEDEA_MOEA_HPP
#define FEDEA_MOEA_HPP

#include <span>
#include <vector>

#include "fedea/core.hpp"

namespace fedea::moea {

/// One simplex-lattice layer: Das-Dennis parameter H and a shrink factor
/// pulling the layer toward the centroid (1.0 = no shrink).
struct Layer {
    unsigned H = 1;
    double shrink = 1.0;
};

/// Unit reference vectors plus the initial uniform set kept for adaptation.
struct ReferenceVectorSet {
    Matrix vectors;    // N_v x M, unit rows
    Matrix originals;  // the uniform set the adaptation rescales
};

/// Das-Dennis simplex-lattice directions per layer (C(H+M-1, M-1) points
/// each), inner layers shrunk toward the centroid, union normalized to unit
/// vectors.
ReferenceVectorSet simplex_lattice_refvecs(std::size_t M, std::span<const Layer> layers);

/// Standard layer choices: H=13 for M=3 (105 vectors), H=5 for M=5 (126),
/// (H=3) + (H=1, shrink 0.5) for M=10 (230); otherwise the smallest single-H
/// lattice with at least 100 vectors.
std::vector<Layer> default_layers(std::size_t M);

std::size_t lattice_count(std::size_t M, unsigned H);

struct VariationParams {
    double crossover_prob = 1.0;
    double eta_crossover = 15.0;
    double mutation_prob = -1.0;  // negative: use 1/D
    double eta_mutation = 20.0;
};

/// `count` children from shuffled parent pairing, simulated binary crossover
/// and polynomial mutation, clipped to bounds. With zero crossover and
/// mutation probability the children are shuffled copies of the parents.
Matrix generate_offspring(const Matrix& parents, std::span<const double> lower,
                          std::span<const double> upper, std::size_t count,
                          const VariationParams& params, Rng& rng);

/// Uniform random population within bounds.
Matrix random_population(std::size_t n, std::span<const double> lower,
                         std::span<const double> upper, Rng& rng);

struct Population {
    Matrix decisions;  // N x D
    Matrix fitness;    // N x M, assigned externally
};

/// Angle-penalized-distance environmental selection: fitness is translated by
/// the ideal point, candidates are assigned to their minimal-angle reference
/// vector, and each populated subregion keeps the candidate minimizing
/// (1 + M * progress^alpha * theta/gamma) * ||f'||. Ties break to the lowest
/// index. Output holds at most one candidate per subregion, ordered by
/// reference-vector index.
Population apd_select(const Population& candidates, const ReferenceVectorSet& refvecs,
                      double progress, double alpha);

/// Rescales the original uniform vectors by the per-objective fitness ranges
/// (zero ranges pass through unscaled) and renormalizes.
ReferenceVectorSet adapt_refvecs(const ReferenceVectorSet& refvecs,
                                 std::span<const double> fitness_ranges);

}  // namespace fedea::moea

#endif
