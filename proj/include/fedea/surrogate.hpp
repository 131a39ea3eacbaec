#ifndef FEDEA_SURROGATE_HPP
#define FEDEA_SURROGATE_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "fedea/core.hpp"

namespace fedea::surrogate {

/// A client's evaluated data: decision vectors and their true objective
/// values. Append-only within a run.
struct Dataset {
    Matrix inputs;   // n x D
    Matrix targets;  // n x M
    int owner = -1;

    std::size_t size() const { return inputs.rows(); }
    void append(const Matrix& new_inputs, const Matrix& new_targets);
};

/// RBF-network surrogate with a shared Gaussian hidden layer and M linear
/// outputs. Inputs and targets are min-max normalized inside the model; the
/// normalization statistics are model parameters and travel with the
/// flattened weight vector so an averaged model stays self-contained.
struct RBFNModel {
    Matrix centers;         // C x D, in normalized input space
    std::vector<double> widths;  // C, positive
    Matrix output_weights;  // (C+1) x M, last row is the bias
    std::vector<double> input_min, input_range;    // D each; degenerate range stored as 1
    std::vector<double> target_min, target_range;  // M each; degenerate range stored as 1

    // Training metadata (not part of the flattened weight vector).
    bool centers_clamped = false;  // dataset had fewer rows than the target C
    double initial_loss = 0.0;
    double final_loss = 0.0;

    std::size_t center_count() const { return centers.rows(); }
    std::size_t input_dim() const { return centers.cols(); }
    std::size_t output_dim() const { return output_weights.cols(); }

    /// Flat parameter vector omega: centers, widths, output weights,
    /// then the four normalization statistic blocks.
    std::vector<double> flatten() const;
};

std::size_t flat_size(std::size_t C, std::size_t D, std::size_t M);
RBFNModel unflatten(std::span<const double> omega, std::size_t C, std::size_t D, std::size_t M);

/// Center count rule: round(sqrt(M + D)) + 3.
std::size_t default_center_count(std::size_t M, std::size_t D);

struct TrainConfig {
    std::size_t epochs = 20;
    double learning_rate = 0.06;
    std::uint64_t seed = 0;
};

/// Trains an RBFN on the dataset: centers from k-means on the normalized
/// inputs (or taken from warm_start), Gaussian widths from the
/// max-center-distance heuristic, then all parameters refined by full-batch
/// gradient descent on MSE. The returned model is the lowest-loss parameter
/// snapshot seen during the run, so final_loss <= initial_loss always holds.
/// A dataset smaller than the target center count falls back to one center
/// per row and sets centers_clamped.
RBFNModel train_rbfn(const Dataset& dataset, const TrainConfig& config,
                     const std::optional<RBFNModel>& warm_start = std::nullopt);

/// Deterministic batch prediction, denormalized to the original target scale.
Matrix predict(const RBFNModel& model, const Matrix& candidates);

/// Count-weighted arithmetic mean of flattened weight vectors.
std::vector<double> fedavg(const std::vector<std::vector<double>>& weight_vectors,
                           const std::vector<std::size_t>& counts);

}  // namespace fedea::surrogate

#endif
