#ifndef FEDEA_ACQUISITION_HPP
#define FEDEA_ACQUISITION_HPP

#include <vector>

#include "fedea/core.hpp"

namespace fedea::acq {

/// Inputs of the federated lower confidence bound.
///
/// `per_source` holds one N x M matrix per client in client-id order: the
/// plaintext predictions in plaintext mode, or the K-1 individually masked
/// matrices plus the aggregator's own plaintext prediction in DH mode (the
/// sigma term deliberately sees the noise). `exact_client_sum` is the exact
/// sum of all K plaintext predictions (direct sum, or the unmasked secure
/// aggregate). `server_prediction` is the global model's output.
struct AcquisitionInputs {
    std::vector<const Matrix*> per_source;
    const Matrix* server_prediction = nullptr;
    const Matrix* exact_client_sum = nullptr;
    double t = 2.0;
};

struct MeanSigma {
    Matrix mean;
    Matrix sigma;
};

/// mean = (client_sum/K + y_s) / 2;
/// sigma^2 = (1/K) * [ sum_i (p_i - mean)^2 + (y_s - mean)^2 ].
MeanSigma federated_mean_sigma(const AcquisitionInputs& inputs);

/// Per-column min-max to [0,1]; a constant column maps to all zeros.
Matrix normalize_columns(const Matrix& m);

/// F^a = mean_norm - t * sigma_norm, elementwise (M columns retained).
Matrix flcb(const Matrix& mean_norm, const Matrix& sigma_norm, double t);

struct AcquisitionOutput {
    Matrix mean;
    Matrix sigma;
    Matrix mean_norm;   // equal to mean when normalization is off
    Matrix sigma_norm;  // equal to sigma when normalization is off
    Matrix flcb;
};

/// Full pipeline: mean/sigma, optional per-column normalization, FLCB.
AcquisitionOutput compute_flcb(const AcquisitionInputs& inputs, bool normalize);

}  // namespace fedea::acq

#endif
