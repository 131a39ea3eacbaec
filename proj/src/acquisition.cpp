#include "fedea/acquisition.hpp"

#include <cmath>
#include <stdexcept>

namespace fedea::acq {

MeanSigma federated_mean_sigma(const AcquisitionInputs& inputs) {
    const std::size_t K = inputs.per_source.size();
    if (K < 2) throw std::invalid_argument("federated_mean_sigma: need at least two clients");
    if (inputs.server_prediction == nullptr || inputs.exact_client_sum == nullptr)
        throw std::invalid_argument("federated_mean_sigma: missing inputs");
    const Matrix& ys = *inputs.server_prediction;
    const Matrix& sum = *inputs.exact_client_sum;
    const std::size_t N = ys.rows(), M = ys.cols();
    if (sum.rows() != N || sum.cols() != M)
        throw std::invalid_argument("federated_mean_sigma: shape mismatch");
    for (const Matrix* p : inputs.per_source)
        if (p == nullptr || p->rows() != N || p->cols() != M)
            throw std::invalid_argument("federated_mean_sigma: shape mismatch");

    MeanSigma out;
    out.mean = Matrix(N, M);
    out.sigma = Matrix(N, M);
    const double k = static_cast<double>(K);
    for (std::size_t i = 0; i < N * M; ++i) {
        const double mean = (sum.data()[i] / k + ys.data()[i]) / 2.0;
        out.mean.data()[i] = mean;
        double sq = 0.0;
        for (const Matrix* p : inputs.per_source) {
            const double d = p->data()[i] - mean;
            sq += d * d;
        }
        const double ds = ys.data()[i] - mean;
        sq += ds * ds;
        out.sigma.data()[i] = std::sqrt(sq / k);
    }
    return out;
}

Matrix normalize_columns(const Matrix& m) {
    if (m.rows() == 0) throw std::invalid_argument("normalize_columns: empty matrix");
    Matrix out(m.rows(), m.cols());
    for (std::size_t c = 0; c < m.cols(); ++c) {
        double lo = m(0, c), hi = m(0, c);
        for (std::size_t r = 1; r < m.rows(); ++r) {
            lo = std::min(lo, m(r, c));
            hi = std::max(hi, m(r, c));
        }
        if (hi > lo) {
            const double range = hi - lo;
            for (std::size_t r = 0; r < m.rows(); ++r) out(r, c) = (m(r, c) - lo) / range;
        }
        // Degenerate column stays all zeros: no exploration bonus.
    }
    return out;
}

Matrix flcb(const Matrix& mean_norm, const Matrix& sigma_norm, double t) {
    if (mean_norm.rows() != sigma_norm.rows() || mean_norm.cols() != sigma_norm.cols())
        throw std::invalid_argument("flcb: shape mismatch");
    Matrix out(mean_norm.rows(), mean_norm.cols());
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data()[i] = mean_norm.data()[i] - t * sigma_norm.data()[i];
    return out;
}

AcquisitionOutput compute_flcb(const AcquisitionInputs& inputs, bool normalize) {
    AcquisitionOutput out;
    auto ms = federated_mean_sigma(inputs);
    out.mean = std::move(ms.mean);
    out.sigma = std::move(ms.sigma);
    if (normalize) {
        out.mean_norm = normalize_columns(out.mean);
        out.sigma_norm = normalize_columns(out.sigma);
    } else {
        out.mean_norm = out.mean;
        out.sigma_norm = out.sigma;
    }
    out.flcb = flcb(out.mean_norm, out.sigma_norm, inputs.t);
    return out;
}

}  // namespace fedea::acq
