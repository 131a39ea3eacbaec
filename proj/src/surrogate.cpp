#include "fedea/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fedea::surrogate {

namespace {

constexpr double kMinWidth = 1e-6;

struct NormStats {
    std::vector<double> min, range;
};

NormStats column_stats(const Matrix& m) {
    NormStats s;
    s.min.assign(m.cols(), 0.0);
    s.range.assign(m.cols(), 1.0);
    for (std::size_t c = 0; c < m.cols(); ++c) {
        double lo = m(0, c), hi = m(0, c);
        for (std::size_t r = 1; r < m.rows(); ++r) {
            lo = std::min(lo, m(r, c));
            hi = std::max(hi, m(r, c));
        }
        s.min[c] = lo;
        s.range[c] = (hi > lo) ? hi - lo : 1.0;
    }
    return s;
}

Matrix normalize(const Matrix& m, const NormStats& s) {
    Matrix out = m;
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c)
            out(r, c) = (m(r, c) - s.min[c]) / s.range[c];
    return out;
}

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Basis values for one normalized input row.
void basis_row(const RBFNModel& m, std::span<const double> x, std::span<double> h) {
    for (std::size_t c = 0; c < m.center_count(); ++c) {
        const double d2 = sq_dist(x, m.centers.row(c));
        h[c] = std::exp(-d2 / (2.0 * m.widths[c] * m.widths[c]));
    }
}

// Mean squared error (with the conventional 1/2 factor) over normalized data.
double loss_of(const RBFNModel& m, const Matrix& xn, const Matrix& yn) {
    const std::size_t n = xn.rows(), C = m.center_count(), M = yn.cols();
    std::vector<double> h(C);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        basis_row(m, xn.row(i), h);
        for (std::size_t k = 0; k < M; ++k) {
            double pred = m.output_weights(C, k);
            for (std::size_t c = 0; c < C; ++c) pred += m.output_weights(c, k) * h[c];
            const double e = pred - yn(i, k);
            loss += e * e;
        }
    }
    return loss / (2.0 * static_cast<double>(n));
}

void gradient_epoch(RBFNModel& m, const Matrix& xn, const Matrix& yn, double lr) {
    const std::size_t n = xn.rows(), C = m.center_count(), D = xn.cols(), M = yn.cols();
    Matrix grad_w(C + 1, M);
    Matrix grad_c(C, D);
    std::vector<double> grad_width(C, 0.0);
    std::vector<double> h(C);
    std::vector<double> err(M);

    for (std::size_t i = 0; i < n; ++i) {
        auto x = xn.row(i);
        basis_row(m, x, h);
        for (std::size_t k = 0; k < M; ++k) {
            double pred = m.output_weights(C, k);
            for (std::size_t c = 0; c < C; ++c) pred += m.output_weights(c, k) * h[c];
            err[k] = pred - yn(i, k);
        }
        for (std::size_t k = 0; k < M; ++k) {
            grad_w(C, k) += err[k];
            for (std::size_t c = 0; c < C; ++c) grad_w(c, k) += err[k] * h[c];
        }
        for (std::size_t c = 0; c < C; ++c) {
            double g = 0.0;
            for (std::size_t k = 0; k < M; ++k) g += err[k] * m.output_weights(c, k);
            if (g == 0.0) continue;
            const double w2 = m.widths[c] * m.widths[c];
            auto ctr = m.centers.row(c);
            double d2 = 0.0;
            for (std::size_t d = 0; d < D; ++d) {
                const double diff = x[d] - ctr[d];
                d2 += diff * diff;
                grad_c(c, d) += g * h[c] * diff / w2;
            }
            grad_width[c] += g * h[c] * d2 / (w2 * m.widths[c]);
        }
    }

    const double scale = lr / static_cast<double>(n);
    for (std::size_t c = 0; c <= C; ++c)
        for (std::size_t k = 0; k < M; ++k) m.output_weights(c, k) -= scale * grad_w(c, k);
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t d = 0; d < xn.cols(); ++d) m.centers(c, d) -= scale * grad_c(c, d);
        m.widths[c] = std::max(kMinWidth, m.widths[c] - scale * grad_width[c]);
    }
}

}  // namespace

void Dataset::append(const Matrix& new_inputs, const Matrix& new_targets) {
    if (new_inputs.rows() != new_targets.rows())
        throw std::invalid_argument("Dataset::append: row-count mismatch");
    for (std::size_t r = 0; r < new_inputs.rows(); ++r) {
        inputs.append_row(new_inputs.row(r));
        targets.append_row(new_targets.row(r));
    }
}

std::size_t default_center_count(std::size_t M, std::size_t D) {
    return static_cast<std::size_t>(
               std::llround(std::sqrt(static_cast<double>(M + D)))) + 3;
}

std::size_t flat_size(std::size_t C, std::size_t D, std::size_t M) {
    return C * D + C + (C + 1) * M + 2 * D + 2 * M;
}

std::vector<double> RBFNModel::flatten() const {
    std::vector<double> out;
    out.reserve(flat_size(center_count(), input_dim(), output_dim()));
    out.insert(out.end(), centers.data().begin(), centers.data().end());
    out.insert(out.end(), widths.begin(), widths.end());
    out.insert(out.end(), output_weights.data().begin(), output_weights.data().end());
    out.insert(out.end(), input_min.begin(), input_min.end());
    out.insert(out.end(), input_range.begin(), input_range.end());
    out.insert(out.end(), target_min.begin(), target_min.end());
    out.insert(out.end(), target_range.begin(), target_range.end());
    return out;
}

RBFNModel unflatten(std::span<const double> omega, std::size_t C, std::size_t D, std::size_t M) {
    if (omega.size() != flat_size(C, D, M))
        throw std::invalid_argument("unflatten: wrong vector length");
    RBFNModel m;
    auto take = [&omega](std::size_t& pos, std::size_t count) {
        std::span<const double> s = omega.subspan(pos, count);
        pos += count;
        return s;
    };
    std::size_t pos = 0;
    auto cs = take(pos, C * D);
    m.centers = Matrix(C, D);
    std::copy(cs.begin(), cs.end(), m.centers.data().begin());
    auto ws = take(pos, C);
    m.widths.assign(ws.begin(), ws.end());
    auto ow = take(pos, (C + 1) * M);
    m.output_weights = Matrix(C + 1, M);
    std::copy(ow.begin(), ow.end(), m.output_weights.data().begin());
    auto imn = take(pos, D);
    m.input_min.assign(imn.begin(), imn.end());
    auto irg = take(pos, D);
    m.input_range.assign(irg.begin(), irg.end());
    auto tmn = take(pos, M);
    m.target_min.assign(tmn.begin(), tmn.end());
    auto trg = take(pos, M);
    m.target_range.assign(trg.begin(), trg.end());
    for (auto& w : m.widths) w = std::max(w, kMinWidth);
    return m;
}

RBFNModel train_rbfn(const Dataset& dataset, const TrainConfig& config,
                     const std::optional<RBFNModel>& warm_start) {
    const std::size_t n = dataset.size();
    if (n == 0) throw std::invalid_argument("train_rbfn: empty dataset");
    if (dataset.inputs.rows() != dataset.targets.rows())
        throw std::invalid_argument("train_rbfn: dataset row-count mismatch");
    if (config.epochs < 1) throw std::invalid_argument("train_rbfn: epochs must be >= 1");
    const std::size_t D = dataset.inputs.cols();
    const std::size_t M = dataset.targets.cols();
    const std::size_t target_C = default_center_count(M, D);
    const std::size_t C = std::min(target_C, n);

    RBFNModel model;
    model.centers_clamped = C < target_C;

    const NormStats xs = column_stats(dataset.inputs);
    const NormStats ys = column_stats(dataset.targets);
    model.input_min = xs.min;
    model.input_range = xs.range;
    model.target_min = ys.min;
    model.target_range = ys.range;
    const Matrix xn = normalize(dataset.inputs, xs);
    const Matrix yn = normalize(dataset.targets, ys);

    if (warm_start) {
        if (warm_start->center_count() != C || warm_start->input_dim() != D ||
            warm_start->output_dim() != M)
            throw std::invalid_argument("train_rbfn: warm-start shape mismatch");
        model.centers = warm_start->centers;
        model.widths = warm_start->widths;
        model.output_weights = warm_start->output_weights;
        for (auto& w : model.widths) w = std::max(w, kMinWidth);
    } else {
        auto km = kmeans(xn, C, 10, config.seed);
        model.centers = km.centroids;
        double dmax = 0.0;
        for (std::size_t a = 0; a < C; ++a)
            for (std::size_t b = a + 1; b < C; ++b)
                dmax = std::max(dmax, sq_dist(model.centers.row(a), model.centers.row(b)));
        dmax = std::sqrt(dmax);
        const double width = dmax > 0.0 ? dmax / std::sqrt(2.0 * static_cast<double>(C)) : 0.5;
        model.widths.assign(C, width);
        model.output_weights = Matrix(C + 1, M);
        for (std::size_t k = 0; k < M; ++k) {
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) mean += yn(i, k);
            model.output_weights(C, k) = mean / static_cast<double>(n);
        }
    }

    model.initial_loss = loss_of(model, xn, yn);
    RBFNModel best = model;
    double best_loss = model.initial_loss;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        gradient_epoch(model, xn, yn, config.learning_rate);
        const double l = loss_of(model, xn, yn);
        if (l < best_loss) {
            best_loss = l;
            best = model;
        }
    }
    best.initial_loss = model.initial_loss;
    best.final_loss = best_loss;
    best.centers_clamped = model.centers_clamped;
    return best;
}

Matrix predict(const RBFNModel& model, const Matrix& candidates) {
    if (candidates.cols() != model.input_dim())
        throw std::invalid_argument("predict: input dimension mismatch");
    const std::size_t C = model.center_count();
    const std::size_t M = model.output_dim();
    Matrix out(candidates.rows(), M);
    std::vector<double> x(model.input_dim());
    std::vector<double> h(C);
    for (std::size_t r = 0; r < candidates.rows(); ++r) {
        auto raw = candidates.row(r);
        for (std::size_t d = 0; d < x.size(); ++d)
            x[d] = (raw[d] - model.input_min[d]) / model.input_range[d];
        basis_row(model, x, h);
        for (std::size_t k = 0; k < M; ++k) {
            double pred = model.output_weights(C, k);
            for (std::size_t c = 0; c < C; ++c) pred += model.output_weights(c, k) * h[c];
            out(r, k) = pred * model.target_range[k] + model.target_min[k];
        }
    }
    if (!out.all_finite()) throw std::runtime_error("predict: non-finite prediction");
    return out;
}

std::vector<double> fedavg(const std::vector<std::vector<double>>& weight_vectors,
                           const std::vector<std::size_t>& counts) {
    if (weight_vectors.empty()) throw std::invalid_argument("fedavg: empty input");
    if (counts.size() != weight_vectors.size())
        throw std::invalid_argument("fedavg: counts size mismatch");
    const std::size_t len = weight_vectors.front().size();
    double total = 0.0;
    for (std::size_t i = 0; i < weight_vectors.size(); ++i) {
        if (weight_vectors[i].size() != len)
            throw std::invalid_argument("fedavg: weight-vector length mismatch");
        if (counts[i] == 0) throw std::invalid_argument("fedavg: counts must be positive");
        total += static_cast<double>(counts[i]);
    }
    std::vector<double> out(len, 0.0);
    for (std::size_t i = 0; i < weight_vectors.size(); ++i) {
        const double w = static_cast<double>(counts[i]) / total;
        for (std::size_t j = 0; j < len; ++j) out[j] += w * weight_vectors[i][j];
    }
    return out;
}

}  // namespace fedea::surrogate
