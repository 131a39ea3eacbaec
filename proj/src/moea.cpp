#include "fedea/moea.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace fedea::moea {

namespace {

void lattice_recurse(unsigned left, std::size_t dim, std::size_t M, unsigned H,
                     std::vector<double>& cur, std::vector<std::vector<double>>& out) {
    if (dim == M - 1) {
        cur[dim] = static_cast<double>(left) / static_cast<double>(H);
        out.push_back(cur);
        return;
    }
    for (unsigned v = 0; v <= left; ++v) {
        cur[dim] = static_cast<double>(v) / static_cast<double>(H);
        lattice_recurse(left - v, dim + 1, M, H, cur, out);
    }
}

void normalize_rows(Matrix& m) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = m.row(r);
        double norm = 0.0;
        for (double v : row) norm += v * v;
        norm = std::sqrt(norm);
        if (norm == 0.0) {
            // Degenerate direction: fall back to the centroid direction.
            const double c = 1.0 / std::sqrt(static_cast<double>(row.size()));
            for (auto& v : row) v = c;
        } else {
            for (auto& v : row) v /= norm;
        }
    }
}

}  // namespace

std::size_t lattice_count(std::size_t M, unsigned H) {
    long double c = 1.0L;
    for (std::size_t i = 1; i < M; ++i)
        c = c * static_cast<long double>(H + i) / static_cast<long double>(i);
    return static_cast<std::size_t>(std::llroundl(c));
}

ReferenceVectorSet simplex_lattice_refvecs(std::size_t M, std::span<const Layer> layers) {
    if (M < 2) throw std::invalid_argument("simplex_lattice_refvecs: M must be at least 2");
    std::vector<std::vector<double>> all;
    for (const auto& layer : layers) {
        if (layer.H < 1) throw std::invalid_argument("simplex_lattice_refvecs: H must be >= 1");
        std::vector<std::vector<double>> pts;
        std::vector<double> cur(M);
        lattice_recurse(layer.H, 0, M, layer.H, cur, pts);
        const double centroid = 1.0 / static_cast<double>(M);
        for (auto& p : pts) {
            for (auto& v : p) v = layer.shrink * v + (1.0 - layer.shrink) * centroid;
            all.push_back(p);
        }
    }
    ReferenceVectorSet set;
    set.vectors = Matrix::from_rows(all);
    normalize_rows(set.vectors);
    set.originals = set.vectors;
    return set;
}

std::vector<Layer> default_layers(std::size_t M) {
    switch (M) {
        case 3: return {{13, 1.0}};
        case 5: return {{5, 1.0}};
        case 10: return {{3, 1.0}, {1, 0.5}};
        default: {
            unsigned H = 1;
            while (lattice_count(M, H) < 100) ++H;
            return {{H, 1.0}};
        }
    }
}

namespace {

// Bounded simulated binary crossover for a single variable (Deb & Agrawal).
void sbx_variable(double y1, double y2, double lo, double hi, double eta, Rng& rng,
                  double& c1, double& c2) {
    if (std::fabs(y1 - y2) <= 1e-14) {
        c1 = y1;
        c2 = y2;
        return;
    }
    const double ylo = std::min(y1, y2), yhi = std::max(y1, y2);
    const double u = rng.uniform();
    auto spread = [&](double beta) {
        const double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
        if (u <= 1.0 / alpha) return std::pow(u * alpha, 1.0 / (eta + 1.0));
        return std::pow(1.0 / (2.0 - u * alpha), 1.0 / (eta + 1.0));
    };
    double beta = 1.0 + 2.0 * (ylo - lo) / (yhi - ylo);
    double lchild = 0.5 * ((ylo + yhi) - spread(beta) * (yhi - ylo));
    beta = 1.0 + 2.0 * (hi - yhi) / (yhi - ylo);
    double rchild = 0.5 * ((ylo + yhi) + spread(beta) * (yhi - ylo));
    lchild = std::clamp(lchild, lo, hi);
    rchild = std::clamp(rchild, lo, hi);
    if (rng.uniform() <= 0.5) {
        c1 = rchild;
        c2 = lchild;
    } else {
        c1 = lchild;
        c2 = rchild;
    }
}

void polynomial_mutation(std::span<double> child, std::span<const double> lower,
                         std::span<const double> upper, double pm, double eta, Rng& rng) {
    for (std::size_t d = 0; d < child.size(); ++d) {
        if (rng.uniform() > pm) continue;
        const double lo = lower[d], hi = upper[d];
        if (hi <= lo) continue;
        const double y = child[d];
        const double d1 = (y - lo) / (hi - lo);
        const double d2 = (hi - y) / (hi - lo);
        const double r = rng.uniform();
        const double mpow = 1.0 / (eta + 1.0);
        double deltaq;
        if (r <= 0.5) {
            const double xy = 1.0 - d1;
            const double val = 2.0 * r + (1.0 - 2.0 * r) * std::pow(xy, eta + 1.0);
            deltaq = std::pow(val, mpow) - 1.0;
        } else {
            const double xy = 1.0 - d2;
            const double val = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * std::pow(xy, eta + 1.0);
            deltaq = 1.0 - std::pow(val, mpow);
        }
        child[d] = std::clamp(y + deltaq * (hi - lo), lo, hi);
    }
}

}  // namespace

Matrix generate_offspring(const Matrix& parents, std::span<const double> lower,
                          std::span<const double> upper, std::size_t count,
                          const VariationParams& params, Rng& rng) {
    if (parents.rows() < 2) throw std::invalid_argument("generate_offspring: need >= 2 parents");
    const std::size_t D = parents.cols();
    if (lower.size() != D || upper.size() != D)
        throw std::invalid_argument("generate_offspring: bounds dimension mismatch");
    const double pm = params.mutation_prob < 0.0
                          ? 1.0 / static_cast<double>(D)
                          : params.mutation_prob;

    Matrix children(count, D);
    std::size_t made = 0;
    std::vector<std::size_t> order(parents.rows());
    std::vector<double> c1(D), c2(D);
    while (made < count) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        rng.shuffle(order);
        for (std::size_t i = 0; i < order.size() && made < count; i += 2) {
            if (i + 1 < order.size()) {
                auto p1 = parents.row(order[i]);
                auto p2 = parents.row(order[i + 1]);
                if (rng.uniform() <= params.crossover_prob) {
                    for (std::size_t d = 0; d < D; ++d) {
                        if (rng.uniform() <= 0.5) {
                            sbx_variable(p1[d], p2[d], lower[d], upper[d], params.eta_crossover,
                                         rng, c1[d], c2[d]);
                        } else {
                            c1[d] = p1[d];
                            c2[d] = p2[d];
                        }
                    }
                } else {
                    std::copy(p1.begin(), p1.end(), c1.begin());
                    std::copy(p2.begin(), p2.end(), c2.begin());
                }
                polynomial_mutation(c1, lower, upper, pm, params.eta_mutation, rng);
                std::copy(c1.begin(), c1.end(), children.row(made).begin());
                ++made;
                if (made < count) {
                    polynomial_mutation(c2, lower, upper, pm, params.eta_mutation, rng);
                    std::copy(c2.begin(), c2.end(), children.row(made).begin());
                    ++made;
                }
            } else {
                // Odd leftover parent: lone copy plus mutation.
                auto p = parents.row(order[i]);
                std::copy(p.begin(), p.end(), c1.begin());
                polynomial_mutation(c1, lower, upper, pm, params.eta_mutation, rng);
                std::copy(c1.begin(), c1.end(), children.row(made).begin());
                ++made;
            }
        }
    }
    return children;
}

Matrix random_population(std::size_t n, std::span<const double> lower,
                         std::span<const double> upper, Rng& rng) {
    Matrix out(n, lower.size());
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t d = 0; d < lower.size(); ++d)
            out(r, d) = rng.uniform(lower[d], upper[d]);
    return out;
}

Population apd_select(const Population& candidates, const ReferenceVectorSet& refvecs,
                      double progress, double alpha) {
    const std::size_t n = candidates.decisions.rows();
    if (n == 0) throw std::invalid_argument("apd_select: no candidates");
    if (candidates.fitness.rows() != n)
        throw std::invalid_argument("apd_select: fitness missing or mismatched");
    const std::size_t M = candidates.fitness.cols();
    const std::size_t nv = refvecs.vectors.rows();

    // Translate by the ideal point.
    std::vector<double> ideal(M, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t m = 0; m < M; ++m)
            ideal[m] = std::min(ideal[m], candidates.fitness(i, m));

    // Minimal angle from each reference vector to its neighbors.
    std::vector<double> gamma(nv, std::numbers::pi / 2.0);
    for (std::size_t a = 0; a < nv; ++a) {
        double best = std::numbers::pi / 2.0;
        for (std::size_t b = 0; b < nv; ++b) {
            if (a == b) continue;
            double dot = 0.0;
            for (std::size_t m = 0; m < M; ++m)
                dot += refvecs.vectors(a, m) * refvecs.vectors(b, m);
            best = std::min(best, std::acos(std::clamp(dot, -1.0, 1.0)));
        }
        gamma[a] = std::max(best, 1e-12);
    }

    std::vector<std::size_t> best_idx(nv, n);  // n = empty marker
    std::vector<double> best_apd(nv, std::numeric_limits<double>::infinity());
    const double penalty_base =
        static_cast<double>(M) * std::pow(std::clamp(progress, 0.0, 1.0), alpha);

    std::vector<double> f(M);
    for (std::size_t i = 0; i < n; ++i) {
        double norm = 0.0;
        for (std::size_t m = 0; m < M; ++m) {
            f[m] = candidates.fitness(i, m) - ideal[m];
            norm += f[m] * f[m];
        }
        norm = std::sqrt(norm);
        std::size_t assigned = 0;
        double best_cos = -2.0;
        for (std::size_t v = 0; v < nv; ++v) {
            double dot = 0.0;
            for (std::size_t m = 0; m < M; ++m) dot += f[m] * refvecs.vectors(v, m);
            const double cosv = (norm > 0.0) ? dot / norm : 1.0;
            if (cosv > best_cos) {
                best_cos = cosv;
                assigned = v;
            }
        }
        const double theta = std::acos(std::clamp(best_cos, -1.0, 1.0));
        const double apd = (1.0 + penalty_base * theta / gamma[assigned]) * norm;
        if (apd < best_apd[assigned]) {
            best_apd[assigned] = apd;
            best_idx[assigned] = i;
        }
    }

    std::vector<std::size_t> chosen;
    chosen.reserve(nv);
    for (std::size_t v = 0; v < nv; ++v)
        if (best_idx[v] != n) chosen.push_back(best_idx[v]);

    Population out;
    out.decisions = candidates.decisions.select_rows(chosen);
    out.fitness = candidates.fitness.select_rows(chosen);
    return out;
}

ReferenceVectorSet adapt_refvecs(const ReferenceVectorSet& refvecs,
                                 std::span<const double> fitness_ranges) {
    const std::size_t M = refvecs.originals.cols();
    if (fitness_ranges.size() != M)
        throw std::invalid_argument("adapt_refvecs: range dimension mismatch");
    for (double r : fitness_ranges)
        if (r < 0.0) throw std::invalid_argument("adapt_refvecs: ranges must be nonnegative");
    ReferenceVectorSet out;
    out.originals = refvecs.originals;
    out.vectors = refvecs.originals;
    for (std::size_t r = 0; r < out.vectors.rows(); ++r)
        for (std::size_t m = 0; m < M; ++m)
            if (fitness_ranges[m] > 0.0) out.vectors(r, m) *= fitness_ranges[m];
    normalize_rows(out.vectors);
    return out;
}

}  // namespace fedea::moea
