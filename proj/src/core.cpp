#include "fedea/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fedea {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m;
    if (rows.empty()) return m;
    m.rows_ = rows.size();
    m.cols_ = rows.front().size();
    m.data_.reserve(m.rows_ * m.cols_);
    for (const auto& r : rows) {
        if (r.size() != m.cols_) throw std::invalid_argument("Matrix::from_rows: ragged rows");
        m.data_.insert(m.data_.end(), r.begin(), r.end());
    }
    return m;
}

void Matrix::append_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    if (values.size() != cols_) throw std::invalid_argument("Matrix::append_row: width mismatch");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
}

Matrix Matrix::select_rows(const std::vector<std::size_t>& indices) const {
    Matrix out(indices.size(), cols_);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        auto src = row(indices[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

Matrix Matrix::vcat(const Matrix& other) const {
    if (other.empty()) return *this;
    if (empty()) return other;
    if (cols_ != other.cols_) throw std::invalid_argument("Matrix::vcat: column mismatch");
    Matrix out(rows_ + other.rows_, cols_);
    std::copy(data_.begin(), data_.end(), out.data_.begin());
    std::copy(other.data_.begin(), other.data_.end(), out.data_.begin() + static_cast<std::ptrdiff_t>(data_.size()));
    return out;
}

Matrix& Matrix::operator+=(const Matrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_)
        throw std::invalid_argument("Matrix::operator+=: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_)
        throw std::invalid_argument("Matrix::operator-=: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (auto& v : data_) v *= s;
    return *this;
}

bool Matrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
    // xoshiro256** seeded through SplitMix64, per the reference recipe.
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64(s);
}

std::uint64_t Rng::next_u64() {
    auto rotl = [](std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

std::size_t Rng::index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("Rng::index: n must be positive");
    // Rejection-free modulo is fine here: n is tiny relative to 2^64.
    return static_cast<std::size_t>(next_u64() % n);
}

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = uniform(-1.0, 1.0);
        v = uniform(-1.0, 1.0);
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view domain,
                          std::uint64_t a, std::uint64_t b) {
    // FNV-1a over the domain tag, then SplitMix64 mixing of everything.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : domain) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    std::uint64_t x = master;
    std::uint64_t out = splitmix64(x);
    x ^= h;
    out ^= splitmix64(x);
    x ^= a + 0x9e3779b97f4a7c15ULL;
    out ^= splitmix64(x);
    x ^= b + 0x3c6ef372fe94f82aULL;
    out ^= splitmix64(x);
    return out;
}

bool dominates(std::span<const double> a, std::span<const double> b) {
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) return false;
        if (a[i] < b[i]) strict = true;
    }
    return strict;
}

std::vector<std::size_t> nondominated_indices(const Matrix& objectives) {
    const std::size_t n = objectives.rows();
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < n; ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < n && !dominated; ++j) {
            if (j != i && dominates(objectives.row(j), objectives.row(i))) dominated = true;
        }
        if (!dominated) keep.push_back(i);
    }
    return keep;
}

double vec_mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double vec_median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double vec_stddev(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = vec_mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, std::size_t k, std::size_t iters, std::uint64_t seed) {
    const std::size_t n = points.rows();
    if (k == 0 || k > n) throw std::invalid_argument("kmeans: k must be in [1, rows]");
    Rng rng(seed);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);

    KMeansResult res;
    res.centroids = Matrix(k, points.cols());
    for (std::size_t c = 0; c < k; ++c) {
        auto src = points.row(order[c]);
        std::copy(src.begin(), src.end(), res.centroids.row(c).begin());
    }
    res.assignment.assign(n, 0);

    for (std::size_t it = 0; it < iters; ++it) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double bestd = sq_dist(points.row(i), res.centroids.row(0));
            for (std::size_t c = 1; c < k; ++c) {
                const double d = sq_dist(points.row(i), res.centroids.row(c));
                if (d < bestd) {
                    bestd = d;
                    best = c;
                }
            }
            if (res.assignment[i] != best) {
                res.assignment[i] = best;
                changed = true;
            }
        }
        if (!changed && it > 0) break;

        Matrix sums(k, points.cols());
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto row = points.row(i);
            auto acc = sums.row(res.assignment[i]);
            for (std::size_t d = 0; d < row.size(); ++d) acc[d] += row[d];
            ++counts[res.assignment[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                auto acc = sums.row(c);
                auto dst = res.centroids.row(c);
                for (std::size_t d = 0; d < dst.size(); ++d)
                    dst[d] = acc[d] / static_cast<double>(counts[c]);
            } else {
                // Re-seed an emptied cluster to the point farthest from its
                // current centroid (lowest index on ties).
                std::size_t arg = 0;
                double far = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = sq_dist(points.row(i), res.centroids.row(res.assignment[i]));
                    if (d > far) {
                        far = d;
                        arg = i;
                    }
                }
                auto src = points.row(arg);
                std::copy(src.begin(), src.end(), res.centroids.row(c).begin());
                res.assignment[arg] = c;
            }
        }
    }
    return res;
}

}  // namespace fedea
