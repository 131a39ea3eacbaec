#ifndef FEDEA_CORE_HPP
#define FEDEA_CORE_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fedea {

inline constexpr const char* kVersion = "0.1.0";

/// Dense row-major matrix of doubles. All numeric payloads in the library
/// (candidate batches, objective batches, masks, weight vectors) use this type.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    std::vector<double> row_copy(std::size_t r) const {
        return {data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_)};
    }

    void append_row(std::span<const double> values);
    Matrix select_rows(const std::vector<std::size_t>& indices) const;
    /// Rows of `this` followed by rows of `other` (column counts must agree).
    Matrix vcat(const Matrix& other) const;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double s);

    bool operator==(const Matrix& other) const = default;

    bool all_finite() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Deterministic 64-bit PRNG (xoshiro-free: std::mt19937_64 engine with
/// hand-rolled variate mappings so results do not depend on libstdc++
/// distribution internals).
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();
    /// Uniform in [0, 1).
    double uniform();
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi);
    /// Uniform integer in [0, n). n must be positive.
    std::size_t index(std::size_t n);
    /// Standard normal via Marsaglia polar method.
    double normal();

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

private:
    std::uint64_t state_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// SplitMix64-style seed derivation: one master seed plus a domain tag and
/// indices yield independent streams (counter-mode splitting).
std::uint64_t derive_seed(std::uint64_t master, std::string_view domain,
                          std::uint64_t a = 0, std::uint64_t b = 0);

/// Pareto dominance for minimization: a dominates b iff a <= b componentwise
/// with at least one strict inequality.
bool dominates(std::span<const double> a, std::span<const double> b);

/// Indices (ascending) of the nondominated rows of an objective matrix.
std::vector<std::size_t> nondominated_indices(const Matrix& objectives);

double vec_mean(std::span<const double> v);
double vec_median(std::vector<double> v);   // by value: sorts a copy
double vec_stddev(std::span<const double> v);  // sample stddev (n-1)

struct KMeansResult {
    Matrix centroids;                     // k x cols
    std::vector<std::size_t> assignment;  // one centroid index per input row
};

/// Lloyd's algorithm with a fixed deterministic recipe: initial centroids are
/// the first k entries of a Fisher-Yates shuffle of the row indices, points
/// tie-break to the lowest centroid index, an emptied cluster is re-seeded to
/// the point farthest from its current centroid, and iteration stops when the
/// assignment is stable or after `iters` rounds. k must not exceed the row
/// count.
KMeansResult kmeans(const Matrix& points, std::size_t k, std::size_t iters, std::uint64_t seed);

}  // namespace fedea

#endif
