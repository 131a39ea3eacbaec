#include "fedea/problems.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace fedea::problems {

namespace {

constexpr double kPi = std::numbers::pi;

std::string upper_copy(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace

ProblemName parse_problem_name(const std::string& name) {
    static const std::map<std::string, ProblemName> table = {
        {"DTLZ1", ProblemName::DTLZ1}, {"DTLZ2", ProblemName::DTLZ2},
        {"DTLZ3", ProblemName::DTLZ3}, {"DTLZ4", ProblemName::DTLZ4},
        {"DTLZ5", ProblemName::DTLZ5}, {"DTLZ6", ProblemName::DTLZ6},
        {"DTLZ7", ProblemName::DTLZ7},
        {"WFG1", ProblemName::WFG1}, {"WFG2", ProblemName::WFG2},
        {"WFG3", ProblemName::WFG3}, {"WFG4", ProblemName::WFG4},
        {"WFG5", ProblemName::WFG5}, {"WFG6", ProblemName::WFG6},
        {"WFG7", ProblemName::WFG7}, {"WFG8", ProblemName::WFG8},
        {"WFG9", ProblemName::WFG9},
    };
    auto it = table.find(upper_copy(name));
    if (it == table.end()) throw std::invalid_argument("unsupported problem name: " + name);
    return it->second;
}

std::string to_string(ProblemName name) {
    switch (name) {
        case ProblemName::DTLZ1: return "DTLZ1";
        case ProblemName::DTLZ2: return "DTLZ2";
        case ProblemName::DTLZ3: return "DTLZ3";
        case ProblemName::DTLZ4: return "DTLZ4";
        case ProblemName::DTLZ5: return "DTLZ5";
        case ProblemName::DTLZ6: return "DTLZ6";
        case ProblemName::DTLZ7: return "DTLZ7";
        case ProblemName::WFG1: return "WFG1";
        case ProblemName::WFG2: return "WFG2";
        case ProblemName::WFG3: return "WFG3";
        case ProblemName::WFG4: return "WFG4";
        case ProblemName::WFG5: return "WFG5";
        case ProblemName::WFG6: return "WFG6";
        case ProblemName::WFG7: return "WFG7";
        case ProblemName::WFG8: return "WFG8";
        case ProblemName::WFG9: return "WFG9";
    }
    return "?";
}

bool is_wfg(ProblemName name) {
    return static_cast<int>(name) >= static_cast<int>(ProblemName::WFG1);
}

ProblemInstance make_problem(ProblemName name, std::size_t M, std::size_t D) {
    if (M < 2) throw std::invalid_argument("make_problem: M must be at least 2");
    if (D < M) throw std::invalid_argument("make_problem: D must be at least M");
    ProblemInstance p;
    p.name = name;
    p.M = M;
    p.D = D;
    if (is_wfg(name)) {
        p.k_wfg = 2 * (M - 1);
        if (p.k_wfg % (M - 1) != 0 || p.k_wfg >= D)
            throw std::invalid_argument("make_problem: invalid WFG position-parameter count");
        const std::size_t l = D - p.k_wfg;
        if ((name == ProblemName::WFG2 || name == ProblemName::WFG3) && l % 2 != 0)
            throw std::invalid_argument(
                "make_problem: WFG2/WFG3 need an even distance-parameter count (D - k)");
        p.lower.assign(D, 0.0);
        p.upper.resize(D);
        for (std::size_t d = 0; d < D; ++d) p.upper[d] = 2.0 * static_cast<double>(d + 1);
    } else {
        p.lower.assign(D, 0.0);
        p.upper.assign(D, 1.0);
    }
    return p;
}

ProblemInstance make_problem(const std::string& name, std::size_t M, std::size_t D) {
    return make_problem(parse_problem_name(name), M, D);
}

// ---------------------------------------------------------------------------
// DTLZ
// ---------------------------------------------------------------------------

namespace {

double dtlz_g1(std::span<const double> xm) {
    double s = 0.0;
    for (double x : xm) s += (x - 0.5) * (x - 0.5) - std::cos(20.0 * kPi * (x - 0.5));
    return 100.0 * (static_cast<double>(xm.size()) + s);
}

double dtlz_g2(std::span<const double> xm) {
    double s = 0.0;
    for (double x : xm) s += (x - 0.5) * (x - 0.5);
    return s;
}

// DTLZ2-style objectives from an angle vector theta (length M-1) and g.
void dtlz_spherical(std::span<const double> theta, double g, std::span<double> f) {
    const std::size_t M = f.size();
    for (std::size_t m = 0; m < M; ++m) {
        double v = 1.0 + g;
        for (std::size_t i = 0; i + m + 1 < M; ++i) v *= std::cos(theta[i]);
        if (m > 0) v *= std::sin(theta[M - 1 - m]);
        f[m] = v;
    }
}

void eval_dtlz(const ProblemInstance& p, std::span<const double> x, std::span<double> f) {
    const std::size_t M = p.M;
    const std::size_t k = p.D - M + 1;
    const std::span<const double> pos = x.subspan(0, M - 1);
    const std::span<const double> dist = x.subspan(M - 1, k);
    std::vector<double> theta(M - 1);
    switch (p.name) {
        case ProblemName::DTLZ1: {
            const double g = dtlz_g1(dist);
            for (std::size_t m = 0; m < M; ++m) {
                double v = 0.5 * (1.0 + g);
                for (std::size_t i = 0; i + m + 1 < M; ++i) v *= pos[i];
                if (m > 0) v *= 1.0 - pos[M - 1 - m];
                f[m] = v;
            }
            break;
        }
        case ProblemName::DTLZ2:
        case ProblemName::DTLZ3: {
            const double g = (p.name == ProblemName::DTLZ2) ? dtlz_g2(dist) : dtlz_g1(dist);
            for (std::size_t i = 0; i < M - 1; ++i) theta[i] = pos[i] * kPi / 2.0;
            dtlz_spherical(theta, g, f);
            break;
        }
        case ProblemName::DTLZ4: {
            const double g = dtlz_g2(dist);
            for (std::size_t i = 0; i < M - 1; ++i) theta[i] = std::pow(pos[i], 100.0) * kPi / 2.0;
            dtlz_spherical(theta, g, f);
            break;
        }
        case ProblemName::DTLZ5:
        case ProblemName::DTLZ6: {
            double g;
            if (p.name == ProblemName::DTLZ5) {
                g = dtlz_g2(dist);
            } else {
                g = 0.0;
                for (double v : dist) g += std::pow(v, 0.1);
            }
            theta[0] = pos[0] * kPi / 2.0;
            for (std::size_t i = 1; i < M - 1; ++i)
                theta[i] = kPi / (4.0 * (1.0 + g)) * (1.0 + 2.0 * g * pos[i]);
            dtlz_spherical(theta, g, f);
            break;
        }
        case ProblemName::DTLZ7: {
            double g = 0.0;
            for (double v : dist) g += v;
            g = 1.0 + 9.0 / static_cast<double>(k) * g;
            double h = static_cast<double>(M);
            for (std::size_t i = 0; i < M - 1; ++i) {
                f[i] = pos[i];
                h -= pos[i] / (1.0 + g) * (1.0 + std::sin(3.0 * kPi * pos[i]));
            }
            f[M - 1] = (1.0 + g) * h;
            break;
        }
        default:
            throw std::logic_error("eval_dtlz: not a DTLZ problem");
    }
}

// ---------------------------------------------------------------------------
// WFG transformation and shape functions (Huband et al. toolkit definitions)
// ---------------------------------------------------------------------------

double correct01(double v) {
    constexpr double eps = 1e-10;
    if (v < 0.0 && v >= -eps) return 0.0;
    if (v > 1.0 && v <= 1.0 + eps) return 1.0;
    return v;
}

double t_s_linear(double y, double A) {
    return correct01(std::fabs(y - A) / std::fabs(std::floor(A - y) + A));
}

double t_b_flat(double y, double A, double B, double C) {
    const double tmp1 = std::min(0.0, std::floor(y - B)) * A * (B - y) / B;
    const double tmp2 = std::min(0.0, std::floor(C - y)) * (1.0 - A) * (y - C) / (1.0 - C);
    return correct01(A + tmp1 - tmp2);
}

double t_b_poly(double y, double alpha) { return correct01(std::pow(y, alpha)); }

double t_b_param(double y, double u, double A, double B, double C) {
    const double v = A - (1.0 - 2.0 * u) * std::fabs(std::floor(0.5 - u) + A);
    return correct01(std::pow(y, B + (C - B) * v));
}

double t_s_decept(double y, double A, double B, double C) {
    const double tmp1 = std::floor(y - A + B) * (1.0 - C + (A - B) / B) / (A - B);
    const double tmp2 = std::floor(A + B - y) * (1.0 - C + (1.0 - A - B) / B) / (1.0 - A - B);
    return correct01(1.0 + (std::fabs(y - A) - B) * (tmp1 + tmp2 + 1.0 / B));
}

double t_s_multi(double y, double A, double B, double C) {
    const double tmp1 = std::fabs(y - C) / (2.0 * (std::floor(C - y) + C));
    const double tmp2 = (4.0 * A + 2.0) * kPi * (0.5 - tmp1);
    return correct01((1.0 + std::cos(tmp2) + 4.0 * B * tmp1 * tmp1) / (B + 2.0));
}

double t_r_sum(std::span<const double> y, std::span<const double> w) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        num += w[i] * y[i];
        den += w[i];
    }
    return correct01(num / den);
}

double t_r_sum_unit(std::span<const double> y) {
    double num = 0.0;
    for (double v : y) num += v;
    return correct01(num / static_cast<double>(y.size()));
}

double t_r_nonsep(std::span<const double> y, std::size_t A) {
    const std::size_t n = y.size();
    double num = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        num += y[j];
        for (std::size_t k = 0; k + 2 <= A; ++k)
            num += std::fabs(y[j] - y[(1 + j + k) % n]);
    }
    const double tmp = std::ceil(static_cast<double>(A) / 2.0);
    const double den = static_cast<double>(n) * tmp *
                       (1.0 + 2.0 * static_cast<double>(A) - 2.0 * tmp) /
                       static_cast<double>(A);
    return correct01(num / den);
}

// Shape functions; m is 1-based, x has length M-1.
double shape_linear(std::span<const double> x, std::size_t m, std::size_t M) {
    double r = 1.0;
    for (std::size_t i = 0; i + m < M; ++i) r *= x[i];
    if (m > 1) r *= 1.0 - x[M - m];
    return correct01(r);
}

double shape_convex(std::span<const double> x, std::size_t m, std::size_t M) {
    double r = 1.0;
    for (std::size_t i = 0; i + m < M; ++i) r *= 1.0 - std::cos(x[i] * kPi / 2.0);
    if (m > 1) r *= 1.0 - std::sin(x[M - m] * kPi / 2.0);
    return correct01(r);
}

double shape_concave(std::span<const double> x, std::size_t m, std::size_t M) {
    double r = 1.0;
    for (std::size_t i = 0; i + m < M; ++i) r *= std::sin(x[i] * kPi / 2.0);
    if (m > 1) r *= std::cos(x[M - m] * kPi / 2.0);
    return correct01(r);
}

double shape_mixed(double x1, double A, double alpha) {
    return correct01(std::pow(1.0 - x1 - std::cos(2.0 * A * kPi * x1 + kPi / 2.0) / (2.0 * A * kPi), alpha));
}

double shape_disc(double x1, double A, double alpha, double beta) {
    const double c = std::cos(A * std::pow(x1, beta) * kPi);
    return correct01(1.0 - std::pow(x1, alpha) * c * c);
}

enum class ShapeKind { Linear, Convex, Concave, ConvexMixed, ConvexDisc };

// Applies the WFG underlying parameterization: final transition vector t of
// length M, degeneracy constants A_i, shape family -> objectives.
void wfg_shape_to_objectives(std::span<const double> t, ShapeKind kind, bool degenerate,
                             std::span<double> f) {
    const std::size_t M = f.size();
    std::vector<double> x(M - 1);
    for (std::size_t i = 0; i < M - 1; ++i) {
        const double Ai = (degenerate && i > 0) ? 0.0 : 1.0;
        x[i] = std::max(t[M - 1], Ai) * (t[i] - 0.5) + 0.5;
    }
    const double xM = t[M - 1];
    for (std::size_t m = 1; m <= M; ++m) {
        double h = 0.0;
        switch (kind) {
            case ShapeKind::Linear: h = shape_linear(x, m, M); break;
            case ShapeKind::Convex: h = shape_convex(x, m, M); break;
            case ShapeKind::Concave: h = shape_concave(x, m, M); break;
            case ShapeKind::ConvexMixed:
                h = (m < M) ? shape_convex(x, m, M) : shape_mixed(x[0], 5.0, 1.0);
                break;
            case ShapeKind::ConvexDisc:
                h = (m < M) ? shape_convex(x, m, M) : shape_disc(x[0], 5.0, 1.0, 1.0);
                break;
        }
        f[m - 1] = xM + 2.0 * static_cast<double>(m) * h;
    }
}

// Position groups for the reduction step: group m (0-based) covers
// y[m*k/(M-1) .. (m+1)*k/(M-1)).
std::vector<double> reduce_by_sum(const std::vector<double>& y, std::size_t k, std::size_t M,
                                  bool wfg1_weights) {
    std::vector<double> t(M);
    const std::size_t gsz = k / (M - 1);
    for (std::size_t m = 0; m < M - 1; ++m) {
        std::span<const double> grp(y.data() + m * gsz, gsz);
        if (wfg1_weights) {
            std::vector<double> w(gsz);
            for (std::size_t i = 0; i < gsz; ++i)
                w[i] = 2.0 * static_cast<double>(m * gsz + i + 1);
            t[m] = t_r_sum(grp, w);
        } else {
            t[m] = t_r_sum_unit(grp);
        }
    }
    std::span<const double> tail(y.data() + k, y.size() - k);
    if (wfg1_weights) {
        std::vector<double> w(tail.size());
        for (std::size_t i = 0; i < tail.size(); ++i)
            w[i] = 2.0 * static_cast<double>(k + i + 1);
        t[M - 1] = t_r_sum(tail, w);
    } else {
        t[M - 1] = t_r_sum_unit(tail);
    }
    return t;
}

std::vector<double> reduce_nonsep(const std::vector<double>& y, std::size_t k, std::size_t M) {
    std::vector<double> t(M);
    const std::size_t gsz = k / (M - 1);
    for (std::size_t m = 0; m < M - 1; ++m)
        t[m] = t_r_nonsep({y.data() + m * gsz, gsz}, gsz);
    t[M - 1] = t_r_nonsep({y.data() + k, y.size() - k}, y.size() - k);
    return t;
}

void eval_wfg(const ProblemInstance& p, std::span<const double> z, std::span<double> f) {
    const std::size_t n = p.D;
    const std::size_t k = p.k_wfg;
    const std::size_t M = p.M;
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = z[i] / (2.0 * static_cast<double>(i + 1));

    std::vector<double> t;
    switch (p.name) {
        case ProblemName::WFG1: {
            for (std::size_t i = k; i < n; ++i) y[i] = t_s_linear(y[i], 0.35);
            for (std::size_t i = k; i < n; ++i) y[i] = t_b_flat(y[i], 0.8, 0.75, 0.85);
            for (std::size_t i = 0; i < n; ++i) y[i] = t_b_poly(y[i], 0.02);
            t = reduce_by_sum(y, k, M, /*wfg1_weights=*/true);
            wfg_shape_to_objectives(t, ShapeKind::ConvexMixed, false, f);
            break;
        }
        case ProblemName::WFG2:
        case ProblemName::WFG3: {
            for (std::size_t i = k; i < n; ++i) y[i] = t_s_linear(y[i], 0.35);
            const std::size_t l2 = (n - k) / 2;
            std::vector<double> y2(k + l2);
            std::copy(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(k), y2.begin());
            for (std::size_t i = 0; i < l2; ++i) {
                const double pair[2] = {y[k + 2 * i], y[k + 2 * i + 1]};
                y2[k + i] = t_r_nonsep(pair, 2);
            }
            t = reduce_by_sum(y2, k, M, false);
            if (p.name == ProblemName::WFG2)
                wfg_shape_to_objectives(t, ShapeKind::ConvexDisc, false, f);
            else
                wfg_shape_to_objectives(t, ShapeKind::Linear, /*degenerate=*/true, f);
            break;
        }
        case ProblemName::WFG4: {
            for (std::size_t i = 0; i < n; ++i) y[i] = t_s_multi(y[i], 30.0, 10.0, 0.35);
            t = reduce_by_sum(y, k, M, false);
            wfg_shape_to_objectives(t, ShapeKind::Concave, false, f);
            break;
        }
        case ProblemName::WFG5: {
            for (std::size_t i = 0; i < n; ++i) y[i] = t_s_decept(y[i], 0.35, 0.001, 0.05);
            t = reduce_by_sum(y, k, M, false);
            wfg_shape_to_objectives(t, ShapeKind::Concave, false, f);
            break;
        }
        case ProblemName::WFG6: {
            for (std::size_t i = k; i < n; ++i) y[i] = t_s_linear(y[i], 0.35);
            t = reduce_nonsep(y, k, M);
            wfg_shape_to_objectives(t, ShapeKind::Concave, false, f);
            break;
        }
        case ProblemName::WFG7: {
            std::vector<double> yt = y;
            for (std::size_t i = 0; i < k; ++i) {
                const double u = t_r_sum_unit({y.data() + i + 1, n - i - 1});
                yt[i] = t_b_param(y[i], u, 0.98 / 49.98, 0.02, 50.0);
            }
            for (std::size_t i = k; i < n; ++i) yt[i] = t_s_linear(yt[i], 0.35);
            t = reduce_by_sum(yt, k, M, false);
            wfg_shape_to_objectives(t, ShapeKind::Concave, false, f);
            break;
        }
        case ProblemName::WFG8: {
            std::vector<double> yt = y;
            for (std::size_t i = k; i < n; ++i) {
                const double u = t_r_sum_unit({y.data(), i});
                yt[i] = t_b_param(y[i], u, 0.98 / 49.98, 0.02, 50.0);
            }
            for (std::size_t i = k; i < n; ++i) yt[i] = t_s_linear(yt[i], 0.35);
            t = reduce_by_sum(yt, k, M, false);
            wfg_shape_to_objectives(t, ShapeKind::Concave, false, f);
            break;
        }
        case ProblemName::WFG9: {
            std::vector<double> yt = y;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const double u = t_r_sum_unit({y.data() + i + 1, n - i - 1});
                yt[i] = t_b_param(y[i], u, 0.98 / 49.98, 0.02, 50.0);
            }
            for (std::size_t i = 0; i < k; ++i) yt[i] = t_s_decept(yt[i], 0.35, 0.001, 0.05);
            for (std::size_t i = k; i < n; ++i) yt[i] = t_s_multi(yt[i], 30.0, 95.0, 0.35);
            t = reduce_nonsep(yt, k, M);
            wfg_shape_to_objectives(t, ShapeKind::Concave, false, f);
            break;
        }
        default:
            throw std::logic_error("eval_wfg: not a WFG problem");
    }
}

}  // namespace

Matrix evaluate(const ProblemInstance& p, const Matrix& candidates) {
    if (candidates.cols() != p.D)
        throw std::invalid_argument("evaluate: candidate dimension mismatch");
    constexpr double tol = 1e-12;
    for (std::size_t r = 0; r < candidates.rows(); ++r) {
        auto row = candidates.row(r);
        for (std::size_t d = 0; d < p.D; ++d) {
            if (row[d] < p.lower[d] - tol || row[d] > p.upper[d] + tol)
                throw std::invalid_argument("evaluate: candidate out of bounds");
        }
    }
    Matrix out(candidates.rows(), p.M);
    for (std::size_t r = 0; r < candidates.rows(); ++r) {
        if (is_wfg(p.name))
            eval_wfg(p, candidates.row(r), out.row(r));
        else
            eval_dtlz(p, candidates.row(r), out.row(r));
    }
    if (!out.all_finite()) throw std::runtime_error("evaluate: non-finite objective value");
    return out;
}

// ---------------------------------------------------------------------------
// Pareto-front sampling
// ---------------------------------------------------------------------------

namespace {

void lattice_recurse(std::size_t left, std::size_t dim, std::size_t M,
                     std::vector<double>& cur, std::vector<std::vector<double>>& out,
                     std::size_t H) {
    if (dim == M - 1) {
        cur[dim] = static_cast<double>(left) / static_cast<double>(H);
        out.push_back(cur);
        return;
    }
    for (std::size_t v = 0; v <= left; ++v) {
        cur[dim] = static_cast<double>(v) / static_cast<double>(H);
        lattice_recurse(left - v, dim + 1, M, cur, out, H);
    }
}

// All simplex-lattice weight vectors (components sum to 1) for parameter H.
std::vector<std::vector<double>> simplex_lattice_points(std::size_t M, std::size_t H) {
    std::vector<std::vector<double>> out;
    std::vector<double> cur(M);
    lattice_recurse(H, 0, M, cur, out, H);
    return out;
}

std::size_t lattice_count(std::size_t M, std::size_t H) {
    // C(H + M - 1, M - 1) without overflow for the sizes used here.
    long double c = 1.0L;
    for (std::size_t i = 1; i < M; ++i)
        c = c * static_cast<long double>(H + i) / static_cast<long double>(i);
    return static_cast<std::size_t>(std::llroundl(c));
}

std::vector<std::vector<double>> lattice_at_least(std::size_t M, std::size_t n) {
    std::size_t H = 1;
    while (lattice_count(M, H) < n) ++H;
    return simplex_lattice_points(M, H);
}

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Greedy max-min-distance subset of exactly n rows (deterministic, seeded by
// row 0). Returns the input unchanged when it already has <= n rows.
Matrix farthest_point_subset(const Matrix& pts, std::size_t n) {
    if (pts.rows() <= n) return pts;
    std::vector<std::size_t> chosen;
    chosen.reserve(n);
    std::vector<double> best(pts.rows(), std::numeric_limits<double>::infinity());
    chosen.push_back(0);
    for (std::size_t r = 0; r < pts.rows(); ++r)
        best[r] = sq_dist(pts.row(r), pts.row(0));
    while (chosen.size() < n) {
        std::size_t arg = 0;
        double far = -1.0;
        for (std::size_t r = 0; r < pts.rows(); ++r) {
            if (best[r] > far) {
                far = best[r];
                arg = r;
            }
        }
        chosen.push_back(arg);
        for (std::size_t r = 0; r < pts.rows(); ++r)
            best[r] = std::min(best[r], sq_dist(pts.row(r), pts.row(arg)));
    }
    std::sort(chosen.begin(), chosen.end());
    return pts.select_rows(chosen);
}

Matrix front_dtlz_simplex(std::size_t M, std::size_t n, bool spherical) {
    auto dirs = lattice_at_least(M, n);
    Matrix out(dirs.size(), M);
    for (std::size_t r = 0; r < dirs.size(); ++r) {
        auto& d = dirs[r];
        if (spherical) {
            double norm = 0.0;
            for (double v : d) norm += v * v;
            norm = std::sqrt(norm);
            if (norm == 0.0) norm = 1.0;
            for (std::size_t m = 0; m < M; ++m) out(r, m) = d[m] / norm;
        } else {
            for (std::size_t m = 0; m < M; ++m) out(r, m) = 0.5 * d[m];
        }
    }
    return farthest_point_subset(out, n);
}

Matrix front_dtlz56(std::size_t M, std::size_t n) {
    Matrix out(n, M);
    std::vector<double> theta(M - 1, kPi / 4.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double x1 = static_cast<double>(i) / static_cast<double>(n - 1);
        theta[0] = x1 * kPi / 2.0;
        dtlz_spherical(theta, 0.0, out.row(i));
    }
    return out;
}

Matrix front_dtlz7(std::size_t M, std::size_t n) {
    // The DTLZ7 front is separable per position coordinate: a point is
    // Pareto-optimal iff each f_i lies on the 1-D tradeoff front of
    // (t, -psi(t)) with psi(t) = t/2 * (1 + sin(3*pi*t)).
    const std::size_t grid = 4096;
    std::vector<double> ts, psi;
    ts.reserve(grid);
    for (std::size_t i = 0; i < grid; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(grid - 1);
        ts.push_back(t);
        psi.push_back(t / 2.0 * (1.0 + std::sin(3.0 * kPi * t)));
    }
    std::vector<double> opt;
    double best_psi = -std::numeric_limits<double>::infinity();
    // Scanning t ascending: t is optimal iff psi(t) strictly exceeds every
    // psi at smaller t (smaller t and larger psi would dominate).
    for (std::size_t i = 0; i < grid; ++i) {
        if (psi[i] > best_psi) {
            opt.push_back(ts[i]);
            best_psi = psi[i];
        }
    }
    Rng rng(0x5eedf007ULL);
    const std::size_t base = std::max<std::size_t>(8 * n, 2048);
    Matrix cand(base, M);
    for (std::size_t r = 0; r < base; ++r) {
        double h = static_cast<double>(M);
        for (std::size_t i = 0; i < M - 1; ++i) {
            const double fi = opt[rng.index(opt.size())];
            cand(r, i) = fi;
            h -= fi / 2.0 * (1.0 + std::sin(3.0 * kPi * fi));
        }
        cand(r, M - 1) = 2.0 * h;
    }
    return farthest_point_subset(cand, n);
}

Matrix front_wfg_sphere(std::size_t M, std::size_t n) {
    auto dirs = lattice_at_least(M, n);
    Matrix out(dirs.size(), M);
    for (std::size_t r = 0; r < dirs.size(); ++r) {
        auto& d = dirs[r];
        double norm = 0.0;
        for (double v : d) norm += v * v;
        norm = std::sqrt(norm);
        if (norm == 0.0) norm = 1.0;
        for (std::size_t m = 0; m < M; ++m)
            out(r, m) = 2.0 * static_cast<double>(m + 1) * d[m] / norm;
    }
    return farthest_point_subset(out, n);
}

Matrix front_wfg3(std::size_t M, std::size_t n) {
    Matrix out(n, M);
    std::vector<double> x(M - 1, 0.5);
    for (std::size_t i = 0; i < n; ++i) {
        x[0] = static_cast<double>(i) / static_cast<double>(n - 1);
        for (std::size_t m = 1; m <= M; ++m)
            out(i, m - 1) = 2.0 * static_cast<double>(m) * shape_linear(x, m, M);
    }
    return out;
}

Matrix front_wfg12(ProblemName name, std::size_t M, std::size_t n) {
    Rng rng(0x5eedf00dULL);
    const std::size_t base = std::max<std::size_t>(12 * n, 8192);
    Matrix cand(base, M);
    std::vector<double> x(M - 1);
    for (std::size_t r = 0; r < base; ++r) {
        for (auto& v : x) v = rng.uniform();
        for (std::size_t m = 1; m <= M; ++m) {
            double h;
            if (m < M)
                h = shape_convex(x, m, M);
            else if (name == ProblemName::WFG1)
                h = shape_mixed(x[0], 5.0, 1.0);
            else
                h = shape_disc(x[0], 5.0, 1.0, 1.0);
            cand(r, m - 1) = 2.0 * static_cast<double>(m) * h;
        }
    }
    auto keep = nondominated_indices(cand);
    return farthest_point_subset(cand.select_rows(keep), n);
}

}  // namespace

Matrix sample_pareto_front(const ProblemInstance& p, std::size_t n) {
    if (n < p.M) throw std::invalid_argument("sample_pareto_front: n must be at least M");
    switch (p.name) {
        case ProblemName::DTLZ1: return front_dtlz_simplex(p.M, n, false);
        case ProblemName::DTLZ2:
        case ProblemName::DTLZ3:
        case ProblemName::DTLZ4: return front_dtlz_simplex(p.M, n, true);
        case ProblemName::DTLZ5:
        case ProblemName::DTLZ6: return front_dtlz56(p.M, n);
        case ProblemName::DTLZ7: return front_dtlz7(p.M, n);
        case ProblemName::WFG1:
        case ProblemName::WFG2: return front_wfg12(p.name, p.M, n);
        case ProblemName::WFG3: return front_wfg3(p.M, n);
        case ProblemName::WFG4:
        case ProblemName::WFG5:
        case ProblemName::WFG6:
        case ProblemName::WFG7:
        case ProblemName::WFG8:
        case ProblemName::WFG9: return front_wfg_sphere(p.M, n);
    }
    throw std::invalid_argument("sample_pareto_front: unsupported problem");
}

Matrix latin_hypercube(std::size_t n, const std::vector<double>& lower,
                       const std::vector<double>& upper, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("latin_hypercube: n must be positive");
    if (lower.size() != upper.size())
        throw std::invalid_argument("latin_hypercube: bound size mismatch");
    const std::size_t D = lower.size();
    Rng rng(seed);
    Matrix out(n, D);
    std::vector<std::size_t> perm(n);
    for (std::size_t d = 0; d < D; ++d) {
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        rng.shuffle(perm);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = (static_cast<double>(perm[i]) + rng.uniform()) / static_cast<double>(n);
            out(i, d) = lower[d] + u * (upper[d] - lower[d]);
        }
    }
    return out;
}

Matrix latin_hypercube(std::size_t n, const ProblemInstance& p, std::uint64_t seed) {
    return latin_hypercube(n, p.lower, p.upper, seed);
}

}  // namespace fedea::problems
