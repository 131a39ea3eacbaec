#ifndef FEDEA_PROBLEMS_HPP
#define FEDEA_PROBLEMS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fedea/core.hpp"

namespace fedea::problems {

enum class ProblemName {
    DTLZ1, DTLZ2, DTLZ3, DTLZ4, DTLZ5, DTLZ6, DTLZ7,
    WFG1, WFG2, WFG3, WFG4, WFG5, WFG6, WFG7, WFG8, WFG9,
};

ProblemName parse_problem_name(const std::string& name);  // case-insensitive
std::string to_string(ProblemName name);
bool is_wfg(ProblemName name);

/// A synthetic multi-objective minimization benchmark instance: analytic
/// objectives over a box-constrained decision space with a known Pareto front.
struct ProblemInstance {
    ProblemName name;
    std::size_t M = 0;      // objectives
    std::size_t D = 0;      // decision variables
    std::vector<double> lower;
    std::vector<double> upper;
    std::size_t k_wfg = 0;  // WFG position parameters (0 for DTLZ)
};

/// Builds an instance with the standard bounds (DTLZ: [0,1]^D; WFG:
/// variable d in [0, 2d], 1-based). WFG uses k = 2*(M-1) position parameters.
/// Throws std::invalid_argument for unsupported combinations (D < M, WFG k
/// not divisible by M-1, WFG2/3 odd distance-parameter count).
ProblemInstance make_problem(ProblemName name, std::size_t M, std::size_t D);
ProblemInstance make_problem(const std::string& name, std::size_t M, std::size_t D);

/// Exact objective values for a batch of candidates (rows). Candidates must
/// lie within the instance bounds.
Matrix evaluate(const ProblemInstance& problem, const Matrix& candidates);

/// n well-spread points on the analytic Pareto front, used as the IGD
/// reference set. Deterministic for a given (problem, n).
Matrix sample_pareto_front(const ProblemInstance& problem, std::size_t n);

/// Latin hypercube design: n rows, one sample per axis stratum per dimension,
/// deterministic for a given seed.
Matrix latin_hypercube(std::size_t n, const std::vector<double>& lower,
                       const std::vector<double>& upper, std::uint64_t seed);
Matrix latin_hypercube(std::size_t n, const ProblemInstance& problem, std::uint64_t seed);

}  // namespace fedea::problems

#endif
