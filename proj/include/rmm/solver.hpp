#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "rmm/constraints.hpp"

namespace rmm {

enum class SolveMethod { direct, cg };

std::string to_string(SolveMethod m);
SolveMethod parse_solve_method(const std::string& s);

struct SolverSettings {
  SolveMethod method = SolveMethod::direct;
  double tolerance = 1e-10;
  int max_iterations = 0;  // 0: 10 * n for CG

  bool operator==(const SolverSettings&) const = default;
};

struct SolveReport {
  SolveMethod method = SolveMethod::direct;
  std::string backend;
  int iterations = 0;
  double relative_residual = 0.0;
  double seconds = 0.0;
};

struct SolveResult {
  Eigen::VectorXd x;
  SolveReport report;
};

/// Solves K x = f for symmetric positive definite K. The direct path uses a
/// supernodal Cholesky factorization with a fixed AMD ordering followed by
/// iterative refinement; CG uses a diagonal preconditioner. Throws SolverError
/// when the matrix is not positive definite or the residual contract fails.
SolveResult solve_spd(const SparseMatrix& K, const Eigen::VectorXd& f, const SolverSettings& s = {});

/// Name of the direct factorization backend compiled in.
std::string direct_backend();

/// Smallest Ritz value of K from a Lanczos run with full reorthogonalization.
double smallest_ritz_value(const SparseMatrix& K, int steps = 80, std::uint64_t seed = 1);

/// True if a Cholesky factorization of K succeeds.
bool is_positive_definite(const SparseMatrix& K);

}  // namespace rmm
