#include "rmm/solver.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#ifdef RMM_HAVE_CHOLMOD
#include <Eigen/CholmodSupport>
#endif

namespace rmm {

namespace {

constexpr const char* kIndefinite =
    "stiffness matrix is not positive definite; the boundary conditions probably leave "
    "rigid or micro-distortion modes unconstrained (check Dirichlet and consistent-coupling tags, Lc > 0)";

double rel_residual(const SparseMatrix& K, const Eigen::VectorXd& x, const Eigen::VectorXd& f) {
  const double nf = f.norm();
  const double nr = (f - K.selfadjointView<Eigen::Lower>() * x).norm();
  return nf > 0.0 ? nr / nf : nr;
}

#ifdef RMM_HAVE_CHOLMOD
using DirectSolver = Eigen::CholmodSupernodalLLT<SparseMatrix, Eigen::Lower>;

void configure(DirectSolver& s) {
  cholmod_common& c = s.cholmod();
  c.nmethods = 1;
  c.method[0].ordering = CHOLMOD_AMD;
  c.postorder = 1;
  c.print = 0;
}
#else
using DirectSolver = Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;
void configure(DirectSolver&) {}
#endif

}  // namespace

std::string to_string(SolveMethod m) { return m == SolveMethod::direct ? "direct" : "cg"; }

SolveMethod parse_solve_method(const std::string& s) {
  if (s == "direct") return SolveMethod::direct;
  if (s == "cg") return SolveMethod::cg;
  throw ParameterError("unknown solver method '" + s + "' (valid: direct, cg)");
}

std::string direct_backend() {
#ifdef RMM_HAVE_CHOLMOD
  return "cholmod-supernodal-llt";
#else
  return "simplicial-llt";
#endif
}

SolveResult solve_spd(const SparseMatrix& K, const Eigen::VectorXd& f, const SolverSettings& s) {
  if (K.rows() != K.cols() || K.rows() != f.size()) throw SolverError("solve_spd: size mismatch");
  const auto t0 = std::chrono::steady_clock::now();
  SolveResult out;
  out.report.method = s.method;
  const Eigen::Index n = K.rows();
  if (n == 0) {
    out.x.resize(0);
    out.report.backend = "empty";
    return out;
  }

  if (s.method == SolveMethod::direct) {
    out.report.backend = direct_backend();
    DirectSolver llt;
    configure(llt);
    llt.compute(K);
    if (llt.info() != Eigen::Success) throw SolverError(kIndefinite);
    out.x = llt.solve(f);
    for (int it = 0; it < 3; ++it) {
      const Eigen::VectorXd r = f - K.selfadjointView<Eigen::Lower>() * out.x;
      if (r.norm() <= 1e-15 * f.norm()) break;
      out.x += llt.solve(r);
    }
    if (!out.x.allFinite()) throw SolverError(kIndefinite);
  } else {
    out.report.backend = "cg-diagonal";
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
    cg.setTolerance(s.tolerance);
    cg.setMaxIterations(s.max_iterations > 0 ? s.max_iterations : static_cast<int>(10 * n));
    cg.compute(K);
    out.x = cg.solve(f);
    out.report.iterations = static_cast<int>(cg.iterations());
    if (cg.info() != Eigen::Success)
      throw SolverError("conjugate gradient did not converge in " + std::to_string(cg.iterations()) +
                        " iterations (estimated error " + std::to_string(cg.error()) + ")");
  }
  out.report.relative_residual = rel_residual(K, out.x, f);
  out.report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double limit = s.method == SolveMethod::direct ? std::max(s.tolerance, 1e-10) : 10.0 * s.tolerance;
  if (!(out.report.relative_residual <= limit))
    throw SolverError("relative residual " + std::to_string(out.report.relative_residual) +
                      " exceeds tolerance");
  return out;
}

double smallest_ritz_value(const SparseMatrix& K, int steps, std::uint64_t seed) {
  const Eigen::Index n = K.rows();
  if (n == 0) throw SolverError("smallest_ritz_value: empty matrix");
  const int m = static_cast<int>(std::min<Eigen::Index>(steps, n));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd V(n, m);
  Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(n, [&] { return nd(rng); });
  v.normalize();
  std::vector<double> alpha, beta;
  int used = 0;
  for (int j = 0; j < m; ++j) {
    V.col(j) = v;
    Eigen::VectorXd w = K.selfadjointView<Eigen::Lower>() * v;
    alpha.push_back(v.dot(w));
    for (int pass = 0; pass < 2; ++pass) w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
    used = j + 1;
    const double b = w.norm();
    if (j + 1 == m || b < 1e-14 * std::abs(alpha.front())) break;
    beta.push_back(b);
    v = w / b;
  }
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(used, used);
  for (int j = 0; j < used; ++j) {
    T(j, j) = alpha[j];
    if (j + 1 < used) T(j, j + 1) = T(j + 1, j) = beta[j];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

bool is_positive_definite(const SparseMatrix& K) {
  DirectSolver llt;
  configure(llt);
  llt.compute(K);
  return llt.info() == Eigen::Success;
}

}  // namespace rmm
