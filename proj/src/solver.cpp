#include "afem/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <sstream>
#include <vector>

#include "afem/errors.hpp"

namespace afem {

SolveMethod parse_solve_method(const std::string& s) {
  if (s == "direct") return SolveMethod::direct;
  if (s == "cg") return SolveMethod::conjugate_gradient;
  throw ConfigurationError("unknown solver '" + s + "' (expected direct or cg)");
}

const char* to_string(SolveMethod m) { return m == SolveMethod::direct ? "direct" : "cg"; }

void SolveOptions::validate() const {
  if (!(tol > 0.0 && tol < 1.0)) throw ConfigurationError("solver tolerance must lie in (0, 1)");
  if (max_iter < 1) throw ConfigurationError("solver max_iter must be at least 1");
}

namespace {

// b - A x accumulated in extended precision.
Eigen::VectorXd residual(const SystemMatrix& a, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  std::vector<long double> acc(static_cast<std::size_t>(b.size()));
  for (Eigen::Index k = 0; k < b.size(); ++k) acc[k] = b(k);
  for (Eigen::Index col = 0; col < a.outerSize(); ++col)
    for (SystemMatrix::InnerIterator it(a, col); it; ++it)
      acc[it.row()] -= static_cast<long double>(it.value()) * x(col);
  Eigen::VectorXd r(b.size());
  for (Eigen::Index k = 0; k < b.size(); ++k) r(k) = static_cast<double>(acc[k]);
  return r;
}

}  // namespace

double relative_residual(const SystemMatrix& a, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  const double nb = b.norm();
  const double nr = residual(a, x, b).norm();
  return nb > 0.0 ? nr / nb : nr;
}

Eigen::VectorXd solve(const SystemMatrix& a, const Eigen::VectorXd& b, const SolveOptions& opts) {
  opts.validate();
  if (a.rows() != a.cols() || a.rows() != b.size()) throw std::invalid_argument("solve: dimension mismatch");
  if (b.size() == 0) return Eigen::VectorXd();

  if (opts.method == SolveMethod::conjugate_gradient) {
    Eigen::ConjugateGradient<SystemMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
    cg.setTolerance(opts.tol);
    cg.setMaxIterations(opts.max_iter);
    cg.compute(a);
    Eigen::VectorXd x = cg.solve(b);
    if (cg.info() != Eigen::Success || relative_residual(a, x, b) > opts.tol)
      throw std::runtime_error("conjugate gradient did not reach the requested tolerance");
    return x;
  }

  Eigen::SimplicialLDLT<SystemMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw SolverError("sparse factorization failed", -1);
  const Eigen::VectorXd d = ldlt.vectorD();
  for (Eigen::Index k = 0; k < d.size(); ++k) {
    if (!(d(k) > 0.0)) {
      const Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> inv = ldlt.permutationP().inverse();
      const std::ptrdiff_t row = inv.indices()(k);
      std::ostringstream msg;
      msg << "matrix is not positive definite: pivot " << d(k) << " at row " << row;
      throw SolverError(msg.str(), row);
    }
  }
  Eigen::VectorXd x = ldlt.solve(b);
  double res = relative_residual(a, x, b);
  for (int step = 0; step < 3 && res > 1e-14; ++step) {
    const Eigen::VectorXd dx = ldlt.solve(residual(a, x, b));
    const Eigen::VectorXd candidate = x + dx;
    const double next = relative_residual(a, candidate, b);
    if (!(next < res)) break;
    x = candidate;
    res = next;
  }
  return x;
}

}  // namespace afem
