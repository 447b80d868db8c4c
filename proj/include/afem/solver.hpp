#pragma once

#include <Eigen/Dense>
#include <string>

#include "afem/assembly.hpp"

namespace afem {

enum class SolveMethod { direct, conjugate_gradient };

SolveMethod parse_solve_method(const std::string& s);
const char* to_string(SolveMethod m);

struct SolveOptions {
  SolveMethod method = SolveMethod::direct;
  double tol = 1e-10;  // relative residual target for CG
  int max_iter = 20000;

  void validate() const;
};

/// Solves A x = b for symmetric positive definite A. The direct path uses a
/// sparse LDL^T factorization with AMD ordering followed by iterative
/// refinement; a non-positive pivot raises SolverError naming the row.
Eigen::VectorXd solve(const SystemMatrix& a, const Eigen::VectorXd& b, const SolveOptions& opts = {});

/// ||A x - b|| / ||b|| (0 when b = 0 and x solves exactly).
double relative_residual(const SystemMatrix& a, const Eigen::VectorXd& x, const Eigen::VectorXd& b);

}  // namespace afem
