#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

#include "afem/field.hpp"
#include "afem/splines.hpp"

namespace afem::oracles {

/// Closed-form solution of the clamped biharmonic problem with its source.
struct ManufacturedProblem {
  std::string name;
  Analytic u;  // partial derivatives up to total order 4
  std::function<double(Point)> f;

  double value(Point x) const { return u(x, {}); }
  double laplacian(Point x) const { return u(x, {2, 0}) + u(x, {0, 2}); }
  std::array<double, 2> gradient(Point x) const { return {u(x, {1, 0}), u(x, {0, 1})}; }
  std::array<double, 2> grad_laplacian(Point x) const {
    return {u(x, {3, 0}) + u(x, {1, 2}), u(x, {2, 1}) + u(x, {0, 3})};
  }
};

/// u = sin^2(pi x) sin^2(pi y).
ManufacturedProblem manufactured_sin2();

struct FdCheck {
  double analytic = 0.0;
  double numeric = 0.0;
  double gap = 0.0;  // |analytic - numeric|
};

/// Central difference of order |alpha| applied to fn(., {0,0}), compared with
/// fn(x, alpha). accuracy 2 uses one step; accuracy 4 adds a Richardson step.
FdCheck fd_check(const Analytic& fn, Point x, MultiIndex alpha, double step, int accuracy = 2);

/// Same for a spline; the stencil must stay inside the cell containing x,
/// otherwise std::domain_error.
FdCheck fd_check(const SplineFunction& fn, Point x, MultiIndex alpha, double step, int accuracy = 2);

/// L2 projection onto tensor monomials of the given degree on one cell,
/// solved from the dense monomial Gram matrix. Coefficients refer to the
/// cell-local coordinates.
TensorPoly dense_l2_projection(int degree, const Cell& cell, const std::function<double(Point)>& v, int quad_n);

/// Rows are the global dual functions psi_lambda = sum_mu D(lambda, mu) B_mu,
/// from inverting the full Gram matrix. Dimension must not exceed 200.
Eigen::MatrixXd global_dual_basis(const HierarchicalSpace& s);

/// Full Gram matrix (B_lambda, B_mu) of a small space.
Eigen::MatrixXd gram_matrix(const HierarchicalSpace& s, int quad_n = 0);

/// Quasi-interpolant built from the global duals.
SplineFunction global_quasi_interpolant(const SpaceHandle& s, const Eigen::MatrixXd& duals,
                                        const std::function<double(Point)>& f);

}  // namespace afem::oracles
