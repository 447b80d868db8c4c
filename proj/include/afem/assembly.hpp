#pragma once

#include <Eigen/SparseCore>
#include <functional>
#include <iosfwd>
#include <vector>

#include "afem/field.hpp"
#include "afem/splines.hpp"

namespace afem {

enum class Mode { conforming, nitsche };

const char* to_string(Mode m);
Mode parse_mode(const std::string& s);

/// Stabilization default 10 (r+1)^4, used when gamma1/gamma2 are left at 0.
double default_gamma(int degree);

struct FormParams {
  Mode mode = Mode::conforming;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  int quad_n = 0;  // 0 selects degree + 2

  /// Copy with defaults filled in for the given degree. Throws
  /// ConfigurationError on non-positive stabilization in Nitsche mode.
  FormParams resolved(int degree) const;
};

using SystemMatrix = Eigen::SparseMatrix<double>;
using Source = std::function<double(Point)>;

struct LinearSystem {
  SystemMatrix matrix;
  Eigen::VectorXd load;
  /// Space dof of every system row.
  std::vector<std::size_t> dofs;
};

/// Assembles a(.,.) on the conforming subspace, or the Nitsche form a_P on
/// the full space, together with the load (f, B). Throws ConfigurationError
/// if the conforming subspace is empty.
LinearSystem assemble(const HierarchicalSpace& s, const Source& f, const FormParams& params);

/// Space coefficients from a system solution (zero outside the system dofs).
std::vector<double> expand(const LinearSystem& sys, const Eigen::VectorXd& x, std::size_t dim);

/// Coordinate triplets `row col value`, sorted by (row, col).
void write_triplets(std::ostream& os, const SystemMatrix& a);

/// Direct evaluation of a(u,v) or a_P(u,v) for two splines on one space.
double bilinear_form(const SplineFunction& u, const SplineFunction& v, const FormParams& params);

/// Cellwise polynomials of tensor degree r-2.
struct PiecewisePoly {
  int degree = 0;
  std::vector<TensorPoly> cells;
};

/// L2-orthogonal projection of the Laplacian onto cellwise polynomials of
/// tensor degree r-2.
PiecewisePoly project_laplacian(const SplineFunction& fn);

enum class TraceNorm {
  value_3_2,   // sum h^-3 ||v||^2 over boundary edges
  normal_1_2,  // sum h^-1 ||dv/dnu||^2 over boundary edges
};

double mesh_norm(const Field& f, TraceNorm kind, const Partition& p, int quad_n);
/// ||Laplacian f||_{L2}.
double energy_norm(const Field& f, const Partition& p, int quad_n);
/// sqrt(||Lap f||^2 + gamma1 ||f||_{3/2,P}^2 + gamma2 ||f_nu||_{1/2,P}^2).
double triple_norm(const Field& f, const Partition& p, const FormParams& params, int degree);
/// H^2 seminorm over a subset of cells.
double h2_seminorm(const Field& f, const Partition& p, std::span<const std::size_t> cells, int quad_n);

/// <E_P, v> = int_Gamma (d/dnu Pi(Lap u) - d/dnu Lap u) v - (Pi(Lap u) - Lap u) dv/dnu,
/// with Pi(Lap u) projected per boundary cell from quadrature samples.
double inconsistency_apply(const Analytic& u, const SplineFunction& v, int quad_n = 0);

/// <E_P, B_lambda> for every basis function, so <E_P, v> = g . coefficients.
std::vector<double> inconsistency_functional(const Analytic& u, const HierarchicalSpace& s, int quad_n = 0);

/// |||B_lambda|||_P^2 for every basis function.
std::vector<double> triple_norm_diagonal(const HierarchicalSpace& s, const FormParams& params);

}  // namespace afem
