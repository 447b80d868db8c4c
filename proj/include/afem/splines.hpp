#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "afem/bspline.hpp"
#include "afem/mesh.hpp"
#include "afem/polynomial.hpp"

namespace afem {

/// Tensor B-spline (kx, ky) of the uniform grid at `level`.
struct BasisIndex {
  int level = 0;
  int kx = 0;
  int ky = 0;
  auto operator<=>(const BasisIndex&) const = default;
};

/// Restriction of one active basis function to one active cell, as
/// coefficients of the (r+1)^2 tensor B-splines of the cell's level that are
/// nonzero there. Entry a*(r+1)+b multiplies function (cell.i+a, cell.j+b).
struct CellDof {
  std::size_t dof = 0;
  std::vector<double> local;
};

/// Hierarchical tensor B-spline space on a graded quadtree. Active functions
/// are selected level by level (a level-l function is active when its
/// support is covered by level-l tree nodes and touches an active level-l
/// cell). With `truncated` the basis is the truncated hierarchical (THB)
/// basis, which forms a partition of unity.
class HierarchicalSpace {
 public:
  const Partition& partition() const { return partition_; }
  int degree() const { return degree_; }
  bool truncated() const { return truncated_; }
  std::size_t dim() const { return basis_.size(); }
  std::span<const BasisIndex> basis() const { return basis_; }

  std::span<const CellDof> cell_dofs(std::size_t cell) const { return cell_dofs_[cell]; }
  /// Active cells (indices into the partition) where the function is nonzero.
  std::span<const std::size_t> support(std::size_t dof) const { return support_[dof]; }
  const bspline::LevelBasis& level_basis(int level) const { return levels_[level]; }

  /// Local polynomial of one cell restriction.
  TensorPoly basis_poly(std::size_t cell, const CellDof& d) const;
  /// Local polynomials of all functions nonzero on `cell`, in cell_dofs order.
  std::vector<TensorPoly> cell_basis_polys(std::size_t cell) const;

 private:
  friend std::shared_ptr<const HierarchicalSpace> build_space(const Partition&, int, bool);
  HierarchicalSpace(const Partition& p, int degree, bool truncated)
      : partition_(p), degree_(degree), truncated_(truncated) {}

  Partition partition_;
  int degree_;
  bool truncated_;
  std::vector<bspline::LevelBasis> levels_;
  std::vector<BasisIndex> basis_;
  std::vector<std::vector<CellDof>> cell_dofs_;
  std::vector<std::vector<std::size_t>> support_;
};

using SpaceHandle = std::shared_ptr<const HierarchicalSpace>;

SpaceHandle build_space(const Partition& p, int degree, bool truncated = true);

/// Indices of basis functions whose trace and normal-derivative trace vanish
/// on the boundary of the unit square.
std::vector<std::size_t> conforming_indices(const HierarchicalSpace& s);

class SplineFunction {
 public:
  SplineFunction(SpaceHandle space, std::vector<double> coefficients);
  static SplineFunction zero(SpaceHandle space);

  const HierarchicalSpace& space() const { return *space_; }
  const SpaceHandle& space_handle() const { return space_; }
  std::span<const double> coefficients() const { return coefficients_; }

  /// Local polynomial on an active cell.
  TensorPoly local(std::size_t cell) const;
  /// Derivative at x, using the polynomial of the given active cell (one-sided
  /// at cell boundaries). Throws std::domain_error for order > 4.
  double eval(std::size_t cell, Point x, MultiIndex d = {}) const;
  /// Derivative at x, using the cell chosen by Partition::locate.
  double eval(Point x, MultiIndex d = {}) const;

 private:
  SpaceHandle space_;
  std::vector<double> coefficients_;
};

/// Linear combination a*f + b*g of two functions on the same space.
SplineFunction combine(double a, const SplineFunction& f, double b, const SplineFunction& g);

/// Local dual functionals: psi_lambda(f) = sum_q weights[q] f(points[q]).
struct DualFunctional {
  std::vector<Point> points;
  std::vector<double> weights;
  double apply(const std::function<double(Point)>& f) const;
};

/// Builds one functional per active function from the least-squares inverse
/// of the Gram matrix of all functions living on that function's support.
std::vector<DualFunctional> local_dual_functionals(const HierarchicalSpace& s, int quad_n = 0);

/// Quasi-interpolant sum_lambda psi_lambda(f) B_lambda.
SplineFunction quasi_interpolant(const SpaceHandle& s, const std::function<double(Point)>& f);
SplineFunction quasi_interpolant(const SpaceHandle& s, std::span<const DualFunctional> duals,
                                 const std::function<double(Point)>& f);

/// Re-expresses fn in a space built on a refinement of its partition.
/// Throws std::invalid_argument when the spaces are not nested.
SplineFunction coarse_to_fine(const SplineFunction& fn, const SpaceHandle& fine);

void save_solution(std::ostream& os, const SplineFunction& fn);
SplineFunction load_solution(std::istream& is);

}  // namespace afem
