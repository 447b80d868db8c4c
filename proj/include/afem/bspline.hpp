#pragma once

#include <span>
#include <utility>
#include <vector>

namespace afem::bspline {

/// Open-uniform B-spline basis of degree r on 2^level equal cells of [0,1],
/// with maximal smoothness C^{r-1} at interior knots. Function k has support
/// on cells max(0,k-r) .. min(cells-1,k).
class LevelBasis {
 public:
  LevelBasis(int level, int degree);

  int level() const { return level_; }
  int degree() const { return degree_; }
  int cells() const { return cells_; }
  int size() const { return cells_ + degree_; }
  double knot(int q) const;
  int first_cell(int k) const { return k - degree_ < 0 ? 0 : k - degree_; }
  int last_cell(int k) const { return k < cells_ - 1 ? k : cells_ - 1; }

  /// Monomial coefficients, in the local coordinate s in [0,1] of `cell`, of
  /// function cell + a (0 <= a <= r).
  std::span<const double> piece(int cell, int a) const;

  /// Value or derivative (in x) of function k at x, evaluated from the right
  /// except at x = 1. Slow reference path used by tests.
  double eval(int k, double x, int derivative = 0) const;

 private:
  int level_;
  int degree_;
  int cells_;
  std::vector<double> pieces_;
};

/// Two-scale relation between consecutive levels: row k lists the fine
/// functions j and coefficients a with B_k^coarse = sum_j a_j B_j^fine.
using Refinement = std::vector<std::vector<std::pair<int, double>>>;
Refinement refinement(const LevelBasis& coarse, const LevelBasis& fine);

/// Derivatives 0..nd of the degree-r B-splines nonzero on knot span `span`
/// at x: ders[d][a] belongs to function span - r + a.
std::vector<std::vector<double>> basis_derivatives(std::span<const double> knots, int span, int degree,
                                                   double x, int nd);

}  // namespace afem::bspline
