#pragma once

#include <functional>
#include <vector>

#include "afem/mesh.hpp"

namespace afem {

/// Partial derivative order (d/dx)^dx (d/dy)^dy.
struct MultiIndex {
  int dx = 0;
  int dy = 0;
  int order() const { return dx + dy; }
  auto operator<=>(const MultiIndex&) const = default;
};

/// Bivariate polynomial sum c[p][q] s^p t^q with p, q <= degree, in the local
/// coordinates (s, t) in [0,1]^2 of some cell.
class TensorPoly {
 public:
  TensorPoly() = default;
  explicit TensorPoly(int degree) : degree_(degree), c_((degree + 1) * (degree + 1), 0.0) {}
  /// Outer product of two univariate coefficient vectors of equal length.
  static TensorPoly outer(std::span<const double> x, std::span<const double> y);

  int degree() const { return degree_; }
  double& operator()(int p, int q) { return c_[p * (degree_ + 1) + q]; }
  double operator()(int p, int q) const { return c_[p * (degree_ + 1) + q]; }
  std::span<const double> coefficients() const { return c_; }

  double eval(double s, double t) const;
  /// Local-coordinate derivative.
  TensorPoly derivative(MultiIndex d) const;
  /// Copy raised to a larger storage degree (zero padded).
  TensorPoly padded(int degree) const;
  /// The same polynomial expressed on the sub-square [s0, s0+w] x [t0, t0+w].
  TensorPoly restricted(double s0, double t0, double w) const;

  TensorPoly& operator+=(const TensorPoly& o);
  TensorPoly& axpy(double a, const TensorPoly& o);
  TensorPoly& operator*=(double a);

 private:
  int degree_ = 0;
  std::vector<double> c_;
};

/// Evaluates the global derivative of a cell-local polynomial at a global point.
double eval_on_cell(const TensorPoly& p, const Cell& c, Point x, MultiIndex d);
/// Global-coordinate Laplacian of a cell-local polynomial, as a local polynomial.
TensorPoly laplacian_on_cell(const TensorPoly& p, const Cell& c);
/// Global-coordinate bilaplacian of a cell-local polynomial.
TensorPoly bilaplacian_on_cell(const TensorPoly& p, const Cell& c);

/// Monomial coefficients of the shifted Legendre polynomial P_k(2s-1).
std::vector<double> shifted_legendre(int k);

/// L2-orthogonal projection onto tensor polynomials of the given degree on the
/// reference square, from a function of local coordinates, using an n-point
/// Gauss rule per direction.
TensorPoly project_local(int degree, const std::function<double(double, double)>& f, int n);

}  // namespace afem
