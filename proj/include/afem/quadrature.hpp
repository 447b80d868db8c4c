#pragma once

#include <vector>

#include "afem/mesh.hpp"

namespace afem {

struct QuadratureRule {
  std::vector<Point> points;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

/// n-point Gauss-Legendre nodes and weights on [0,1].
struct GaussLegendre1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussLegendre1D& gauss_legendre(int n);

/// Tensor rule on the reference square [0,1]^2.
QuadratureRule gauss_reference_square(int n);
/// Tensor rule mapped onto a cell; exact for degree <= 2n-1 in each variable.
QuadratureRule gauss_cell(const Cell& c, int n);
/// Gauss rule along an edge; exact for univariate degree <= 2n-1.
QuadratureRule gauss_edge(const Edge& e, int n);

}  // namespace afem
