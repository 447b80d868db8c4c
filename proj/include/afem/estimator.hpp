#pragma once

#include <span>
#include <vector>

#include "afem/assembly.hpp"
#include "afem/splines.hpp"

namespace afem {

/// Squared residual indicator of one cell and its parts.
struct CellIndicator {
  double eta_sq = 0.0;
  double interior_sq = 0.0;  // h^4 ||f - Lap^2 V||^2
  double jump1_sq = 0.0;     // h^3 ||[d/dn Lap V]||^2, half of every interior facet
  double jump2_sq = 0.0;     // h   ||[Lap V]||^2, half of every interior facet
  double osc_sq = 0.0;       // h^4 ||f - fbar||^2
};

struct Indicators {
  std::vector<CellIndicator> cells;  // partition order
  double total_sq = 0.0;
  double osc_total_sq = 0.0;

  /// Sum of eta_sq over a set of cell indices.
  double sum_over(std::span<const std::size_t> cells) const;
};

/// Residual estimator for a spline V with source f. Each interior edge is
/// shared between its two owners; the owner tau receives
/// 1/2 (h_tau^3 ||[d/dn Lap V]||^2 + h_tau ||[Lap V]||^2) from it.
class ResidualEstimator {
 public:
  ResidualEstimator(const SplineFunction& v, Source f, int quad_n = 0);

  CellIndicator cell(std::size_t k) const;
  Indicators all() const;

 private:
  void add_edge(const Edge& e, std::size_t owner, CellIndicator& out) const;
  void add_interior(std::size_t k, CellIndicator& out) const;

  const Partition* partition_;
  int degree_;
  int quad_n_;
  Source f_;
  std::vector<TensorPoly> lap_;     // Laplacian per cell
  std::vector<TensorPoly> bilap_;   // bilaplacian per cell
  EdgeSet edges_;
  std::vector<std::vector<std::size_t>> cell_edges_;  // interior edges per cell
  SpaceHandle space_;
};

CellIndicator indicator(const SplineFunction& v, const Source& f, std::size_t cell, int quad_n = 0);
Indicators estimate_all(const SplineFunction& v, const Source& f, int quad_n = 0);

/// h^2 ||f - fbar||_{L2(cell)}, fbar the L2 projection onto tensor degree r-2.
double oscillation(const Source& f, const Cell& cell, int degree, int quad_n = 0);

struct MarkedSet {
  std::vector<std::size_t> indices;  // partition indices, in marking order
  std::vector<Cell> cells;
  double theta = 0.0;
  double achieved_fraction = 0.0;
};

/// Smallest prefix of the cells sorted by decreasing eta^2 (ties by cell key)
/// whose sum reaches theta times the total. Empty when the total is zero.
MarkedSet dorfler_mark(const Indicators& ind, const Partition& p, double theta);

struct LipschitzSample {
  double gap = 0.0;        // |eta(V,tau) - eta(W,tau)|
  double bound_arg = 0.0;  // |V - W|_{H^2(extension of tau)}
};

LipschitzSample lipschitz_gap(const SplineFunction& v, const SplineFunction& w, const Source& f, std::size_t cell,
                              int quad_n = 0);

void write_indicators(std::ostream& os, const Partition& p, const Indicators& ind);

}  // namespace afem
