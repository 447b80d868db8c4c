#include "afem/bspline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace afem::bspline {

std::vector<std::vector<double>> basis_derivatives(std::span<const double> U, int span, int p, double x,
                                                   int nd) {
  // Piegl & Tiller, algorithm A2.3.
  std::vector<std::vector<double>> ndu(p + 1, std::vector<double>(p + 1, 0.0));
  std::vector<double> left(p + 1), right(p + 1);
  ndu[0][0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - U[span + 1 - j];
    right[j] = U[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];
      const double temp = ndu[r][j - 1] / ndu[j][r];
      ndu[r][j] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[j][j] = saved;
  }
  std::vector<std::vector<double>> ders(nd + 1, std::vector<double>(p + 1, 0.0));
  for (int j = 0; j <= p; ++j) ders[0][j] = ndu[j][p];
  std::vector<std::vector<double>> a(2, std::vector<double>(p + 1, 0.0));
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a[0][0] = 1.0;
    for (int k = 1; k <= std::min(nd, p); ++k) {
      double d = 0.0;
      const int rk = r - k, pk = p - k;
      if (r >= k) {
        a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
        d = a[s2][0] * ndu[rk][pk];
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
        d += a[s2][j] * ndu[rk + j][pk];
      }
      if (r <= pk) {
        a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
        d += a[s2][k] * ndu[r][pk];
      }
      ders[k][r] = d;
      std::swap(s1, s2);
    }
  }
  double factor = p;
  for (int k = 1; k <= std::min(nd, p); ++k) {
    for (int j = 0; j <= p; ++j) ders[k][j] *= factor;
    factor *= (p - k);
  }
  return ders;
}

namespace {

std::vector<double> make_knots(int cells, int degree) {
  std::vector<double> t(cells + 2 * degree + 1);
  for (int q = 0; q < static_cast<int>(t.size()); ++q) {
    const int c = std::clamp(q - degree, 0, cells);
    t[q] = static_cast<double>(c) / cells;
  }
  return t;
}

}  // namespace

LevelBasis::LevelBasis(int level, int degree) : level_(level), degree_(degree), cells_(1 << level) {
  if (degree < 1) throw std::invalid_argument("B-spline degree must be positive");
  const int n = degree + 1;
  const auto t = make_knots(cells_, degree);
  const double h = 1.0 / cells_;
  pieces_.assign(static_cast<std::size_t>(cells_) * n * n, 0.0);
  // Interior cells share one shape; compute boundary cells individually.
  auto fill = [&](int c) {
    const int span = degree + c;
    const auto ders = basis_derivatives(t, span, degree, t[span], degree);
    double scale = 1.0;  // h^d / d!
    for (int d = 0; d <= degree; ++d) {
      for (int a = 0; a < n; ++a) pieces_[(static_cast<std::size_t>(c) * n + a) * n + d] = ders[d][a] * scale;
      scale *= h / (d + 1);
    }
  };
  const int interior_lo = std::min(degree, cells_);
  const int interior_hi = std::max(interior_lo, cells_ - degree);
  for (int c = 0; c < interior_lo; ++c) fill(c);
  for (int c = interior_hi; c < cells_; ++c) fill(c);
  if (interior_lo < interior_hi) {
    fill(interior_lo);
    for (int c = interior_lo + 1; c < interior_hi; ++c)
      std::copy_n(pieces_.begin() + static_cast<std::ptrdiff_t>(interior_lo) * n * n, n * n,
                  pieces_.begin() + static_cast<std::ptrdiff_t>(c) * n * n);
  }
}

double LevelBasis::knot(int q) const {
  const int c = std::clamp(q - degree_, 0, cells_);
  return static_cast<double>(c) / cells_;
}

std::span<const double> LevelBasis::piece(int cell, int a) const {
  const int n = degree_ + 1;
  return std::span<const double>(pieces_).subspan((static_cast<std::size_t>(cell) * n + a) * n, n);
}

double LevelBasis::eval(int k, double x, int derivative) const {
  const auto t = make_knots(cells_, degree_);
  int c = std::clamp(static_cast<int>(std::floor(x * cells_)), 0, cells_ - 1);
  const int a = k - c;
  if (a < 0 || a > degree_ || derivative > degree_) return 0.0;
  const auto ders = basis_derivatives(t, degree_ + c, degree_, x, derivative);
  return ders[derivative][a];
}

Refinement refinement(const LevelBasis& coarse, const LevelBasis& fine) {
  if (fine.level() != coarse.level() + 1 || fine.degree() != coarse.degree())
    throw std::invalid_argument("refinement needs consecutive levels of equal degree");
  const int r = coarse.degree();
  Refinement out(coarse.size());
  // Oslo algorithm: alpha_{.,j} = R_1(tau_{j+1}) ... R_r(tau_{j+r}).
  for (int j = 0; j < fine.size(); ++j) {
    const double tj = fine.knot(j);
    int mu = r + std::clamp(static_cast<int>(std::floor(tj * coarse.cells() + 1e-12)), 0, coarse.cells() - 1);
    // knot spans are half-open [t_mu, t_mu+1); tau_j equals some knot exactly
    std::vector<double> b{1.0};
    for (int k = 1; k <= r; ++k) {
      const double x = fine.knot(j + k);
      std::vector<double> nb(k + 1, 0.0);
      for (int row = 0; row < k; ++row) {
        const int i = mu - k + 1 + row;
        const double denom = coarse.knot(i + k) - coarse.knot(i);
        const double w = (x - coarse.knot(i)) / denom;
        nb[row] += (1.0 - w) * b[row];
        nb[row + 1] += w * b[row];
      }
      b = std::move(nb);
    }
    for (int a = 0; a <= r; ++a) {
      if (b[a] != 0.0) out[mu - r + a].emplace_back(j, b[a]);
    }
  }
  return out;
}

}  // namespace afem::bspline
