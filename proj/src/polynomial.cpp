#include "afem/polynomial.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

#include "afem/quadrature.hpp"

namespace afem {

namespace {

double horner(std::span<const double> c, double s) {
  double v = 0.0;
  for (std::size_t p = c.size(); p-- > 0;) v = v * s + c[p];
  return v;
}

double falling(int p, int k) {
  double f = 1.0;
  for (int m = 0; m < k; ++m) f *= (p - m);
  return f;
}

}  // namespace

TensorPoly TensorPoly::outer(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  TensorPoly out(static_cast<int>(x.size()) - 1);
  for (std::size_t p = 0; p < x.size(); ++p)
    for (std::size_t q = 0; q < y.size(); ++q) out(p, q) = x[p] * y[q];
  return out;
}

double TensorPoly::eval(double s, double t) const {
  const int n = degree_ + 1;
  double v = 0.0;
  for (int p = n; p-- > 0;) {
    v = v * s + horner(std::span<const double>(c_).subspan(p * n, n), t);
  }
  return v;
}

TensorPoly TensorPoly::derivative(MultiIndex d) const {
  TensorPoly out(degree_);
  for (int p = d.dx; p <= degree_; ++p)
    for (int q = d.dy; q <= degree_; ++q)
      out(p - d.dx, q - d.dy) = (*this)(p, q) * falling(p, d.dx) * falling(q, d.dy);
  return out;
}

TensorPoly TensorPoly::padded(int degree) const {
  if (degree < degree_) throw std::invalid_argument("cannot pad to a lower degree");
  TensorPoly out(degree);
  for (int p = 0; p <= degree_; ++p)
    for (int q = 0; q <= degree_; ++q) out(p, q) = (*this)(p, q);
  return out;
}

TensorPoly TensorPoly::restricted(double s0, double t0, double w) const {
  // Substitute s = s0 + w u; binomial expansion per variable.
  const int n = degree_ + 1;
  std::vector<std::vector<double>> basis_s(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> basis_t(n, std::vector<double>(n, 0.0));
  for (int p = 0; p < n; ++p) {
    double binom = 1.0;
    for (int k = 0; k <= p; ++k) {
      basis_s[p][k] = binom * std::pow(s0, p - k) * std::pow(w, k);
      basis_t[p][k] = binom * std::pow(t0, p - k) * std::pow(w, k);
      binom = binom * (p - k) / (k + 1);
    }
  }
  TensorPoly out(degree_);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      const double c = (*this)(p, q);
      if (c == 0.0) continue;
      for (int a = 0; a <= p; ++a)
        for (int b = 0; b <= q; ++b) out(a, b) += c * basis_s[p][a] * basis_t[q][b];
    }
  return out;
}

TensorPoly& TensorPoly::operator+=(const TensorPoly& o) { return axpy(1.0, o); }

TensorPoly& TensorPoly::axpy(double a, const TensorPoly& o) {
  if (c_.empty()) *this = TensorPoly(o.degree_);
  if (o.degree_ != degree_) throw std::invalid_argument("degree mismatch in TensorPoly::axpy");
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += a * o.c_[k];
  return *this;
}

TensorPoly& TensorPoly::operator*=(double a) {
  for (double& v : c_) v *= a;
  return *this;
}

double eval_on_cell(const TensorPoly& p, const Cell& c, Point x, MultiIndex d) {
  const Point s = c.to_local(x);
  const double scale = std::ldexp(1.0, c.level * d.order());
  if (d.order() == 0) return p.eval(s.x, s.y);
  return scale * p.derivative(d).eval(s.x, s.y);
}

TensorPoly laplacian_on_cell(const TensorPoly& p, const Cell& c) {
  TensorPoly out = p.derivative({2, 0});
  out += p.derivative({0, 2});
  out *= std::ldexp(1.0, 2 * c.level);
  return out;
}

TensorPoly bilaplacian_on_cell(const TensorPoly& p, const Cell& c) {
  TensorPoly out = p.derivative({4, 0});
  out.axpy(2.0, p.derivative({2, 2}));
  out += p.derivative({0, 4});
  out *= std::ldexp(1.0, 4 * c.level);
  return out;
}

std::vector<double> shifted_legendre(int k) {
  // (m+1) P_{m+1} = (2m+1)(2s-1) P_m - m P_{m-1}
  std::vector<double> p0(k + 1, 0.0), p1(k + 1, 0.0);
  p0[0] = 1.0;
  if (k == 0) return p0;
  p1[0] = -1.0;
  p1[1] = 2.0;
  for (int m = 1; m < k; ++m) {
    std::vector<double> p2(k + 1, 0.0);
    for (int a = 0; a <= m; ++a) {
      p2[a + 1] += (2.0 * m + 1.0) * 2.0 * p1[a];
      p2[a] -= (2.0 * m + 1.0) * p1[a];
      p2[a] -= m * p0[a];
    }
    for (double& v : p2) v /= (m + 1.0);
    p0 = std::move(p1);
    p1 = std::move(p2);
  }
  return p1;
}

TensorPoly project_local(int degree, const std::function<double(double, double)>& f, int n) {
  const auto& g = gauss_legendre(n);
  std::vector<std::vector<double>> leg(degree + 1);
  for (int k = 0; k <= degree; ++k) leg[k] = shifted_legendre(k);
  // values of shifted Legendre polynomials at the nodes
  std::vector<std::vector<double>> lv(degree + 1, std::vector<double>(n));
  for (int k = 0; k <= degree; ++k)
    for (int a = 0; a < n; ++a) lv[k][a] = horner(leg[k], g.nodes[a]);

  std::vector<double> fv(n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) fv[a * n + b] = f(g.nodes[a], g.nodes[b]);

  TensorPoly out(degree);
  for (int k = 0; k <= degree; ++k)
    for (int l = 0; l <= degree; ++l) {
      double m = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          m += g.weights[a] * g.weights[b] * fv[a * n + b] * lv[k][a] * lv[l][b];
      m *= (2.0 * k + 1.0) * (2.0 * l + 1.0);
      for (int p = 0; p <= k; ++p)
        for (int q = 0; q <= l; ++q) out(p, q) += m * leg[k][p] * leg[l][q];
    }
  return out;
}

}  // namespace afem
