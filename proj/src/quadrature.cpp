#include "afem/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace afem {

namespace {

GaussLegendre1D compute_gauss_legendre(int n) {
  GaussLegendre1D rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  // Newton iteration on P_n over [-1,1], then map to [0,1].
  for (int k = 0; k < (n + 1) / 2; ++k) {
    double x = std::cos(std::numbers::pi * (k + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int m = 2; m <= n; ++m) {
        const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (int m = 2; m <= n; ++m) {
      const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[k] = 0.5 * (1.0 - x);
    rule.nodes[n - 1 - k] = 0.5 * (1.0 + x);
    rule.weights[k] = rule.weights[n - 1 - k] = 0.5 * w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.5;
  return rule;
}

}  // namespace

const GaussLegendre1D& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("quadrature needs at least one point");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussLegendre1D>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussLegendre1D>(compute_gauss_legendre(n));
  return *slot;
}

QuadratureRule gauss_reference_square(int n) {
  const auto& g = gauss_legendre(n);
  QuadratureRule rule;
  rule.points.reserve(n * n);
  rule.weights.reserve(n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      rule.points.push_back({g.nodes[a], g.nodes[b]});
      rule.weights.push_back(g.weights[a] * g.weights[b]);
    }
  return rule;
}

QuadratureRule gauss_cell(const Cell& c, int n) {
  QuadratureRule rule = gauss_reference_square(n);
  const double area = c.area();
  for (std::size_t q = 0; q < rule.size(); ++q) {
    rule.points[q] = c.to_global(rule.points[q]);
    rule.weights[q] *= area;
  }
  return rule;
}

QuadratureRule gauss_edge(const Edge& e, int n) {
  const auto& g = gauss_legendre(n);
  QuadratureRule rule;
  for (int a = 0; a < n; ++a) {
    rule.points.push_back(e.at(g.nodes[a]));
    rule.weights.push_back(g.weights[a] * e.length);
  }
  return rule;
}

}  // namespace afem
