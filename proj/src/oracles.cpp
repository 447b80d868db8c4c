#include "afem/oracles.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "afem/quadrature.hpp"

namespace afem::oracles {

namespace {

// k-th derivative of sin^2(pi t).
double sin2_derivative(double t, int k) {
  constexpr double pi = std::numbers::pi;
  const double w = 2.0 * pi * t;
  switch (k) {
    case 0: return std::sin(pi * t) * std::sin(pi * t);
    case 1: return pi * std::sin(w);
    case 2: return 2.0 * pi * pi * std::cos(w);
    case 3: return -4.0 * pi * pi * pi * std::sin(w);
    case 4: return -8.0 * pi * pi * pi * pi * std::cos(w);
    default: throw std::domain_error("sin2 derivative order above 4");
  }
}

double binomial(int n, int k) {
  double b = 1.0;
  for (int i = 0; i < k; ++i) b = b * (n - i) / (i + 1);
  return b;
}

}  // namespace

ManufacturedProblem manufactured_sin2() {
  ManufacturedProblem p;
  p.name = "sin2";
  p.u = [](Point x, MultiIndex d) {
    if (d.dx < 0 || d.dy < 0 || d.order() > 4) throw std::domain_error("sin2: unsupported derivative order");
    return sin2_derivative(x.x, d.dx) * sin2_derivative(x.y, d.dy);
  };
  p.f = [](Point x) {
    return sin2_derivative(x.x, 4) * sin2_derivative(x.y, 0) +
           2.0 * sin2_derivative(x.x, 2) * sin2_derivative(x.y, 2) +
           sin2_derivative(x.x, 0) * sin2_derivative(x.y, 4);
  };
  return p;
}

namespace {

double central(const std::function<double(Point)>& g, Point x, MultiIndex a, double h) {
  // Product of 1D central differences of orders dx, dy, stencil offsets (k/2 - i) h.
  double sum = 0.0;
  for (int i = 0; i <= a.dx; ++i)
    for (int j = 0; j <= a.dy; ++j) {
      const double cx = ((i % 2) ? -1.0 : 1.0) * binomial(a.dx, i);
      const double cy = ((j % 2) ? -1.0 : 1.0) * binomial(a.dy, j);
      const Point y{x.x + (0.5 * a.dx - i) * h, x.y + (0.5 * a.dy - j) * h};
      sum += cx * cy * g(y);
    }
  return sum / std::pow(h, a.order());
}

FdCheck finish(double analytic, const std::function<double(Point)>& g, Point x, MultiIndex a, double step,
               int accuracy) {
  FdCheck out;
  out.analytic = analytic;
  if (accuracy == 4) {
    const double coarse = central(g, x, a, step);
    const double fine = central(g, x, a, 0.5 * step);
    out.numeric = (4.0 * fine - coarse) / 3.0;
  } else {
    out.numeric = central(g, x, a, step);
  }
  out.gap = std::abs(out.analytic - out.numeric);
  return out;
}

}  // namespace

FdCheck fd_check(const Analytic& fn, Point x, MultiIndex alpha, double step, int accuracy) {
  const auto g = [&](Point y) { return fn(y, {}); };
  return finish(fn(x, alpha), g, x, alpha, step, accuracy);
}

FdCheck fd_check(const SplineFunction& fn, Point x, MultiIndex alpha, double step, int accuracy) {
  const Partition& p = fn.space().partition();
  const Cell& c = p.cell(p.locate(x));
  const double rx = 0.5 * alpha.dx * step, ry = 0.5 * alpha.dy * step;
  if (x.x - rx <= c.x0() || x.x + rx >= c.x0() + c.side() || x.y - ry <= c.y0() ||
      x.y + ry >= c.y0() + c.side())
    throw std::domain_error("finite-difference stencil crosses a cell boundary");
  const auto g = [&](Point y) { return fn.eval(y); };
  return finish(fn.eval(x, alpha), g, x, alpha, step, accuracy);
}

TensorPoly dense_l2_projection(int degree, const Cell& cell, const std::function<double(Point)>& v, int quad_n) {
  const int n = degree + 1;
  const QuadratureRule rule = gauss_reference_square(quad_n);
  const int m = n * n;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Point s = rule.points[q];
    Eigen::VectorXd mono(m);
    for (int p = 0; p < n; ++p)
      for (int r = 0; r < n; ++r) mono(p * n + r) = std::pow(s.x, p) * std::pow(s.y, r);
    gram += rule.weights[q] * mono * mono.transpose();
    rhs += rule.weights[q] * v(cell.to_global(s)) * mono;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  if (!lu.isInvertible()) throw std::runtime_error("singular monomial Gram matrix");
  const Eigen::VectorXd c = lu.solve(rhs);
  TensorPoly out(degree);
  for (int p = 0; p < n; ++p)
    for (int r = 0; r < n; ++r) out(p, r) = c(p * n + r);
  return out;
}

Eigen::MatrixXd gram_matrix(const HierarchicalSpace& s, int quad_n) {
  if (quad_n <= 0) quad_n = s.degree() + 1;
  const Partition& p = s.partition();
  const auto dim = static_cast<Eigen::Index>(s.dim());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(dim, dim);
  const QuadratureRule ref = gauss_reference_square(quad_n);
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double area = p.cell(k).area();
    const auto dofs = s.cell_dofs(k);
    const auto polys = s.cell_basis_polys(k);
    for (std::size_t q = 0; q < ref.size(); ++q) {
      std::vector<double> vals(dofs.size());
      for (std::size_t a = 0; a < dofs.size(); ++a) vals[a] = polys[a].eval(ref.points[q].x, ref.points[q].y);
      const double w = ref.weights[q] * area;
      for (std::size_t a = 0; a < dofs.size(); ++a)
        for (std::size_t b = 0; b < dofs.size(); ++b)
          g(static_cast<Eigen::Index>(dofs[a].dof), static_cast<Eigen::Index>(dofs[b].dof)) += w * vals[a] * vals[b];
    }
  }
  return g;
}

Eigen::MatrixXd global_dual_basis(const HierarchicalSpace& s) {
  if (s.dim() > 200) throw std::invalid_argument("global dual basis limited to dimension 200");
  const Eigen::MatrixXd g = gram_matrix(s);
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) throw std::runtime_error("Gram matrix is not positive definite");
  return llt.solve(Eigen::MatrixXd::Identity(g.rows(), g.cols()));
}

SplineFunction global_quasi_interpolant(const SpaceHandle& s, const Eigen::MatrixXd& duals,
                                        const std::function<double(Point)>& f) {
  const Partition& p = s->partition();
  const int n = s->degree() + 3;
  const QuadratureRule ref = gauss_reference_square(n);
  Eigen::VectorXd moments = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s->dim()));
  for (std::size_t k = 0; k < p.size(); ++k) {
    const Cell& c = p.cell(k);
    const auto dofs = s->cell_dofs(k);
    const auto polys = s->cell_basis_polys(k);
    for (std::size_t q = 0; q < ref.size(); ++q) {
      const double w = ref.weights[q] * c.area() * f(c.to_global(ref.points[q]));
      for (std::size_t a = 0; a < dofs.size(); ++a)
        moments(static_cast<Eigen::Index>(dofs[a].dof)) += w * polys[a].eval(ref.points[q].x, ref.points[q].y);
    }
  }
  const Eigen::VectorXd c = duals * moments;
  return SplineFunction(s, std::vector<double>(c.data(), c.data() + c.size()));
}

}  // namespace afem::oracles
