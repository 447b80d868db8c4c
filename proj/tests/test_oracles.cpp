#include <doctest.h>

#include <afem/assembly.hpp>
#include <afem/oracles.hpp>
#include <afem/quadrature.hpp>
#include <afem/support.hpp>
#include <cmath>
#include <numbers>

#include "helpers.hpp"

using namespace afem;

namespace {

double l2_on(const std::function<double(Point)>& v, const Partition& p, std::span<const std::size_t> cells, int n) {
  double s = 0.0;
  for (std::size_t k : cells) {
    const QuadratureRule rule = gauss_cell(p.cell(k), n);
    for (std::size_t q = 0; q < rule.size(); ++q) s += rule.weights[q] * v(rule.points[q]) * v(rule.points[q]);
  }
  return std::sqrt(s);
}

// max over cells of ||I v||_{L2(tau)} / ||v||_{L2(extension of tau)}
double stability_constant(const SplineFunction& iv, const std::function<double(Point)>& v) {
  const HierarchicalSpace& s = iv.space();
  const Partition& p = s.partition();
  double c = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const std::size_t one[] = {k};
    const double num = l2_on([&](Point x) { return iv.eval(k, x); }, p, one, 8);
    const double den = l2_on(v, p, support_extension(s, k), 8);
    c = std::max(c, num / den);
  }
  return c;
}

}  // namespace

TEST_CASE("manufactured solution") {
  const auto m = oracles::manufactured_sin2();
  CHECK(m.value({0.5, 0.5}) == doctest::Approx(1.0).epsilon(1e-15));
  for (int k = 0; k < 100; ++k) {
    const double t = (k + 0.5) / 100.0;
    for (Point x : {Point{t, 0.0}, Point{t, 1.0}, Point{0.0, t}, Point{1.0, t}}) {
      CHECK(std::abs(m.value(x)) <= 1e-12);
      CHECK(std::abs(m.gradient(x)[0]) <= 1e-12);
      CHECK(std::abs(m.gradient(x)[1]) <= 1e-12);
    }
  }
  testing::Rng rng(61);
  for (int k = 0; k < 50; ++k) {
    const Point x = testing::random_point(rng, 0.05);
    double fd = 0.0;
    for (auto [a, w] : {std::pair{MultiIndex{4, 0}, 1.0}, {MultiIndex{2, 2}, 2.0}, {MultiIndex{0, 4}, 1.0}}) {
      const oracles::FdCheck c = oracles::fd_check(m.u, x, a, 1e-2, 4);
      fd += w * c.numeric;
    }
    CHECK(std::abs(fd - m.f(x)) <= 1e-4 * std::max(1.0, std::abs(m.f(x))));
    const double lap = oracles::fd_check(m.u, x, {2, 0}, 1e-4).numeric + oracles::fd_check(m.u, x, {0, 2}, 1e-4).numeric;
    CHECK(std::abs(lap - m.laplacian(x)) <= 1e-6 * std::max(1.0, std::abs(m.laplacian(x))));
    for (MultiIndex a : {MultiIndex{3, 0}, MultiIndex{1, 2}, MultiIndex{2, 1}, MultiIndex{0, 3}, MultiIndex{1, 1}}) {
      const oracles::FdCheck c = oracles::fd_check(m.u, x, a, 1e-3, 4);
      CHECK(c.gap <= 1e-5 * std::max(1.0, std::abs(c.analytic)));
    }
  }
  CHECK_THROWS_AS(m.u({0.3, 0.3}, {5, 0}), std::domain_error);
}

TEST_CASE("finite-difference checks") {
  const Analytic sq = [](Point x, MultiIndex d) {
    if (d.dy != 0) return 0.0;
    return d.dx == 0 ? x.x * x.x : d.dx == 1 ? 2.0 * x.x : d.dx == 2 ? 2.0 : 0.0;
  };
  const oracles::FdCheck c = oracles::fd_check(sq, {0.3, 0.7}, {2, 0}, 1e-3);
  CHECK(std::abs(c.numeric - 2.0) <= 1e-10 * 1e4);  // step^-2 amplifies rounding
  CHECK(oracles::fd_check(sq, {0.3, 0.7}, {2, 0}, 1e-2).gap <= 1e-10);
  const Analytic one = [](Point, MultiIndex d) { return d.dx + d.dy == 0 ? 4.0 : 0.0; };
  for (MultiIndex a : {MultiIndex{1, 0}, MultiIndex{2, 0}, MultiIndex{1, 1}, MultiIndex{2, 2}, MultiIndex{0, 4}})
    CHECK(oracles::fd_check(one, {0.5, 0.5}, a, 1e-2).gap <= 1e-12);

  testing::Rng rng(62);
  // Rounding contributes about eps / step^4 to every sample, so gaps are
  // measured against the largest derivative in the sample.
  const SpaceHandle s = build_space(testing::random_partition(rng, 1, 1, 0.5, 2), 4);
  const SplineFunction v = testing::random_spline(rng, s);
  double worst = 0.0, scale = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Cell& c = s->partition().cell(rng() % s->partition().size());
    const oracles::FdCheck r = oracles::fd_check(v, testing::random_point_in(rng, c, 0.1), {2, 2}, 1e-3);
    worst = std::max(worst, r.gap);
    scale = std::max(scale, std::abs(r.analytic));
  }
  MESSAGE("largest (2,2) gap " << worst << " against derivative scale " << scale);
  worst /= scale;
  CHECK(worst <= 1e-4);
  const Cell& c0 = s->partition().cell(0);
  CHECK_THROWS_AS(oracles::fd_check(v, {c0.x0() + 1e-4, c0.y0() + 0.5 * c0.side()}, {2, 0}, 1e-3),
                  std::domain_error);
}

TEST_CASE("dense projection") {
  const Cell c{2, 1, 2};
  const auto poly = [&](Point x) {
    const Point s = c.to_local(x);
    return 1.0 - 2.0 * s.x + 3.0 * s.y + 0.5 * s.x * s.y * s.y + s.x * s.x;
  };
  const TensorPoly p = oracles::dense_l2_projection(2, c, poly, 4);
  CHECK(p(0, 0) == doctest::Approx(1.0));
  CHECK(p(1, 0) == doctest::Approx(-2.0));
  CHECK(p(0, 1) == doctest::Approx(3.0));
  CHECK(p(1, 2) == doctest::Approx(0.5));
  CHECK(p(2, 0) == doctest::Approx(1.0));
  CHECK(std::abs(p(2, 2)) <= 1e-10);
  const TensorPoly z = oracles::dense_l2_projection(2, c, [](Point) { return 0.0; }, 4);
  for (double v : z.coefficients()) CHECK(v == 0.0);

  // Agreement with the projected Laplacian on random splines.
  testing::Rng rng(63);
  for (int trial = 0; trial < 20; ++trial) {
    const SpaceHandle s = build_space(uniform_partition(1 + trial % 2), 4);
    const SplineFunction fn = testing::random_spline(rng, s);
    const PiecewisePoly pi = project_laplacian(fn);
    const QuadratureRule ref = gauss_reference_square(6);
    for (std::size_t k = 0; k < s->partition().size(); ++k) {
      const Cell& cell = s->partition().cell(k);
      const TensorPoly d = oracles::dense_l2_projection(
          2, cell, [&](Point x) { return fn.eval(k, x, {2, 0}) + fn.eval(k, x, {0, 2}); }, 6);
      double scale = 1.0;
      for (double v : pi.cells[k].coefficients()) scale = std::max(scale, std::abs(v));
      for (std::size_t q = 0; q < ref.size(); ++q)
        CHECK(std::abs(d.eval(ref.points[q].x, ref.points[q].y) - pi.cells[k].eval(ref.points[q].x, ref.points[q].y)) <=
              1e-11 * scale);
    }
  }
}

TEST_CASE("global dual basis") {
  const SpaceHandle s0 = build_space(uniform_partition(0), 2);
  const Eigen::MatrixXd d = oracles::global_dual_basis(*s0);
  const Eigen::MatrixXd g = oracles::gram_matrix(*s0);
  CHECK((d * g - Eigen::MatrixXd::Identity(9, 9)).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK_THROWS(oracles::global_dual_basis(*build_space(uniform_partition(4), 2)));

  testing::Rng rng(64);
  const SpaceHandle s = build_space(testing::random_partition(rng, 2, 2, 0.25, 4, 2), 2);
  REQUIRE(s->dim() <= 200);
  const Eigen::MatrixXd duals = oracles::global_dual_basis(*s);
  const SplineFunction v = testing::random_spline(rng, s);
  const auto as_fn = [&](Point x) { return v.eval(x); };
  const SplineFunction a = oracles::global_quasi_interpolant(s, duals, as_fn);
  const SplineFunction b = quasi_interpolant(s, as_fn);
  for (std::size_t k = 0; k < s->dim(); ++k) {
    CHECK(a.coefficients()[k] == doctest::Approx(v.coefficients()[k]).epsilon(1e-9));
    CHECK(b.coefficients()[k] == doctest::Approx(v.coefficients()[k]).epsilon(1e-11));
  }

  const double pi = std::numbers::pi;
  const auto sinsin = [&](Point x) { return std::sin(pi * x.x) * std::sin(pi * x.y); };
  const double cg = stability_constant(oracles::global_quasi_interpolant(s, duals, sinsin), sinsin);
  const double cl = stability_constant(quasi_interpolant(s, sinsin), sinsin);
  MESSAGE("stability constants global " << cg << " local " << cl);
  CHECK(std::abs(cg / cl - 1.0) <= 0.5);
}
