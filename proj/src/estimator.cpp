#include "afem/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "afem/errors.hpp"
#include "afem/quadrature.hpp"
#include "afem/support.hpp"

namespace afem {

double Indicators::sum_over(std::span<const std::size_t> idx) const {
  double s = 0.0;
  for (std::size_t k : idx) s += cells[k].eta_sq;
  return s;
}

ResidualEstimator::ResidualEstimator(const SplineFunction& v, Source f, int quad_n)
    : partition_(&v.space().partition()),
      degree_(v.space().degree()),
      quad_n_(quad_n > 0 ? quad_n : v.space().degree() + 2),
      f_(std::move(f)),
      edges_(edges(v.space().partition())),
      space_(v.space_handle()) {
  const Partition& p = *partition_;
  lap_.reserve(p.size());
  bilap_.reserve(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    const TensorPoly local = v.local(k);
    lap_.push_back(laplacian_on_cell(local, p.cell(k)));
    bilap_.push_back(bilaplacian_on_cell(local, p.cell(k)));
  }
  cell_edges_.resize(p.size());
  for (std::size_t e = 0; e < edges_.interior.size(); ++e) {
    cell_edges_[edges_.interior[e].owners[0]].push_back(e);
    cell_edges_[edges_.interior[e].owners[1]].push_back(e);
  }
}

void ResidualEstimator::add_interior(std::size_t k, CellIndicator& out) const {
  const Cell& c = partition_->cell(k);
  const QuadratureRule rule = gauss_cell(c, quad_n_);
  const Point origin{c.x0(), c.y0()};
  const double h = c.side();
  double res = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Point x = rule.points[q];
    const double d = f_(x) - bilap_[k].eval((x.x - origin.x) / h, (x.y - origin.y) / h);
    res += rule.weights[q] * d * d;
  }
  const double h4 = h * h * h * h;
  out.interior_sq = h4 * res;
  const double osc = oscillation(f_, c, degree_, quad_n_);
  out.osc_sq = osc * osc;
}

void ResidualEstimator::add_edge(const Edge& e, std::size_t owner, CellIndicator& out) const {
  const std::size_t a = e.owners[0];
  const std::size_t b = e.owners[1];
  const Cell& ca = partition_->cell(a);
  const Cell& cb = partition_->cell(b);
  const QuadratureRule rule = gauss_edge(e, quad_n_);
  const MultiIndex dn = e.normal_axis == 0 ? MultiIndex{1, 0} : MultiIndex{0, 1};
  double j1 = 0.0, j2 = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Point x = rule.points[q];
    const double jl = eval_on_cell(lap_[a], ca, x, {}) - eval_on_cell(lap_[b], cb, x, {});
    const double jn = eval_on_cell(lap_[a], ca, x, dn) - eval_on_cell(lap_[b], cb, x, dn);
    j1 += rule.weights[q] * jn * jn;
    j2 += rule.weights[q] * jl * jl;
  }
  const double h = partition_->cell(owner).side();
  out.jump1_sq += 0.5 * h * h * h * j1;
  out.jump2_sq += 0.5 * h * j2;
}

CellIndicator ResidualEstimator::cell(std::size_t k) const {
  CellIndicator out;
  add_interior(k, out);
  for (std::size_t e : cell_edges_[k]) add_edge(edges_.interior[e], k, out);
  out.eta_sq = out.interior_sq + out.jump1_sq + out.jump2_sq;
  return out;
}

Indicators ResidualEstimator::all() const {
  Indicators ind;
  ind.cells.reserve(partition_->size());
  for (std::size_t k = 0; k < partition_->size(); ++k) ind.cells.push_back(cell(k));
  for (const CellIndicator& c : ind.cells) {
    ind.total_sq += c.eta_sq;
    ind.osc_total_sq += c.osc_sq;
  }
  return ind;
}

CellIndicator indicator(const SplineFunction& v, const Source& f, std::size_t cell, int quad_n) {
  return ResidualEstimator(v, f, quad_n).cell(cell);
}

Indicators estimate_all(const SplineFunction& v, const Source& f, int quad_n) {
  return ResidualEstimator(v, f, quad_n).all();
}

double oscillation(const Source& f, const Cell& c, int degree, int quad_n) {
  if (quad_n <= 0) quad_n = degree + 2;
  const auto local = [&](double s, double t) { return f(c.to_global({s, t})); };
  const TensorPoly fbar = project_local(degree - 2, local, quad_n);
  const QuadratureRule ref = gauss_reference_square(quad_n);
  double sum = 0.0;
  for (std::size_t q = 0; q < ref.size(); ++q) {
    const double d = local(ref.points[q].x, ref.points[q].y) - fbar.eval(ref.points[q].x, ref.points[q].y);
    sum += ref.weights[q] * d * d;
  }
  const double h = c.side();
  return h * h * std::sqrt(sum * c.area());
}

MarkedSet dorfler_mark(const Indicators& ind, const Partition& p, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw ConfigurationError("theta must lie in (0, 1]");
  MarkedSet out;
  out.theta = theta;
  std::vector<std::size_t> order(ind.cells.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ind.cells[a].eta_sq > ind.cells[b].eta_sq; });
  double total = 0.0;
  for (std::size_t k : order) total += ind.cells[k].eta_sq;
  if (!(total > 0.0)) return out;
  double acc = 0.0;
  for (std::size_t k : order) {
    if (acc >= theta * total) break;
    acc += ind.cells[k].eta_sq;
    out.indices.push_back(k);
    out.cells.push_back(p.cell(k));
  }
  out.achieved_fraction = acc / total;
  return out;
}

LipschitzSample lipschitz_gap(const SplineFunction& v, const SplineFunction& w, const Source& f, std::size_t cell,
                              int quad_n) {
  if (quad_n <= 0) quad_n = v.space().degree() + 2;
  LipschitzSample out;
  const double ev = std::sqrt(indicator(v, f, cell, quad_n).eta_sq);
  const double ew = std::sqrt(indicator(w, f, cell, quad_n).eta_sq);
  out.gap = std::abs(ev - ew);
  const auto ext = support_extension(v.space(), cell);
  out.bound_arg = h2_seminorm(spline_field(combine(1.0, v, -1.0, w)), v.space().partition(), ext, quad_n);
  return out;
}

void write_indicators(std::ostream& os, const Partition& p, const Indicators& ind) {
  os << std::setprecision(17);
  for (std::size_t k = 0; k < p.size(); ++k) {
    const Cell& c = p.cell(k);
    const CellIndicator& e = ind.cells[k];
    os << c.level << ' ' << c.i << ' ' << c.j << ' ' << e.eta_sq << ' ' << e.interior_sq << ' ' << e.jump1_sq
       << ' ' << e.jump2_sq << ' ' << e.osc_sq << '\n';
  }
}

}  // namespace afem
