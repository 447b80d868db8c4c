#include "afem/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "afem/errors.hpp"
#include "afem/quadrature.hpp"

namespace afem {

const char* to_string(Mode m) { return m == Mode::conforming ? "conforming" : "nitsche"; }

Mode parse_mode(const std::string& s) {
  if (s == "conforming") return Mode::conforming;
  if (s == "nitsche") return Mode::nitsche;
  throw ConfigurationError("unknown mode '" + s + "' (expected conforming or nitsche)");
}

double default_gamma(int degree) { return 10.0 * std::pow(degree + 1.0, 4); }

FormParams FormParams::resolved(int degree) const {
  FormParams out = *this;
  if (out.gamma1 == 0.0) out.gamma1 = default_gamma(degree);
  if (out.gamma2 == 0.0) out.gamma2 = default_gamma(degree);
  if (out.quad_n <= 0) out.quad_n = degree + 2;
  if (out.mode == Mode::nitsche && (!(out.gamma1 > 0.0) || !(out.gamma2 > 0.0)))
    throw ConfigurationError("gamma1 and gamma2 must be positive in nitsche mode");
  return out;
}

namespace {

// Traces needed by the Nitsche boundary terms for a family of local
// polynomials on the owner cell of a boundary edge.
struct EdgeTraces {
  std::vector<double> weights;
  std::vector<std::vector<double>> value, normal, proj, proj_normal;
};

TensorPoly projected_laplacian(const TensorPoly& local, const Cell& c, int degree) {
  const TensorPoly lap = laplacian_on_cell(local, c);
  return project_local(degree - 2, [&](double s, double t) { return lap.eval(s, t); }, degree + 1);
}

EdgeTraces edge_traces(std::span<const TensorPoly> polys, std::span<const TensorPoly> projected, const Cell& c,
                       const Edge& e, int n) {
  const QuadratureRule rule = gauss_edge(e, n);
  const MultiIndex dn = e.normal_axis == 0 ? MultiIndex{1, 0} : MultiIndex{0, 1};
  const double sign = e.normal_sign;
  EdgeTraces t;
  t.weights = rule.weights;
  const std::size_t m = polys.size();
  t.value.assign(m, std::vector<double>(rule.size()));
  t.normal = t.proj = t.proj_normal = t.value;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point x = rule.points[q];
      t.value[a][q] = eval_on_cell(polys[a], c, x, {});
      t.normal[a][q] = sign * eval_on_cell(polys[a], c, x, dn);
      t.proj[a][q] = eval_on_cell(projected[a], c, x, {});
      t.proj_normal[a][q] = sign * eval_on_cell(projected[a], c, x, dn);
    }
  return t;
}

double nitsche_edge_entry(const EdgeTraces& t, std::size_t a, std::size_t b, double h, double g1, double g2) {
  double v = 0.0;
  const double w3 = g1 / (h * h * h);
  const double w1 = g2 / h;
  for (std::size_t q = 0; q < t.weights.size(); ++q) {
    const double term = -(t.proj[a][q] * t.normal[b][q] + t.proj[b][q] * t.normal[a][q]) +
                        (t.proj_normal[a][q] * t.value[b][q] + t.proj_normal[b][q] * t.value[a][q]) +
                        w3 * t.value[a][q] * t.value[b][q] + w1 * t.normal[a][q] * t.normal[b][q];
    v += t.weights[q] * term;
  }
  return v;
}

}  // namespace

LinearSystem assemble(const HierarchicalSpace& s, const Source& f, const FormParams& raw) {
  const FormParams params = raw.resolved(s.degree());
  const Partition& p = s.partition();
  const int r = s.degree();
  LinearSystem sys;
  std::vector<std::ptrdiff_t> row_of(s.dim(), -1);
  if (params.mode == Mode::conforming) {
    sys.dofs = conforming_indices(s);
    if (sys.dofs.empty())
      throw ConfigurationError("conforming subspace is empty: the mesh is too coarse, use more initial levels");
  } else {
    sys.dofs.resize(s.dim());
    for (std::size_t k = 0; k < s.dim(); ++k) sys.dofs[k] = k;
  }
  for (std::size_t k = 0; k < sys.dofs.size(); ++k) row_of[sys.dofs[k]] = static_cast<std::ptrdiff_t>(k);
  const auto n_rows = static_cast<Eigen::Index>(sys.dofs.size());
  sys.load = Eigen::VectorXd::Zero(n_rows);

  std::vector<Eigen::Triplet<double>> triplets;
  auto emit = [&](std::span<const std::ptrdiff_t> rows, const Eigen::MatrixXd& local) {
    for (std::size_t a = 0; a < rows.size(); ++a) {
      if (rows[a] < 0) continue;
      for (std::size_t b = a; b < rows.size(); ++b) {
        if (rows[b] < 0) continue;
        const double v = local(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        triplets.emplace_back(rows[a], rows[b], v);
        if (rows[a] != rows[b]) triplets.emplace_back(rows[b], rows[a], v);
      }
    }
  };

  const QuadratureRule ref = gauss_reference_square(params.quad_n);
  std::vector<std::vector<TensorPoly>> polys(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    const Cell& c = p.cell(k);
    polys[k] = s.cell_basis_polys(k);
    const auto& dofs = s.cell_dofs(k);
    std::vector<std::ptrdiff_t> rows(dofs.size());
    for (std::size_t a = 0; a < dofs.size(); ++a) rows[a] = row_of[dofs[a].dof];
    const std::size_t m = dofs.size();
    const double area = c.area();
    const double lap_scale = std::ldexp(1.0, 2 * c.level);
    std::vector<std::vector<double>> lap(m, std::vector<double>(ref.size()));
    std::vector<std::vector<double>> val(m, std::vector<double>(ref.size()));
    for (std::size_t a = 0; a < m; ++a) {
      const TensorPoly pxx = polys[k][a].derivative({2, 0});
      const TensorPoly pyy = polys[k][a].derivative({0, 2});
      for (std::size_t q = 0; q < ref.size(); ++q) {
        const Point sq = ref.points[q];
        lap[a][q] = lap_scale * (pxx.eval(sq.x, sq.y) + pyy.eval(sq.x, sq.y));
        val[a][q] = polys[k][a].eval(sq.x, sq.y);
      }
    }
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a; b < m; ++b) {
        double v = 0.0;
        for (std::size_t q = 0; q < ref.size(); ++q) v += ref.weights[q] * lap[a][q] * lap[b][q];
        local(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v * area;
      }
    emit(rows, local);
    for (std::size_t q = 0; q < ref.size(); ++q) {
      const double fq = f(c.to_global(ref.points[q])) * ref.weights[q] * area;
      for (std::size_t a = 0; a < m; ++a)
        if (rows[a] >= 0) sys.load(rows[a]) += fq * val[a][q];
    }
  }

  if (params.mode == Mode::nitsche) {
    const EdgeSet es = edges(p);
    std::vector<std::vector<TensorPoly>> projected(p.size());
    for (const Edge& e : es.boundary) {
      const std::size_t k = e.owners[0];
      const Cell& c = p.cell(k);
      if (projected[k].empty())
        for (const TensorPoly& poly : polys[k]) projected[k].push_back(projected_laplacian(poly, c, r));
      const EdgeTraces t = edge_traces(polys[k], projected[k], c, e, params.quad_n);
      const auto& dofs = s.cell_dofs(k);
      std::vector<std::ptrdiff_t> rows(dofs.size());
      for (std::size_t a = 0; a < dofs.size(); ++a) rows[a] = row_of[dofs[a].dof];
      const auto m = static_cast<Eigen::Index>(dofs.size());
      Eigen::MatrixXd local = Eigen::MatrixXd::Zero(m, m);
      for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = a; b < m; ++b)
          local(a, b) = nitsche_edge_entry(t, a, b, e.length, params.gamma1, params.gamma2);
      emit(rows, local);
    }
  }

  sys.matrix.resize(n_rows, n_rows);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  sys.matrix.makeCompressed();
  return sys;
}

std::vector<double> expand(const LinearSystem& sys, const Eigen::VectorXd& x, std::size_t dim) {
  std::vector<double> out(dim, 0.0);
  for (std::size_t k = 0; k < sys.dofs.size(); ++k) out[sys.dofs[k]] = x(static_cast<Eigen::Index>(k));
  return out;
}

void write_triplets(std::ostream& os, const SystemMatrix& a) {
  std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> entries;
  for (Eigen::Index col = 0; col < a.outerSize(); ++col)
    for (SystemMatrix::InnerIterator it(a, col); it; ++it) entries.emplace_back(it.row(), it.col(), it.value());
  std::sort(entries.begin(), entries.end());
  os << std::setprecision(17);
  for (const auto& [r, c, v] : entries) os << r << ' ' << c << ' ' << v << '\n';
}

double bilinear_form(const SplineFunction& u, const SplineFunction& v, const FormParams& raw) {
  if (u.space_handle() != v.space_handle()) throw std::invalid_argument("bilinear_form needs a common space");
  const HierarchicalSpace& s = u.space();
  const FormParams params = raw.resolved(s.degree());
  const Partition& p = s.partition();
  const QuadratureRule ref = gauss_reference_square(params.quad_n);
  double total = 0.0;
  std::vector<std::array<TensorPoly, 2>> local(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    const Cell& c = p.cell(k);
    local[k] = {u.local(k), v.local(k)};
    const TensorPoly lu = laplacian_on_cell(local[k][0], c);
    const TensorPoly lv = laplacian_on_cell(local[k][1], c);
    double cell_sum = 0.0;
    for (std::size_t q = 0; q < ref.size(); ++q)
      cell_sum += ref.weights[q] * lu.eval(ref.points[q].x, ref.points[q].y) * lv.eval(ref.points[q].x, ref.points[q].y);
    total += cell_sum * c.area();
  }
  if (params.mode == Mode::nitsche) {
    for (const Edge& e : edges(p).boundary) {
      const std::size_t k = e.owners[0];
      const Cell& c = p.cell(k);
      const std::array<TensorPoly, 2> proj{projected_laplacian(local[k][0], c, s.degree()),
                                           projected_laplacian(local[k][1], c, s.degree())};
      const EdgeTraces t = edge_traces(local[k], proj, c, e, params.quad_n);
      total += nitsche_edge_entry(t, 0, 1, e.length, params.gamma1, params.gamma2);
    }
  }
  return total;
}

PiecewisePoly project_laplacian(const SplineFunction& fn) {
  const Partition& p = fn.space().partition();
  PiecewisePoly out;
  out.degree = fn.space().degree() - 2;
  out.cells.reserve(p.size());
  for (std::size_t k = 0; k < p.size(); ++k)
    out.cells.push_back(projected_laplacian(fn.local(k), p.cell(k), fn.space().degree()));
  return out;
}

double mesh_norm(const Field& f, TraceNorm kind, const Partition& p, int quad_n) {
  double sum = 0.0;
  for (const Edge& e : edges(p).boundary) {
    const Cell& c = p.cell(e.owners[0]);
    const QuadratureRule rule = gauss_edge(e, quad_n);
    const MultiIndex dn = e.normal_axis == 0 ? MultiIndex{1, 0} : MultiIndex{0, 1};
    double integral = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double v = kind == TraceNorm::value_3_2 ? f(c, rule.points[q], {}) : f(c, rule.points[q], dn);
      integral += rule.weights[q] * v * v;
    }
    const double h = e.length;
    sum += (kind == TraceNorm::value_3_2 ? 1.0 / (h * h * h) : 1.0 / h) * integral;
  }
  return std::sqrt(sum);
}

double energy_norm(const Field& f, const Partition& p, int quad_n) {
  double sum = 0.0;
  for (const Cell& c : p.cells()) {
    const QuadratureRule rule = gauss_cell(c, quad_n);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double l = laplacian(f, c, rule.points[q]);
      sum += rule.weights[q] * l * l;
    }
  }
  return std::sqrt(sum);
}

double triple_norm(const Field& f, const Partition& p, const FormParams& raw, int degree) {
  const FormParams params = raw.resolved(degree);
  const double e = energy_norm(f, p, params.quad_n);
  const double b32 = mesh_norm(f, TraceNorm::value_3_2, p, params.quad_n);
  const double b12 = mesh_norm(f, TraceNorm::normal_1_2, p, params.quad_n);
  return std::sqrt(e * e + params.gamma1 * b32 * b32 + params.gamma2 * b12 * b12);
}

double h2_seminorm(const Field& f, const Partition& p, std::span<const std::size_t> cells, int quad_n) {
  double sum = 0.0;
  for (std::size_t k : cells) {
    const Cell& c = p.cell(k);
    const QuadratureRule rule = gauss_cell(c, quad_n);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double xx = f(c, rule.points[q], {2, 0});
      const double xy = f(c, rule.points[q], {1, 1});
      const double yy = f(c, rule.points[q], {0, 2});
      sum += rule.weights[q] * (xx * xx + 2.0 * xy * xy + yy * yy);
    }
  }
  return std::sqrt(sum);
}

double inconsistency_apply(const Analytic& u, const SplineFunction& v, int quad_n) {
  const HierarchicalSpace& s = v.space();
  const Partition& p = s.partition();
  const int r = s.degree();
  if (quad_n <= 0) quad_n = r + 2;
  const int proj_n = std::max(quad_n, r + 1);
  double total = 0.0;
  for (const Edge& e : edges(p).boundary) {
    const std::size_t k = e.owners[0];
    const Cell& c = p.cell(k);
    const TensorPoly proj = project_local(
        r - 2,
        [&](double a, double b) {
          const Point x = c.to_global({a, b});
          return u(x, {2, 0}) + u(x, {0, 2});
        },
        proj_n);
    const TensorPoly vl = v.local(k);
    const QuadratureRule rule = gauss_edge(e, quad_n);
    const bool xn = e.normal_axis == 0;
    const MultiIndex dn = xn ? MultiIndex{1, 0} : MultiIndex{0, 1};
    const double sign = e.normal_sign;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point x = rule.points[q];
      const double lap = u(x, {2, 0}) + u(x, {0, 2});
      const double lap_n =
          sign * (xn ? u(x, {3, 0}) + u(x, {1, 2}) : u(x, {2, 1}) + u(x, {0, 3}));
      const double pi = eval_on_cell(proj, c, x, {});
      const double pi_n = sign * eval_on_cell(proj, c, x, dn);
      const double vv = eval_on_cell(vl, c, x, {});
      const double vn = sign * eval_on_cell(vl, c, x, dn);
      total += rule.weights[q] * ((pi_n - lap_n) * vv - (pi - lap) * vn);
    }
  }
  return total;
}

std::vector<double> inconsistency_functional(const Analytic& u, const HierarchicalSpace& s, int quad_n) {
  const Partition& p = s.partition();
  const int r = s.degree();
  if (quad_n <= 0) quad_n = r + 2;
  const int proj_n = std::max(quad_n, r + 1);
  std::vector<double> g(s.dim(), 0.0);
  for (const Edge& e : edges(p).boundary) {
    const std::size_t k = e.owners[0];
    const Cell& c = p.cell(k);
    const TensorPoly proj = project_local(
        r - 2,
        [&](double a, double b) {
          const Point x = c.to_global({a, b});
          return u(x, {2, 0}) + u(x, {0, 2});
        },
        proj_n);
    const auto dofs = s.cell_dofs(k);
    const auto polys = s.cell_basis_polys(k);
    const QuadratureRule rule = gauss_edge(e, quad_n);
    const bool xn = e.normal_axis == 0;
    const MultiIndex dn = xn ? MultiIndex{1, 0} : MultiIndex{0, 1};
    const double sign = e.normal_sign;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point x = rule.points[q];
      const double lap = u(x, {2, 0}) + u(x, {0, 2});
      const double lap_n = sign * (xn ? u(x, {3, 0}) + u(x, {1, 2}) : u(x, {2, 1}) + u(x, {0, 3}));
      const double d0 = eval_on_cell(proj, c, x, {}) - lap;
      const double d1 = sign * eval_on_cell(proj, c, x, dn) - lap_n;
      for (std::size_t a = 0; a < dofs.size(); ++a) {
        const double vv = eval_on_cell(polys[a], c, x, {});
        const double vn = sign * eval_on_cell(polys[a], c, x, dn);
        g[dofs[a].dof] += rule.weights[q] * (d1 * vv - d0 * vn);
      }
    }
  }
  return g;
}

std::vector<double> triple_norm_diagonal(const HierarchicalSpace& s, const FormParams& raw) {
  const FormParams params = raw.resolved(s.degree());
  const Partition& p = s.partition();
  std::vector<double> out(s.dim(), 0.0);
  const QuadratureRule ref = gauss_reference_square(params.quad_n);
  std::vector<std::vector<TensorPoly>> polys(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    const Cell& c = p.cell(k);
    polys[k] = s.cell_basis_polys(k);
    const auto dofs = s.cell_dofs(k);
    for (std::size_t a = 0; a < dofs.size(); ++a) {
      const TensorPoly lap = laplacian_on_cell(polys[k][a], c);
      double v = 0.0;
      for (std::size_t q = 0; q < ref.size(); ++q) {
        const double l = lap.eval(ref.points[q].x, ref.points[q].y);
        v += ref.weights[q] * l * l;
      }
      out[dofs[a].dof] += v * c.area();
    }
  }
  for (const Edge& e : edges(p).boundary) {
    const std::size_t k = e.owners[0];
    const Cell& c = p.cell(k);
    const auto dofs = s.cell_dofs(k);
    const QuadratureRule rule = gauss_edge(e, params.quad_n);
    const MultiIndex dn = e.normal_axis == 0 ? MultiIndex{1, 0} : MultiIndex{0, 1};
    const double h = e.length;
    for (std::size_t a = 0; a < dofs.size(); ++a) {
      double v = 0.0;
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const double b = eval_on_cell(polys[k][a], c, rule.points[q], {});
        const double bn = eval_on_cell(polys[k][a], c, rule.points[q], dn);
        v += rule.weights[q] * (params.gamma1 / (h * h * h) * b * b + params.gamma2 / h * bn * bn);
      }
      out[dofs[a].dof] += v;
    }
  }
  return out;
}

}  // namespace afem
