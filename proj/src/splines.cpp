#include "afem/splines.hpp"

#include <Eigen/Dense>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>
#include <Eigen/SparseQR>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "afem/quadrature.hpp"

namespace afem {

namespace {

using Coeffs = std::map<std::pair<int, int>, double>;

bool support_all_nodes(const Partition& p, const bspline::LevelBasis& lb, int kx, int ky, bool* any) {
  bool all = true;
  bool some = false;
  for (int cx = lb.first_cell(kx); cx <= lb.last_cell(kx); ++cx)
    for (int cy = lb.first_cell(ky); cy <= lb.last_cell(ky); ++cy) {
      if (p.is_node({lb.level(), cx, cy}))
        some = true;
      else
        all = false;
    }
  if (any) *any = some;
  return all;
}

}  // namespace

SpaceHandle build_space(const Partition& p, int degree, bool truncated) {
  if (degree < 2) throw std::invalid_argument("spline degree must be at least 2");
  auto space = std::shared_ptr<HierarchicalSpace>(new HierarchicalSpace(p, degree, truncated));
  const int top = p.max_level();
  const int n = degree + 1;
  for (int l = 0; l <= top; ++l) space->levels_.emplace_back(l, degree);
  std::vector<bspline::Refinement> refs;
  for (int l = 0; l < top; ++l) refs.push_back(bspline::refinement(space->levels_[l], space->levels_[l + 1]));

  // Level-wise selection.
  for (int l = 0; l <= top; ++l) {
    std::set<std::pair<int, int>> candidates;
    for (const Cell& c : p.cells()) {
      if (c.level != l) continue;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) candidates.insert({c.i + a, c.j + b});
    }
    for (auto [kx, ky] : candidates) {
      if (support_all_nodes(p, space->levels_[l], kx, ky, nullptr)) space->basis_.push_back({l, kx, ky});
    }
  }

  space->cell_dofs_.resize(p.size());
  space->support_.resize(space->basis_.size());
  for (std::size_t dof = 0; dof < space->basis_.size(); ++dof) {
    const BasisIndex& bi = space->basis_[dof];
    Coeffs rep{{{bi.kx, bi.ky}, 1.0}};
    for (int m = bi.level; m <= top; ++m) {
      const auto& lb = space->levels_[m];
      std::set<std::pair<int, int>> touched;
      for (const auto& [k, v] : rep) {
        for (int cx = lb.first_cell(k.first); cx <= lb.last_cell(k.first); ++cx)
          for (int cy = lb.first_cell(k.second); cy <= lb.last_cell(k.second); ++cy)
            if (p.find({m, cx, cy})) touched.insert({cx, cy});
      }
      for (auto [cx, cy] : touched) {
        CellDof cd{dof, std::vector<double>(n * n, 0.0)};
        bool nonzero = false;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            auto it = rep.find({cx + a, cy + b});
            if (it != rep.end() && it->second != 0.0) {
              cd.local[a * n + b] = it->second;
              nonzero = true;
            }
          }
        if (!nonzero) continue;
        const std::size_t cell = *p.find({m, cx, cy});
        space->cell_dofs_[cell].push_back(std::move(cd));
        space->support_[dof].push_back(cell);
      }
      if (m == top) break;
      Coeffs fine;
      for (const auto& [k, v] : rep)
        for (auto [jx, ax] : refs[m][k.first])
          for (auto [jy, ay] : refs[m][k.second]) fine[{jx, jy}] += v * ax * ay;
      Coeffs kept;
      const auto& fb = space->levels_[m + 1];
      for (const auto& [k, v] : fine) {
        bool any = false;
        const bool all = support_all_nodes(p, fb, k.first, k.second, &any);
        if (!any) continue;
        if (truncated && all) continue;
        kept.emplace(k, v);
      }
      rep = std::move(kept);
      if (rep.empty()) break;
    }
    std::sort(space->support_[dof].begin(), space->support_[dof].end());
  }
  return space;
}

TensorPoly HierarchicalSpace::basis_poly(std::size_t cell, const CellDof& d) const {
  const Cell& c = partition_.cell(cell);
  const auto& lb = levels_[c.level];
  const int n = degree_ + 1;
  TensorPoly out(degree_);
  std::vector<double> ycomb(n);
  for (int a = 0; a < n; ++a) {
    std::fill(ycomb.begin(), ycomb.end(), 0.0);
    bool any = false;
    for (int b = 0; b < n; ++b) {
      const double v = d.local[a * n + b];
      if (v == 0.0) continue;
      any = true;
      const auto py = lb.piece(c.j, b);
      for (int q = 0; q < n; ++q) ycomb[q] += v * py[q];
    }
    if (!any) continue;
    const auto px = lb.piece(c.i, a);
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) out(p, q) += px[p] * ycomb[q];
  }
  return out;
}

std::vector<TensorPoly> HierarchicalSpace::cell_basis_polys(std::size_t cell) const {
  std::vector<TensorPoly> out;
  out.reserve(cell_dofs_[cell].size());
  for (const CellDof& d : cell_dofs_[cell]) out.push_back(basis_poly(cell, d));
  return out;
}

std::vector<std::size_t> conforming_indices(const HierarchicalSpace& s) {
  const Partition& p = s.partition();
  const int r = s.degree();
  const int n = r + 1;
  std::vector<char> touches(s.dim(), 0);
  for (std::size_t k = 0; k < p.size(); ++k) {
    const Cell& c = p.cell(k);
    const int last = (1 << c.level) - 1;
    // Local offsets whose level index is among the two outermost functions.
    std::vector<int> xs, ys;
    if (c.i == 0) xs.insert(xs.end(), {0, 1});
    if (c.i == last) xs.insert(xs.end(), {r - 1, r});
    if (c.j == 0) ys.insert(ys.end(), {0, 1});
    if (c.j == last) ys.insert(ys.end(), {r - 1, r});
    if (xs.empty() && ys.empty()) continue;
    for (const CellDof& d : s.cell_dofs(k)) {
      bool hit = false;
      for (int a : xs)
        for (int b = 0; b < n; ++b) hit = hit || d.local[a * n + b] != 0.0;
      for (int b : ys)
        for (int a = 0; a < n; ++a) hit = hit || d.local[a * n + b] != 0.0;
      if (hit) touches[d.dof] = 1;
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t dof = 0; dof < s.dim(); ++dof)
    if (!touches[dof]) out.push_back(dof);
  return out;
}

SplineFunction::SplineFunction(SpaceHandle space, std::vector<double> coefficients)
    : space_(std::move(space)), coefficients_(std::move(coefficients)) {
  if (!space_) throw std::invalid_argument("spline function needs a space");
  if (coefficients_.size() != space_->dim())
    throw std::invalid_argument("coefficient count does not match the space dimension");
}

SplineFunction SplineFunction::zero(SpaceHandle space) {
  const std::size_t n = space->dim();
  return SplineFunction(std::move(space), std::vector<double>(n, 0.0));
}

TensorPoly SplineFunction::local(std::size_t cell) const {
  const int n = space_->degree() + 1;
  std::vector<double> combined(n * n, 0.0);
  for (const CellDof& d : space_->cell_dofs(cell)) {
    const double c = coefficients_[d.dof];
    if (c == 0.0) continue;
    for (int k = 0; k < n * n; ++k) combined[k] += c * d.local[k];
  }
  return space_->basis_poly(cell, CellDof{0, std::move(combined)});
}

double SplineFunction::eval(std::size_t cell, Point x, MultiIndex d) const {
  if (d.dx < 0 || d.dy < 0 || d.order() > 4)
    throw std::domain_error("unsupported derivative order " + std::to_string(d.order()));
  return eval_on_cell(local(cell), space_->partition().cell(cell), x, d);
}

double SplineFunction::eval(Point x, MultiIndex d) const {
  return eval(space_->partition().locate(x), x, d);
}

SplineFunction combine(double a, const SplineFunction& f, double b, const SplineFunction& g) {
  if (f.space_handle() != g.space_handle()) throw std::invalid_argument("functions live on different spaces");
  std::vector<double> c(f.coefficients().size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = a * f.coefficients()[k] + b * g.coefficients()[k];
  return SplineFunction(f.space_handle(), std::move(c));
}

double DualFunctional::apply(const std::function<double(Point)>& f) const {
  double v = 0.0;
  for (std::size_t q = 0; q < points.size(); ++q) v += weights[q] * f(points[q]);
  return v;
}

std::vector<DualFunctional> local_dual_functionals(const HierarchicalSpace& s, int quad_n) {
  if (quad_n <= 0) quad_n = s.degree() + 2;
  const Partition& p = s.partition();
  const QuadratureRule ref = gauss_reference_square(quad_n);
  // basis values at the quadrature points of every cell, per cell dof
  std::vector<std::vector<std::vector<double>>> values(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    const auto polys = s.cell_basis_polys(k);
    values[k].resize(polys.size());
    for (std::size_t a = 0; a < polys.size(); ++a) {
      values[k][a].resize(ref.size());
      for (std::size_t q = 0; q < ref.size(); ++q) values[k][a][q] = polys[a].eval(ref.points[q].x, ref.points[q].y);
    }
  }

  std::vector<DualFunctional> out(s.dim());
  for (std::size_t lam = 0; lam < s.dim(); ++lam) {
    const auto cells = s.support(lam);
    std::vector<std::size_t> family;
    for (std::size_t k : cells)
      for (const CellDof& d : s.cell_dofs(k)) family.push_back(d.dof);
    std::sort(family.begin(), family.end());
    family.erase(std::unique(family.begin(), family.end()), family.end());
    auto slot = [&](std::size_t dof) {
      return static_cast<Eigen::Index>(std::lower_bound(family.begin(), family.end(), dof) - family.begin());
    };
    const Eigen::Index m = static_cast<Eigen::Index>(family.size());
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t k : cells) {
      const auto& dofs = s.cell_dofs(k);
      const double area = p.cell(k).area();
      for (std::size_t a = 0; a < dofs.size(); ++a)
        for (std::size_t b = 0; b < dofs.size(); ++b) {
          double v = 0.0;
          for (std::size_t q = 0; q < ref.size(); ++q) v += ref.weights[q] * values[k][a][q] * values[k][b][q];
          gram(slot(dofs[a].dof), slot(dofs[b].dof)) += v * area;
        }
    }
    const Eigen::VectorXd scale = gram.diagonal().cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd scaled = scale.asDiagonal() * gram * scale.asDiagonal();
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(scaled);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
    e(slot(lam)) = scale(slot(lam));
    const Eigen::VectorXd row = scale.asDiagonal() * cod.solve(e);  // gram is symmetric
    DualFunctional& psi = out[lam];
    for (std::size_t k : cells) {
      const Cell& c = p.cell(k);
      const auto& dofs = s.cell_dofs(k);
      for (std::size_t q = 0; q < ref.size(); ++q) {
        double w = 0.0;
        for (std::size_t a = 0; a < dofs.size(); ++a) w += row(slot(dofs[a].dof)) * values[k][a][q];
        psi.points.push_back(c.to_global(ref.points[q]));
        psi.weights.push_back(w * ref.weights[q] * c.area());
      }
    }
  }
  return out;
}

SplineFunction quasi_interpolant(const SpaceHandle& s, std::span<const DualFunctional> duals,
                                 const std::function<double(Point)>& f) {
  std::vector<double> c(s->dim());
  for (std::size_t lam = 0; lam < c.size(); ++lam) c[lam] = duals[lam].apply(f);
  return SplineFunction(s, std::move(c));
}

SplineFunction quasi_interpolant(const SpaceHandle& s, const std::function<double(Point)>& f) {
  const auto duals = local_dual_functionals(*s);
  return quasi_interpolant(s, duals, f);
}

SplineFunction coarse_to_fine(const SplineFunction& fn, const SpaceHandle& fine) {
  const HierarchicalSpace& coarse = fn.space();
  if (fine->degree() != coarse.degree()) throw std::invalid_argument("non-nested spaces: degree differs");
  const Partition& fp = fine->partition();
  const Partition& cp = coarse.partition();
  if (!fp.refines(cp)) throw std::invalid_argument("non-nested spaces: partition is not a refinement");
  if (fine.get() == &coarse) return fn;

  const int n = fine->degree() + 1;
  const auto& g = gauss_legendre(n);
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<double> rhs;
  Eigen::Index row = 0;
  std::vector<TensorPoly> coarse_local(cp.size());
  std::vector<char> have(cp.size(), 0);
  for (std::size_t k = 0; k < fp.size(); ++k) {
    const Cell& c = fp.cell(k);
    const std::size_t ck = *cp.covering(c);
    if (!have[ck]) {
      coarse_local[ck] = fn.local(ck);
      have[ck] = 1;
    }
    const auto polys = fine->cell_basis_polys(k);
    const auto& dofs = fine->cell_dofs(k);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b, ++row) {
        const Point s{g.nodes[a], g.nodes[b]};
        for (std::size_t d = 0; d < dofs.size(); ++d)
          triplets.emplace_back(row, static_cast<Eigen::Index>(dofs[d].dof), polys[d].eval(s.x, s.y));
        const Point x = c.to_global(s);
        rhs.push_back(eval_on_cell(coarse_local[ck], cp.cell(ck), x, {}));
      }
  }
  Eigen::SparseMatrix<double> a(row, static_cast<Eigen::Index>(fine->dim()));
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  Eigen::SparseQR<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> qr(a);
  if (qr.info() != Eigen::Success) throw std::runtime_error("coarse_to_fine: factorization failed");
  Eigen::VectorXd x = qr.solve(b);
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  if ((a * x - b).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw std::invalid_argument("non-nested spaces: function is not representable in the fine space");
  return SplineFunction(fine, std::vector<double>(x.data(), x.data() + x.size()));
}

void save_solution(std::ostream& os, const SplineFunction& fn) {
  const HierarchicalSpace& s = fn.space();
  os << "afem-spline 1\n";
  os << "degree " << s.degree() << '\n';
  os << "truncated " << (s.truncated() ? 1 : 0) << '\n';
  os << "cells " << s.partition().size() << '\n';
  write_mesh(os, s.partition());
  os << "coefficients " << s.dim() << '\n';
  os << std::setprecision(17);
  for (double c : fn.coefficients()) os << c << '\n';
}

SplineFunction load_solution(std::istream& is) {
  auto expect = [&](const char* word) {
    std::string tok;
    if (!(is >> tok) || tok != word) throw std::runtime_error(std::string("solution file: expected '") + word + "'");
  };
  expect("afem-spline");
  int version = 0;
  is >> version;
  if (version != 1) throw std::runtime_error("solution file: unsupported version");
  int degree = 0, truncated = 1;
  std::size_t ncells = 0, ncoef = 0;
  expect("degree");
  is >> degree;
  expect("truncated");
  is >> truncated;
  expect("cells");
  is >> ncells;
  std::vector<Cell> cells(ncells);
  for (Cell& c : cells)
    if (!(is >> c.level >> c.i >> c.j)) throw std::runtime_error("solution file: truncated cell list");
  expect("coefficients");
  is >> ncoef;
  std::vector<double> coef(ncoef);
  for (double& v : coef)
    if (!(is >> v)) throw std::runtime_error("solution file: truncated coefficient list");
  auto space = build_space(Partition(std::move(cells)), degree, truncated != 0);
  return SplineFunction(space, std::move(coef));
}

}  // namespace afem
