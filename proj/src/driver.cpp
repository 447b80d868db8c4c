#include "afem/driver.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

#include "afem/errors.hpp"
#include "afem/oracles.hpp"

namespace afem {

void AfemConfig::validate() const {
  if (degree < 2) throw ConfigurationError("degree must be at least 2");
  if (!(theta > 0.0 && theta <= 1.0)) throw ConfigurationError("theta must lie in (0, 1]");
  if (gamma1 < 0.0) throw ConfigurationError("gamma1 must be positive");
  if (gamma2 < 0.0) throw ConfigurationError("gamma2 must be positive");
  if (initial_levels < 0 || initial_levels > 12) throw ConfigurationError("initial-levels must lie in [0, 12]");
  if (max_iters < 1) throw ConfigurationError("max-iters must be at least 1");
  if (quad_n < 0 || quad_n > 32) throw ConfigurationError("quad-n must lie in [0, 32]");
  solver.validate();
}

FormParams AfemConfig::form() const { return FormParams{mode, gamma1, gamma2, quad_n}.resolved(degree); }

void Problem::validate() const {
  if (!f) throw ConfigurationError("problem '" + name + "' has no source");
  if (!exact) return;
  const Analytic& u = *exact;
  for (int k = 0; k < 25; ++k) {
    const double t = (k + 0.5) / 25.0;
    const Point pts[4] = {{t, 0.0}, {t, 1.0}, {0.0, t}, {1.0, t}};
    const MultiIndex normals[4] = {{0, 1}, {0, 1}, {1, 0}, {1, 0}};
    for (int s = 0; s < 4; ++s) {
      if (std::abs(u(pts[s], {})) > 1e-12 || std::abs(u(pts[s], normals[s])) > 1e-12)
        throw ConfigurationError("problem '" + name + "': exact solution violates u = du/dnu = 0 on the boundary");
    }
  }
}

Problem builtin_problem(const std::string& name) {
  if (name == "sin2") {
    oracles::ManufacturedProblem m = oracles::manufactured_sin2();
    return Problem{m.name, m.f, m.u};
  }
  if (name == "zero") {
    return Problem{"zero", [](Point) { return 0.0; }, Analytic([](Point, MultiIndex) { return 0.0; })};
  }
  throw ConfigurationError("unknown problem '" + name + "'");
}

double Polynomial2::operator()(Point x, MultiIndex d) const {
  double sum = 0.0;
  for (const Term& t : derivative(d).terms) sum += t.c * std::pow(x.x, t.p) * std::pow(x.y, t.q);
  return sum;
}

Polynomial2 Polynomial2::derivative(MultiIndex d) const {
  Polynomial2 out;
  for (Term t : terms) {
    for (int k = 0; k < d.dx && t.c != 0.0; ++k) t.c *= t.p--;
    for (int k = 0; k < d.dy && t.c != 0.0; ++k) t.c *= t.q--;
    if (t.c != 0.0) out.terms.push_back(t);
  }
  return out;
}

Polynomial2 Polynomial2::bilaplacian() const {
  Polynomial2 out = derivative({4, 0});
  for (Term t : derivative({2, 2}).terms) out.terms.push_back({2.0 * t.c, t.p, t.q});
  for (const Term& t : derivative({0, 4}).terms) out.terms.push_back(t);
  return out;
}

Problem polynomial_solution_problem(const std::string& name, const Polynomial2& u) {
  const Polynomial2 f = u.bilaplacian();
  return Problem{name, [f](Point x) { return f(x); }, Analytic([u](Point x, MultiIndex d) { return u(x, d); })};
}

Problem polynomial_source_problem(const std::string& name, const Polynomial2& f) {
  return Problem{name, [f](Point x) { return f(x); }, std::nullopt};
}

namespace {

std::size_t system_size(const HierarchicalSpace& s, Mode mode) {
  return mode == Mode::conforming ? conforming_indices(s).size() : s.dim();
}

}  // namespace

RunResult run(const AfemConfig& cfg, const Problem& prob, const Observer& observe) {
  cfg.validate();
  prob.validate();
  const FormParams params = cfg.form();
  const int err_n = params.quad_n + 2;

  Partition part = uniform_partition(cfg.initial_levels);
  SpaceHandle space = build_space(part, cfg.degree, cfg.truncated);
  if (system_size(*space, cfg.mode) > cfg.max_dofs)
    throw ConfigurationError("max-dofs is smaller than the initial space");

  RunResult result;
  for (int iter = 0;; ++iter) {
    LinearSystem sys = assemble(*space, prob.f, params);
    Eigen::VectorXd x;
    try {
      x = solve(sys.matrix, sys.load, cfg.solver);
    } catch (const SolverError& e) {
      if (cfg.mode == Mode::nitsche)
        throw SolverError(std::string(e.what()) + "; increase gamma1/gamma2", e.pivot());
      throw;
    }
    SplineFunction u_h(space, expand(sys, x, space->dim()));
    Indicators ind = ResidualEstimator(u_h, prob.f, params.quad_n).all();

    ConvergenceRecord rec;
    rec.iter = iter;
    rec.n_cells = part.size();
    rec.n_dofs = sys.dofs.size();
    rec.eta = std::sqrt(ind.total_sq);
    rec.osc = std::sqrt(ind.osc_total_sq);
    rec.residual = relative_residual(sys.matrix, x, sys.load);
    const Field uh_field = spline_field(u_h);
    rec.bnorm32 = mesh_norm(uh_field, TraceNorm::value_3_2, part, err_n);
    rec.bnorm12 = mesh_norm(uh_field, TraceNorm::normal_1_2, part, err_n);
    if (prob.exact) {
      const Field err = difference(analytic_field(*prob.exact), uh_field);
      rec.energy_error = energy_norm(err, part, err_n);
      FormParams tp = params;
      tp.quad_n = err_n;
      rec.triple_error = triple_norm(err, part, tp, cfg.degree);
      if (cfg.track_inconsistency && cfg.mode == Mode::nitsche)
        rec.inconsistency_sup = inconsistency_sup(*prob.exact, space, params, cfg.seed + iter);
    }

    MarkedSet marked;
    bool stop = !(ind.total_sq > 0.0) || iter + 1 >= cfg.max_iters;
    Partition next = part;
    SpaceHandle next_space;
    if (!stop) {
      marked = dorfler_mark(ind, part, cfg.theta);
      next = refine(part, marked.cells, cfg.admissible ? cfg.degree : 0);
      next_space = build_space(next, cfg.degree, cfg.truncated);
      if (system_size(*next_space, cfg.mode) > cfg.max_dofs) {
        stop = true;
        marked = MarkedSet{};
      }
    }
    rec.marked = marked.cells.size();
    result.records.push_back(rec);
    if (observe) observe(RunState{iter, cfg.mode, space, u_h, std::move(sys), ind, marked});
    if (stop) {
      result.final_space = space;
      result.final_coefficients.assign(u_h.coefficients().begin(), u_h.coefficients().end());
      result.final_indicators = std::move(ind);
      return result;
    }
    part = std::move(next);
    space = std::move(next_space);
  }
}

namespace {

double error_of(const ConvergenceRecord& r, bool triple) { return triple ? r.triple_error : r.energy_error; }

}  // namespace

std::vector<double> contraction_ratios(const std::vector<ConvergenceRecord>& records, double c_est, bool triple) {
  if (!(c_est > 0.0)) throw std::invalid_argument("C_est must be positive");
  for (const auto& r : records)
    if (std::isnan(error_of(r, triple))) throw std::invalid_argument("contraction ratios need the exact solution");
  std::vector<double> out;
  for (std::size_t k = 1; k < records.size(); ++k) {
    const auto q = [&](const ConvergenceRecord& r) {
      const double e = error_of(r, triple);
      return e * e + c_est * r.eta * r.eta;
    };
    out.push_back(q(records[k]) / q(records[k - 1]));
  }
  return out;
}

double calibrated_c_est(const std::vector<ConvergenceRecord>& records, bool triple) {
  if (records.empty()) throw std::invalid_argument("no records");
  const double e = error_of(records.front(), triple);
  const double eta = records.front().eta;
  if (std::isnan(e)) throw std::invalid_argument("calibration needs the exact solution");
  if (!(eta > 0.0)) throw std::invalid_argument("calibration needs a nonzero initial estimator");
  return e * e / (eta * eta);
}

std::vector<double> effectivity(const std::vector<ConvergenceRecord>& records) {
  std::vector<double> out;
  for (const auto& r : records) {
    if (std::isnan(r.energy_error)) throw std::invalid_argument("effectivity needs the exact solution");
    out.push_back(r.energy_error > 0.0 ? r.eta / r.energy_error : std::numeric_limits<double>::infinity());
  }
  return out;
}

PythagorasCheck pythagoras_check(const Analytic& u, const SplineFunction& coarse, const SplineFunction& fine,
                                 Mode mode, int quad_n) {
  if (mode != Mode::conforming) throw std::invalid_argument("Pythagoras identity holds only in conforming mode");
  const Partition& pc = coarse.space().partition();
  const Partition& pf = fine.space().partition();
  const Partition* finest = nullptr;
  if (pf.refines(pc))
    finest = &pf;
  else if (pc.refines(pf))
    finest = &pc;
  else
    throw std::invalid_argument("partitions are not nested");
  if (quad_n <= 0) quad_n = coarse.space().degree() + 4;
  const Field fu = analytic_field(u);
  const Field fc = spline_field(coarse);
  const Field ff = spline_field(fine);
  const double a = energy_norm(difference(fu, fc), *finest, quad_n);
  const double b = energy_norm(difference(ff, fc), *finest, quad_n);
  const double c = energy_norm(difference(fu, ff), *finest, quad_n);
  PythagorasCheck out;
  out.lhs = c * c;
  out.rhs = a * a - b * b;
  const double diff = std::abs(out.lhs - out.rhs);
  out.gap = a > 0.0 ? diff / (a * a) : diff;
  return out;
}

double inconsistency_sup(const Analytic& u, const SpaceHandle& s, const FormParams& raw, std::uint64_t seed,
                         int samples) {
  const FormParams params = raw.resolved(s->degree());
  const std::vector<double> g = inconsistency_functional(u, *s, params.quad_n);
  const std::vector<double> diag = triple_norm_diagonal(*s, params);
  double best = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (diag[k] > 0.0) best = std::max(best, std::abs(g[k]) / std::sqrt(diag[k]));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int n = 0; n < samples; ++n) {
    std::vector<double> c(s->dim());
    double num = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
      c[k] = coef(rng);
      num += g[k] * c[k];
    }
    const double den = triple_norm(spline_field(SplineFunction(s, c)), s->partition(), params, s->degree());
    if (den > 0.0) best = std::max(best, std::abs(num) / den);
  }
  return best;
}

double convergence_slope(const std::vector<ConvergenceRecord>& records,
                         const std::function<double(const ConvergenceRecord&)>& value) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& r : records) {
    const double v = value(r);
    if (!(v > 0.0) || r.n_dofs == 0) continue;
    const double x = std::log(static_cast<double>(r.n_dofs));
    const double y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  const double den = n * sxx - sx * sx;
  if (n < 2 || den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / den;
}

const char* const kCsvHeader = "iter,n_cells,n_dofs,energy_error,triple_error,eta,osc,bnorm32,bnorm12,marked,rho,effectivity";

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

}  // namespace

void write_csv(std::ostream& os, const std::vector<ConvergenceRecord>& records, double c_est, bool triple) {
  os << kCsvHeader << '\n';
  for (std::size_t k = 0; k < records.size(); ++k) {
    const ConvergenceRecord& r = records[k];
    double rho = std::numeric_limits<double>::quiet_NaN();
    double eff = std::numeric_limits<double>::quiet_NaN();
    const double e = error_of(r, triple);
    if (!std::isnan(e)) {
      eff = e > 0.0 ? r.eta / e : std::numeric_limits<double>::infinity();
      if (k > 0 && c_est > 0.0) {
        const double e0 = error_of(records[k - 1], triple);
        const double prev = e0 * e0 + c_est * records[k - 1].eta * records[k - 1].eta;
        if (prev > 0.0) rho = (e * e + c_est * r.eta * r.eta) / prev;
      }
    }
    os << r.iter << ',' << r.n_cells << ',' << r.n_dofs << ',' << num(r.energy_error) << ',' << num(r.triple_error)
       << ',' << num(r.eta) << ',' << num(r.osc) << ',' << num(r.bnorm32) << ',' << num(r.bnorm12) << ','
       << r.marked << ',' << num(rho) << ',' << num(eff) << '\n';
  }
}

}  // namespace afem
