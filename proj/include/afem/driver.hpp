#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "afem/assembly.hpp"
#include "afem/estimator.hpp"
#include "afem/solver.hpp"

namespace afem {

struct AfemConfig {
  int degree = 2;
  double theta = 0.5;
  double gamma1 = 0.0;  // 0 selects default_gamma(degree)
  double gamma2 = 0.0;
  Mode mode = Mode::conforming;
  int initial_levels = 2;
  std::size_t max_dofs = 20000;
  int max_iters = 25;
  int quad_n = 0;  // 0 selects degree + 2
  SolveOptions solver;
  bool truncated = true;
  /// Refine with the degree-r admissibility closure instead of edge grading
  /// alone.
  bool admissible = true;
  /// Evaluate the inconsistency surrogate each iteration (nitsche mode, exact
  /// solution known).
  bool track_inconsistency = false;
  std::uint64_t seed = 1;

  /// Throws ConfigurationError naming the offending parameter.
  void validate() const;
  FormParams form() const;
};

struct Problem {
  std::string name;
  Source f;
  std::optional<Analytic> exact;

  /// Samples u and du/dnu on the boundary; throws ConfigurationError when
  /// either exceeds 1e-12.
  void validate() const;
};

/// Built-in problems: "sin2" (manufactured) and "zero". Throws
/// ConfigurationError for other names.
Problem builtin_problem(const std::string& name);

/// Bivariate polynomial sum c x^p y^q.
struct Polynomial2 {
  struct Term {
    double c = 0.0;
    int p = 0;
    int q = 0;
  };
  std::vector<Term> terms;

  double operator()(Point x, MultiIndex d = {}) const;
  Polynomial2 derivative(MultiIndex d) const;
  Polynomial2 bilaplacian() const;
};

/// Problem with exact polynomial solution u and f = bilaplacian of u.
Problem polynomial_solution_problem(const std::string& name, const Polynomial2& u);
/// Problem with a polynomial source and no known solution.
Problem polynomial_source_problem(const std::string& name, const Polynomial2& f);

struct ConvergenceRecord {
  int iter = 0;
  std::size_t n_cells = 0;
  std::size_t n_dofs = 0;
  double energy_error = std::numeric_limits<double>::quiet_NaN();
  double triple_error = std::numeric_limits<double>::quiet_NaN();
  double eta = 0.0;
  double osc = 0.0;
  double bnorm32 = 0.0;
  double bnorm12 = 0.0;
  std::size_t marked = 0;
  double residual = 0.0;  // relative algebraic residual of the solve
  std::optional<double> inconsistency_sup;
};

/// Snapshot handed to the iteration observer.
struct RunState {
  int iter = 0;
  Mode mode = Mode::conforming;
  SpaceHandle space;
  SplineFunction solution;
  LinearSystem system;
  Indicators indicators;
  MarkedSet marked;
};

struct RunResult {
  std::vector<ConvergenceRecord> records;
  SpaceHandle final_space;
  std::vector<double> final_coefficients;
  Indicators final_indicators;
};

using Observer = std::function<void(const RunState&)>;

/// SOLVE, ESTIMATE, MARK, REFINE until max_iters iterations, until the next
/// space would exceed max_dofs, or until the estimator vanishes.
RunResult run(const AfemConfig& cfg, const Problem& prob, const Observer& observe = {});

/// (e_{k+1}^2 + C eta_{k+1}^2) / (e_k^2 + C eta_k^2). With `triple` the
/// triple-norm error is used. Throws std::invalid_argument when errors are
/// unknown or c_est <= 0.
std::vector<double> contraction_ratios(const std::vector<ConvergenceRecord>& records, double c_est,
                                       bool triple = false);
/// e_0^2 / eta_0^2.
double calibrated_c_est(const std::vector<ConvergenceRecord>& records, bool triple = false);
/// eta_k / e_k, +infinity where e_k = 0.
std::vector<double> effectivity(const std::vector<ConvergenceRecord>& records);

struct PythagorasCheck {
  double lhs = 0.0;  // ||Lap(u - U_*)||^2
  double rhs = 0.0;  // ||Lap(u - U)||^2 - ||Lap(U_* - U)||^2
  double gap = 0.0;  // |lhs - rhs| / ||Lap(u - U)||^2
};

/// Both sides of the Pythagoras identity for conforming iterates. Throws
/// std::invalid_argument in nitsche mode or when neither partition refines
/// the other.
PythagorasCheck pythagoras_check(const Analytic& u, const SplineFunction& coarse, const SplineFunction& fine,
                                 Mode mode, int quad_n = 0);

/// max |<E_P, v>| / |||v|||_P over the basis functions and `samples` random
/// splines.
double inconsistency_sup(const Analytic& u, const SpaceHandle& s, const FormParams& params, std::uint64_t seed,
                         int samples = 20);

/// Least-squares slope of log(value) against log(n_dofs).
double convergence_slope(const std::vector<ConvergenceRecord>& records,
                         const std::function<double(const ConvergenceRecord&)>& value);

extern const char* const kCsvHeader;
/// One row per record; rho uses `c_est` and is blank on the first row or when
/// no exact solution is known.
void write_csv(std::ostream& os, const std::vector<ConvergenceRecord>& records, double c_est, bool triple = false);

}  // namespace afem
