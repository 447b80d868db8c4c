#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "afem/driver.hpp"
#include "afem/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

afem::Polynomial2 read_terms(const json& arr, const std::string& key) {
  if (!arr.is_array()) throw afem::ConfigurationError("problem: '" + key + "' must be an array of [c, p, q] terms");
  afem::Polynomial2 poly;
  for (const json& t : arr) {
    if (!t.is_array() || t.size() != 3) throw afem::ConfigurationError("problem: terms of '" + key + "' are [c, p, q]");
    const int p = t[1].get<int>(), q = t[2].get<int>();
    if (p < 0 || q < 0) throw afem::ConfigurationError("problem: negative exponent in '" + key + "'");
    poly.terms.push_back({t[0].get<double>(), p, q});
  }
  return poly;
}

// Problem file: {"name": ..., "u": [[c,p,q], ...]} for an exact polynomial
// solution, or {"name": ..., "f": [[c,p,q], ...]} for a source only.
afem::Problem load_problem(const std::string& arg) {
  if (arg == "sin2" || arg == "zero") return afem::builtin_problem(arg);
  std::ifstream in(arg);
  if (!in) throw afem::ConfigurationError("problem: unknown problem name or unreadable file '" + arg + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw afem::ConfigurationError("problem: cannot parse '" + arg + "': " + e.what());
  }
  const std::string name = j.value("name", fs::path(arg).stem().string());
  if (j.contains("u")) return afem::polynomial_solution_problem(name, read_terms(j["u"], "u"));
  if (j.contains("f")) return afem::polynomial_source_problem(name, read_terms(j["f"], "f"));
  throw afem::ConfigurationError("problem: file '" + arg + "' defines neither 'u' nor 'f'");
}

void write_atomically(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive spline FEM for the clamped biharmonic problem on the unit square"};
  afem::AfemConfig cfg;
  std::string problem = "sin2", mode = "conforming", solver = "direct", out_dir = "afem_out", load_path;
  bool dump_mesh = false, dump_indicators = false, save_solution = false, hb = false;
  app.add_option("--problem", problem, "sin2, zero, or a JSON problem file")->capture_default_str();
  app.add_option("--mode", mode, "conforming or nitsche")->capture_default_str();
  app.add_option("--degree", cfg.degree, "spline degree r >= 2")->capture_default_str();
  app.add_option("--theta", cfg.theta, "Dorfler parameter in (0, 1]")->capture_default_str();
  app.add_option("--gamma1", cfg.gamma1, "boundary value penalty (0 = 10 (r+1)^4)")->capture_default_str();
  app.add_option("--gamma2", cfg.gamma2, "normal derivative penalty (0 = 10 (r+1)^4)")->capture_default_str();
  app.add_option("--initial-levels", cfg.initial_levels, "uniform levels of the initial mesh")->capture_default_str();
  app.add_option("--max-dofs", cfg.max_dofs, "stop before a space exceeds this size")->capture_default_str();
  app.add_option("--max-iters", cfg.max_iters, "maximum number of iterations")->capture_default_str();
  app.add_option("--quad-n", cfg.quad_n, "Gauss points per direction (0 = degree + 2)")->capture_default_str();
  app.add_option("--solver", solver, "direct or cg")->capture_default_str();
  app.add_option("--cg-tol", cfg.solver.tol, "relative residual target of cg")->capture_default_str();
  app.add_option("--seed", cfg.seed, "seed of the random inconsistency samples")->capture_default_str();
  app.add_flag("--track-inconsistency", cfg.track_inconsistency, "report the inconsistency surrogate (nitsche)");
  app.add_flag("--hb", hb, "use the non-truncated hierarchical basis");
  bool edge_grading = false;
  app.add_flag("--edge-grading", edge_grading, "refine with edge grading only (no admissibility closure)");
  app.add_flag("--dump-mesh", dump_mesh, "write mesh_<iter>.txt per iteration");
  app.add_flag("--dump-indicators", dump_indicators, "write indicators_<iter>.txt per iteration");
  app.add_flag("--save-solution", save_solution, "write the final solution to solution.txt");
  app.add_option("--load-solution", load_path, "estimate a saved solution instead of running");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    try {
      cfg.mode = afem::parse_mode(mode);
    } catch (const afem::ConfigurationError& e) {
      throw afem::ConfigurationError(std::string("mode: ") + e.what());
    }
    try {
      cfg.solver.method = afem::parse_solve_method(solver);
    } catch (const std::exception& e) {
      throw afem::ConfigurationError(std::string("solver: ") + e.what());
    }
    cfg.truncated = !hb;
    cfg.admissible = !edge_grading;
    cfg.validate();
    const afem::Problem prob = load_problem(problem);
    fs::create_directories(out_dir);
    const fs::path out(out_dir);

    if (!load_path.empty()) {
      std::ifstream in(load_path);
      if (!in) throw afem::ConfigurationError("load-solution: cannot read '" + load_path + "'");
      const afem::SplineFunction fn = afem::load_solution(in);
      const afem::Indicators ind = afem::estimate_all(fn, prob.f, cfg.quad_n);
      std::ostringstream os;
      afem::write_indicators(os, fn.space().partition(), ind);
      write_atomically(out / "indicators_loaded.txt", os.str());
      std::printf("cells %zu eta %.12e\n", fn.space().partition().size(), std::sqrt(ind.total_sq));
      return 0;
    }

    const afem::RunResult res = afem::run(cfg, prob, [&](const afem::RunState& st) {
      char tag[32];
      std::snprintf(tag, sizeof tag, "%03d", st.iter);
      if (dump_mesh) write_atomically(out / ("mesh_" + std::string(tag) + ".txt"), afem::dump_mesh(st.space->partition()));
      if (dump_indicators) {
        std::ostringstream os;
        afem::write_indicators(os, st.space->partition(), st.indicators);
        write_atomically(out / ("indicators_" + std::string(tag) + ".txt"), os.str());
      }
    });

    const bool triple = cfg.mode == afem::Mode::nitsche;
    double c_est = 0.0;
    if (prob.exact && res.records.front().eta > 0.0) c_est = afem::calibrated_c_est(res.records, triple);
    std::ostringstream csv;
    afem::write_csv(csv, res.records, c_est, triple);
    write_atomically(out / "convergence.csv", csv.str());

    json outputs = {{"convergence", "convergence.csv"}};
    if (save_solution) {
      std::ostringstream os;
      afem::save_solution(os, afem::SplineFunction(res.final_space, res.final_coefficients));
      write_atomically(out / "solution.txt", os.str());
      outputs["solution"] = "solution.txt";
    }
    if (dump_mesh) outputs["meshes"] = "mesh_<iter>.txt";
    if (dump_indicators) outputs["indicators"] = "indicators_<iter>.txt";

    const afem::FormParams form = cfg.form();
    json manifest = {
        {"build", AFEM_BUILD_ID},
        {"problem", prob.name},
        {"config",
         {{"degree", cfg.degree},
          {"theta", cfg.theta},
          {"gamma1", form.gamma1},
          {"gamma2", form.gamma2},
          {"mode", afem::to_string(cfg.mode)},
          {"initial_levels", cfg.initial_levels},
          {"max_dofs", cfg.max_dofs},
          {"max_iters", cfg.max_iters},
          {"quad_n", form.quad_n},
          {"solver", afem::to_string(cfg.solver.method)},
          {"truncated", cfg.truncated},
          {"admissible", cfg.admissible},
          {"seed", cfg.seed}}},
        {"iterations", res.records.size()},
        {"final_dofs", res.records.back().n_dofs},
        {"final_eta", res.records.back().eta},
        {"c_est", number_or_null(c_est > 0.0 ? c_est : std::nan(""))},
        {"slopes",
         {{"eta_vs_dofs", number_or_null(afem::convergence_slope(res.records, [](const auto& r) { return r.eta; }))},
          {"error_vs_dofs",
           number_or_null(afem::convergence_slope(res.records, [](const auto& r) { return r.energy_error; }))}}},
        {"outputs", outputs}};
    write_atomically(out / "manifest.json", manifest.dump(2) + "\n");
    std::printf("%zu iterations, final dofs %zu, eta %.6e\n", res.records.size(), res.records.back().n_dofs,
                res.records.back().eta);
    return 0;
  } catch (const afem::ConfigurationError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const afem::SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
