#pragma once

#include <afem/mesh.hpp>
#include <afem/splines.hpp>
#include <random>
#include <vector>

namespace testing {

using Rng = std::mt19937_64;

/// Random refinement sequence starting from a uniform mesh.
inline afem::Partition random_partition(Rng& rng, int start_levels, int rounds, double fraction,
                                        int max_level = 7, int patch = 0) {
  afem::Partition p = afem::uniform_partition(start_levels);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int r = 0; r < rounds; ++r) {
    std::vector<afem::Cell> marked;
    for (const afem::Cell& c : p.cells())
      if (c.level < max_level && u(rng) < fraction) marked.push_back(c);
    p = afem::refine(p, marked, patch);
  }
  return p;
}

inline std::vector<double> random_coefficients(Rng& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> c(n);
  for (double& v : c) v = u(rng);
  return c;
}

inline afem::SplineFunction random_spline(Rng& rng, const afem::SpaceHandle& s) {
  return afem::SplineFunction(s, random_coefficients(rng, s->dim()));
}

/// Random point strictly inside the unit square.
inline afem::Point random_point(Rng& rng, double margin = 1e-3) {
  std::uniform_real_distribution<double> u(margin, 1.0 - margin);
  return {u(rng), u(rng)};
}

/// Random point strictly inside a cell, away from its boundary by `margin`
/// times the side.
inline afem::Point random_point_in(Rng& rng, const afem::Cell& c, double margin = 0.05) {
  std::uniform_real_distribution<double> u(margin, 1.0 - margin);
  return c.to_global({u(rng), u(rng)});
}

/// The 7-cell mesh: uniform level 1 with cell (1,0,0) refined.
inline afem::Partition seven_cell_mesh() {
  const afem::Cell c{1, 0, 0};
  return afem::refine(afem::uniform_partition(1), std::span<const afem::Cell>(&c, 1));
}

}  // namespace testing
