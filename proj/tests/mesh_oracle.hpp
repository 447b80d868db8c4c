#pragma once

#include <afem/mesh.hpp>
#include <algorithm>
#include <optional>
#include <set>
#include <tuple>
#include <vector>

namespace testing {

using afem::Cell;
using afem::Partition;

// Shared facet of two cells, found by comparing their boundaries directly.
struct Facet {
  int axis;
  double offset, start, length;
  Cell a, b;  // a < b
  auto key() const { return std::tuple(axis, offset, start, length, a, b); }
};

inline std::optional<Facet> shared_facet(const Cell& a, const Cell& b) {
  const double ax1 = a.x0() + a.side(), ay1 = a.y0() + a.side();
  const double bx1 = b.x0() + b.side(), by1 = b.y0() + b.side();
  const auto overlap = [](double lo1, double hi1, double lo2, double hi2) {
    return std::pair(std::max(lo1, lo2), std::min(hi1, hi2));
  };
  Facet f{};
  if (ax1 == b.x0() || bx1 == a.x0()) {
    auto [lo, hi] = overlap(a.y0(), ay1, b.y0(), by1);
    if (hi <= lo) return std::nullopt;
    f = Facet{0, ax1 == b.x0() ? ax1 : bx1, lo, hi - lo, std::min(a, b), std::max(a, b)};
    return f;
  }
  if (ay1 == b.y0() || by1 == a.y0()) {
    auto [lo, hi] = overlap(a.x0(), ax1, b.x0(), bx1);
    if (hi <= lo) return std::nullopt;
    f = Facet{1, ay1 == b.y0() ? ay1 : by1, lo, hi - lo, std::min(a, b), std::max(a, b)};
    return f;
  }
  return std::nullopt;
}

inline std::vector<Facet> brute_force_interior(const Partition& p) {
  std::vector<Facet> out;
  for (std::size_t a = 0; a < p.size(); ++a)
    for (std::size_t b = a + 1; b < p.size(); ++b)
      if (auto f = shared_facet(p.cell(a), p.cell(b))) out.push_back(*f);
  return out;
}

inline bool interiors_overlap(const Cell& a, const Cell& b) {
  return a.x0() < b.x0() + b.side() && b.x0() < a.x0() + a.side() && a.y0() < b.y0() + b.side() &&
         b.y0() < a.y0() + a.side();
}

/// True when edges(p) lists exactly the facets found by the pairwise scan,
/// with owners in key order, and the boundary facets of the boundary cells.
inline bool edges_match_oracle(const Partition& p) {
  const afem::EdgeSet es = afem::edges(p);
  std::set<decltype(std::declval<Facet>().key())> mine, oracle;
  for (const afem::Edge& e : es.interior) {
    const Cell& a = p.cell(e.owners[0]);
    const Cell& b = p.cell(e.owners[1]);
    if (!(a < b)) return false;
    mine.insert(Facet{e.normal_axis, e.offset, e.start, e.length, a, b}.key());
  }
  for (const Facet& f : brute_force_interior(p)) oracle.insert(f.key());
  if (mine.size() != es.interior.size() || mine != oracle) return false;
  std::set<std::tuple<int, double, double, double>> bmine, boracle;
  for (const afem::Edge& e : es.boundary) bmine.insert({e.normal_axis, e.offset, e.start, e.length});
  for (const Cell& c : p.cells()) {
    const double h = c.side();
    if (c.x0() == 0.0) boracle.insert({0, 0.0, c.y0(), h});
    if (c.x0() + h == 1.0) boracle.insert({0, 1.0, c.y0(), h});
    if (c.y0() == 0.0) boracle.insert({1, 0.0, c.x0(), h});
    if (c.y0() + h == 1.0) boracle.insert({1, 1.0, c.x0(), h});
  }
  return bmine.size() == es.boundary.size() && bmine == boracle;
}

}  // namespace testing
