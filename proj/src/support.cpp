#include "afem/support.hpp"

#include <algorithm>
#include <cmath>

namespace afem {

std::vector<std::size_t> support_extension(const HierarchicalSpace& s, std::size_t cell) {
  std::vector<std::size_t> out;
  for (const CellDof& d : s.cell_dofs(cell)) {
    const auto supp = s.support(d.dof);
    out.insert(out.end(), supp.begin(), supp.end());
  }
  out.push_back(cell);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::size_t> support_extension(const HierarchicalSpace& s, const Edge& e) {
  std::vector<std::size_t> out = support_extension(s, e.owners[0]);
  if (e.kind == EdgeKind::interior) {
    const auto other = support_extension(s, e.owners[1]);
    out.insert(out.end(), other.begin(), other.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return out;
}

ShapeReport shape_report(const HierarchicalSpace& s) {
  const Partition& p = s.partition();
  ShapeReport rep;
  const EdgeSet es = edges(p);
  auto edge_ratio = [&](const Edge& e, std::size_t owner) {
    rep.max_edge_ratio = std::max(rep.max_edge_ratio, p.cell(owner).side() / e.length);
  };
  for (const Edge& e : es.interior) {
    edge_ratio(e, e.owners[0]);
    edge_ratio(e, e.owners[1]);
  }
  for (const Edge& e : es.boundary) edge_ratio(e, e.owners[0]);

  for (std::size_t k = 0; k < p.size(); ++k) {
    const auto ext = support_extension(s, k);
    rep.max_overlap_count = std::max(rep.max_overlap_count, ext.size());
    std::vector<Point> corners;
    for (std::size_t m : ext) {
      const Cell& c = p.cell(m);
      const double h = c.side();
      corners.insert(corners.end(), {{c.x0(), c.y0()}, {c.x0() + h, c.y0()}, {c.x0(), c.y0() + h}, {c.x0() + h, c.y0() + h}});
    }
    double diam = 0.0;
    for (std::size_t a = 0; a < corners.size(); ++a)
      for (std::size_t b = a + 1; b < corners.size(); ++b)
        diam = std::max(diam, std::hypot(corners[a].x - corners[b].x, corners[a].y - corners[b].y));
    rep.max_extension_ratio = std::max(rep.max_extension_ratio, diam / p.cell(k).side());
  }
  return rep;
}

}  // namespace afem
