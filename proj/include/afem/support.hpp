#pragma once

#include <cstddef>
#include <vector>

#include "afem/splines.hpp"

namespace afem {

/// Cells met by the supports of all basis functions whose support meets the
/// given cell, sorted by index.
std::vector<std::size_t> support_extension(const HierarchicalSpace& s, std::size_t cell);

/// Union of the support extensions of the owners of an edge.
std::vector<std::size_t> support_extension(const HierarchicalSpace& s, const Edge& e);

struct ShapeReport {
  double max_edge_ratio = 0.0;       // max h_cell / h_edge over facets
  double max_extension_ratio = 0.0;  // max diam(extension) / h_cell
  std::size_t max_overlap_count = 0; // max number of cells in an extension
};

ShapeReport shape_report(const HierarchicalSpace& s);

}  // namespace afem
