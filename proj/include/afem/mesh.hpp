#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace afem {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Dyadic square cell of the unit square, addressed by (level, i, j).
/// Ordering is lexicographic in (level, i, j); this is the "cell key" order
/// used everywhere a deterministic traversal is needed.
struct Cell {
  int level = 0;
  int i = 0;
  int j = 0;

  double side() const { return std::ldexp(1.0, -level); }
  double x0() const { return i * side(); }
  double y0() const { return j * side(); }
  Point center() const { return {(i + 0.5) * side(), (j + 0.5) * side()}; }
  double area() const { return side() * side(); }

  Cell parent() const { return {level - 1, i / 2, j / 2}; }
  std::array<Cell, 4> children() const {
    return {{{level + 1, 2 * i, 2 * j},
             {level + 1, 2 * i + 1, 2 * j},
             {level + 1, 2 * i, 2 * j + 1},
             {level + 1, 2 * i + 1, 2 * j + 1}}};
  }
  /// Ancestor (or self) at a coarser or equal level.
  Cell ancestor(int at_level) const {
    const int shift = level - at_level;
    return {at_level, i >> shift, j >> shift};
  }
  /// True if `other` is this cell or lies inside it.
  bool contains(const Cell& other) const {
    return other.level >= level && other.ancestor(level) == *this;
  }
  /// Local coordinates of a point in [0,1]^2 relative to this cell.
  Point to_local(Point p) const {
    const double h = side();
    return {(p.x - x0()) / h, (p.y - y0()) / h};
  }
  Point to_global(Point s) const {
    const double h = side();
    return {x0() + s.x * h, y0() + s.y * h};
  }

  std::uint64_t key() const {
    return (static_cast<std::uint64_t>(level) << 58) |
           (static_cast<std::uint64_t>(i) << 29) | static_cast<std::uint64_t>(j);
  }

  auto operator<=>(const Cell&) const = default;
};

std::ostream& operator<<(std::ostream& os, const Cell& c);

struct CellHash {
  std::size_t operator()(const Cell& c) const noexcept {
    return std::hash<std::uint64_t>{}(c.key());
  }
};

/// Graded quadtree partition of the unit square. Immutable once built.
class Partition {
 public:
  /// Builds from an explicit list of active cells. Throws std::invalid_argument
  /// if the cells do not tile the unit square.
  explicit Partition(std::vector<Cell> cells, int generation = 0);

  std::span<const Cell> cells() const { return cells_; }
  std::size_t size() const { return cells_.size(); }
  const Cell& cell(std::size_t k) const { return cells_[k]; }
  int generation() const { return generation_; }
  int max_level() const { return max_level_; }

  std::optional<std::size_t> find(const Cell& c) const;
  /// True if `c` is active or has active descendants.
  bool is_node(const Cell& c) const { return nodes_.contains(c.key()); }
  /// Index of the active cell that contains `c`, if `c` is not strictly
  /// subdivided in this partition.
  std::optional<std::size_t> covering(const Cell& c) const;
  /// Index of an active cell containing `p` (closed cells; points on shared
  /// facets go to the cell on the upper/right side, except on x=1 or y=1).
  std::size_t locate(Point p) const;
  /// True if every cell of this partition is contained in an active cell of
  /// `coarse`.
  bool refines(const Partition& coarse) const;

 private:
  std::vector<Cell> cells_;
  int generation_ = 0;
  int max_level_ = 0;
  std::unordered_map<std::uint64_t, std::size_t> index_;
  std::unordered_set<std::uint64_t> nodes_;
};

Partition uniform_partition(int levels);

/// Splits every marked cell into its four children and then refines further
/// until neighbouring cells across an edge differ by at most one level.
/// With patch > 0 the closure is stronger: whenever a level-l cell is split,
/// every active cell meeting the (2 patch + 1)^2 block of level-l cells around
/// it is at level >= l. patch = r gives admissible hierarchical meshes for
/// degree r. Throws std::invalid_argument when a marked cell is not active.
Partition refine(const Partition& p, std::span<const Cell> marked, int patch = 0);

enum class EdgeKind { interior, boundary };

/// Axis-aligned facet. `normal_axis` is 0 for vertical edges (normal along x)
/// and 1 for horizontal ones. Interior edges carry the normal +e_axis;
/// boundary edges carry the outward normal.
struct Edge {
  EdgeKind kind = EdgeKind::interior;
  int normal_axis = 0;
  int normal_sign = 1;
  double offset = 0.0;  // coordinate along the normal axis
  double start = 0.0;   // tangential start coordinate
  double length = 0.0;
  /// owners[0] is the owner with the lower cell key; owners[1] is unused for
  /// boundary edges.
  std::array<std::size_t, 2> owners{0, 0};

  Point at(double t) const {
    const double s = start + t * length;
    return normal_axis == 0 ? Point{offset, s} : Point{s, offset};
  }
  Point normal() const {
    return normal_axis == 0 ? Point{double(normal_sign), 0.0}
                            : Point{0.0, double(normal_sign)};
  }
};

struct EdgeSet {
  std::vector<Edge> interior;
  std::vector<Edge> boundary;
};

/// Interior and boundary facets. At level interfaces the edges are the
/// facets of the finer cell.
EdgeSet edges(const Partition& p);

/// One `level i j` line per active cell, in cell-key order.
std::string dump_mesh(const Partition& p);
void write_mesh(std::ostream& os, const Partition& p);
Partition read_mesh(std::istream& is);

}  // namespace afem
