#include "afem/mesh.hpp"

#include <algorithm>
#include <deque>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace afem {

std::ostream& operator<<(std::ostream& os, const Cell& c) {
  return os << '(' << c.level << ',' << c.i << ',' << c.j << ')';
}

Partition::Partition(std::vector<Cell> cells, int generation)
    : cells_(std::move(cells)), generation_(generation) {
  std::sort(cells_.begin(), cells_.end());
  if (cells_.empty()) throw std::invalid_argument("partition has no cells");
  double area = 0.0;
  for (std::size_t k = 0; k < cells_.size(); ++k) {
    const Cell& c = cells_[k];
    const int n = 1 << c.level;
    if (c.level < 0 || c.level > 28 || c.i < 0 || c.j < 0 || c.i >= n || c.j >= n) {
      std::ostringstream msg;
      msg << "cell " << c << " outside the unit square";
      throw std::invalid_argument(msg.str());
    }
    if (!index_.emplace(c.key(), k).second) {
      std::ostringstream msg;
      msg << "duplicate cell " << c;
      throw std::invalid_argument(msg.str());
    }
    area += c.area();
    max_level_ = std::max(max_level_, c.level);
  }
  for (const Cell& c : cells_) {
    for (int l = c.level; l >= 0; --l) nodes_.insert(c.ancestor(l).key());
  }
  for (const Cell& c : cells_) {
    for (int l = c.level - 1; l >= 0; --l) {
      if (index_.contains(c.ancestor(l).key())) {
        std::ostringstream msg;
        msg << "cell " << c << " overlaps active ancestor " << c.ancestor(l);
        throw std::invalid_argument(msg.str());
      }
    }
  }
  if (area != 1.0) throw std::invalid_argument("cells do not cover the unit square");
}

std::optional<std::size_t> Partition::find(const Cell& c) const {
  auto it = index_.find(c.key());
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Partition::covering(const Cell& c) const {
  for (int l = std::min(c.level, max_level_); l >= 0; --l) {
    if (auto k = find(c.ancestor(l))) return k;
  }
  return std::nullopt;
}

std::size_t Partition::locate(Point p) const {
  Cell c{0, 0, 0};
  while (true) {
    if (auto k = find(c)) return *k;
    const int n = 1 << (c.level + 1);
    int i = static_cast<int>(std::floor(p.x * n));
    int j = static_cast<int>(std::floor(p.y * n));
    i = std::clamp(i, 2 * c.i, 2 * c.i + 1);
    j = std::clamp(j, 2 * c.j, 2 * c.j + 1);
    c = Cell{c.level + 1, i, j};
    if (c.level > max_level_) throw std::logic_error("locate descended past the finest level");
  }
}

bool Partition::refines(const Partition& coarse) const {
  return std::all_of(cells_.begin(), cells_.end(), [&](const Cell& c) {
    return coarse.covering(c).has_value();
  });
}

Partition uniform_partition(int levels) {
  if (levels < 0) throw std::invalid_argument("levels must be non-negative");
  const int n = 1 << levels;
  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) cells.push_back({levels, i, j});
  return Partition(std::move(cells));
}

namespace {

constexpr std::array<std::array<int, 2>, 4> kNeighbours{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};

// Active cell containing `c`, using a plain set of active cells.
std::optional<Cell> covering_in(const std::unordered_set<Cell, CellHash>& active, const Cell& c) {
  for (int l = c.level; l >= 0; --l) {
    Cell a = c.ancestor(l);
    if (active.contains(a)) return a;
  }
  return std::nullopt;
}

}  // namespace

Partition refine(const Partition& p, std::span<const Cell> marked, int patch) {
  if (patch < 0) throw std::invalid_argument("patch must be non-negative");
  std::unordered_set<Cell, CellHash> active(p.cells().begin(), p.cells().end());
  for (const Cell& m : marked) {
    if (!active.contains(m)) {
      std::ostringstream msg;
      msg << "stale marking: cell " << m << " is not active";
      throw std::invalid_argument(msg.str());
    }
  }
  if (marked.empty()) return p;

  std::deque<Cell> queue(marked.begin(), marked.end());
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    if (!active.erase(c)) continue;
    for (const Cell& child : c.children()) active.insert(child);
    const int n = 1 << (c.level + 1);
    for (const Cell& child : c.children()) {
      for (auto [di, dj] : kNeighbours) {
        const int i = child.i + di;
        const int j = child.j + dj;
        if (i < 0 || j < 0 || i >= n || j >= n) continue;
        auto cov = covering_in(active, Cell{child.level, i, j});
        if (cov && cov->level < child.level - 1) queue.push_back(*cov);
      }
    }
    const int m = 1 << c.level;
    for (int i = std::max(0, c.i - patch); i <= std::min(m - 1, c.i + patch); ++i)
      for (int j = std::max(0, c.j - patch); j <= std::min(m - 1, c.j + patch); ++j) {
        auto cov = covering_in(active, Cell{c.level, i, j});
        if (cov && cov->level < c.level) queue.push_back(*cov);
      }
  }
  return Partition(std::vector<Cell>(active.begin(), active.end()), p.generation() + 1);
}

EdgeSet edges(const Partition& p) {
  EdgeSet out;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const Cell& c = p.cell(k);
    const int n = 1 << c.level;
    const double h = c.side();
    for (int side = 0; side < 4; ++side) {
      const auto [di, dj] = kNeighbours[side];
      Edge e;
      e.normal_axis = side < 2 ? 0 : 1;
      e.length = h;
      if (e.normal_axis == 0) {
        e.offset = di < 0 ? c.x0() : c.x0() + h;
        e.start = c.y0();
      } else {
        e.offset = dj < 0 ? c.y0() : c.y0() + h;
        e.start = c.x0();
      }
      const int i = c.i + di;
      const int j = c.j + dj;
      if (i < 0 || j < 0 || i >= n || j >= n) {
        e.kind = EdgeKind::boundary;
        e.normal_sign = (di + dj) > 0 ? 1 : -1;
        e.owners = {k, k};
        out.boundary.push_back(e);
        continue;
      }
      auto cov = p.covering(Cell{c.level, i, j});
      if (!cov) continue;  // finer neighbours own this facet
      const Cell& nb = p.cell(*cov);
      if (nb.level == c.level && (di + dj) < 0) continue;  // counted from the other side
      e.kind = EdgeKind::interior;
      e.normal_sign = 1;
      e.owners = c < nb ? std::array<std::size_t, 2>{k, *cov} : std::array<std::size_t, 2>{*cov, k};
      out.interior.push_back(e);
    }
  }
  return out;
}

void write_mesh(std::ostream& os, const Partition& p) {
  for (const Cell& c : p.cells()) os << c.level << ' ' << c.i << ' ' << c.j << '\n';
}

std::string dump_mesh(const Partition& p) {
  std::ostringstream os;
  write_mesh(os, p);
  return os.str();
}

Partition read_mesh(std::istream& is) {
  std::vector<Cell> cells;
  Cell c;
  while (is >> c.level >> c.i >> c.j) cells.push_back(c);
  return Partition(std::move(cells));
}

}  // namespace afem
