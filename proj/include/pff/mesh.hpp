#pragma once

// Quadtree mesh over a square domain with 2:1 balanced local refinement.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace pff {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline constexpr int no_cell = -1;

/// Faces are numbered left, right, bottom, top.
enum Face : int { face_left = 0, face_right = 1, face_bottom = 2, face_top = 3 };

/// Vertex ordering is lexicographic everywhere: lower-left, lower-right,
/// upper-left, upper-right. Children use the same ordering.
struct Cell {
  int id = no_cell;
  int level = 0;
  std::int64_t ix = 0;  // index in the level grid (n * 2^level per axis)
  std::int64_t iy = 0;
  int parent = no_cell;
  std::array<int, 4> children{no_cell, no_cell, no_cell, no_cell};
  std::array<int, 4> vertices{};
  /// Same-level neighbor if it exists, otherwise the coarser leaf covering
  /// the face, or no_cell on the domain boundary.
  std::array<int, 4> neighbors{no_cell, no_cell, no_cell, no_cell};

  bool is_leaf() const { return children[0] == no_cell; }
};

struct LevelView {
  int level = 0;
  std::vector<int> cells;
  /// interface_flags[i][f]: face f of cells[i] borders a coarser leaf.
  std::vector<std::array<bool, 4>> interface_flags;
};

struct HangingVertex {
  int vertex = 0;
  std::array<int, 2> parents{};
};

class QuadMesh {
public:
  /// Largest supported refinement level; vertex keys live on a lattice with
  /// this many binary subdivisions per base cell.
  static constexpr int lattice_bits = 24;

  QuadMesh() = default;

  QuadMesh(Point lo, Point hi, int n) : lo_(lo), hi_(hi), n_(n) {
    if (n < 1 || n > 32)
      throw std::invalid_argument("build_base_grid: subdivisions must be in [1, 32]");
    if (!(hi.x > lo.x) || !(hi.y > lo.y))
      throw std::invalid_argument("build_base_grid: degenerate rectangle");
    if (std::abs((hi.x - lo.x) - (hi.y - lo.y)) > 1e-12 * (hi.x - lo.x))
      throw std::invalid_argument("build_base_grid: only square domains are supported");
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        add_cell(0, i, j, no_cell);
    finalize();
  }

  Point domain_lo() const { return lo_; }
  Point domain_hi() const { return hi_; }
  int base_subdivisions() const { return n_; }
  int max_level() const { return max_level_; }

  const std::vector<Cell>& cells() const { return cells_; }
  const Cell& cell(int id) const { return cells_[static_cast<std::size_t>(id)]; }
  const std::vector<int>& active_cells() const { return active_; }

  std::size_t n_vertices() const { return vertex_points_.size(); }
  const Point& vertex(int v) const { return vertex_points_[static_cast<std::size_t>(v)]; }
  const std::vector<Point>& vertices() const { return vertex_points_; }

  double cell_size(int level) const {
    return (hi_.x - lo_.x) / (static_cast<double>(n_) * std::ldexp(1.0, level));
  }
  double cell_size(const Cell& c) const { return cell_size(c.level); }
  Point cell_lo(const Cell& c) const {
    const double h = cell_size(c);
    return {lo_.x + static_cast<double>(c.ix) * h, lo_.y + static_cast<double>(c.iy) * h};
  }

  /// Smallest edge length among leaves.
  double min_cell_size() const {
    int lmax = 0;
    for (int id : active_) lmax = std::max(lmax, cell(id).level);
    return cell_size(lmax);
  }

  bool is_boundary_vertex(int v) const {
    const Point& p = vertex(v);
    const double tol = 1e-12 * (hi_.x - lo_.x);
    return std::abs(p.x - lo_.x) < tol || std::abs(p.x - hi_.x) < tol ||
           std::abs(p.y - lo_.y) < tol || std::abs(p.y - hi_.y) < tol;
  }

  /// Cell id at (level, ix, iy), or no_cell if that cell does not exist.
  int find(int level, std::int64_t ix, std::int64_t iy) const {
    auto it = lookup_.find(key(level, ix, iy));
    return it == lookup_.end() ? no_cell : it->second;
  }

  void refine_global() {
    const std::vector<int> leaves = active_;
    for (int id : leaves) split(id);
    finalize();
  }

  /// Refines every leaf overlapping the open box (positive-area overlap),
  /// `times` passes, re-balancing after each pass.
  void refine_box(Point box_lo, Point box_hi, int times) {
    if (times < 0) throw std::invalid_argument("refine_box: negative pass count");
    for (int pass = 0; pass < times; ++pass) {
      std::vector<int> marked;
      for (int id : active_) {
        const Cell& c = cell(id);
        const Point p = cell_lo(c);
        const double h = cell_size(c);
        if (p.x < box_hi.x && p.x + h > box_lo.x && p.y < box_hi.y && p.y + h > box_lo.y)
          marked.push_back(id);
      }
      if (marked.empty()) return;
      for (int id : marked) split(id);
      balance();
      finalize();
    }
  }

  /// Refines the given leaves, then restores balance.
  void refine_cells(const std::vector<int>& leaves) {
    for (int id : leaves)
      if (cell(id).is_leaf()) split(id);
    balance();
    finalize();
  }

  /// Vertices sitting at the midpoint of an edge of a coarser leaf.
  std::vector<HangingVertex> hanging_vertices() const {
    std::vector<HangingVertex> out;
    std::vector<char> seen(n_vertices(), 0);
    // local vertex pairs per face, and the child pair touching that face
    static constexpr std::array<std::array<int, 2>, 4> face_vertices{{{0, 2}, {1, 3}, {0, 1}, {2, 3}}};
    for (int id : active_) {
      const Cell& c = cell(id);
      for (int f = 0; f < 4; ++f) {
        const int nb = same_level_neighbor(c, f);
        if (nb == no_cell || cell(nb).is_leaf()) continue;
        const Cell& n = cell(nb);
        // the neighbor's children along the shared face share the midpoint
        const int opposite = f ^ 1;
        const int child = n.children[static_cast<std::size_t>(face_vertices[static_cast<std::size_t>(opposite)][0])];
        const int mid = cell(child).vertices[static_cast<std::size_t>(face_vertices[static_cast<std::size_t>(opposite)][1])];
        if (seen[static_cast<std::size_t>(mid)]) continue;
        seen[static_cast<std::size_t>(mid)] = 1;
        out.push_back({mid,
                       {c.vertices[static_cast<std::size_t>(face_vertices[static_cast<std::size_t>(f)][0])],
                        c.vertices[static_cast<std::size_t>(face_vertices[static_cast<std::size_t>(f)][1])]}});
      }
    }
    return out;
  }

  LevelView level_view(int level) const {
    if (level < 0 || level > max_level_) throw std::out_of_range("level_view: level out of range");
    LevelView view;
    view.level = level;
    for (int id : tree_order_) {
      const Cell& c = cell(id);
      if (c.level != level) continue;
      view.cells.push_back(id);
      std::array<bool, 4> flags{};
      for (int f = 0; f < 4; ++f) {
        const bool on_boundary = !in_domain(c.level, c.ix + dx(f), c.iy + dy(f));
        flags[static_cast<std::size_t>(f)] = !on_boundary && same_level_neighbor(c, f) == no_cell;
      }
      view.interface_flags.push_back(flags);
    }
    return view;
  }

  /// All cells in depth-first tree order.
  const std::vector<int>& tree_order() const { return tree_order_; }

  void write_vtk(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "# vtk DataFile Version 3.0\nquadtree mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << n_vertices() << " double\n";
    out.precision(17);
    for (const Point& p : vertex_points_) out << p.x << ' ' << p.y << " 0\n";
    out << "CELLS " << active_.size() << ' ' << active_.size() * 5 << '\n';
    for (int id : active_) {
      const auto& v = cell(id).vertices;
      out << "4 " << v[0] << ' ' << v[1] << ' ' << v[3] << ' ' << v[2] << '\n';
    }
    out << "CELL_TYPES " << active_.size() << '\n';
    for (std::size_t i = 0; i < active_.size(); ++i) out << "9\n";
    out << "CELL_DATA " << active_.size() << "\nSCALARS level int 1\nLOOKUP_TABLE default\n";
    for (int id : active_) out << cell(id).level << '\n';
  }

private:
  static constexpr int dx(int f) { return f == face_left ? -1 : (f == face_right ? 1 : 0); }
  static constexpr int dy(int f) { return f == face_bottom ? -1 : (f == face_top ? 1 : 0); }

  // level < 32 and indices < 2^29 for base grids up to 32 cells per axis
  static std::uint64_t key(int level, std::int64_t ix, std::int64_t iy) {
    return (static_cast<std::uint64_t>(level) << 58) | (static_cast<std::uint64_t>(ix) << 29) |
           static_cast<std::uint64_t>(iy);
  }

  bool in_domain(int level, std::int64_t ix, std::int64_t iy) const {
    const std::int64_t n = static_cast<std::int64_t>(n_) << level;
    return ix >= 0 && iy >= 0 && ix < n && iy < n;
  }

  int same_level_neighbor(const Cell& c, int f) const {
    const std::int64_t ix = c.ix + dx(f), iy = c.iy + dy(f);
    if (!in_domain(c.level, ix, iy)) return no_cell;
    return find(c.level, ix, iy);
  }

  int add_cell(int level, std::int64_t ix, std::int64_t iy, int parent) {
    if (level > lattice_bits) throw std::length_error("QuadMesh: refinement level limit exceeded");
    Cell c;
    c.id = static_cast<int>(cells_.size());
    c.level = level;
    c.ix = ix;
    c.iy = iy;
    c.parent = parent;
    lookup_.emplace(key(level, ix, iy), c.id);
    cells_.push_back(c);
    return c.id;
  }

  void split(int id) {
    if (!cell(id).is_leaf()) return;
    const int level = cell(id).level + 1;
    const std::int64_t ix = 2 * cell(id).ix, iy = 2 * cell(id).iy;
    std::array<int, 4> kids{};
    for (int k = 0; k < 4; ++k) kids[static_cast<std::size_t>(k)] = add_cell(level, ix + (k & 1), iy + (k >> 1), id);
    cells_[static_cast<std::size_t>(id)].children = kids;
  }

  /// Deepest existing cell containing the level-`level` position (ix, iy).
  int containing_cell(int level, std::int64_t ix, std::int64_t iy) const {
    for (int l = level; l >= 0; --l) {
      const int id = find(l, ix, iy);
      if (id != no_cell) return id;
      ix >>= 1;
      iy >>= 1;
    }
    return no_cell;
  }

  /// Vertex 2:1 balance: any two leaves sharing a vertex differ by at most
  /// one level.
  void balance() {
    bool changed = true;
    while (changed) {
      changed = false;
      std::vector<int> leaves;
      for (const Cell& c : cells_)
        if (c.is_leaf() && c.level >= 2) leaves.push_back(c.id);
      std::vector<int> to_split;
      for (int id : leaves) {
        const Cell& c = cell(id);
        for (int ddy = -1; ddy <= 1; ++ddy)
          for (int ddx = -1; ddx <= 1; ++ddx) {
            if (ddx == 0 && ddy == 0) continue;
            const std::int64_t nx = c.ix + ddx, ny = c.iy + ddy;
            if (!in_domain(c.level, nx, ny)) continue;
            const int cover = containing_cell(c.level, nx, ny);
            if (cell(cover).level < c.level - 1) to_split.push_back(cover);
          }
      }
      std::sort(to_split.begin(), to_split.end());
      to_split.erase(std::unique(to_split.begin(), to_split.end()), to_split.end());
      for (int id : to_split) {
        split(id);
        changed = true;
      }
    }
  }

  void finalize() {
    max_level_ = 0;
    for (const Cell& c : cells_) max_level_ = std::max(max_level_, c.level);

    tree_order_.clear();
    active_.clear();
    std::vector<int> stack;
    for (int id = n_ * n_ - 1; id >= 0; --id) stack.push_back(id);
    while (!stack.empty()) {
      const int id = stack.back();
      stack.pop_back();
      tree_order_.push_back(id);
      const Cell& c = cell(id);
      if (c.is_leaf()) {
        active_.push_back(id);
      } else {
        for (int k = 3; k >= 0; --k) stack.push_back(c.children[static_cast<std::size_t>(k)]);
      }
    }

    // vertex ids in order of first encounter along the tree order
    vertex_points_.clear();
    std::unordered_map<std::uint64_t, int> vertex_ids;
    const double h0 = cell_size(0);
    for (int id : tree_order_) {
      Cell& c = cells_[static_cast<std::size_t>(id)];
      const int shift = lattice_bits - c.level;
      for (int k = 0; k < 4; ++k) {
        const std::uint64_t X = static_cast<std::uint64_t>(c.ix + (k & 1)) << shift;
        const std::uint64_t Y = static_cast<std::uint64_t>(c.iy + (k >> 1)) << shift;
        const std::uint64_t vkey = (X << 32) ^ Y;
        auto [it, inserted] = vertex_ids.emplace(vkey, static_cast<int>(vertex_points_.size()));
        if (inserted) {
          const double scale = h0 / std::ldexp(1.0, lattice_bits);
          vertex_points_.push_back({lo_.x + static_cast<double>(X) * scale, lo_.y + static_cast<double>(Y) * scale});
        }
        c.vertices[static_cast<std::size_t>(k)] = it->second;
      }
    }

    for (Cell& c : cells_) {
      for (int f = 0; f < 4; ++f) {
        const std::int64_t nx = c.ix + dx(f), ny = c.iy + dy(f);
        c.neighbors[static_cast<std::size_t>(f)] = in_domain(c.level, nx, ny) ? containing_cell(c.level, nx, ny) : no_cell;
      }
    }
  }

  Point lo_{}, hi_{};
  int n_ = 0;
  int max_level_ = 0;
  std::vector<Cell> cells_;
  std::vector<int> active_;
  std::vector<int> tree_order_;
  std::vector<Point> vertex_points_;
  std::unordered_map<std::uint64_t, int> lookup_;
};

inline QuadMesh build_base_grid(Point lo, Point hi, int n) { return QuadMesh(lo, hi, n); }

inline QuadMesh refine_global(QuadMesh mesh) {
  mesh.refine_global();
  return mesh;
}

inline QuadMesh refine_box(QuadMesh mesh, Point box_lo, Point box_hi, int times) {
  mesh.refine_box(box_lo, box_hi, times);
  return mesh;
}

}  // namespace pff
