#pragma once

// Q1 finite elements on the quadtree: shape functions, Gauss rules, DoF
// numbering for the active mesh and for each level, and affine constraints.

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pff/linalg.hpp"
#include "pff/mesh.hpp"

namespace pff {

struct ShapeData {
  std::array<double, 4> values{};
  std::array<std::array<double, 2>, 4> gradients{};  // reference gradients
};

/// Bilinear basis on [0,1]^2, lexicographic vertex order.
inline ShapeData shape_values(Point ref) {
  const double x = ref.x, y = ref.y;
  ShapeData s;
  s.values = {(1 - x) * (1 - y), x * (1 - y), (1 - x) * y, x * y};
  s.gradients = {{{-(1 - y), -(1 - x)}, {(1 - y), -x}, {-y, (1 - x)}, {y, x}}};
  return s;
}

struct QuadratureRule {
  std::vector<Point> points;
  std::vector<double> weights;
  int degree = 0;  // exact for polynomials of this degree per coordinate
};

/// Tensor-product Gauss-Legendre rule with n points per axis on [0,1]^2.
inline QuadratureRule gauss_rule(int n) {
  std::vector<double> x, w;
  switch (n) {
    case 1: x = {0.5}; w = {1.0}; break;
    case 2: {
      const double a = 0.5 / std::sqrt(3.0);
      x = {0.5 - a, 0.5 + a};
      w = {0.5, 0.5};
      break;
    }
    case 3: {
      const double a = 0.5 * std::sqrt(0.6);
      x = {0.5 - a, 0.5, 0.5 + a};
      w = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
      break;
    }
    case 4: {
      const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(1.2));
      const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(1.2));
      const double wa = (18.0 + std::sqrt(30.0)) / 72.0, wb = (18.0 - std::sqrt(30.0)) / 72.0;
      x = {0.5 - 0.5 * b, 0.5 - 0.5 * a, 0.5 + 0.5 * a, 0.5 + 0.5 * b};
      w = {wb, wa, wa, wb};
      break;
    }
    default: throw std::invalid_argument("gauss_rule: supported point counts are 1..4");
  }
  QuadratureRule q;
  q.degree = 2 * n - 1;
  for (std::size_t j = 0; j < x.size(); ++j)
    for (std::size_t i = 0; i < x.size(); ++i) {
      q.points.push_back({x[i], x[j]});
      q.weights.push_back(w[i] * w[j]);
    }
  return q;
}

/// Node numbering over a set of square cells: the active mesh (nodes are the
/// mesh vertices) or one multigrid level (compact numbering of the level's
/// vertices). u DoFs are interleaved, 2*node + component.
struct DofMap {
  struct CellEntry {
    int mesh_cell = 0;
    Point lo;
    double h = 0.0;
    std::array<int, 4> nodes{};
  };

  int level = -1;  // -1 for the active mesh
  std::vector<CellEntry> cells;
  std::vector<int> vertex_of_node;
  std::vector<int> node_of_vertex;  // -1 where the vertex is absent

  std::size_t n_nodes() const { return vertex_of_node.size(); }
  std::size_t n_dofs_u() const { return 2 * n_nodes(); }
  std::size_t n_dofs_phi() const { return n_nodes(); }
};

inline DofMap build_dof_map(const QuadMesh& mesh) {
  DofMap map;
  map.vertex_of_node.resize(mesh.n_vertices());
  map.node_of_vertex.resize(mesh.n_vertices());
  for (std::size_t v = 0; v < mesh.n_vertices(); ++v) {
    map.vertex_of_node[v] = static_cast<int>(v);
    map.node_of_vertex[v] = static_cast<int>(v);
  }
  for (int id : mesh.active_cells()) {
    const Cell& c = mesh.cell(id);
    map.cells.push_back({id, mesh.cell_lo(c), mesh.cell_size(c), c.vertices});
  }
  return map;
}

inline DofMap build_dof_map(const QuadMesh& mesh, const LevelView& view) {
  DofMap map;
  map.level = view.level;
  map.node_of_vertex.assign(mesh.n_vertices(), -1);
  for (int id : view.cells) {
    const Cell& c = mesh.cell(id);
    DofMap::CellEntry e{id, mesh.cell_lo(c), mesh.cell_size(c), {}};
    for (std::size_t k = 0; k < 4; ++k) {
      const int v = c.vertices[k];
      int& node = map.node_of_vertex[static_cast<std::size_t>(v)];
      if (node < 0) {
        node = static_cast<int>(map.vertex_of_node.size());
        map.vertex_of_node.push_back(v);
      }
      e.nodes[k] = node;
    }
    map.cells.push_back(e);
  }
  return map;
}

enum class ConstraintKind : int { none = 0, dirichlet = 1, hanging = 2, active_set = 3 };

/// Affine constraints x_i = sum_j w_j x_{m_j} + b_i. After close() every
/// master is unconstrained.
class ConstraintSet {
public:
  struct Entry {
    int dof = 0;
    ConstraintKind kind = ConstraintKind::none;
    std::vector<std::pair<int, double>> masters;
    double inhomogeneity = 0.0;
  };

  ConstraintSet() = default;
  explicit ConstraintSet(std::size_t n_dofs) : index_(n_dofs, -1) {}

  std::size_t size() const { return index_.size(); }
  std::size_t n_constraints() const { return entries_.size(); }

  /// Precedence: active set > Dirichlet > hanging node. Returns false if the
  /// new constraint lost against an existing one.
  bool add(int dof, ConstraintKind kind, std::vector<std::pair<int, double>> masters, double value) {
    if (dof < 0 || static_cast<std::size_t>(dof) >= size()) throw std::out_of_range("ConstraintSet::add: bad dof");
    int& idx = index_[static_cast<std::size_t>(dof)];
    if (idx >= 0) {
      Entry& e = entries_[static_cast<std::size_t>(idx)];
      if (static_cast<int>(rank(kind)) <= static_cast<int>(rank(e.kind))) {
        ++conflicts_;
        return false;
      }
      ++conflicts_;
      e = Entry{dof, kind, std::move(masters), value};
      closed_ = false;
      return true;
    }
    idx = static_cast<int>(entries_.size());
    entries_.push_back(Entry{dof, kind, std::move(masters), value});
    closed_ = false;
    return true;
  }
  void add_dirichlet(int dof, double value) { add(dof, ConstraintKind::dirichlet, {}, value); }
  void add_active(int dof, double value) { add(dof, ConstraintKind::active_set, {}, value); }
  void add_hanging(int dof, int m1, int m2) { add(dof, ConstraintKind::hanging, {{m1, 0.5}, {m2, 0.5}}, 0.0); }

  /// Substitutes constrained masters by their definitions.
  void close() {
    for (int pass = 0; pass < 8 && !closed_; ++pass) {
      bool changed = false;
      for (Entry& e : entries_) {
        std::vector<std::pair<int, double>> resolved;
        for (auto [m, w] : e.masters) {
          const int mi = index_[static_cast<std::size_t>(m)];
          if (mi < 0) {
            resolved.emplace_back(m, w);
            continue;
          }
          const Entry& me = entries_[static_cast<std::size_t>(mi)];
          e.inhomogeneity += w * me.inhomogeneity;
          for (auto [mm, ww] : me.masters) resolved.emplace_back(mm, w * ww);
          changed = true;
        }
        e.masters = std::move(resolved);
      }
      closed_ = !changed;
    }
    for (const Entry& e : entries_)
      for (auto [m, w] : e.masters)
        if (index_[static_cast<std::size_t>(m)] >= 0)
          throw std::logic_error("ConstraintSet::close: cyclic constraints");
    closed_ = true;
  }

  bool is_constrained(std::size_t dof) const { return index_[dof] >= 0; }
  ConstraintKind kind(std::size_t dof) const {
    return index_[dof] < 0 ? ConstraintKind::none : entries_[static_cast<std::size_t>(index_[dof])].kind;
  }
  const Entry& entry(std::size_t dof) const { return entries_[static_cast<std::size_t>(index_[dof])]; }
  const std::vector<Entry>& entries() const { return entries_; }

  std::size_t count(ConstraintKind k) const {
    std::size_t n = 0;
    for (const Entry& e : entries_) n += (e.kind == k);
    return n;
  }
  std::size_t conflicts() const { return conflicts_; }

  /// Overwrites constrained entries by their affine definition.
  void distribute(Vector& x) const {
    for (const Entry& e : entries_) {
      double v = e.inhomogeneity;
      for (auto [m, w] : e.masters) v += w * x[static_cast<std::size_t>(m)];
      x[static_cast<std::size_t>(e.dof)] = v;
    }
  }
  /// Same with zero inhomogeneities.
  void distribute_homogeneous(Vector& x) const {
    for (const Entry& e : entries_) {
      double v = 0.0;
      for (auto [m, w] : e.masters) v += w * x[static_cast<std::size_t>(m)];
      x[static_cast<std::size_t>(e.dof)] = v;
    }
  }
  /// Folds constrained entries of a functional into their masters
  /// (x <- C^T x) and zeroes the constrained entries.
  void condense(Vector& x) const {
    for (const Entry& e : entries_) {
      const double v = x[static_cast<std::size_t>(e.dof)];
      for (auto [m, w] : e.masters) x[static_cast<std::size_t>(m)] += w * v;
    }
    zero_constrained(x);
  }
  void zero_constrained(Vector& x) const {
    for (const Entry& e : entries_) x[static_cast<std::size_t>(e.dof)] = 0.0;
  }

private:
  static int rank(ConstraintKind k) {
    switch (k) {
      case ConstraintKind::active_set: return 3;
      case ConstraintKind::dirichlet: return 2;
      case ConstraintKind::hanging: return 1;
      default: return 0;
    }
  }

  std::vector<int> index_;
  std::vector<Entry> entries_;
  std::size_t conflicts_ = 0;
  bool closed_ = true;
};

inline BlockVector distribute(const ConstraintSet& cu, const ConstraintSet& cphi, BlockVector x) {
  cu.distribute(x.u);
  cphi.distribute(x.phi);
  return x;
}

struct DirichletSpec {
  bool u_on_boundary = true;  // homogeneous u = 0 on the whole boundary
  bool phi_on_boundary = false;
};

struct BlockConstraints {
  ConstraintSet u;
  ConstraintSet phi;
};

/// Constraints for the active mesh. For active-set DoFs the inhomogeneity is
/// the update that pins phi to phi_old: phi_old_i - phi_i. An empty
/// active_set (or empty phi/phi_old) gives the structural constraints only.
inline BlockConstraints build_constraints(const QuadMesh& mesh, const DofMap& map, const DirichletSpec& dirichlet,
                                          const std::vector<int>& active_set = {}, const Vector& phi = {},
                                          const Vector& phi_old = {}) {
  const std::size_t n = map.n_nodes();
  BlockConstraints c{ConstraintSet(2 * n), ConstraintSet(n)};
  for (int a : active_set) {
    if (a < 0 || static_cast<std::size_t>(a) >= n) throw std::out_of_range("build_constraints: bad active DoF");
    const double value = (phi.empty() || phi_old.empty())
                             ? 0.0
                             : phi_old[static_cast<std::size_t>(a)] - phi[static_cast<std::size_t>(a)];
    c.phi.add_active(a, value);
  }
  for (std::size_t node = 0; node < n; ++node) {
    if (!mesh.is_boundary_vertex(map.vertex_of_node[node])) continue;
    if (dirichlet.u_on_boundary) {
      c.u.add_dirichlet(static_cast<int>(2 * node), 0.0);
      c.u.add_dirichlet(static_cast<int>(2 * node + 1), 0.0);
    }
    if (dirichlet.phi_on_boundary) c.phi.add_dirichlet(static_cast<int>(node), 0.0);
  }
  for (const HangingVertex& hv : mesh.hanging_vertices()) {
    const int d = map.node_of_vertex[static_cast<std::size_t>(hv.vertex)];
    const int m1 = map.node_of_vertex[static_cast<std::size_t>(hv.parents[0])];
    const int m2 = map.node_of_vertex[static_cast<std::size_t>(hv.parents[1])];
    for (int comp = 0; comp < 2; ++comp) c.u.add_hanging(2 * d + comp, 2 * m1 + comp, 2 * m2 + comp);
    c.phi.add_hanging(d, m1, m2);
  }
  c.u.close();
  c.phi.close();
  return c;
}

/// Nodal interpolation of a scalar function.
inline Vector interpolate(const QuadMesh& mesh, const DofMap& map, const std::function<double(Point)>& fn) {
  Vector out(map.n_nodes());
  for (std::size_t node = 0; node < map.n_nodes(); ++node) out[node] = fn(mesh.vertex(map.vertex_of_node[node]));
  return out;
}

}  // namespace pff
