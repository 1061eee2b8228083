#pragma once

// Geometric multigrid with local smoothing for the diagonal blocks of the
// fracture Jacobian. Level l holds every cell of refinement level l; faces
// towards coarser leaves form the refinement edge, whose nodes are held at
// zero while smoothing.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pff/fespace.hpp"
#include "pff/linalg.hpp"
#include "pff/mesh.hpp"
#include "pff/operator.hpp"

namespace pff {

struct MgConfig {
  int smoother_degree = 4;
  double alpha_range = 15.0;
  double eig_safety = 1.2;
  int eig_iterations = 12;
  unsigned eig_seed = 42;
  int coarse_eig_iterations = 40;
  double coarse_lower_factor = 0.9;
  double coarse_reduction = 1e-4;
  int coarse_max_iterations = 100;

  void validate() const {
    if (smoother_degree < 0) throw std::invalid_argument("MgConfig: smoother degree must be >= 0");
    if (!(alpha_range > 1)) throw std::invalid_argument("MgConfig: alpha_range must exceed 1");
    if (eig_iterations < 2 || coarse_eig_iterations < 2)
      throw std::invalid_argument("MgConfig: eigenvalue estimation needs at least 2 iterations");
    if (!(coarse_reduction > 0 && coarse_reduction < 1)) throw std::invalid_argument("MgConfig: bad coarse reduction");
    if (coarse_max_iterations < 1) throw std::invalid_argument("MgConfig: coarse iterations must be >= 1");
  }
};

struct EigenEstimate {
  double min = 1.0;
  double max = 1.0;
  int iterations = 0;
};

namespace detail {

// Sturm count: eigenvalues of the symmetric tridiagonal (a, b) below x
inline int sturm_count(const std::vector<double>& a, const std::vector<double>& b, double x) {
  int count = 0;
  double q = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double off = i == 0 ? 0.0 : b[i - 1] * b[i - 1];
    q = a[i] - x - (i == 0 ? 0.0 : off / q);
    if (q == 0.0) q = -1e-300;
    if (q < 0) ++count;
  }
  return count;
}

inline double tridiagonal_eigenvalue(const std::vector<double>& a, const std::vector<double>& b, int k) {
  double lo = a[0], hi = a[0];
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double r = (i > 0 ? std::abs(b[i - 1]) : 0.0) + (i < b.size() ? std::abs(b[i]) : 0.0);
    lo = std::min(lo, a[i] - r);
    hi = std::max(hi, a[i] + r);
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (sturm_count(a, b, mid) > k) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Extreme Ritz values of D^{-1}A from n_iter preconditioned CG steps on a
/// fixed-seed random right-hand side. Entries flagged in `fixed` are kept
/// at zero.
template <class Op>
EigenEstimate estimate_eigs(const Op& A, const Vector& inv_diag, const std::vector<char>& fixed, int n_iter,
                            unsigned seed = 42) {
  if (n_iter < 2) throw std::invalid_argument("estimate_eigs: need at least 2 iterations");
  const std::size_t n = inv_diag.size();
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector r(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = dist(rng);
    if (!fixed.empty() && fixed[i]) r[i] = 0.0;
  }
  Vector z(n), p(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);
  std::vector<double> alphas, betas;
  if (!(rz > 0)) return {};
  for (int k = 0; k < n_iter; ++k) {
    const Vector q = A(p);
    const double pq = dot(p, q);
    if (!(pq > 0) || !std::isfinite(pq)) break;
    const double alpha = rz / pq;
    alphas.push_back(alpha);
    axpy(-alpha, q, r);
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    if (!(rz_new > 1e-28 * rz) || k + 1 == n_iter) break;
    betas.push_back(beta);
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    rz = rz_new;
  }
  if (alphas.empty()) return {};
  // Lanczos tridiagonal from the CG coefficients
  const std::size_t m = alphas.size();
  std::vector<double> diag(m), off(m > 0 ? m - 1 : 0);
  for (std::size_t i = 0; i < m; ++i) {
    diag[i] = 1.0 / alphas[i] + (i > 0 ? betas[i - 1] / alphas[i - 1] : 0.0);
    if (i + 1 < m) off[i] = std::sqrt(betas[i]) / alphas[i];
  }
  EigenEstimate e;
  e.iterations = static_cast<int>(m);
  e.min = detail::tridiagonal_eigenvalue(diag, off, 0);
  e.max = detail::tridiagonal_eigenvalue(diag, off, static_cast<int>(m) - 1);
  return e;
}

/// Chebyshev semi-iteration on D^{-1}A over [lower, upper].
struct ChebyshevSmoother {
  int degree = 4;
  double eig_max_estimate = 1.0;
  double eig_min_bound = 1.0 / 15.0;
  double upper = 1.2;
  Vector inv_diag;

  static ChebyshevSmoother from_estimate(const EigenEstimate& e, Vector inv_diag, int degree, double alpha_range,
                                         double safety) {
    ChebyshevSmoother s;
    s.degree = degree;
    s.eig_max_estimate = e.max;
    s.eig_min_bound = e.max / alpha_range;
    s.upper = safety * e.max;
    s.inv_diag = std::move(inv_diag);
    return s;
  }

  double lower() const { return eig_min_bound; }

  /// `degree` steps starting from x; with zero_start the initial residual
  /// is b itself.
  template <class Op>
  void smooth(const Op& A, Vector& x, const Vector& b, int steps, bool zero_start = false) const {
    if (zero_start) std::fill(x.begin(), x.end(), 0.0);
    if (steps <= 0) return;
    if (!(eig_min_bound > 0 && eig_min_bound < upper))
      throw std::logic_error("ChebyshevSmoother: invalid smoothing interval");
    const double theta = 0.5 * (upper + eig_min_bound), delta = 0.5 * (upper - eig_min_bound);
    const double sigma = theta / delta;
    double rho = 1.0 / sigma;
    const std::size_t n = b.size();
    Vector r = b;
    if (!zero_start) axpy(-1.0, A(x), r);
    Vector d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = inv_diag[i] * r[i] / theta;
    for (int k = 1; k <= steps; ++k) {
      axpy(1.0, d, x);
      if (k == steps) break;
      r = b;
      axpy(-1.0, A(x), r);
      const double rho_new = 1.0 / (2.0 * sigma - rho);
      const double c1 = rho_new * rho, c2 = 2.0 * rho_new / delta;
      for (std::size_t i = 0; i < n; ++i) d[i] = c1 * d[i] + c2 * inv_diag[i] * r[i];
      rho = rho_new;
    }
  }
  template <class Op>
  void smooth(const Op& A, Vector& x, const Vector& b) const {
    smooth(A, x, b, degree);
  }
};

/// Chebyshev steps needed for the error bound 2c^k/(1+c^2k) <= reduction.
inline int chebyshev_steps(double lower, double upper, double reduction, int max_steps) {
  const double kappa = upper / lower;
  const double c = (std::sqrt(kappa) - 1.0) / (std::sqrt(kappa) + 1.0);
  for (int k = 1; k <= max_steps; ++k) {
    const double ck = std::pow(c, k);
    if (2.0 * ck / (1.0 + ck * ck) <= reduction) return k;
  }
  return max_steps;
}

struct MgLevel {
  int level = 0;
  DofMap map;
  std::vector<char> edge;  // per level node
  BlockConstraints constraints;
  BlockVector U;
  Vector phi_tilde;
  std::unique_ptr<FractureOperator> op;
  // Q1 interpolation from the next coarser level, CSR by fine node
  std::vector<std::size_t> interp_ptr;
  std::vector<int> interp_col;
  std::vector<double> interp_val;

  std::size_t n_cells() const { return map.cells.size(); }
  const ConstraintSet& constraints_of(Block b) const { return b == Block::uu ? constraints.u : constraints.phi; }
};

/// Level meshes, transfers and per-level operators shared by both blocks.
class MgHierarchy {
public:
  MgHierarchy(const QuadMesh& mesh, const DofMap& active_map, const MaterialParams& params, int threads = 1)
      : mesh_(&mesh), active_map_(&active_map) {
    if (active_map.level >= 0 || active_map.n_nodes() != mesh.n_vertices())
      throw std::invalid_argument("MgHierarchy: expects the active DoF map of the mesh");
    static constexpr std::array<std::array<int, 2>, 4> face_vertices{{{0, 2}, {1, 3}, {0, 1}, {2, 3}}};
    for (int l = 0; l <= mesh.max_level(); ++l) {
      auto lev = std::make_unique<MgLevel>();
      lev->level = l;
      const LevelView view = mesh.level_view(l);
      lev->map = build_dof_map(mesh, view);
      const std::size_t n = lev->map.n_nodes();
      lev->edge.assign(n, 0);
      for (std::size_t i = 0; i < view.cells.size(); ++i)
        for (std::size_t f = 0; f < 4; ++f)
          if (view.interface_flags[i][f])
            for (int k : face_vertices[f]) lev->edge[static_cast<std::size_t>(lev->map.cells[i].nodes[static_cast<std::size_t>(k)])] = 1;
      lev->constraints = {ConstraintSet(2 * n), ConstraintSet(n)};
      lev->U = BlockVector(n);
      lev->phi_tilde.assign(n, 0.0);
      if (l > 0) build_interpolation(mesh, *levels_.back(), *lev);
      lev->op = std::make_unique<FractureOperator>(lev->map, params);
      lev->op->set_edge_nodes(lev->edge);
      lev->op->set_threads(threads);
      levels_.push_back(std::move(lev));
    }
    // home level: finest level where the vertex is a non-edge level node
    home_.assign(active_map.n_nodes(), {-1, -1});
    for (int l = max_level(); l >= 0; --l) {
      const MgLevel& lev = *levels_[static_cast<std::size_t>(l)];
      for (std::size_t j = 0; j < lev.map.n_nodes(); ++j) {
        if (lev.edge[j]) continue;
        const int a = active_map.node_of_vertex[static_cast<std::size_t>(lev.map.vertex_of_node[j])];
        auto& h = home_[static_cast<std::size_t>(a)];
        if (h.first < 0) h = {l, static_cast<int>(j)};
      }
    }
  }

  int max_level() const { return static_cast<int>(levels_.size()) - 1; }
  const MgLevel& level(int l) const { return *levels_.at(static_cast<std::size_t>(l)); }
  const QuadMesh& mesh() const { return *mesh_; }
  const DofMap& active_map() const { return *active_map_; }
  /// (level, level node) owning each active node, (-1, -1) for hanging ones.
  const std::vector<std::pair<int, int>>& home() const { return home_; }
  const BlockConstraints& active_constraints() const {
    if (!active_) throw std::logic_error("MgHierarchy: update() not called");
    return *active_;
  }

  /// Injects the linearization state by vertex and transfers the Dirichlet
  /// and active-set constraints of the active system to every level.
  void update(const BlockVector& U, const Vector& phi_tilde, const BlockConstraints& active) {
    if (U.phi.size() != active_map_->n_nodes() || phi_tilde.size() != active_map_->n_nodes())
      throw std::invalid_argument("MgHierarchy::update: size mismatch");
    active_ = &active;
    for (auto& lev : levels_) {
      const std::size_t n = lev->map.n_nodes();
      lev->constraints = {ConstraintSet(2 * n), ConstraintSet(n)};
      for (std::size_t j = 0; j < n; ++j) {
        const auto a = static_cast<std::size_t>(active_map_->node_of_vertex[static_cast<std::size_t>(lev->map.vertex_of_node[j])]);
        lev->U.u[2 * j] = U.u[2 * a];
        lev->U.u[2 * j + 1] = U.u[2 * a + 1];
        lev->U.phi[j] = U.phi[a];
        lev->phi_tilde[j] = phi_tilde[a];
        for (std::size_t c = 0; c < 2; ++c)
          if (pinned(active.u.kind(2 * a + c))) lev->constraints.u.add_dirichlet(static_cast<int>(2 * j + c), 0.0);
        const ConstraintKind k = active.phi.kind(a);
        if (k == ConstraintKind::active_set) lev->constraints.phi.add_active(static_cast<int>(j), 0.0);
        else if (k == ConstraintKind::dirichlet) lev->constraints.phi.add_dirichlet(static_cast<int>(j), 0.0);
      }
      lev->constraints.u.close();
      lev->constraints.phi.close();
      lev->op->set_state(lev->U, lev->phi_tilde);
      lev->op->set_constraints(lev->constraints.u, lev->constraints.phi);
    }
  }

  /// Q1 interpolation from level l-1 to level l; constrained entries are
  /// zero on input and output.
  Vector prolongate(int l, Block block, const Vector& coarse) const {
    const MgLevel& f = level(l);
    const MgLevel& c = level(l - 1);
    const std::size_t nc = ncomp(block);
    const ConstraintSet& cf = f.constraints_of(block);
    const ConstraintSet& cc = c.constraints_of(block);
    Vector fine(nc * f.map.n_nodes(), 0.0);
    for (std::size_t j = 0; j < f.map.n_nodes(); ++j)
      for (std::size_t k = f.interp_ptr[j]; k < f.interp_ptr[j + 1]; ++k)
        for (std::size_t comp = 0; comp < nc; ++comp) {
          const std::size_t src = nc * static_cast<std::size_t>(f.interp_col[k]) + comp;
          if (!cc.is_constrained(src)) fine[nc * j + comp] += f.interp_val[k] * coarse[src];
        }
    cf.zero_constrained(fine);
    return fine;
  }

  /// Transpose of prolongate.
  Vector restrict_to_coarser(int l, Block block, const Vector& fine) const {
    const MgLevel& f = level(l);
    const MgLevel& c = level(l - 1);
    const std::size_t nc = ncomp(block);
    const ConstraintSet& cf = f.constraints_of(block);
    const ConstraintSet& cc = c.constraints_of(block);
    Vector coarse(nc * c.map.n_nodes(), 0.0);
    for (std::size_t j = 0; j < f.map.n_nodes(); ++j)
      for (std::size_t comp = 0; comp < nc; ++comp) {
        if (cf.is_constrained(nc * j + comp)) continue;
        const double v = fine[nc * j + comp];
        for (std::size_t k = f.interp_ptr[j]; k < f.interp_ptr[j + 1]; ++k)
          coarse[nc * static_cast<std::size_t>(f.interp_col[k]) + comp] += f.interp_val[k] * v;
      }
    cc.zero_constrained(coarse);
    return coarse;
  }

  static std::size_t ncomp(Block b) { return b == Block::phiphi ? 1 : 2; }

private:
  static bool pinned(ConstraintKind k) { return k == ConstraintKind::dirichlet || k == ConstraintKind::active_set; }

  static void build_interpolation(const QuadMesh& mesh, const MgLevel& coarse, MgLevel& fine) {
    const std::size_t n = fine.map.n_nodes();
    std::vector<std::vector<std::pair<int, double>>> rows(n);
    std::vector<char> done(n, 0);
    for (const auto& entry : fine.map.cells) {
      const Cell& child = mesh.cell(entry.mesh_cell);
      const Cell& parent = mesh.cell(child.parent);
      const int cx = static_cast<int>(child.ix - 2 * parent.ix), cy = static_cast<int>(child.iy - 2 * parent.iy);
      for (std::size_t k = 0; k < 4; ++k) {
        const auto node = static_cast<std::size_t>(entry.nodes[k]);
        if (done[node]) continue;
        done[node] = 1;
        const Point ref{0.5 * (cx + static_cast<int>(k & 1)), 0.5 * (cy + static_cast<int>(k >> 1))};
        const ShapeData s = shape_values(ref);
        for (std::size_t m = 0; m < 4; ++m) {
          if (s.values[m] == 0.0) continue;
          const int cnode = coarse.map.node_of_vertex[static_cast<std::size_t>(parent.vertices[m])];
          if (cnode < 0) throw std::logic_error("MgHierarchy: parent vertex missing on coarser level");
          rows[node].emplace_back(cnode, s.values[m]);
        }
      }
    }
    fine.interp_ptr.assign(1, 0);
    for (const auto& r : rows) {
      for (auto [c, w] : r) {
        fine.interp_col.push_back(c);
        fine.interp_val.push_back(w);
      }
      fine.interp_ptr.push_back(fine.interp_col.size());
    }
  }

  const QuadMesh* mesh_;
  const DofMap* active_map_;
  const BlockConstraints* active_ = nullptr;
  std::vector<std::unique_ptr<MgLevel>> levels_;
  std::vector<std::pair<int, int>> home_;
};

struct MgLevelInfo {
  Block block = Block::uu;
  int level = 0;
  std::size_t cells = 0;
  std::size_t dofs = 0;
  std::size_t free_dofs = 0;
  std::size_t edge_dofs = 0;
  EigenEstimate eigs;
  double lower = 0.0;
  double upper = 0.0;
  int coarse_steps = 0;
};

inline void write_mg_levels_csv(std::ostream& out, const std::vector<MgLevelInfo>& levels, bool header = true) {
  if (header) out << "block,level,cells,dofs,free_dofs,edge_dofs,eig_min,eig_max,cg_iterations,lower,upper,coarse_steps\n";
  out.precision(10);
  for (const auto& i : levels)
    out << (i.block == Block::uu ? "uu" : "phiphi") << ',' << i.level << ',' << i.cells << ',' << i.dofs << ','
        << i.free_dofs << ',' << i.edge_dofs << ',' << i.eigs.min << ',' << i.eigs.max << ',' << i.eigs.iterations
        << ',' << i.lower << ',' << i.upper << ',' << i.coarse_steps << '\n';
}

/// One V-cycle of local-smoothing multigrid on a diagonal block.
class BlockMultigrid {
public:
  BlockMultigrid(const MgHierarchy& h, Block block, MgConfig cfg = {}) : h_(&h), block_(block), cfg_(cfg) {
    if (block == Block::phiu) throw std::invalid_argument("BlockMultigrid: diagonal blocks only");
    cfg_.validate();
    const std::size_t nc = MgHierarchy::ncomp(block);
    for (int l = 0; l <= h.max_level(); ++l) {
      const MgLevel& lev = h.level(l);
      std::vector<char> fixed(nc * lev.map.n_nodes(), 0);
      const ConstraintSet& cs = lev.constraints_of(block);
      MgLevelInfo info;
      info.block = block;
      info.level = l;
      info.cells = lev.n_cells();
      info.dofs = fixed.size();
      for (std::size_t i = 0; i < fixed.size(); ++i) {
        fixed[i] = static_cast<char>(cs.is_constrained(i) || lev.edge[i / nc]);
        info.edge_dofs += static_cast<std::size_t>(lev.edge[i / nc] != 0);
        info.free_dofs += static_cast<std::size_t>(!fixed[i]);
      }
      Vector inv = lev.op->compute_diagonal(block);
      for (double& d : inv) d = 1.0 / d;
      const bool coarse = l == 0;
      auto A = [&](const Vector& x) { return lev.op->block_vmult(block, x); };
      info.eigs = estimate_eigs(A, inv, fixed, coarse ? cfg_.coarse_eig_iterations : cfg_.eig_iterations, cfg_.eig_seed);
      ChebyshevSmoother s = ChebyshevSmoother::from_estimate(info.eigs, std::move(inv), cfg_.smoother_degree,
                                                             cfg_.alpha_range, cfg_.eig_safety);
      if (coarse) {
        s.eig_min_bound = cfg_.coarse_lower_factor * info.eigs.min;
        coarse_steps_ = s.eig_min_bound < s.upper
                            ? chebyshev_steps(s.eig_min_bound, s.upper, cfg_.coarse_reduction, cfg_.coarse_max_iterations)
                            : 1;
        if (!(s.eig_min_bound < s.upper)) s.eig_min_bound = 0.5 * s.upper;
        info.coarse_steps = coarse_steps_;
      }
      info.lower = s.eig_min_bound;
      info.upper = s.upper;
      fixed_.push_back(std::move(fixed));
      smoothers_.push_back(std::move(s));
      info_.push_back(info);
    }
  }

  Block block() const { return block_; }
  const std::vector<MgLevelInfo>& levels() const { return info_; }
  const ChebyshevSmoother& smoother(int l) const { return smoothers_.at(static_cast<std::size_t>(l)); }

  /// z = MG(b); constrained entries of the active system pass through.
  Vector vmult(const Vector& b) const {
    const MgHierarchy& h = *h_;
    const std::size_t nc = MgHierarchy::ncomp(block_);
    const ConstraintSet& acs = block_ == Block::uu ? h.active_constraints().u : h.active_constraints().phi;
    const int L = h.max_level();
    std::vector<Vector> D(static_cast<std::size_t>(L + 1)), X(static_cast<std::size_t>(L + 1));
    for (int l = 0; l <= L; ++l) D[static_cast<std::size_t>(l)].assign(nc * h.level(l).map.n_nodes(), 0.0);
    const auto& home = h.home();
    for (std::size_t a = 0; a < home.size(); ++a) {
      if (home[a].first < 0) continue;
      for (std::size_t c = 0; c < nc; ++c)
        if (!acs.is_constrained(nc * a + c))
          D[static_cast<std::size_t>(home[a].first)][nc * static_cast<std::size_t>(home[a].second) + c] = b[nc * a + c];
    }
    for (int l = L; l >= 1; --l) {
      const auto ul = static_cast<std::size_t>(l);
      X[ul].assign(D[ul].size(), 0.0);
      smoothers_[ul].smooth(smoothing_op(l), X[ul], masked(l, D[ul]), cfg_.smoother_degree, true);
      Vector t = D[ul];
      axpy(-1.0, full_op(l, X[ul]), t);
      h.level(l).constraints_of(block_).zero_constrained(t);
      axpy(1.0, h.restrict_to_coarser(l, block_, t), D[ul - 1]);
    }
    X[0].assign(D[0].size(), 0.0);
    smoothers_[0].smooth(smoothing_op(0), X[0], masked(0, D[0]), coarse_steps_, true);
    for (int l = 1; l <= L; ++l) {
      const auto ul = static_cast<std::size_t>(l);
      axpy(1.0, h.prolongate(l, block_, X[ul - 1]), X[ul]);
      Vector t = D[ul];
      axpy(-1.0, full_op(l, X[ul]), t);
      Vector dx(t.size(), 0.0);
      smoothers_[ul].smooth(smoothing_op(l), dx, masked(l, t), cfg_.smoother_degree, true);
      axpy(1.0, dx, X[ul]);
    }
    Vector z = b;
    for (std::size_t a = 0; a < home.size(); ++a) {
      if (home[a].first < 0) continue;
      for (std::size_t c = 0; c < nc; ++c)
        if (!acs.is_constrained(nc * a + c))
          z[nc * a + c] = X[static_cast<std::size_t>(home[a].first)][nc * static_cast<std::size_t>(home[a].second) + c];
    }
    return z;
  }

  void write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    write_csv(out, true);
  }
  void write_csv(std::ostream& out, bool header) const { write_mg_levels_csv(out, info_, header); }

private:
  struct LevelOp {
    const FractureOperator* op;
    Block block;
    Vector operator()(const Vector& x) const { return op->block_vmult(block, x); }
  };
  LevelOp smoothing_op(int l) const { return {h_->level(l).op.get(), block_}; }
  Vector full_op(int l, const Vector& x) const { return h_->level(l).op->block_vmult(block_, x, true); }
  Vector masked(int l, Vector v) const {
    const auto& f = fixed_[static_cast<std::size_t>(l)];
    for (std::size_t i = 0; i < v.size(); ++i)
      if (f[i]) v[i] = 0.0;
    return v;
  }

  const MgHierarchy* h_;
  Block block_;
  MgConfig cfg_;
  std::vector<ChebyshevSmoother> smoothers_;
  std::vector<std::vector<char>> fixed_;
  std::vector<MgLevelInfo> info_;
  int coarse_steps_ = 1;
};

}  // namespace pff
