#pragma once

// Matrix-free residual and Jacobian of the pressurized phase-field fracture
// system on a set of Q1 cells (active mesh or one multigrid level).
//
// Residual, tested with psi:
//   R_u(psi)   = (g(phi~) sigma(u), e(psi)) + (phi~^2 p, div psi)
//   R_phi(psi) = (1-kappa)(phi sigma(u):e(u), psi) + 2(phi p div u, psi)
//                - G_c/l (1-phi, psi) + G_c l (grad phi, grad psi)
// phi~ is frozen, so the u-phi block of the Jacobian vanishes.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "pff/fespace.hpp"
#include "pff/linalg.hpp"
#include "pff/physics.hpp"

namespace pff {

enum class Block { uu, phiphi, phiu };

/// Nodal coefficient fields the operator is linearized around.
struct State {
  BlockVector U;
  Vector phi_tilde;
  Vector phi_old;
};

class FractureOperator {
public:
  /// How constrained inputs are read.
  enum class Read { homogeneous, raw };

  FractureOperator(const DofMap& map, const MaterialParams& params, int n_q_points = 2)
      : map_(&map), params_(params), quad_(gauss_rule(n_q_points)) {
    params_.validate();
    for (std::size_t q = 0; q < quad_.points.size(); ++q) shapes_.push_back(shape_values(quad_.points[q]));
  }

  const DofMap& dof_map() const { return *map_; }
  const MaterialParams& params() const { return params_; }

  void set_state(const BlockVector& U, const Vector& phi_tilde) {
    if (U.u.size() != map_->n_dofs_u() || U.phi.size() != map_->n_dofs_phi() || phi_tilde.size() != map_->n_dofs_phi())
      throw std::invalid_argument("FractureOperator::set_state: size mismatch");
    u_ = &U.u;
    phi_ = &U.phi;
    phi_tilde_ = &phi_tilde;
  }
  void set_constraints(const ConstraintSet& cu, const ConstraintSet& cphi) {
    cu_ = &cu;
    cphi_ = &cphi;
  }
  /// Nodes treated as homogeneous Dirichlet in the default (smoothing) mode;
  /// used for level-interface nodes in local smoothing.
  void set_edge_nodes(std::vector<char> mask) { edge_ = std::move(mask); }
  const std::vector<char>& edge_nodes() const { return edge_; }
  void set_threads(int n) { threads_ = std::max(1, n); }

  /// Residual with Dirichlet/hanging constraints condensed; constrained
  /// entries are zero.
  BlockVector residual() const {
    require_state();
    BlockVector out(map_->n_nodes());
    run_cells([&](std::size_t begin, std::size_t end, Vector& ou, Vector& ophi) {
      CellData cd;
      std::array<double, 8> ru{};
      std::array<double, 4> rphi{};
      for (std::size_t ci = begin; ci < end; ++ci) {
        prepare(ci, cd);
        ru.fill(0.0);
        rphi.fill(0.0);
        cell_residual(cd, ru, rphi);
        scatter(ci, &ru, &rphi, ou, ophi, false);
      }
    }, out.u, out.phi);
    cu_->zero_constrained(out.u);
    cphi_->zero_constrained(out.phi);
    zero_edges(out.u, out.phi);
    return out;
  }

  /// Jacobian action on the homogeneously constrained space; constrained
  /// rows act as identity.
  BlockVector jacobian_vmult(const BlockVector& d) const {
    BlockVector out(map_->n_nodes());
    apply(&d.u, &d.phi, &out.u, &out.phi, {true, true, true}, Read::homogeneous, false);
    identity_rows(d.u, out.u, *cu_, true);
    identity_rows(d.phi, out.phi, *cphi_, true);
    return out;
  }

  /// Jacobian applied to a vector whose constrained entries carry
  /// inhomogeneities; output is condensed with constrained rows zero.
  BlockVector jacobian_vmult_raw(const BlockVector& d) const {
    BlockVector out(map_->n_nodes());
    apply(&d.u, &d.phi, &out.u, &out.phi, {true, true, true}, Read::raw, false);
    cu_->zero_constrained(out.u);
    cphi_->zero_constrained(out.phi);
    return out;
  }

  /// One block of the Jacobian. Diagonal blocks act as identity on
  /// constrained rows; the coupling block has zero constrained rows. With
  /// edge_full the edge nodes are read and written like free nodes.
  Vector block_vmult(Block block, const Vector& x, bool edge_full = false) const {
    const bool is_u_in = block != Block::phiphi;
    const bool is_u_out = block == Block::uu;
    Vector out(is_u_out ? map_->n_dofs_u() : map_->n_dofs_phi(), 0.0);
    const std::array<bool, 3> which{block == Block::uu, block == Block::phiphi, block == Block::phiu};
    if (is_u_in)
      apply(&x, nullptr, is_u_out ? &out : nullptr, is_u_out ? nullptr : &out, which, Read::homogeneous, edge_full);
    else
      apply(nullptr, &x, nullptr, &out, which, Read::homogeneous, edge_full);
    if (block == Block::uu) identity_rows(x, out, *cu_, !edge_full);
    if (block == Block::phiphi) identity_rows(x, out, *cphi_, !edge_full);
    if (block == Block::phiu) {
      cphi_->zero_constrained(out);
      if (!edge_full)
        for (std::size_t n = 0; n < edge_.size(); ++n)
          if (edge_[n]) out[n] = 0.0;
    }
    return out;
  }

  /// Exact diagonal of a condensed diagonal block; constrained entries 1.
  Vector compute_diagonal(Block block) const {
    if (block == Block::phiu) throw std::invalid_argument("compute_diagonal: only diagonal blocks");
    require_state();
    const bool is_u = block == Block::uu;
    const ConstraintSet& cs = is_u ? *cu_ : *cphi_;
    const int ncomp = is_u ? 2 : 1;
    Vector diag(is_u ? map_->n_dofs_u() : map_->n_dofs_phi(), 0.0);
    CellData cd;
    for (std::size_t ci = 0; ci < map_->cells.size(); ++ci) {
      prepare(ci, cd);
      const auto& nodes = map_->cells[ci].nodes;
      // global free dof -> its local image on this cell
      std::map<int, std::array<double, 8>> images;
      for (int k = 0; k < 4; ++k)
        for (int c = 0; c < ncomp; ++c) {
          const int slot = ncomp * k + c;
          const int g = ncomp * nodes[static_cast<std::size_t>(k)] + c;
          if (is_edge(nodes[static_cast<std::size_t>(k)])) continue;
          if (!cs.is_constrained(static_cast<std::size_t>(g))) {
            images[g][static_cast<std::size_t>(slot)] += 1.0;
          } else {
            for (auto [m, w] : cs.entry(static_cast<std::size_t>(g)).masters)
              if (!is_edge(m / ncomp)) images[m][static_cast<std::size_t>(slot)] += w;
          }
        }
      for (auto& [g, img] : images) {
        std::array<double, 8> ou{};
        std::array<double, 4> ophi{};
        double value = 0.0;
        if (is_u) {
          cell_apply(cd, &img, nullptr, &ou, nullptr, {true, false, false});
          for (int s = 0; s < 8; ++s) value += img[static_cast<std::size_t>(s)] * ou[static_cast<std::size_t>(s)];
        } else {
          std::array<double, 4> in{img[0], img[1], img[2], img[3]};
          cell_apply(cd, nullptr, &in, nullptr, &ophi, {false, true, false});
          for (int s = 0; s < 4; ++s) value += in[static_cast<std::size_t>(s)] * ophi[static_cast<std::size_t>(s)];
        }
        diag[static_cast<std::size_t>(g)] += value;
      }
    }
    for (std::size_t i = 0; i < diag.size(); ++i) {
      if (cs.is_constrained(i) || is_edge(static_cast<int>(i) / ncomp)) {
        diag[i] = 1.0;
      } else if (!(diag[i] > 0.0)) {
        std::ostringstream msg;
        msg << "compute_diagonal: non-positive diagonal entry " << diag[i] << " at dof " << i;
        throw std::runtime_error(msg.str());
      }
    }
    return diag;
  }

private:
  static constexpr std::size_t max_q = 16;

  struct CellData {
    std::size_t n_q = 0;
    double inv_h = 0.0;
    std::array<double, max_q> JxW{};
    std::array<double, max_q> phi{};
    std::array<double, max_q> g{};
    std::array<double, max_q> phi_tilde{};
    std::array<double, max_q> sig_e{};
    std::array<double, max_q> div_u{};
    std::array<Tensor2, max_q> sigma{};
    std::array<std::array<double, 2>, max_q> grad_phi{};
  };

  void require_state() const {
    if (!u_ || !phi_ || !phi_tilde_) throw std::logic_error("FractureOperator: state not set");
    if (!cu_ || !cphi_) throw std::logic_error("FractureOperator: constraints not set");
  }

  bool is_edge(int node) const { return !edge_.empty() && edge_[static_cast<std::size_t>(node)]; }

  void prepare(std::size_t ci, CellData& cd) const {
    const auto& cell = map_->cells[ci];
    const double h = cell.h;
    cd.n_q = quad_.points.size();
    cd.inv_h = 1.0 / h;
    std::array<double, 8> ul{};
    std::array<double, 4> pl{}, ptl{};
    for (std::size_t k = 0; k < 4; ++k) {
      const auto n = static_cast<std::size_t>(cell.nodes[k]);
      ul[2 * k] = (*u_)[2 * n];
      ul[2 * k + 1] = (*u_)[2 * n + 1];
      pl[k] = (*phi_)[n];
      ptl[k] = (*phi_tilde_)[n];
    }
    for (std::size_t q = 0; q < cd.n_q; ++q) {
      const ShapeData& s = shapes_[q];
      Tensor2 gu{};
      double ph = 0.0, pt = 0.0;
      std::array<double, 2> gp{};
      for (std::size_t k = 0; k < 4; ++k) {
        const double dx = s.gradients[k][0] * cd.inv_h, dy = s.gradients[k][1] * cd.inv_h;
        gu[0][0] += ul[2 * k] * dx;
        gu[0][1] += ul[2 * k] * dy;
        gu[1][0] += ul[2 * k + 1] * dx;
        gu[1][1] += ul[2 * k + 1] * dy;
        ph += pl[k] * s.values[k];
        pt += ptl[k] * s.values[k];
        gp[0] += pl[k] * dx;
        gp[1] += pl[k] * dy;
      }
      const Tensor2 sig = stress(gu, params_.mu, params_.lambda);
      cd.JxW[q] = quad_.weights[q] * h * h;
      cd.phi[q] = ph;
      cd.phi_tilde[q] = pt;
      cd.g[q] = degradation(pt, params_.kappa);
      cd.sigma[q] = sig;
      cd.sig_e[q] = contract(sig, strain(gu));
      cd.div_u[q] = gu[0][0] + gu[1][1];
      cd.grad_phi[q] = gp;
      if (!std::isfinite(cd.sig_e[q]) || !std::isfinite(ph) || !std::isfinite(pt) || !std::isfinite(gp[0]) ||
          !std::isfinite(gp[1])) {
        std::ostringstream msg;
        msg << "FractureOperator: non-finite quadrature value on cell " << cell.mesh_cell;
        throw std::runtime_error(msg.str());
      }
    }
  }

  void cell_residual(const CellData& cd, std::array<double, 8>& ru, std::array<double, 4>& rphi) const {
    const double p = params_.pressure, k1 = 1.0 - params_.kappa;
    const double gl = params_.G_c / params_.length_scale, gll = params_.G_c * params_.length_scale;
    for (std::size_t q = 0; q < cd.n_q; ++q) {
      const ShapeData& s = shapes_[q];
      const double pt2p = cd.phi_tilde[q] * cd.phi_tilde[q] * p;
      const double react = k1 * cd.phi[q] * cd.sig_e[q] + 2.0 * cd.phi[q] * p * cd.div_u[q] - gl * (1.0 - cd.phi[q]);
      for (std::size_t k = 0; k < 4; ++k) {
        const double dx = s.gradients[k][0] * cd.inv_h, dy = s.gradients[k][1] * cd.inv_h;
        for (std::size_t c = 0; c < 2; ++c) {
          const double grad_c = c == 0 ? dx : dy;
          ru[2 * k + c] += cd.JxW[q] * (cd.g[q] * (cd.sigma[q][c][0] * dx + cd.sigma[q][c][1] * dy) + pt2p * grad_c);
        }
        rphi[k] += cd.JxW[q] * (react * s.values[k] + gll * (cd.grad_phi[q][0] * dx + cd.grad_phi[q][1] * dy));
      }
    }
  }

  /// which = {uu, phiphi, phiu}
  void cell_apply(const CellData& cd, const std::array<double, 8>* du, const std::array<double, 4>* dphi,
                  std::array<double, 8>* ou, std::array<double, 4>* ophi, std::array<bool, 3> which) const {
    const double p = params_.pressure, k1 = 1.0 - params_.kappa;
    const double gl = params_.G_c / params_.length_scale, gll = params_.G_c * params_.length_scale;
    for (std::size_t q = 0; q < cd.n_q; ++q) {
      const ShapeData& s = shapes_[q];
      std::array<double, 4> dx{}, dy{};
      for (std::size_t k = 0; k < 4; ++k) {
        dx[k] = s.gradients[k][0] * cd.inv_h;
        dy[k] = s.gradients[k][1] * cd.inv_h;
      }
      if ((which[0] || which[2]) && du) {
        Tensor2 gu{};
        for (std::size_t k = 0; k < 4; ++k) {
          gu[0][0] += (*du)[2 * k] * dx[k];
          gu[0][1] += (*du)[2 * k] * dy[k];
          gu[1][0] += (*du)[2 * k + 1] * dx[k];
          gu[1][1] += (*du)[2 * k + 1] * dy[k];
        }
        if (which[0] && ou) {
          const Tensor2 sd = stress(gu, params_.mu, params_.lambda);
          const double f = cd.JxW[q] * cd.g[q];
          for (std::size_t k = 0; k < 4; ++k) {
            (*ou)[2 * k] += f * (sd[0][0] * dx[k] + sd[0][1] * dy[k]);
            (*ou)[2 * k + 1] += f * (sd[1][0] * dx[k] + sd[1][1] * dy[k]);
          }
        }
        if (which[2] && ophi) {
          // sigma(du):e(u) = sigma(u):e(du)
          const double coupling =
              k1 * 2.0 * cd.phi[q] * contract(cd.sigma[q], strain(gu)) + 2.0 * p * cd.phi[q] * (gu[0][0] + gu[1][1]);
          for (std::size_t k = 0; k < 4; ++k) (*ophi)[k] += cd.JxW[q] * coupling * s.values[k];
        }
      }
      if (which[1] && dphi && ophi) {
        double v = 0.0, gx = 0.0, gy = 0.0;
        for (std::size_t k = 0; k < 4; ++k) {
          v += (*dphi)[k] * s.values[k];
          gx += (*dphi)[k] * dx[k];
          gy += (*dphi)[k] * dy[k];
        }
        const double react = k1 * cd.sig_e[q] + 2.0 * p * cd.div_u[q] + gl;
        for (std::size_t k = 0; k < 4; ++k)
          (*ophi)[k] += cd.JxW[q] * (react * v * s.values[k] + gll * (gx * dx[k] + gy * dy[k]));
      }
    }
  }

  template <std::size_t N>
  void gather(const Vector& x, const ConstraintSet& cs, const std::array<int, 4>& nodes, int ncomp, Read read,
              bool edge_full, std::array<double, N>& local) const {
    for (std::size_t k = 0; k < 4; ++k)
      for (int c = 0; c < ncomp; ++c) {
        const int node = nodes[k];
        const auto g = static_cast<std::size_t>(ncomp * node + c);
        double v = x[g];
        if (read == Read::homogeneous) {
          if (is_edge(node) && !edge_full) {
            v = 0.0;
          } else if (cs.is_constrained(g)) {
            v = 0.0;
            for (auto [m, w] : cs.entry(g).masters)
              if (edge_full || !is_edge(m / ncomp)) v += w * x[static_cast<std::size_t>(m)];
          }
        }
        local[static_cast<std::size_t>(ncomp) * k + static_cast<std::size_t>(c)] = v;
      }
  }

  template <std::size_t N>
  void scatter_block(const std::array<double, N>& local, const ConstraintSet& cs, const std::array<int, 4>& nodes,
                     int ncomp, bool edge_full, Vector& out) const {
    for (std::size_t k = 0; k < 4; ++k)
      for (int c = 0; c < ncomp; ++c) {
        const int node = nodes[k];
        const auto g = static_cast<std::size_t>(ncomp * node + c);
        const double v = local[static_cast<std::size_t>(ncomp) * k + static_cast<std::size_t>(c)];
        if (is_edge(node) && !edge_full) continue;
        if (cs.is_constrained(g)) {
          for (auto [m, w] : cs.entry(g).masters)
            if (edge_full || !is_edge(m / ncomp)) out[static_cast<std::size_t>(m)] += w * v;
        } else {
          out[g] += v;
        }
      }
  }

  void scatter(std::size_t ci, const std::array<double, 8>* lu, const std::array<double, 4>* lphi, Vector& ou,
               Vector& ophi, bool edge_full) const {
    const auto& nodes = map_->cells[ci].nodes;
    if (lu && !ou.empty()) scatter_block(*lu, *cu_, nodes, 2, edge_full, ou);
    if (lphi && !ophi.empty()) scatter_block(*lphi, *cphi_, nodes, 1, edge_full, ophi);
  }

  void apply(const Vector* du, const Vector* dphi, Vector* out_u, Vector* out_phi, std::array<bool, 3> which, Read read,
             bool edge_full) const {
    require_state();
    Vector dummy;
    Vector& ou = out_u ? *out_u : dummy;
    Vector& ophi = out_phi ? *out_phi : dummy;
    run_cells([&](std::size_t begin, std::size_t end, Vector& lou, Vector& lophi) {
      CellData cd;
      std::array<double, 8> lu{}, ru{};
      std::array<double, 4> lp{}, rp{};
      for (std::size_t ci = begin; ci < end; ++ci) {
        const auto& nodes = map_->cells[ci].nodes;
        prepare(ci, cd);
        if (du) gather(*du, *cu_, nodes, 2, read, edge_full, lu);
        if (dphi) gather(*dphi, *cphi_, nodes, 1, read, edge_full, lp);
        ru.fill(0.0);
        rp.fill(0.0);
        cell_apply(cd, du ? &lu : nullptr, dphi ? &lp : nullptr, out_u ? &ru : nullptr, out_phi ? &rp : nullptr, which);
        scatter(ci, out_u ? &ru : nullptr, out_phi ? &rp : nullptr, lou, lophi, edge_full);
      }
    }, ou, ophi);
  }

  /// Runs body(begin, end, out_u, out_phi) over cell ranges; with several
  /// threads each range accumulates privately and the partial results are
  /// summed in range order, so output is deterministic for a fixed count.
  template <class Body>
  void run_cells(Body&& body, Vector& ou, Vector& ophi) const {
    const std::size_t n = map_->cells.size();
    const auto nt = static_cast<std::size_t>(std::min<std::size_t>(static_cast<std::size_t>(threads_), std::max<std::size_t>(n, 1)));
    if (nt <= 1) {
      body(0, n, ou, ophi);
      return;
    }
    std::vector<Vector> pu(nt, Vector(ou.size(), 0.0)), pp(nt, Vector(ophi.size(), 0.0));
    std::vector<std::thread> workers;
    for (std::size_t t = 0; t < nt; ++t)
      workers.emplace_back([&, t] { body(n * t / nt, n * (t + 1) / nt, pu[t], pp[t]); });
    for (auto& w : workers) w.join();
    for (std::size_t t = 0; t < nt; ++t) {
      axpy(1.0, pu[t], ou);
      axpy(1.0, pp[t], ophi);
    }
  }

  void identity_rows(const Vector& x, Vector& y, const ConstraintSet& cs, bool edges_identity) const {
    for (const auto& e : cs.entries()) y[static_cast<std::size_t>(e.dof)] = x[static_cast<std::size_t>(e.dof)];
    if (!edges_identity || edge_.empty()) return;
    const std::size_t ncomp = y.size() / edge_.size();
    for (std::size_t n = 0; n < edge_.size(); ++n)
      if (edge_[n])
        for (std::size_t c = 0; c < ncomp; ++c) y[ncomp * n + c] = x[ncomp * n + c];
  }

  void zero_edges(Vector& u, Vector& phi) const {
    for (std::size_t n = 0; n < edge_.size(); ++n)
      if (edge_[n]) {
        u[2 * n] = u[2 * n + 1] = 0.0;
        phi[n] = 0.0;
      }
  }

  const DofMap* map_;
  MaterialParams params_;
  QuadratureRule quad_;
  std::vector<ShapeData> shapes_;
  const Vector* u_ = nullptr;
  const Vector* phi_ = nullptr;
  const Vector* phi_tilde_ = nullptr;
  const ConstraintSet* cu_ = nullptr;
  const ConstraintSet* cphi_ = nullptr;
  std::vector<char> edge_;
  int threads_ = 1;
};

}  // namespace pff
