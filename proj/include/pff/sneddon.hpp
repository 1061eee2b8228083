#pragma once

// Pressurized straight crack in (-10,10)^2: mesh and initial phase field,
// crack volume and opening quantities, and the closed-form references.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pff/fespace.hpp"
#include "pff/mesh.hpp"
#include "pff/operator.hpp"
#include "pff/physics.hpp"

namespace pff {

struct SneddonConfig {
  double half_length = 1.0;
  /// Overrides params.pressure.
  double pressure = 1e-3;
  MaterialParams params;
  int base_subdivisions = 5;
  int global_refines = 3;
  int local_refines = 3;
  /// The locally refined box is [-l0-b, l0+b] x [-b, b].
  double margin = 2.3;
  double young = 1.0;
  double poisson = 0.2;

  void validate() const {
    if (!(half_length > 0) || !std::isfinite(half_length)) throw std::invalid_argument("SneddonConfig: half_length must be positive");
    if (!(pressure >= 0) || !std::isfinite(pressure)) throw std::invalid_argument("SneddonConfig: pressure must be finite and non-negative");
    if (base_subdivisions < 1 || base_subdivisions > 32) throw std::invalid_argument("SneddonConfig: base_subdivisions must lie in [1, 32]");
    if (global_refines < 0 || local_refines < 0) throw std::invalid_argument("SneddonConfig: refinement counts must be non-negative");
    if (global_refines + local_refines > 14) throw std::invalid_argument("SneddonConfig: too many refinement levels");
    if (!(margin >= 0) || !std::isfinite(margin)) throw std::invalid_argument("SneddonConfig: margin must be non-negative");
    if (!(young > 0) || !std::isfinite(young)) throw std::invalid_argument("SneddonConfig: young must be positive");
    if (!(poisson > -1 && poisson < 0.5)) throw std::invalid_argument("SneddonConfig: poisson must lie in (-1, 0.5)");
  }

  double plane_strain_modulus() const { return young / (1.0 - poisson * poisson); }
};

struct SneddonProblem {
  QuadMesh mesh;
  DofMap map;
  MaterialParams params;
  State state;
  double h_min = 0.0;       // smallest cell edge
  double h_diag_min = 0.0;  // smallest cell diagonal
};

inline constexpr double sneddon_domain = 10.0;

inline SneddonProblem sneddon_setup(const SneddonConfig& cfg) {
  cfg.validate();
  const double L = sneddon_domain;
  QuadMesh mesh({-L, -L}, {L, L}, cfg.base_subdivisions);
  for (int i = 0; i < cfg.global_refines; ++i) mesh.refine_global();
  const double b = cfg.margin;
  mesh.refine_box({-cfg.half_length - b, -b}, {cfg.half_length + b, b}, cfg.local_refines);

  SneddonProblem p{std::move(mesh), {}, cfg.params, {}, 0.0, 0.0};
  p.map = build_dof_map(p.mesh);
  p.h_min = p.mesh.min_cell_size();
  p.h_diag_min = std::sqrt(2.0) * p.h_min;
  if (2.0 * cfg.half_length < 2.0 * p.h_min)
    throw std::invalid_argument("sneddon_setup: crack is resolved by fewer than 2 cells");
  p.params.length_scale = 2.0 * p.h_diag_min;
  p.params.pressure = cfg.pressure;
  p.params.validate();

  const double tol = 1e-9 * p.h_min;
  const Vector phi0 = interpolate(p.mesh, p.map, [&](Point x) {
    return (std::abs(x.x) <= cfg.half_length + tol && std::abs(x.y) <= p.h_min + tol) ? 0.0 : 1.0;
  });
  const std::size_t n = p.map.n_nodes();
  p.state.U = BlockVector(n);
  p.state.U.phi = phi0;
  p.state.phi_tilde = phi0;
  p.state.phi_old = phi0;
  return p;
}

/// Integral of u . grad(phi) over the domain.
inline double compute_tcv(const DofMap& map, const BlockVector& U) {
  const QuadratureRule q = gauss_rule(3);
  double tcv = 0.0;
  for (const auto& c : map.cells) {
    double cell = 0.0;
    for (std::size_t k = 0; k < q.points.size(); ++k) {
      const ShapeData s = shape_values(q.points[k]);
      double ux = 0, uy = 0, gx = 0, gy = 0;
      for (std::size_t a = 0; a < 4; ++a) {
        const auto node = static_cast<std::size_t>(c.nodes[a]);
        ux += s.values[a] * U.u[2 * node];
        uy += s.values[a] * U.u[2 * node + 1];
        gx += s.gradients[a][0] * U.phi[node];
        gy += s.gradients[a][1] * U.phi[node];
      }
      // reference gradient / h times area h^2
      cell += q.weights[k] * (ux * gx + uy * gy) * c.h;
    }
    tcv += cell;
  }
  return tcv;
}

/// Line integral of u . grad(phi) along the vertical line through each x.
/// On a cell edge the columns left and right of the line are averaged; on
/// the domain boundary the single adjacent column is used.
inline std::vector<std::pair<double, double>> compute_cod(const DofMap& map, const BlockVector& U,
                                                          const std::vector<double>& xs) {
  const double g = 0.5 * std::sqrt(0.6);
  const std::array<double, 3> gy_pts{0.5 - g, 0.5, 0.5 + g};
  const std::array<double, 3> gy_w{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  std::vector<std::pair<double, double>> out;
  out.reserve(xs.size());
  for (double x : xs) {
    double inside = 0.0;
    std::array<double, 2> side{0.0, 0.0};  // cells left of x, right of x
    std::array<bool, 2> has_side{false, false};
    for (const auto& c : map.cells) {
      const double tol = 1e-12;
      const double rx = (x - c.lo.x) / c.h;
      if (rx < -tol || rx > 1.0 + tol) continue;
      const double ref_x = std::clamp(rx, 0.0, 1.0);
      double line = 0.0;
      for (std::size_t k = 0; k < gy_pts.size(); ++k) {
        const ShapeData s = shape_values({ref_x, gy_pts[k]});
        double ux = 0, uy = 0, gx = 0, gy = 0;
        for (std::size_t a = 0; a < 4; ++a) {
          const auto node = static_cast<std::size_t>(c.nodes[a]);
          ux += s.values[a] * U.u[2 * node];
          uy += s.values[a] * U.u[2 * node + 1];
          gx += s.gradients[a][0] * U.phi[node];
          gy += s.gradients[a][1] * U.phi[node];
        }
        // gradient scales with 1/h, the segment length with h
        line += gy_w[k] * (ux * gx + uy * gy);
      }
      if (std::abs(rx - 1.0) <= tol) {
        side[0] += line;
        has_side[0] = true;
      } else if (std::abs(rx) <= tol) {
        side[1] += line;
        has_side[1] = true;
      } else {
        inside += line;
      }
    }
    const double edge = (has_side[0] && has_side[1]) ? 0.5 * (side[0] + side[1]) : side[0] + side[1];
    out.emplace_back(x, inside + edge);
  }
  return out;
}

inline double reference_tcv(const SneddonConfig& cfg, double modulus) {
  return 2.0 * std::numbers::pi * cfg.pressure * cfg.half_length * cfg.half_length / modulus;
}

inline double reference_tcv(const SneddonConfig& cfg) { return reference_tcv(cfg, cfg.plane_strain_modulus()); }

/// Full opening (both faces), so its integral over x equals reference_tcv.
inline double reference_cod(const SneddonConfig& cfg, double x, double modulus) {
  const double r = x / cfg.half_length;
  if (std::abs(r) >= 1.0) return 0.0;
  return 4.0 * cfg.pressure * cfg.half_length / modulus * std::sqrt(1.0 - r * r);
}

inline double reference_cod(const SneddonConfig& cfg, double x) { return reference_cod(cfg, x, cfg.plane_strain_modulus()); }

inline std::vector<double> cod_sample_points(int n = 101, double a = -2.0, double b = 2.0) {
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return xs;
}

/// Trapezoid rule over (x, value) samples sorted by x.
inline double trapezoid(const std::vector<std::pair<double, double>>& f) {
  double s = 0.0;
  for (std::size_t i = 1; i < f.size(); ++i) s += 0.5 * (f[i].first - f[i - 1].first) * (f[i].second + f[i - 1].second);
  return s;
}

struct QoiReport {
  double h_min = 0.0;
  std::size_t dofs = 0;
  double tcv = 0.0;
  double tcv_ref = 0.0;
  double tcv_ref_plane_stress = 0.0;
  double tcv_error_pct = 0.0;
  std::vector<std::pair<double, double>> cod;
  double avg_gmres_iters = 0.0;
  int newton_iters = 0;
};

}  // namespace pff
