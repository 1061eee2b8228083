#pragma once

// Small dense-vector helpers shared by the solvers.

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace pff {

using Vector = std::vector<double>;

inline double dot(const Vector& a, const Vector& b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vector& a) { return std::sqrt(dot(a, a)); }

/// y += alpha * x
inline void axpy(double alpha, const Vector& x, Vector& y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale(double alpha, Vector& x) {
  for (double& v : x) v *= alpha;
}

inline void set_zero(Vector& x) {
  for (double& v : x) v = 0.0;
}

inline bool all_finite(const Vector& x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

/// Displacement block (two interleaved components per node) and phase-field
/// block (one value per node).
struct BlockVector {
  Vector u;
  Vector phi;

  BlockVector() = default;
  explicit BlockVector(std::size_t n_nodes) : u(2 * n_nodes, 0.0), phi(n_nodes, 0.0) {}
  BlockVector(Vector u_block, Vector phi_block) : u(std::move(u_block)), phi(std::move(phi_block)) {}

  std::size_t size() const { return u.size() + phi.size(); }

  /// Monolithic view: u block first, then phi block.
  Vector concatenated() const {
    Vector out(u);
    out.insert(out.end(), phi.begin(), phi.end());
    return out;
  }
  static BlockVector split(const Vector& flat, std::size_t n_nodes) {
    BlockVector out(n_nodes);
    for (std::size_t i = 0; i < 2 * n_nodes; ++i) out.u[i] = flat[i];
    for (std::size_t i = 0; i < n_nodes; ++i) out.phi[i] = flat[2 * n_nodes + i];
    return out;
  }
};

inline double dot(const BlockVector& a, const BlockVector& b) { return dot(a.u, b.u) + dot(a.phi, b.phi); }
inline double norm(const BlockVector& a) { return std::sqrt(dot(a, a)); }
inline void axpy(double alpha, const BlockVector& x, BlockVector& y) {
  axpy(alpha, x.u, y.u);
  axpy(alpha, x.phi, y.phi);
}
inline void scale(double alpha, BlockVector& x) {
  scale(alpha, x.u);
  scale(alpha, x.phi);
}
inline void set_zero(BlockVector& x) {
  set_zero(x.u);
  set_zero(x.phi);
}
inline bool all_finite(const BlockVector& x) { return all_finite(x.u) && all_finite(x.phi); }

}  // namespace pff
