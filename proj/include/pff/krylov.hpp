#pragma once

// Restarted, left-preconditioned GMRES on any vector type providing dot,
// norm, axpy, scale and set_zero.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "pff/linalg.hpp"
#include "pff/mg.hpp"

namespace pff {

struct GmresConfig {
  double rel_tol = 1e-6;
  double abs_tol = 1e-12;
  int max_iter = 1000;
  int restart_length = 100;
  /// Accepted ratio of the true relative residual to rel_tol.
  double true_residual_factor = 10.0;

  void validate() const {
    if (!(rel_tol > 0) || !(abs_tol > 0)) throw std::invalid_argument("GmresConfig: tolerances must be positive");
    if (restart_length < 1) throw std::invalid_argument("GmresConfig: restart length must be >= 1");
    if (max_iter < 1) throw std::invalid_argument("GmresConfig: max_iter must be >= 1");
  }
};

template <class V>
struct GmresResult {
  V x;
  int iterations = 0;
  bool converged = false;
  /// Preconditioned residual norm, starting with the initial one.
  std::vector<double> residual_history;
  /// ||b - A x|| / ||b|| of the returned iterate.
  double true_residual = 0.0;
};

template <class V, class Op, class Prec>
GmresResult<V> gmres_solve(const Op& A, const Prec& P, const V& b, const GmresConfig& cfg) {
  cfg.validate();
  GmresResult<V> res;
  res.x = b;
  set_zero(res.x);
  const double b_norm = norm(b);
  if (!std::isfinite(b_norm)) throw std::invalid_argument("gmres_solve: non-finite right-hand side");
  if (b_norm == 0.0) {
    res.converged = true;
    res.residual_history.push_back(0.0);
    return res;
  }
  const int m = cfg.restart_length;
  std::vector<V> basis;
  std::vector<std::vector<double>> H(static_cast<std::size_t>(m + 1), std::vector<double>(static_cast<std::size_t>(m), 0.0));
  std::vector<double> cs(static_cast<std::size_t>(m)), sn(static_cast<std::size_t>(m)), g(static_cast<std::size_t>(m + 1));

  auto true_residual = [&]() {
    V r = b;
    axpy(-1.0, A(res.x), r);
    return norm(r) / b_norm;
  };

  double target = -1.0;
  for (;;) {
    V r = b;
    if (res.iterations > 0) axpy(-1.0, A(res.x), r);
    V z = P(r);
    const double beta = norm(z);
    if (!std::isfinite(beta)) throw std::runtime_error("gmres_solve: non-finite preconditioned residual");
    if (target < 0) {
      target = std::max(cfg.rel_tol * beta, cfg.abs_tol);
      res.residual_history.push_back(beta);
    }
    if (beta <= target) {
      res.true_residual = true_residual();
      if (res.true_residual <= cfg.true_residual_factor * cfg.rel_tol || res.iterations >= cfg.max_iter) {
        res.converged = res.true_residual <= cfg.true_residual_factor * cfg.rel_tol;
        break;
      }
      // preconditioned norm masks the true residual: tighten and continue
      target = beta * cfg.true_residual_factor * cfg.rel_tol / res.true_residual * 0.5;
      if (!(target > 0)) break;
      continue;
    }
    if (res.iterations >= cfg.max_iter) {
      res.true_residual = true_residual();
      break;
    }
    basis.clear();
    scale(1.0 / beta, z);
    basis.push_back(std::move(z));
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;
    int j = 0;
    for (; j < m && res.iterations < cfg.max_iter; ++j) {
      V w = P(A(basis[static_cast<std::size_t>(j)]));
      ++res.iterations;
      auto& h = H;  // column j of the Hessenberg matrix
      for (int i = 0; i <= j; ++i) h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 0.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= j; ++i) {
          const double hij = dot(basis[static_cast<std::size_t>(i)], w);
          h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] += hij;
          axpy(-hij, basis[static_cast<std::size_t>(i)], w);
        }
        // second pass only when orthogonality was lost
        const double wn = norm(w);
        double loss = 0.0;
        if (wn > 0)
          for (int i = 0; i <= j; ++i) loss = std::max(loss, std::abs(dot(basis[static_cast<std::size_t>(i)], w)) / wn);
        if (loss <= 1e-10) break;
      }
      const double hnext = norm(w);
      if (!std::isfinite(hnext)) throw std::runtime_error("gmres_solve: non-finite value in Arnoldi process");
      h[static_cast<std::size_t>(j + 1)][static_cast<std::size_t>(j)] = hnext;
      for (int i = 0; i < j; ++i) {
        const double a = h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        const double c = h[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(j)];
        h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = cs[static_cast<std::size_t>(i)] * a + sn[static_cast<std::size_t>(i)] * c;
        h[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(j)] = -sn[static_cast<std::size_t>(i)] * a + cs[static_cast<std::size_t>(i)] * c;
      }
      const double a = h[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)];
      const double den = std::hypot(a, hnext);
      cs[static_cast<std::size_t>(j)] = den > 0 ? a / den : 1.0;
      sn[static_cast<std::size_t>(j)] = den > 0 ? hnext / den : 0.0;
      h[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)] = den;
      h[static_cast<std::size_t>(j + 1)][static_cast<std::size_t>(j)] = 0.0;
      g[static_cast<std::size_t>(j + 1)] = -sn[static_cast<std::size_t>(j)] * g[static_cast<std::size_t>(j)];
      g[static_cast<std::size_t>(j)] *= cs[static_cast<std::size_t>(j)];
      const double est = std::abs(g[static_cast<std::size_t>(j + 1)]);
      res.residual_history.push_back(est);
      if (est <= target || hnext <= 1e-14 * beta) {
        ++j;
        break;
      }
      scale(1.0 / hnext, w);
      basis.push_back(std::move(w));
    }
    // back substitution for the cycle's least-squares problem
    std::vector<double> y(static_cast<std::size_t>(j), 0.0);
    for (int i = j - 1; i >= 0; --i) {
      double s = g[static_cast<std::size_t>(i)];
      for (int k = i + 1; k < j; ++k) s -= H[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] * y[static_cast<std::size_t>(k)];
      const double d = H[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
      if (d == 0.0) throw std::runtime_error("gmres_solve: singular Hessenberg matrix");
      y[static_cast<std::size_t>(i)] = s / d;
    }
    for (int i = 0; i < j; ++i) axpy(y[static_cast<std::size_t>(i)], basis[static_cast<std::size_t>(i)], res.x);
    if (!all_finite(res.x)) throw std::runtime_error("gmres_solve: non-finite iterate");
  }
  return res;
}

/// Block-diagonal preconditioner: one V-cycle per diagonal block, the
/// phi-u coupling is ignored.
class BlockPreconditioner {
public:
  using Apply = std::function<Vector(const Vector&)>;

  BlockPreconditioner(Apply uu, Apply phiphi) : uu_(std::move(uu)), phiphi_(std::move(phiphi)) {}
  BlockPreconditioner(const BlockMultigrid& uu, const BlockMultigrid& phiphi)
      : uu_([&uu](const Vector& r) { return uu.vmult(r); }),
        phiphi_([&phiphi](const Vector& r) { return phiphi.vmult(r); }) {}

  BlockVector operator()(const BlockVector& r) const {
    BlockVector z;
    z.u = uu_(r.u);
    z.phi = phiphi_(r.phi);
    return z;
  }

private:
  Apply uu_;
  Apply phiphi_;
};

}  // namespace pff
