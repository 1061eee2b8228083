#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pff {

using Tensor2 = std::array<std::array<double, 2>, 2>;

struct MaterialParams {
  double mu = 0.42;
  double lambda = 0.28;
  double G_c = 1.0;
  double kappa = 1e-12;
  double length_scale = 0.176776695296637;  // 2h for h = 0.088
  double pressure = 1e-3;

  void validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("MaterialParams: " + what); };
    if (!(mu > 0)) fail("mu must be positive");
    if (!(3 * lambda + 2 * mu > 0)) fail("3*lambda + 2*mu must be positive");
    if (!(G_c > 0)) fail("G_c must be positive");
    if (!(kappa > 0)) fail("kappa must be positive");
    if (!(length_scale > 0)) fail("length scale must be positive");
    if (!(pressure >= 0) || !std::isfinite(pressure)) fail("pressure must be finite and non-negative");
  }
};

inline Tensor2 strain(const Tensor2& grad_u) {
  const double off = 0.5 * (grad_u[0][1] + grad_u[1][0]);
  return {{{grad_u[0][0], off}, {off, grad_u[1][1]}}};
}

inline Tensor2 stress(const Tensor2& grad_u, double mu, double lambda) {
  const Tensor2 e = strain(grad_u);
  const double tr = e[0][0] + e[1][1];
  return {{{2 * mu * e[0][0] + lambda * tr, 2 * mu * e[0][1]}, {2 * mu * e[1][0], 2 * mu * e[1][1] + lambda * tr}}};
}

inline double contract(const Tensor2& a, const Tensor2& b) {
  return a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1];
}

/// g(phi) = (1 - kappa) phi^2 + kappa
inline double degradation(double phi, double kappa) { return (1.0 - kappa) * phi * phi + kappa; }

}  // namespace pff
