#pragma once

#include <cmath>
#include <complex>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dolinar/errors.hpp"

namespace dolinar {

/// Adaptive Gauss-Kronrod integral of a complex integrand over [l0, l1].
///
/// Integrates in u with l = l0 + u^2, which removes an inverse square-root
/// singularity at the lower endpoint.
template <class F>
std::complex<double> integrate_singular_start(F&& f, double l0, double l1, double tol = 1e-13) {
  if (!(l1 >= l0)) throw ValidationError("integrate_singular_start: l1 < l0");
  if (l1 == l0) return 0.0;
  using boost::math::quadrature::gauss_kronrod;
  const double umax = std::sqrt(l1 - l0);
  auto part = [&](bool imag) {
    auto g = [&](double u) {
      const std::complex<double> v = f(l0 + u * u) * (2.0 * u);
      return imag ? v.imag() : v.real();
    };
    double err = 0.0;
    const double r = gauss_kronrod<double, 31>::integrate(g, 0.0, umax, 15, tol, &err);
    if (!std::isfinite(r) || !std::isfinite(err) || err > 1e-8 * std::max(1.0, std::abs(r)))
      throw NumericalError("quadrature did not converge on [" + std::to_string(l0) + ", " + std::to_string(l1) +
                           "], error estimate " + std::to_string(err));
    return r;
  };
  return {part(false), part(true)};
}

}  // namespace dolinar
