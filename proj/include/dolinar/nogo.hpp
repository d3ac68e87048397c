#pragma once

// First-order orthogonality conditions for a single finite detection step.
//
// The detected mode is c = nu1 a + b_aux c_aux + gamma. The auxiliary state
// only enters through aux_term = <A| b_aux c_aux |A>.

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "dolinar/coherent.hpp"
#include "dolinar/errors.hpp"
#include "dolinar/fock.hpp"
#include "dolinar/qubit.hpp"

namespace dolinar {

struct DetectionDecomposition {
  cplx nu1 = 0.0;
  cplx gamma = 0.0;
  cplx aux_term = 0.0;

  void validate() const {
    if (std::abs(nu1) > 1.0 + 1e-12) throw ValidationError("DetectionDecomposition: |nu1| must be <= 1");
  }
};

/// conj(nu1) conj(alpha) (gamma + aux_term).
inline cplx delta_coherent(const DetectionDecomposition& d, cplx alpha) {
  return std::conj(d.nu1) * std::conj(alpha) * (d.gamma + d.aux_term);
}

/// nu1 (conj(gamma) + <A| b_aux c_aux^dag |A>).
inline cplx delta_qubit(const DetectionDecomposition& d) { return d.nu1 * std::conj(d.gamma + d.aux_term); }

/// <w0|(c^dag)^n c^n|w1> for n = 0, 1, evaluated from the states.
/// Terms proportional to <w0|w1> are kept with the c-number |gamma + aux|^2.
inline cplx moment_condition(int n, const FockState& w0, const FockState& w1, const DetectionDecomposition& d) {
  d.validate();
  if (n < 0) throw ValidationError("moment_condition: n must be >= 0");
  if (n >= 2) throw ValidationError("moment_condition: orders n >= 2 need an explicit auxiliary state");
  const cplx overlap = inner_product(w0, w1);
  if (n == 0) return overlap;
  const FockState aw0 = annihilation_apply(w0), aw1 = annihilation_apply(w1);
  const cplx w = d.gamma + d.aux_term;
  const cplx n_el = inner_product(aw0, aw1);  // <w0|a^dag a|w1>
  const cplx up = std::conj(inner_product(w1, aw0));  // <w0|a^dag|w1>
  const cplx down = inner_product(w0, aw1);            // <w0|a|w1>
  return std::norm(d.nu1) * n_el + std::conj(d.nu1) * w * up + d.nu1 * std::conj(w) * down + std::norm(w) * overlap;
}

inline cplx moment_condition(int n, const CoherentSignalPair& p, const DetectionDecomposition& d) {
  return moment_condition(n, p.omega0, p.omega1, d);
}
inline cplx moment_condition(int n, const QubitBasisPair& p, const DetectionDecomposition& d) {
  return moment_condition(n, p.omega0, p.omega1, d);
}

/// |nu1|^2 |alpha|^2 - i sqrt(1 - kappa^2) Im(delta).
inline cplx first_order_residual_coherent(cplx nu1, cplx alpha, cplx delta) {
  const double s = std::sqrt(-std::expm1(-4.0 * std::norm(alpha)));
  return std::norm(nu1) * std::norm(alpha) - cplx(0.0, 1.0) * s * delta.imag();
}

/// |nu1|^2 - 2i Im(delta).
inline cplx first_order_residual_qubit(cplx nu1, cplx delta) { return std::norm(nu1) - cplx(0.0, 2.0) * delta.imag(); }

/// Relation between the first moment and the residuals above:
/// coherent pair: moment = 2 kappa / (1 - kappa^2) * residual;
/// symmetric qubit pair: moment = -conj(residual) / 2.
inline cplx residual_from_moment_coherent(cplx moment, cplx alpha) {
  const double k = kappa(alpha);
  return moment * (-std::expm1(-4.0 * std::norm(alpha))) / (2.0 * k);
}
inline cplx residual_from_moment_qubit(cplx moment) { return -2.0 * std::conj(moment); }

/// Symmetric grid of n complex points per axis on [-r, r]^2, always containing 0.
inline std::vector<cplx> complex_grid(double r, int n) {
  if (n < 1) throw ValidationError("complex_grid: n must be >= 1");
  if (n % 2 == 0) ++n;
  std::vector<cplx> g;
  g.reserve(size_t(n) * size_t(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double x = n == 1 ? 0.0 : -r + 2.0 * r * i / (n - 1);
      const double y = n == 1 ? 0.0 : -r + 2.0 * r * j / (n - 1);
      g.emplace_back(x, y);
    }
  return g;
}

struct GridMinimum {
  double residual = std::numeric_limits<double>::infinity();
  cplx gamma = 0.0;
  cplx aux_term = 0.0;
};

inline GridMinimum minimize_first_order_coherent(cplx nu1, cplx alpha, const std::vector<cplx>& gammas,
                                                 const std::vector<cplx>& auxes) {
  GridMinimum best;
  for (const cplx g : gammas)
    for (const cplx x : auxes) {
      const double r = std::abs(first_order_residual_coherent(nu1, alpha, delta_coherent({nu1, g, x}, alpha)));
      if (r < best.residual) best = {r, g, x};
    }
  return best;
}

inline GridMinimum minimize_first_order_qubit(cplx nu1, const std::vector<cplx>& gammas,
                                              const std::vector<cplx>& auxes) {
  GridMinimum best;
  for (const cplx g : gammas)
    for (const cplx x : auxes) {
      const double r = std::abs(first_order_residual_qubit(nu1, delta_qubit({nu1, g, x})));
      if (r < best.residual) best = {r, g, x};
    }
  return best;
}

/// Log-spaced grid on (lo, hi], `n` points, hi included.
inline std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0 && hi > lo) || n < 1) throw ValidationError("log_grid: need 0 < lo < hi and n >= 1");
  std::vector<double> v;
  for (int i = 1; i <= n; ++i) v.push_back(lo * std::pow(hi / lo, double(i) / n));
  return v;
}

}  // namespace dolinar
