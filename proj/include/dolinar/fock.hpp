#pragma once

// Truncated single- and two-mode Fock spaces.
//
// Conventions used throughout the library:
//   * mode A is the signal, mode B the detected ancilla;
//   * the beamsplitter is B(theta) = exp[theta (a^dag b - a b^dag)], so that
//     B |alpha>|0> = |alpha cos(theta)>|-alpha sin(theta)>;
//   * the displacement is D(gamma) = exp(gamma b^dag - conj(gamma) b).

#include <cmath>
#include <complex>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "dolinar/errors.hpp"

namespace dolinar {

using cplx = std::complex<double>;

/// Probability mass of a Poisson(mean) variable strictly above `n`.
inline double poisson_tail(double mean, int n) {
  if (mean <= 0.0) return 0.0;
  double log_term = -mean;  // log p_0
  for (int m = 1; m <= n + 1; ++m) log_term += std::log(mean) - std::log(double(m));
  double term = std::exp(log_term);  // p_{n+1}
  double sum = 0.0;
  for (int m = n + 1; m < n + 2000 && term > 0.0; ++m) {
    sum += term;
    if (double(m) > mean && term < 1e-20 * sum) break;
    term *= mean / double(m + 1);
  }
  return sum;
}

/// Smallest cutoff whose Poisson tail for |amplitude|^2 is below 1e-12, never below 15.
inline int default_cutoff(double max_abs_amplitude) {
  const double mean = max_abs_amplitude * max_abs_amplitude;
  int n = 15;
  while (poisson_tail(mean, n) >= 1e-12) ++n;
  return n;
}

/// Cutoff for analytic conditional states: Poisson tail below 1e-30, so the
/// dropped amplitudes sit near machine precision. Needed because a|psi> loses
/// the top amplitude, which the 1e-12 probability rule leaves at ~1e-7.
inline int analysis_cutoff(double max_abs_amplitude) {
  const double mean = max_abs_amplitude * max_abs_amplitude;
  int n = 15;
  while (poisson_tail(mean, n) >= 1e-30) ++n;
  return n;
}

/// Complex amplitudes over |0>..|cutoff>. Kraus outputs are not renormalized,
/// so the norm may lie anywhere in [0, 1].
class FockState {
 public:
  FockState() : amps_(Eigen::VectorXcd::Zero(1)) {}
  explicit FockState(int cutoff) {
    if (cutoff < 0) throw ValidationError("FockState: cutoff must be >= 0");
    amps_ = Eigen::VectorXcd::Zero(cutoff + 1);
  }
  explicit FockState(Eigen::VectorXcd amps) : amps_(std::move(amps)) {
    if (amps_.size() == 0) throw ValidationError("FockState: empty amplitude vector");
  }

  static FockState number(int n, int cutoff) {
    if (n < 0 || n > cutoff) throw ValidationError("FockState::number: n outside [0, cutoff]");
    FockState s(cutoff);
    s.amps_[n] = 1.0;
    return s;
  }
  static FockState vacuum(int cutoff) { return number(0, cutoff); }

  int cutoff() const { return int(amps_.size()) - 1; }
  const Eigen::VectorXcd& amps() const { return amps_; }
  cplx operator[](int m) const { return amps_[m]; }

  double squared_norm() const { return amps_.squaredNorm(); }
  double norm() const { return amps_.norm(); }

  FockState normalized() const {
    const double n = norm();
    if (!(n > 0.0)) throw NumericalError("FockState::normalized: zero-norm state");
    return FockState(Eigen::VectorXcd(amps_ / n));
  }

  friend FockState operator+(const FockState& x, const FockState& y) {
    check_same_cutoff(x, y, "operator+");
    return FockState(Eigen::VectorXcd(x.amps_ + y.amps_));
  }
  friend FockState operator-(const FockState& x, const FockState& y) {
    check_same_cutoff(x, y, "operator-");
    return FockState(Eigen::VectorXcd(x.amps_ - y.amps_));
  }
  friend FockState operator*(cplx z, const FockState& x) { return FockState(Eigen::VectorXcd(z * x.amps_)); }

  static void check_same_cutoff(const FockState& x, const FockState& y, const char* where) {
    if (x.cutoff() != y.cutoff())
      throw ValidationError(std::string(where) + ": cutoff mismatch (" + std::to_string(x.cutoff()) +
                            " vs " + std::to_string(y.cutoff()) + ")");
  }

 private:
  Eigen::VectorXcd amps_;
};

/// <s0|s1>, conjugate-linear in the first argument.
inline cplx inner_product(const FockState& s0, const FockState& s1) {
  FockState::check_same_cutoff(s0, s1, "inner_product");
  return s0.amps().dot(s1.amps());  // Eigen's dot conjugates the left operand
}

/// Truncated coherent expansion e^{-|alpha|^2/2} alpha^m / sqrt(m!), not renormalized.
inline FockState make_coherent(cplx alpha, int cutoff) {
  if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag()))
    throw ValidationError("make_coherent: non-finite amplitude");
  if (cutoff < 0) throw ValidationError("make_coherent: cutoff must be >= 0");
  Eigen::VectorXcd amps(cutoff + 1);
  amps[0] = std::exp(-0.5 * std::norm(alpha));
  for (int m = 1; m <= cutoff; ++m) amps[m] = amps[m - 1] * alpha / std::sqrt(double(m));
  return FockState(std::move(amps));
}

inline FockState make_coherent(cplx alpha) { return make_coherent(alpha, default_cutoff(std::abs(alpha))); }

/// Two-mode amplitudes indexed (n_A, n_B).
class TwoModeState {
 public:
  TwoModeState(int cutoff_a, int cutoff_b) {
    if (cutoff_a < 0 || cutoff_b < 0) throw ValidationError("TwoModeState: negative cutoff");
    amps_ = Eigen::MatrixXcd::Zero(cutoff_a + 1, cutoff_b + 1);
  }
  explicit TwoModeState(Eigen::MatrixXcd amps) : amps_(std::move(amps)) {
    if (amps_.size() == 0) throw ValidationError("TwoModeState: empty amplitude matrix");
  }

  static TwoModeState product(const FockState& a, const FockState& b) {
    return TwoModeState(Eigen::MatrixXcd(a.amps() * b.amps().transpose()));
  }

  int cutoff_a() const { return int(amps_.rows()) - 1; }
  int cutoff_b() const { return int(amps_.cols()) - 1; }
  const Eigen::MatrixXcd& amps() const { return amps_; }
  double squared_norm() const { return amps_.squaredNorm(); }

  /// Unnormalized signal-mode state conditioned on k photons in mode B.
  FockState project_b(int k) const {
    if (k < 0 || k > cutoff_b()) throw ValidationError("TwoModeState::project_b: k outside ancilla space");
    return FockState(Eigen::VectorXcd(amps_.col(k)));
  }

 private:
  Eigen::MatrixXcd amps_;
};

inline cplx inner_product(const TwoModeState& x, const TwoModeState& y) {
  if (x.amps().rows() != y.amps().rows() || x.amps().cols() != y.amps().cols())
    throw ValidationError("inner_product: two-mode shape mismatch");
  return (x.amps().conjugate().cwiseProduct(y.amps())).sum();
}

/// Square operator on a truncated single mode, tagged with what it represents.
struct OperatorMatrix {
  enum class Kind { displacement, beamsplitter_reduced, damping, annihilation, creation, kraus, generic };

  Kind kind = Kind::generic;
  Eigen::MatrixXcd entries;

  int cutoff() const { return int(entries.rows()) - 1; }

  FockState apply(const FockState& s) const {
    if (s.cutoff() != cutoff()) throw ValidationError("OperatorMatrix::apply: cutoff mismatch");
    return FockState(Eigen::VectorXcd(entries * s.amps()));
  }
};

inline OperatorMatrix annihilation_matrix(int cutoff) {
  OperatorMatrix op{OperatorMatrix::Kind::annihilation, Eigen::MatrixXcd::Zero(cutoff + 1, cutoff + 1)};
  for (int m = 1; m <= cutoff; ++m) op.entries(m - 1, m) = std::sqrt(double(m));
  return op;
}

inline OperatorMatrix creation_matrix(int cutoff) {
  OperatorMatrix op{OperatorMatrix::Kind::creation, annihilation_matrix(cutoff).entries.adjoint()};
  return op;
}

/// exp(gamma b^dag - conj(gamma) b) exponentiated on the truncated space.
///
/// The truncated generator is anti-Hermitian, so the result is exactly unitary;
/// its low-photon columns reproduce the untruncated operator as long as the
/// coherent state |gamma> fits in the space. Throws TruncationError when the
/// Poisson tail of |gamma|^2 above the cutoff exceeds `leakage_tol`.
inline OperatorMatrix displacement_matrix(cplx gamma, int cutoff, double leakage_tol = 1e-8) {
  if (cutoff < 0) throw ValidationError("displacement_matrix: cutoff must be >= 0");
  if (!std::isfinite(gamma.real()) || !std::isfinite(gamma.imag()))
    throw ValidationError("displacement_matrix: non-finite amplitude");
  const double leak = poisson_tail(std::norm(gamma), cutoff);
  if (leak > leakage_tol)
    throw TruncationError("displacement_matrix: |gamma|=" + std::to_string(std::abs(gamma)) +
                          " leaks " + std::to_string(leak) + " beyond cutoff " + std::to_string(cutoff));
  const Eigen::MatrixXcd a = annihilation_matrix(cutoff).entries;
  const Eigen::MatrixXcd generator = gamma * a.adjoint() - std::conj(gamma) * a;
  return {OperatorMatrix::Kind::displacement, generator.exp()};
}

namespace detail {

// Real generator of the beamsplitter restricted to total photon number `total`,
// in the basis |n_A, total - n_A>, n_A = 0..total.
inline Eigen::MatrixXd beamsplitter_block_generator(int total, double theta) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(total + 1, total + 1);
  for (int na = 0; na <= total; ++na) {
    const int nb = total - na;
    if (nb > 0) g(na + 1, na) += theta * std::sqrt(double(na + 1) * double(nb));  // a^dag b
    if (na > 0) g(na - 1, na) -= theta * std::sqrt(double(na) * double(nb + 1));  // -a b^dag
  }
  return g;
}

}  // namespace detail

/// Applies exp[theta (a^dag b - a b^dag)] block by block in total photon number.
/// Each block is exponentiated exactly; output components that fall outside the
/// (cutoff_a, cutoff_b) box are dropped.
inline TwoModeState apply_beamsplitter(const TwoModeState& state, double theta) {
  if (!(theta >= 0.0 && theta < M_PI / 2)) throw ValidationError("apply_beamsplitter: theta outside [0, pi/2)");
  const int ca = state.cutoff_a();
  const int cb = state.cutoff_b();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(ca + 1, cb + 1);
  for (int total = 0; total <= ca + cb; ++total) {
    const Eigen::MatrixXd u = detail::beamsplitter_block_generator(total, theta).exp();
    const int lo = std::max(0, total - cb);
    const int hi = std::min(total, ca);
    for (int na_out = lo; na_out <= hi; ++na_out) {
      cplx acc = 0.0;
      for (int na_in = lo; na_in <= hi; ++na_in) acc += u(na_out, na_in) * state.amps()(na_in, total - na_in);
      out(na_out, total - na_out) = acc;
    }
  }
  return TwoModeState(std::move(out));
}

/// exp[-(L/2) a^dag a]: amplitude m scaled by e^{-mL/2}.
inline FockState damping_apply(const FockState& state, double L) {
  if (!(L >= 0.0)) throw ValidationError("damping_apply: L must be >= 0");
  Eigen::VectorXcd amps = state.amps();
  const double factor = std::exp(-0.5 * L);
  double scale = 1.0;
  for (int m = 0; m <= state.cutoff(); ++m) {
    amps[m] *= scale;
    scale *= factor;
  }
  return FockState(std::move(amps));
}

/// c^{a^dag a} for a real c in [0, 1]; damping_apply with c = e^{-L/2}.
inline FockState number_power_apply(const FockState& state, double c) {
  Eigen::VectorXcd amps = state.amps();
  double scale = 1.0;
  for (int m = 0; m <= state.cutoff(); ++m) {
    amps[m] *= scale;
    scale *= c;
  }
  return FockState(std::move(amps));
}

/// a|psi>. The top amplitude has nowhere to go and is dropped.
inline FockState annihilation_apply(const FockState& state) {
  const int c = state.cutoff();
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(c + 1);
  for (int m = 0; m < c; ++m) amps[m] = std::sqrt(double(m + 1)) * state[m + 1];
  return FockState(std::move(amps));
}

/// exp(z a)|psi>. Only lowers photon number, so it is exact on a truncated input.
inline FockState exp_annihilation_apply(const FockState& state, cplx z) {
  const int c = state.cutoff();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(c + 1);
  // out_m = sum_j z^j / j! sqrt((m+j)!/m!) psi_{m+j}
  for (int m = 0; m <= c; ++m) {
    cplx term_coeff = 1.0;  // z^j sqrt((m+j)!/m!) / j!
    cplx acc = state[m];
    for (int j = 1; m + j <= c; ++j) {
      term_coeff *= z * std::sqrt(double(m + j)) / double(j);
      acc += term_coeff * state[m + j];
      if (term_coeff == 0.0) break;
    }
    out[m] = acc;
  }
  return FockState(std::move(out));
}

}  // namespace dolinar
