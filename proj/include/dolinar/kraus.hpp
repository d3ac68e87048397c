#pragma once

// One-step Kraus operators of the beamsplitter/displacement/counter cascade and
// their continuum limits: the no-count evolution S and the jump operator J.

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "dolinar/errors.hpp"
#include "dolinar/fock.hpp"
#include "dolinar/quadrature.hpp"

namespace dolinar {

struct StepKraus {
  int k = 0;
  double theta = 0.0;
  cplx beta = 0.0;
  OperatorMatrix matrix;
};

/// <k|D(x)|j> for k in [0, kmax], j in [0, jmax], built column by column from
/// D(x)|j+1> = (b^dag - conj(x)) D(x)|j> / sqrt(j+1). No truncation is involved.
inline Eigen::MatrixXcd displacement_elements(cplx x, int kmax, int jmax) {
  Eigen::MatrixXcd e(kmax + 1, jmax + 1);
  e(0, 0) = std::exp(-0.5 * std::norm(x));
  for (int k = 1; k <= kmax; ++k) e(k, 0) = e(k - 1, 0) * x / std::sqrt(double(k));
  for (int j = 0; j < jmax; ++j) {
    const double r = 1.0 / std::sqrt(double(j + 1));
    for (int k = 0; k <= kmax; ++k) {
      cplx v = -std::conj(x) * e(k, j);
      if (k > 0) v += std::sqrt(double(k)) * e(k - 1, j);
      e(k, j + 1) = v * r;
    }
  }
  return e;
}

/// Ancilla photon numbers needed before sum_k M^(k)^dag M^(k) is complete to
/// double precision on a signal space of the given cutoff.
inline int default_ancilla_cutoff(int cutoff, double abs_x) { return cutoff + default_cutoff(abs_x); }

namespace detail {
inline double log_binomial(int n, int j) {
  return std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0);
}
}  // namespace detail

/// <k|_B D_B(beta sin(theta)) B(theta) (. (x) |0>_B), as a matrix on the signal mode.
///
/// Uses B|n,0> = sum_j sqrt(C(n,j)) cos^{n-j}(theta) (-sin theta)^j |n-j, j>.
inline StepKraus exact_step_kraus(int k, double theta, cplx beta, int cutoff, int ancilla_cutoff = -1) {
  if (cutoff < 0) throw ValidationError("exact_step_kraus: cutoff must be >= 0");
  if (!(theta >= 0.0 && theta < M_PI / 2)) throw ValidationError("exact_step_kraus: theta outside [0, pi/2)");
  const cplx x = beta * std::sin(theta);
  if (ancilla_cutoff < 0) ancilla_cutoff = default_ancilla_cutoff(cutoff, std::abs(x));
  if (k < 0 || k > ancilla_cutoff)
    throw ValidationError("exact_step_kraus: k=" + std::to_string(k) + " outside [0, " +
                          std::to_string(ancilla_cutoff) + "]");
  const double c = std::cos(theta), s = std::sin(theta);
  const Eigen::MatrixXcd e = displacement_elements(x, k, cutoff);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(cutoff + 1, cutoff + 1);
  for (int n = 0; n <= cutoff; ++n) {
    for (int j = 0; j <= n; ++j) {
      double w;
      if (s == 0.0) {
        if (j > 0) break;
        w = std::pow(c, n);
      } else {
        w = std::exp(0.5 * detail::log_binomial(n, j) + (n - j) * std::log(c) + j * std::log(s));
        if (j % 2 == 1) w = -w;
      }
      m(n - j, n) += w * e(k, j);
    }
  }
  return {k, theta, beta, {OperatorMatrix::Kind::kraus, std::move(m)}};
}

namespace detail {
// exp(z a) on the truncated space.
inline Eigen::MatrixXcd exp_annihilation_matrix(cplx z, int cutoff) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(cutoff + 1, cutoff + 1);
  for (int n = 0; n <= cutoff; ++n) {
    cplx coeff = 1.0;
    m(n, n) = 1.0;
    for (int j = 1; j <= n; ++j) {
      coeff *= z * std::sqrt(double(n - j + 1)) / double(j);
      m(n - j, n) = coeff;
    }
  }
  return m;
}
inline Eigen::MatrixXcd number_power_matrix(double c, int cutoff) {
  Eigen::VectorXcd d(cutoff + 1);
  for (int n = 0; n <= cutoff; ++n) d[n] = std::pow(c, n);
  return d.asDiagonal();
}
}  // namespace detail

/// e^{-|beta|^2 sin^2/2} exp(a conj(beta) sin^2/cos) exp(a^dag a ln cos).
inline OperatorMatrix approx_no_count(double theta, cplx beta, int cutoff) {
  const double s = std::sin(theta), c = std::cos(theta);
  const Eigen::MatrixXcd m = std::exp(-0.5 * std::norm(beta) * s * s) *
                             detail::exp_annihilation_matrix(std::conj(beta) * s * s / c, cutoff) *
                             detail::number_power_matrix(c, cutoff);
  return {OperatorMatrix::Kind::kraus, m};
}

/// (beta sin - a tan) times the no-count factors.
inline OperatorMatrix approx_one_count(double theta, cplx beta, int cutoff) {
  const double s = std::sin(theta), c = std::cos(theta);
  const Eigen::MatrixXcd a = annihilation_matrix(cutoff).entries;
  const Eigen::MatrixXcd pre = beta * s * Eigen::MatrixXcd::Identity(cutoff + 1, cutoff + 1) - (s / c) * a;
  return {OperatorMatrix::Kind::kraus, pre * approx_no_count(theta, beta, cutoff).entries};
}

/// ||I - sum_{k <= ancilla_cutoff} M^(k)^dag M^(k)|| in the operator 2-norm.
inline double completeness_residual(double theta, cplx beta, int cutoff, int ancilla_cutoff = -1) {
  const cplx x = beta * std::sin(theta);
  if (ancilla_cutoff < 0) ancilla_cutoff = default_ancilla_cutoff(cutoff, std::abs(x));
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(cutoff + 1, cutoff + 1);
  for (int k = 0; k <= ancilla_cutoff; ++k) {
    const Eigen::MatrixXcd m = exact_step_kraus(k, theta, beta, cutoff, ancilla_cutoff).matrix.entries;
    acc -= m.adjoint() * m;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(acc, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Measurement records

struct Jump {
  double position = 0.0;
  int count = 1;
};

class MeasurementRecord {
 public:
  MeasurementRecord() = default;
  MeasurementRecord(std::vector<Jump> jumps, double horizon) : jumps_(std::move(jumps)), horizon_(horizon) {
    validate();
  }

  const std::vector<Jump>& jumps() const { return jumps_; }
  double horizon() const { return horizon_; }
  int n_tot() const {
    int n = 0;
    for (const auto& j : jumps_) n += j.count;
    return n;
  }

  void validate() const {
    if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) throw ValidationError("record: horizon must be > 0");
    double prev = 0.0;
    for (const auto& j : jumps_) {
      if (!(j.position > prev))
        throw ValidationError("record: jump positions must be strictly increasing and > 0 (got " +
                              std::to_string(j.position) + " after " + std::to_string(prev) + ")");
      if (j.position > horizon_)
        throw ValidationError("record: jump at " + std::to_string(j.position) + " beyond horizon " +
                              std::to_string(horizon_));
      if (j.count < 1) throw ValidationError("record: jump counts must be >= 1");
      prev = j.position;
    }
  }

 private:
  std::vector<Jump> jumps_;
  double horizon_ = 1.0;
};

struct ContinuumSegment {
  double L0 = 0.0;
  double L1 = 0.0;
  cplx integral_I = 0.0;  // integral of conj(beta(l)) e^{-l/2} over [L0, L1]
};

// ---------------------------------------------------------------------------
// Local oscillator controllers
//
// A controller owns the feedforward state. beta(l) and weighted_integral refer
// to the current segment; on_jump switches segment after a detection.

template <class T>
concept LocalOscillator = std::copy_constructible<T> && requires(T lo, const T clo, double l, int k) {
  { clo.beta(l) } -> std::convertible_to<cplx>;
  { clo.weighted_integral(l, l) } -> std::convertible_to<cplx>;
  { lo.on_jump(l, k) };
  { clo.decide(k) } -> std::convertible_to<int>;
};

/// beta = 0 everywhere. Decision: no click means hypothesis 0.
struct ZeroLo {
  cplx beta(double) const { return 0.0; }
  cplx weighted_integral(double, double) const { return 0.0; }
  void on_jump(double, int) {}
  int decide(int n_tot) const { return n_tot == 0 ? 0 : 1; }
};

/// Constant beta_i on [edges_i, edges_{i+1}), with exact segment integrals.
class PiecewiseConstantLo {
 public:
  PiecewiseConstantLo(std::vector<double> edges, std::vector<cplx> values)
      : edges_(std::move(edges)), values_(std::move(values)) {
    if (edges_.size() != values_.size() + 1 || values_.empty())
      throw ValidationError("PiecewiseConstantLo: need one more edge than value");
    for (size_t i = 1; i < edges_.size(); ++i)
      if (!(edges_[i] > edges_[i - 1])) throw ValidationError("PiecewiseConstantLo: edges must increase");
  }

  cplx beta(double l) const { return values_[index(l)]; }

  cplx weighted_integral(double l0, double l1) const {
    cplx acc = 0.0;
    size_t i = index(l0);
    double a = l0;
    while (a < l1 && i < values_.size()) {
      const double b = std::min(l1, edges_[i + 1]);
      acc += std::conj(values_[i]) * 2.0 * (std::exp(-0.5 * a) - std::exp(-0.5 * b));
      a = b;
      ++i;
    }
    return acc;
  }

  void on_jump(double, int) {}
  int decide(int n_tot) const { return n_tot % 2; }

 private:
  size_t index(double l) const {
    auto it = std::upper_bound(edges_.begin(), edges_.end(), l);
    size_t i = it == edges_.begin() ? 0 : size_t(it - edges_.begin()) - 1;
    return std::min(i, values_.size() - 1);
  }
  std::vector<double> edges_;
  std::vector<cplx> values_;
};

/// A profile b(l) with, optionally, a closed form for the integral of conj(b) e^{-l/2}.
template <class P>
concept BetaProfile = requires(const P p, double l) {
  { p.value(l) } -> std::convertible_to<cplx>;
};

template <class P>
concept ClosedFormProfile = BetaProfile<P> && requires(const P p, double l) {
  { p.integral(l, l) } -> std::convertible_to<cplx>;
};

/// Wraps any callable as a profile; integrals go through quadrature.
template <class F>
struct FunctionProfile {
  F f;
  cplx value(double l) const { return f(l); }
};

template <class F>
FunctionProfile(F) -> FunctionProfile<F>;

/// beta(l) = sign * b(l), with the sign flipped by every odd-count detection.
///
/// decide(n): parity of n, offset by `even_hypothesis` (the hypothesis kept
/// when no photon or an even number of photons has been counted).
template <BetaProfile P>
class SignSwitchingLo {
 public:
  SignSwitchingLo(P profile, int initial_sign = +1, int even_hypothesis = 0)
      : profile_(std::move(profile)), initial_sign_(initial_sign >= 0 ? 1 : -1), sign_(initial_sign_),
        even_hypothesis_(even_hypothesis) {}

  cplx beta(double l) const { return double(sign_) * profile_.value(l); }
  cplx beta_with_sign(int sign, double l) const { return double(sign) * profile_.value(l); }

  cplx weighted_integral(double l0, double l1) const {
    if constexpr (ClosedFormProfile<P>) {
      return double(sign_) * profile_.integral(l0, l1);
    } else {
      auto g = [&](double l) { return std::conj(beta(l)) * std::exp(-0.5 * l); };
      return integrate_singular_start(g, l0, l1);
    }
  }

  void on_jump(double, int k) {
    if (k % 2 != 0) {
      sign_ = -sign_;
      ++flips_;
    }
  }
  int decide(int n_tot) const { return (n_tot % 2) ^ even_hypothesis_; }

  int sign() const { return sign_; }
  int initial_sign() const { return initial_sign_; }
  int flips() const { return flips_; }
  const P& profile() const { return profile_; }

 private:
  P profile_;
  int initial_sign_;
  int sign_;
  int even_hypothesis_;
  int flips_ = 0;
};

// ---------------------------------------------------------------------------
// Continuum operators

/// S for the segment: exp(-(L1-L0)/2 a^dag a) first, then exp(a e^{L1/2} I).
inline FockState s_operator_apply(const FockState& state, const ContinuumSegment& seg) {
  if (!(seg.L1 >= seg.L0) || seg.L0 < 0.0) throw ValidationError("s_operator_apply: need 0 <= L0 <= L1");
  if (!std::isfinite(seg.integral_I.real()) || !std::isfinite(seg.integral_I.imag()))
    throw NumericalError("s_operator_apply: non-finite segment integral");
  const FockState damped = damping_apply(state, seg.L1 - seg.L0);
  return exp_annihilation_apply(damped, std::exp(0.5 * seg.L1) * seg.integral_I);
}

/// J = beta(L) - a.
inline FockState j_operator_apply(const FockState& state, cplx beta_L) {
  return beta_L * state - annihilation_apply(state);
}

template <LocalOscillator Lo>
ContinuumSegment make_segment(const Lo& lo, double L0, double L1) {
  return {L0, L1, L0 == L1 ? cplx(0.0) : cplx(lo.weighted_integral(L0, L1))};
}

struct ConditionalState {
  FockState state;
  double weight = 0.0;  // squared norm
};

/// Applies S J S ... J S up to `until`. A jump of count k is k coincident J's.
/// The LO is advanced in place; the returned weight omits the global factor
/// exp(-1/2 int |beta|^2) and the theta^{N_tot} measure.
template <LocalOscillator Lo>
ConditionalState evolve_to(FockState state, const MeasurementRecord& record, Lo& lo, double until) {
  if (until < 0.0 || until > record.horizon() + 1e-12)
    throw ValidationError("evolve_to: checkpoint outside [0, horizon]");
  double at = 0.0;
  for (const auto& jump : record.jumps()) {
    if (jump.position > until) break;
    state = s_operator_apply(state, make_segment(lo, at, jump.position));
    const cplx b = lo.beta(jump.position);
    for (int r = 0; r < jump.count; ++r) state = j_operator_apply(state, b);
    lo.on_jump(jump.position, jump.count);
    at = jump.position;
  }
  if (until > at) state = s_operator_apply(state, make_segment(lo, at, until));
  const double w = state.squared_norm();
  return {std::move(state), w};
}

template <LocalOscillator Lo>
ConditionalState apply_record(const FockState& state, const MeasurementRecord& record, Lo lo) {
  return evolve_to(state, record, lo, record.horizon());
}

}  // namespace dolinar
