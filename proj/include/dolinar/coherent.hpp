#pragma once

// Binary coherent signals {|alpha>, |-alpha>} with equal priors: Helstrom
// basis, error formulas, and the sign-switching displacement schedule.

#include <algorithm>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "dolinar/errors.hpp"
#include "dolinar/fock.hpp"
#include "dolinar/kraus.hpp"

namespace dolinar {

inline double kappa(cplx alpha) { return std::exp(-2.0 * std::norm(alpha)); }

/// (1 - sqrt(1 - kappa^2))/2, evaluated without cancellation.
inline double pe_from_overlap(double kappa_value) {
  const double k2 = kappa_value * kappa_value;
  return 0.5 * k2 / (1.0 + std::sqrt(std::max(0.0, 1.0 - k2)));
}

inline double helstrom_pe(cplx alpha) { return pe_from_overlap(kappa(alpha)); }

/// 4|alpha|^2 (1 - e^{-L}).
inline double u_of_L(cplx alpha, double L) {
  if (std::isinf(L)) return 4.0 * std::norm(alpha);
  return -4.0 * std::norm(alpha) * std::expm1(-L);
}

/// Error probability reachable after interaction parameter L. pe_at_L(a, 0) = 1/2.
inline double pe_at_L(cplx alpha, double L) {
  if (L < 0.0) throw ValidationError("pe_at_L: L must be >= 0");
  const double u = u_of_L(alpha, L);
  return 0.5 * std::exp(-u) / (1.0 + std::sqrt(-std::expm1(-u)));
}

struct CoherentSignalPair {
  cplx alpha = 0.0;
  double kappa = 1.0;
  double pe = 0.5;
  FockState omega0;
  FockState omega1;
  double prior0 = 0.5;
  double prior1 = 0.5;

  int cutoff() const { return omega0.cutoff(); }
};

/// |w0> = (sqrt(1-Pe)|a> - sqrt(Pe)|-a>)/sqrt(1-k^2), |w1> = (sqrt(Pe)|a> - sqrt(1-Pe)|-a>)/sqrt(1-k^2).
inline CoherentSignalPair helstrom_basis(cplx alpha, int cutoff = -1) {
  if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag()))
    throw ValidationError("helstrom_basis: non-finite alpha");
  if (alpha == 0.0) throw DegenerateSignalError("helstrom_basis: alpha = 0, the two signals coincide");
  if (cutoff < 0) cutoff = analysis_cutoff(std::abs(alpha));
  CoherentSignalPair p;
  p.alpha = alpha;
  p.kappa = kappa(alpha);
  p.pe = helstrom_pe(alpha);
  const double norm = std::sqrt(-std::expm1(-4.0 * std::norm(alpha)));  // sqrt(1 - kappa^2)
  const double ca = std::sqrt(1.0 - p.pe), cb = std::sqrt(p.pe);
  const FockState plus = make_coherent(alpha, cutoff), minus = make_coherent(-alpha, cutoff);
  p.omega0 = cplx(1.0 / norm) * (cplx(ca) * plus - cplx(cb) * minus);
  p.omega1 = cplx(1.0 / norm) * (cplx(cb) * plus - cplx(ca) * minus);
  return p;
}

/// Minimum error for discriminating two pure states with the given priors:
/// (1 - trace norm of p0|s0><s0| - p1|s1><s1|)/2, evaluated in their 2-d span.
inline double brute_force_helstrom(const FockState& s0, const FockState& s1, double p0 = 0.5, double p1 = 0.5) {
  FockState::check_same_cutoff(s0, s1, "brute_force_helstrom");
  const Eigen::VectorXcd v0 = s0.normalized().amps(), v1 = s1.normalized().amps();
  Eigen::VectorXcd e2 = v1 - v0.dot(v1) * v0;
  const double n2 = e2.norm();
  Eigen::Vector2cd c0(1.0, 0.0), c1(v0.dot(v1), 0.0);
  if (n2 > 1e-14) {
    e2 /= n2;
    c1[1] = e2.dot(v1);
  }
  const Eigen::Matrix2cd gamma = p0 * c0 * c0.adjoint() - p1 * c1 * c1.adjoint();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(gamma, Eigen::EigenvaluesOnly);
  return 0.5 * (1.0 - es.eigenvalues().cwiseAbs().sum());
}

/// sign * alpha e^{-l/2} / sqrt(1 - exp(-4|alpha|^2 (1 - e^{-l}))), l > 0.
/// Behaves like (alpha/|alpha|)/(2 sqrt(l)) as l -> 0.
inline cplx beta_pm(double l, cplx alpha, int sign) {
  if (!(l > 0.0)) throw ValidationError("beta_pm: l must be > 0");
  const double u = u_of_L(alpha, l);
  return double(sign >= 0 ? 1 : -1) * alpha * std::exp(-0.5 * l) / std::sqrt(-std::expm1(-u));
}

/// The plus-branch profile with its closed-form integral
/// int conj(b) e^{-l/2} dl = conj(alpha)/(2|alpha|^2) [arccosh(e^{u/2})].
struct DolinarProfile {
  cplx alpha;

  cplx value(double l) const { return beta_pm(l, alpha, +1); }

  static double arccosh_exp_half(double u) { return std::log1p(std::expm1(0.5 * u) + std::sqrt(std::expm1(u))); }

  cplx integral(double l0, double l1) const {
    const double a = arccosh_exp_half(u_of_L(alpha, l1)) - arccosh_exp_half(u_of_L(alpha, l0));
    return std::conj(alpha) / (2.0 * std::norm(alpha)) * a;
  }
};

using CoherentSchedule = SignSwitchingLo<DolinarProfile>;

/// With a plus start, no or even counts keep w0; a minus start swaps the roles.
inline CoherentSchedule make_coherent_schedule(cplx alpha, int initial_sign = +1) {
  if (alpha == 0.0) throw DegenerateSignalError("coherent schedule: alpha = 0");
  return CoherentSchedule(DolinarProfile{alpha}, initial_sign, initial_sign >= 0 ? 0 : 1);
}

struct ScheduleSegment {
  double L0 = 0.0;
  double L1 = 0.0;
  int sign = 1;
};

/// Segment signs implied by a record: the sign flips after every odd count.
inline std::vector<ScheduleSegment> schedule_from_record(int initial_sign, const MeasurementRecord& record) {
  std::vector<ScheduleSegment> segs;
  int sign = initial_sign >= 0 ? 1 : -1;
  double at = 0.0;
  for (const auto& j : record.jumps()) {
    segs.push_back({at, j.position, sign});
    if (j.count % 2 != 0) sign = -sign;
    at = j.position;
  }
  if (record.horizon() > at || segs.empty()) segs.push_back({at, record.horizon(), sign});
  return segs;
}

struct ClassifiedPair {
  FockState state0;
  FockState state1;
  double weight0 = 0.0;
  double weight1 = 0.0;
  double orthogonality_residual = 0.0;  // |<s0|s1>| / (|s0||s1|)
  int surviving_hypothesis = 0;
  int n_tot = 0;

  /// Share of the total weight carried by the hypothesis not selected.
  double wrong_weight_fraction() const {
    const double wrong = surviving_hypothesis == 0 ? weight1 : weight0;
    return wrong / (weight0 + weight1);
  }
};

inline double normalized_overlap(const FockState& a, const FockState& b) {
  const double n = a.norm() * b.norm();
  return n > 0.0 ? std::abs(inner_product(a, b)) / n : 0.0;
}

template <LocalOscillator Lo>
ClassifiedPair classify_pair(const FockState& w0, const FockState& w1, const MeasurementRecord& record, const Lo& lo,
                             double until) {
  Lo lo0 = lo, lo1 = lo;
  ConditionalState c0 = evolve_to(w0, record, lo0, until);
  ConditionalState c1 = evolve_to(w1, record, lo1, until);
  ClassifiedPair out;
  out.weight0 = c0.weight;
  out.weight1 = c1.weight;
  out.orthogonality_residual = normalized_overlap(c0.state, c1.state);
  int n = 0;
  for (const auto& j : record.jumps())
    if (j.position <= until) n += j.count;
  out.n_tot = n;
  out.surviving_hypothesis = lo0.decide(n);
  out.state0 = std::move(c0.state);
  out.state1 = std::move(c1.state);
  return out;
}

/// sum_i exp(log_coeff_i) |amp_i> over normalized coherent states.
///
/// S and J map each coherent branch to a scalar multiple of a coherent state,
/// so the two branches of w0, w1 evolve by scalars alone. After a few nulling
/// jumps one branch is many orders of magnitude below the other, and a Fock
/// vector loses it to rounding; the scalar form does not.
struct CoherentBranches {
  struct Branch {
    cplx log_coeff;
    cplx amp;
  };
  std::vector<Branch> branches;

  static cplx log_overlap(cplx a, cplx b) { return -0.5 * std::norm(a) - 0.5 * std::norm(b) + std::conj(a) * b; }

  double max_log_magnitude() const {
    double m = -INFINITY;
    for (const auto& b : branches) m = std::max(m, b.log_coeff.real());
    return m;
  }

  /// <x|y> = exp(scale) * returned value, with scale = max log|coeff| of x plus that of y.
  static cplx scaled_inner(const CoherentBranches& x, const CoherentBranches& y) {
    const double mx = x.max_log_magnitude(), my = y.max_log_magnitude();
    cplx acc = 0.0;
    for (const auto& i : x.branches)
      for (const auto& j : y.branches)
        acc += std::exp(std::conj(i.log_coeff) - mx + j.log_coeff - my + log_overlap(i.amp, j.amp));
    return acc;
  }

  double squared_norm() const {
    return std::exp(2.0 * max_log_magnitude()) * std::max(0.0, scaled_inner(*this, *this).real());
  }

  FockState to_fock(int cutoff) const {
    FockState s(Eigen::VectorXcd(Eigen::VectorXcd::Zero(cutoff + 1)));
    for (const auto& b : branches) s = s + std::exp(b.log_coeff) * make_coherent(b.amp, cutoff);
    return s;
  }

  /// The segment operator on [l0, l1]: damping, then exp(a e^{l1/2} I).
  void apply_segment(const ContinuumSegment& seg) {
    const double d = seg.L1 - seg.L0;
    const cplx c = std::exp(0.5 * seg.L1) * seg.integral_I;
    for (auto& b : branches) {
      b.log_coeff += 0.5 * std::norm(b.amp) * std::expm1(-d);
      b.amp *= std::exp(-0.5 * d);
      b.log_coeff += c * b.amp;
    }
  }

  void apply_jump(cplx beta_L) {
    for (auto& b : branches) {
      const cplx f = beta_L - b.amp;
      b.log_coeff = f == 0.0 ? cplx(-INFINITY) : b.log_coeff + std::log(f);
    }
  }
};

inline double normalized_overlap(const CoherentBranches& a, const CoherentBranches& b) {
  const double n = std::sqrt(std::max(0.0, CoherentBranches::scaled_inner(a, a).real()) *
                             std::max(0.0, CoherentBranches::scaled_inner(b, b).real()));
  return n > 0.0 ? std::abs(CoherentBranches::scaled_inner(a, b)) / n : 0.0;
}

/// w0 (which = 0) or w1 of the pair as branches on |alpha>, |-alpha>.
inline CoherentBranches helstrom_branches(const CoherentSignalPair& pair, int which) {
  const double norm = std::sqrt(-std::expm1(-4.0 * std::norm(pair.alpha)));
  const double ca = std::sqrt(1.0 - pair.pe) / norm, cb = std::sqrt(pair.pe) / norm;
  const double plus = which == 0 ? ca : cb, minus = which == 0 ? cb : ca;
  return {{{std::log(cplx(plus)), pair.alpha}, {std::log(cplx(-minus)), -pair.alpha}}};
}

template <LocalOscillator Lo>
CoherentBranches evolve_branches(CoherentBranches s, const MeasurementRecord& record, Lo& lo, double until) {
  double at = 0.0;
  for (const auto& jump : record.jumps()) {
    if (jump.position > until) break;
    s.apply_segment(make_segment(lo, at, jump.position));
    const cplx b = lo.beta(jump.position);
    for (int r = 0; r < jump.count; ++r) s.apply_jump(b);
    lo.on_jump(jump.position, jump.count);
    at = jump.position;
  }
  if (until > at) s.apply_segment(make_segment(lo, at, until));
  return s;
}

/// Conditional Helstrom states along a record, up to `checkpoint`.
inline ClassifiedPair classify_coherent_pair(const CoherentSignalPair& pair, const MeasurementRecord& record,
                                             double checkpoint, int initial_sign) {
  if (checkpoint < 0.0 || checkpoint > record.horizon() + 1e-12)
    throw ValidationError("evolve_and_classify: checkpoint outside [0, horizon]");
  const CoherentSchedule lo = make_coherent_schedule(pair.alpha, initial_sign);
  CoherentSchedule lo0 = lo, lo1 = lo;
  const CoherentBranches b0 = evolve_branches(helstrom_branches(pair, 0), record, lo0, checkpoint);
  const CoherentBranches b1 = evolve_branches(helstrom_branches(pair, 1), record, lo1, checkpoint);
  ClassifiedPair out;
  out.weight0 = b0.squared_norm();
  out.weight1 = b1.squared_norm();
  out.orthogonality_residual = normalized_overlap(b0, b1);
  int n = 0;
  for (const auto& j : record.jumps())
    if (j.position <= checkpoint) n += j.count;
  out.n_tot = n;
  out.surviving_hypothesis = lo0.decide(n);
  out.state0 = b0.to_fock(pair.cutoff());
  out.state1 = b1.to_fock(pair.cutoff());
  return out;
}

inline ClassifiedPair evolve_and_classify(const CoherentSignalPair& pair, const MeasurementRecord& record,
                                          int initial_sign = +1) {
  return classify_coherent_pair(pair, record, record.horizon(), initial_sign);
}

inline ClassifiedPair evolve_and_classify_at(const CoherentSignalPair& pair, const MeasurementRecord& record,
                                             double checkpoint, int initial_sign = +1) {
  return classify_coherent_pair(pair, record, checkpoint, initial_sign);
}

// ---------------------------------------------------------------------------
// Closed-form relations between consecutive detections

/// exp[alpha int_{L1}^{L2} conj(beta_+) e^{-l/2} dl] predicted from the error curve:
/// e^{|alpha|^2 (e^{-L1} - e^{-L2})} sqrt(1 - P^{L2}) / sqrt(1 - P^{L1}).
inline double integral_ratio_plus(cplx alpha, double L1, double L2) {
  const double a2 = std::norm(alpha);
  return std::exp(a2 * (std::exp(-L1) - std::exp(-L2))) * std::sqrt(1.0 - pe_at_L(alpha, L2)) /
         std::sqrt(1.0 - pe_at_L(alpha, L1));
}

/// Same for beta_-: e^{|alpha|^2 (e^{-L1} - e^{-L2})} sqrt(P^{L2}) / sqrt(P^{L1}).
inline double integral_ratio_minus(cplx alpha, double L1, double L2) {
  const double a2 = std::norm(alpha);
  return std::exp(a2 * (std::exp(-L1) - std::exp(-L2))) * std::sqrt(pe_at_L(alpha, L2) / pe_at_L(alpha, L1));
}

/// Prediction for J_{L2} S_{L2-L1} |h alpha e^{-L1/2}> under the sign-`sigma` schedule:
/// (1/2) e^{-u2/2} Q |h alpha e^{-L2/2}>, times a coefficient shared by both h.
/// Q = sqrt(P^{L2})/sqrt(1-P^{L1}) when h*sigma = +1, else sqrt(1-P^{L2})/sqrt(P^{L1}).
struct JumpRelation {
  cplx common = 0.0;   // hypothesis-independent prefactor
  double scalar = 0.0;  // (1/2) e^{-u2/2} Q
  cplx amplitude = 0.0;
};

inline JumpRelation jump_relation(cplx alpha, int h, int sigma, double L1, double L2) {
  if (!(0.0 <= L1 && L1 < L2)) throw ValidationError("jump_relation: need 0 <= L1 < L2");
  const double u1 = u_of_L(alpha, L1), u2 = u_of_L(alpha, L2);
  const double p1 = pe_at_L(alpha, L1), p2 = pe_at_L(alpha, L2);
  const double q = (h * sigma > 0) ? std::sqrt(p2 / (1.0 - p1)) : std::sqrt((1.0 - p2) / p1);
  JumpRelation r;
  r.scalar = 0.5 * std::exp(-0.5 * u2) * q;
  r.common = double(sigma) * 2.0 * std::exp((u2 - u1) / 8.0) * alpha * std::exp(-0.5 * L2) /
             std::sqrt(-std::expm1(-u2));
  r.amplitude = double(h) * alpha * std::exp(-0.5 * L2);
  return r;
}

/// sqrt(P^L (1 - P^L)), which equals e^{-u/2}/2 with u = 4|alpha|^2 (1 - e^{-L}).
inline double pe_product_sqrt(cplx alpha, double L) {
  const double p = pe_at_L(alpha, L);
  return std::sqrt(p * (1.0 - p));
}

}  // namespace dolinar
