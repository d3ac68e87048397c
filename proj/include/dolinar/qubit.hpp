#pragma once

// Photonic qubit bases f0|0> + f1 e^{i phi}|1>, f1|0> - f0 e^{i phi}|1>.

#include <cmath>
#include <complex>
#include <string>

#include "dolinar/coherent.hpp"
#include "dolinar/errors.hpp"
#include "dolinar/fock.hpp"
#include "dolinar/kraus.hpp"

namespace dolinar {

struct QubitBasisPair {
  double f0 = M_SQRT1_2;
  double f1 = M_SQRT1_2;
  double phi = 0.0;
  FockState omega0;
  FockState omega1;
};

inline QubitBasisPair qubit_basis(double f0, double f1, double phi = 0.0, int cutoff = 1) {
  if (!(f0 >= 0.0) || !(f1 >= 0.0) || !std::isfinite(phi))
    throw ValidationError("qubit_basis: need f0, f1 >= 0 and a finite phase");
  if (std::abs(f0 * f0 + f1 * f1 - 1.0) > 1e-12) throw ValidationError("qubit_basis: f0^2 + f1^2 must equal 1");
  if (cutoff < 1) throw ValidationError("qubit_basis: cutoff must be >= 1");
  QubitBasisPair p{f0, f1, phi, FockState(cutoff), FockState(cutoff)};
  const cplx e = std::polar(1.0, phi);
  Eigen::VectorXcd w0 = Eigen::VectorXcd::Zero(cutoff + 1), w1 = w0;
  w0[0] = f0;
  w0[1] = f1 * e;
  w1[0] = f1;
  w1[1] = -f0 * e;
  p.omega0 = FockState(w0);
  p.omega1 = FockState(w1);
  return p;
}

/// Interval-j oscillator in the printed form (-1)^j e^{-(l-L_j)/2} / (2 sqrt(1 - e^{-l})).
inline double qubit_beta(int j, double l, double Lj) {
  if (!(Lj >= 0.0) || !(l > Lj)) throw ValidationError("qubit_beta: need l > L_j >= 0");
  const double s = (j % 2 == 0) ? 1.0 : -1.0;
  return s * std::exp(-0.5 * (l - Lj)) / (2.0 * std::sqrt(-std::expm1(-l)));
}

/// e^{-l/2} / (2 sqrt(1 - e^{-l})); integral of b e^{-l/2} is sqrt(1 - e^{-l}).
struct SymmetricQubitProfile {
  cplx value(double l) const {
    if (!(l > 0.0)) throw ValidationError("SymmetricQubitProfile: l must be > 0");
    return std::exp(-0.5 * l) / (2.0 * std::sqrt(-std::expm1(-l)));
  }
  cplx integral(double l0, double l1) const { return std::sqrt(-std::expm1(-l1)) - std::sqrt(-std::expm1(-l0)); }
};

using SymmetricQubitLo = SignSwitchingLo<SymmetricQubitProfile>;

/// Oscillator for a general {f0, f1, phi} basis.
///
/// Between detections the two hypotheses are a_i|0> + e^{i phi} g_i e^{-l/2}|1>
/// with a_i, g_i real. Keeping a_0(l) a_1(l) + g_0 g_1 e^{-l} = 0 on the whole
/// interval fixes beta = e^{i phi} b with
///   b(l) = s g0 g1 e^{-l/2} / D(l),  D(l)^2 = (g1 a0 - g0 a1)^2 - 4 g0^2 g1^2 e^{-l},
/// s = sign(g1 a0 + g0 a1). When that sum vanishes (f0 = f1) the initial sign
/// picks the branch.
class GeneralQubitLo {
 public:
  GeneralQubitLo(double f0, double f1, double phi, int initial_sign = +1)
      : phase_(std::polar(1.0, phi)), initial_sign_(initial_sign >= 0 ? 1 : -1) {
    a_[0] = f0;
    g_[0] = f1;
    a_[1] = f1;
    g_[1] = -f0;
    start_segment(0.0);
    // No detections until infinity: whichever branch keeps a |0> amplitude wins.
    const double finf = gg_ == 0.0 ? 0.0 : sigma_ * (std::abs(k_) - std::abs(q_)) / (2.0 * gg_);
    even_hypothesis_ = std::abs(a_[0] + g_[0] * finf) >= std::abs(a_[1] + g_[1] * finf) ? 0 : 1;
  }
  explicit GeneralQubitLo(const QubitBasisPair& p, int initial_sign = +1)
      : GeneralQubitLo(p.f0, p.f1, p.phi, initial_sign) {}

  cplx beta(double l) const { return phase_ * b(l); }

  cplx weighted_integral(double l0, double l1) const { return std::conj(phase_) * (F(l1) - F(l0)); }

  /// Only the parity of k is used: an odd count acts as one detection, an even
  /// count leaves the segment unchanged, mirroring the sign rule of the
  /// symmetric schedule. Coincident counts only occur in the discretized
  /// apparatus.
  void on_jump(double L, int k) {
    const double bl = b(L), fl = F(L), damp = std::exp(-0.5 * L);
    for (int i = 0; i < 2; ++i) {
      double a = a_[i] + g_[i] * fl, g = g_[i];
      for (int r = 0; r < k % 2; ++r) {
        const double na = bl * a - g * damp;
        g = bl * g;
        a = na;
      }
      const double n = std::hypot(a, g * damp);
      if (n > 0.0) {
        a /= n;
        g /= n;
      }
      a_[i] = a;
      g_[i] = g;
    }
    start_segment(L);
  }

  int decide(int n_tot) const { return (n_tot % 2) ^ even_hypothesis_; }
  int even_hypothesis() const { return even_hypothesis_; }

 private:
  void start_segment(double L) {
    Lj_ = L;
    gg_ = g_[0] * g_[1];
    k_ = g_[1] * a_[0] - g_[0] * a_[1];
    q_ = g_[1] * a_[0] + g_[0] * a_[1];
    if (q_ > 0.0)
      sigma_ = 1;
    else if (q_ < 0.0)
      sigma_ = -1;
    else
      sigma_ = initial_sign_ * (gg_ >= 0.0 ? 1 : -1);
  }

  // D(l) written as q^2 + 4 g0^2 g1^2 e^{-L_j}(1 - e^{-(l - L_j)}) to stay accurate near L_j.
  double D(double l) const {
    const double d2 = q_ * q_ + 4.0 * gg_ * gg_ * std::exp(-Lj_) * -std::expm1(-(l - Lj_));
    return std::sqrt(std::max(0.0, d2));
  }
  double b(double l) const {
    if (gg_ == 0.0) return 0.0;
    const double d = D(l);
    if (!(d > 0.0)) throw ValidationError("GeneralQubitLo: oscillator singular at l = " + std::to_string(l));
    return sigma_ * gg_ * std::exp(-0.5 * l) / d;
  }
  // Integral of b e^{-l/2} from L_j.
  double F(double l) const { return gg_ == 0.0 ? 0.0 : sigma_ * (D(l) - std::abs(q_)) / (2.0 * gg_); }

  cplx phase_;
  int initial_sign_;
  double a_[2]{}, g_[2]{};
  double Lj_ = 0.0, gg_ = 0.0, k_ = 0.0, q_ = 0.0;
  int sigma_ = 1;
  int even_hypothesis_ = 0;
};

inline void reject_multi_photon(const MeasurementRecord& record) {
  for (const auto& j : record.jumps())
    if (j.count >= 2)
      throw ValidationError("qubit record: count " + std::to_string(j.count) + " at l=" + std::to_string(j.position) +
                            " is inconsistent with single-photon signals");
}

inline ClassifiedPair evolve_and_classify_qubit(const QubitBasisPair& pair, const MeasurementRecord& record,
                                                int initial_sign = +1) {
  reject_multi_photon(record);
  return classify_pair(pair.omega0, pair.omega1, record, GeneralQubitLo(pair, initial_sign), record.horizon());
}

inline ClassifiedPair evolve_and_classify_qubit_at(const QubitBasisPair& pair, const MeasurementRecord& record,
                                                   double checkpoint, int initial_sign = +1) {
  reject_multi_photon(record);
  return classify_pair(pair.omega0, pair.omega1, record, GeneralQubitLo(pair, initial_sign), checkpoint);
}

/// The (|0> +- |1>)/sqrt(2) case with the fixed profile and plain sign switching.
inline ClassifiedPair evolve_and_classify_qubit_symmetric(const MeasurementRecord& record) {
  reject_multi_photon(record);
  const QubitBasisPair pair = qubit_basis(M_SQRT1_2, M_SQRT1_2);
  return classify_pair(pair.omega0, pair.omega1, record, SymmetricQubitLo(SymmetricQubitProfile{}, +1, 0),
                       record.horizon());
}

}  // namespace dolinar
