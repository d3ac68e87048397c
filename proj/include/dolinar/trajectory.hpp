#pragma once

// Monte Carlo over the discretized receiver: N weak beamsplitter taps, each
// followed by a displacement and a photon counter, with feedforward on the
// local oscillator.
//
// Click times are drawn with the waiting-time construction: an Exp(1)
// threshold per inter-click interval compared against the accumulated hazard
// -ln p0 of the steps. The resulting records have exactly the law of
// independent per-step draws.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "dolinar/coherent.hpp"
#include "dolinar/errors.hpp"
#include "dolinar/fock.hpp"
#include "dolinar/kraus.hpp"
#include "dolinar/qubit.hpp"

namespace dolinar {

struct ApparatusConfig {
  double theta = 0.01;
  long N = 80000;
  double L = 8.0;
  int cutoff = 15;
  std::optional<double> beta_cap;
  std::uint64_t seed = 0;

  /// N = round(L / theta^2); the stored L is then N theta^2.
  static ApparatusConfig from_horizon(double theta, double L, int cutoff, std::uint64_t seed,
                                      std::optional<double> beta_cap = std::nullopt) {
    if (!(theta > 0.0 && theta < M_PI / 2)) throw ValidationError("ApparatusConfig: theta must be in (0, pi/2)");
    if (!(L > 0.0) || !std::isfinite(L)) throw ValidationError("ApparatusConfig: L must be > 0");
    const long N = std::max(1L, std::lround(L / (theta * theta)));
    return from_steps(theta, N, cutoff, seed, beta_cap);
  }

  static ApparatusConfig from_steps(double theta, long N, int cutoff, std::uint64_t seed,
                                    std::optional<double> beta_cap = std::nullopt) {
    if (!(theta > 0.0 && theta < M_PI / 2)) throw ValidationError("ApparatusConfig: theta must be in (0, pi/2)");
    if (N < 1) throw ValidationError("ApparatusConfig: N must be >= 1");
    if (cutoff < 0) throw ValidationError("ApparatusConfig: cutoff must be >= 0");
    if (beta_cap && !(*beta_cap > 0.0)) throw ValidationError("ApparatusConfig: beta_cap must be > 0");
    ApparatusConfig c;
    c.theta = theta;
    c.N = N;
    c.L = double(N) * theta * theta;
    c.cutoff = cutoff;
    c.beta_cap = beta_cap;
    c.seed = seed;
    return c;
  }

  double slice() const { return theta * theta; }
  double midpoint(long n) const { return (double(n) - 0.5) * theta * theta; }  // n = 1..N

  /// Empty when theta is in the weak-tap regime.
  std::string validity_warning() const {
    if (theta * theta > 0.01) return "theta^2 = " + std::to_string(theta * theta) + " > 0.01: taps are not weak";
    return {};
  }
};

// ---------------------------------------------------------------------------
// Random numbers

/// One engine per trajectory, seeded from (seed, trajectory index).
class TrajectoryRng {
 public:
  TrajectoryRng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(index),
                      std::uint32_t(index >> 32), 0x5eedu};
    eng_.seed(seq);
  }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }
  double exponential() { return -std::log1p(-uniform()); }

 private:
  std::mt19937_64 eng_;
};

inline cplx capped(cplx beta, const std::optional<double>& cap) {
  if (cap && std::abs(beta) > *cap) return beta * (*cap / std::abs(beta));
  return beta;
}

// ---------------------------------------------------------------------------
// Backends. Each holds a normalized signal state and supports
//   prepare(theta, beta) -> p0,  click(u, p0) -> (k, p_k),  commit_no_click(), commit(k).

/// Any state in the truncated Fock space. Exact Kraus action, all counts kept.
class FockBackend {
 public:
  explicit FockBackend(FockState psi, int max_count = 400) : psi_(psi.normalized()), max_count_(max_count) {}

  const FockState& state() const { return psi_; }

  double prepare(double theta, cplx beta) {
    x_ = beta * std::sin(theta);
    t_ = std::tan(theta);
    const FockState damped = number_power_apply(psi_, std::cos(theta));
    base_ = std::exp(-0.5 * std::norm(x_)) * exp_annihilation_apply(damped, std::conj(x_) * t_);
    p0_ = base_.squared_norm();
    if (p0_ > 1.0 + 1e-9) throw NumericalError("step: no-count probability " + std::to_string(p0_) + " exceeds 1");
    return p0_;
  }

  std::pair<int, double> click(double u) {
    const double target = u * (1.0 - p0_);
    FockState phi = base_;
    double cum = 0.0;
    int last = 1;
    double last_p = 0.0;
    for (int k = 1; k <= max_count_; ++k) {
      phi = next(phi, k);
      const double pk = phi.squared_norm();
      cum += pk;
      if (pk > 0.0) {
        last = k;
        last_p = pk;
        chosen_ = phi;
      }
      if (cum >= target && pk > 0.0) return {k, pk};
      if (p0_ + cum > 1.0 - 1e-15 && k > 1) break;
    }
    if (std::abs(p0_ + cum - 1.0) > 1e-9)
      throw NumericalError("step: count probabilities sum to " + std::to_string(p0_ + cum) +
                           "; increase the ancilla range");
    return {last, last_p};
  }

  void commit_no_click() { psi_ = base_.normalized(); }
  void commit_click() { psi_ = chosen_.normalized(); }

  /// Probabilities of k = 0..max_count for the prepared step.
  std::vector<double> distribution() const {
    std::vector<double> p{p0_};
    FockState phi = base_;
    double cum = p0_;
    for (int k = 1; k <= max_count_ && cum < 1.0 - 1e-16; ++k) {
      phi = next(phi, k);
      p.push_back(phi.squared_norm());
      cum += p.back();
      if (p.back() == 0.0 && phi.squared_norm() == 0.0) break;
    }
    return p;
  }

  FockState branch(int k) const {
    FockState phi = base_;
    for (int j = 1; j <= k; ++j) phi = next(phi, j);
    return phi;
  }

 private:
  // (x - t a) phi / sqrt(k)
  FockState next(const FockState& phi, int k) const {
    return cplx(1.0 / std::sqrt(double(k))) * (x_ * phi - cplx(t_) * annihilation_apply(phi));
  }

  FockState psi_;
  int max_count_;
  cplx x_ = 0.0;
  double t_ = 0.0;
  FockState base_, chosen_;
  double p0_ = 1.0;
};

/// Superposition sum_i c_i |gamma_i> of normalized coherent states. Coherent
/// states stay coherent under every step, so nothing is truncated.
class CoherentSuperpositionBackend {
 public:
  struct Component {
    cplx coeff;
    cplx amp;
  };

  explicit CoherentSuperpositionBackend(std::vector<Component> comps, int max_count = 400)
      : comps_(std::move(comps)), max_count_(max_count) {
    if (comps_.empty()) throw ValidationError("CoherentSuperpositionBackend: no components");
    normalize(comps_);
  }

  static CoherentSuperpositionBackend coherent(cplx alpha) { return CoherentSuperpositionBackend({{1.0, alpha}}); }

  /// The Helstrom vectors in terms of |alpha>, |-alpha>.
  static CoherentSuperpositionBackend omega(cplx alpha, int which) {
    const double pe = helstrom_pe(alpha);
    const double a = std::sqrt(1.0 - pe), b = std::sqrt(pe);
    if (which == 0) return CoherentSuperpositionBackend({{a, alpha}, {-b, -alpha}});
    return CoherentSuperpositionBackend({{b, alpha}, {-a, -alpha}});
  }

  const std::vector<Component>& components() const { return comps_; }

  double prepare(double theta, cplx beta) {
    s_ = std::sin(theta);
    c_ = std::cos(theta);
    x_ = beta * s_;
    p0_ = probability(0);
    if (p0_ > 1.0 + 1e-9) throw NumericalError("step: no-count probability exceeds 1");
    return p0_;
  }

  std::pair<int, double> click(double u) {
    const double target = u * (1.0 - p0_);
    double cum = 0.0;
    int last = 1;
    double last_p = 0.0;
    for (int k = 1; k <= max_count_; ++k) {
      const double pk = probability(k);
      cum += pk;
      if (pk > 0.0) {
        last = k;
        last_p = pk;
      }
      if (cum >= target && pk > 0.0) {
        chosen_k_ = k;
        return {k, pk};
      }
      if (p0_ + cum > 1.0 - 1e-15 && k > 1) break;
    }
    if (std::abs(p0_ + cum - 1.0) > 1e-9)
      throw NumericalError("step: count probabilities sum to " + std::to_string(p0_ + cum));
    chosen_k_ = last;
    return {last, last_p};
  }

  void commit_no_click() { advance(0); }
  void commit_click() { advance(chosen_k_); }

  double probability(int k) const {
    const auto next = branch(k);
    return squared_norm(next);
  }

 private:
  // log of the amplitude picked up by |gamma> for count k, before 1/sqrt(k!)
  cplx log_amp(cplx g, int k) const {
    const cplx d = x_ - g * s_;
    cplx v = -0.5 * std::norm(x_) - 0.5 * std::norm(g) * s_ * s_ + std::conj(x_) * s_ * g;
    if (k > 0) v += double(k) * std::log(d) - 0.5 * std::lgamma(k + 1.0);
    return v;
  }

  std::vector<Component> branch(int k) const {
    std::vector<Component> out;
    out.reserve(comps_.size());
    for (const auto& cmp : comps_) {
      const cplx d = x_ - cmp.amp * s_;
      cplx f = 0.0;
      if (k == 0 || d != 0.0) f = std::exp(log_amp(cmp.amp, k));
      out.push_back({cmp.coeff * f, cmp.amp * c_});
    }
    return out;
  }

  static cplx overlap(cplx a, cplx b) { return std::exp(-0.5 * std::norm(a) - 0.5 * std::norm(b) + std::conj(a) * b); }

  static double squared_norm(const std::vector<Component>& v) {
    cplx acc = 0.0;
    for (const auto& i : v)
      for (const auto& j : v) acc += std::conj(i.coeff) * j.coeff * overlap(i.amp, j.amp);
    return std::max(0.0, acc.real());
  }

  static void normalize(std::vector<Component>& v) {
    const double n = std::sqrt(squared_norm(v));
    if (!(n > 0.0)) throw NumericalError("CoherentSuperpositionBackend: zero-norm state");
    for (auto& c : v) c.coeff /= n;
  }

  void advance(int k) {
    comps_ = branch(k);
    normalize(comps_);
  }

  std::vector<Component> comps_;
  int max_count_;
  double s_ = 0.0, c_ = 1.0;
  cplx x_ = 0.0;
  double p0_ = 1.0;
  int chosen_k_ = 1;
};

struct StepOutcome {
  int k = 0;
  FockState post_state;
  double probability = 1.0;
};

/// One tap on a normalized state, k drawn from the exact distribution.
inline StepOutcome step(const FockState& state, double theta, cplx beta, TrajectoryRng& rng) {
  if (std::abs(state.squared_norm() - 1.0) > 1e-9) throw ValidationError("step: input state must be normalized");
  FockBackend b(state);
  b.prepare(theta, beta);
  const std::vector<double> p = b.distribution();
  double total = 0.0;
  for (double v : p) total += v;
  if (std::abs(total - 1.0) > 1e-9)
    throw NumericalError("step: probabilities sum to " + std::to_string(total) + " (truncation breach)");
  const double u = rng.uniform() * total;
  double cum = 0.0;
  int k = int(p.size()) - 1;
  for (int j = 0; j < int(p.size()); ++j) {
    cum += p[j];
    if (u < cum) {
      k = j;
      break;
    }
  }
  return {k, b.branch(k).normalized(), p[k]};
}

// ---------------------------------------------------------------------------
// Trajectories

struct TrajectoryResult {
  MeasurementRecord record;
  int decision = 0;
  int true_signal = 0;
  int n_tot = 0;
  double log_weight = 0.0;  // log-probability of the record
};

/// Draws k >= 1 from a Poisson(mu) law conditioned on k >= 1, by inversion.
inline int sample_zero_truncated_poisson(double mu, double u) {
  const double target = u * -std::expm1(-mu);
  double term = mu * std::exp(-mu);
  double cum = 0.0;
  int k = 1;
  for (;; ++k) {
    cum += term;
    if (cum >= target || k > 1000 || term < 1e-300) break;
    term *= mu / double(k + 1);
  }
  return k;
}

template <class Backend, LocalOscillator Lo>
TrajectoryResult run_trajectory(Backend backend, const ApparatusConfig& cfg, Lo lo, TrajectoryRng& rng,
                                int true_signal = 0) {
  std::vector<Jump> jumps;
  int n_tot = 0;
  double log_w = 0.0;
  double threshold = rng.exponential();
  double hazard = 0.0;
  for (long n = 1; n <= cfg.N; ++n) {
    const double l = cfg.midpoint(n);
    const double p0 = backend.prepare(cfg.theta, capped(lo.beta(l), cfg.beta_cap));
    hazard += p0 > 0.0 ? -std::log(p0) : INFINITY;
    if (hazard >= threshold) {
      const auto [k, pk] = backend.click(rng.uniform());
      backend.commit_click();
      jumps.push_back({l, k});
      lo.on_jump(l, k);
      n_tot += k;
      log_w += std::log(pk);
      threshold = rng.exponential();
      hazard = 0.0;
    } else {
      backend.commit_no_click();
      log_w += std::log(p0);
    }
  }
  TrajectoryResult r;
  r.record = MeasurementRecord(std::move(jumps), cfg.L);
  r.decision = lo.decide(n_tot);
  r.true_signal = true_signal;
  r.n_tot = n_tot;
  r.log_weight = log_w;
  return r;
}

// ---------------------------------------------------------------------------
// Oscillator policies

/// beta(l) = beta0 e^{-l/2}, which follows one hypothesis' decaying amplitude
/// and so nulls it at every tap. Decision: silence means the nulled hypothesis.
struct OnOffLo {
  cplx beta0 = 0.0;
  int null_hypothesis = 1;

  cplx beta(double l) const { return beta0 * std::exp(-0.5 * l); }
  cplx weighted_integral(double l0, double l1) const { return std::conj(beta0) * (std::exp(-l0) - std::exp(-l1)); }
  void on_jump(double, int) {}
  int decide(int n_tot) const { return n_tot == 0 ? null_hypothesis : 1 - null_hypothesis; }

  int modes() const { return 1; }
  int mode() const { return 0; }
  cplx beta_in_mode(int, double l) const { return beta(l); }
};

/// Two-valued feedforward view of a sign-switching oscillator.
template <BetaProfile P>
struct SignModes {
  SignSwitchingLo<P> lo;

  cplx beta(double l) const { return lo.beta(l); }
  cplx weighted_integral(double l0, double l1) const { return lo.weighted_integral(l0, l1); }
  void on_jump(double l, int k) { lo.on_jump(l, k); }
  int decide(int n) const { return lo.decide(n); }

  int modes() const { return 2; }
  int mode() const { return lo.sign() > 0 ? 0 : 1; }
  cplx beta_in_mode(int m, double l) const { return lo.beta_with_sign(m == 0 ? 1 : -1, l); }
};

template <class T>
concept ModalOscillator = LocalOscillator<T> && requires(const T lo, int m, double l) {
  { lo.modes() } -> std::convertible_to<int>;
  { lo.mode() } -> std::convertible_to<int>;
  { lo.beta_in_mode(m, l) } -> std::convertible_to<cplx>;
};

/// Dolinar sign switching as a two-mode oscillator.
inline SignModes<DolinarProfile> dolinar_lo(cplx alpha, int initial_sign = +1) {
  return {make_coherent_schedule(alpha, initial_sign)};
}

/// Zero-clamp beta for hypothesis `null_hypothesis` of {+alpha, -alpha}.
inline OnOffLo nulling_lo(cplx alpha, cplx beta0) {
  const int null_h = std::abs(beta0 - alpha) <= std::abs(beta0 + alpha) ? 0 : 1;
  return {beta0, null_h};
}

// ---------------------------------------------------------------------------
// Fast path for a single coherent input: the state stays |gamma0 cos^n theta>,
// so step hazards |beta_n - gamma_{n-1}|^2 sin^2 depend only on the oscillator
// mode. Prefix sums per mode turn each inter-click wait into one binary search.

class HazardTable {
 public:
  template <ModalOscillator Lo>
  HazardTable(const ApparatusConfig& cfg, const Lo& lo, cplx gamma0) : cfg_(cfg) {
    const double s2 = std::sin(cfg.theta) * std::sin(cfg.theta), c = std::cos(cfg.theta);
    modes_ = lo.modes();
    for (int m = 0; m < modes_; ++m) {
      auto& h = h_[m];
      auto& cum = cum_[m];
      h.assign(size_t(cfg.N) + 1, 0.0);
      cum.assign(size_t(cfg.N) + 1, 0.0);
      cplx g = gamma0;
      for (long n = 1; n <= cfg.N; ++n) {
        const cplx b = capped(lo.beta_in_mode(m, cfg.midpoint(n)), cfg.beta_cap);
        h[n] = std::norm(b - g) * s2;
        cum[n] = cum[n - 1] + h[n];
        g *= c;
      }
    }
  }

  const ApparatusConfig& config() const { return cfg_; }

  template <ModalOscillator Lo>
  TrajectoryResult run(Lo lo, TrajectoryRng& rng, int true_signal = 0) const {
    std::vector<Jump> jumps;
    int n_tot = 0;
    long pos = 0;
    double log_w = 0.0;
    for (;;) {
      const int m = lo.mode();
      const auto& cum = cum_[m];
      const double target = cum[pos] + rng.exponential();
      const auto it = std::lower_bound(cum.begin() + pos + 1, cum.end(), target);
      if (it == cum.end()) {
        log_w -= cum[cfg_.N] - cum[pos];
        break;
      }
      const long n = long(it - cum.begin());
      const double mu = h_[m][n];
      const int k = sample_zero_truncated_poisson(mu, rng.uniform());
      log_w -= cum[n - 1] - cum[pos];
      log_w += -mu + k * std::log(mu) - std::lgamma(k + 1.0);
      const double l = cfg_.midpoint(n);
      jumps.push_back({l, k});
      lo.on_jump(l, k);
      n_tot += k;
      pos = n;
    }
    TrajectoryResult r;
    r.record = MeasurementRecord(std::move(jumps), cfg_.L);
    r.decision = lo.decide(n_tot);
    r.true_signal = true_signal;
    r.n_tot = n_tot;
    r.log_weight = log_w;
    return r;
  }

  /// Log-probability of `record` for this table's input, replaying the oscillator along it.
  template <ModalOscillator Lo>
  double record_log_likelihood(Lo lo, const MeasurementRecord& record) const {
    const double t2 = cfg_.theta * cfg_.theta;
    double log_w = 0.0;
    long pos = 0;
    for (const auto& j : record.jumps()) {
      const int m = lo.mode();
      const long n = std::clamp(std::lround(j.position / t2 + 0.5), pos + 1, cfg_.N);
      const double mu = h_[m][n];
      log_w -= cum_[m][n - 1] - cum_[m][pos];
      log_w += -mu + j.count * std::log(mu) - std::lgamma(j.count + 1.0);
      lo.on_jump(j.position, j.count);
      pos = n;
    }
    return log_w - (cum_[lo.mode()][cfg_.N] - cum_[lo.mode()][pos]);
  }

 private:
  ApparatusConfig cfg_;
  int modes_ = 1;
  std::vector<double> h_[2], cum_[2];
};

// ---------------------------------------------------------------------------
// Batches

/// Runs f(i) for i in [0, n) on worker threads and sums the integer results.
/// The sum does not depend on how indices are split across threads.
template <class F>
long parallel_count(long n, F&& f, unsigned threads = 0) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = unsigned(std::min<long>(threads, std::max(1L, n)));
  std::vector<long> partial(threads, 0);
  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](unsigned t) {
    try {
      for (long i = t; i < n; i += threads) partial[t] += f(i);
    } catch (...) {
      errors[t] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  long total = 0;
  for (long v : partial) total += v;
  return total;
}

enum class PolicyKind { coherent_dolinar, constant_displacement, zero };

struct CoherentPolicy {
  PolicyKind kind = PolicyKind::coherent_dolinar;
  int initial_sign = +1;
  std::optional<cplx> beta0;  // constant_displacement; default -alpha
};

struct ErrorEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  long errors = 0;
  long n = 0;
};

namespace detail {

template <ModalOscillator Lo>
ErrorEstimate coherent_error_with(cplx alpha, const ApparatusConfig& cfg, long n_traj, const Lo& lo) {
  const HazardTable plus(cfg, lo, alpha), minus(cfg, lo, -alpha);
  const long errors = parallel_count(n_traj, [&](long i) -> long {
    TrajectoryRng rng(cfg.seed, std::uint64_t(i));
    const int truth = int(i % 2);
    const TrajectoryResult r = (truth == 0 ? plus : minus).run(lo, rng, truth);
    return r.decision != truth ? 1 : 0;
  });
  ErrorEstimate e;
  e.n = n_traj;
  e.errors = errors;
  e.estimate = double(errors) / double(n_traj);
  e.stderr_ = std::sqrt(e.estimate * (1.0 - e.estimate) / double(n_traj));
  return e;
}

struct SilentLo {
  cplx beta(double) const { return 0.0; }
  cplx weighted_integral(double, double) const { return 0.0; }
  void on_jump(double, int) {}
  int decide(int) const { return 0; }
  int modes() const { return 1; }
  int mode() const { return 0; }
  cplx beta_in_mode(int, double) const { return 0.0; }
};

}  // namespace detail

/// Error rate over equiprobable inputs: even trajectory indices send +alpha,
/// odd ones -alpha. Deterministic in cfg.seed.
inline ErrorEstimate empirical_error(cplx alpha, const ApparatusConfig& cfg, long n_traj,
                                     const CoherentPolicy& policy = {}) {
  if (n_traj <= 0) throw ValidationError("empirical_error: n_traj must be > 0");
  if (alpha == 0.0 || policy.kind == PolicyKind::zero)
    return detail::coherent_error_with(alpha, cfg, n_traj, detail::SilentLo{});
  if (policy.kind == PolicyKind::constant_displacement)
    return detail::coherent_error_with(alpha, cfg, n_traj, nulling_lo(alpha, policy.beta0.value_or(-alpha)));
  return detail::coherent_error_with(alpha, cfg, n_traj, dolinar_lo(alpha, policy.initial_sign));
}

inline ErrorEstimate empirical_error(cplx alpha, const ApparatusConfig& cfg, long n_traj, std::uint64_t seed,
                                     const CoherentPolicy& policy = {}) {
  ApparatusConfig c = cfg;
  c.seed = seed;
  return empirical_error(alpha, c, n_traj, policy);
}

/// Same trajectories as empirical_error, but each one scores the posterior
/// probability that its decision is wrong instead of a 0/1 outcome. The mean
/// is still unbiased for the error rate, with far smaller variance when
/// posteriors are nearly record-independent, as they are for Dolinar.
inline ErrorEstimate conditional_error(cplx alpha, const ApparatusConfig& cfg, long n_traj) {
  if (n_traj <= 0) throw ValidationError("conditional_error: n_traj must be > 0");
  if (alpha == 0.0) throw DegenerateSignalError("conditional_error: alpha = 0");
  const auto lo = dolinar_lo(alpha);
  const HazardTable tables[2] = {HazardTable(cfg, lo, alpha), HazardTable(cfg, lo, -alpha)};
  double sum = 0.0, sum_sq = 0.0;
  long errors = 0;
  for (long i = 0; i < n_traj; ++i) {
    TrajectoryRng rng(cfg.seed, std::uint64_t(i));
    const int truth = int(i % 2);
    const TrajectoryResult r = tables[truth].run(lo, rng, truth);
    const double ll_d = tables[r.decision].record_log_likelihood(lo, r.record);
    const double ll_o = tables[1 - r.decision].record_log_likelihood(lo, r.record);
    const double p = ll_o == -INFINITY ? 0.0 : 1.0 / (1.0 + std::exp(ll_d - ll_o));
    sum += p;
    sum_sq += p * p;
    errors += r.decision != truth;
  }
  ErrorEstimate e;
  e.n = n_traj;
  e.errors = errors;
  e.estimate = sum / double(n_traj);
  e.stderr_ = std::sqrt(std::max(0.0, sum_sq / double(n_traj) - e.estimate * e.estimate) / double(n_traj));
  return e;
}

struct SweepRow {
  double theta = 0.0;
  long N = 0;
  double L = 0.0;
  double alpha_sq = 0.0;
  double empirical_error = 0.0;
  double stderr_ = 0.0;
  double helstrom_pe = 0.0;
};

/// One row per theta, largest theta first, each row using the same seed.
inline std::vector<SweepRow> convergence_sweep(cplx alpha, std::vector<double> thetas, double L, long n_traj,
                                               std::uint64_t seed, const CoherentPolicy& policy = {},
                                               int cutoff = -1) {
  if (thetas.empty()) throw ValidationError("convergence_sweep: empty theta list");
  std::sort(thetas.begin(), thetas.end(), std::greater<>());
  if (cutoff < 0) cutoff = default_cutoff(std::abs(alpha));
  std::vector<SweepRow> rows;
  for (double th : thetas) {
    const ApparatusConfig cfg = ApparatusConfig::from_horizon(th, L, cutoff, seed);
    const ErrorEstimate e = empirical_error(alpha, cfg, n_traj, policy);
    rows.push_back({th, cfg.N, cfg.L, std::norm(alpha), e.estimate, e.stderr_, helstrom_pe(alpha)});
  }
  return rows;
}

/// Qubit discrimination: even indices send omega0, odd ones omega1.
inline ErrorEstimate qubit_empirical_error(const QubitBasisPair& pair, const ApparatusConfig& cfg, long n_traj,
                                           int initial_sign = +1) {
  if (n_traj <= 0) throw ValidationError("qubit_empirical_error: n_traj must be > 0");
  const GeneralQubitLo lo(pair, initial_sign);
  const long errors = parallel_count(n_traj, [&](long i) -> long {
    TrajectoryRng rng(cfg.seed, std::uint64_t(i));
    const int truth = int(i % 2);
    const TrajectoryResult r = run_trajectory(FockBackend(truth == 0 ? pair.omega0 : pair.omega1), cfg, lo, rng, truth);
    return r.decision != truth ? 1 : 0;
  });
  ErrorEstimate e;
  e.n = n_traj;
  e.errors = errors;
  e.estimate = double(errors) / double(n_traj);
  e.stderr_ = std::sqrt(e.estimate * (1.0 - e.estimate) / double(n_traj));
  return e;
}

}  // namespace dolinar
