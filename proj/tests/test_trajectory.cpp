#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "dolinar/dolinar.hpp"

using namespace dolinar;

TEST(Apparatus, DerivedHorizon) {
  const auto c = ApparatusConfig::from_horizon(0.01, 8.0, 15, 1);
  EXPECT_EQ(c.N, 80000);
  EXPECT_NEAR(c.L, 8.0, 1e-12);
  EXPECT_NEAR(c.midpoint(1), 0.5e-4, 1e-18);
  EXPECT_TRUE(c.validity_warning().empty());
  EXPECT_FALSE(ApparatusConfig::from_horizon(0.2, 8.0, 15, 1).validity_warning().empty());
  EXPECT_THROW(ApparatusConfig::from_horizon(0.0, 8.0, 15, 1), ValidationError);
  EXPECT_THROW(ApparatusConfig::from_horizon(0.1, -1.0, 15, 1), ValidationError);
  EXPECT_THROW(ApparatusConfig::from_steps(0.1, 0, 15, 1), ValidationError);
  EXPECT_THROW(ApparatusConfig::from_steps(0.1, 10, 15, 1, 0.0), ValidationError);
}

TEST(Rng, ReproducibleAndIndexed) {
  TrajectoryRng a(7, 3), b(7, 3), c(7, 4), d(8, 3);
  for (int i = 0; i < 5; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_NE(x, c.uniform());
    EXPECT_NE(x, d.uniform());
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
}

TEST(Step, VacuumWithoutDisplacementNeverClicks) {
  TrajectoryRng rng(1, 0);
  for (int i = 0; i < 1000; ++i) {
    const StepOutcome o = step(FockState::vacuum(5), 0.05, 0.0, rng);
    ASSERT_EQ(o.k, 0);
    EXPECT_DOUBLE_EQ(o.probability, 1.0);
  }
}

TEST(Step, DisplacedVacuumMeanCount) {
  const double th = 0.05;
  const cplx b = 2.0;
  const double mu = std::norm(b * std::sin(th));  // 0.00999
  TrajectoryRng rng(2, 0);
  const int n = 100000;
  long total = 0;
  for (int i = 0; i < n; ++i) total += step(FockState::vacuum(15), th, b, rng).k;
  const double mean = double(total) / n;
  EXPECT_NEAR(mu, 0.00999, 1e-5);
  EXPECT_NEAR(mean, mu, 3.0 * std::sqrt(mu / n));
}

TEST(Step, ProbabilitiesSumToOne) {
  FockBackend fb(make_coherent(1.0, 20));
  fb.prepare(0.05, 3.0);
  double total = 0.0;
  for (double p : fb.distribution()) total += p;
  EXPECT_NEAR(total, 1.0, 1e-9);
  EXPECT_THROW(
      {
        TrajectoryRng rng(0, 0);
        step(cplx(2.0) * FockState::vacuum(3), 0.05, 0.0, rng);
      },
      ValidationError);
}

TEST(Step, OutcomeStateIsBranchState) {
  TrajectoryRng rng(5, 0);
  const FockState psi = make_coherent(0.7, 20);
  for (int i = 0; i < 50; ++i) {
    const StepOutcome o = step(psi, 0.3, 1.0, rng);
    const FockState ref = exact_step_kraus(o.k, 0.3, 1.0, 20).matrix.apply(psi);
    EXPECT_NEAR(o.probability, ref.squared_norm(), 1e-12);
    EXPECT_LT((o.post_state - ref.normalized()).norm(), 1e-10);
  }
}

TEST(Backends, SuperpositionMatchesFock) {
  const double a = 0.8;
  const int cut = analysis_cutoff(a);
  const auto pair = helstrom_basis(a, cut);
  for (int which : {0, 1}) {
    FockBackend fb(which == 0 ? pair.omega0 : pair.omega1);
    auto cb = CoherentSuperpositionBackend::omega(a, which);
    for (auto [th, b] : {std::pair{0.05, cplx(3.0)}, std::pair{0.02, cplx(-1.0, 0.5)}, std::pair{0.1, cplx(0.0)}}) {
      EXPECT_NEAR(fb.prepare(th, b), cb.prepare(th, b), 1e-10);
      const auto pf = fb.distribution();
      for (int k = 1; k < 4; ++k) EXPECT_NEAR(pf[k], cb.probability(k), 1e-10);
      fb.commit_no_click();
      cb.commit_no_click();
    }
  }
}

TEST(Trajectory, ZeroPolicyOnVacuum) {
  const auto cfg = ApparatusConfig::from_horizon(0.05, 4.0, 5, 3);
  for (int i = 0; i < 20; ++i) {
    TrajectoryRng rng(3, i);
    const auto r = run_trajectory(FockBackend(FockState::vacuum(5)), cfg, ZeroLo{}, rng);
    EXPECT_EQ(r.n_tot, 0);
    EXPECT_EQ(r.decision, 0);
    EXPECT_TRUE(r.record.jumps().empty());
  }
}

TEST(Trajectory, DeterministicRecords) {
  const auto cfg = ApparatusConfig::from_horizon(0.05, 8.0, 15, 11);
  for (int i = 0; i < 10; ++i) {
    TrajectoryRng r1(11, i), r2(11, i);
    const auto a = run_trajectory(CoherentSuperpositionBackend::coherent(0.8), cfg, dolinar_lo(0.8), r1);
    const auto b = run_trajectory(CoherentSuperpositionBackend::coherent(0.8), cfg, dolinar_lo(0.8), r2);
    ASSERT_EQ(a.record.jumps().size(), b.record.jumps().size());
    for (size_t j = 0; j < a.record.jumps().size(); ++j) {
      EXPECT_EQ(a.record.jumps()[j].position, b.record.jumps()[j].position);
      EXPECT_EQ(a.record.jumps()[j].count, b.record.jumps()[j].count);
    }
    EXPECT_EQ(a.decision, b.decision);
    EXPECT_EQ(a.log_weight, b.log_weight);
  }
}

TEST(Trajectory, FastPathMatchesStepwise) {
  const double a = 0.8;
  const auto cfg = ApparatusConfig::from_horizon(0.05, 8.0, 15, 21);
  const auto lo = dolinar_lo(a);
  for (int h : {+1, -1}) {
    const HazardTable table(cfg, lo, h * a);
    for (int i = 0; i < 200; ++i) {
      TrajectoryRng r1(21, i), r2(21, i);
      const auto slow = run_trajectory(CoherentSuperpositionBackend::coherent(h * a), cfg, lo, r1);
      const auto fast = table.run(lo, r2);
      ASSERT_EQ(slow.record.jumps().size(), fast.record.jumps().size()) << i;
      for (size_t j = 0; j < slow.record.jumps().size(); ++j) {
        EXPECT_EQ(slow.record.jumps()[j].position, fast.record.jumps()[j].position);
        EXPECT_EQ(slow.record.jumps()[j].count, fast.record.jumps()[j].count);
      }
      EXPECT_EQ(slow.decision, fast.decision);
      EXPECT_NEAR(slow.log_weight, fast.log_weight, 1e-8 * (1.0 + std::abs(slow.log_weight)));
    }
  }
}

TEST(Trajectory, Omega0InputOddFractionShrinks) {
  const double a = 0.8;
  std::vector<double> odd;
  for (double th : {0.4, 0.2, 0.05}) {
    const auto cfg = ApparatusConfig::from_horizon(th, 8.0, 15, 31);
    long n_odd = 0;
    const int n = 2000;
    for (int i = 0; i < n; ++i) {
      TrajectoryRng rng(31, i);
      n_odd += run_trajectory(CoherentSuperpositionBackend::omega(a, 0), cfg, dolinar_lo(a), rng).n_tot % 2;
    }
    odd.push_back(double(n_odd) / n);
  }
  EXPECT_GT(odd[0], odd[1]);
  EXPECT_GE(odd[1], odd[2]);
  EXPECT_GT(odd[0], odd[2]);
  EXPECT_LT(odd[2], 0.005);
}

TEST(EmpiricalError, Validation) {
  const auto cfg = ApparatusConfig::from_horizon(0.05, 8.0, 15, 1);
  EXPECT_THROW(empirical_error(0.8, cfg, 0), ValidationError);
  EXPECT_THROW(qubit_empirical_error(qubit_basis(0.6, 0.8), cfg, 0), ValidationError);
}

TEST(EmpiricalError, IndistinguishableSignals) {
  const auto cfg = ApparatusConfig::from_horizon(0.05, 8.0, 15, 1);
  const auto e = empirical_error(0.0, cfg, 10000);
  EXPECT_NEAR(e.estimate, 0.5, 3.0 * e.stderr_);
}

TEST(EmpiricalError, DeterministicAndThreadIndependent) {
  const auto cfg = ApparatusConfig::from_horizon(0.05, 8.0, 15, 77);
  const auto a = empirical_error(0.8, cfg, 4000), b = empirical_error(0.8, cfg, 4000);
  EXPECT_EQ(a.errors, b.errors);
  const auto c = empirical_error(0.8, cfg, 4000, std::uint64_t(78));
  EXPECT_EQ(c.n, 4000);
  auto f = [](long i) -> long { return (i * 7) % 3; };
  EXPECT_EQ(parallel_count(1000, f, 1), parallel_count(1000, f, 4));
}

TEST(EmpiricalError, HelstromBelowNullingBelowHalf) {
  const double L = 8.0;
  for (double a : {0.3, 0.6, 0.9, 1.2}) {
    const auto cfg = ApparatusConfig::from_horizon(0.05, L, 15, 5);
    const auto e = empirical_error(a, cfg, 200000, CoherentPolicy{PolicyKind::constant_displacement, +1, {}});
    // +alpha is displaced to 2 alpha e^{-l/2}, -alpha to vacuum
    const double kennedy = 0.5 * std::exp(-4.0 * a * a * (1.0 - std::exp(-L)));
    EXPECT_NEAR(e.estimate, kennedy, 4.0 * e.stderr_) << a;
    EXPECT_GT(e.estimate - 3.0 * e.stderr_, helstrom_pe(a)) << a;
    EXPECT_LT(e.estimate + 3.0 * e.stderr_, 0.5) << a;
  }
}

TEST(EmpiricalError, ZeroPolicyIsUninformative) {
  const auto cfg = ApparatusConfig::from_horizon(0.05, 8.0, 15, 5);
  const auto e = empirical_error(0.8, cfg, 1000, CoherentPolicy{PolicyKind::zero, +1, {}});
  EXPECT_DOUBLE_EQ(e.estimate, 0.5);
}

TEST(EmpiricalError, HorizonLossMeanPhotons) {
  const double a = 1.0, L = 2.0;
  const auto cfg = ApparatusConfig::from_horizon(0.05, L, 20, 9);
  const int n = 5000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    TrajectoryRng rng(9, i);
    const int k = run_trajectory(CoherentSuperpositionBackend::coherent(a), cfg, ZeroLo{}, rng).n_tot;
    sum += k;
    sum2 += double(k) * k;
  }
  const double mean = sum / n, se = std::sqrt((sum2 / n - mean * mean) / n);
  EXPECT_NEAR(mean, a * a * (1.0 - std::exp(-L)), 3.0 * se);
}

TEST(EmpiricalError, StandardErrorScaling) {
  const auto cfg = ApparatusConfig::from_horizon(0.05, 8.0, 15, 13);
  const auto e1 = empirical_error(0.6, cfg, 20000), e2 = empirical_error(0.6, cfg, 40000),
             e4 = empirical_error(0.6, cfg, 80000);
  EXPECT_NEAR(e1.stderr_ / e2.stderr_, std::sqrt(2.0), 0.3 * std::sqrt(2.0));
  EXPECT_NEAR(e1.stderr_ / e4.stderr_, 2.0, 0.3 * 2.0);
  EXPECT_NEAR(e1.stderr_, std::sqrt(e1.estimate * (1.0 - e1.estimate) / 20000), 1e-15);
}

TEST(ConditionalError, ReplayedLikelihoodMatchesRun) {
  const double a = 0.8;
  const auto cfg = ApparatusConfig::from_horizon(0.05, 8.0, 15, 8);
  const auto lo = dolinar_lo(a);
  const HazardTable plus(cfg, lo, a), minus(cfg, lo, -a);
  for (int i = 0; i < 100; ++i) {
    TrajectoryRng rng(8, i);
    const auto r = plus.run(lo, rng);
    EXPECT_NEAR(plus.record_log_likelihood(lo, r.record), r.log_weight, 1e-9 * (1.0 + std::abs(r.log_weight)));
    EXPECT_LE(minus.record_log_likelihood(lo, r.record), 0.0);
  }
}

TEST(ConditionalError, AgreesWithErrorFrequency) {
  const double a = 0.8;
  const long n = 40000;
  const auto cfg = ApparatusConfig::from_horizon(0.1, 8.0, 15, 12);
  const auto c = conditional_error(a, cfg, n);
  const auto e = empirical_error(a, cfg, n);
  EXPECT_EQ(c.errors, e.errors);
  EXPECT_LT(std::abs(c.estimate - e.estimate), 4.0 * e.stderr_);
  EXPECT_LT(c.stderr_, 0.5 * e.stderr_);
  EXPECT_GT(c.estimate, helstrom_pe(a));
}

TEST(Sweep, RowsOrderedAndReproducible) {
  const auto rows = convergence_sweep(0.8, {0.05, 0.1, 0.07}, 8.0, 2000, 4);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_DOUBLE_EQ(rows[0].theta, 0.1);
  EXPECT_DOUBLE_EQ(rows[1].theta, 0.07);
  EXPECT_DOUBLE_EQ(rows[2].theta, 0.05);
  for (const auto& r : rows) {
    EXPECT_NEAR(r.L, r.N * r.theta * r.theta, 1e-12);
    EXPECT_NEAR(r.alpha_sq, 0.64, 1e-15);
    EXPECT_DOUBLE_EQ(r.helstrom_pe, helstrom_pe(0.8));
  }
  const auto again = convergence_sweep(0.8, {0.05, 0.1, 0.07}, 8.0, 2000, 4);
  for (size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i].empirical_error, again[i].empirical_error);
  EXPECT_EQ(convergence_sweep(0.8, {0.05}, 8.0, 100, 4).size(), 1u);
  EXPECT_THROW(convergence_sweep(0.8, {}, 8.0, 100, 4), ValidationError);
}

TEST(Sweep, ApproachesHelstrom) {
  // rows share the seed; allow 2 standard errors of noise
  const auto rows = convergence_sweep(0.8, {0.2, 0.1, 0.05}, 8.0, 100000, 8);
  for (size_t i = 1; i < rows.size(); ++i)
    EXPECT_LE(rows[i].empirical_error, rows[i - 1].empirical_error + 2.0 * rows[i].stderr_);
  EXPECT_NEAR(rows.back().empirical_error, rows.back().helstrom_pe, 0.01);
}

TEST(QubitSimulation, ParityDecodingWorks) {
  const auto cfg = ApparatusConfig::from_horizon(0.05, 8.0, 1, 17);
  for (const auto& pair : {qubit_basis(M_SQRT1_2, M_SQRT1_2), qubit_basis(0.6, 0.8, 0.3)}) {
    const auto e = qubit_empirical_error(pair, cfg, 1000);
    EXPECT_LT(e.estimate, 0.02) << pair.f0;
  }
}
