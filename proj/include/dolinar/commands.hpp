#pragma once

// Command implementations behind the CLI. Each writes its report to `out` and
// returns the process exit code: 0 ok, 1 invalid input, 2 failed numerical check.

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dolinar/coherent.hpp"
#include "dolinar/errors.hpp"
#include "dolinar/kraus.hpp"
#include "dolinar/nogo.hpp"
#include "dolinar/qubit.hpp"
#include "dolinar/run_config.hpp"
#include "dolinar/trajectory.hpp"

namespace dolinar {

enum ExitCode : int { exit_ok = 0, exit_validation = 1, exit_numerical = 2 };

inline std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct CheckResult {
  std::string name;
  double tolerance = 0.0;
  double residual = 0.0;
  std::string diagnostic;
  bool pass() const { return residual <= tolerance; }  // NaN fails
};

namespace detail {

inline int resolved_cutoff(const RunConfig& c) { return c.cutoff >= 0 ? c.cutoff : analysis_cutoff(std::abs(c.alpha)); }

inline void emit(const RunConfig& cfg, std::ostream& out, const std::string& text) {
  if (cfg.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + cfg.out);
  f << text;
}

inline nlohmann::json state_json(const FockState& s) {
  nlohmann::json a = nlohmann::json::array();
  for (int m = 0; m <= s.cutoff(); ++m) a.push_back({s[m].real(), s[m].imag()});
  return a;
}

/// Records with up to five jumps at uniform positions in (0, horizon).
inline std::vector<MeasurementRecord> sample_records(int n, double horizon, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::uniform_int_distribution<int> count(0, 5);
  std::uniform_real_distribution<double> pos(0.0, horizon);
  std::vector<MeasurementRecord> out;
  while (int(out.size()) < n) {
    std::vector<double> p(size_t(count(eng)));
    for (auto& v : p) v = pos(eng);
    std::sort(p.begin(), p.end());
    bool ok = true;
    for (size_t i = 0; i < p.size(); ++i) ok = ok && p[i] > 1e-6 && (i == 0 || p[i] > p[i - 1] + 1e-9);
    if (!ok) continue;
    std::vector<Jump> jumps;
    for (double v : p) jumps.push_back({v, 1});
    out.emplace_back(std::move(jumps), horizon);
  }
  return out;
}

inline CoherentPolicy make_policy(const RunConfig& c) {
  CoherentPolicy p;
  p.initial_sign = c.initial_sign;
  if (c.policy == "nulling") p.kind = PolicyKind::constant_displacement;
  if (c.policy == "zero") p.kind = PolicyKind::zero;
  return p;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string s = "theta,N,L,alpha_sq,empirical_error,stderr,helstrom_pe\n";
  for (const auto& r : rows)
    s += fmt12(r.theta) + "," + std::to_string(r.N) + "," + fmt12(r.L) + "," + fmt12(r.alpha_sq) + "," +
         fmt12(r.empirical_error) + "," + fmt12(r.stderr_) + "," + fmt12(r.helstrom_pe) + "\n";
  return s;
}

inline nlohmann::json sweep_json(const std::vector<SweepRow>& rows) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& r : rows)
    a.push_back({{"theta", r.theta},
                 {"N", r.N},
                 {"L", r.L},
                 {"alpha_sq", r.alpha_sq},
                 {"empirical_error", r.empirical_error},
                 {"stderr", r.stderr_},
                 {"helstrom_pe", r.helstrom_pe}});
  return a;
}

}  // namespace detail

/// Analytic checks for the configured alpha and cutoff.
inline std::vector<CheckResult> verify_checks(const RunConfig& cfg) {
  const cplx alpha = cfg.alpha;
  const int cutoff = detail::resolved_cutoff(cfg);
  const CoherentSignalPair pair = helstrom_basis(alpha, cutoff);
  std::vector<CheckResult> checks;
  const double tail = poisson_tail(std::norm(alpha), cutoff);
  const std::string trunc_note =
      "Poisson tail of |alpha|^2 above cutoff " + std::to_string(cutoff) + " is " + fmt12(tail);

  {
    const double r = std::max({std::abs(inner_product(pair.omega0, pair.omega1)),
                               std::abs(pair.omega0.squared_norm() - 1.0), std::abs(pair.omega1.squared_norm() - 1.0)});
    checks.push_back({"helstrom_basis_orthonormal", 1e-10, r, r > 1e-10 ? trunc_note : ""});
  }
  {
    const double brute = brute_force_helstrom(make_coherent(alpha, cutoff), make_coherent(-alpha, cutoff));
    const double r = std::max(std::abs(helstrom_pe(alpha) - brute),
                              std::abs(pe_at_L(alpha, INFINITY) - helstrom_pe(alpha)));
    checks.push_back({"error_formula_consistency", 1e-10, r, ""});
  }
  {
    const double theta = cfg.thetas.empty() ? 0.01 : cfg.thetas.front();
    const cplx beta = beta_pm(0.5 * theta * theta, alpha, +1);
    double r = completeness_residual(theta, beta, cutoff);
    const int kmax = default_ancilla_cutoff(cutoff, std::abs(beta * std::sin(theta)));
    for (int h : {+1, -1}) {
      const FockState psi = make_coherent(double(h) * alpha, cutoff);
      double total = 0.0;
      for (int k = 0; k <= kmax; ++k) total += exact_step_kraus(k, theta, beta, cutoff, kmax).matrix.apply(psi).squared_norm();
      r = std::max(r, std::abs(1.0 - total));
    }
    checks.push_back({"step_completeness", 1e-9, r, r > 1e-9 ? "truncation: " + trunc_note : ""});
  }
  {
    double r = 0.0;
    for (const auto& rec : detail::sample_records(20, cfg.horizon, cfg.seed.value_or(1))) {
      std::vector<double> points{0.5, 1.0, 2.0, 5.0, rec.horizon()};
      for (const auto& j : rec.jumps()) points.push_back(j.position);
      for (double l : points) {
        if (l > rec.horizon()) continue;
        r = std::max(r, evolve_and_classify_at(pair, rec, l, cfg.initial_sign).orthogonality_residual);
      }
    }
    checks.push_back({"record_orthogonality", 1e-8, r, ""});
  }
  {
    double r = 0.0;
    const std::vector<std::pair<double, double>> spans{{0.0, 0.5}, {0.3, 1.0}, {1.0, 2.5}, {2.0, 5.0}};
    for (const auto& [l1, l2] : spans)
      for (int sigma : {+1, -1})
        for (int h : {+1, -1}) {
          const JumpRelation jr = jump_relation(alpha, h, sigma, l1, l2);
          const FockState in = make_coherent(double(h) * alpha * std::exp(-0.5 * l1), cutoff);
          const cplx I = double(sigma) * DolinarProfile{alpha}.integral(l1, l2);
          const FockState lhs = j_operator_apply(s_operator_apply(in, {l1, l2, I}), beta_pm(l2, alpha, sigma));
          const FockState rhs = (jr.common * jr.scalar) * make_coherent(jr.amplitude, cutoff);
          r = std::max(r, (lhs - rhs).norm() / rhs.norm());
        }
    checks.push_back({"jump_relations", 1e-8, r, r > 1e-8 ? trunc_note : ""});
  }
  {
    double r = 0.0;
    const DolinarProfile prof{alpha};
    for (const auto& [l1, l2] : std::vector<std::pair<double, double>>{{0.0, 0.7}, {0.5, 2.0}, {1.5, 5.0}}) {
      const cplx i_plus = prof.integral(l1, l2);
      const cplx quad = integrate_singular_start(
          [&](double l) { return std::conj(prof.value(l)) * std::exp(-0.5 * l); }, l1, l2);
      r = std::max(r, std::abs(i_plus - quad) / std::abs(i_plus));
      const double rp = integral_ratio_plus(alpha, l1, l2), rm = integral_ratio_minus(alpha, l1, l2);
      r = std::max(r, std::abs(std::exp(alpha * i_plus) - rp) / rp);
      r = std::max(r, std::abs(std::exp(-alpha * i_plus) - rm) / rm);
    }
    checks.push_back({"integral_relations", 1e-8, r, ""});
  }
  {
    double r = 0.0;
    for (double L : {0.1, 1.0, 3.0, 5.0})
      r = std::max(r, std::abs(pe_product_sqrt(alpha, L) - 0.5 * std::exp(-0.5 * u_of_L(alpha, L))));
    checks.push_back({"pe_product_identity", 1e-12, r, ""});
  }
  return checks;
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  const auto checks = verify_checks(cfg);
  bool all = true;
  std::ostringstream s;
  if (cfg.format == "json") {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& c : checks) {
      all = all && c.pass();
      a.push_back({{"check", c.name},
                   {"tolerance", c.tolerance},
                   {"residual", c.residual},
                   {"pass", c.pass()},
                   {"diagnostic", c.diagnostic}});
    }
    s << nlohmann::json{{"checks", a}, {"pass", all}}.dump(2) << "\n";
  } else {
    for (const auto& c : checks) {
      all = all && c.pass();
      s << (c.pass() ? "PASS " : "FAIL ") << c.name << " tolerance=" << fmt12(c.tolerance)
        << " residual=" << fmt12(c.residual);
      if (!c.diagnostic.empty()) s << " (" << c.diagnostic << ")";
      s << "\n";
    }
  }
  detail::emit(cfg, out, s.str());
  return all ? exit_ok : exit_numerical;
}

inline int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const double theta = cfg.thetas.empty() ? 0.01 : cfg.thetas.front();
  const auto rows = convergence_sweep(cfg.alpha, {theta}, cfg.horizon, cfg.trajectories, *cfg.seed,
                                      detail::make_policy(cfg), detail::resolved_cutoff(cfg));
  if (cfg.format == "json")
    detail::emit(cfg, out,
                 nlohmann::json{{"policy", cfg.policy}, {"rows", detail::sweep_json(rows)}}.dump(2) + "\n");
  else
    detail::emit(cfg, out, detail::sweep_csv(rows));
  return exit_ok;
}

inline int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  const std::vector<double> thetas = cfg.thetas.empty() ? std::vector<double>{0.05, 0.02, 0.01} : cfg.thetas;
  const auto rows = convergence_sweep(cfg.alpha, thetas, cfg.horizon, cfg.trajectories, *cfg.seed,
                                      detail::make_policy(cfg), detail::resolved_cutoff(cfg));
  if (cfg.format == "json") {
    nlohmann::json curve = nlohmann::json::array();
    for (int i = 0; i <= 40; ++i) {
      const double L = cfg.horizon * i / 40.0;
      curve.push_back({{"L", L}, {"pe_at_L", pe_at_L(cfg.alpha, L)}});
    }
    detail::emit(cfg, out,
                 nlohmann::json{{"rows", detail::sweep_json(rows)}, {"pe_curve", curve}}.dump(2) + "\n");
  } else {
    detail::emit(cfg, out, detail::sweep_csv(rows));
  }
  return exit_ok;
}

namespace detail {
inline nlohmann::json classified_json(const ClassifiedPair& c, const MeasurementRecord& rec) {
  nlohmann::json jumps = nlohmann::json::array();
  for (const auto& j : rec.jumps()) jumps.push_back({{"position", j.position}, {"count", j.count}});
  return {{"horizon", rec.horizon()},
          {"jumps", jumps},
          {"n_tot", c.n_tot},
          {"surviving_hypothesis", c.surviving_hypothesis},
          {"weight0", c.weight0},
          {"weight1", c.weight1},
          {"normalized_overlap", c.orthogonality_residual},
          {"wrong_weight_fraction", c.wrong_weight_fraction()},
          {"state0", state_json(c.state0)},
          {"state1", state_json(c.state1)}};
}
}  // namespace detail

inline int cmd_record(const RunConfig& cfg, std::ostream& out) {
  const MeasurementRecord rec(cfg.jumps, cfg.horizon);
  const CoherentSignalPair pair = helstrom_basis(cfg.alpha, detail::resolved_cutoff(cfg));
  const ClassifiedPair c = evolve_and_classify(pair, rec, cfg.initial_sign);
  nlohmann::json j = detail::classified_json(c, rec);
  j["alpha"] = {cfg.alpha.real(), cfg.alpha.imag()};
  j["initial_sign"] = cfg.initial_sign;
  detail::emit(cfg, out, j.dump(2) + "\n");
  return exit_ok;
}

inline int cmd_nogo(const RunConfig& cfg, std::ostream& out) {
  const cplx alpha = cfg.alpha;
  if (alpha == 0.0) throw DegenerateSignalError("nogo: alpha = 0, the two signals coincide");
  const auto grid = complex_grid(2.0, 21);
  std::ostringstream s;
  nlohmann::json rows = nlohmann::json::array();
  if (cfg.format != "json") s << "nu1,coherent_min_residual,coherent_bound,qubit_min_residual,qubit_bound\n";
  for (double nu : log_grid(1e-3, 1.0, 13)) {
    const GridMinimum mc = minimize_first_order_coherent(nu, alpha, grid, grid);
    const GridMinimum mq = minimize_first_order_qubit(nu, grid, grid);
    const double bc = nu * nu * std::norm(alpha), bq = nu * nu;
    if (cfg.format == "json")
      rows.push_back({{"nu1", nu},
                      {"coherent_min_residual", mc.residual},
                      {"coherent_bound", bc},
                      {"qubit_min_residual", mq.residual},
                      {"qubit_bound", bq}});
    else
      s << fmt12(nu) << "," << fmt12(mc.residual) << "," << fmt12(bc) << "," << fmt12(mq.residual) << ","
        << fmt12(bq) << "\n";
  }
  if (cfg.format == "json") s << nlohmann::json{{"rows", rows}}.dump(2) << "\n";
  detail::emit(cfg, out, s.str());
  return exit_ok;
}

inline int cmd_qubit(const RunConfig& cfg, std::ostream& out) {
  const QubitBasisPair pair = qubit_basis(cfg.f0, cfg.f1(), cfg.phi);
  const MeasurementRecord rec(cfg.jumps, cfg.horizon);
  const ClassifiedPair c = evolve_and_classify_qubit(pair, rec, cfg.initial_sign);
  nlohmann::json j = detail::classified_json(c, rec);
  j["f0"] = pair.f0;
  j["f1"] = pair.f1;
  j["phi"] = pair.phi;
  if (cfg.seed) {
    const double theta = cfg.thetas.empty() ? 0.02 : cfg.thetas.front();
    const ApparatusConfig ac = ApparatusConfig::from_horizon(theta, cfg.horizon, 1, *cfg.seed);
    const ErrorEstimate e = qubit_empirical_error(pair, ac, cfg.trajectories, cfg.initial_sign);
    j["simulation"] = {{"theta", theta}, {"N", ac.N}, {"trajectories", e.n}, {"empirical_error", e.estimate},
                       {"stderr", e.stderr_}};
  }
  detail::emit(cfg, out, j.dump(2) + "\n");
  return exit_ok;
}

/// Validates the config, dispatches on its mode and maps exceptions to exit codes.
inline int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    cfg.validate();
    if (cfg.mode == "verify") return cmd_verify(cfg, out);
    if (cfg.mode == "simulate") return cmd_simulate(cfg, out);
    if (cfg.mode == "sweep") return cmd_sweep(cfg, out);
    if (cfg.mode == "record") return cmd_record(cfg, out);
    if (cfg.mode == "nogo") return cmd_nogo(cfg, out);
    if (cfg.mode == "qubit") return cmd_qubit(cfg, out);
    throw ValidationError("unknown mode " + cfg.mode);
  } catch (const DegenerateSignalError& e) {
    err << "error: degenerate signal: " << e.what() << "\n";
    return exit_validation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return exit_validation;
  } catch (const NumericalError& e) {
    err << "numerical check failed: " << e.what() << "\n";
    return exit_numerical;
  }
}

}  // namespace dolinar
