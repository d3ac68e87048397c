// dolinar: command-line front end for the receiver simulator.
//
//   dolinar verify   --alpha 0.8
//   dolinar sweep    --alpha-sq 0.64 --theta 0.05 --theta 0.02 --horizon 8 --trajectories 100000 --seed 7
//   dolinar record   --alpha 0.8 --jump 1.0 --jump 2.5 --horizon 8
//   dolinar nogo     --alpha 0.8
//   dolinar qubit    --f0 0.6 --phi 0.3 --jump 1.0 --horizon 30

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dolinar/dolinar.hpp"

namespace {

std::complex<double> parse_alpha(const std::string& s) {
  std::stringstream in(s);
  double re = 0.0, im = 0.0;
  char sep = 0;
  in >> re;
  if (in.fail()) throw dolinar::ValidationError("malformed --alpha '" + s + "', expected RE or RE,IM");
  if (in >> sep) {
    if (sep != ',' || !(in >> im)) throw dolinar::ValidationError("malformed --alpha '" + s + "'");
    std::string rest;
    if (in >> rest) throw dolinar::ValidationError("malformed --alpha '" + s + "'");
  }
  return {re, im};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous photon-counting receiver simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string alpha_s, config_path, out, format, policy;
  double alpha_sq = 0.0, f0 = 0.0, phi = 0.0, horizon = 0.0;
  std::vector<double> thetas;
  long trajectories = 0;
  int cutoff = -1, initial_sign = 1;
  std::uint64_t seed = 0;
  std::vector<std::string> jumps;

  auto* o_alpha = app.add_option("--alpha", alpha_s, "signal amplitude, RE or RE,IM");
  auto* o_alpha_sq = app.add_option("--alpha-sq", alpha_sq, "signal mean photon number |alpha|^2 (real alpha)");
  o_alpha->excludes(o_alpha_sq);
  auto* o_f0 = app.add_option("--f0", f0, "qubit vacuum amplitude f0 in [0, 1]");
  auto* o_phi = app.add_option("--phi", phi, "qubit phase");
  auto* o_theta = app.add_option("--theta", thetas, "beamsplitter angle (repeatable)");
  auto* o_horizon = app.add_option("--horizon", horizon, "total interaction parameter L");
  auto* o_traj = app.add_option("--trajectories", trajectories, "Monte Carlo trajectories");
  auto* o_cutoff = app.add_option("--cutoff", cutoff, "Fock cutoff (default: tail rule)");
  auto* o_seed = app.add_option("--seed", seed, "random seed (required for simulate and sweep)");
  auto* o_out = app.add_option("--out", out, "output file (default stdout)");
  auto* o_format = app.add_option("--format", format, "csv or json");
  auto* o_jump = app.add_option("--jump", jumps, "detection at L or L:k (repeatable)");
  auto* o_policy = app.add_option("--policy", policy, "dolinar, nulling or zero");
  auto* o_sign = app.add_option("--initial-sign", initial_sign, "+1 or -1");
  app.add_option("--config", config_path, "JSON run configuration; flags override it");

  for (const auto& m : dolinar::RunConfig::modes()) app.add_subcommand(m, "run " + m);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : dolinar::exit_validation;
  }

  dolinar::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = dolinar::RunConfig::load(config_path);
    cfg.mode = app.get_subcommands().front()->get_name();
    if (o_alpha->count()) cfg.alpha = parse_alpha(alpha_s);
    if (o_alpha_sq->count()) {
      if (alpha_sq < 0.0) throw dolinar::ValidationError("--alpha-sq must be >= 0");
      cfg.alpha = std::sqrt(alpha_sq);
    }
    if (o_f0->count()) cfg.f0 = f0;
    if (o_phi->count()) cfg.phi = phi;
    if (o_theta->count()) cfg.thetas = thetas;
    if (o_horizon->count()) cfg.horizon = horizon;
    if (o_traj->count()) cfg.trajectories = trajectories;
    if (o_cutoff->count()) cfg.cutoff = cutoff;
    if (o_seed->count()) cfg.seed = seed;
    if (o_out->count()) cfg.out = out;
    if (o_format->count()) cfg.format = format;
    if (o_policy->count()) cfg.policy = policy;
    if (o_sign->count()) cfg.initial_sign = initial_sign;
    if (o_jump->count()) {
      cfg.jumps.clear();
      for (const auto& j : jumps) cfg.jumps.push_back(dolinar::parse_jump(j));
    }
  } catch (const dolinar::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return dolinar::exit_validation;
  }
  return dolinar::run_command(cfg, std::cout, std::cerr);
}
