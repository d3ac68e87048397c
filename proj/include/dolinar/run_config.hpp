#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dolinar/errors.hpp"
#include "dolinar/kraus.hpp"

namespace dolinar {

struct RunConfig {
  std::string mode = "verify";  // verify | simulate | sweep | record | nogo | qubit
  std::complex<double> alpha = 0.8;
  double f0 = M_SQRT1_2;
  double phi = 0.0;
  std::vector<double> thetas;
  double horizon = 8.0;
  long trajectories = 10000;
  int cutoff = -1;  // -1: default rule
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
  std::vector<Jump> jumps;
  std::string policy = "dolinar";  // dolinar | nulling | zero
  int initial_sign = +1;

  double f1() const { return std::sqrt(std::max(0.0, 1.0 - f0 * f0)); }

  static const std::vector<std::string>& modes() {
    static const std::vector<std::string> m{"verify", "simulate", "sweep", "record", "nogo", "qubit"};
    return m;
  }

  void validate() const {
    bool known = false;
    for (const auto& m : modes()) known = known || m == mode;
    if (!known) throw ValidationError("config: unknown mode '" + mode + "'");
    if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag())) throw ValidationError("config: alpha not finite");
    if (!(f0 >= 0.0 && f0 <= 1.0)) throw ValidationError("config: f0 must lie in [0, 1]");
    if (!std::isfinite(phi)) throw ValidationError("config: phi not finite");
    for (double t : thetas)
      if (!(t > 0.0 && t < M_PI / 2)) throw ValidationError("config: theta values must lie in (0, pi/2)");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ValidationError("config: horizon must be > 0");
    if (trajectories <= 0) throw ValidationError("config: trajectories must be > 0");
    if (cutoff < -1) throw ValidationError("config: cutoff must be >= 0");
    if (format != "csv" && format != "json") throw ValidationError("config: format must be csv or json");
    if (policy != "dolinar" && policy != "nulling" && policy != "zero")
      throw ValidationError("config: policy must be dolinar, nulling or zero");
    if (initial_sign != 1 && initial_sign != -1) throw ValidationError("config: initial_sign must be +1 or -1");
    if ((mode == "simulate" || mode == "sweep") && !seed)
      throw ValidationError("config: '" + mode + "' needs an explicit seed");
    if (!jumps.empty()) MeasurementRecord(jumps, horizon);
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["mode"] = mode;
    j["alpha"] = {alpha.real(), alpha.imag()};
    j["f0"] = f0;
    j["phi"] = phi;
    j["theta"] = thetas;
    j["horizon"] = horizon;
    j["trajectories"] = trajectories;
    j["cutoff"] = cutoff;
    if (seed) j["seed"] = *seed;
    j["out"] = out;
    j["format"] = format;
    nlohmann::json js = nlohmann::json::array();
    for (const auto& jp : jumps) js.push_back({{"position", jp.position}, {"count", jp.count}});
    j["jumps"] = js;
    j["policy"] = policy;
    j["initial_sign"] = initial_sign;
    return j;
  }

  static RunConfig from_json(const nlohmann::json& j) {
    RunConfig c;
    try {
      c.mode = j.value("mode", c.mode);
      if (j.contains("alpha")) {
        const auto& a = j.at("alpha");
        if (a.is_array())
          c.alpha = {a.at(0).get<double>(), a.size() > 1 ? a.at(1).get<double>() : 0.0};
        else
          c.alpha = a.get<double>();
      }
      if (j.contains("alpha_sq")) c.alpha = std::sqrt(j.at("alpha_sq").get<double>());
      c.f0 = j.value("f0", c.f0);
      c.phi = j.value("phi", c.phi);
      if (j.contains("theta")) {
        if (j.at("theta").is_array())
          c.thetas = j.at("theta").get<std::vector<double>>();
        else
          c.thetas = {j.at("theta").get<double>()};
      }
      c.horizon = j.value("horizon", c.horizon);
      c.trajectories = j.value("trajectories", c.trajectories);
      c.cutoff = j.value("cutoff", c.cutoff);
      if (j.contains("seed") && !j.at("seed").is_null()) c.seed = j.at("seed").get<std::uint64_t>();
      c.out = j.value("out", c.out);
      c.format = j.value("format", c.format);
      if (j.contains("jumps"))
        for (const auto& jp : j.at("jumps")) c.jumps.push_back({jp.at("position").get<double>(), jp.value("count", 1)});
      c.policy = j.value("policy", c.policy);
      c.initial_sign = j.value("initial_sign", c.initial_sign);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("config: ") + e.what());
    }
    return c;
  }

  static RunConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("config: " + path + ": " + e.what());
    }
    return from_json(j);
  }
};

inline bool operator==(const Jump& a, const Jump& b) { return a.position == b.position && a.count == b.count; }

inline bool operator==(const RunConfig& a, const RunConfig& b) {
  return a.mode == b.mode && a.alpha == b.alpha && a.f0 == b.f0 && a.phi == b.phi && a.thetas == b.thetas &&
         a.horizon == b.horizon && a.trajectories == b.trajectories && a.cutoff == b.cutoff && a.seed == b.seed &&
         a.out == b.out && a.format == b.format && a.jumps == b.jumps && a.policy == b.policy &&
         a.initial_sign == b.initial_sign;
}

/// Parses "L" or "L:k".
inline Jump parse_jump(const std::string& s) {
  Jump j;
  const auto colon = s.find(':');
  try {
    size_t used = 0;
    j.position = std::stod(s.substr(0, colon), &used);
    if (used != (colon == std::string::npos ? s.size() : colon)) throw std::invalid_argument(s);
    if (colon != std::string::npos) {
      j.count = std::stoi(s.substr(colon + 1), &used);
      if (used != s.size() - colon - 1) throw std::invalid_argument(s);
    }
  } catch (const std::logic_error&) {
    throw ValidationError("malformed jump '" + s + "', expected L or L:k");
  }
  return j;
}

}  // namespace dolinar
