#include "ptsw/params_io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace ptsw {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_number(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("value of '" + key + "' is not a number: " + text);
  }
  if (used != text.size()) throw ConfigError("trailing characters in value of '" + key + "'");
  return v;
}

void assign(ParamsInput& in, const std::string& key, double v) {
  if (key == "delta") in.delta = v;
  else if (key == "epsilon") in.epsilon = v;
  else if (key == "omega") in.omega = v;
  else if (key == "theta") in.theta = v;
  else if (key == "theta_frac") {
    if (v == 0.0) throw ConfigError("theta_frac must be non-zero");
    in.theta = std::numbers::pi / v;
  } else if (key == "gamma") in.gamma = v;
  else if (key == "omega_r") in.omega_r = v;
  else if (key == "g") in.g = v;
  else if (key == "n_max") {
    if (v != std::floor(v)) throw ConfigError("n_max must be an integer");
    in.n_max = static_cast<int>(v);
  } else {
    throw ConfigError("unknown parameter key '" + key + "'");
  }
}

void check_spelling(const ParamsInput& in) {
  if (in.uses_cartesian() && in.uses_polar()) {
    throw ConfigError("conflicting parameters: give delta/epsilon or omega/theta, not both");
  }
}

}  // namespace

ParamsInput parse_params_text(const std::string& text) {
  ParamsInput in;
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("malformed JSON parameter file: ") + e.what());
    }
    for (const auto& [key, value] : j.items()) {
      if (!value.is_number()) throw ConfigError("value of '" + key + "' must be numeric");
      assign(in, key, value.get<double>());
    }
  } else {
    std::istringstream lines(text);
    std::string line;
    int lineno = 0;
    while (std::getline(lines, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
      }
      const std::string key = trim(line.substr(0, eq));
      assign(in, key, to_number(key, trim(line.substr(eq + 1))));
    }
  }
  check_spelling(in);
  return in;
}

ParamsInput load_params_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open parameter file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_params_text(ss.str());
}

ParamsInput merge_params(ParamsInput base, const ParamsInput& over) {
  check_spelling(over);
  if (over.uses_cartesian() && base.uses_polar()) base.omega.reset(), base.theta.reset();
  if (over.uses_polar() && base.uses_cartesian()) base.delta.reset(), base.epsilon.reset();
  auto take = [](auto& dst, const auto& src) {
    if (src) dst = src;
  };
  take(base.delta, over.delta);
  take(base.epsilon, over.epsilon);
  take(base.omega, over.omega);
  take(base.theta, over.theta);
  take(base.gamma, over.gamma);
  take(base.omega_r, over.omega_r);
  take(base.g, over.g);
  take(base.n_max, over.n_max);
  return base;
}

SystemParams resolve_params(const ParamsInput& in, const SystemParams& defaults) {
  check_spelling(in);
  SystemParams p = defaults;
  if (in.uses_polar()) {
    const double om = in.omega.value_or(defaults.omega());
    const double th = in.theta.value_or(defaults.theta());
    p = SystemParams::from_omega_theta(om, th, p.gamma, p.omega_r, p.g, p.n_max);
  } else {
    if (in.delta) p.delta = *in.delta;
    if (in.epsilon) p.epsilon = *in.epsilon;
  }
  if (in.gamma) p.gamma = *in.gamma;
  if (in.omega_r) p.omega_r = *in.omega_r;
  if (in.g) p.g = *in.g;
  if (in.n_max) p.n_max = *in.n_max;
  p.validate();
  return p;
}

std::string describe(const SystemParams& p) {
  std::ostringstream os;
  os.precision(17);
  os << "delta=" << p.delta << " epsilon=" << p.epsilon << " gamma=" << p.gamma
     << " omega_r=" << p.omega_r << " g=" << p.g << " n_max=" << p.n_max;
  return os.str();
}

}  // namespace ptsw
