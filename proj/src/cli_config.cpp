#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>
#include "memschaos/cli.hpp"
#include "memschaos/error.hpp"

namespace memschaos::cli {
namespace {

using nlohmann::json;

const char* name(noise::Calibration c) {
  return c == noise::Calibration::UnitVariance ? "unit_variance" : "unit_psd";
}
const char* name(noise::Window w) { return w == noise::Window::Hann ? "hann" : "rectangular"; }
const char* name(lyapunov::ScanAxis a) {
  switch (a) {
    case lyapunov::ScanAxis::Sigma: return "sigma";
    case lyapunov::ScanAxis::Alpha: return "alpha";
    case lyapunov::ScanAxis::Gain: return "gain";
  }
  return "?";
}
const char* name(lyapunov::DelayHistory h) {
  return h == lyapunov::DelayHistory::Rescaled ? "rescaled" : "common";
}

json state(model::State s) { return json::array({s.x, s.y}); }
json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json to_json(const RunConfig& c) {
  const auto& m = c.model;
  const auto& w = c.wolf.config;
  const auto& t = c.threshold;
  json j;
  j["model"] = {{"delta", m.delta}, {"beta", m.beta}, {"gamma", m.gamma}, {"mu", m.mu},
                {"epsilon", m.epsilon}, {"omega", m.omega}, {"A", m.A},
                {"Vb", c.Vb}, {"Vac", c.Vac}};
  j["noise"] = {{"alpha", c.noise.alpha},         {"n_samples", c.noise.n_samples},
                {"dt", c.noise.dt},               {"calibration", name(c.noise.calibration)},
                {"window", name(c.noise.window)}, {"n_segments", c.noise.n_segments},
                {"stride", c.noise.stride}};
  const auto& g = c.integration;
  j["integration"] = {{"steps_per_period", g.steps_per_period},
                      {"total_periods", g.total_periods},
                      {"transient_periods", g.transient_periods},
                      {"stride", g.stride},
                      {"sigma", g.sigma},
                      {"alpha", g.alpha},
                      {"calibration", name(g.calibration)},
                      {"ic", state(g.ic)},
                      {"delta_ic", state(g.delta_ic)}};
  j["wolf"] = {{"d0", w.d0},
               {"renorm_interval", w.renorm_interval},
               {"total_periods", c.wolf.total_periods},
               {"transient_periods", w.transient_periods},
               {"steps_per_period", w.steps_per_period},
               {"calibration", name(w.calibration)},
               {"delay_history", name(w.delay_history)},
               {"ic", state(w.ic)},
               {"N", c.wolf.N}};
  j["controller"] = {{"enabled", c.controller.enabled}, {"k", c.controller.k},
                     {"t_d", opt(c.controller.t_d)}};
  j["homoclinic"] = {{"half_span", c.homoclinic.half_span},
                     {"n_points", c.homoclinic.n_points},
                     {"steps", c.homoclinic.steps}};
  j["threshold"] = {{"alpha_min", t.alpha_min},
                    {"alpha_max", t.alpha_max},
                    {"n_alpha", t.n_alpha},
                    {"control_sigmas", t.control_sigmas},
                    {"rel_tol", t.quadrature.rel_tol},
                    {"abs_tol", t.quadrature.abs_tol},
                    {"omega_cutoff", t.quadrature.omega_cutoff},
                    {"numeric", t.numeric},
                    {"numeric_alphas", t.numeric_alphas},
                    {"numeric_lo", t.numeric_lo},
                    {"numeric_hi", t.numeric_hi},
                    {"numeric_tol", t.numeric_tol}};
  j["lyapunov"] = {{"axis", name(c.lyapunov.axis)}, {"values", c.lyapunov.values},
                   {"alpha", c.lyapunov.alpha},     {"sigma", c.lyapunov.sigma},
                   {"k", c.lyapunov.k}};
  j["control"] = {{"sigma", c.control.sigma},
                  {"alpha", c.control.alpha},
                  {"gains", c.control.gains},
                  {"t_d", opt(c.control.t_d)},
                  {"show_gains", c.control.show_gains}};
  j["output_dir"] = c.output_dir.string();
  j["base_seed"] = c.base_seed;
  return j;
}

json defaults() {
  json j = to_json(RunConfig{});
  j["model"]["A"] = nullptr;  // derived from gamma, Vb, Vac unless given
  return j;
}

[[noreturn]] void parse_error(const std::string& key, const std::string& what) {
  throw Error(ErrorKind::ParseError, key + ": " + what);
}

// Recursively overlays src onto dst; every key must already exist in dst.
void overlay(json& dst, const json& src, const std::string& prefix) {
  if (!src.is_object()) parse_error(prefix.empty() ? "<root>" : prefix, "expected an object");
  for (const auto& [key, value] : src.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!dst.contains(key)) throw Error(ErrorKind::UnknownKey, path);
    json& slot = dst[key];
    if (slot.is_object()) {
      overlay(slot, value, path);
    } else {
      slot = value;
    }
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    parse_error(assignment, "override must look like key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (!node->is_object() || !node->contains(part)) throw Error(ErrorKind::UnknownKey, key);
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_object()) parse_error(key, "cannot replace a whole block");
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  *node = std::move(value);
}

// Typed readers; a type mismatch is a parse error naming the key.
template <class T>
T get(const json& j, const char* block, const char* key) {
  const json& v = j.at(block).at(key);
  const auto fail = [&] {
    parse_error(std::string(block) + "." + key, "unexpected type " + std::string(v.type_name()));
  };
  if constexpr (std::is_same_v<T, double>) {
    if (!v.is_number()) fail();
  } else if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) fail();
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.template get<long long>() >= 0)) {
      fail();
    }
  }
  try {
    return v.template get<T>();
  } catch (const json::exception&) {
    fail();
  }
  return T{};
}

std::optional<double> get_opt(const json& j, const char* block, const char* key) {
  if (j.at(block).at(key).is_null()) return std::nullopt;
  return get<double>(j, block, key);
}

model::State get_state(const json& j, const char* block, const char* key) {
  const auto v = get<std::vector<double>>(j, block, key);
  if (v.size() != 2) parse_error(std::string(block) + "." + key, "expected [x, y]");
  return {v[0], v[1]};
}

template <class E>
E get_enum(const json& j, const char* block, const char* key,
           std::initializer_list<std::pair<const char*, E>> choices) {
  const auto s = get<std::string>(j, block, key);
  for (const auto& [n, e] : choices) {
    if (s == n) return e;
  }
  parse_error(std::string(block) + "." + key, "unrecognized value '" + s + "'");
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::InvariantViolation, what);
}

RunConfig from_json(const json& j) {
  using noise::Calibration;
  const std::initializer_list<std::pair<const char*, Calibration>> calibrations{
      {"unit_variance", Calibration::UnitVariance},
      {"unit_psd", Calibration::UnitPsdCoefficient}};

  RunConfig c;
  auto& m = c.model;
  m.delta = get<double>(j, "model", "delta");
  m.beta = get<double>(j, "model", "beta");
  m.gamma = get<double>(j, "model", "gamma");
  m.mu = get<double>(j, "model", "mu");
  m.epsilon = get<double>(j, "model", "epsilon");
  m.omega = get<double>(j, "model", "omega");
  c.Vb = get<double>(j, "model", "Vb");
  c.Vac = get<double>(j, "model", "Vac");
  const auto A = get_opt(j, "model", "A");
  require(c.Vb > 0.0 && c.Vac >= 0.0, "model.Vb must be > 0 and model.Vac >= 0");
  m.A = A ? *A : 2.0 * m.gamma * c.Vac / c.Vb;

  auto& n = c.noise;
  n.alpha = get<double>(j, "noise", "alpha");
  n.n_samples = get<std::size_t>(j, "noise", "n_samples");
  n.dt = get<double>(j, "noise", "dt");
  n.calibration = get_enum(j, "noise", "calibration", calibrations);
  n.window = get_enum<noise::Window>(j, "noise", "window",
                      {{"hann", noise::Window::Hann}, {"rectangular", noise::Window::Rectangular}});
  n.n_segments = get<std::size_t>(j, "noise", "n_segments");
  n.stride = get<std::size_t>(j, "noise", "stride");

  auto& g = c.integration;
  g.steps_per_period = get<std::size_t>(j, "integration", "steps_per_period");
  g.total_periods = get<std::size_t>(j, "integration", "total_periods");
  g.transient_periods = get<std::size_t>(j, "integration", "transient_periods");
  g.stride = get<std::size_t>(j, "integration", "stride");
  g.sigma = get<double>(j, "integration", "sigma");
  g.alpha = get<double>(j, "integration", "alpha");
  g.calibration = get_enum(j, "integration", "calibration", calibrations);
  g.ic = get_state(j, "integration", "ic");
  g.delta_ic = get_state(j, "integration", "delta_ic");

  auto& w = c.wolf.config;
  w.d0 = get<double>(j, "wolf", "d0");
  w.renorm_interval = get<std::size_t>(j, "wolf", "renorm_interval");
  c.wolf.total_periods = get<std::size_t>(j, "wolf", "total_periods");
  w.transient_periods = get<std::size_t>(j, "wolf", "transient_periods");
  w.steps_per_period = get<std::size_t>(j, "wolf", "steps_per_period");
  w.calibration = get_enum(j, "wolf", "calibration", calibrations);
  w.delay_history = get_enum<lyapunov::DelayHistory>(j, "wolf", "delay_history",
                             {{"rescaled", lyapunov::DelayHistory::Rescaled},
                              {"common", lyapunov::DelayHistory::Common}});
  w.ic = get_state(j, "wolf", "ic");
  c.wolf.N = get<std::size_t>(j, "wolf", "N");

  c.controller.enabled = get<bool>(j, "controller", "enabled");
  c.controller.k = get<double>(j, "controller", "k");
  c.controller.t_d = get_opt(j, "controller", "t_d");

  c.homoclinic.half_span = get<double>(j, "homoclinic", "half_span");
  c.homoclinic.n_points = get<std::size_t>(j, "homoclinic", "n_points");
  c.homoclinic.steps = get<std::size_t>(j, "homoclinic", "steps");

  auto& t = c.threshold;
  t.alpha_min = get<double>(j, "threshold", "alpha_min");
  t.alpha_max = get<double>(j, "threshold", "alpha_max");
  t.n_alpha = get<std::size_t>(j, "threshold", "n_alpha");
  t.control_sigmas = get<std::vector<double>>(j, "threshold", "control_sigmas");
  t.quadrature.rel_tol = get<double>(j, "threshold", "rel_tol");
  t.quadrature.abs_tol = get<double>(j, "threshold", "abs_tol");
  t.quadrature.omega_cutoff = get<double>(j, "threshold", "omega_cutoff");
  t.numeric = get<bool>(j, "threshold", "numeric");
  t.numeric_alphas = get<std::vector<double>>(j, "threshold", "numeric_alphas");
  t.numeric_lo = get<double>(j, "threshold", "numeric_lo");
  t.numeric_hi = get<double>(j, "threshold", "numeric_hi");
  t.numeric_tol = get<double>(j, "threshold", "numeric_tol");

  auto& l = c.lyapunov;
  l.axis = get_enum<lyapunov::ScanAxis>(j, "lyapunov", "axis",
                    {{"sigma", lyapunov::ScanAxis::Sigma},
                     {"alpha", lyapunov::ScanAxis::Alpha},
                     {"gain", lyapunov::ScanAxis::Gain}});
  l.values = get<std::vector<double>>(j, "lyapunov", "values");
  l.alpha = get<double>(j, "lyapunov", "alpha");
  l.sigma = get<double>(j, "lyapunov", "sigma");
  l.k = get<double>(j, "lyapunov", "k");

  auto& k = c.control;
  k.sigma = get<double>(j, "control", "sigma");
  k.alpha = get<double>(j, "control", "alpha");
  k.gains = get<std::vector<double>>(j, "control", "gains");
  k.t_d = get_opt(j, "control", "t_d");
  k.show_gains = get<std::vector<double>>(j, "control", "show_gains");

  const auto& out = j.at("output_dir");
  if (!out.is_string()) parse_error("output_dir", "expected a string");
  c.output_dir = out.get<std::string>();
  const auto& seed = j.at("base_seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
    parse_error("base_seed", "expected a non-negative integer");
  }
  c.base_seed = seed.get<std::uint64_t>();
  return c;
}

bool in_unit_alpha(double a) { return a >= 0.0 && a <= 2.0; }

void validate(const RunConfig& c) {
  c.model.validate();
  require(c.model.delta > 0.0, "model.delta must be > 0");
  require(c.model.A >= 0.0, "model.A must be >= 0");

  try {
    noise::NoiseSpec{c.noise.alpha, c.noise.n_samples, c.noise.dt, c.base_seed,
                     c.noise.calibration}
        .validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::InvariantViolation, e.what());
  }
  require(c.noise.n_segments >= 1 && c.noise.stride >= 1,
          "noise.n_segments and noise.stride must be >= 1");

  const auto& g = c.integration;
  require(g.steps_per_period >= 1 && g.stride >= 1,
          "integration.steps_per_period and integration.stride must be >= 1");
  require(g.total_periods > g.transient_periods,
          "integration.total_periods must exceed integration.transient_periods");
  require(g.sigma >= 0.0 && in_unit_alpha(g.alpha),
          "integration.sigma must be >= 0 and integration.alpha in [0, 2]");
  require(std::abs(g.ic.x) < model::kPullInLimit, "integration.ic must satisfy |x| < 0.999");

  const auto& w = c.wolf;
  require(w.config.d0 > 0.0, "wolf.d0 must be > 0");
  require(w.N >= 1 && w.total_periods >= 1 && w.config.steps_per_period >= 1,
          "wolf.N, wolf.total_periods and wolf.steps_per_period must be >= 1");
  require(std::abs(w.config.ic.x) < model::kPullInLimit, "wolf.ic must satisfy |x| < 0.999");

  require(c.controller.k >= 0.0, "controller.k must be >= 0");
  require(!c.controller.t_d || *c.controller.t_d >= 0.0, "controller.t_d must be >= 0");

  require(c.homoclinic.half_span > 0.0 && c.homoclinic.n_points >= 2 && c.homoclinic.steps >= 1,
          "homoclinic block out of range");

  const auto& t = c.threshold;
  require(in_unit_alpha(t.alpha_min) && in_unit_alpha(t.alpha_max) && t.alpha_min <= t.alpha_max,
          "threshold alpha range must lie in [0, 2]");
  require(t.n_alpha >= 1, "threshold.n_alpha must be >= 1");
  require(t.n_alpha == 1 || t.alpha_min < t.alpha_max, "threshold alpha range is empty");
  for (double s : t.control_sigmas) require(s >= 0.0, "threshold.control_sigmas must be >= 0");
  require(t.quadrature.rel_tol > 0.0 && t.quadrature.abs_tol > 0.0 &&
              t.quadrature.omega_cutoff >= 0.0,
          "quadrature tolerances must be positive");
  for (double a : t.numeric_alphas) require(in_unit_alpha(a), "threshold.numeric_alphas in [0, 2]");
  require(t.numeric_lo < t.numeric_hi && t.numeric_tol > 0.0, "threshold numeric bracket");

  const auto sorted_nonempty = [](const std::vector<double>& v) {
    return !v.empty() && std::is_sorted(v.begin(), v.end());
  };
  require(sorted_nonempty(c.lyapunov.values), "lyapunov.values must be nonempty and sorted");
  require(sorted_nonempty(c.control.gains) && c.control.gains.front() >= 0.0,
          "control.gains must be nonempty, sorted and >= 0");
  require(in_unit_alpha(c.control.alpha) && c.control.sigma >= 0.0, "control block out of range");
  require(!c.control.t_d || *c.control.t_d >= 0.0, "control.t_d must be >= 0");
  for (double k : c.control.show_gains) require(k >= 0.0, "control.show_gains must be >= 0");
}

}  // namespace

std::string RunConfig::resolved_json() const {
  json j = to_json(*this);
  j["derived"] = {{"mu_bar", model.mu_bar()}, {"A_bar", model.A_bar()},
                  {"forcing_period", model.forcing_period()}};
  return j.dump();
}

std::string RunConfig::inputs_digest(std::string_view command) const {
  json j = json::parse(resolved_json());
  j.erase("output_dir");
  return sha256_hex(std::string(command) + "\n" + j.dump());
}

RunConfig load_config(const std::optional<std::filesystem::path>& path,
                      const std::vector<std::string>& overrides) {
  json doc = defaults();
  if (path) {
    std::ifstream in(*path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open config " + path->string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    // An empty (or whitespace-only) file means "all defaults".
    if (text.find_first_not_of(" \t\r\n") != std::string::npos) {
      const json file = json::parse(text, nullptr, false, true);
      if (file.is_discarded()) parse_error(path->string(), "not valid JSON");
      overlay(doc, file, "");
    }
  }
  for (const auto& o : overrides) apply_override(doc, o);
  RunConfig cfg = from_json(doc);
  validate(cfg);
  return cfg;
}

}  // namespace memschaos::cli
