#include "memschaos/sde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "memschaos/error.hpp"

namespace memschaos::sde {

using model::State;

IntegrationGrid IntegrationGrid::per_period(const model::ResonatorParams& p,
                                            std::size_t steps_per_period,
                                            std::size_t total_periods,
                                            std::size_t transient_periods) {
  return {p.forcing_period() / static_cast<double>(steps_per_period),
          steps_per_period * total_periods, transient_periods};
}

std::size_t delay_steps(double t_d, double dt) {
  if (!(t_d >= 0.0) || !(dt > 0.0)) {
    throw Error(ErrorKind::DelayNotOnGrid, "delay and step must be non-negative / positive");
  }
  const double ratio = t_d / dt;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw Error(ErrorKind::DelayNotOnGrid,
                "t_d/dt = " + std::to_string(ratio) + " is not an integer");
  }
  return static_cast<std::size_t>(rounded);
}

DelayLine::DelayLine(std::size_t lag_steps, double prehistory)
    : lag_(lag_steps), buf_(lag_steps + 1, prehistory) {}

HeunStepper::HeunStepper(const model::ResonatorParams& p, std::optional<ControllerConfig> ctrl,
                         State ic, double dt)
    : params_(p), dt_(dt), state_(ic) {
  if (ctrl) {
    controlled_ = true;
    gain_ = ctrl->k;
    line_ = DelayLine(delay_steps(ctrl->t_d, dt), ic.y);
  }
}

bool HeunStepper::step(double sin_now, double sin_next, double additive) {
  const auto& p = params_;
  const State s = state_;
  // With lag 0 the feedback y(t) - y(t) vanishes identically.
  const bool delayed = controlled_ && line_.lag() > 0;
  const DelayLine& line = shared_ ? *shared_ : line_;

  double f1 = additive;
  if (controlled_) f1 += gain_ * ((delayed ? line.delayed(0) : s.y) - s.y);
  const double ax = s.y;
  const double ay = model::acceleration(p, s.x, s.y, sin_now, f1);

  const State pred{s.x + dt_ * ax, s.y + dt_ * ay};
  if (!(std::abs(pred.x) < model::kPullInLimit)) {
    state_ = pred;
    return false;
  }
  double f2 = additive;
  if (controlled_) f2 += gain_ * ((delayed ? line.delayed(1) : pred.y) - pred.y);
  const double bx = pred.y;
  const double by = model::acceleration(p, pred.x, pred.y, sin_next, f2);

  state_ = {s.x + 0.5 * dt_ * (ax + bx), s.y + 0.5 * dt_ * (ay + by)};
  if (controlled_) line_.push(state_.y);
  return std::abs(state_.x) < model::kPullInLimit;
}

RunOutcome integrate(const model::ResonatorParams& p, const noise::NoiseSequence* noise,
                     double sigma, std::optional<ControllerConfig> ctrl, State ic,
                     const IntegrationGrid& grid, std::uint64_t seed) {
  if (!(grid.dt > 0.0)) throw Error(ErrorKind::GridMismatch, "grid dt must be > 0");
  if (noise) {
    if (noise->dt != grid.dt) {
      throw Error(ErrorKind::GridMismatch, "noise dt differs from the integration step");
    }
    if (noise->samples.size() < grid.n_steps) {
      throw Error(ErrorKind::GridMismatch, "noise sequence shorter than n_steps");
    }
  }
  if (!(std::abs(ic.x) < 1.0)) throw Error(ErrorKind::Singular, "|ic.x| >= 1");

  HeunStepper stepper(p, ctrl, ic, grid.dt);

  RunOutcome out;
  auto& tr = out.trajectory;
  tr.meta = {p, sigma, ctrl, seed,
             noise ? std::optional<noise::NoiseSpec>(noise->spec) : std::nullopt};
  tr.times.reserve(grid.n_steps + 1);
  tr.states.reserve(grid.n_steps + 1);
  tr.times.push_back(0.0);
  tr.states.push_back(ic);

  double sin_now = 0.0;  // sin(omega * 0)
  for (std::size_t i = 0; i < grid.n_steps; ++i) {
    const double t_next = static_cast<double>(i + 1) * grid.dt;
    const double sin_next = std::sin(p.omega * t_next);
    const double additive = noise ? sigma * noise->samples[i] : 0.0;
    const bool ok = stepper.step(sin_now, sin_next, additive);
    if (!ok) {
      out.status = RunStatus::PullIn;
      out.pull_in_step = i + 1;
      break;
    }
    tr.times.push_back(t_next);
    tr.states.push_back(stepper.state());
    sin_now = sin_next;
  }
  return out;
}

Trajectory discard_transient(const Trajectory& tr, double omega, std::size_t n_periods) {
  if (tr.times.empty()) throw Error(ErrorKind::TooShort, "empty trajectory");
  const double t0 = tr.times.front();
  const double cut = t0 + static_cast<double>(n_periods) * 2.0 * std::numbers::pi / omega;
  const double snap = tr.times.size() > 1 ? 1e-6 * (tr.times[1] - tr.times[0]) : 0.0;
  const auto it = std::find_if(tr.times.begin(), tr.times.end(),
                               [&](double t) { return t >= cut - snap; });
  if (it == tr.times.end()) {
    throw Error(ErrorKind::TooShort, "trajectory ends before the transient cut");
  }
  const auto offset = it - tr.times.begin();
  Trajectory out;
  out.meta = tr.meta;
  out.times.assign(it, tr.times.end());
  out.states.assign(tr.states.begin() + offset, tr.states.end());
  return out;
}

SensitivityPair sensitivity_pair(const model::ResonatorParams& p, const noise::NoiseSequence& noise,
                                 double sigma, std::optional<ControllerConfig> ctrl, State ic,
                                 State delta_ic, const IntegrationGrid& grid, std::uint64_t seed) {
  SensitivityPair pair;
  pair.reference = integrate(p, &noise, sigma, ctrl, ic, grid, seed);
  pair.perturbed =
      integrate(p, &noise, sigma, ctrl, {ic.x + delta_ic.x, ic.y + delta_ic.y}, grid, seed);
  const auto& a = pair.reference.trajectory.states;
  const auto& b = pair.perturbed.trajectory.states;
  const std::size_t n = std::min(a.size(), b.size());
  pair.separation.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    pair.separation[i] = std::hypot(a[i].x - b[i].x, a[i].y - b[i].y);
  }
  return pair;
}

OrbitComparison compare_with_homoclinic(const model::ResonatorParams& p, double half_span,
                                        std::size_t n_steps) {
  if (!(half_span > 0.0) || n_steps == 0) {
    throw Error(ErrorKind::InvariantViolation, "half_span and n_steps must be positive");
  }
  const auto a = model::reduce_to_duffing(p);
  model::ResonatorParams free = p;
  free.mu = 0.0;
  free.A = 0.0;
  const IntegrationGrid grid{2.0 * half_span / static_cast<double>(n_steps), n_steps, 0};
  auto run = integrate(free, nullptr, 0.0, std::nullopt, model::homoclinic(a, -half_span), grid);

  OrbitComparison out;
  out.pulled_in = run.status == RunStatus::PullIn;
  out.full = std::move(run.trajectory);
  out.analytic.reserve(out.full.times.size());
  for (std::size_t i = 0; i < out.full.times.size(); ++i) {
    auto& t = out.full.times[i];
    t = -half_span + static_cast<double>(i) * grid.dt;
    const State ref = model::homoclinic(a, t);
    out.analytic.push_back(ref);
    const State s = out.full.states[i];
    out.max_deviation =
        std::max({out.max_deviation, std::abs(s.x - ref.x), std::abs(s.y - ref.y)});
  }
  return out;
}

}  // namespace memschaos::sde
