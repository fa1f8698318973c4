#pragma once

// Fixed-step stochastic Heun integration of the full resonator with optional
// delayed velocity feedback f(t) = k (y(t - t_d) - y(t)).
//
// The additive noise term sigma * xi_i is held constant over step i (both
// Heun stages see it). Delayed values are read from a ring buffer holding
// exactly t_d / dt past velocities; before t = 0 the history is ic.y.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "memschaos/model.hpp"
#include "memschaos/noise.hpp"

namespace memschaos::sde {

struct IntegrationGrid {
  double dt = 0.0;
  std::size_t n_steps = 0;
  std::size_t transient_periods = 0;

  // dt = T / steps_per_period with T = 2 pi / omega.
  static IntegrationGrid per_period(const model::ResonatorParams& p, std::size_t steps_per_period,
                                    std::size_t total_periods, std::size_t transient_periods = 0);
};

// Unit-variance noise held over a step carries PSD sigma^2 dt / (2 pi), so the
// step is part of the noise model, not only a discretization choice.
inline constexpr std::size_t kDefaultStepsPerPeriod = 1600;

struct ControllerConfig {
  double k = 0.0;
  double t_d = 0.0;
};

// Number of grid steps spanned by t_d. Throws Error{DelayNotOnGrid} unless
// t_d / dt is an integer to within 1e-9 relative.
std::size_t delay_steps(double t_d, double dt);

struct TrajectoryMeta {
  model::ResonatorParams params;
  double sigma = 0.0;
  std::optional<ControllerConfig> controller;
  std::uint64_t seed = 0;
  std::optional<noise::NoiseSpec> noise;  // absent for deterministic runs
};

struct Trajectory {
  std::vector<double> times;
  std::vector<model::State> states;
  TrajectoryMeta meta;
};

enum class RunStatus { Completed, PullIn };

struct RunOutcome {
  Trajectory trajectory;
  RunStatus status = RunStatus::Completed;
  std::size_t pull_in_step = 0;  // first step with |x| >= 0.999, when status == PullIn
};

// Ring buffer of past velocities for the delay term. After n pushes past the
// prehistory, delayed(0) is y(t_i - t_d) and delayed(1) is y(t_{i+1} - t_d).
class DelayLine {
 public:
  DelayLine() = default;
  DelayLine(std::size_t lag_steps, double prehistory);

  std::size_t lag() const { return lag_; }
  double delayed(std::size_t ahead) const { return buf_[(head_ + ahead) % buf_.size()]; }
  void push(double y) {
    buf_[head_] = y;
    head_ = (head_ + 1) % buf_.size();
  }
  std::span<double> values() { return buf_; }
  std::span<const double> values() const { return buf_; }

 private:
  std::size_t lag_ = 0;
  std::size_t head_ = 0;
  std::vector<double> buf_;  // lag + 1 slots: y_{i-lag} .. y_i
};

// Single-trajectory Heun stepper. Exposed so the Lyapunov estimator can drive
// a fiducial and a perturbed copy in lockstep.
class HeunStepper {
 public:
  HeunStepper(const model::ResonatorParams& p, std::optional<ControllerConfig> ctrl,
              model::State ic, double dt);

  // Advances from t_i = i dt to t_{i+1}. sin_now / sin_next are sin(omega t)
  // at both ends; additive is sigma * xi_i. Returns false on pull-in (the
  // state is then left at the offending value).
  bool step(double sin_now, double sin_next, double additive);

  model::State state() const { return state_; }
  void set_state(model::State s) { state_ = s; }
  // Read delayed velocities from another stepper's line instead of this one's
  // (the delayed term then acts as a common input). Step this stepper before
  // the source each time step.
  void share_delay_line(const DelayLine* source) { shared_ = source; }
  DelayLine& delay_line() { return line_; }
  const DelayLine& delay_line() const { return line_; }

 private:
  model::ResonatorParams params_;
  double dt_;
  double gain_ = 0.0;
  bool controlled_ = false;
  model::State state_;
  DelayLine line_;
  const DelayLine* shared_ = nullptr;
};

// Throws Error{GridMismatch} (noise dt or length) and Error{DelayNotOnGrid};
// Error{Singular} if |ic.x| >= 1. Pull-in is reported through the status.
RunOutcome integrate(const model::ResonatorParams& p, const noise::NoiseSequence* noise,
                     double sigma, std::optional<ControllerConfig> ctrl, model::State ic,
                     const IntegrationGrid& grid, std::uint64_t seed = 0);

// Suffix starting at the first sample with t >= t_start + n_periods * 2 pi / omega.
// Throws Error{TooShort}.
Trajectory discard_transient(const Trajectory& tr, double omega, std::size_t n_periods);

struct SensitivityPair {
  RunOutcome reference;
  RunOutcome perturbed;
  std::vector<double> separation;  // over the common completed prefix
};

// Both runs share the identical noise path.
SensitivityPair sensitivity_pair(const model::ResonatorParams& p, const noise::NoiseSequence& noise,
                                 double sigma, std::optional<ControllerConfig> ctrl,
                                 model::State ic, model::State delta_ic,
                                 const IntegrationGrid& grid, std::uint64_t seed = 0);

// Homoclinic check: the full unforced, undamped field integrated
// (deterministic Heun, n_steps over [-half_span, half_span]) from the
// analytic Plus-branch orbit at -half_span, against that orbit.
struct OrbitComparison {
  Trajectory full;                    // times shifted to start at -half_span
  std::vector<model::State> analytic;  // at the same times
  double max_deviation = 0.0;          // max over samples of max(|dx|, |dy|)
  bool pulled_in = false;
};

OrbitComparison compare_with_homoclinic(const model::ResonatorParams& p, double half_span,
                                        std::size_t n_steps);

}  // namespace memschaos::sde
