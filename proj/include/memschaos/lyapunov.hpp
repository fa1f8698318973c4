#pragma once

// Largest Lyapunov exponent of the noisy (optionally delay-controlled)
// resonator by a two-trajectory Wolf scheme with common noise, its mean over
// independent noise realizations, and scans built on top of it.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "memschaos/model.hpp"
#include "memschaos/noise.hpp"
#include "memschaos/sde.hpp"

namespace memschaos::lyapunov {

// How the perturbed trajectory sees the delayed feedback term.
enum class DelayHistory {
  Rescaled,  // own history, renormalized together with the current state
  Common,    // reads the fiducial's delayed velocity (feedback as common input)
};

struct WolfConfig {
  double d0 = 1e-8;
  std::size_t renorm_interval = 0;  // steps; 0 means one forcing period
  double total_time = 0.0;          // accumulation time; 0 means 2000 forcing periods
  std::size_t transient_periods = 2400;
  std::size_t steps_per_period = sde::kDefaultStepsPerPeriod;
  noise::Calibration calibration = noise::Calibration::UnitVariance;
  DelayHistory delay_history = DelayHistory::Rescaled;
  model::State ic{0.0635, 0.0};
};

// Resolved step counts for one estimate.
struct WolfSchedule {
  double dt = 0.0;
  std::size_t transient_steps = 0;
  std::size_t renorm_interval = 0;
  std::size_t n_renorms = 0;

  std::size_t total_steps() const { return transient_steps + renorm_interval * n_renorms; }
};

WolfSchedule schedule(const model::ResonatorParams& p, const WolfConfig& w);

struct LyapunovEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::vector<double> per_path;          // included paths, in seed order
  std::size_t N = 0;                     // paths requested
  std::vector<std::uint64_t> excluded;   // seeds whose paths pulled in
};

enum class Regime { Ordered, Chaotic, Indeterminate };

// Noise is generated internally from (alpha, seed, w.calibration) on the
// integration grid; sigma = 0 skips it. Throws Error{PullInDuringEstimate}.
double largest_lyapunov(const model::ResonatorParams& p,
                        std::optional<sde::ControllerConfig> ctrl, double alpha, double sigma,
                        std::uint64_t seed, const WolfConfig& w);

// Paths use seeds base_seed + i, i < N, and run concurrently. Pulled-in paths
// are excluded and listed. Throws Error{AllPathsPulledIn}.
LyapunovEstimate mean_largest_lyapunov(const model::ResonatorParams& p,
                                       std::optional<sde::ControllerConfig> ctrl, double alpha,
                                       double sigma, std::size_t N, std::uint64_t base_seed,
                                       const WolfConfig& w);

// Aggregates per-path values (order-independent up to rounding of the sum,
// which is taken in sorted order).
LyapunovEstimate summarize(std::vector<double> per_path, std::size_t requested,
                           std::vector<std::uint64_t> excluded);

// Chaotic if mean > band, Ordered if mean < -band. A negative band selects
// the default 2 * std_error.
Regime classify(const LyapunovEstimate& e, double band = -1.0);

enum class ScanAxis { Sigma, Alpha, Gain };

struct ScanFixed {
  double alpha = 0.0;
  double sigma = 0.0;
  double k = 0.0;
};

struct ScanPoint {
  double value = 0.0;
  LyapunovEstimate estimate;
};

// One estimate per grid point with the same base_seed at every point. For the
// Gain axis the controller template supplies t_d.
std::vector<ScanPoint> scan(const model::ResonatorParams& p,
                            std::optional<sde::ControllerConfig> ctrl_template, ScanAxis axis,
                            const std::vector<double>& grid_points, ScanFixed fixed,
                            std::size_t N, std::uint64_t base_seed, const WolfConfig& w);

// Bisection on sigma against the sign of the mean exponent. Throws
// Error{BracketInvalid} unless lo classifies Ordered and hi Chaotic.
double numeric_threshold(const model::ResonatorParams& p, double alpha,
                         std::pair<double, double> sigma_bracket, std::size_t N,
                         std::uint64_t base_seed, const WolfConfig& w, double tol);

// First sign change of the mean from positive to non-positive along the scan,
// linearly interpolated; nullopt if the mean never crosses.
std::optional<double> zero_crossing(const std::vector<ScanPoint>& points);

// Spearman rank correlation between scan value and mean exponent (average
// ranks for ties). Needs at least two points.
double spearman(const std::vector<ScanPoint>& points);

const char* to_string(Regime r);

}  // namespace memschaos::lyapunov
