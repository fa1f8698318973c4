#pragma once

// Experiment driver: layered JSON configuration, one command per figure,
// deterministic CSV tables, plot scripts and a metadata sidecar per run.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "memschaos/lyapunov.hpp"
#include "memschaos/melnikov.hpp"
#include "memschaos/model.hpp"
#include "memschaos/noise.hpp"
#include "memschaos/sde.hpp"

namespace memschaos::cli {

struct NoiseBlock {
  double alpha = 1.0;
  std::size_t n_samples = std::size_t{1} << 17;
  double dt = 0.1;
  noise::Calibration calibration = noise::Calibration::UnitVariance;
  noise::Window window = noise::Window::Hann;
  std::size_t n_segments = noise::kDefaultSegments;
  std::size_t stride = 1;  // rows of the t,xi table
};

struct IntegrationBlock {
  std::size_t steps_per_period = sde::kDefaultStepsPerPeriod;
  std::size_t total_periods = 2600;
  std::size_t transient_periods = 2400;
  std::size_t stride = 16;
  double sigma = 0.1;
  double alpha = 0.0;
  noise::Calibration calibration = noise::Calibration::UnitVariance;
  model::State ic{0.0635, 0.0};
  model::State delta_ic{1e-6, 0.0};
};

struct WolfBlock {
  lyapunov::WolfConfig config;
  std::size_t total_periods = 2000;
  std::size_t N = 100;
};

struct ControllerBlock {
  bool enabled = false;
  double k = 0.0;
  std::optional<double> t_d;  // unset: one forcing period
};

struct HomoclinicBlock {
  // sqrt(kappa) * 60 = 12 for the reference set: starts 1e-6 x_p from the
  // saddle. Much longer spans only amplify step error near the saddle.
  double half_span = 60.0;
  std::size_t n_points = 2001;
  std::size_t steps = 24000;  // full-field integration steps over the span
};

struct ThresholdBlock {
  double alpha_min = 0.0;
  double alpha_max = 2.0;
  std::size_t n_alpha = 21;
  std::vector<double> control_sigmas{0.1};
  melnikov::QuadratureConfig quadrature;
  bool numeric = false;
  std::vector<double> numeric_alphas{0.0, 1.0, 2.0};
  double numeric_lo = 1e-4;
  double numeric_hi = 0.5;
  double numeric_tol = 1e-3;
};

struct LyapunovBlock {
  lyapunov::ScanAxis axis = lyapunov::ScanAxis::Sigma;
  std::vector<double> values{0.02, 0.03, 0.05, 0.07, 0.1};
  double alpha = 0.0;
  double sigma = 0.1;
  double k = 0.0;
};

struct ControlBlock {
  double sigma = 0.1;
  double alpha = 0.0;
  std::vector<double> gains{0.0, 0.02, 0.04, 0.06, 0.08, 0.1, 0.12, 0.14, 0.16, 0.18, 0.2};
  std::optional<double> t_d;
  std::vector<double> show_gains{0.0, 0.06, 0.12};
};

struct RunConfig {
  model::ResonatorParams model;
  double Vb = 3.8;
  double Vac = 0.13;
  NoiseBlock noise;
  IntegrationBlock integration;
  WolfBlock wolf;
  ControllerBlock controller;
  HomoclinicBlock homoclinic;
  ThresholdBlock threshold;
  LyapunovBlock lyapunov;
  ControlBlock control;
  std::filesystem::path output_dir = "out";
  std::uint64_t base_seed = 1;

  // Canonical JSON of every resolved value (keys sorted, compact).
  std::string resolved_json() const;
  // SHA-256 over resolved_json() without output_dir, prefixed by the command.
  std::string inputs_digest(std::string_view command) const;
};

// Defaults, then the file (if any), then each key=value override in order.
// Values are JSON literals; anything that does not parse as one is a string.
// Throws Error{ParseError}, Error{UnknownKey}, Error{InvariantViolation},
// Error{IoError} (file missing).
RunConfig load_config(const std::optional<std::filesystem::path>& path,
                      const std::vector<std::string>& overrides);

struct OutputRecord {
  std::string path;  // relative to the output directory
  std::optional<std::size_t> rows;  // absent for plot scripts and the like
  std::string sha256;
};

struct TableResult {
  std::filesystem::path path;
  std::size_t rows = 0;
  std::string sha256;
};

// Header line then rows, %.17g reals, '\n' endings. Throws Error{IoError} and
// Error{InvariantViolation} for ragged rows.
TableResult write_table(const std::filesystem::path& path, const std::vector<std::string>& header,
                        const std::vector<std::vector<double>>& rows);

std::string sha256_hex(std::string_view bytes);

enum class Command { Noise, Homoclinic, Threshold, Simulate, Lyapunov, ControlScan };

std::string_view to_string(Command c);
std::optional<Command> parse_command(std::string_view name);

struct CommandReport {
  std::string command;
  std::string inputs_digest;
  std::vector<OutputRecord> outputs;
  double wall_time = 0.0;
  std::vector<std::string> notes;  // human-readable summary lines
};

// Runs one command into cfg.output_dir and writes <command>.report.json next
// to the tables. On any error every file written so far is removed and the
// error propagates.
CommandReport run(Command command, const RunConfig& cfg);

}  // namespace memschaos::cli
