#pragma once

// Power-law (1/f^alpha) noise synthesis and spectral verification.
//
// Noise is synthesized spectrally: white Gaussian samples are transformed,
// every bin at cyclic frequency f_k is scaled by |f_k|^(-alpha/2) (the DC bin
// is zeroed), and the Hermitian half-spectrum is transformed back. The
// expected two-sided cyclic PSD of the raw construction is dt * |f|^(-alpha).

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace memschaos::noise {

enum class Calibration {
  UnitVariance,        // sample variance rescaled to exactly 1
  UnitPsdCoefficient,  // two-sided angular PSD S(w) = |w|^(-alpha)
};

enum class Window { Hann, Rectangular };

struct NoiseSpec {
  double alpha = 0.0;
  std::size_t n_samples = 1024;
  double dt = 1.0;
  std::uint64_t seed = 0;
  Calibration calibration = Calibration::UnitVariance;

  // Throws Error{InvalidSpec}.
  void validate() const;
};

struct NoiseSequence {
  std::vector<double> samples;
  double dt = 1.0;
  NoiseSpec spec;
};

// One-sided density G(f) = 2 S(f) on the positive frequencies, zero bin
// excluded, so that sum(density) * df approximates the sequence variance.
struct PsdEstimate {
  std::vector<double> frequencies;  // cycles per unit model time
  std::vector<double> density;
  std::size_t segment_length = 0;
  std::size_t n_segments = 0;
  Window window = Window::Hann;

  double bin_width() const;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;  // natural-log intercept
  double slope_stderr = 0.0;
  std::pair<double, double> fit_band{0.0, 0.0};
};

// Frequency-convention helpers. All spectral bookkeeping between cyclic
// (estimates) and angular (Melnikov integrals) frequency goes through these.
double angular_frequency(double cyclic);
double cyclic_frequency(double angular);
// Two-sided densities: S_w(w) dw = S_f(f) df.
double angular_psd_from_cyclic(double two_sided_cyclic_psd);
double two_sided_from_one_sided(double one_sided_psd);
// Scale applied to the raw construction so that S_w(w) = |w|^(-alpha).
double unit_psd_scale(double alpha, double dt);

NoiseSequence generate(const NoiseSpec& spec);

inline constexpr std::size_t kDefaultSegments = 8;

// Averaged periodogram with 50% segment overlap and per-segment mean removal.
PsdEstimate estimate_psd(const NoiseSequence& seq, Window window = Window::Hann,
                         std::size_t n_segments = kDefaultSegments);
PsdEstimate estimate_psd(std::span<const double> samples, double dt, Window window,
                         std::size_t n_segments);

// OLS of ln(density) against ln(frequency) over bins with f in [lo, hi].
SlopeFit fit_slope(const PsdEstimate& psd, std::pair<double, double> band);

// Middle of the resolvable range: [4 / (n dt), 0.1 / dt].
std::pair<double, double> default_fit_band(std::size_t n_samples, double dt);

double sample_mean(std::span<const double> x);
double sample_variance(std::span<const double> x);  // (n-1) denominator

}  // namespace memschaos::noise
