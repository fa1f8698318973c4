#include "memschaos/noise.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "fft.hpp"
#include "memschaos/error.hpp"

namespace memschaos::noise {

void NoiseSpec::validate() const {
  std::ostringstream msg;
  if (!(alpha >= 0.0 && alpha <= 2.0)) msg << "alpha=" << alpha << " outside [0,2]; ";
  if (n_samples < 16) msg << "n_samples=" << n_samples << " < 16; ";
  if (!(dt > 0.0) || !std::isfinite(dt)) msg << "dt=" << dt << " must be > 0; ";
  if (!msg.str().empty()) throw Error(ErrorKind::InvalidSpec, msg.str());
}

double PsdEstimate::bin_width() const {
  return frequencies.empty() ? 0.0 : frequencies.front();
}

double angular_frequency(double cyclic) { return 2.0 * std::numbers::pi * cyclic; }
double cyclic_frequency(double angular) { return angular / (2.0 * std::numbers::pi); }
double angular_psd_from_cyclic(double two_sided_cyclic_psd) {
  return two_sided_cyclic_psd / (2.0 * std::numbers::pi);
}
double two_sided_from_one_sided(double one_sided_psd) { return 0.5 * one_sided_psd; }

double unit_psd_scale(double alpha, double dt) {
  // Raw construction: S_f(f) = dt |f|^-alpha, so
  // S_w(w) = dt (2 pi)^(alpha - 1) |w|^-alpha.
  return std::sqrt(std::pow(2.0 * std::numbers::pi, 1.0 - alpha) / dt);
}

double sample_mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = sample_mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

NoiseSequence generate(const NoiseSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_samples + (spec.n_samples & 1U);

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> white(n);
  for (double& w : white) w = gauss(rng);

  auto spectrum = detail::forward_real(white);
  const double df = 1.0 / (static_cast<double>(n) * spec.dt);
  spectrum[0] = 0.0;
  for (std::size_t k = 1; k < spectrum.size(); ++k) {
    spectrum[k] *= std::pow(static_cast<double>(k) * df, -0.5 * spec.alpha);
  }
  // Hermitian half-spectrum of an even-length real signal: DC and Nyquist
  // bins are real. The c2r transform then yields an exactly real path.
  spectrum.back() = spectrum.back().real();
  if (spectrum.front().imag() != 0.0 || spectrum.back().imag() != 0.0) {
    throw std::logic_error("non-Hermitian half-spectrum");
  }

  auto path = detail::inverse_real(spectrum, n);
  path.resize(spec.n_samples);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (double& v : path) v *= inv_n;

  double scale = 1.0;
  switch (spec.calibration) {
    case Calibration::UnitVariance:
      scale = 1.0 / std::sqrt(sample_variance(path));
      break;
    case Calibration::UnitPsdCoefficient:
      scale = unit_psd_scale(spec.alpha, spec.dt);
      break;
  }
  for (double& v : path) v *= scale;

  return NoiseSequence{std::move(path), spec.dt, spec};
}

PsdEstimate estimate_psd(const NoiseSequence& seq, Window window, std::size_t n_segments) {
  return estimate_psd(seq.samples, seq.dt, window, n_segments);
}

PsdEstimate estimate_psd(std::span<const double> samples, double dt, Window window,
                         std::size_t n_segments) {
  if (n_segments < 1) throw Error(ErrorKind::InvalidSpec, "n_segments must be >= 1");
  const std::size_t n = samples.size();
  // K segments at 50% overlap cover L (K + 1) / 2 samples.
  std::size_t seg = n_segments == 1 ? n : (2 * n) / (n_segments + 1);
  seg -= seg & 1U;
  if (seg < 16) {
    throw Error(ErrorKind::TooShort, "sequence of " + std::to_string(n) +
                                         " samples is shorter than one 16-sample segment");
  }
  const std::size_t hop = seg / 2;

  std::vector<double> taper(seg, 1.0);
  if (window == Window::Hann) {
    for (std::size_t j = 0; j < seg; ++j) {
      const double s = std::sin(std::numbers::pi * static_cast<double>(j) / static_cast<double>(seg));
      taper[j] = s * s;
    }
  }
  double power = 0.0;
  for (double w : taper) power += w * w;

  const std::size_t half = seg / 2;
  std::vector<double> acc(half, 0.0);
  std::vector<double> buf(seg);
  for (std::size_t s = 0; s < n_segments; ++s) {
    const auto chunk = samples.subspan(s * hop, seg);
    const double m = sample_mean(chunk);
    for (std::size_t j = 0; j < seg; ++j) buf[j] = (chunk[j] - m) * taper[j];
    const auto spec = detail::forward_real(buf);
    for (std::size_t k = 1; k <= half; ++k) acc[k - 1] += std::norm(spec[k]);
  }

  PsdEstimate out;
  out.segment_length = seg;
  out.n_segments = n_segments;
  out.window = window;
  out.frequencies.resize(half);
  out.density.resize(half);
  const double norm = dt / (power * static_cast<double>(n_segments));
  for (std::size_t k = 1; k <= half; ++k) {
    out.frequencies[k - 1] = static_cast<double>(k) / (static_cast<double>(seg) * dt);
    const double fold = (k == half) ? 1.0 : 2.0;
    out.density[k - 1] = fold * norm * acc[k - 1];
  }
  return out;
}

SlopeFit fit_slope(const PsdEstimate& psd, std::pair<double, double> band) {
  const auto [lo, hi] = band;
  if (!(lo < hi)) throw Error(ErrorKind::EmptyBand, "band must satisfy f_lo < f_hi");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < psd.frequencies.size(); ++k) {
    const double f = psd.frequencies[k];
    if (f < lo || f > hi || !(psd.density[k] > 0.0)) continue;
    pts.emplace_back(std::log(f), std::log(psd.density[k]));
  }
  if (pts.size() < 8) {
    throw Error(ErrorKind::EmptyBand,
                "only " + std::to_string(pts.size()) + " bins inside the fit band (need 8)");
  }
  const double m = static_cast<double>(pts.size());
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
  }
  const double mx = sx / m, my = sy / m;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (const auto& [x, y] : pts) {
    const double r = y - (fit.intercept + fit.slope * x);
    sse += r * r;
  }
  fit.slope_stderr = std::sqrt(sse / (m - 2.0) / sxx);
  fit.fit_band = band;
  return fit;
}

std::pair<double, double> default_fit_band(std::size_t n_samples, double dt) {
  return {4.0 / (static_cast<double>(n_samples) * dt), 0.1 / dt};
}

}  // namespace memschaos::noise
