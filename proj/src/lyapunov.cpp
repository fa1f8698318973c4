#include "memschaos/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "memschaos/error.hpp"
#include "memschaos/parallel.hpp"

namespace memschaos::lyapunov {

using model::State;

WolfSchedule schedule(const model::ResonatorParams& p, const WolfConfig& w) {
  if (!(w.d0 > 0.0)) throw Error(ErrorKind::InvariantViolation, "d0 must be > 0");
  if (w.steps_per_period == 0 || !(w.total_time >= 0.0)) {
    throw Error(ErrorKind::InvariantViolation, "steps_per_period and total_time must be positive");
  }
  const double period = p.forcing_period();
  WolfSchedule s;
  s.dt = period / static_cast<double>(w.steps_per_period);
  s.transient_steps = w.transient_periods * w.steps_per_period;
  s.renorm_interval = w.renorm_interval == 0 ? w.steps_per_period : w.renorm_interval;
  const double total = w.total_time > 0.0 ? w.total_time : 2000.0 * period;
  const auto acc_steps = static_cast<std::size_t>(std::llround(total / s.dt));
  s.n_renorms = std::max<std::size_t>(1, acc_steps / s.renorm_interval);
  return s;
}

namespace {

void rescale_toward(sde::HeunStepper& pert, const sde::HeunStepper& fid, double factor,
                    bool with_history) {
  const State a = fid.state();
  const State b = pert.state();
  pert.set_state({a.x + factor * (b.x - a.x), a.y + factor * (b.y - a.y)});
  if (!with_history) return;
  // The delayed history is part of the perturbation; shrink it by the same factor.
  auto hist = pert.delay_line().values();
  const auto ref = fid.delay_line().values();
  for (std::size_t j = 0; j < hist.size(); ++j) hist[j] = ref[j] + factor * (hist[j] - ref[j]);
}

}  // namespace

double largest_lyapunov(const model::ResonatorParams& p,
                        std::optional<sde::ControllerConfig> ctrl, double alpha, double sigma,
                        std::uint64_t seed, const WolfConfig& w) {
  p.validate();
  const WolfSchedule s = schedule(p, w);
  const std::size_t total = s.total_steps();

  noise::NoiseSequence xi;
  const bool noisy = sigma != 0.0;
  if (noisy) xi = noise::generate({alpha, total, s.dt, seed, w.calibration});

  sde::HeunStepper fid(p, ctrl, w.ic, s.dt);
  auto pull_in = [&](std::size_t step) {
    return Error(ErrorKind::PullInDuringEstimate,
                 "seed " + std::to_string(seed) + " pulled in at step " + std::to_string(step));
  };

  double sin_now = 0.0;
  std::size_t i = 0;
  for (; i < s.transient_steps; ++i) {
    const double sin_next = std::sin(p.omega * static_cast<double>(i + 1) * s.dt);
    if (!fid.step(sin_now, sin_next, noisy ? sigma * xi.samples[i] : 0.0)) throw pull_in(i + 1);
    sin_now = sin_next;
  }

  // Perturbed copy starts from the same delayed history; only y is displaced.
  sde::HeunStepper pert = fid;
  pert.set_state({fid.state().x, fid.state().y + w.d0});
  const bool common = w.delay_history == DelayHistory::Common;
  if (common) pert.share_delay_line(&fid.delay_line());

  double log_sum = 0.0;
  for (std::size_t r = 0; r < s.n_renorms; ++r) {
    for (std::size_t j = 0; j < s.renorm_interval; ++j, ++i) {
      const double sin_next = std::sin(p.omega * static_cast<double>(i + 1) * s.dt);
      const double additive = noisy ? sigma * xi.samples[i] : 0.0;
      if (!pert.step(sin_now, sin_next, additive)) throw pull_in(i + 1);
      if (!fid.step(sin_now, sin_next, additive)) throw pull_in(i + 1);
      sin_now = sin_next;
    }
    const State a = fid.state();
    const State b = pert.state();
    const double d = std::hypot(b.x - a.x, b.y - a.y);
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw Error(ErrorKind::PullInDuringEstimate, "degenerate separation for seed " +
                                                       std::to_string(seed));
    }
    log_sum += std::log(d / w.d0);
    rescale_toward(pert, fid, w.d0 / d, !common);
  }
  return log_sum / (static_cast<double>(s.n_renorms * s.renorm_interval) * s.dt);
}

LyapunovEstimate summarize(std::vector<double> per_path, std::size_t requested,
                           std::vector<std::uint64_t> excluded) {
  LyapunovEstimate e;
  e.N = requested;
  e.excluded = std::move(excluded);
  e.per_path = std::move(per_path);
  if (e.per_path.empty()) return e;
  std::vector<double> sorted = e.per_path;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  e.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
  if (sorted.size() > 1) {
    double ss = 0.0;
    for (double v : sorted) ss += (v - e.mean) * (v - e.mean);
    e.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return e;
}

LyapunovEstimate mean_largest_lyapunov(const model::ResonatorParams& p,
                                       std::optional<sde::ControllerConfig> ctrl, double alpha,
                                       double sigma, std::size_t N, std::uint64_t base_seed,
                                       const WolfConfig& w) {
  if (N < 1) throw Error(ErrorKind::InvariantViolation, "N must be >= 1");
  std::vector<std::optional<double>> slots(N);
  parallel_for(N, [&](std::size_t i) {
    try {
      slots[i] = largest_lyapunov(p, ctrl, alpha, sigma, base_seed + i, w);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::PullInDuringEstimate) throw;
    }
  });
  std::vector<double> values;
  std::vector<std::uint64_t> excluded;
  for (std::size_t i = 0; i < N; ++i) {
    if (slots[i]) {
      values.push_back(*slots[i]);
    } else {
      excluded.push_back(base_seed + i);
    }
  }
  if (values.empty()) {
    throw Error(ErrorKind::AllPathsPulledIn, "all " + std::to_string(N) + " paths pulled in");
  }
  return summarize(std::move(values), N, std::move(excluded));
}

Regime classify(const LyapunovEstimate& e, double band) {
  const double b = band < 0.0 ? 2.0 * e.std_error : band;
  if (e.mean > b) return Regime::Chaotic;
  if (e.mean < -b) return Regime::Ordered;
  return Regime::Indeterminate;
}

std::vector<ScanPoint> scan(const model::ResonatorParams& p,
                            std::optional<sde::ControllerConfig> ctrl_template, ScanAxis axis,
                            const std::vector<double>& grid_points, ScanFixed fixed,
                            std::size_t N, std::uint64_t base_seed, const WolfConfig& w) {
  if (grid_points.empty()) throw Error(ErrorKind::InvariantViolation, "empty scan grid");
  if (!std::is_sorted(grid_points.begin(), grid_points.end())) {
    throw Error(ErrorKind::InvariantViolation, "scan grid must be sorted");
  }
  std::vector<ScanPoint> out;
  out.reserve(grid_points.size());
  for (double v : grid_points) {
    double alpha = fixed.alpha;
    double sigma = fixed.sigma;
    auto ctrl = ctrl_template;
    switch (axis) {
      case ScanAxis::Sigma: sigma = v; break;
      case ScanAxis::Alpha: alpha = v; break;
      case ScanAxis::Gain: {
        sde::ControllerConfig c = ctrl_template.value_or(
            sde::ControllerConfig{0.0, p.forcing_period()});
        c.k = v;
        ctrl = c;
        break;
      }
    }
    if (axis != ScanAxis::Gain && ctrl) ctrl->k = fixed.k;
    out.push_back({v, mean_largest_lyapunov(p, ctrl, alpha, sigma, N, base_seed, w)});
  }
  return out;
}

double numeric_threshold(const model::ResonatorParams& p, double alpha,
                         std::pair<double, double> sigma_bracket, std::size_t N,
                         std::uint64_t base_seed, const WolfConfig& w, double tol) {
  auto [lo, hi] = sigma_bracket;
  if (!(lo < hi) || !(tol > 0.0)) {
    throw Error(ErrorKind::BracketInvalid, "need lo < hi and tol > 0");
  }
  const auto at = [&](double sigma) {
    return mean_largest_lyapunov(p, std::nullopt, alpha, sigma, N, base_seed, w);
  };
  if (classify(at(lo)) != Regime::Ordered) {
    throw Error(ErrorKind::BracketInvalid, "lower sigma " + std::to_string(lo) + " is not ordered");
  }
  if (classify(at(hi)) != Regime::Chaotic) {
    throw Error(ErrorKind::BracketInvalid, "upper sigma " + std::to_string(hi) + " is not chaotic");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (at(mid).mean > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

std::optional<double> zero_crossing(const std::vector<ScanPoint>& points) {
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double a = points[i - 1].estimate.mean;
    const double b = points[i].estimate.mean;
    if (a > 0.0 && b <= 0.0) {
      const double x0 = points[i - 1].value;
      const double x1 = points[i].value;
      return x0 + (x1 - x0) * a / (a - b);
    }
  }
  return std::nullopt;
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t m = i; m <= j; ++m) r[idx[m]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(const std::vector<ScanPoint>& points) {
  if (points.size() < 2) throw Error(ErrorKind::InvariantViolation, "spearman needs >= 2 points");
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& pt : points) {
    x.push_back(pt.value);
    y.push_back(pt.estimate.mean);
  }
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(rx.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

const char* to_string(Regime r) {
  switch (r) {
    case Regime::Ordered: return "Ordered";
    case Regime::Chaotic: return "Chaotic";
    case Regime::Indeterminate: return "Indeterminate";
  }
  return "?";
}

}  // namespace memschaos::lyapunov
