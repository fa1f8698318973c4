#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <system_error>

#include <nlohmann/json.hpp>
#include "memschaos/cli.hpp"
#include "memschaos/error.hpp"

namespace memschaos::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Rows = std::vector<std::vector<double>>;

std::string format(const char* fmt, ...) {
  va_list args;
  va_start(args, fmt);
  char buf[512];
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return buf;
}

// Tracks everything written so a failed command leaves nothing behind.
class Session {
 public:
  Session(fs::path dir, CommandReport& report) : dir_(std::move(dir)), report_(report) {}

  void table(const std::string& file, const std::vector<std::string>& header, const Rows& rows) {
    written_.push_back(dir_ / file);
    const auto r = write_table(dir_ / file, header, rows);
    report_.outputs.push_back({file, r.rows, r.sha256});
  }

  void text(const std::string& file, const std::string& content, bool listed = true) {
    written_.push_back(dir_ / file);
    std::ofstream out(dir_ / file, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + (dir_ / file).string());
    if (listed) report_.outputs.push_back({file, std::nullopt, sha256_hex(content)});
  }

  void note(std::string line) { report_.notes.push_back(std::move(line)); }

  void rollback() noexcept {
    for (const auto& p : written_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }

 private:
  fs::path dir_;
  CommandReport& report_;
  std::vector<fs::path> written_;
};

const char* name(noise::Calibration c) {
  return c == noise::Calibration::UnitVariance ? "unit_variance" : "unit_psd";
}

std::string gnuplot_header(const std::string& title, const std::string& png) {
  return "# " + title +
         "\n# gnuplot script; run from this directory.\n"
         "set datafile separator ','\n"
         "set terminal pngcairo size 900,700\n"
         "set output '" + png + "'\n";
}

Rows trajectory_rows(const sde::Trajectory& tr, std::size_t stride) {
  Rows rows;
  rows.reserve(tr.times.size() / stride + 1);
  for (std::size_t i = 0; i < tr.times.size(); i += stride) {
    rows.push_back({tr.times[i], tr.states[i].x, tr.states[i].y});
  }
  return rows;
}

lyapunov::WolfConfig wolf_config(const RunConfig& cfg) {
  auto w = cfg.wolf.config;
  w.total_time = static_cast<double>(cfg.wolf.total_periods) * cfg.model.forcing_period();
  return w;
}

sde::IntegrationGrid integration_grid(const RunConfig& cfg) {
  const auto& g = cfg.integration;
  return sde::IntegrationGrid::per_period(cfg.model, g.steps_per_period, g.total_periods,
                                          g.transient_periods);
}

std::optional<noise::NoiseSequence> grid_noise(const RunConfig& cfg, const sde::IntegrationGrid& grid,
                                               double alpha, double sigma) {
  if (sigma == 0.0) return std::nullopt;
  return noise::generate(
      {alpha, grid.n_steps, grid.dt, cfg.base_seed, cfg.integration.calibration});
}

Rows scan_rows(const std::vector<lyapunov::ScanPoint>& pts) {
  Rows rows;
  for (const auto& p : pts) {
    rows.push_back({p.value, p.estimate.mean, p.estimate.std_error,
                    static_cast<double>(p.estimate.excluded.size())});
  }
  return rows;
}

// ---------------------------------------------------------------- commands

void run_noise(const RunConfig& cfg, Session& s) {
  const auto& n = cfg.noise;
  const auto seq = noise::generate({n.alpha, n.n_samples, n.dt, cfg.base_seed, n.calibration});
  Rows series;
  for (std::size_t i = 0; i < seq.samples.size(); i += n.stride) {
    series.push_back({static_cast<double>(i) * n.dt, seq.samples[i]});
  }
  s.table("noise.csv", {"t", "xi"}, series);

  const auto psd = noise::estimate_psd(seq, n.window, n.n_segments);
  Rows spectrum;
  for (std::size_t i = 0; i < psd.frequencies.size(); ++i) {
    spectrum.push_back({psd.frequencies[i], psd.density[i]});
  }
  s.table("psd.csv", {"f", "S"}, spectrum);

  const auto band = noise::default_fit_band(n.n_samples, n.dt);
  const auto fit = noise::fit_slope(psd, band);
  s.note(format("alpha=%g calibration=%s seed=%llu", n.alpha, name(n.calibration),
                static_cast<unsigned long long>(cfg.base_seed)));
  s.note(format("fitted slope %.4f +- %.4f over f in [%g, %g] (expected %g)", fit.slope,
                fit.slope_stderr, band.first, band.second, -n.alpha));
  s.note(format("sample mean %.3e, sample variance %.6g", noise::sample_mean(seq.samples),
                noise::sample_variance(seq.samples)));

  std::string gp = gnuplot_header("Power-law noise: sample path and spectrum", "fig1_noise.png");
  gp += "set multiplot layout 2,1\n"
        "set xlabel 't'\nset ylabel 'xi'\n"
        "plot 'noise.csv' skip 1 using 1:2 with lines lw 0.5 notitle\n"
        "set logscale xy\nset xlabel 'f'\nset ylabel 'S(f)'\n";
  gp += format("plot 'psd.csv' skip 1 using 1:2 with lines title 'estimate', "
               "exp(%.17g)*x**(%.17g) with lines dt 2 title 'fit slope %.3f'\n",
               fit.intercept, fit.slope, fit.slope);
  gp += "unset multiplot\n";
  s.text("fig1_noise.gp", gp);
}

void run_homoclinic(const RunConfig& cfg, Session& s) {
  const auto a = model::reduce_to_duffing(cfg.model);
  const auto& h = cfg.homoclinic;
  Rows analytic;
  for (std::size_t i = 0; i < h.n_points; ++i) {
    const double t =
        -h.half_span + 2.0 * h.half_span * static_cast<double>(i) / static_cast<double>(h.n_points - 1);
    const auto st = model::homoclinic(a, t);
    analytic.push_back({t, st.x, st.y});
  }
  s.table("homoclinic_analytic.csv", {"t", "x", "y"}, analytic);

  const auto cmp = sde::compare_with_homoclinic(cfg.model, h.half_span, h.steps);
  const std::size_t stride = std::max<std::size_t>(1, h.steps / (h.n_points - 1));
  s.table("homoclinic_full.csv", {"t", "x", "y"}, trajectory_rows(cmp.full, stride));
  s.note(format("kappa=%.10g lambda=%.10g x_p=%.10g Lambda=%.10g", a.kappa, a.lambda, a.x_p,
                a.Lambda));
  s.note(format("max |full - analytic| = %.4e = %.4f x_p%s", cmp.max_deviation,
                cmp.max_deviation / a.x_p, cmp.pulled_in ? " (full run pulled in)" : ""));

  std::string gp = gnuplot_header("Homoclinic orbit: full field vs quartic reduction",
                                  "fig2_homoclinic.png");
  gp += "set xlabel 'x'\nset ylabel 'y'\n"
        "plot 'homoclinic_analytic.csv' skip 1 using 2:3 with lines lw 2 title 'analytic', \\\n"
        "     'homoclinic_full.csv' skip 1 using 2:3 with points pt 7 ps 0.3 title 'full field'\n";
  s.text("fig2_homoclinic.gp", gp);
}

void run_threshold(const RunConfig& cfg, Session& s) {
  const auto& t = cfg.threshold;
  const auto& q = t.quadrature;
  const auto a = model::reduce_to_duffing(cfg.model);
  const double t_d = cfg.controller.t_d.value_or(cfg.model.forcing_period());

  const double I_d = melnikov::damping_term(a, cfg.model.mu_bar());
  const double C_p = melnikov::forcing_amplitude(cfg.model, a, q);
  const double C_p_minus = melnikov::forcing_amplitude(cfg.model, a, q, model::Branch::Minus);
  const double C_p_closed = melnikov::forcing_amplitude_closed_form(cfg.model, a);
  s.note(format("I_d=%.6e C_p=%.6e (Minus branch %.6e)", I_d, C_p, C_p_minus));
  s.note(format("closed-form forcing amplitude %.6e, relative discrepancy to quadrature %.3f",
                C_p_closed, C_p > 0.0 ? (C_p_closed - C_p) / C_p : 0.0));

  Rows curve;
  Rows control;
  for (std::size_t i = 0; i < t.n_alpha; ++i) {
    const double alpha =
        t.n_alpha == 1 ? t.alpha_min
                       : t.alpha_min + (t.alpha_max - t.alpha_min) * static_cast<double>(i) /
                                           static_cast<double>(t.n_alpha - 1);
    const auto pt = melnikov::chaos_threshold(cfg.model, a, alpha, q);
    curve.push_back({alpha, pt.sigma_c});
    for (double sigma : t.control_sigmas) {
      // Below the onset threshold no control is needed.
      const double k_c = sigma > pt.sigma_c
                             ? melnikov::critical_gain(cfg.model, a, alpha, sigma, t_d, q)
                             : 0.0;
      control.push_back({alpha, sigma, k_c});
    }
  }
  s.table("threshold.csv", {"alpha", "sigma_c"}, curve);
  s.table("control_criterion.csv", {"alpha", "sigma", "k_c"}, control);
  s.note(format("sigma_c(%g)/sigma_c(%g) = %.4f", curve.front()[0], curve.back()[0],
                curve.front()[1] / curve.back()[1]));
  s.note(format("control criterion uses t_d = %.10g", t_d));

  std::string plot_stars;
  if (t.numeric) {
    Rows stars;
    const auto w = wolf_config(cfg);
    for (double alpha : t.numeric_alphas) {
      const double star = lyapunov::numeric_threshold(cfg.model, alpha, {t.numeric_lo, t.numeric_hi},
                                                      cfg.wolf.N, cfg.base_seed, w, t.numeric_tol);
      stars.push_back({alpha, star});
    }
    s.table("threshold_numeric.csv", {"alpha", "sigma_star"}, stars);
    s.note(format("numeric thresholds with N=%zu, calibration=%s", cfg.wolf.N,
                  name(w.calibration)));
    plot_stars = ", \\\n     'threshold_numeric.csv' skip 1 using 1:2 with points pt 3 ps 2 "
                 "title 'numerical'";
  }

  std::string gp = gnuplot_header("Mean-square Melnikov threshold", "fig3_threshold.png");
  gp += "set xlabel 'alpha'\nset ylabel 'sigma_c'\nset logscale y\n"
        "plot 'threshold.csv' skip 1 using 1:2 with linespoints title 'analytical'" +
        plot_stars + "\n";
  s.text("fig3_threshold.gp", gp);
}

void run_simulate(const RunConfig& cfg, Session& s) {
  const auto& g = cfg.integration;
  const auto grid = integration_grid(cfg);
  std::optional<sde::ControllerConfig> ctrl;
  if (cfg.controller.enabled) {
    ctrl = sde::ControllerConfig{cfg.controller.k,
                                 cfg.controller.t_d.value_or(cfg.model.forcing_period())};
  }
  // A zero-sigma run still needs a (zero-weighted) noise path for the pair API.
  auto xi = grid_noise(cfg, grid, g.alpha, g.sigma);
  if (!xi) xi = noise::NoiseSequence{std::vector<double>(grid.n_steps, 0.0), grid.dt, {}};

  const auto pair = sde::sensitivity_pair(cfg.model, *xi, g.sigma, ctrl, g.ic, g.delta_ic, grid,
                                          cfg.base_seed);
  for (const auto* run : {&pair.reference, &pair.perturbed}) {
    if (run->status == sde::RunStatus::PullIn) {
      s.note(format("%s run pulled in at step %zu", run == &pair.reference ? "reference" : "perturbed",
                    run->pull_in_step));
    }
  }
  const auto ref = sde::discard_transient(pair.reference.trajectory, cfg.model.omega,
                                          g.transient_periods);
  const auto pert = sde::discard_transient(pair.perturbed.trajectory, cfg.model.omega,
                                           g.transient_periods);
  s.table("trajectory.csv", {"t", "x", "y"}, trajectory_rows(ref, g.stride));
  s.table("trajectory_perturbed.csv", {"t", "x", "y"}, trajectory_rows(pert, g.stride));

  const std::size_t first = pair.reference.trajectory.times.size() - ref.times.size();
  Rows sep;
  double sep_max = 0.0;
  for (std::size_t i = first; i < pair.separation.size(); i += g.stride) {
    sep.push_back({pair.reference.trajectory.times[i], pair.separation[i]});
  }
  for (std::size_t i = first; i < pair.separation.size(); ++i) {
    sep_max = std::max(sep_max, pair.separation[i]);
  }
  s.table("separation.csv", {"t", "d"}, sep);

  double x_min = ref.states.front().x;
  double x_max = x_min;
  std::size_t negative = 0;
  for (const auto& st : ref.states) {
    x_min = std::min(x_min, st.x);
    x_max = std::max(x_max, st.x);
    if (st.x < 0.0) ++negative;
  }
  s.note(format("sigma=%g alpha=%g calibration=%s dt=%.6g steps=%zu", g.sigma, g.alpha,
                name(g.calibration), grid.dt, grid.n_steps));
  s.note(format("post-transient x in [%.6f, %.6f], fraction in left well %.4f", x_min, x_max,
                static_cast<double>(negative) / static_cast<double>(ref.states.size())));
  s.note(format("max post-transient separation %.4e (initial %.4e)", sep_max,
                std::hypot(g.delta_ic.x, g.delta_ic.y)));

  std::string gp = gnuplot_header("Phase diagram and time histories", "fig4_simulate.png");
  gp += "set multiplot layout 2,2\n"
        "set xlabel 'x'\nset ylabel 'y'\n"
        "plot 'trajectory.csv' skip 1 using 2:3 with dots notitle\n"
        "set xlabel 't'\nset ylabel 'x'\n"
        "plot 'trajectory.csv' skip 1 using 1:2 with lines title 'reference', \\\n"
        "     'trajectory_perturbed.csv' skip 1 using 1:2 with lines title 'perturbed'\n"
        "set ylabel 'separation'\nset logscale y\n"
        "plot 'separation.csv' skip 1 using 1:2 with lines notitle\n"
        "unset multiplot\n";
  s.text("fig4_simulate.gp", gp);
}

void run_lyapunov(const RunConfig& cfg, Session& s) {
  const auto& l = cfg.lyapunov;
  std::optional<sde::ControllerConfig> ctrl;
  if (cfg.controller.enabled || l.axis == lyapunov::ScanAxis::Gain) {
    ctrl = sde::ControllerConfig{cfg.controller.k,
                                 cfg.controller.t_d.value_or(cfg.model.forcing_period())};
  }
  const auto w = wolf_config(cfg);
  const auto pts = lyapunov::scan(cfg.model, ctrl, l.axis, l.values, {l.alpha, l.sigma, l.k},
                                  cfg.wolf.N, cfg.base_seed, w);
  s.table("lyapunov_scan.csv", {"value", "L_mean", "L_stderr", "n_excluded"}, scan_rows(pts));
  s.note(format("N=%zu steps_per_period=%zu calibration=%s delay_history=%s", cfg.wolf.N,
                w.steps_per_period, name(w.calibration),
                w.delay_history == lyapunov::DelayHistory::Rescaled ? "rescaled" : "common"));
  for (const auto& p : pts) {
    s.note(format("value %g: L = %.5f +- %.5f (%s)", p.value, p.estimate.mean, p.estimate.std_error,
                  lyapunov::to_string(lyapunov::classify(p.estimate))));
  }
  if (const auto z = lyapunov::zero_crossing(pts)) s.note(format("zero crossing near %.5f", *z));

  std::string gp = gnuplot_header("Mean largest Lyapunov exponent", "fig5_lyapunov.png");
  gp += "set xlabel 'scan value'\nset ylabel 'L'\nset xzeroaxis\n"
        "plot 'lyapunov_scan.csv' skip 1 using 1:2:3 with yerrorlines title 'mean L'\n";
  s.text("fig5_lyapunov.gp", gp);
}

void run_control_scan(const RunConfig& cfg, Session& s) {
  const auto& c = cfg.control;
  const double t_d = c.t_d.value_or(cfg.model.forcing_period());
  const auto w = wolf_config(cfg);
  const auto pts = lyapunov::scan(cfg.model, sde::ControllerConfig{0.0, t_d},
                                  lyapunov::ScanAxis::Gain, c.gains, {c.alpha, c.sigma, 0.0},
                                  cfg.wolf.N, cfg.base_seed, w);
  s.table("control_scan.csv", {"value", "L_mean", "L_stderr", "n_excluded"}, scan_rows(pts));
  s.note(format("sigma=%g alpha=%g t_d=%.10g N=%zu", c.sigma, c.alpha, t_d, cfg.wolf.N));
  for (const auto& p : pts) {
    s.note(format("k %g: L = %.5f +- %.5f", p.value, p.estimate.mean, p.estimate.std_error));
  }
  if (const auto z = lyapunov::zero_crossing(pts)) {
    s.note(format("zero crossing near k = %.5f", *z));
  } else {
    s.note("mean L does not cross zero on this grid");
  }
  if (pts.size() >= 2) s.note(format("Spearman(k, L) = %.4f", lyapunov::spearman(pts)));
  try {
    const auto a = model::reduce_to_duffing(cfg.model);
    s.note(format("Melnikov critical gain k_c = %.6g",
                  melnikov::critical_gain(cfg.model, a, c.alpha, c.sigma, t_d,
                                          cfg.threshold.quadrature)));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotChaotic) throw;
    s.note(std::string("Melnikov critical gain: ") + e.what());
  }

  // Controlled trajectories for the phase diagrams.
  const auto grid = integration_grid(cfg);
  auto xi = grid_noise(cfg, grid, c.alpha, c.sigma);
  std::string panels;
  for (std::size_t i = 0; i < c.show_gains.size(); ++i) {
    const auto out = sde::integrate(cfg.model, xi ? &*xi : nullptr, c.sigma,
                                    sde::ControllerConfig{c.show_gains[i], t_d},
                                    cfg.integration.ic, grid, cfg.base_seed);
    if (out.status == sde::RunStatus::PullIn) {
      s.note(format("k=%g trajectory pulled in at step %zu", c.show_gains[i], out.pull_in_step));
    }
    const auto tr = sde::discard_transient(out.trajectory, cfg.model.omega,
                                           cfg.integration.transient_periods);
    const std::string file = format("controlled_%zu.csv", i);
    s.table(file, {"t", "x", "y"}, trajectory_rows(tr, cfg.integration.stride));
    panels += format("set title 'k = %g'\nplot '%s' skip 1 using 2:3 with dots notitle\n",
                     c.show_gains[i], file.c_str());
  }

  std::string gp = gnuplot_header("Lyapunov exponent versus feedback gain", "fig5b_control.png");
  gp += "set xlabel 'k'\nset ylabel 'L'\nset xzeroaxis\n"
        "plot 'control_scan.csv' skip 1 using 1:2:3 with yerrorlines title 'mean L'\n";
  s.text("fig5b_control.gp", gp);

  std::string gp6 = gnuplot_header("Controlled phase diagrams", "fig6_controlled.png");
  gp6 += format("set multiplot layout 1,%zu\nset xlabel 'x'\nset ylabel 'y'\n",
                std::max<std::size_t>(1, c.show_gains.size()));
  gp6 += panels + "unset multiplot\n";
  s.text("fig6_controlled.gp", gp6);
}

}  // namespace

CommandReport run(Command command, const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  CommandReport report;
  report.command = std::string(to_string(command));
  report.inputs_digest = cfg.inputs_digest(report.command);

  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + cfg.output_dir.string());

  Session session(cfg.output_dir, report);
  try {
    switch (command) {
      case Command::Noise: run_noise(cfg, session); break;
      case Command::Homoclinic: run_homoclinic(cfg, session); break;
      case Command::Threshold: run_threshold(cfg, session); break;
      case Command::Simulate: run_simulate(cfg, session); break;
      case Command::Lyapunov: run_lyapunov(cfg, session); break;
      case Command::ControlScan: run_control_scan(cfg, session); break;
    }
    report.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    json j;
    j["command"] = report.command;
    j["inputs_digest"] = report.inputs_digest;
    j["config"] = json::parse(cfg.resolved_json());
    j["outputs"] = json::array();
    for (const auto& o : report.outputs) {
      j["outputs"].push_back({{"path", o.path},
                              {"rows", o.rows ? json(*o.rows) : json(nullptr)},
                              {"sha256", o.sha256}});
    }
    j["wall_time"] = report.wall_time;
    j["notes"] = report.notes;
    session.text(report.command + ".report.json", j.dump(2) + "\n", false);
  } catch (...) {
    session.rollback();
    throw;
  }
  return report;
}

}  // namespace memschaos::cli
