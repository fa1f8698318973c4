#include "memschaos/melnikov.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "memschaos/error.hpp"

namespace memschaos::melnikov {
namespace {

using std::numbers::pi;

// Beyond sqrt(kappa) t = 37.5 the orbit is below 1e-16 of its apex.
constexpr double kOrbitTail = 37.5;

void check(const QuadratureConfig& q) {
  if (!(q.rel_tol > 0.0) || !(q.abs_tol > 0.0) || !(q.omega_cutoff >= 0.0)) {
    throw Error(ErrorKind::InvalidSpec, "quadrature tolerances must be positive");
  }
}

template <class F>
double integrate(F f, double lo, double hi, const QuadratureConfig& q, const char* what) {
  // Non-const: the library's out-of-line integrate() drops the const qualifier.
  thread_local boost::math::quadrature::tanh_sinh<double> engine(15);
  double err = 0.0;
  double l1 = 0.0;
  const double value = engine.integrate(f, lo, hi, q.rel_tol, &err, &l1);
  if (!std::isfinite(value) || err > std::max(q.abs_tol, q.rel_tol * std::max(l1, 1e-300))) {
    std::ostringstream msg;
    msg << what << ": error estimate " << err << " exceeds tolerance (value " << value << ")";
    throw Error(ErrorKind::QuadratureFailure, msg.str());
  }
  return value;
}

double sech(double u) { return 1.0 / std::cosh(u); }

}  // namespace

double default_omega_cutoff(const model::DuffingApprox& a) {
  return std::acosh(1e8) * 2.0 * a.sqrt_kappa / pi;
}

double damping_term(const model::DuffingApprox& a, double mu_bar) {
  return -(2.0 / 3.0) * mu_bar * a.sqrt_kappa * a.x_p * a.x_p;
}

double forcing_amplitude(const model::ResonatorParams& p, const model::DuffingApprox& a,
                         const QuadratureConfig& q, model::Branch branch) {
  check(q);
  const double A_bar = p.A_bar();
  if (A_bar == 0.0) return 0.0;
  // y0 odd, (1 - x0)^-2 even, sin odd: the integrand is even in t.
  const auto f = [&](double t) {
    const auto s = model::homoclinic(a, t, branch);
    const double u = 1.0 / (1.0 - s.x);
    return s.y * std::sin(p.omega * t) * u * u;
  };
  const double half = integrate(f, 0.0, kOrbitTail / a.sqrt_kappa, q, "forcing amplitude");
  return std::abs(A_bar * 2.0 * half);
}

double forcing_amplitude_closed_form(const model::ResonatorParams& p,
                                     const model::DuffingApprox& a) {
  const double w_bar = p.omega / a.sqrt_kappa;
  const double xp = a.x_p;
  return std::abs(p.A_bar() * xp * 2.0 * pi * w_bar / std::sqrt(1.0 - xp * xp) *
                  std::sinh(-w_bar * std::acos(xp)) / std::sinh(w_bar * pi));
}

double response_magnitude(const model::DuffingApprox& a, double omega) {
  return a.Lambda * pi * std::abs(omega) * sech(pi * omega / (2.0 * a.sqrt_kappa));
}

double noise_variance_factor(const model::DuffingApprox& a, double alpha,
                             const QuadratureConfig& q) {
  check(q);
  if (!(alpha >= 0.0 && alpha <= 2.0)) {
    throw Error(ErrorKind::InvalidSpec, "alpha must lie in [0, 2]");
  }
  const double cutoff = q.omega_cutoff > 0.0 ? q.omega_cutoff : default_omega_cutoff(a);
  const double scale = pi / (2.0 * a.sqrt_kappa);
  const auto f = [&](double w) {
    const double s = sech(scale * w);
    return s * s * std::pow(w, 2.0 - alpha);
  };
  // Even integrand in |w|.
  const double half = integrate(f, 0.0, cutoff, q, "noise variance factor");
  return a.Lambda * a.Lambda * pi * pi * 2.0 * half;
}

ThresholdPoint chaos_threshold(const model::ResonatorParams& p, const model::DuffingApprox& a,
                               double alpha, const QuadratureConfig& q) {
  const double I_d = damping_term(a, p.mu_bar());
  const double C_p = forcing_amplitude(p, a, q);
  const double var = noise_variance_factor(a, alpha, q);
  return {alpha, std::sqrt((I_d * I_d + C_p * C_p) / var)};
}

double delay_correlation(const model::DuffingApprox& a, double t_d, const QuadratureConfig& q) {
  check(q);
  const double centre = 0.5 * t_d;
  const double reach = 0.5 * std::abs(t_d) + kOrbitTail / a.sqrt_kappa;
  const auto f = [&](double t) {
    return model::homoclinic(a, t).y * model::homoclinic(a, t - t_d).y;
  };
  // Two bumps at 0 and t_d; split there so each sits on a node cluster.
  const double lo = centre - reach;
  const double hi = centre + reach;
  const double a0 = std::min(0.0, t_d);
  const double a1 = std::max(0.0, t_d);
  double r = integrate(f, lo, a0, q, "delay correlation") +
             integrate(f, a1, hi, q, "delay correlation");
  if (a1 > a0) r += integrate(f, a0, a1, q, "delay correlation");
  return r;
}

double delay_term(const model::DuffingApprox& a, double k_bar, double t_d,
                  const QuadratureConfig& q) {
  if (!(k_bar >= 0.0) || !(t_d >= 0.0)) {
    throw Error(ErrorKind::InvalidSpec, "k_bar and t_d must be >= 0");
  }
  if (k_bar == 0.0 || t_d == 0.0) return 0.0;
  const double energy = (2.0 / 3.0) * a.sqrt_kappa * a.x_p * a.x_p;  // R(0)
  // Cauchy-Schwarz: R(t_d) <= R(0); clamp quadrature round-off.
  return k_bar * std::min(delay_correlation(a, t_d, q) - energy, 0.0);
}

double critical_gain(const model::ResonatorParams& p, const model::DuffingApprox& a, double alpha,
                     double sigma, double t_d, const QuadratureConfig& q) {
  const double I_d = damping_term(a, p.mu_bar());
  const double C_p = forcing_amplitude(p, a, q);
  const double var = noise_variance_factor(a, alpha, q);
  const double sigma_c = std::sqrt((I_d * I_d + C_p * C_p) / var);
  if (!(sigma > sigma_c)) {
    std::ostringstream msg;
    msg << "sigma=" << sigma << " does not exceed the threshold " << sigma_c;
    throw Error(ErrorKind::NotChaotic, msg.str());
  }
  const double slope = delay_term(a, 1.0, t_d, q);  // I_t per unit k_bar
  if (!(std::abs(slope) > q.abs_tol)) {
    throw Error(ErrorKind::NoSuppression, "delay term vanishes identically (t_d = 0)");
  }
  const double target = C_p * C_p + sigma * sigma * var;
  const auto gap = [&](double k_bar) {
    const double I_t = k_bar * slope;
    return I_d * I_d + I_t * I_t - target;
  };
  double lo = 0.0;
  double hi = 1.0;
  while (gap(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw Error(ErrorKind::NoSuppression, "no finite gain suffices");
  }
  while (hi - lo > 1e-13 * hi) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) < 0.0 ? lo : hi) = mid;
  }
  return p.epsilon * hi;
}

MelnikovTerms terms(const model::ResonatorParams& p, const model::DuffingApprox& a, double alpha,
                    std::optional<DelayGain> ctrl, const QuadratureConfig& q) {
  MelnikovTerms m;
  m.I_d = damping_term(a, p.mu_bar());
  m.C_p = forcing_amplitude(p, a, q);
  m.var_factor = noise_variance_factor(a, alpha, q);
  if (ctrl) m.I_t = delay_term(a, ctrl->k / p.epsilon, ctrl->t_d, q);
  return m;
}

}  // namespace memschaos::melnikov
