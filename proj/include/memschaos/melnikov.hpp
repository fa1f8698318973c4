#pragma once

// Mean-square stochastic Melnikov analysis on the reduced homoclinic orbit
//
//   x0(t) = x_p sech(sqrt(kappa) t),  y0(t) = -sqrt(kappa) x_p sech tanh,
//
// with budget terms
//   I_d = -mu_bar * integral y0^2                = -(2/3) mu_bar sqrt(kappa) x_p^2
//   I_p = A_bar * integral y0 sin(w(t+t0))/(1-x0)^2 = C_p cos(w t0)
//   Var(I_s) / sigma^2 = integral |H(w)|^2 |w|^-alpha dw
//   I_t = k_bar * integral y0 (y0(t - t_d) - y0)
//
// Chaos onset (mean square, worst t0):  I_d^2 + C_p^2 = sigma^2 Var/sigma^2.
// Suppression by delayed feedback:      I_d^2 + I_t^2 = C_p^2 + sigma^2 Var/sigma^2.

#include <optional>

#include "memschaos/model.hpp"

namespace memschaos::melnikov {

struct QuadratureConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  // Frequency truncation; 0 selects the value where sech^2 drops below 1e-16.
  double omega_cutoff = 0.0;
};

// sech^2(pi w / (2 sqrt(kappa))) < 1e-16 for |w| beyond this, i.e. the
// integrand tail decays like exp(-pi |w| / sqrt(kappa)).
double default_omega_cutoff(const model::DuffingApprox& a);

struct MelnikovTerms {
  double I_d = 0.0;
  double C_p = 0.0;
  double var_factor = 0.0;
  double I_t = 0.0;  // 0 unless a controller is given
};

struct ThresholdPoint {
  double alpha = 0.0;
  double sigma_c = 0.0;
};

double damping_term(const model::DuffingApprox& a, double mu_bar);

// |A_bar integral y0(t) sin(w t) / (1 - x0(t))^2 dt| by adaptive quadrature.
// Throws Error{QuadratureFailure}.
double forcing_amplitude(const model::ResonatorParams& p, const model::DuffingApprox& a,
                         const QuadratureConfig& q = {},
                         model::Branch branch = model::Branch::Plus);

// Literal closed-form rendering of the forcing amplitude with w_bar read as
// w / sqrt(kappa). Kept only for a logged comparison with forcing_amplitude.
double forcing_amplitude_closed_form(const model::ResonatorParams& p,
                                     const model::DuffingApprox& a);

// |H(w)| = Lambda pi |w| sech(pi w / (2 sqrt(kappa))).
double response_magnitude(const model::DuffingApprox& a, double omega);

// Lambda^2 pi^2 integral sech^2(pi w/(2 sqrt(kappa))) |w|^(2-alpha) dw over
// |w| <= cutoff. Throws Error{InvalidSpec} for alpha outside [0,2] and
// Error{QuadratureFailure}.
double noise_variance_factor(const model::DuffingApprox& a, double alpha,
                             const QuadratureConfig& q = {});

ThresholdPoint chaos_threshold(const model::ResonatorParams& p, const model::DuffingApprox& a,
                               double alpha, const QuadratureConfig& q = {});

// R(t_d) = integral y0(t) y0(t - t_d) dt.
double delay_correlation(const model::DuffingApprox& a, double t_d,
                         const QuadratureConfig& q = {});

double delay_term(const model::DuffingApprox& a, double k_bar, double t_d,
                  const QuadratureConfig& q = {});

// Smallest physical gain k = epsilon * k_bar meeting the suppression
// criterion, by bracketing and bisection on k_bar. Throws Error{NotChaotic}
// when sigma <= sigma_c and Error{NoSuppression} when I_t vanishes
// identically (t_d = 0).
double critical_gain(const model::ResonatorParams& p, const model::DuffingApprox& a, double alpha,
                     double sigma, double t_d, const QuadratureConfig& q = {});

// All four terms; I_t uses k_bar = k / epsilon when a gain/delay is given.
struct DelayGain {
  double k = 0.0;  // physical gain
  double t_d = 0.0;
};
MelnikovTerms terms(const model::ResonatorParams& p, const model::DuffingApprox& a, double alpha,
                    std::optional<DelayGain> ctrl = std::nullopt, const QuadratureConfig& q = {});

}  // namespace memschaos::melnikov
