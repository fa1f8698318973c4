#pragma once

// Dimensionless electrostatically actuated resonator
//
//   x'' + mu x' + delta x + beta x^3
//       = gamma (1/(1-x)^2 - 1/(1+x)^2) + A sin(omega t)/(1-x)^2 + noise + control
//
// and its bistable Duffing reduction V(x) = -kappa x^2/2 + lambda x^4/4 used
// by the Melnikov analytics. Simulations always use the full field.

#include <utility>

namespace memschaos::model {

struct PhysicalParams {
  double m = 1.0;      // lumped mass
  double b = 0.0;      // damping coefficient
  double k1 = 1.0;     // linear stiffness
  double k3 = 0.0;     // cubic stiffness
  double C0 = 0.0;     // capacitance at z = 0
  double d = 1.0;      // gap width
  double Vb = 1.0;     // bias voltage
  double Vac = 0.0;    // AC amplitude
  double Omega = 1.0;  // AC angular frequency
};

struct ResonatorParams {
  double delta = 1.0;
  double beta = 12.0;
  double gamma = 0.26;
  double mu = 0.01;
  double epsilon = 0.1;
  double A = 2.0 * 0.26 * 0.13 / 3.8;  // 2 gamma Vac / Vb with Vb = 3.8, Vac = 0.13
  double omega = 0.5;

  double mu_bar() const { return mu / epsilon; }
  double A_bar() const { return A / epsilon; }
  double forcing_period() const;

  // Throws Error{InvariantViolation}.
  void validate() const;
};

struct DuffingApprox {
  double kappa = 0.0;
  double lambda = 0.0;
  double x_p = 0.0;     // positive root of the quartic potential
  double Lambda = 0.0;  // sqrt(2 / lambda)
  double sqrt_kappa = 0.0;
};

struct State {
  double x = 0.0;
  double y = 0.0;
};

struct Derivative {
  double dx = 0.0;
  double dy = 0.0;
};

enum class Branch { Plus, Minus };

struct Equilibria {
  State saddle;
  std::pair<State, State> centers;
};

// Displacements at or beyond this magnitude count as pull-in.
inline constexpr double kPullInLimit = 0.999;

// delta = 1 identically. Throws Error{NonPositive}.
ResonatorParams nondimensionalize(const PhysicalParams& p, double epsilon);

// Throws Error{NotBistable} outside delta/4 < gamma < beta/8 and
// Error{GapExceeded} when x_p >= 1.
DuffingApprox reduce_to_duffing(const ResonatorParams& p);

// Full potential, zero at x = 0. Throws Error{Singular} for |x| >= 1.
double potential_full(const ResonatorParams& p, double x);
double potential_approx(const DuffingApprox& a, double x);

// Unperturbed Hamiltonian y^2/2 + V(x) of the full and reduced systems.
double hamiltonian_full(const ResonatorParams& p, State s);
double hamiltonian_approx(const DuffingApprox& a, State s);

// Restoring plus electrostatic force of the autonomous part, without damping.
inline double conservative_force(const ResonatorParams& p, double x) {
  const double um = 1.0 / (1.0 - x);
  const double up = 1.0 / (1.0 + x);
  return -p.delta * x - p.beta * x * x * x + p.gamma * (um * um - up * up);
}

// Unchecked acceleration for the integrator hot loop; |x| < 1 is the caller's job.
inline double acceleration(const ResonatorParams& p, double x, double y, double sin_wt,
                           double additive) {
  const double um = 1.0 / (1.0 - x);
  const double up = 1.0 / (1.0 + x);
  return -p.delta * x - p.beta * x * x * x - p.mu * y + p.gamma * (um * um - up * up) +
         p.A * sin_wt * um * um + additive;
}

// xi is the full additive noise term (already scaled by sigma); f_ctrl is the
// control force. Throws Error{Singular} for |x| >= 1.
Derivative vector_field(const ResonatorParams& p, State s, double t, double xi, double f_ctrl);

State homoclinic(const DuffingApprox& a, double t, Branch branch = Branch::Plus);

// Reduced-system saddle (0,0) and centers (+-sqrt(kappa/lambda), 0).
Equilibria equilibria(const DuffingApprox& a);

// Positive center of the full unforced system, by bisection on the force
// balance to 1e-12. Throws Error{NotBistable} when none exists in (0, 1).
double full_center(const ResonatorParams& p);

}  // namespace memschaos::model
