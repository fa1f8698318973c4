#include "memschaos/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "memschaos/error.hpp"

namespace memschaos::model {

double ResonatorParams::forcing_period() const { return 2.0 * std::numbers::pi / omega; }

void ResonatorParams::validate() const {
  std::ostringstream msg;
  if (!(epsilon > 0.0)) msg << "epsilon must be > 0; ";
  if (!(omega > 0.0)) msg << "omega must be > 0; ";
  if (!(beta > 0.0)) msg << "beta must be > 0; ";
  if (!(gamma > 0.0)) msg << "gamma must be > 0; ";
  if (!(mu >= 0.0)) msg << "mu must be >= 0; ";
  if (!std::isfinite(delta) || !std::isfinite(A)) msg << "delta and A must be finite; ";
  if (!msg.str().empty()) throw Error(ErrorKind::InvariantViolation, msg.str());
}

ResonatorParams nondimensionalize(const PhysicalParams& p, double epsilon) {
  if (!(p.m > 0.0) || !(p.k1 > 0.0) || !(p.d > 0.0) || !(p.Vb > 0.0)) {
    throw Error(ErrorKind::NonPositive, "m, k1, d and Vb must all be > 0");
  }
  if (!(p.Vac >= 0.0)) throw Error(ErrorKind::NonPositive, "Vac must be >= 0");
  const double w0_sq = p.k1 / p.m;
  const double w0 = std::sqrt(w0_sq);
  ResonatorParams r;
  r.delta = 1.0;
  r.beta = p.k3 * p.d * p.d / (p.m * w0_sq);
  r.gamma = p.C0 * p.Vb * p.Vb / (2.0 * p.m * w0_sq * p.d * p.d * p.d);
  r.A = 2.0 * r.gamma * p.Vac / p.Vb;
  r.omega = p.Omega / w0;
  r.mu = p.b / (p.m * w0);
  r.epsilon = epsilon;
  return r;
}

DuffingApprox reduce_to_duffing(const ResonatorParams& p) {
  if (!(p.gamma > p.delta / 4.0) || !(p.gamma < p.beta / 8.0)) {
    std::ostringstream msg;
    msg << "gamma=" << p.gamma << " outside the bistable window (" << p.delta / 4.0 << ", "
        << p.beta / 8.0 << ")";
    throw Error(ErrorKind::NotBistable, msg.str());
  }
  DuffingApprox a;
  a.kappa = 4.0 * p.gamma - p.delta;
  a.lambda = p.beta - 8.0 * p.gamma;
  a.x_p = std::sqrt(2.0 * a.kappa / a.lambda);
  a.Lambda = std::sqrt(2.0 / a.lambda);
  a.sqrt_kappa = std::sqrt(a.kappa);
  if (!(a.x_p < 1.0)) {
    throw Error(ErrorKind::GapExceeded, "homoclinic apex x_p=" + std::to_string(a.x_p) + " >= 1");
  }
  return a;
}

double potential_full(const ResonatorParams& p, double x) {
  if (!(std::abs(x) < 1.0)) throw Error(ErrorKind::Singular, "|x| >= 1 in potential_full");
  // 1/(1-x) + 1/(1+x) - 2 = 2x^2/(1-x^2), written without cancellation.
  const double x2 = x * x;
  return 0.5 * p.delta * x2 + 0.25 * p.beta * x2 * x2 - p.gamma * 2.0 * x2 / (1.0 - x2);
}

double potential_approx(const DuffingApprox& a, double x) {
  const double x2 = x * x;
  return -0.5 * a.kappa * x2 + 0.25 * a.lambda * x2 * x2;
}

double hamiltonian_full(const ResonatorParams& p, State s) {
  return 0.5 * s.y * s.y + potential_full(p, s.x);
}

double hamiltonian_approx(const DuffingApprox& a, State s) {
  return 0.5 * s.y * s.y + potential_approx(a, s.x);
}

Derivative vector_field(const ResonatorParams& p, State s, double t, double xi, double f_ctrl) {
  if (!(std::abs(s.x) < 1.0)) throw Error(ErrorKind::Singular, "|x| >= 1 in vector_field");
  return {s.y, acceleration(p, s.x, s.y, std::sin(p.omega * t), xi + f_ctrl)};
}

State homoclinic(const DuffingApprox& a, double t, Branch branch) {
  const double u = a.sqrt_kappa * t;
  const double sech = 1.0 / std::cosh(u);
  const double sign = branch == Branch::Plus ? 1.0 : -1.0;
  return {sign * a.x_p * sech, -sign * a.sqrt_kappa * a.x_p * sech * std::tanh(u)};
}

Equilibria equilibria(const DuffingApprox& a) {
  const double xc = std::sqrt(a.kappa / a.lambda);
  return {State{0.0, 0.0}, {State{xc, 0.0}, State{-xc, 0.0}}};
}

double full_center(const ResonatorParams& p) {
  // The force is positive just right of the saddle when 4 gamma > delta; scan
  // outward for the first sign change, then bisect.
  if (!(4.0 * p.gamma > p.delta)) {
    throw Error(ErrorKind::NotBistable, "origin is not a saddle (4 gamma <= delta)");
  }
  constexpr int kScan = 4000;
  double lo = 1e-6;
  double hi = lo;
  bool found = false;
  for (int i = 1; i < kScan; ++i) {
    hi = static_cast<double>(i) / kScan;
    if (conservative_force(p, hi) <= 0.0) {
      found = true;
      break;
    }
    lo = hi;
  }
  if (!found) throw Error(ErrorKind::NotBistable, "no center of the full system in (0, 1)");
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (conservative_force(p, mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace memschaos::model
