#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "memschaos/error.hpp"
#include "memschaos/melnikov.hpp"
#include "memschaos/noise.hpp"

namespace mc = memschaos;
namespace md = memschaos::model;
namespace ml = memschaos::melnikov;
using std::numbers::pi;

namespace {

const md::ResonatorParams kRef{};
const md::DuffingApprox kA = md::reduce_to_duffing(kRef);

double closed_var(double alpha) {
  const double a = pi / (2.0 * kA.sqrt_kappa);
  const double pre = kA.Lambda * kA.Lambda * pi * pi;
  if (alpha == 0.0) return pre * (pi * pi / 6.0) / (a * a * a);
  if (alpha == 1.0) return pre * 2.0 * std::log(2.0) / (a * a);
  return pre * 2.0 / a;
}

template <class F>
mc::ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const mc::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return mc::ErrorKind::IoError;
}

}  // namespace

TEST(Damping, Values) {
  EXPECT_EQ(ml::damping_term(kA, 0.0), 0.0);
  EXPECT_NEAR(ml::damping_term(kA, kRef.mu_bar()), -1.0753e-4, 1e-8);
  EXPECT_DOUBLE_EQ(ml::damping_term(kA, 0.2), 2.0 * ml::damping_term(kA, 0.1));
}

TEST(Forcing, ZeroAndLinear) {
  auto p = kRef;
  p.A = 0.0;
  EXPECT_EQ(ml::forcing_amplitude(p, kA), 0.0);
  const double c1 = ml::forcing_amplitude(kRef, kA);
  EXPECT_GT(c1, 0.0);
  p.A = 2.0 * kRef.A;
  EXPECT_NEAR(ml::forcing_amplitude(p, kA) / c1, 2.0, 1e-9);
}

TEST(Forcing, BranchesAgreeToLeadingOrderOnly) {
  // Flipping the branch flips y0 but not the x0*y0 correction from
  // (1 -+ x0)^-2, so the magnitudes differ at relative order x_p.
  const double plus = ml::forcing_amplitude(kRef, kA, {}, md::Branch::Plus);
  const double minus = ml::forcing_amplitude(kRef, kA, {}, md::Branch::Minus);
  const double asym = std::abs(plus - minus) / (plus + minus);
  EXPECT_GT(asym, 0.0);
  EXPECT_LT(asym, 4.0 * kA.x_p);
  // Smaller x_p at the same omega / sqrt(kappa) shrinks the asymmetry. With
  // omega fixed instead, both terms are exponentially small and no order holds.
  auto p = kRef;
  p.gamma = 0.2525;
  p.omega = 0.25;
  const auto a = md::reduce_to_duffing(p);
  const double pp = ml::forcing_amplitude(p, a, {}, md::Branch::Plus);
  const double mm = ml::forcing_amplitude(p, a, {}, md::Branch::Minus);
  EXPECT_LT(std::abs(pp - mm) / (pp + mm), 4.0 * a.x_p);
  EXPECT_LT(std::abs(pp - mm) / (pp + mm), asym);
}

TEST(Forcing, ClosedFormComparisonIsLoggedNotMerged) {
  const double quad = ml::forcing_amplitude(kRef, kA);
  const double closed = ml::forcing_amplitude_closed_form(kRef, kA);
  ASSERT_TRUE(std::isfinite(closed));
  // The closed form with w_bar = w / sqrt(kappa) reproduces the Minus branch,
  // not the Plus branch the analysis uses.
  EXPECT_GT(std::abs(closed - quad) / quad, 0.3);
  EXPECT_NEAR(closed / ml::forcing_amplitude(kRef, kA, {}, md::Branch::Minus), 1.0, 1e-6);
}

TEST(Response, Values) {
  EXPECT_EQ(ml::response_magnitude(kA, 0.0), 0.0);
  EXPECT_NEAR(ml::response_magnitude(kA, 0.5), 2.778e-2, 1e-4);
  EXPECT_DOUBLE_EQ(ml::response_magnitude(kA, -0.7), ml::response_magnitude(kA, 0.7));
}

TEST(VarianceFactor, ClosedForms) {
  for (double alpha : {0.0, 1.0, 2.0}) {
    EXPECT_NEAR(ml::noise_variance_factor(kA, alpha) / closed_var(alpha), 1.0, 1e-6) << alpha;
  }
  EXPECT_NEAR(ml::noise_variance_factor(kA, 0.0), 6.7561e-3, 1e-7);
  EXPECT_NEAR(ml::noise_variance_factor(kA, 1.0), 4.4720e-2, 1e-6);
  EXPECT_NEAR(ml::noise_variance_factor(kA, 2.0), 5.0670e-1, 1e-5);
}

TEST(VarianceFactor, IncreasingInAlpha) {
  double prev = 0.0;
  for (int i = 0; i <= 20; ++i) {
    const double v = ml::noise_variance_factor(kA, 0.1 * i);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(VarianceFactor, RejectsAlphaOutsideRange) {
  EXPECT_EQ(kind_of([] { ml::noise_variance_factor(kA, 2.1); }), mc::ErrorKind::InvalidSpec);
  EXPECT_EQ(kind_of([] { ml::noise_variance_factor(kA, -0.1); }), mc::ErrorKind::InvalidSpec);
  ml::QuadratureConfig bad;
  bad.rel_tol = 0.0;
  EXPECT_EQ(kind_of([&] { ml::noise_variance_factor(kA, 1.0, bad); }), mc::ErrorKind::InvalidSpec);
}

TEST(VarianceFactor, MonteCarloSmall) {
  // Quick version of the oracle: 400 unit-PSD paths, alpha = 1.
  const double dt = 0.1;
  const std::size_t n = 1 << 14;
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j) {
    w[j] = md::homoclinic(kA, static_cast<double>(j) * dt - 0.5 * n * dt).y * dt;
  }
  double s = 0.0, ss = 0.0;
  const int paths = 400;
  for (int k = 0; k < paths; ++k) {
    const auto xi = mc::noise::generate(
        {1.0, n, dt, static_cast<std::uint64_t>(k), mc::noise::Calibration::UnitPsdCoefficient});
    double I = 0.0;
    for (std::size_t j = 0; j < n; ++j) I += w[j] * xi.samples[j];
    s += I;
    ss += I * I;
  }
  const double var = (ss - s * s / paths) / (paths - 1);
  EXPECT_NEAR(var / ml::noise_variance_factor(kA, 1.0), 1.0, 0.2);
}

TEST(Threshold, DecreasingShapeAndRatio) {
  double prev = INFINITY;
  for (int i = 0; i <= 20; ++i) {
    const auto pt = ml::chaos_threshold(kRef, kA, 0.1 * i);
    EXPECT_LT(pt.sigma_c, prev);
    EXPECT_GT(pt.sigma_c, 0.0);
    prev = pt.sigma_c;
  }
  const double r =
      ml::chaos_threshold(kRef, kA, 0.0).sigma_c / ml::chaos_threshold(kRef, kA, 2.0).sigma_c;
  EXPECT_NEAR(r, 8.66, 0.0866);
  EXPECT_NEAR(r, std::sqrt(closed_var(2.0) / closed_var(0.0)), 1e-6);
}

TEST(Threshold, ZeroBudget) {
  auto p = kRef;
  p.A = 0.0;
  p.mu = 0.0;
  EXPECT_EQ(ml::chaos_threshold(p, kA, 1.0).sigma_c, 0.0);
}

TEST(Delay, TrivialCases) {
  EXPECT_EQ(ml::delay_term(kA, 0.0, 5.0), 0.0);
  EXPECT_EQ(ml::delay_term(kA, 3.0, 0.0), 0.0);
  EXPECT_EQ(kind_of([] { ml::delay_term(kA, -1.0, 1.0); }), mc::ErrorKind::InvalidSpec);
}

TEST(Delay, LongDelayLimit) {
  const double t_d = 60.0 / kA.sqrt_kappa;
  EXPECT_NEAR(ml::delay_term(kA, 1.0, t_d), -1.0753e-3, 1e-7);
  EXPECT_NEAR(ml::delay_term(kA, 1.0, t_d), 10.0 * ml::damping_term(kA, 0.1), 1e-8);
  EXPECT_NEAR(ml::delay_correlation(kA, 0.0), (2.0 / 3.0) * kA.sqrt_kappa * kA.x_p * kA.x_p,
              1e-12);
}

TEST(Delay, SignAndLinearity) {
  for (double t_d : {0.5, 2.0, 4.0 * pi, 30.0, 100.0}) {
    const double one = ml::delay_term(kA, 1.0, t_d);
    EXPECT_LE(one, 0.0) << t_d;
    EXPECT_NEAR(ml::delay_term(kA, 2.5, t_d), 2.5 * one, 1e-15);
  }
}

TEST(CriticalGain, Errors) {
  const double T = kRef.forcing_period();
  EXPECT_EQ(kind_of([&] { ml::critical_gain(kRef, kA, 0.0, 0.01, T); }), mc::ErrorKind::NotChaotic);
  EXPECT_EQ(kind_of([&] { ml::critical_gain(kRef, kA, 0.0, 0.2, 0.0); }),
            mc::ErrorKind::NoSuppression);
}

TEST(CriticalGain, LinearInDeficit) {
  const double T = kRef.forcing_period();
  const double I_d = ml::damping_term(kA, kRef.mu_bar());
  const double C_p = ml::forcing_amplitude(kRef, kA);
  const double var = ml::noise_variance_factor(kA, 0.0);
  const auto deficit = [&](double s) { return std::sqrt(C_p * C_p + s * s * var - I_d * I_d); };
  const double k1 = ml::critical_gain(kRef, kA, 0.0, 0.1, T);
  const double k2 = ml::critical_gain(kRef, kA, 0.0, 0.3, T);
  EXPECT_NEAR(k2 / k1, deficit(0.3) / deficit(0.1), 1e-9);
  const double slope = ml::delay_term(kA, 1.0, T);
  EXPECT_NEAR(k1, kRef.epsilon * deficit(0.1) / std::abs(slope), 1e-10);
}

TEST(CriticalGain, VanishesAtThresholdWithoutForcing) {
  auto p = kRef;
  p.A = 0.0;
  const double sc = ml::chaos_threshold(p, kA, 1.0).sigma_c;
  const double k = ml::critical_gain(p, kA, 1.0, sc * (1.0 + 1e-8), p.forcing_period());
  EXPECT_LT(k, 1e-4);
  EXPECT_GT(k, 0.0);
}

TEST(CriticalGain, ForcedLimitAtThreshold) {
  // With A != 0 the limit is sqrt(2) C_p epsilon / |I_t per unit k_bar|, not 0.
  const double T = kRef.forcing_period();
  const double sc = ml::chaos_threshold(kRef, kA, 0.0).sigma_c;
  const double k = ml::critical_gain(kRef, kA, 0.0, sc * (1.0 + 1e-10), T);
  const double C_p = ml::forcing_amplitude(kRef, kA);
  EXPECT_NEAR(k, std::sqrt(2.0) * C_p * kRef.epsilon / std::abs(ml::delay_term(kA, 1.0, T)),
              1e-6);
}

TEST(Terms, Bundle) {
  const auto m = ml::terms(kRef, kA, 1.0, ml::DelayGain{0.06, kRef.forcing_period()});
  EXPECT_LE(m.I_d, 0.0);
  EXPECT_GT(m.C_p, 0.0);
  EXPECT_GT(m.var_factor, 0.0);
  EXPECT_LT(m.I_t, 0.0);
  EXPECT_NEAR(m.I_t, ml::delay_term(kA, 0.6, kRef.forcing_period()), 1e-15);
  EXPECT_EQ(ml::terms(kRef, kA, 1.0).I_t, 0.0);
}
