#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "memschaos/error.hpp"
#include "memschaos/sde.hpp"

namespace mc = memschaos;
namespace md = memschaos::model;
namespace sd = memschaos::sde;
using std::numbers::pi;

namespace {

const md::ResonatorParams kRef{};

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

mc::noise::NoiseSequence white(std::size_t n, double dt, std::uint64_t seed) {
  return mc::noise::generate({0.0, n, dt, seed});
}

md::State endpoint(std::size_t spp, std::size_t periods) {
  const auto grid = sd::IntegrationGrid::per_period(kRef, spp, periods);
  return sd::integrate(kRef, nullptr, 0.0, std::nullopt, {0.0635, 0.0}, grid).trajectory.states.back();
}

bool same(const sd::Trajectory& a, const sd::Trajectory& b) {
  if (a.states.size() != b.states.size()) return false;
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    if (a.states[i].x != b.states[i].x || a.states[i].y != b.states[i].y) return false;
    if (a.times[i] != b.times[i]) return false;
  }
  return true;
}

}  // namespace

TEST(Integrate, DampedAutonomousSettlesAndLosesEnergy) {
  auto p = kRef;
  p.A = 0.0;
  p.mu = 0.05;
  const double xc = md::full_center(p);
  const auto grid = sd::IntegrationGrid::per_period(p, 400, 200);
  const auto out = sd::integrate(p, nullptr, 0.0, std::nullopt, {xc + 0.01, 0.0}, grid);
  ASSERT_EQ(out.status, sd::RunStatus::Completed);
  const auto& s = out.trajectory.states;
  EXPECT_NEAR(s.back().x, xc, 1e-6);
  EXPECT_NEAR(s.back().y, 0.0, 1e-6);
  double prev = md::hamiltonian_full(p, s.front());
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double h = md::hamiltonian_full(p, s[i]);
    ASSERT_LE(h, prev + 1e-15) << "step " << i;
    prev = h;
  }
}

TEST(Integrate, SecondOrderConvergence) {
  const auto ref = endpoint(3200, 10);
  const auto coarse = endpoint(200, 10);
  const auto fine = endpoint(400, 10);
  const double e1 = std::hypot(coarse.x - ref.x, coarse.y - ref.y);
  const double e2 = std::hypot(fine.x - ref.x, fine.y - ref.y);
  EXPECT_GT(e1 / e2, 3.0);
  EXPECT_LT(e1 / e2, 5.0);
}

TEST(Integrate, ZeroGainMatchesUncontrolledBitwise) {
  const auto grid = sd::IntegrationGrid::per_period(kRef, 400, 20);
  const auto xi = white(grid.n_steps, grid.dt, 4);
  const auto a = sd::integrate(kRef, &xi, 0.1, std::nullopt, {0.0635, 0.0}, grid, 4);
  const auto b = sd::integrate(kRef, &xi, 0.1, sd::ControllerConfig{0.0, kRef.forcing_period()},
                               {0.0635, 0.0}, grid, 4);
  EXPECT_TRUE(same(a.trajectory, b.trajectory));
}

TEST(Integrate, ZeroSigmaBypassesNoise) {
  const auto grid = sd::IntegrationGrid::per_period(kRef, 400, 20);
  const auto xi = white(grid.n_steps, grid.dt, 4);
  const auto a = sd::integrate(kRef, &xi, 0.0, std::nullopt, {0.0635, 0.0}, grid);
  const auto b = sd::integrate(kRef, nullptr, 0.0, std::nullopt, {0.0635, 0.0}, grid);
  EXPECT_TRUE(same(a.trajectory, b.trajectory));
}

TEST(Integrate, Deterministic) {
  const auto grid = sd::IntegrationGrid::per_period(kRef, 400, 20);
  const auto xi = white(grid.n_steps, grid.dt, 9);
  const sd::ControllerConfig c{0.05, kRef.forcing_period()};
  const auto a = sd::integrate(kRef, &xi, 0.1, c, {0.0635, 0.0}, grid, 9);
  const auto b = sd::integrate(kRef, &xi, 0.1, c, {0.0635, 0.0}, grid, 9);
  EXPECT_TRUE(same(a.trajectory, b.trajectory));
}

TEST(Integrate, GridErrors) {
  const auto grid = sd::IntegrationGrid::per_period(kRef, 400, 2);
  const auto short_xi = white(grid.n_steps - 1, grid.dt, 1);
  EXPECT_EQ(kind_of([&] { sd::integrate(kRef, &short_xi, 0.1, std::nullopt, {}, grid); }),
            mc::ErrorKind::GridMismatch);
  const auto other_dt = white(grid.n_steps, 2.0 * grid.dt, 1);
  EXPECT_EQ(kind_of([&] { sd::integrate(kRef, &other_dt, 0.1, std::nullopt, {}, grid); }),
            mc::ErrorKind::GridMismatch);
  EXPECT_EQ(kind_of([&] {
              sd::integrate(kRef, nullptr, 0.0, sd::ControllerConfig{0.1, 1.2345 * grid.dt}, {},
                            grid);
            }),
            mc::ErrorKind::DelayNotOnGrid);
  EXPECT_EQ(kind_of([&] { sd::integrate(kRef, nullptr, 0.0, std::nullopt, {1.0, 0.0}, grid); }),
            mc::ErrorKind::Singular);
}

TEST(Integrate, PullInIsAnOutcome) {
  const auto grid = sd::IntegrationGrid::per_period(kRef, 400, 5);
  const auto out = sd::integrate(kRef, nullptr, 0.0, std::nullopt, {0.95, 0.0}, grid);
  ASSERT_EQ(out.status, sd::RunStatus::PullIn);
  EXPECT_GT(out.pull_in_step, 0u);
  EXPECT_EQ(out.trajectory.states.size(), out.pull_in_step);
  for (const auto& s : out.trajectory.states) EXPECT_LT(std::abs(s.x), md::kPullInLimit);
}

TEST(DelayLine, ReproducesManufacturedHistory) {
  const double dt = kRef.forcing_period() / 400.0;
  const std::size_t m = sd::delay_steps(kRef.forcing_period(), dt);
  ASSERT_EQ(m, 400u);
  const auto y = [&](long i) { return std::sin(kRef.omega * static_cast<double>(i) * dt); };
  sd::DelayLine line(m, y(0));
  for (long i = 0; i < 2000; ++i) {
    if (i >= static_cast<long>(m)) {
      ASSERT_EQ(line.delayed(0), y(i - static_cast<long>(m))) << i;
      ASSERT_EQ(line.delayed(1), y(i + 1 - static_cast<long>(m))) << i;
    } else {
      ASSERT_EQ(line.delayed(0), y(0));
    }
    line.push(y(i + 1));
  }
}

TEST(DelayLine, ControlledRunUsesExactLag) {
  // With t_d = T the feedback vanishes on the forced periodic orbit. The
  // corrector stage compares history with the predicted y, so the discrete
  // controlled orbit sits O(dt^2) off the free one.
  const auto gap = [](std::size_t spp) {
    const auto grid = sd::IntegrationGrid::per_period(kRef, spp, 600);
    const auto a = sd::integrate(kRef, nullptr, 0.0, std::nullopt, {0.0635, 0.0}, grid);
    const auto b = sd::integrate(kRef, nullptr, 0.0,
                                 sd::ControllerConfig{0.1, kRef.forcing_period()}, {0.0635, 0.0},
                                 grid);
    const auto& sa = a.trajectory.states.back();
    const auto& sb = b.trajectory.states.back();
    return std::hypot(sa.x - sb.x, sa.y - sb.y);
  };
  const double g1 = gap(400);
  const double g2 = gap(800);
  EXPECT_LT(g2, 3e-6);
  EXPECT_GT(g1 / g2, 3.0);
  EXPECT_LT(g1 / g2, 5.0);
}

TEST(DiscardTransient, Cases) {
  const auto grid = sd::IntegrationGrid::per_period(kRef, 20, 2500);
  sd::Trajectory tr;
  for (std::size_t i = 0; i <= grid.n_steps; ++i) {
    tr.times.push_back(static_cast<double>(i) * grid.dt);
    tr.states.push_back({static_cast<double>(i), 0.0});
  }
  const auto same_tr = sd::discard_transient(tr, kRef.omega, 0);
  EXPECT_EQ(same_tr.times.size(), tr.times.size());

  const auto cut = sd::discard_transient(tr, kRef.omega, 2400);
  EXPECT_GE(cut.times.front(), 2400.0 * 4.0 * pi * (1.0 - 1e-12));
  EXPECT_LT(cut.times.front(), 2400.0 * 4.0 * pi + grid.dt);
  EXPECT_EQ(cut.times.size(), cut.states.size());

  const auto twice = sd::discard_transient(sd::discard_transient(tr, kRef.omega, 1000), kRef.omega,
                                           1400);
  EXPECT_EQ(twice.times.size(), cut.times.size());
  EXPECT_EQ(twice.states.front().x, cut.states.front().x);

  EXPECT_EQ(kind_of([&] { sd::discard_transient(tr, kRef.omega, 2501); }), mc::ErrorKind::TooShort);
}

TEST(Sensitivity, ZeroOffsetGivesZeroSeparation) {
  const auto grid = sd::IntegrationGrid::per_period(kRef, 400, 50);
  const auto xi = white(grid.n_steps, grid.dt, 2);
  const auto pair = sd::sensitivity_pair(kRef, xi, 0.1, std::nullopt, {0.0635, 0.0}, {0.0, 0.0}, grid);
  for (double d : pair.separation) ASSERT_EQ(d, 0.0);
}

namespace {

double post_transient_max_separation(double sigma) {
  const auto grid = sd::IntegrationGrid::per_period(kRef, sd::kDefaultStepsPerPeriod, 2600, 2400);
  const auto xi = white(grid.n_steps, grid.dt, 1);
  const auto pair =
      sd::sensitivity_pair(kRef, xi, sigma, std::nullopt, {0.0635, 0.0}, {1e-6, 0.0}, grid, 1);
  EXPECT_EQ(pair.reference.status, sd::RunStatus::Completed);
  const std::size_t first = 2400 * sd::kDefaultStepsPerPeriod;
  double mx = 0.0;
  for (std::size_t i = first; i < pair.separation.size(); ++i) mx = std::max(mx, pair.separation[i]);
  return mx;
}

}  // namespace

TEST(Sensitivity, OrderedCaseStaysClose) {
  EXPECT_LT(post_transient_max_separation(0.03), 1e-5);
}

TEST(Sensitivity, ChaoticCaseSeparates) {
  EXPECT_GE(post_transient_max_separation(0.1), 0.01);
}

TEST(GridRefinement, StroboscopicSamplesStable) {
  const auto strobe = [](std::size_t spp) {
    const auto grid = sd::IntegrationGrid::per_period(kRef, spp, 2410, 2400);
    const auto out = sd::integrate(kRef, nullptr, 0.0, std::nullopt, {0.0635, 0.0}, grid);
    std::vector<md::State> s;
    for (std::size_t k = 2400; k <= 2410; ++k) s.push_back(out.trajectory.states[k * spp]);
    return s;
  };
  const auto a = strobe(400);
  const auto b = strobe(800);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_LT(std::abs(a[i].x - b[i].x), 1e-4);
    EXPECT_LT(std::abs(a[i].y - b[i].y), 1e-4);
  }
}

TEST(Homoclinic, FullFieldTracksReducedOrbit) {
  const auto a = md::reduce_to_duffing(kRef);
  const auto cmp = sd::compare_with_homoclinic(kRef, 60.0, 24000);
  EXPECT_FALSE(cmp.pulled_in);
  EXPECT_LT(cmp.max_deviation, 0.15 * a.x_p);
  EXPECT_EQ(cmp.full.times.size(), cmp.analytic.size());
  EXPECT_DOUBLE_EQ(cmp.full.times.front(), -60.0);
  EXPECT_NEAR(cmp.full.times.back(), 60.0, 1e-9);
}
