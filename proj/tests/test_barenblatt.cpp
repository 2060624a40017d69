#include <gtest/gtest.h>

#include <cmath>

#include "plap/barenblatt.hpp"

using namespace plap;

TEST(Barenblatt, ExponentsForCubicOneD) {
  const Barenblatt b(3.0, 1);
  EXPECT_DOUBLE_EQ(b.alpha(), 0.25);
  EXPECT_DOUBLE_EQ(b.beta(), 0.25);
  EXPECT_DOUBLE_EQ(b.k(), 1.0 / 6.0);
  EXPECT_NEAR(b.radius(1.0), std::pow(6.0, 2.0 / 3.0), 1e-14);
  EXPECT_NEAR(b.radius(2.0), std::pow(6.0, 2.0 / 3.0) * std::pow(2.0, 0.25), 1e-14);
}

TEST(Barenblatt, ExponentsInTwoD) {
  const Barenblatt b(4.0, 2);
  EXPECT_DOUBLE_EQ(b.alpha(), 2.0 / 8.0);
  EXPECT_DOUBLE_EQ(b.beta(), 1.0 / 8.0);
}

TEST(Barenblatt, Rejections) {
  EXPECT_THROW(Barenblatt(2.0, 1), std::invalid_argument);
  EXPECT_THROW(Barenblatt(3.0, 3), std::invalid_argument);
  EXPECT_THROW(Barenblatt(3.0, 1, 0.0), std::invalid_argument);
  EXPECT_THROW(Barenblatt(3.0, 1)(0.0, 0.0), std::invalid_argument);
}

TEST(Barenblatt, ProfileShape) {
  const Barenblatt b(3.0, 1);
  EXPECT_DOUBLE_EQ(b(0.0, 1.0), 1.0);
  EXPECT_EQ(b(b.radius(1.0) * 1.0001, 1.0), 0.0);
  EXPECT_EQ(b(-1.0, 1.5), b(1.0, 1.5));
  EXPECT_GT(b(0.5, 1.0), b(1.0, 1.0));
}

// u_t = (|u_x| u_x)_x by central differences at interior points of the support.
TEST(Barenblatt, SatisfiesThePdePointwise) {
  const Barenblatt b(3.0, 1);
  const double e = 1e-4;
  for (double t : {1.0, 1.7}) {
    for (double x : {0.2, 0.9, 1.8, 2.6}) {
      const double ut = (b(x, t + e) - b(x, t - e)) / (2 * e);
      auto flux = [&](double y) {
        const double s = b.radial_slope(y, t) * (y < 0 ? -1.0 : 1.0);
        return std::abs(s) * s;
      };
      const double div = (flux(x + e) - flux(x - e)) / (2 * e);
      EXPECT_NEAR(ut, div, 1e-6 * std::max(1.0, std::abs(ut))) << "x=" << x << " t=" << t;
    }
  }
}

TEST(Barenblatt, SlopeMatchesFiniteDifference) {
  const Barenblatt b(3.5, 2, 0.8);
  const double e = 1e-6;
  for (double r : {0.1, 0.6, 1.1}) {
    const double fd = (b(r + e, 1.3) - b(r - e, 1.3)) / (2 * e);
    EXPECT_NEAR(b.radial_slope(r, 1.3), fd, 1e-7);
  }
}

TEST(Barenblatt, MassIsConstantInTime) {
  const Barenblatt b(3.0, 1);
  auto mass = [&](double t) {
    const int K = 200000;
    const double R = b.radius(t);
    double s = 0.0;
    for (int k = 0; k < K; ++k) s += b(-R + 2 * R * (k + 0.5) / K, t);
    return s * 2 * R / K;
  };
  EXPECT_NEAR(mass(2.0), mass(1.0), 1e-8);
}

TEST(Barenblatt, ExactProfileHasSmallWeakResidual) {
  const Barenblatt b(3.0, 1);
  const double L = 8.0;
  const double R = 0.5 * b.radius(1.0);
  const double S = 0.9 * L - R;
  const TestFunction phi = [&](std::span<const double> x) { return cutoff_plateau(R / 2, S / 2, x); };
  std::vector<double> res;
  for (int N : {200, 400, 800}) {
    const auto grid = GridSpec::build(1, L, N);
    std::vector<double> times;
    for (int k = 0; k <= 64; ++k) times.push_back(1.0 + 0.5 * k / 64.0);
    const auto run = barenblatt_run(b, grid, times);
    const auto terms = weak_form_terms(run, pure_diffusion(), 3.0, phi, 1.0, 0.5);
    res.push_back(terms.residual / std::max(1.0, std::abs(terms.time_term)));
  }
  EXPECT_LT(res[2], 1e-3);
  EXPECT_LT(res[2], res[0]);
}

TEST(Barenblatt, IdenticalTimesGiveZeroError) {
  const auto levels = barenblatt_ladder(Barenblatt(3.0, 1), 8.0, {100}, 1.0, 1.0);
  ASSERT_EQ(levels.size(), 1u);
  EXPECT_EQ(levels[0].l1_error, 0.0);
  EXPECT_THROW(barenblatt_ladder(Barenblatt(3.0, 1), 8.0, {100}, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(barenblatt_ladder(Barenblatt(3.0, 1), 8.0, {100}, 2.0, 1.0), std::invalid_argument);
}

TEST(Barenblatt, LadderConverges) {
  const auto levels = barenblatt_ladder(Barenblatt(3.0, 1), 8.0, {100, 200, 400}, 1.0, 2.0);
  ASSERT_EQ(levels.size(), 3u);
  EXPECT_GT(levels[0].l1_error, levels[1].l1_error);
  EXPECT_GT(levels[1].l1_error, levels[2].l1_error);
  EXPECT_GE(levels[2].order, 0.8);
  EXPECT_DOUBLE_EQ(levels[1].h, 0.08);
}

TEST(Barenblatt, RunHasExactSnapshots) {
  const Barenblatt b(3.0, 1);
  const auto grid = GridSpec::build(1, 8.0, 40);
  const auto run = barenblatt_run(b, grid, {1.0, 1.5});
  ASSERT_EQ(run.snapshots.size(), 2u);
  EXPECT_EQ(run.snapshots[1].time(), 1.5);
  EXPECT_EQ(run.snapshots[1][20], b(grid.center(20)[0], 1.5));
  EXPECT_EQ(run.dt_history, std::vector<double>{0.5});
}
