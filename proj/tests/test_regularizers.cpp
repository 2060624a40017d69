#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "plap/regularizers.hpp"

using namespace plap;

namespace {

TimeSeries<double> sampled(double (*fn)(double), double a, double b, int n) {
  std::vector<double> t, v;
  for (int k = 0; k <= n; ++k) {
    t.push_back(a + (b - a) * k / n);
    v.push_back(fn(t.back()));
  }
  return {t, v};
}

CutoffSample eval1(const std::function<CutoffSample(std::span<const double>)>& fn, double x) {
  const double p[1] = {x};
  return fn(std::span<const double>(p, 1));
}

Field bump(const GridSpec& g, double width) {
  return Field::sample(g, [=](const Vec& x) {
    const double s = 1.0 - x[0] * x[0] / (width * width);
    return s > 0 ? s * s : 0.0;
  });
}

SolverRun frozen_run(const Field& f, const std::vector<double>& times) {
  SolverRun run;
  run.grid = f.grid();
  for (double t : times) {
    run.snapshots.emplace_back(f.grid(), f.values(), t);
    run.snapshot_steps.push_back(run.snapshot_steps.size());
  }
  run.horizon = times.back();
  return run;
}

TestFunction plateau(double R, double S) {
  return [R, S](std::span<const double> x) { return cutoff_plateau(R, S, x); };
}

}  // namespace

TEST(Steklov, ConstantSeries) {
  const TimeSeries<double> s({0.0, 1.0, 3.0}, {2.5, 2.5, 2.5});
  EXPECT_DOUBLE_EQ(steklov_average(s, 0.5, 1.2), 2.5);
  EXPECT_EQ(steklov_derivative(s, 0.5, 1.2), 0.0);
}

TEST(Steklov, LinearSeriesAverage) {
  const auto s = sampled([](double t) { return t; }, 0.0, 10.0, 50);
  EXPECT_NEAR(steklov_average(s, 0.2, 1.0), 1.1, 1e-14);
  EXPECT_NEAR(steklov_derivative(s, 0.37, 2.1), 1.0, 1e-13);
}

TEST(Steklov, ZeroExtensionPastTheEnd) {
  const TimeSeries<double> s({0.0, 1.0}, {1.0, 1.0});
  EXPECT_DOUBLE_EQ(steklov_average(s, 1.0, 0.5), 0.5);
  EXPECT_EQ(steklov_average(s, 1.0, 5.0), 0.0);
  EXPECT_DOUBLE_EQ(steklov_average(s, 2.0, -1.0), 0.5);
}

TEST(Steklov, QuadraticDifferenceQuotient) {
  const auto s = sampled([](double t) { return t * t; }, 0.0, 2.0, 4);
  EXPECT_DOUBLE_EQ(steklov_derivative(s, 0.5, 1.0), 2.5);
}

TEST(Steklov, Rejections) {
  const TimeSeries<double> s({0.0, 1.0}, {1.0, 2.0});
  EXPECT_THROW(steklov_average(s, 0.0, 0.5), std::invalid_argument);
  EXPECT_THROW(steklov_derivative(s, 0.5, 0.8), std::out_of_range);
  EXPECT_THROW(steklov_derivative(s, 0.5, -0.1), std::out_of_range);
  EXPECT_THROW((TimeSeries<double>({0.0, 0.0}, {1.0, 1.0})), std::invalid_argument);
  EXPECT_THROW((TimeSeries<double>({0.0}, {})), std::invalid_argument);
}

TEST(Steklov, Linearity) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(-3, 3);
  std::vector<double> t;
  std::vector<std::vector<double>> u, v, w;
  const double alpha = 1.7;
  const double beta = -0.6;
  for (int k = 0; k < 40; ++k) {
    t.push_back(0.05 * k + (k % 3) * 0.01);
    std::vector<double> a(6), b(6), c(6);
    for (int i = 0; i < 6; ++i) {
      a[i] = d(rng);
      b[i] = d(rng);
      c[i] = alpha * a[i] + beta * b[i];
    }
    u.push_back(a);
    v.push_back(b);
    w.push_back(c);
  }
  const TimeSeries<std::vector<double>> su(t, u), sv(t, v), sw(t, w);
  for (double t0 : {-0.3, 0.0, 0.41, 1.7, 2.1}) {
    const auto au = steklov_average(su, 0.33, t0);
    const auto av = steklov_average(sv, 0.33, t0);
    const auto aw = steklov_average(sw, 0.33, t0);
    for (int i = 0; i < 6; ++i) {
      const double want = alpha * au[i] + beta * av[i];
      EXPECT_NEAR(aw[i], want, 1e-13 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST(Steklov, ConvergesAsWindowShrinks) {
  const auto s = sampled([](double t) { return std::sin(3.0 * t); }, 0.0, 2.0, 20000);
  const double t0 = 0.7;
  double first = 0.0;
  double prev = kInfinity;
  double err = 0.0;
  for (int k = 0; k <= 12; ++k) {
    const double h = 0.5 * std::pow(10.0, -k / 4.0);
    err = std::abs(steklov_average(s, h, t0) - std::sin(3.0 * t0));
    if (k == 0) first = err;
    EXPECT_LE(err, prev * (1 + 1e-12));
    prev = err;
  }
  EXPECT_LE(err, first * 1e-3);
}

TEST(CutoffExp, Examples) {
  const double x0[1] = {0.0};
  const auto c = cutoff_exp(10.0, 1.0, 3.0, x0);
  EXPECT_NEAR(c.value, std::pow(std::exp(-1.0) - std::exp(-std::sqrt(101.0)), 3), 1e-15);
  const double xr[2] = {6.0, 8.0};
  EXPECT_EQ(cutoff_exp(10.0, 1.0, 3.0, xr).value, 0.0);
  EXPECT_THROW(cutoff_exp(0.0, 1.0, 3.0, x0), std::invalid_argument);
  EXPECT_THROW(cutoff_exp(1.0, -1.0, 3.0, x0), std::invalid_argument);
  EXPECT_THROW(cutoff_exp(1.0, 1.0, 2.0, x0), std::invalid_argument);
}

TEST(CutoffExp, GradientMatchesFiniteDifference) {
  const double e = 1e-6;
  for (double x : {0.3, 1.7, 4.2}) {
    const double a[1] = {x + e};
    const double b[1] = {x - e};
    const double c[1] = {x};
    const double fd = (cutoff_exp(5.0, 0.7, 3.5, a).value - cutoff_exp(5.0, 0.7, 3.5, b).value) / (2 * e);
    EXPECT_NEAR(cutoff_exp(5.0, 0.7, 3.5, c).gradient[0], fd, 1e-8);
  }
}

TEST(CutoffExp, ProofBoundAtRandomPoints) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> d(-1, 1);
  for (double p : {3.0, 4.5}) {
    for (int k = 0; k < 10000; ++k) {
      const double R = 10.0;
      double x[2] = {R * d(rng), R * d(rng)};
      const double r = point_norm(x);
      if (r >= R) continue;
      const auto z = cutoff_exp(R, 0.5, p, x);
      ASSERT_GE(z.value, 0.0);
      ASSERT_LT(z.value, 1.0);
      if (z.value <= 0.0) continue;
      const double g = std::hypot(z.gradient[0], z.gradient[1]);
      const double lhs = std::pow(g, p) / std::pow(z.value, p - 1.0);
      ASSERT_LE(lhs / cutoff_exp_bound(0.5, p, x), 1.0 + 1e-12);
    }
  }
}

TEST(CutoffPlateau, Examples) {
  const double R = 2.0;
  const double S = 1.0;
  const auto z = plateau(R, S);
  EXPECT_EQ(eval1(z, R + S / 2).value, 1.0);
  EXPECT_EQ(eval1(z, R / 4).value, 0.0);
  EXPECT_EQ(eval1(z, R + 2 * S + 0.01).value, 0.0);
  EXPECT_EQ(eval1(z, -(R + 0.1)).value, 1.0);
  EXPECT_THROW(cutoff_plateau(0.0, 1.0, std::span<const double>()), std::invalid_argument);
  EXPECT_THROW(cutoff_plateau(1.0, -1.0, std::span<const double>()), std::invalid_argument);
}

TEST(CutoffPlateau, GradientBounds) {
  const double R = 1.3;
  const double S = 0.4;
  double inner = 0.0;
  double outer = 0.0;
  for (int k = 0; k <= 100000; ++k) {
    const double r = (R + 2 * S) * k / 100000.0;
    const double g = std::abs(eval1(plateau(R, S), r).gradient[0]);
    if (r < R) inner = std::max(inner, g);
    if (r > R + S) outer = std::max(outer, g);
  }
  EXPECT_LE(inner, kPlateauGradientConstant / R);
  EXPECT_LE(outer, kPlateauGradientConstant / S);
  EXPECT_GT(inner, 0.0);
}

TEST(CutoffPlateau, ContinuousAcrossRampEnds) {
  const double R = 1.0;
  const double S = 0.5;
  for (double r : {0.5 * R, R, R + S, R + 2 * S}) {
    const auto a = eval1(plateau(R, S), r - 1e-9);
    const auto b = eval1(plateau(R, S), r + 1e-9);
    EXPECT_NEAR(a.value, b.value, 1e-8);
    EXPECT_NEAR(a.gradient[0], b.gradient[0], 1e-7);
  }
}

TEST(SmoothAbs, Examples) {
  const double delta = 0.1;
  const auto z = smooth_abs(delta, 0.0);
  EXPECT_EQ(z.value, 0.0);
  EXPECT_EQ(z.derivative, 0.0);
  EXPECT_DOUBLE_EQ(z.curvature, 1.5 / delta);
  const auto s = smooth_abs(delta, 10 * delta);
  EXPECT_EQ(s.derivative, 1.0);
  EXPECT_LE(std::abs(s.value - 10 * delta), kSmoothAbsConstant * delta);
  EXPECT_THROW(smooth_abs(0.0, 1.0), std::invalid_argument);
}

TEST(SmoothAbs, SymmetryAndConvexity) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-2, 2);
  for (int k = 0; k < 1000; ++k) {
    const double u = d(rng);
    const auto a = smooth_abs(0.3, u);
    const auto b = smooth_abs(0.3, -u);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.derivative, -b.derivative);
    EXPECT_GE(a.curvature, 0.0);
    EXPECT_LE(std::abs(a.derivative), 1.0);
  }
}

TEST(SmoothAbs, UniformErrorBound) {
  for (double delta : {1e-1, 1e-2, 1e-3}) {
    double worst = 0.0;
    for (int k = -200000; k <= 200000; ++k) {
      const double u = 5 * delta * k / 200000.0;
      worst = std::max(worst, std::abs(smooth_abs(delta, u).value - std::abs(u)));
    }
    EXPECT_LE(worst, kSmoothAbsConstant * delta * (1 + 1e-12));
    EXPECT_GE(worst, 0.99 * kSmoothAbsConstant * delta);
  }
}

TEST(SmoothAbs, DerivativesConsistent) {
  const double delta = 0.2;
  const double e = 1e-7;
  for (double u : {-0.5, -0.13, 0.02, 0.19, 0.4}) {
    const double fd = (smooth_abs(delta, u + e).value - smooth_abs(delta, u - e).value) / (2 * e);
    EXPECT_NEAR(smooth_abs(delta, u).derivative, fd, 1e-7);
    const double fd2 = (smooth_abs(delta, u + e).derivative - smooth_abs(delta, u - e).derivative) / (2 * e);
    EXPECT_NEAR(smooth_abs(delta, u).curvature, fd2, 1e-5);
  }
}

TEST(SmoothHeaviside, Examples) {
  const double delta = 0.05;
  const auto a = smooth_heaviside(delta, -1.0);
  EXPECT_EQ(a.H, 0.0);
  EXPECT_EQ(a.G, 0.0);
  EXPECT_EQ(smooth_heaviside(delta, 2 * delta).H, 1.0);
  EXPECT_THROW(smooth_heaviside(-1.0, 0.0), std::invalid_argument);
}

TEST(SmoothHeaviside, ApproachesPositivePart) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(-1, 1);
  for (double delta : {1e-1, 1e-2, 1e-3}) {
    for (int k = 0; k < 1000; ++k) {
      const double eta = d(rng);
      EXPECT_LE(std::abs(smooth_heaviside(delta, eta).G - std::max(eta, 0.0)), delta);
    }
  }
}

TEST(SmoothHeaviside, MonotoneConvexAndPrimitive) {
  const double delta = 0.2;
  const double step = 1e-3;
  double prevH = -1.0;
  for (int k = 0; k <= 600; ++k) {
    const double xi = -0.2 + step * k;
    const auto c = smooth_heaviside(delta, xi);
    EXPECT_GE(c.H, prevH);
    EXPECT_GE(c.H, 0.0);
    EXPECT_LE(c.H, 1.0);
    EXPECT_GE(c.G, 0.0);
    prevH = c.H;
    const double second = smooth_heaviside(delta, xi + step).G - 2 * c.G + smooth_heaviside(delta, xi - step).G;
    EXPECT_GE(second, -1e-15);
    const double dG = (smooth_heaviside(delta, xi + 1e-7).G - smooth_heaviside(delta, xi - 1e-7).G) / 2e-7;
    EXPECT_NEAR(dG, c.H, 1e-6);
  }
}

TEST(WeakForm, ZeroRun) {
  const auto g = GridSpec::build(1, 2.0, 40);
  const auto run = frozen_run(Field::zeros(g), {0.0, 0.1, 0.2});
  const auto m = prototype_flux(Vec{1, 0}, Vec{0.3, 0}, 1.0, 1.0);
  EXPECT_EQ(weak_form_residual(run, m, 3.0, plateau(0.8, 0.5), 0.05, 0.1), 0.0);
}

TEST(WeakForm, WindowOutsideRun) {
  const auto g = GridSpec::build(1, 2.0, 40);
  const auto run = frozen_run(Field::zeros(g), {0.0, 0.1});
  EXPECT_THROW(weak_form_residual(run, pure_diffusion(), 3.0, plateau(0.8, 0.5), 0.05, 0.1), std::out_of_range);
  EXPECT_THROW(weak_form_residual(run, pure_diffusion(), 3.0, plateau(0.8, 0.5), 0.0, 0.0), std::out_of_range);
}

// u = x is a steady state of the interior scheme; the residual is then the
// face-sum quadrature of the integral of phi', compared against the same
// sum on a 10x finer grid.
TEST(WeakForm, SteadyStateAtQuadratureLevel) {
  auto residual = [](int N) {
    const auto g = GridSpec::build(1, 2.0, N);
    const Field u = Field::sample(g, [](const Vec& x) { return x[0]; });
    return weak_form_terms(frozen_run(u, {0.0, 1.0}), pure_diffusion(), 3.0, plateau(0.7, 0.3), 0.2, 0.5);
  };
  const auto coarse = residual(38);
  const auto fine = residual(380);
  EXPECT_NEAR(coarse.time_term, 0.0, 1e-15);
  EXPECT_LE(fine.residual, coarse.residual + 1e-15);
  EXPECT_LT(coarse.residual, 1e-3);
}

TEST(WeakForm, PureDiffusionRefinement) {
  std::vector<double> res;
  for (int N : {50, 100, 200}) {
    const auto g = GridSpec::build(1, 2.0, N);
    StepOptions o;
    o.record_every = 1;
    const auto run = evolve(bump(g, 0.5), pure_diffusion(), 3.0, 0.02, {}, o);
    res.push_back(weak_form_residual(run, pure_diffusion(), 3.0, plateau(0.8, 0.5), 0.005, 0.01));
  }
  EXPECT_LT(res[1], res[0]);
  EXPECT_LT(res[2], res[1]);
  EXPECT_GE(std::log2(res[1] / res[2]), 0.8);
}

TEST(AsSeries, MirrorsSnapshots) {
  const auto g = GridSpec::build(1, 1.0, 4);
  const auto run = frozen_run(Field::zeros(g), {0.0, 0.5, 1.0});
  const auto s = as_series(run);
  EXPECT_EQ(s.times, run.times());
  EXPECT_EQ(s.values.size(), 3u);
}
