#include <gtest/gtest.h>

#include <cmath>

#include "plap/stepper.hpp"

using namespace plap;

namespace {

Field bump(const GridSpec& g, double width, double amp = 1.0, double shift = 0.0) {
  return Field::sample(g, [=](const Vec& x) {
    double r2 = (x[0] - shift) * (x[0] - shift);
    if (g.dim() == 2) r2 += x[1] * x[1];
    const double s = 1.0 - r2 / (width * width);
    return s > 0 ? amp * s * s : 0.0;
  });
}

// one cell raised by 0.02 on h = 0.01: every nonzero face gradient is 2
Field spike(double height) {
  const auto g = GridSpec::build(1, 1.0, 200);
  std::vector<double> v(g.cell_count(), 0.0);
  v[100] = height;
  return Field(g, v);
}

}  // namespace

TEST(StableDt, DiffusionLimitedExample) {
  const Field f = spike(0.02);
  EXPECT_DOUBLE_EQ(max_face_gradient(f), 2.0);
  const auto b = stable_dt_bound(f, pure_diffusion(), 3.0, 0.0, 0.5);
  EXPECT_NEAR(b.dt, 6.25e-6, 1e-18);
  EXPECT_TRUE(std::isinf(b.convection_dt) || b.convection_dt > 1e20);
}

TEST(StableDt, HalvingHQuartersDtAtFixedGradient) {
  const auto g1 = GridSpec::build(1, 1.0, 100);
  const auto g2 = GridSpec::build(1, 1.0, 200);
  std::vector<double> v1(100, 0.0), v2(200, 0.0);
  v1[50] = 2.0 * g1.spacing();
  v2[100] = 2.0 * g2.spacing();
  const double d1 = stable_dt(Field(g1, v1), pure_diffusion(), 3.0, 0.0, 0.4);
  const double d2 = stable_dt(Field(g2, v2), pure_diffusion(), 3.0, 0.0, 0.4);
  EXPECT_NEAR(d2 / d1, 0.25, 1e-12);
}

TEST(StableDt, FlatFieldIsClampedByDtMax) {
  const auto g = GridSpec::build(2, 1.0, 8);
  const Field z = Field::zeros(g);
  const double dt = stable_dt(z, pure_diffusion(), 3.0, 0.0, 0.4, 1e-3);
  EXPECT_EQ(dt, 1e-3);
  EXPECT_TRUE(std::isfinite(stable_dt(z, pure_diffusion(), 3.0, 0.0, 0.4)));
}

TEST(StableDt, ConvectionLimited) {
  const auto g = GridSpec::build(1, 1.0, 100);
  const auto m = prototype_flux(Vec{5, 0}, Vec{0, 0}, 1.0, 0.0, 1e-6);
  const Field f = bump(g, 0.4);
  const auto b = stable_dt_bound(f, m, 3.0, 0.0, 0.4);
  EXPECT_LT(b.convection_dt, b.diffusion_dt);
  EXPECT_NEAR(b.dt, 0.4 * g.spacing() / (2.0 * b.max_wave_speed), 1e-15);
}

TEST(StableDt, RejectsBadCfl) {
  const Field f = spike(0.02);
  EXPECT_THROW(stable_dt(f, pure_diffusion(), 3.0, 0.0, 0.0), std::invalid_argument);
  EXPECT_THROW(stable_dt(f, pure_diffusion(), 3.0, 0.0, 1.5), std::invalid_argument);
}

TEST(Step, ZeroRhsLeavesValuesAndAdvancesTime) {
  const auto g = GridSpec::build(1, 1.0, 10);
  const Field z = Field::zeros(g);
  const Field next = step(z, pure_diffusion(), 3.0, 0.01);
  EXPECT_EQ(next.values(), z.values());
  EXPECT_DOUBLE_EQ(next.time(), 0.01);
}

TEST(Step, StableStepDoesNotIncreaseSupNorm) {
  for (int n : {1, 2}) {
    const auto g = GridSpec::build(n, 1.0, n == 1 ? 100 : 40);
    const auto m = prototype_flux(Vec{1, 0.5}, Vec{0.2, 0}, 1.0, 1.0, 1.0, n);
    Field f = bump(g, 0.4);
    for (int k = 0; k < 50; ++k) {
      const double dt = stable_dt(f, m, 3.0, f.time(), 0.4);
      const Field next = step(f, m, 3.0, dt);
      EXPECT_LE(lq_norm(next, kInfinity), lq_norm(f, kInfinity) * (1 + 1e-14));
      f = next;
    }
  }
}

TEST(Step, MassLedgerBalances) {
  const auto g = GridSpec::build(1, 1.0, 40);
  const auto m = prototype_flux(Vec{0.8, 0}, Vec{0, 0}, 1.0, 0.0);
  std::vector<double> v(g.cell_count(), 0.5);  // touches the boundary
  Field f(g, v);
  double inflow = 0.0;
  const double m0 = mass(f);
  for (int k = 0; k < 20; ++k) {
    const auto r = advance(f, m, 3.0, stable_dt(f, m, 3.0, f.time(), 0.4));
    inflow += r.boundary_inflow;
    f = r.field;
  }
  EXPECT_NE(inflow, 0.0);
  EXPECT_NEAR(mass(f) - m0, inflow, 1e-13);
}

TEST(Step, PolicyOnOversizedStep) {
  const Field f = spike(0.02);
  const double limit = stable_dt(f, pure_diffusion(), 3.0, 0.0, 1.0);
  EXPECT_THROW(step(f, pure_diffusion(), 3.0, 2.0 * limit), std::domain_error);
  EXPECT_NO_THROW(step(f, pure_diffusion(), 3.0, 2.0 * limit, StabilityPolicy::warn));
  EXPECT_THROW(step(f, pure_diffusion(), 3.0, 0.0), std::invalid_argument);
  EXPECT_THROW(step(f, pure_diffusion(), 3.0, -1e-3), std::invalid_argument);
}

TEST(Evolve, ZeroHorizonReturnsDatum) {
  const auto g = GridSpec::build(1, 1.0, 20);
  const Field u0 = bump(g, 0.3);
  const auto run = evolve(u0, pure_diffusion(), 3.0, 0.0, {});
  ASSERT_EQ(run.snapshots.size(), 1u);
  EXPECT_EQ(run.final().values(), u0.values());
  EXPECT_TRUE(run.dt_history.empty());
}

TEST(Evolve, LandsExactlyOnRecordTimes) {
  const auto g = GridSpec::build(1, 1.0, 50);
  const auto run = evolve(bump(g, 0.3), pure_diffusion(), 3.0, 0.01, {0.004, 0.0025, 0.004});
  const std::vector<double> want{0.0, 0.0025, 0.004, 0.01};
  EXPECT_EQ(run.times(), want);
  EXPECT_EQ(run.snapshot_steps.front(), 0u);
  EXPECT_EQ(run.snapshot_steps.back(), run.dt_history.size());
  double total = 0.0;
  for (double dt : run.dt_history) {
    EXPECT_GT(dt, 0.0);
    total += dt;
  }
  EXPECT_NEAR(total, 0.01, 1e-14);
}

TEST(Evolve, RecordEveryAddsSnapshots) {
  const auto g = GridSpec::build(1, 1.0, 50);
  StepOptions o;
  o.record_every = 10;
  const auto run = evolve(bump(g, 0.3), pure_diffusion(), 3.0, 0.01, {}, o);
  EXPECT_GT(run.snapshots.size(), 2u);
  for (std::size_t k = 1; k < run.snapshots.size(); ++k) {
    EXPECT_GT(run.snapshots[k].time(), run.snapshots[k - 1].time());
  }
}

TEST(Evolve, RejectsBadInputs) {
  const auto g = GridSpec::build(1, 1.0, 20);
  const Field u0 = bump(g, 0.3);
  EXPECT_THROW(evolve(u0, pure_diffusion(), 3.0, -1.0, {}), std::invalid_argument);
  EXPECT_THROW(evolve(u0, pure_diffusion(), 3.0, 1.0, {2.0}), std::invalid_argument);
  EXPECT_THROW(evolve(u0, pure_diffusion(), 2.0, 1.0, {}), std::invalid_argument);
  EXPECT_THROW(evolve(Field(g, u0.values(), 0.5), pure_diffusion(), 3.0, 1.0, {}), std::invalid_argument);
  EXPECT_THROW(evolve(bump(g, 0.9), pure_diffusion(), 3.0, 1.0, {}), std::invalid_argument);
}

TEST(Evolve, SupNormNonincreasingAcrossSnapshots) {
  const auto g = GridSpec::build(2, 1.0, 32);
  StepOptions o;
  o.record_every = 20;
  const auto m = prototype_flux(Vec{1, -1}, Vec{0.5, 0.5}, 1.0, 1.0, 1.0, 2);
  const auto run = evolve(bump(g, 0.4), m, 3.0, 0.02, {}, o);
  for (std::size_t k = 1; k < run.snapshots.size(); ++k) {
    EXPECT_LE(lq_norm(run.snapshots[k], kInfinity), lq_norm(run.snapshots[k - 1], kInfinity) * (1 + 1e-14));
  }
}

TEST(Evolve, LeakAbort) {
  const auto g = GridSpec::build(1, 0.5, 40);
  StepOptions o;
  o.require_inner_support = false;
  const auto m = prototype_flux(Vec{3, 0}, Vec{0, 0}, 1.0, 0.0);
  try {
    evolve(bump(g, 0.45), m, 3.0, 1.0, {}, o);
    FAIL() << "expected a leak abort";
  } catch (const BoundaryLeakError& e) {
    EXPECT_GT(e.leak(), e.tolerance());
    EXPECT_LT(e.time(), 1.0);
  }
}

TEST(Evolve, Deterministic) {
  const auto g = GridSpec::build(2, 1.0, 24);
  const auto m = prototype_flux(Vec{1, 0.5}, Vec{0.3, 0}, 1.0, 1.0, 1.0, 2);
  const auto a = evolve(bump(g, 0.4), m, 3.0, 0.01, {0.005});
  const auto b = evolve(bump(g, 0.4), m, 3.0, 0.01, {0.005});
  ASSERT_EQ(a.snapshots.size(), b.snapshots.size());
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) EXPECT_EQ(a.snapshots[k].values(), b.snapshots[k].values());
  EXPECT_EQ(a.dt_history, b.dt_history);
}

TEST(Evolve, BoundsDominateSnapshots) {
  const auto g = GridSpec::build(1, 1.0, 100);
  StepOptions o;
  o.record_every = 50;
  const auto m = prototype_flux(Vec{1, 0}, Vec{0.5, 0}, 1.0, 1.0);
  const auto run = evolve(bump(g, 0.4), m, 3.0, 0.05, {}, o);
  for (const auto& s : run.snapshots) {
    EXPECT_GE(run.bounds.M1, lq_norm(s, 1.0));
    EXPECT_GE(run.bounds.Minf, lq_norm(s, kInfinity));
  }
  EXPECT_GT(run.bounds.G, 0.0);
  EXPECT_LE(run.boundary_leak, 1e-8 * run.initial_l1);
  EXPECT_NEAR(mass(run.final()) - run.net_inflow, run.initial_mass, 1e-13);
}

TEST(EvolvePair, SharedStepsAndTimes) {
  const auto g = GridSpec::build(1, 1.0, 80);
  const auto m = prototype_flux(Vec{1, 0}, Vec{0.3, 0}, 1.0, 1.0);
  const auto [a, b] = evolve_pair(bump(g, 0.3), bump(g, 0.3, 1.5, 0.1), m, 3.0, 0.02, {0.01});
  EXPECT_EQ(a.dt_history, b.dt_history);
  EXPECT_EQ(a.times(), b.times());
  EXPECT_THROW(evolve_pair(bump(g, 0.3), bump(GridSpec::build(1, 1.0, 40), 0.3), m, 3.0, 0.02, {}),
               std::invalid_argument);
}

// With identical data the pair reproduces the single run.
TEST(EvolvePair, IdenticalDataMatchSingleRun) {
  const auto g = GridSpec::build(1, 1.0, 60);
  const auto m = prototype_flux(Vec{1, 0}, Vec{0.3, 0}, 1.0, 1.0);
  const auto single = evolve(bump(g, 0.3), m, 3.0, 0.02, {});
  const auto [a, b] = evolve_pair(bump(g, 0.3), bump(g, 0.3), m, 3.0, 0.02, {});
  EXPECT_EQ(single.final().values(), a.final().values());
  EXPECT_EQ(a.final().values(), b.final().values());
}
