#include <gtest/gtest.h>

#include <cmath>

#include "ogtt/model.hpp"

using namespace ogtt;

namespace {

ModelParams equilibrium_params() {
  ModelParams p;
  p.V0 = 0.0;
  return p;
}

// V1(t) = V0 e^{-2 th0 t}, V2(t) = 2 th0 t V0 e^{-2 th0 t}: the two-stage chain solved by hand.
double v1_exact(double t, double th0, double v0) { return v0 * std::exp(-2.0 * th0 * t); }
double v2_exact(double t, double th0, double v0) { return 2.0 * th0 * t * v0 * std::exp(-2.0 * th0 * t); }

}  // namespace

TEST(Model, RhsVanishesAtEquilibrium) {
  const ModelParams p = equilibrium_params();
  const SystemState d = rhs(initial_state(p, p.Gb), p);
  for (double v : d.as_array()) EXPECT_EQ(v, 0.0);
}

TEST(Model, EquilibriumIsStationaryForTwoHours) {
  for (double gb : {70.0, 90.0, 130.0}) {
    ModelParams p = equilibrium_params();
    p.Gb = gb;
    const Trajectory tr = simulate(p, gb, 2.0, 0.005);
    ASSERT_EQ(tr.size(), 401u);
    for (const auto& s : tr.states) {
      EXPECT_NEAR(s.G, gb, 1e-9);
      EXPECT_EQ(s.I1, 0.0);
      EXPECT_EQ(s.L2, 0.0);
    }
  }
}

TEST(Model, GridIncludesBothEnds) {
  const Trajectory tr = simulate(ModelParams{}, 90.0, 2.0, 0.005);
  EXPECT_EQ(tr.times.front(), 0.0);
  EXPECT_EQ(tr.times.back(), 2.0);
  EXPECT_NEAR(tr.step(), 0.005, 1e-15);
  // A step that does not divide t_end is shrunk so the grid still ends at t_end.
  const Trajectory odd = simulate(ModelParams{}, 90.0, 1.0, 0.3);
  EXPECT_EQ(odd.size(), 5u);
  EXPECT_EQ(odd.times.back(), 1.0);
}

TEST(Model, GiStagesMatchClosedForm) {
  for (double th0 : {0.5, 1.0, 2.0, 3.0}) {
    ModelParams p;
    p.theta0 = th0;
    const Trajectory tr = simulate(p, 90.0, 2.0, 0.005);
    for (std::size_t i = 0; i < tr.size(); ++i) {
      const double t = tr.times[i];
      const double e1 = v1_exact(t, th0, p.V0), e2 = v2_exact(t, th0, p.V0);
      EXPECT_LE(std::abs(tr.states[i].V1 - e1), 1e-6 * e1) << "th0=" << th0 << " t=" << t;
      EXPECT_LE(std::abs(tr.states[i].V2 - e2), 1e-6 * e2) << "th0=" << th0 << " t=" << t;
      const GiStages g = gi_closed_form(t, th0, p.V0);
      EXPECT_NEAR(g.V1, e1, 1e-12 * p.V0);
      EXPECT_NEAR(g.V2, e2, 1e-12 * p.V0);
    }
  }
}

TEST(Model, ErlangStages) {
  const double th0 = 1.3, v0 = 400.0;
  for (double t : {0.0, 0.2, 0.7, 1.5}) {
    EXPECT_NEAR(gi_erlang_stage(1, t, th0, v0), v0 * std::exp(-th0 * t), 1e-12 * v0);
    EXPECT_NEAR(gi_erlang_stage(2, t, th0, v0), v2_exact(t, th0, v0), 1e-12 * v0);
    const double x = 3.0 * th0 * t;
    EXPECT_NEAR(gi_erlang_stage(3, t, th0, v0), v0 * x * x / 2.0 * std::exp(-x), 1e-12 * v0);
  }
  EXPECT_THROW(gi_erlang_stage(0, 1.0, th0, v0), InvalidArgument);
  EXPECT_THROW(gi_erlang_stage(4, 1.0, th0, v0), InvalidArgument);
}

TEST(Model, ErlangStageMassPeaksLater) {
  // Stage m peaks at t = (m - 1) / (m theta0).
  const double th0 = 1.0;
  EXPECT_GT(gi_erlang_stage(2, 0.5, th0, 1.0), gi_erlang_stage(2, 0.3, th0, 1.0));
  EXPECT_GT(gi_erlang_stage(2, 0.5, th0, 1.0), gi_erlang_stage(2, 0.7, th0, 1.0));
  EXPECT_GT(gi_erlang_stage(3, 2.0 / 3.0, th0, 1.0), gi_erlang_stage(3, 0.5, th0, 1.0));
}

TEST(Model, Rk4IsFourthOrder) {
  ModelParams p;
  p.theta0 = 2.0;
  auto err = [&](double h) {
    const Trajectory tr = simulate(p, 90.0, 1.0, h);
    return std::abs(tr.states.back().V2 - v2_exact(1.0, p.theta0, p.V0));
  };
  // Still pre-asymptotic at h = 0.05, so halve from 0.0125.
  const double ratio = err(0.0125) / err(0.00625);
  EXPECT_GT(ratio, 14.0);
  EXPECT_LT(ratio, 18.0);
}

TEST(Model, HormonesStayNonnegativeAndLoadRaisesGlucose) {
  for (double th1 : {1.0, 10.0, 25.0}) {
    ModelParams p;
    p.theta1 = th1;
    const Trajectory tr = simulate(p, p.Gb, 2.0);
    for (const auto& s : tr.states) {
      EXPECT_GE(s.I1, 0.0);
      EXPECT_GE(s.I2, 0.0);
      EXPECT_GE(s.L1, 0.0);
      EXPECT_GE(s.L2, 0.0);
    }
    EXPECT_GT(tr.states[40].G, p.Gb);
  }
}

TEST(Model, GlucagonRespondsOnlyBelowBasal) {
  ModelParams p;
  p.V0 = 0.0;
  const Trajectory above = simulate(p, p.Gb + 30.0, 2.0);
  const Trajectory below = simulate(p, p.Gb - 30.0, 2.0);
  EXPECT_EQ(above.states[10].L1, 0.0);
  EXPECT_GT(below.states[10].L1, 0.0);
  EXPECT_EQ(below.states[10].I1, 0.0);
  EXPECT_GT(below.states.back().G, p.Gb - 30.0);
  EXPECT_LT(above.states.back().G, p.Gb + 30.0);
}

TEST(Model, ObserveUsesNearestGridPoint) {
  const Trajectory tr = simulate(ModelParams{}, 95.0, 2.0, 0.005);
  const std::vector<double> g = observe(tr, kObservationTimes);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_EQ(g[0], 95.0);
  EXPECT_EQ(g[2], tr.states[200].G);
  EXPECT_EQ(g[4], tr.states.back().G);
  const std::array<double, 1> between{0.5024};
  EXPECT_EQ(observe(tr, between)[0], tr.states[100].G);
  const std::array<double, 1> late{2.5};
  EXPECT_THROW(observe(tr, late), OutOfRange);
}

TEST(Model, SimulateGlucoseMatchesObserve) {
  ModelParams p;
  p.theta0 = 0.8;
  p.theta1 = 4.0;
  const auto direct = simulate_glucose(p, 101.0, kObservationTimes);
  const auto stored = observe(simulate(p, 101.0, 2.0), kObservationTimes);
  ASSERT_EQ(direct.size(), stored.size());
  for (std::size_t i = 0; i < direct.size(); ++i) EXPECT_EQ(direct[i], stored[i]);
}

TEST(Model, Validation) {
  ModelParams p;
  EXPECT_NO_THROW(p.validate());
  p.theta1 = 0.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = ModelParams{};
  p.V0 = -1.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  EXPECT_THROW(simulate(ModelParams{}, 90.0, 2.0, 0.0), InvalidArgument);
  EXPECT_THROW(simulate(ModelParams{}, 90.0, -1.0), InvalidArgument);
}

TEST(Model, BlowUpRaisesIntegrationError) {
  ModelParams p;
  p.theta1 = 1e200;
  p.theta3 = 1e200;
  try {
    simulate(p, 200.0, 2.0, 0.5);
    FAIL() << "expected IntegrationError";
  } catch (const IntegrationError& e) {
    EXPECT_GT(e.time(), 0.0);
  }
}

TEST(Model, ParamVectorRoundTrip) {
  const ParamVector v{1.5, 2.5, 3.5, 95.0, 4.5};
  EXPECT_EQ(ModelParams::from_vector(v).to_vector(), v);
}
