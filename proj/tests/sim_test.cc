#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "occsynth/examples.h"
#include "occsynth/sim.h"
#include "test_util.h"

namespace occsynth {
namespace {

HybridSystem double_integrator() { return examples::get("double_integrator").system; }

// One mode, x+ = 0.5 x, on [-1, 1]^2 with target [-0.1, 0.1]^2.
HybridSystem contraction() {
  HybridSystem s;
  s.n = 2;
  s.m = 1;
  s.modes.push_back({SemialgebraicSet::from_box({{-1, 1}, {-1, 1}}),
                     {Polynomial::parse("0.5*x1", 2), Polynomial::parse("0.5*x2", 2)},
                     {{Polynomial(2)}, {Polynomial(2)}}});
  s.input_box = {{-1, 1}};
  s.target = SemialgebraicSet::from_box({{-0.1, 0.1}, {-0.1, 0.1}});
  return s;
}

TEST(Step, ZeroControllerDoubleIntegrator) {
  const HybridSystem s = double_integrator();
  const auto next = step(s, zero_controller(2, 1, 2), {0.0, 1.0});
  EXPECT_DOUBLE_EQ(next[0], 0.01);
  EXPECT_DOUBLE_EQ(next[1], 1.0);
  EXPECT_THROW(step(s, zero_controller(2, 1, 2), {3.0, 0.0}), OutOfDomainError);
}

TEST(Rollout, FixedPointRunsToStepCap) {
  const Trajectory t = rollout(double_integrator(), zero_controller(2, 1, 2), {0.3, 0.0}, 50);
  EXPECT_FALSE(t.reached);
  EXPECT_EQ(t.exit_reason, ExitReason::kStepCap);
  EXPECT_EQ(t.states.size(), 51u);
  EXPECT_EQ(t.inputs.size(), 50u);
  for (const auto& x : t.states) EXPECT_EQ(x, (std::vector<double>{0.3, 0.0}));
}

TEST(Rollout, StartInTarget) {
  const Trajectory t = rollout(double_integrator(), zero_controller(2, 1, 2), {0.05, -0.05}, 10);
  EXPECT_TRUE(t.reached);
  EXPECT_EQ(t.reach_step, 0);
  EXPECT_EQ(t.states.size(), 1u);
  EXPECT_TRUE(t.inputs.empty());
}

TEST(Rollout, LeavingTheDomain) {
  const HybridSystem s = double_integrator();
  const Trajectory outside = rollout(s, zero_controller(2, 1, 2), {5.0, 5.0}, 10);
  EXPECT_EQ(outside.exit_reason, ExitReason::kLeftDomain);
  EXPECT_EQ(outside.modes.back(), -1);
  const Trajectory drift = rollout(s, zero_controller(2, 1, 2), {0.9, 1.0}, 1000);
  EXPECT_EQ(drift.exit_reason, ExitReason::kLeftDomain);
  EXPECT_FALSE(drift.reached);
  EXPECT_EQ(drift.modes.back(), -1);
  EXPECT_GT(drift.states.back()[0], 1.0);
}

TEST(Rollout, PendulumModeLabelsFollowTheWall) {
  const auto e = examples::get("pendulum_wall");
  const Trajectory t = rollout(e.system, *e.reference_controller, {0.08, 0.6}, e.t_max);
  ASSERT_TRUE(t.reached);
  bool wall = false;
  for (std::size_t k = 0; k < t.states.size(); ++k) {
    const int expected = t.states[k][0] <= 0.1 ? 0 : 1;
    EXPECT_EQ(t.modes[k], expected) << "step " << k;
    wall = wall || t.modes[k] == 1;
  }
  EXPECT_TRUE(wall);
}

TEST(Rollout, PublishedValidationStatesReachTarget) {
  for (const auto& name : {"double_integrator", "pendulum_wall"}) {
    const auto e = examples::get(name);
    for (const auto& x0 : e.validation_states) {
      const Trajectory t = rollout(e.system, *e.reference_controller, x0, e.t_max);
      EXPECT_TRUE(t.reached) << name << " from " << x0[0] << "," << x0[1];
      EXPECT_TRUE(e.system.target.contains(t.states.back(), 1e-9));
    }
  }
}

TEST(RolloutProperty, ReachStepIsFirstTargetVisit) {
  const auto e = examples::get("double_integrator");
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const auto x0 = testing::random_point(rng, 2);
    const Trajectory t = rollout(e.system, *e.reference_controller, x0, e.t_max);
    ASSERT_EQ(t.states.size(), t.modes.size());
    ASSERT_EQ(t.states.size(), t.inputs.size() + 1);
    for (std::size_t k = 0; k + 1 < t.states.size(); ++k) {
      EXPECT_FALSE(e.system.target.contains(t.states[k], 0.0));
      EXPECT_EQ(t.states[k + 1], step(e.system, *e.reference_controller, t.states[k]));
      EXPECT_EQ(t.modes[k], mode_of(e.system, t.states[k]));
    }
    if (t.reached) {
      EXPECT_EQ(*t.reach_step + 1, static_cast<int>(t.states.size()));
      EXPECT_TRUE(e.system.target.contains(t.states.back(), 0.0));
    }
  }
}

TEST(RolloutProperty, ClampedInputsStayInUnitBox) {
  auto e = examples::get("double_integrator");
  PiecewiseController ctrl = *e.reference_controller;
  ctrl.clamp = true;
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Trajectory t = rollout(e.system, ctrl, testing::random_point(rng, 2), 300);
    for (const auto& u : t.inputs) {
      EXPECT_GE(u[0], -1.0);
      EXPECT_LE(u[0], 1.0);
    }
  }
}

TEST(Sample, ContractionGridIsControllable) {
  SampleSpec spec;
  spec.grid = {3, 3};
  spec.t_max = 100;
  const ControllabilityMap map = sample_controllability(contraction(), zero_controller(2, 1, 1), spec);
  ASSERT_EQ(map.points.size(), 9u);
  EXPECT_EQ(map.points.front(), (std::vector<double>{-1.0, -1.0}));
  EXPECT_EQ(map.points[1], (std::vector<double>{0.0, -1.0}));
  EXPECT_EQ(map.count(SampleLabel::kControllable), 9);
  EXPECT_DOUBLE_EQ(map.fraction(SampleLabel::kControllable), 1.0);
  // 0.5^k <= 0.1 first holds at k = 4.
  EXPECT_EQ(map.steps.front(), 4);
  EXPECT_EQ(map.steps[4], 0);
}

TEST(Sample, SectionFixesCoordinates) {
  SampleSpec spec;
  spec.grid = {5};
  spec.fixed = {std::nullopt, 0.25};
  const auto pts = sample_points(double_integrator(), spec);
  ASSERT_EQ(pts.size(), 5u);
  for (const auto& p : pts) EXPECT_EQ(p[1], 0.25);
  EXPECT_EQ(pts.front()[0], -1.0);
  EXPECT_EQ(pts.back()[0], 1.0);
}

TEST(Sample, BadSpecsThrow) {
  SampleSpec spec;
  spec.grid = {3};
  EXPECT_THROW(sample_points(double_integrator(), spec), SampleError);
  SampleSpec uniform;
  uniform.kind = SampleSpec::Kind::kUniform;
  uniform.count = 4;
  EXPECT_THROW(sample_points(double_integrator(), uniform), SampleError);
}

TEST(SampleProperty, UniformDrawsAreSeedDeterministic) {
  SampleSpec spec;
  spec.kind = SampleSpec::Kind::kUniform;
  spec.count = 200;
  spec.seed = 77;
  const auto a = sample_points(double_integrator(), spec);
  const auto b = sample_points(double_integrator(), spec);
  EXPECT_EQ(a, b);
  spec.seed = 78;
  EXPECT_NE(sample_points(double_integrator(), spec), a);
  for (const auto& p : a) {
    EXPECT_GE(p[0], -1.0);
    EXPECT_LE(p[0], 1.0);
  }
}

TEST(SampleProperty, LabelsDoNotDependOnThreadCount) {
  const auto e = examples::get("double_integrator");
  SampleSpec spec;
  spec.kind = SampleSpec::Kind::kUniform;
  spec.count = 300;
  spec.seed = 5;
  spec.t_max = e.t_max;
  spec.threads = 1;
  const ControllabilityMap one = sample_controllability(e.system, *e.reference_controller, spec);
  spec.threads = 4;
  const ControllabilityMap four = sample_controllability(e.system, *e.reference_controller, spec);
  EXPECT_EQ(one.points, four.points);
  EXPECT_EQ(one.labels, four.labels);
  EXPECT_EQ(one.steps, four.steps);
  for (std::size_t k = 0; k < one.points.size(); k += 37) {
    const Trajectory t = rollout(e.system, *e.reference_controller, one.points[k], e.t_max);
    EXPECT_EQ(one.labels[k] == SampleLabel::kControllable, t.reached);
  }
}

TEST(Sample, DoubleIntegratorReferenceGrid) {
  const auto e = examples::get("double_integrator");
  SampleSpec spec;
  spec.grid = {21, 21};
  spec.t_max = e.t_max;
  const ControllabilityMap map = sample_controllability(e.system, *e.reference_controller, spec);
  const double frac = map.fraction(SampleLabel::kControllable);
  EXPECT_GE(frac, 0.5);
  EXPECT_NEAR(frac, 0.8979591836734694, 0.02);
}

TEST(Output, TrajectoryCsvAndMapSummary) {
  const auto e = examples::get("double_integrator");
  const Trajectory t = rollout(e.system, *e.reference_controller, {0.4, 0.6}, e.t_max);
  std::ostringstream csv;
  write_trajectory_csv(t, csv);
  std::istringstream lines(csv.str());
  std::string header, line;
  std::getline(lines, header);
  EXPECT_EQ(header, "t,x1,x2,u1,mode");
  std::size_t rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, t.states.size());

  SampleSpec spec;
  spec.grid = {3, 3};
  const ControllabilityMap map = sample_controllability(contraction(), zero_controller(2, 1, 1), spec);
  const auto doc = map_summary(map);
  EXPECT_EQ(doc["counts"]["controllable"], 9);
  std::ostringstream mcsv;
  write_map_csv(map, mcsv);
  EXPECT_EQ(mcsv.str().substr(0, 15), "x1,x2,label\n-1,");
}

}  // namespace
}  // namespace occsynth
