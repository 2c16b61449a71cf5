#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "occsynth/controller.h"
#include "occsynth/examples.h"
#include "occsynth/pipeline.h"
#include "test_util.h"

namespace occsynth {
namespace {

using testing::random_point;

// Moments of lambda_box(dx) x delta_{u = c(x)}(du), computed exactly:
// z_(alpha, gamma) = integral over the box of x^alpha prod_j c_j(x)^gamma_j.
MomentSequence planted_moments(const Box& box, const std::vector<Polynomial>& c, int degree) {
  const int n = static_cast<int>(box.size());
  const int m = static_cast<int>(c.size());
  int cdeg = 0;
  for (const auto& p : c) cdeg = std::max(cdeg, p.degree());
  const MomentSequence leb = lebesgue_box_moments(box, degree * std::max(1, cdeg));
  MomentSequence z(n + m, degree);
  for (const auto& a : enumerate_monomials(n + m, degree)) {
    std::vector<int> ex(a.exponents().begin(), a.exponents().begin() + n);
    Polynomial integrand = Polynomial::monomial(MultiIndex(ex));
    for (int j = 0; j < m; ++j) integrand = integrand * c[j].pow(a[n + j]);
    z[a] = leb.apply(integrand);
  }
  return z;
}

double coefficient_error(const Polynomial& got, const Polynomial& want) {
  const Polynomial diff = got - want;
  double worst = 0.0;
  for (const auto& [a, v] : diff.terms()) worst = std::max(worst, std::abs(v));
  return worst;
}

HybridSystem one_mode_box(int n) {
  HybridSystem s;
  s.n = n;
  s.m = 1;
  std::vector<Polynomial> f;
  std::vector<std::vector<Polynomial>> g;
  for (int k = 0; k < n; ++k) {
    f.push_back(Polynomial::variable(n, k));
    g.push_back({Polynomial(n)});
  }
  s.modes.push_back({SemialgebraicSet::from_box(Box(n, {-1.0, 1.0})), f, g});
  s.input_box = {{-1.0, 1.0}};
  s.target = SemialgebraicSet::from_box(Box(n, {-0.1, 0.1}));
  return s;
}

TEST(Extract, ZeroInputMeasure) {
  const MomentSequence z = planted_moments({{-1, 1}, {-1, 1}}, {Polynomial(2)}, 2);
  const ExtractedLaw law = extract(z, 2, 1, 1);
  EXPECT_FALSE(law.uncontrolled);
  EXPECT_LE(coefficient_error(law.law[0], Polynomial(2)), 1e-12);
}

TEST(Extract, AffineLaw) {
  const Polynomial c = Polynomial::parse("0.3 - 0.5*x1", 2);
  const ExtractedLaw law = extract(planted_moments({{-1, 1}, {-1, 1}}, {c}, 2), 2, 1, 1);
  EXPECT_EQ(law.rank, 3);
  EXPECT_NEAR(law.law[0].coefficient(MultiIndex(2)), 0.3, 1e-8);
  EXPECT_NEAR(law.law[0].coefficient(MultiIndex::unit(2, 0)), -0.5, 1e-8);
  EXPECT_NEAR(law.law[0].coefficient(MultiIndex::unit(2, 1)), 0.0, 1e-8);
}

TEST(Extract, OraclePlantedControllers) {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> lo(-1.5, 0.5), width(0.5, 1.5);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 3;
    const int m = 1 + (trial / 3) % 2;
    const int k = 1 + (trial / 6) % 2;
    Box box;
    for (int i = 0; i < n; ++i) {
      const double a = lo(rng);
      box.push_back({a, a + width(rng)});
    }
    std::vector<Polynomial> planted;
    for (int j = 0; j < m; ++j) planted.push_back(testing::random_real_poly(rng, n, k, 6));
    const MomentSequence z = planted_moments(box, planted, std::max(2 * k, k + 1));
    const ExtractedLaw law = extract(z, n, m, k);
    ASSERT_EQ(law.law.size(), static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
      EXPECT_LE(coefficient_error(law.law[j], planted[j]), 1e-7)
          << "trial " << trial << ": " << law.law[j].to_string() << " vs " << planted[j].to_string();
    }
  }
}

TEST(Extract, PreconditionsAndEmptyModes) {
  const MomentSequence z = planted_moments({{-1, 1}}, {Polynomial::parse("x1", 1)}, 2);
  EXPECT_THROW(extract(z, 1, 1, 2), ControllerError);
  EXPECT_THROW(extract(z, 2, 1, 1), ControllerError);
  const ExtractedLaw empty = extract(MomentSequence(2, 2), 1, 1, 1);
  EXPECT_TRUE(empty.uncontrolled);
  EXPECT_TRUE(empty.law[0].is_zero());
}

TEST(Apply, ClampsToUnitBox) {
  const HybridSystem s = one_mode_box(1);
  PiecewiseController ctrl{1, 1, {{Polynomial::parse("3*x1", 1)}}, true};
  EXPECT_EQ(apply(ctrl, s, {0.9}), std::vector<double>{1.0});
  EXPECT_EQ(apply(ctrl, s, {-0.9}), std::vector<double>{-1.0});
  EXPECT_DOUBLE_EQ(apply(ctrl, s, {0.2})[0], 0.6000000000000001);
  ctrl.clamp = false;
  EXPECT_DOUBLE_EQ(apply(ctrl, s, {0.9})[0], 2.7);
  EXPECT_THROW(apply(ctrl, s, {1.5}), OutOfDomainError);
}

TEST(Apply, ZeroController) {
  const HybridSystem s = examples::get("double_integrator").system;
  const PiecewiseController zero = zero_controller(2, 1, 2);
  for (const auto& x : {std::vector<double>{0.3, -0.2}, std::vector<double>{0.9, 0.9}}) {
    EXPECT_EQ(apply(zero, s, x), std::vector<double>{0.0});
  }
}

TEST(Apply, PublishedCoefficients) {
  const auto pend = examples::get("pendulum_wall");
  EXPECT_DOUBLE_EQ(apply(*pend.reference_controller, pend.system, {0.0, 0.0})[0], 0.10336);
  const auto di = examples::get("double_integrator");
  EXPECT_EQ(apply(*di.reference_controller, di.system, {0.0, 0.0})[0], -0.079924);
  // Mode 1 law on its own cell.
  EXPECT_NEAR(apply(*di.reference_controller, di.system, {0.8, 0.0})[0],
              -0.36197 - 0.53351 * 0.8, 1e-15);
}

TEST(ApplyProperty, ClampedOutputIsInBoxAndIdempotent) {
  const auto di = examples::get("double_integrator");
  PiecewiseController ctrl = *di.reference_controller;
  ctrl.laws[0][0] = 5.0 * ctrl.laws[0][0];
  ctrl.clamp = true;
  std::mt19937_64 rng(6);
  for (int t = 0; t < 1000; ++t) {
    const auto x = random_point(rng, 2);
    const auto u = apply(ctrl, di.system, x);
    ASSERT_GE(u[0], -1.0);
    ASSERT_LE(u[0], 1.0);
    EXPECT_EQ(clamp_unit(u), u);
    EXPECT_EQ(clamp_unit(clamp_unit(ctrl.evaluate(mode_of(di.system, x), x))), u);
  }
}

TEST(ControllerFile, JsonRoundTrip) {
  for (const auto& name : {"double_integrator", "pendulum_wall"}) {
    const PiecewiseController ctrl = *examples::get(name).reference_controller;
    std::stringstream ss;
    write_controller(ctrl, ss);
    EXPECT_EQ(read_controller(ss), ctrl);
    const auto doc = controller_to_json(ctrl);
    EXPECT_EQ(doc["modes"].size(), 2u);
    EXPECT_EQ(controller_from_json(doc), ctrl);
  }
  std::istringstream bad("{\"n\": 2, \"m\": 1, \"modes\": [{\"mode\": 4, \"u\": [\"x1\"]}]}");
  EXPECT_THROW(read_controller(bad), ControllerError);
  std::istringstream garbage("not json");
  EXPECT_THROW(read_controller(garbage), ControllerError);
}

TEST(ControllerFile, PublishedCoefficientsEchoedVerbatim) {
  const auto doc = controller_to_json(*examples::get("double_integrator").reference_controller);
  EXPECT_EQ(doc["modes"][0]["u"][0], "-0.079924 - 1.1147*x1 - 1.4952*x2");
  EXPECT_EQ(doc["modes"][1]["u"][0], "-0.36197 - 0.53351*x1 - 0.6395*x2");
}

TEST(Pipeline, DoubleIntegratorFeedbackSigns) {
  const auto di = examples::get("double_integrator");
  SynthOptions o;
  o.relaxation.occupation_penalty = di.occupation_penalty;
  o.clamp = di.clamp_inputs;
  const SynthResult r = synthesize(di.system, o);
  ASSERT_TRUE(r.solution.converged());
  ASSERT_EQ(r.controller.mode_count(), 2);
  for (int i = 0; i < 2; ++i) {
    const Polynomial& u = r.controller.laws[i][0];
    EXPECT_LE(u.degree(), 1);
    EXPECT_LT(u.coefficient(MultiIndex::unit(2, 0)), 0.0) << u.to_string();
    EXPECT_LT(u.coefficient(MultiIndex::unit(2, 1)), 0.0) << u.to_string();
    EXPECT_FALSE(r.laws[i].uncontrolled);
  }
  EXPECT_TRUE(r.grid_passed());
  const auto summary = synth_summary(r);
  EXPECT_EQ(summary["status"], "optimal");
  EXPECT_EQ(summary["extraction"].size(), 2u);
}

TEST(Pipeline, ExtractionDegreeCheck) {
  const auto di = examples::get("double_integrator");
  EXPECT_NO_THROW(check_extraction_degree(di.system, 1, 1));
  EXPECT_THROW(check_extraction_degree(di.system, 1, 2), ControllerError);
  EXPECT_NO_THROW(check_extraction_degree(di.system, 2, 2));
}

}  // namespace
}  // namespace occsynth
