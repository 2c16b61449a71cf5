#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "occsynth/moments.h"
#include "occsynth/random.h"
#include "test_util.h"

namespace occsynth {
namespace {

using testing::random_point;
using testing::random_real_poly;

MultiIndex mi(std::vector<int> e) { return MultiIndex(std::move(e)); }

double min_eig(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly)
      .eigenvalues()
      .minCoeff();
}

Box random_box(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> c(-2.0, 2.0), w(0.1, 2.0);
  Box b;
  for (int k = 0; k < n; ++k) {
    const double lo = c(rng);
    b.push_back({lo, lo + w(rng)});
  }
  return b;
}

// Random atomic measure: a few weighted Diracs.
MomentSequence atomic(std::mt19937_64& rng, int n, int degree, int atoms,
                      std::vector<std::vector<double>>* points = nullptr) {
  std::uniform_real_distribution<double> mass(0.1, 2.0);
  MomentSequence y(n, degree);
  for (int a = 0; a < atoms; ++a) {
    const auto p = random_point(rng, n);
    const MomentSequence d = dirac_moments(p, degree, mass(rng));
    for (int i = 0; i < y.size(); ++i) y.values()[i] += d.values()[i];
    if (points) points->push_back(p);
  }
  return y;
}

TEST(LebesgueBox, Examples) {
  const MomentSequence y = lebesgue_box_moments({{-1, 1}, {-1, 1}}, 4);
  EXPECT_DOUBLE_EQ(y[mi({0, 0})], 4.0);
  EXPECT_DOUBLE_EQ(y[mi({1, 0})], 0.0);
  EXPECT_NEAR(y[mi({2, 2})], 4.0 / 9.0, 1e-15);
  EXPECT_THROW(lebesgue_box_moments({{1, 1}}, 2), MomentError);
}

TEST(LebesgueBox, ClosedFormProductOnRandomBoxes) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 2 + trial % 3;
    const Box box = random_box(rng, n);
    const MomentSequence y = lebesgue_box_moments(box, 8);
    for (const auto& a : enumerate_monomials(n, 8)) {
      double expected = 1.0;
      for (int k = 0; k < n; ++k) {
        expected *= (std::pow(box[k].hi, a[k] + 1) - std::pow(box[k].lo, a[k] + 1)) / (a[k] + 1);
      }
      EXPECT_NEAR(y[a], expected, 1e-12);
    }
  }
}

TEST(LebesgueBoxProperty, AgreesWithMonteCarlo) {
  const Box box = {{-1.0, 0.5}, {-0.3, 1.0}};
  const int samples = 1000000;
  const int degree = 6;
  const double volume = 1.5 * 1.3;
  const auto basis = enumerate_monomials(2, degree);
  std::vector<double> sum(basis.size(), 0.0), sum_sq(basis.size(), 0.0);
  CounterRng rng(2718);
  for (int s = 0; s < samples; ++s) {
    const double x = rng.uniform(2 * s, box[0].lo, box[0].hi);
    const double t = rng.uniform(2 * s + 1, box[1].lo, box[1].hi);
    for (std::size_t i = 0; i < basis.size(); ++i) {
      const double v = volume * std::pow(x, basis[i][0]) * std::pow(t, basis[i][1]);
      sum[i] += v;
      sum_sq[i] += v * v;
    }
  }
  const MomentSequence y = lebesgue_box_moments(box, degree);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double mean = sum[i] / samples;
    const double var = sum_sq[i] / samples - mean * mean;
    const double se = std::sqrt(std::max(var, 0.0) / samples);
    EXPECT_LE(std::abs(mean - y.values()[i]), 3.0 * se + 1e-15) << i;
  }
}

TEST(CutBox, TriangleMatchesBetaIntegrals) {
  // {x, t >= 0, x + t <= 1}: integral of x^a t^b is a! b! / (a + b + 2)!.
  const MomentSequence y =
      lebesgue_cut_box_moments({{0, 1}, {0, 1}}, Polynomial::parse("1 - x1 - x2", 2), 6);
  for (const auto& a : enumerate_monomials(2, 6)) {
    const double expected =
        std::tgamma(a[0] + 1) * std::tgamma(a[1] + 1) / std::tgamma(a[0] + a[1] + 3);
    EXPECT_NEAR(y[a], expected, 1e-14);
  }
}

TEST(CutBox, CellMomentsFallBackToBox) {
  const SemialgebraicSet box = SemialgebraicSet::from_box({{-1, 1}, {0, 2}});
  EXPECT_EQ(*cell_lebesgue_moments(box, 4), lebesgue_box_moments(box.box(), 4));
  // A quadratic constraint has no built-in moments.
  const SemialgebraicSet disk = box.with_extra({Polynomial::parse("1 - x1^2 - x2^2", 2)});
  EXPECT_FALSE(cell_lebesgue_moments(disk, 2).has_value());
}

TEST(CutBox, HalfBoxByMonteCarlo) {
  const Box box = {{-1, 1}, {-1, 1}, {-1, 1}};
  const Polynomial h = Polynomial::parse("x1 - 0.5*x3 + 0.2", 3);
  const MomentSequence y = lebesgue_cut_box_moments(box, h, 2);
  CounterRng rng(31);
  const int samples = 400000;
  std::vector<double> sum(y.size(), 0.0);
  const auto basis = enumerate_monomials(3, 2);
  for (int s = 0; s < samples; ++s) {
    std::vector<double> x(3);
    for (int k = 0; k < 3; ++k) x[k] = rng.uniform(3 * s + k, -1.0, 1.0);
    if (h.evaluate(x) < 0) continue;
    for (std::size_t i = 0; i < basis.size(); ++i) {
      double v = 8.0;
      for (int k = 0; k < 3; ++k) v *= std::pow(x[k], basis[i][k]);
      sum[i] += v;
    }
  }
  for (std::size_t i = 0; i < basis.size(); ++i) {
    EXPECT_NEAR(sum[i] / samples, y.values()[i], 0.02) << i;
  }
}

TEST(MomentMatrix, Examples) {
  const MomentSequence leb = lebesgue_box_moments({{-1, 1}}, 2);
  Eigen::MatrixXd expected(2, 2);
  expected << 2.0, 0.0, 0.0, 2.0 / 3.0;
  EXPECT_LE((moment_matrix(leb, 1) - expected).cwiseAbs().maxCoeff(), 1e-15);

  EXPECT_EQ(moment_matrix(MomentSequence(2, 4), 2), Eigen::MatrixXd::Zero(6, 6));

  const std::vector<double> p = {0.3, -0.7};
  const MomentSequence d = dirac_moments(p, 4, 2.5);
  Eigen::VectorXd v(6);
  int i = 0;
  for (const auto& a : enumerate_monomials(2, 2)) {
    v[i++] = std::pow(p[0], a[0]) * std::pow(p[1], a[1]);
  }
  const Eigen::MatrixXd m = moment_matrix(d, 2);
  EXPECT_LE((m - 2.5 * v * v.transpose()).cwiseAbs().maxCoeff(), 1e-14);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  lu.setThreshold(1e-10);
  EXPECT_EQ(lu.rank(), 1);
}

TEST(LocalizingMatrix, Examples) {
  const MomentSequence leb = lebesgue_box_moments({{-1, 1}}, 2);
  const Eigen::MatrixXd l = localizing_matrix(leb, Polynomial::parse("1 - x1^2", 1), 0);
  ASSERT_EQ(l.rows(), 1);
  EXPECT_NEAR(l(0, 0), 4.0 / 3.0, 1e-15);

  const MomentSequence d = dirac_moments({0.2, 0.1}, 4);
  EXPECT_GE(min_eig(localizing_matrix(d, Polynomial::parse("1 - x1^2 - x2", 2), 1)), -1e-12);
}

TEST(MatrixMachinery, AtomicMeasuresArePsdAndUnitLocalizerIsMomentMatrix) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 3;
    const int r = 1 + trial % 3;
    std::vector<std::vector<double>> pts;
    const MomentSequence y = atomic(rng, n, 2 * r + 2, 1 + trial % 5, &pts);
    EXPECT_GE(min_eig(moment_matrix(y, r)), -1e-10);
    EXPECT_EQ(localizing_matrix(y, Polynomial(n, 1.0), r), moment_matrix(y, r));
    // Ball constraint covering every atom.
    Polynomial ball(n, static_cast<double>(n) + 0.1);
    for (int k = 0; k < n; ++k) ball -= Polynomial::variable(n, k).pow(2);
    EXPECT_GE(min_eig(localizing_matrix(y, ball, r)), -1e-10);
  }
}

TEST(MomentMatrixProperty, LeadingPrincipalSubmatrix) {
  std::mt19937_64 rng(12);
  for (int n = 1; n <= 3; ++n) {
    const MomentSequence y = atomic(rng, n, 8, 4);
    for (int r = 0; r < 4; ++r) {
      const Eigen::MatrixXd small = moment_matrix(y, r);
      const Eigen::MatrixXd big = moment_matrix(y, r + 1);
      EXPECT_EQ(big.topLeftCorner(small.rows(), small.cols()), small);
    }
  }
}

TEST(Pushforward, Examples) {
  const std::vector<Polynomial> id = {Polynomial::variable(3, 0), Polynomial::variable(3, 1),
                                      Polynomial::variable(3, 2)};
  const MultiIndex beta = mi({1, 0, 1});
  const Eigen::VectorXd row = pushforward_row(id, beta, 2);
  Eigen::VectorXd unit = Eigen::VectorXd::Zero(row.size());
  unit[monomial_rank(beta)] = 1.0;
  EXPECT_EQ(row, unit);

  const std::vector<Polynomial> phi = {Polynomial::parse("x1 + 0.01*x2", 3),
                                       Polynomial::parse("x2 + 0.01*x3", 3)};
  const Eigen::VectorXd di = pushforward_row(phi, mi({1, 0}), 2);
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(10);
  expected[monomial_rank(mi({1, 0, 0}))] = 1.0;
  expected[monomial_rank(mi({0, 1, 0}))] = 0.01;
  EXPECT_EQ(di, expected);
}

TEST(PushforwardProperty, MatchesDirectEvaluation) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Polynomial> phi;
    for (int k = 0; k < 2; ++k) phi.push_back(random_real_poly(rng, 3, 2, 5));
    const MultiIndex beta = trial % 3 == 0 ? mi({2, 0}) : (trial % 3 == 1 ? mi({1, 1}) : mi({0, 2}));
    const auto pt = random_point(rng, 3);
    const Eigen::VectorXd row = pushforward_row(phi, beta, 4);
    const MomentSequence d = dirac_moments(pt, 4);
    const double got = row.dot(Eigen::Map<const Eigen::VectorXd>(d.values().data(), d.size()));
    const double expected = std::pow(phi[0].evaluate(pt), beta[0]) * std::pow(phi[1].evaluate(pt), beta[1]);
    EXPECT_NEAR(got, expected, 1e-10 * std::max(1.0, std::abs(expected)));
  }
}

TEST(MomentSequence, MarginalAndApply) {
  const MomentSequence y = lebesgue_box_moments({{0, 1}, {0, 2}, {-1, 1}}, 3);
  const MomentSequence x = y.marginal(2);
  EXPECT_EQ(x.var_count(), 2);
  for (const auto& a : enumerate_monomials(2, 3)) {
    EXPECT_DOUBLE_EQ(x[a], y[a.concat(MultiIndex(1))]);
  }
  EXPECT_NEAR(y.apply(Polynomial::parse("1 + x1*x2 - x3^2", 3)), 4.0 + 2.0 - 4.0 / 3.0, 1e-14);
  EXPECT_THROW(MomentSequence(2, 2, {1.0, 2.0}), MomentError);
}

TEST(MomentCsv, RoundTrip) {
  std::mt19937_64 rng(3);
  const MomentSequence y = atomic(rng, 3, 4, 3);
  std::stringstream ss;
  write_moments_csv(y, ss);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "a1,a2,a3,value");
  EXPECT_EQ(read_moments_csv(ss), y);
  std::stringstream bad("a1,value\n1,1\n");
  EXPECT_THROW(read_moments_csv(bad), MomentError);
}

}  // namespace
}  // namespace occsynth
