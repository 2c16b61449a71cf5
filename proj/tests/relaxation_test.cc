#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "json.hpp"
#include "occsynth/examples.h"
#include "occsynth/relaxation.h"
#include "occsynth/sim.h"

namespace occsynth {
namespace {

HybridSystem double_integrator() { return examples::get("double_integrator").system; }

RelaxationOptions penalized() {
  RelaxationOptions o;
  o.occupation_penalty = 1e-3;
  return o;
}

// One relaxation of the double integrator solved once and shared.
struct SolvedDi {
  Relaxation relax;
  SdpSolution solution;
  std::vector<MomentSequence> moments;
};

const SolvedDi& solved(int r) {
  static std::map<int, SolvedDi> cache;
  auto it = cache.find(r);
  if (it == cache.end()) {
    SolvedDi s;
    s.relax = build_relaxation(double_integrator(), r, penalized());
    s.solution = solve(s.relax.program);
    s.moments = recover_moments(s.relax, s.solution.primal);
    it = cache.emplace(r, std::move(s)).first;
  }
  return it->second;
}

int ceil_half(const Polynomial& p) { return (p.degree() + 1) / 2; }

TEST(OrderMin, Examples) {
  EXPECT_EQ(relaxation_order_min(double_integrator()), 1);

  HybridSystem linear;
  linear.n = 1;
  linear.m = 1;
  linear.modes.push_back({SemialgebraicSet::from_box({{-1, 1}}), {Polynomial::parse("0.5*x1", 1)},
                          {{Polynomial(1, 0.1)}}});
  linear.input_box = {{-1, 1}};
  linear.target = SemialgebraicSet::from_box({{-0.1, 0.1}});
  EXPECT_EQ(relaxation_order_min(linear), 1);

  HybridSystem quartic = double_integrator();
  quartic.target = quartic.target.with_extra({Polynomial::parse("0.01 - x1^4 - x2^4", 2)});
  EXPECT_EQ(relaxation_order_min(quartic), 2);
  EXPECT_THROW(assemble_primal(quartic, 1), RelaxationError);
}

TEST(Assemble, DoubleIntegratorCounts) {
  const SdpProblem p = assemble_primal(double_integrator(), 1);
  // y0 and yhat0 per mode (6 each), yT (6), z per mode (10), y01 and y10 (10).
  EXPECT_EQ(p.variable_count, 2 * 6 * 2 + 6 + 2 * 10 + 2 * 10);
  int liouville = 0, domination = 0;
  for (const auto& row : p.equalities) (row.family == RowFamily::kLiouville ? liouville : domination)++;
  EXPECT_EQ(liouville, 2 * 6);
  EXPECT_EQ(domination, 2 * 6);
  EXPECT_EQ(p.sequences.size(), 9u);
  EXPECT_EQ(p.objective.size(), 2u);
  for (const auto& [var, c] : p.objective) {
    EXPECT_EQ(c, 1.0);
    const SequenceSpec& s = p.sequences[p.sequence_of(var)];
    EXPECT_EQ(s.kind, SequenceKind::kInitial);
    EXPECT_EQ(var, s.offset);
  }
}

TEST(Assemble, BlockOrdersFollowTruncation) {
  for (int r = 1; r <= 2; ++r) {
    const SdpProblem p = assemble_primal(double_integrator(), r);
    for (const auto& blk : p.blocks) {
      const SequenceSpec& s = p.sequences[blk.sequence];
      EXPECT_EQ(blk.order, s.degree / 2 - ceil_half(blk.multiplier)) << blk.label;
      EXPECT_GE(blk.order, 0);
    }
    for (const auto& row : p.equalities) {
      for (const auto& [var, c] : row.coeffs) {
        EXPECT_GE(var, 0);
        EXPECT_LT(var, p.variable_count);
      }
    }
  }
}

TEST(Assemble, MassRowOfTargetMode) {
  // beta = 0 in mode 0: mass(yT) = mass(y0[0]) + mass(y[1,0]); z cancels.
  const SdpProblem p = assemble_primal(double_integrator(), 1);
  const MultiIndex zero(2);
  for (const auto& row : p.equalities) {
    if (row.family != RowFamily::kLiouville || row.mode != 0 || !(row.beta == zero)) continue;
    std::map<int, double> got(row.coeffs.begin(), row.coeffs.end());
    const int yt = p.sequences[p.find_sequence(SequenceKind::kFinal, 0)].offset;
    const int y00 = p.sequences[p.find_sequence(SequenceKind::kInitial, 0)].offset;
    const int y10 = p.sequences[p.find_sequence(SequenceKind::kTransition, 1, 0)].offset;
    EXPECT_EQ(got, (std::map<int, double>{{yt, 1.0}, {y00, -1.0}, {y10, -1.0}}));
    EXPECT_EQ(row.rhs, 0.0);
    return;
  }
  FAIL() << "no mass row for mode 0";
}

TEST(Assemble, SingleModeReducesToPlainLiouville) {
  HybridSystem s = double_integrator();
  s.modes.resize(1);
  s.modes[0].cell = SemialgebraicSet::from_box({{-1, 1}, {-1, 1}});
  s.switches.clear();
  const SdpProblem p = assemble_primal(s, 1);
  EXPECT_EQ(p.sequences.size(), 4u);  // y0, yhat0, yT, z
  const int yt = p.sequences[p.find_sequence(SequenceKind::kFinal, 0)].offset;
  const int y0 = p.sequences[p.find_sequence(SequenceKind::kInitial, 0)].offset;
  const int z = p.sequences[p.find_sequence(SequenceKind::kOccupation, 0)].offset;
  const auto phi = s.phi(0);
  for (const auto& row : p.equalities) {
    if (row.family != RowFamily::kLiouville) continue;
    // yT + pi_* z - phi_* z - y0 = 0, moment-wise.
    std::map<int, double> expected;
    expected[yt + monomial_rank(row.beta)] += 1.0;
    expected[y0 + monomial_rank(row.beta)] -= 1.0;
    expected[z + monomial_rank(row.beta.concat(MultiIndex(1)))] += 1.0;
    const Eigen::VectorXd push = pushforward_row(phi, row.beta, 2);
    for (int k = 0; k < push.size(); ++k) expected[z + k] -= push[k];
    for (auto it = expected.begin(); it != expected.end();) {
      it = std::abs(it->second) < 1e-15 ? expected.erase(it) : std::next(it);
    }
    std::map<int, double> got(row.coeffs.begin(), row.coeffs.end());
    ASSERT_EQ(got.size(), expected.size());
    for (const auto& [var, c] : expected) EXPECT_NEAR(got[var], c, 1e-15);
  }
}

TEST(Assemble, TrajectoryMeasuresSatisfyLiouville) {
  // Counting measures of one closed-loop run: steps that stay in a cell go
  // to z, steps that switch cells go to y[i,j], the arrival state to yT.
  const auto entry = examples::get("double_integrator");
  const HybridSystem& s = entry.system;
  const SdpProblem p = assemble_primal(s, 1);
  const Trajectory traj = rollout(s, *entry.reference_controller, {0.8, -0.9}, 1000);
  ASSERT_TRUE(traj.reached);
  std::vector<MomentSequence> m;
  for (const auto& seq : p.sequences) m.emplace_back(seq.var_count, seq.degree);
  auto add = [&](int seq, const std::vector<double>& point) {
    const MomentSequence d = dirac_moments(point, p.sequences[seq].degree);
    for (int k = 0; k < d.size(); ++k) m[seq].values()[k] += d.values()[k];
  };
  add(p.find_sequence(SequenceKind::kInitial, traj.modes[0]), traj.states[0]);
  int switches = 0;
  for (std::size_t t = 0; t + 1 < traj.states.size(); ++t) {
    std::vector<double> xu = traj.states[t];
    xu.insert(xu.end(), traj.inputs[t].begin(), traj.inputs[t].end());
    const int i = traj.modes[t], j = traj.modes[t + 1];
    if (i == j) {
      add(p.find_sequence(SequenceKind::kOccupation, i), xu);
    } else {
      ++switches;
      ASSERT_EQ(i, 1) << "run leaves the target cell";
      add(p.find_sequence(SequenceKind::kTransition, i, j), xu);
    }
  }
  EXPECT_EQ(switches, 1);
  add(p.find_sequence(SequenceKind::kFinal, 0), traj.states.back());
  const ResidualReport rep = equality_residuals(p, m);
  EXPECT_LE(rep.liouville_max, 1e-10);
}

TEST(Conic, SidecarMapsEveryVariable) {
  const Relaxation relax = build_relaxation(double_integrator(), 1);
  std::stringstream ss;
  write_index_sidecar(relax, ss);
  const auto doc = nlohmann::json::parse(ss.str());
  EXPECT_EQ(doc["order"], 1);
  EXPECT_EQ(doc["variables"].size(), static_cast<std::size_t>(relax.problem.variable_count));
  EXPECT_EQ(relax.layout.problem_rows, static_cast<int>(relax.problem.equalities.size()));
}

TEST(Conic, StrictBlocksDropsMomentMatrices) {
  RelaxationOptions strict;
  strict.strict_blocks = true;
  const SdpProblem a = assemble_primal(double_integrator(), 1);
  const SdpProblem b = assemble_primal(double_integrator(), 1, strict);
  EXPECT_EQ(a.blocks.size(), b.blocks.size() + a.sequences.size());
  EXPECT_NO_THROW(build_relaxation(double_integrator(), 1, strict));
}

TEST(Conic, NonBoxCellWithoutMomentsIsRejected) {
  HybridSystem s = double_integrator();
  s.modes[1].cell = s.modes[1].cell.with_extra({Polynomial::parse("1 - x1^2 - x2^2", 2)});
  EXPECT_THROW(assemble_primal(s, 1), RelaxationError);
  RelaxationOptions o;
  o.cell_moments = {MomentSequence(), lebesgue_box_moments({{0.5, 1}, {-1, 1}}, 2)};
  EXPECT_NO_THROW(assemble_primal(s, 1, o));
}

TEST(Solve, DoubleIntegratorFirstOrder) {
  const SolvedDi& s = solved(1);
  ASSERT_EQ(s.solution.status, SolveStatus::kOptimal);
  const ResidualReport rep = equality_residuals(s.relax.problem, s.moments);
  EXPECT_LE(rep.max(), 10 * 1e-8);
  EXPECT_LE(s.solution.primal_objective, s.solution.dual_objective + 1e-5);
  // Domination caps the initial mass at the area of X.
  EXPECT_LE(objective_value(s.relax.problem, s.moments), 3.0 + 1.0 + 1e-6);
  EXPECT_LE(s.solution.primal_objective, 4.0 + 1e-6);
}

TEST(Solve, DualCertificate) {
  const SolvedDi& s = solved(1);
  const DualCertificate cert = read_dual(s.relax, s.solution);
  EXPECT_LE(cert.max_identity_residual(), 1e-6);
  EXPECT_GE(cert.min_gram_eigenvalue(), -1e-8);
  EXPECT_NEAR(cert.objective, s.solution.dual_objective, 1e-6);
  const auto checks = grid_checks(s.relax.problem, cert, 100, 1e-6);
  ASSERT_EQ(checks.size(), 5u);
  for (const auto& g : checks) {
    EXPECT_TRUE(g.passed) << g.name << " min " << g.min_value;
    EXPECT_EQ(g.points, 100);
  }
}

TEST(SolveProperty, HierarchyIsMonotone) {
  const SolvedDi& r1 = solved(1);
  const SolvedDi& r2 = solved(2);
  ASSERT_TRUE(r2.solution.converged()) << to_string(r2.solution.status);
  EXPECT_LE(r2.solution.primal_objective, r1.solution.primal_objective + 1e-6);
  EXPECT_LE(r2.solution.primal_objective, r2.solution.dual_objective + 1e-5);
  EXPECT_LE(objective_value(r2.relax.problem, r2.moments), 4.0 + 1e-6);
}

TEST(SolveProperty, ResidualsWithinTenTolerances) {
  const SolvedDi& s = solved(2);
  ASSERT_TRUE(s.solution.converged());
  // The solver stops at 100x tolerance when it reports near-optimal.
  const double tol = s.solution.status == SolveStatus::kOptimal ? 1e-8 : 100 * 1e-8;
  const ResidualReport rep = equality_residuals(s.relax.problem, s.moments);
  EXPECT_LE(rep.max(), 10 * tol);
}

}  // namespace
}  // namespace occsynth
