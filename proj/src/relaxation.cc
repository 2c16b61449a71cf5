#include "occsynth/relaxation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>
#include <ostream>

#include "json.hpp"

namespace occsynth {

std::string to_string(RowFamily family) {
  return family == RowFamily::kLiouville ? "liouville" : "domination";
}

int SdpProblem::find_sequence(SequenceKind kind, int mode, int to_mode) const {
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    const auto& seq = sequences[s];
    if (seq.kind == kind && seq.mode == mode && seq.to_mode == to_mode) {
      return static_cast<int>(s);
    }
  }
  return -1;
}

int SdpProblem::variable(int s, const MultiIndex& alpha) const {
  const SequenceSpec& seq = sequences.at(s);
  if (alpha.size() != seq.var_count || alpha.degree() > seq.degree) {
    throw RelaxationError("multi-index outside sequence " + seq.name);
  }
  return seq.offset + monomial_rank(alpha);
}

int SdpProblem::sequence_of(int var) const {
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    if (var >= sequences[s].offset && var < sequences[s].offset + sequences[s].size()) {
      return static_cast<int>(s);
    }
  }
  throw RelaxationError("variable index out of range");
}

namespace {

int half_degree(const Polynomial& h) { return (h.degree() + 1) / 2; }

int max_half_degree(const SemialgebraicSet& set) {
  int r = 0;
  for (const auto& h : set.polys()) r = std::max(r, half_degree(h));
  return r;
}

// Multipliers for z_i: the cell constraints in x and the input constraints
// in u, both over the joint variables.
std::vector<Polynomial> occupation_multipliers(const HybridSystem& sys, int mode) {
  const int nv = sys.n + sys.m;
  std::vector<Polynomial> out;
  const SemialgebraicSet cell = sys.modes[mode].cell.with_ball();
  const SemialgebraicSet inputs = sys.input_set().with_ball();
  for (const auto& h : cell.polys()) out.push_back(h.lift(nv, 0));
  for (const auto& h : inputs.polys()) out.push_back(h.lift(nv, sys.n));
  return out;
}

MomentSequence reference_moments(const HybridSystem& sys, int mode, int degree,
                                 const RelaxationOptions& options) {
  if (mode < static_cast<int>(options.cell_moments.size()) &&
      options.cell_moments[mode].size() > 0) {
    const MomentSequence& given = options.cell_moments[mode];
    if (given.var_count() != sys.n || given.max_degree() < degree) {
      throw RelaxationError("supplied Lebesgue moments for cell " + std::to_string(mode) +
                            " do not reach degree " + std::to_string(degree));
    }
    MomentSequence out(sys.n, degree);
    for (const auto& alpha : enumerate_monomials(sys.n, degree)) out[alpha] = given[alpha];
    return out;
  }
  auto leb = cell_lebesgue_moments(sys.modes[mode].cell, degree);
  if (!leb) {
    throw RelaxationError("cell " + std::to_string(mode) +
                          " is not a box or a box cut by one affine constraint; supply its "
                          "Lebesgue moments");
  }
  return *leb;
}

std::string mode_tag(int i) { return "[" + std::to_string(i) + "]"; }

}  // namespace

int relaxation_order_min(const HybridSystem& sys, const ModelOptions& options) {
  int r = std::max(1, max_half_degree(sys.target.with_ball()));
  r = std::max(r, max_half_degree(sys.input_set().with_ball()));
  for (const auto& md : sys.modes) r = std::max(r, max_half_degree(md.cell.with_ball()));
  for (const auto& [i, j] : sys.switches) {
    r = std::max(r, max_half_degree(build_transition_set(sys, i, j, options).set.with_ball()));
  }
  return r;
}

SdpProblem assemble_primal(const HybridSystem& sys, int r, const RelaxationOptions& options) {
  const int r_min = relaxation_order_min(sys, options.model);
  if (r < r_min) {
    throw RelaxationError("relaxation order " + std::to_string(r) + " is below r_min = " +
                          std::to_string(r_min));
  }
  SdpProblem prob;
  prob.system = sys;
  prob.order = r;
  const int n = sys.n;
  const int nv = sys.n + sys.m;
  const int modes = sys.mode_count();
  for (int i = 0; i < modes; ++i) prob.dynamics_degree.push_back(sys.phi_degree(i));
  for (const auto& [i, j] : sys.switches) {
    prob.transitions.push_back(build_transition_set(sys, i, j, options.model));
  }

  auto add_sequence = [&](std::string name, SequenceKind kind, int mode, int to_mode,
                          int var_count, int degree) {
    SequenceSpec seq{std::move(name), kind, mode, to_mode, var_count, degree,
                     prob.variable_count};
    prob.variable_count += seq.size();
    prob.sequences.push_back(std::move(seq));
    return static_cast<int>(prob.sequences.size()) - 1;
  };
  auto add_blocks = [&](int s, const std::vector<Polynomial>& hs, int full_order) {
    if (!options.strict_blocks) {
      prob.blocks.push_back(
          {s, Polynomial(prob.sequences[s].var_count, 1.0), full_order,
           prob.sequences[s].name + " moment matrix"});
    }
    for (std::size_t k = 0; k < hs.size(); ++k) {
      const int order = full_order - half_degree(hs[k]);
      if (order < 0) throw RelaxationError("localizing order below zero");
      prob.blocks.push_back({s, hs[k], order,
                             prob.sequences[s].name + " localizer " + std::to_string(k + 1)});
    }
  };

  std::vector<int> y0(modes), yhat(modes), z(modes);
  for (int i = 0; i < modes; ++i) {
    const auto cell = sys.modes[i].cell.with_ball().polys();
    y0[i] = add_sequence("y0" + mode_tag(i), SequenceKind::kInitial, i, -1, n, 2 * r);
    add_blocks(y0[i], cell, r);
    yhat[i] = add_sequence("yhat0" + mode_tag(i), SequenceKind::kInitialSlack, i, -1, n, 2 * r);
    add_blocks(yhat[i], cell, r);
  }
  const int final_seq = add_sequence("yT", SequenceKind::kFinal, 0, -1, n, 2 * r);
  add_blocks(final_seq, sys.target.with_ball().polys(), r);
  for (int i = 0; i < modes; ++i) {
    const int d = prob.dynamics_degree[i];
    z[i] = add_sequence("z" + mode_tag(i), SequenceKind::kOccupation, i, -1, nv, 2 * r * d);
    add_blocks(z[i], occupation_multipliers(sys, i), r * d);
  }
  std::vector<int> trans;
  for (std::size_t t = 0; t < sys.switches.size(); ++t) {
    const auto [i, j] = sys.switches[t];
    const int d = prob.dynamics_degree[i];
    const int s = add_sequence("y[" + std::to_string(i) + "," + std::to_string(j) + "]",
                               SequenceKind::kTransition, i, j, nv, 2 * r * d);
    add_blocks(s, prob.transitions[t].set.with_ball().polys(), r * d);
    trans.push_back(s);
  }

  const auto betas = enumerate_monomials(n, 2 * r);
  const MultiIndex u_zero(sys.m);
  std::vector<std::vector<Polynomial>> phis;
  for (int i = 0; i < modes; ++i) phis.push_back(sys.phi(i));

  for (int i = 0; i < modes; ++i) {
    for (const auto& beta : betas) {
      std::map<int, double> acc;
      const MultiIndex beta_xu = beta.concat(u_zero);
      if (i == 0) {
        acc[prob.variable(final_seq, beta)] += 1.0;
      } else {
        for (std::size_t t = 0; t < sys.switches.size(); ++t) {
          if (sys.switches[t].first == i) acc[prob.variable(trans[t], beta_xu)] += 1.0;
        }
      }
      acc[prob.variable(z[i], beta_xu)] += 1.0;
      auto subtract_pushforward = [&](int s, int mode) {
        const auto row = pushforward_row(phis[mode], beta, prob.sequences[s].degree);
        for (int k = 0; k < row.size(); ++k) {
          if (row[k] != 0.0) acc[prob.sequences[s].offset + k] -= row[k];
        }
      };
      subtract_pushforward(z[i], i);
      acc[prob.variable(y0[i], beta)] -= 1.0;
      for (std::size_t t = 0; t < sys.switches.size(); ++t) {
        if (sys.switches[t].second == i) subtract_pushforward(trans[t], sys.switches[t].first);
      }
      EqualityRow row{RowFamily::kLiouville, i, beta, {}, 0.0};
      double biggest = 0.0;
      for (const auto& [var, c] : acc) biggest = std::max(biggest, std::abs(c));
      for (const auto& [var, c] : acc) {
        if (std::abs(c) > 1e-13 * biggest) row.coeffs.emplace_back(var, c);
      }
      prob.equalities.push_back(std::move(row));
    }
  }
  for (int i = 0; i < modes; ++i) {
    const MomentSequence leb = reference_moments(sys, i, 2 * r, options);
    for (const auto& beta : betas) {
      EqualityRow row{RowFamily::kDomination, i, beta, {}, leb[beta]};
      row.coeffs.emplace_back(prob.variable(y0[i], beta), 1.0);
      row.coeffs.emplace_back(prob.variable(yhat[i], beta), 1.0);
      prob.equalities.push_back(std::move(row));
    }
  }

  const MultiIndex zero_x(n);
  for (int i = 0; i < modes; ++i) prob.objective.emplace_back(prob.variable(y0[i], zero_x), 1.0);
  if (options.occupation_penalty > 0.0) {
    for (int i = 0; i < modes; ++i) {
      prob.objective.emplace_back(prob.variable(z[i], MultiIndex(nv)),
                                  -options.occupation_penalty);
    }
  }
  return prob;
}

namespace {

struct RowBuilder {
  std::map<std::tuple<int, int, int>, double> acc;

  void add(const SparseEntry& at, double coef) {
    if (at.row == at.col) {
      acc[{at.block, at.row, at.col}] += coef;
    } else {
      acc[{at.block, at.row, at.col}] += 0.5 * coef;
    }
  }

  SparseMatrixEntries take(double scale) {
    SparseMatrixEntries out;
    for (const auto& [key, v] : acc) {
      if (v != 0.0) {
        out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), scale * v});
      }
    }
    acc.clear();
    return out;
  }
};

}  // namespace

Relaxation to_conic(SdpProblem problem, const RelaxationOptions& options) {
  (void)options;
  Relaxation out;
  ConicLayout& lay = out.layout;
  ConicProgram& prog = out.program;
  const SdpProblem& prob = problem;

  // Dense blocks in spec order, scalars gathered into one diagonal block.
  int scalar_count = 0;
  lay.spec_block.assign(prob.blocks.size(), -1);
  lay.diagonal_slot.assign(prob.blocks.size(), -1);
  for (std::size_t t = 0; t < prob.blocks.size(); ++t) {
    const auto& spec = prob.blocks[t];
    const int dim = spec.dimension(prob.sequences[spec.sequence].var_count);
    if (dim == 1) {
      lay.diagonal_slot[t] = scalar_count++;
    } else {
      lay.spec_block[t] = static_cast<int>(prog.block_sizes.size());
      prog.block_sizes.push_back(dim);
    }
  }

  // Canonical entries from the multiplier-1 moment matrices.
  lay.canonical.assign(prob.variable_count, SparseEntry{-1, 0, 0, 0.0});
  lay.negative_part.assign(prob.variable_count, SparseEntry{-1, 0, 0, 0.0});
  struct Repeat {
    SparseEntry at;
    int var;
  };
  std::vector<Repeat> repeats;
  for (std::size_t t = 0; t < prob.blocks.size(); ++t) {
    const auto& spec = prob.blocks[t];
    const auto& seq = prob.sequences[spec.sequence];
    const bool unit = spec.multiplier.degree() == 0 &&
                      spec.multiplier.coefficient(MultiIndex(seq.var_count)) == 1.0;
    if (!unit || 2 * spec.order < seq.degree || lay.spec_block[t] < 0) continue;
    const auto basis = enumerate_monomials(seq.var_count, spec.order);
    for (int a = 0; a < static_cast<int>(basis.size()); ++a) {
      for (int b = a; b < static_cast<int>(basis.size()); ++b) {
        const int var = seq.offset + monomial_rank(basis[a] + basis[b]);
        const SparseEntry at{lay.spec_block[t], a, b, 0.0};
        if (lay.canonical[var].block < 0) {
          lay.canonical[var] = at;
        } else {
          repeats.push_back({at, var});
        }
      }
    }
  }
  // Anything left over is a free variable: two diagonal slots.
  std::vector<std::pair<int, int>> free_slots;
  for (int v = 0; v < prob.variable_count; ++v) {
    if (lay.canonical[v].block >= 0) continue;
    free_slots.emplace_back(v, scalar_count);
    scalar_count += 2;
  }
  if (scalar_count > 0) {
    lay.diagonal_block = static_cast<int>(prog.block_sizes.size());
    prog.block_sizes.push_back(-scalar_count);
  }
  for (const auto& [v, slot] : free_slots) {
    lay.canonical[v] = {lay.diagonal_block, slot, slot, 0.0};
    lay.negative_part[v] = {lay.diagonal_block, slot + 1, slot + 1, 0.0};
  }
  auto entry_of_spec = [&](std::size_t t, int a, int b) {
    if (lay.spec_block[t] >= 0) return SparseEntry{lay.spec_block[t], a, b, 0.0};
    return SparseEntry{lay.diagonal_block, lay.diagonal_slot[t], lay.diagonal_slot[t], 0.0};
  };

  RowBuilder builder;
  auto add_var = [&](int var, double coef) {
    builder.add(lay.canonical[var], coef);
    if (lay.negative_part[var].block >= 0) builder.add(lay.negative_part[var], -coef);
  };

  for (const auto& row : prob.equalities) {
    double biggest = 0.0;
    for (const auto& [var, c] : row.coeffs) biggest = std::max(biggest, std::abs(c));
    const double scale = biggest > 0.0 ? 1.0 / biggest : 1.0;
    for (const auto& [var, c] : row.coeffs) add_var(var, c);
    prog.constraints.push_back(builder.take(scale));
    prog.rhs.push_back(scale * row.rhs);
    lay.row_scale.push_back(scale);
  }
  lay.problem_rows = static_cast<int>(prob.equalities.size());

  for (const auto& rep : repeats) {
    builder.add(rep.at, 1.0);
    add_var(rep.var, -1.0);
    prog.constraints.push_back(builder.take(1.0));
    prog.rhs.push_back(0.0);
  }
  for (std::size_t t = 0; t < prob.blocks.size(); ++t) {
    const auto& spec = prob.blocks[t];
    const auto& seq = prob.sequences[spec.sequence];
    const bool unit = spec.multiplier.degree() == 0 &&
                      spec.multiplier.coefficient(MultiIndex(seq.var_count)) == 1.0;
    if (unit && 2 * spec.order >= seq.degree && lay.spec_block[t] >= 0) continue;
    double hmax = 1.0;
    for (const auto& [g, c] : spec.multiplier.terms()) hmax = std::max(hmax, std::abs(c));
    const auto basis = enumerate_monomials(seq.var_count, spec.order);
    for (int a = 0; a < static_cast<int>(basis.size()); ++a) {
      for (int b = a; b < static_cast<int>(basis.size()); ++b) {
        builder.add(entry_of_spec(t, a, b), 1.0);
        const MultiIndex ab = basis[a] + basis[b];
        for (const auto& [g, c] : spec.multiplier.terms()) {
          add_var(seq.offset + monomial_rank(g + ab), -c);
        }
        prog.constraints.push_back(builder.take(1.0 / hmax));
        prog.rhs.push_back(0.0);
      }
    }
  }

  for (const auto& [var, c] : prob.objective) add_var(var, c);
  prog.objective = builder.take(1.0);
  out.problem = std::move(problem);
  return out;
}

Relaxation build_relaxation(const HybridSystem& sys, int r, const RelaxationOptions& options) {
  return to_conic(assemble_primal(sys, r, options), options);
}

namespace {

double entry_value(const BlockMatrix& x, const SparseEntry& at) {
  const Eigen::MatrixXd& blk = x.at(at.block);
  return blk.cols() == 1 ? blk(at.row, 0) : blk(at.row, at.col);
}

}  // namespace

std::vector<MomentSequence> recover_moments(const Relaxation& relax, const BlockMatrix& primal) {
  const auto& prob = relax.problem;
  const auto& lay = relax.layout;
  std::vector<MomentSequence> out;
  for (const auto& seq : prob.sequences) {
    MomentSequence y(seq.var_count, seq.degree);
    for (int k = 0; k < seq.size(); ++k) {
      const int var = seq.offset + k;
      double v = entry_value(primal, lay.canonical[var]);
      if (lay.negative_part[var].block >= 0) v -= entry_value(primal, lay.negative_part[var]);
      y.values()[k] = v;
    }
    out.push_back(std::move(y));
  }
  return out;
}

namespace {

double moment_of(const SdpProblem& prob, const std::vector<MomentSequence>& moments, int var) {
  const int s = prob.sequence_of(var);
  return moments[s].values()[var - prob.sequences[s].offset];
}

}  // namespace

ResidualReport equality_residuals(const SdpProblem& problem,
                                  const std::vector<MomentSequence>& moments) {
  ResidualReport rep;
  for (const auto& row : problem.equalities) {
    double lhs = 0.0;
    for (const auto& [var, c] : row.coeffs) lhs += c * moment_of(problem, moments, var);
    const double res = std::abs(lhs - row.rhs);
    double& slot = row.family == RowFamily::kLiouville ? rep.liouville_max : rep.domination_max;
    slot = std::max(slot, res);
  }
  return rep;
}

double objective_value(const SdpProblem& problem, const std::vector<MomentSequence>& moments) {
  double sum = 0.0;
  for (int s = 0; s < static_cast<int>(problem.sequences.size()); ++s) {
    if (problem.sequences[s].kind == SequenceKind::kInitial) sum += moments[s].mass();
  }
  return sum;
}

double DualCertificate::max_identity_residual() const {
  double r = 0.0;
  for (const auto& m : modules) r = std::max(r, m.identity_residual);
  return r;
}

double DualCertificate::min_gram_eigenvalue() const {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& m : modules) r = std::min(r, m.min_gram_eigenvalue);
  return r;
}

namespace {

MomentSequence domination_rhs(const SdpProblem& prob, int mode) {
  MomentSequence out(prob.system.n, 2 * prob.order);
  for (const auto& row : prob.equalities) {
    if (row.family == RowFamily::kDomination && row.mode == mode) out[row.beta] = row.rhs;
  }
  return out;
}

}  // namespace

DualCertificate read_dual(const Relaxation& relax, const SdpSolution& solution) {
  const auto& prob = relax.problem;
  const auto& lay = relax.layout;
  const auto& prog = relax.program;
  if (static_cast<int>(solution.dual.size()) != prog.constraint_count()) {
    throw RelaxationError("dual solution is unavailable or has the wrong length");
  }
  if (solution.status == SolveStatus::kInfeasibleDetected) {
    throw RelaxationError("solver reported infeasibility; no dual certificate");
  }
  BlockMatrix slack = solution.dual_slack;
  if (slack.size() != prog.block_sizes.size()) {
    slack = to_blocks(prog.objective, prog.block_sizes);
    for (auto& blk : slack) blk = -blk;
    for (int k = 0; k < prog.constraint_count(); ++k) {
      if (solution.dual[k] == 0.0) continue;
      const BlockMatrix a = to_blocks(prog.constraints[k], prog.block_sizes);
      for (std::size_t b = 0; b < slack.size(); ++b) slack[b] += solution.dual[k] * a[b];
    }
  }

  const int n = prob.system.n;
  const int modes = prob.system.mode_count();
  DualCertificate cert;
  cert.v.assign(modes, Polynomial(n));
  cert.w.assign(modes, Polynomial(n));
  std::vector<double> coef(prob.variable_count, 0.0);
  for (int k = 0; k < lay.problem_rows; ++k) {
    const EqualityRow& row = prob.equalities[k];
    const double y = lay.row_scale[k] * solution.dual[k];
    const Polynomial term = Polynomial::monomial(row.beta, y);
    (row.family == RowFamily::kLiouville ? cert.v : cert.w)[row.mode] += term;
    for (const auto& [var, c] : row.coeffs) coef[var] += y * c;
  }
  for (const auto& [var, c] : prob.objective) coef[var] -= c;

  for (int i = 0; i < modes; ++i) {
    const MomentSequence leb = domination_rhs(prob, i);
    cert.objective += leb.apply(cert.w[i]);
  }

  cert.gram.assign(prob.sequences.size(), {});
  for (std::size_t s = 0; s < prob.sequences.size(); ++s) {
    const auto& seq = prob.sequences[s];
    Polynomial::TermMap target_terms;
    Eigen::VectorXd target(seq.size());
    for (int k = 0; k < seq.size(); ++k) target[k] = coef[seq.offset + k];
    const auto index = enumerate_monomials(seq.var_count, seq.degree);
    for (int k = 0; k < seq.size(); ++k) {
      if (target[k] != 0.0) target_terms[index[k]] = target[k];
    }
    cert.module_target.emplace_back(seq.var_count, std::move(target_terms));

    Eigen::VectorXd rebuilt = Eigen::VectorXd::Zero(seq.size());
    ModuleCheck check{seq.name, 0.0, std::numeric_limits<double>::infinity()};
    for (std::size_t t = 0; t < prob.blocks.size(); ++t) {
      const auto& spec = prob.blocks[t];
      if (spec.sequence != static_cast<int>(s)) continue;
      Eigen::MatrixXd g;
      if (lay.spec_block[t] >= 0) {
        g = slack[lay.spec_block[t]];
      } else {
        g = Eigen::MatrixXd::Constant(1, 1, slack[lay.diagonal_block](lay.diagonal_slot[t], 0));
      }
      const auto basis = enumerate_monomials(seq.var_count, spec.order);
      for (int a = 0; a < g.rows(); ++a) {
        for (int b = 0; b < g.cols(); ++b) {
          const MultiIndex ab = basis[a] + basis[b];
          for (const auto& [gamma, c] : spec.multiplier.terms()) {
            rebuilt[monomial_rank(gamma + ab)] += g(a, b) * c;
          }
        }
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
      check.min_gram_eigenvalue = std::min(check.min_gram_eigenvalue, es.eigenvalues().minCoeff());
      cert.gram[s].push_back(std::move(g));
    }
    check.identity_residual = (target - rebuilt).norm();
    cert.modules.push_back(std::move(check));
  }
  return cert;
}

namespace {

std::vector<std::vector<double>> grid_points(const Box& box, int points) {
  const int n = static_cast<int>(box.size());
  const int per_axis =
      std::max(2, static_cast<int>(std::lround(std::pow(static_cast<double>(points), 1.0 / n))));
  std::vector<std::vector<double>> out;
  std::vector<int> idx(n, 0);
  for (;;) {
    std::vector<double> x(n);
    for (int k = 0; k < n; ++k) {
      x[k] = box[k].lo + (box[k].hi - box[k].lo) * idx[k] / (per_axis - 1);
    }
    out.push_back(std::move(x));
    int k = 0;
    while (k < n && ++idx[k] == per_axis) idx[k++] = 0;
    if (k == n) break;
  }
  return out;
}

}  // namespace

std::vector<GridCheck> grid_checks(const SdpProblem& problem, const DualCertificate& cert,
                                   int points_per_set, double tol) {
  std::vector<GridCheck> out;
  const auto& sys = problem.system;
  for (int i = 0; i < sys.mode_count(); ++i) {
    const auto& cell = sys.modes[i].cell;
    GridCheck w_check{"w" + mode_tag(i) + " >= 0 on X" + mode_tag(i), 0,
                      std::numeric_limits<double>::infinity(), false};
    GridCheck wv_check{"w" + mode_tag(i) + " - v" + mode_tag(i) + " - 1 >= 0 on X" + mode_tag(i),
                       0, std::numeric_limits<double>::infinity(), false};
    for (const auto& x : grid_points(cell.box(), points_per_set)) {
      if (!cell.contains(x, 1e-12)) continue;
      const double w = cert.w[i].evaluate(x);
      const double v = cert.v[i].evaluate(x);
      ++w_check.points;
      ++wv_check.points;
      w_check.min_value = std::min(w_check.min_value, w);
      wv_check.min_value = std::min(wv_check.min_value, w - v - 1.0);
    }
    w_check.passed = w_check.points > 0 && w_check.min_value >= -tol;
    wv_check.passed = wv_check.points > 0 && wv_check.min_value >= -tol;
    out.push_back(w_check);
    out.push_back(wv_check);
  }
  GridCheck v_check{"v[0] >= 0 on Z", 0, std::numeric_limits<double>::infinity(), false};
  for (const auto& x : grid_points(sys.target.box(), points_per_set)) {
    if (!sys.target.contains(x, 1e-12)) continue;
    ++v_check.points;
    v_check.min_value = std::min(v_check.min_value, cert.v[0].evaluate(x));
  }
  v_check.passed = v_check.points > 0 && v_check.min_value >= -tol;
  out.push_back(v_check);
  return out;
}

void write_index_sidecar(const Relaxation& relax, std::ostream& out) {
  using nlohmann::json;
  const auto& prob = relax.problem;
  const auto& lay = relax.layout;
  json doc;
  doc["order"] = prob.order;
  json vars = json::array();
  for (const auto& seq : prob.sequences) {
    const auto index = enumerate_monomials(seq.var_count, seq.degree);
    for (int k = 0; k < seq.size(); ++k) {
      const int var = seq.offset + k;
      json item;
      item["variable"] = var + 1;
      item["sequence"] = seq.name;
      item["alpha"] = index[k].exponents();
      const SparseEntry& at = lay.canonical[var];
      item["block"] = at.block + 1;
      item["row"] = at.row + 1;
      item["col"] = at.col + 1;
      if (lay.negative_part[var].block >= 0) {
        item["negative_part"] = {lay.negative_part[var].block + 1,
                                 lay.negative_part[var].row + 1,
                                 lay.negative_part[var].col + 1};
      }
      vars.push_back(std::move(item));
    }
  }
  doc["variables"] = std::move(vars);
  json rows = json::array();
  for (int k = 0; k < relax.program.constraint_count(); ++k) {
    json item;
    item["constraint"] = k + 1;
    if (k < lay.problem_rows) {
      const auto& row = prob.equalities[k];
      item["family"] = to_string(row.family);
      item["mode"] = row.mode;
      item["beta"] = row.beta.exponents();
      item["scale"] = lay.row_scale[k];
    } else {
      item["family"] = "consistency";
    }
    rows.push_back(std::move(item));
  }
  doc["constraints"] = std::move(rows);
  json blocks = json::array();
  for (std::size_t t = 0; t < prob.blocks.size(); ++t) {
    const auto& spec = prob.blocks[t];
    json item;
    item["label"] = spec.label;
    item["sequence"] = prob.sequences[spec.sequence].name;
    item["multiplier"] = spec.multiplier.to_string();
    item["order"] = spec.order;
    if (lay.spec_block[t] >= 0) {
      item["block"] = lay.spec_block[t] + 1;
    } else {
      item["block"] = lay.diagonal_block + 1;
      item["slot"] = lay.diagonal_slot[t] + 1;
    }
    blocks.push_back(std::move(item));
  }
  doc["blocks"] = std::move(blocks);
  out << doc.dump(1) << '\n';
}

}  // namespace occsynth
