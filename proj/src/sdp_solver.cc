#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>

#include "occsynth/sdp.h"

namespace occsynth {

int ConicProgram::total_dimension() const {
  int n = 0;
  for (int s : block_sizes) n += std::abs(s);
  return n;
}

void ConicProgram::check() const {
  if (rhs.size() != constraints.size()) {
    throw SolverError("rhs length differs from constraint count");
  }
  auto check_entries = [&](const SparseMatrixEntries& entries, const std::string& what) {
    for (const auto& e : entries) {
      if (e.block < 0 || e.block >= static_cast<int>(block_sizes.size())) {
        throw SolverError(what + ": block index out of range");
      }
      const int size = block_sizes[e.block];
      if (size == 0) throw SolverError("zero-size block");
      const int dim = std::abs(size);
      if (e.row < 0 || e.col < e.row || e.col >= dim) {
        throw SolverError(what + ": entry outside upper triangle of its block");
      }
      if (size < 0 && e.row != e.col) {
        throw SolverError(what + ": off-diagonal entry in a diagonal block");
      }
      if (!std::isfinite(e.value)) throw SolverError(what + ": non-finite value");
    }
  };
  for (int s : block_sizes) {
    if (s == 0) throw SolverError("zero-size block");
  }
  check_entries(objective, "objective");
  for (std::size_t k = 0; k < constraints.size(); ++k) {
    check_entries(constraints[k], "constraint " + std::to_string(k + 1));
  }
}

BlockMatrix zero_blocks(const std::vector<int>& block_sizes) {
  BlockMatrix out;
  out.reserve(block_sizes.size());
  for (int s : block_sizes) {
    out.push_back(s > 0 ? Eigen::MatrixXd::Zero(s, s) : Eigen::MatrixXd::Zero(-s, 1));
  }
  return out;
}

namespace {

bool is_diagonal(const Eigen::MatrixXd& blk) { return blk.cols() == 1 && blk.rows() != 1; }

}  // namespace

double sparse_inner(const SparseMatrixEntries& a, const BlockMatrix& x) {
  double sum = 0.0;
  for (const auto& e : a) {
    const Eigen::MatrixXd& blk = x[e.block];
    if (blk.cols() == 1) {
      sum += e.value * blk(e.row, 0);
    } else if (e.row == e.col) {
      sum += e.value * blk(e.row, e.col);
    } else {
      sum += e.value * (blk(e.row, e.col) + blk(e.col, e.row));
    }
  }
  return sum;
}

BlockMatrix to_blocks(const SparseMatrixEntries& entries,
                      const std::vector<int>& block_sizes) {
  BlockMatrix out = zero_blocks(block_sizes);
  for (const auto& e : entries) {
    Eigen::MatrixXd& blk = out[e.block];
    if (block_sizes[e.block] < 0) {
      blk(e.row, 0) += e.value;
    } else {
      blk(e.row, e.col) += e.value;
      if (e.row != e.col) blk(e.col, e.row) += e.value;
    }
  }
  return out;
}

double block_inner(const BlockMatrix& a, const BlockMatrix& b) {
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += (a[k].array() * b[k].array()).sum();
  return sum;
}

double min_eigenvalue(const BlockMatrix& x, const std::vector<int>& block_sizes) {
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (block_sizes[k] < 0) {
      if (x[k].size() > 0) lo = std::min(lo, x[k].minCoeff());
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x[k], Eigen::EigenvaluesOnly);
      lo = std::min(lo, es.eigenvalues().minCoeff());
    }
  }
  return lo;
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kNearOptimal:
      return "near-optimal";
    case SolveStatus::kInfeasibleDetected:
      return "infeasible-detected";
    case SolveStatus::kIterationLimit:
      return "iteration-limit";
    case SolveStatus::kNumericalBreakdown:
      return "numerical-breakdown";
  }
  return "unknown";
}

std::vector<int> dependent_rows(const ConicProgram& program, double pivot_tol) {
  const int m = program.constraint_count();
  // Gram matrix of the constraint matrices under the trace inner product,
  // accumulated coordinate by coordinate.
  std::map<std::tuple<int, int, int>, std::vector<std::pair<int, double>>> coords;
  for (int k = 0; k < m; ++k) {
    for (const auto& e : program.constraints[k]) {
      coords[{e.block, e.row, e.col}].emplace_back(k, e.value);
    }
  }
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
  for (const auto& [key, list] : coords) {
    const bool off_diag = std::get<1>(key) != std::get<2>(key);
    const double weight = off_diag ? 2.0 : 1.0;
    for (const auto& [k, vk] : list) {
      for (const auto& [l, vl] : list) gram(k, l) += weight * vk * vl;
    }
  }
  const Eigen::VectorXd original = gram.diagonal();
  std::vector<int> dependent;
  for (int k = 0; k < m; ++k) {
    const double pivot = gram(k, k);
    if (!(original[k] > 0.0) || pivot <= pivot_tol * original[k]) {
      dependent.push_back(k);
      continue;
    }
    const int rest = m - k - 1;
    if (rest == 0) break;
    const Eigen::VectorXd col = gram.col(k).tail(rest) / std::sqrt(pivot);
    gram.bottomRightCorner(rest, rest).selfadjointView<Eigen::Lower>().rankUpdate(col, -1.0);
  }
  return dependent;
}

namespace {

struct Term {
  int p;
  int q;
  double v;
};

// Restriction of one constraint to one block, with symmetric entries
// expanded so that <A, X> = sum v * X(p, q).
struct BlockUse {
  int row;  // active-row index
  std::vector<Term> full;
  std::vector<int> touched_rows;
};

class ConstraintOperator {
 public:
  ConstraintOperator(const ConicProgram& program, const std::vector<int>& active)
      : sizes_(program.block_sizes), active_(active) {
    uses_.resize(sizes_.size());
    for (int r = 0; r < static_cast<int>(active.size()); ++r) {
      std::map<int, BlockUse> per_block;
      for (const auto& e : program.constraints[active[r]]) {
        BlockUse& use = per_block[e.block];
        use.row = r;
        use.full.push_back({e.row, e.col, e.value});
        if (e.row != e.col) use.full.push_back({e.col, e.row, e.value});
      }
      for (auto& [blk, use] : per_block) {
        for (const auto& t : use.full) use.touched_rows.push_back(t.p);
        std::sort(use.touched_rows.begin(), use.touched_rows.end());
        use.touched_rows.erase(
            std::unique(use.touched_rows.begin(), use.touched_rows.end()),
            use.touched_rows.end());
        uses_[blk].push_back(std::move(use));
      }
    }
  }

  int rows() const { return static_cast<int>(active_.size()); }

  // A(X) for symmetric X.
  Eigen::VectorXd apply(const BlockMatrix& x) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(rows());
    for (std::size_t b = 0; b < uses_.size(); ++b) {
      const bool diag = sizes_[b] < 0;
      for (const auto& use : uses_[b]) {
        double s = 0.0;
        for (const auto& t : use.full) s += t.v * (diag ? x[b](t.p, 0) : x[b](t.p, t.q));
        out[use.row] += s;
      }
    }
    return out;
  }

  BlockMatrix adjoint(const Eigen::VectorXd& y) const {
    BlockMatrix out = zero_blocks(sizes_);
    for (std::size_t b = 0; b < uses_.size(); ++b) {
      const bool diag = sizes_[b] < 0;
      for (const auto& use : uses_[b]) {
        const double yr = y[use.row];
        if (yr == 0.0) continue;
        for (const auto& t : use.full) {
          if (diag) {
            out[b](t.p, 0) += yr * t.v;
          } else {
            out[b](t.p, t.q) += yr * t.v;
          }
        }
      }
    }
    return out;
  }

  // HKM Schur complement M_kl = tr(A_k X A_l Z).
  Eigen::MatrixXd schur(const BlockMatrix& x, const BlockMatrix& z) const {
    const int m = rows();
    Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t b = 0; b < uses_.size(); ++b) {
      const auto& uses = uses_[b];
      if (uses.empty()) continue;
      if (sizes_[b] < 0) {
        std::map<int, std::vector<std::pair<int, double>>> by_index;
        for (const auto& use : uses) {
          for (const auto& t : use.full) by_index[t.p].emplace_back(use.row, t.v);
        }
        for (const auto& [p, list] : by_index) {
          const double w = x[b](p, 0) * z[b](p, 0);
          for (const auto& [k, vk] : list) {
            for (const auto& [l, vl] : list) {
              if (k <= l) mat(k, l) += w * vk * vl;
            }
          }
        }
        continue;
      }
      const Eigen::MatrixXd& xb = x[b];
      const Eigen::MatrixXd& zb = z[b];
      const int dim = static_cast<int>(xb.rows());
      Eigen::MatrixXd ax(dim, dim);
      Eigen::MatrixXd g(dim, dim);
      for (std::size_t ki = 0; ki < uses.size(); ++ki) {
        const BlockUse& uk = uses[ki];
        // G = Z A_k X, built from the nonzero rows of A_k X.
        ax.setZero();
        for (const auto& t : uk.full) ax.row(t.p) += t.v * xb.row(t.q);
        g.setZero();
        for (int p : uk.touched_rows) g.noalias() += zb.col(p) * ax.row(p);
        for (std::size_t li = ki; li < uses.size(); ++li) {
          const BlockUse& ul = uses[li];
          double s = 0.0;
          for (const auto& t : ul.full) s += t.v * g(t.q, t.p);
          mat(uk.row, ul.row) += s;
        }
      }
    }
    mat.triangularView<Eigen::StrictlyLower>() = mat.transpose();
    return mat;
  }

 private:
  std::vector<int> sizes_;
  std::vector<int> active_;
  std::vector<std::vector<BlockUse>> uses_;
};

BlockMatrix scaled_identity(const std::vector<int>& sizes, const std::vector<double>& scale) {
  BlockMatrix out;
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    if (sizes[b] > 0) {
      out.push_back(scale[b] * Eigen::MatrixXd::Identity(sizes[b], sizes[b]));
    } else {
      out.push_back(Eigen::MatrixXd::Constant(-sizes[b], 1, scale[b]));
    }
  }
  return out;
}

double block_norm(const BlockMatrix& a) {
  double s = 0.0;
  for (const auto& blk : a) s += blk.squaredNorm();
  return std::sqrt(s);
}

// Inverse of each block; false when a block is not positive definite.
bool block_inverse(const BlockMatrix& s, BlockMatrix& out) {
  out.resize(s.size());
  for (std::size_t b = 0; b < s.size(); ++b) {
    if (s[b].cols() == 1 && s[b].rows() >= 1 && is_diagonal(s[b])) {
      if ((s[b].array() <= 0.0).any()) return false;
      out[b] = s[b].array().inverse();
      continue;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(s[b]);
    if (llt.info() != Eigen::Success) return false;
    Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(s[b].rows(), s[b].cols()));
    out[b] = 0.5 * (inv + inv.transpose());
  }
  return true;
}

// Largest alpha with X + alpha dX in the cone (infinity if unbounded).
double max_step(const BlockMatrix& x, const BlockMatrix& dx,
                const std::vector<int>& sizes) {
  double alpha = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < x.size(); ++b) {
    if (sizes[b] < 0) {
      for (int p = 0; p < x[b].rows(); ++p) {
        if (dx[b](p, 0) < 0.0) alpha = std::min(alpha, -x[b](p, 0) / dx[b](p, 0));
      }
      continue;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(x[b]);
    if (llt.info() != Eigen::Success) return 0.0;
    const auto l = llt.matrixL();
    Eigen::MatrixXd w = l.solve(dx[b]);
    w = l.solve(w.transpose().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (w + w.transpose()),
                                                      Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin < 0.0) alpha = std::min(alpha, -1.0 / lmin);
  }
  return alpha;
}

// (T + T') / 2 with T = A * B * Z, blockwise; diagonal blocks elementwise.
BlockMatrix sym_product(const BlockMatrix& a, const BlockMatrix& bm, const BlockMatrix& z,
                        const std::vector<int>& sizes) {
  BlockMatrix out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (sizes[k] < 0) {
      out[k] = (a[k].array() * bm[k].array() * z[k].array()).matrix();
    } else {
      Eigen::MatrixXd t = a[k] * bm[k] * z[k];
      out[k] = 0.5 * (t + t.transpose());
    }
  }
  return out;
}

void axpy(double alpha, const BlockMatrix& x, BlockMatrix& y) {
  for (std::size_t k = 0; k < x.size(); ++k) y[k] += alpha * x[k];
}

BlockMatrix combine(double a, const BlockMatrix& x, double b, const BlockMatrix& y) {
  BlockMatrix out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = a * x[k] + b * y[k];
  return out;
}

}  // namespace

void evaluate_solution(const ConicProgram& program, SdpSolution& sol) {
  const BlockMatrix c = to_blocks(program.objective, program.block_sizes);
  const double cnorm = block_norm(c);
  const double unit = cnorm > 0.0 ? cnorm : 1.0;
  sol.primal_objective = sparse_inner(program.objective, sol.primal);
  double dobj = 0.0;
  double pres = 0.0;
  double bnorm = 0.0;
  BlockMatrix aty = zero_blocks(program.block_sizes);
  for (int k = 0; k < program.constraint_count(); ++k) {
    const double y = k < static_cast<int>(sol.dual.size()) ? sol.dual[k] : 0.0;
    dobj += program.rhs[k] * y;
    const double r = program.rhs[k] - sparse_inner(program.constraints[k], sol.primal);
    pres += r * r;
    bnorm += program.rhs[k] * program.rhs[k];
    if (y != 0.0) axpy(y, to_blocks(program.constraints[k], program.block_sizes), aty);
  }
  sol.dual_objective = dobj;
  sol.primal_residual = std::sqrt(pres) / (1.0 + std::sqrt(bnorm));
  if (sol.dual_slack.size() == aty.size()) {
    BlockMatrix rd = combine(1.0, aty, -1.0, sol.dual_slack);
    axpy(-1.0, c, rd);
    sol.dual_residual = block_norm(rd) / (unit + cnorm);
    const double xs = block_inner(sol.primal, sol.dual_slack);
    sol.complementarity = xs / (unit * std::max(1, program.total_dimension()));
  }
  sol.relative_gap = std::abs(sol.dual_objective - sol.primal_objective) /
                     (unit + std::abs(sol.primal_objective) + std::abs(sol.dual_objective));
}

SdpSolution solve(const ConicProgram& program, const SolverOptions& options) {
  program.check();
  SdpSolution sol;
  const auto& sizes = program.block_sizes;
  const int n_total = std::max(1, program.total_dimension());

  sol.dropped_rows = dependent_rows(program, options.presolve_pivot);
  std::vector<int> active;
  {
    std::size_t d = 0;
    for (int k = 0; k < program.constraint_count(); ++k) {
      if (d < sol.dropped_rows.size() && sol.dropped_rows[d] == k) {
        ++d;
        continue;
      }
      active.push_back(k);
    }
  }
  if (!sol.dropped_rows.empty()) {
    sol.warnings.push_back("presolve dropped " + std::to_string(sol.dropped_rows.size()) +
                           " dependent equality rows");
  }
  const ConstraintOperator op(program, active);
  const int m = op.rows();
  Eigen::VectorXd b(m);
  for (int r = 0; r < m; ++r) b[r] = program.rhs[active[r]];
  // Iterate on C / |C| so the run, and X in particular, does not depend on
  // the objective's scale; y and S are scaled back at the end.
  BlockMatrix c = to_blocks(program.objective, sizes);
  const double bnorm = b.norm();
  const double obj_unit = block_norm(c) > 0.0 ? block_norm(c) : 1.0;
  for (auto& blk : c) blk /= obj_unit;
  const double cnorm = block_norm(c);

  // Initial point: scaled identities, per-block norm heuristic.
  std::vector<double> xi(sizes.size()), eta(sizes.size());
  {
    std::vector<double> max_ratio(sizes.size(), 0.0), max_a(sizes.size(), 0.0);
    std::vector<std::map<int, double>> a_norm_sq(sizes.size());
    for (int r = 0; r < m; ++r) {
      for (const auto& e : program.constraints[active[r]]) {
        a_norm_sq[e.block][r] += (e.row == e.col ? 1.0 : 2.0) * e.value * e.value;
      }
    }
    for (std::size_t blk = 0; blk < sizes.size(); ++blk) {
      for (const auto& [r, nsq] : a_norm_sq[blk]) {
        const double an = std::sqrt(nsq);
        max_ratio[blk] = std::max(max_ratio[blk], (1.0 + std::abs(b[r])) / (1.0 + an));
        max_a[blk] = std::max(max_a[blk], an);
      }
      const double dim = std::abs(sizes[blk]);
      const double cb = c[blk].norm();
      xi[blk] = std::max({10.0, std::sqrt(dim), dim * max_ratio[blk]});
      eta[blk] = std::max({10.0, std::sqrt(dim), max_a[blk], cb});
    }
  }
  BlockMatrix x = scaled_identity(sizes, xi);
  BlockMatrix s = scaled_identity(sizes, eta);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);

  struct Snapshot {
    BlockMatrix x, s;
    Eigen::VectorXd y;
    double merit = std::numeric_limits<double>::infinity();
    int iteration = 0;
  } best;

  if (options.log) {
    *options.log << "iter     primal-obj      dual-obj     p-inf     d-inf       gap"
                    "      mu   step-p  step-d\n";
  }

  int stalls = 0;
  sol.status = SolveStatus::kIterationLimit;
  int iter = 0;
  double last_ap = 0.0, last_ad = 0.0;
  for (;; ++iter) {
    const Eigen::VectorXd rp = b - op.apply(x);
    BlockMatrix rd = op.adjoint(y);  // A'y
    for (std::size_t k = 0; k < rd.size(); ++k) rd[k] = c[k] - rd[k] + s[k];
    const double pobj = block_inner(c, x);
    const double dobj = b.dot(y);
    const double pinf = rp.norm() / (1.0 + bnorm);
    const double dinf = block_norm(rd) / (1.0 + cnorm);
    const double xs = block_inner(x, s);
    const double mu = xs / n_total;
    const double scale = 1.0 + std::abs(pobj) + std::abs(dobj);
    const double gap = std::max(std::abs(dobj - pobj), std::max(xs, 0.0)) / scale;

    if (options.log) {
      *options.log << std::setw(4) << iter << std::scientific << std::setprecision(6)
                   << std::setw(15) << pobj * obj_unit << std::setw(15) << dobj * obj_unit
                   << std::setprecision(2) << std::setw(10) << pinf << std::setw(10)
                   << dinf << std::setw(10) << gap << std::setw(10) << mu
                   << std::fixed << std::setprecision(3) << std::setw(8) << last_ap
                   << std::setw(8) << last_ad << std::defaultfloat << '\n';
    }

    const double merit = std::max({pinf, dinf, gap});
    if (merit < best.merit) {
      best.x = x;
      best.s = s;
      best.y = y;
      best.merit = merit;
      best.iteration = iter;
    }
    if (pinf <= options.tol_feas && dinf <= options.tol_feas && gap <= options.tol_gap) {
      sol.status = SolveStatus::kOptimal;
      break;
    }
    if (iter >= options.max_iterations) break;
    if (iter - best.iteration >= options.stall_iterations) {
      sol.warnings.push_back("no progress in " + std::to_string(options.stall_iterations) +
                             " iterations; returning the best iterate");
      break;
    }
    if (block_norm(x) > 1e13 || y.norm() > 1e13) {
      sol.status = SolveStatus::kInfeasibleDetected;
      sol.warnings.push_back(block_norm(x) > 1e13
                                 ? "primal iterates diverge: dual infeasible or primal unbounded"
                                 : "dual iterates diverge: primal infeasible");
      break;
    }

    BlockMatrix z;
    if (!block_inverse(s, z)) {
      sol.status = SolveStatus::kNumericalBreakdown;
      sol.warnings.push_back("dual slack lost definiteness");
      break;
    }
    Eigen::MatrixXd schur = op.schur(x, z);
    Eigen::LLT<Eigen::MatrixXd> chol(schur);
    if (chol.info() != Eigen::Success) {
      const double ridge = 1e-14 * std::max(1.0, schur.diagonal().maxCoeff());
      schur.diagonal().array() += ridge;
      chol.compute(schur);
      if (chol.info() != Eigen::Success) {
        sol.status = SolveStatus::kNumericalBreakdown;
        sol.warnings.push_back("Schur complement factorization failed");
        break;
      }
    }

    // Predictor (sigma = 0).
    // Solves M dy = rhs, refining against the operator form of M, which
    // stays accurate when the assembled matrix is badly conditioned.
    auto solve_schur = [&](const Eigen::VectorXd& rhs) {
      Eigen::VectorXd sol_dy = chol.solve(rhs);
      double res_norm = std::numeric_limits<double>::infinity();
      for (int round = 0; round < options.refinement_steps; ++round) {
        const Eigen::VectorXd res =
            rhs - op.apply(sym_product(x, op.adjoint(sol_dy), z, sizes));
        const double nrm = res.norm();
        if (!(nrm < 0.5 * res_norm)) break;
        res_norm = nrm;
        sol_dy += chol.solve(res);
      }
      return sol_dy;
    };
    const BlockMatrix x_rd_z = sym_product(x, rd, z, sizes);
    BlockMatrix base = combine(-1.0, x, 1.0, x_rd_z);
    Eigen::VectorXd dy = solve_schur(op.apply(base) - rp);
    BlockMatrix ds = op.adjoint(dy);
    for (std::size_t k = 0; k < ds.size(); ++k) ds[k] -= rd[k];
    BlockMatrix dx = combine(-1.0, x, -1.0, sym_product(x, ds, z, sizes));
    const double ap_aff = std::min(1.0, max_step(x, dx, sizes));
    const double ad_aff = std::min(1.0, max_step(s, ds, sizes));
    const double mu_aff =
        block_inner(combine(1.0, x, ap_aff, dx), combine(1.0, s, ad_aff, ds)) / n_total;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    // Corrector.
    const BlockMatrix second = sym_product(dx, ds, z, sizes);
    BlockMatrix target = z;
    for (auto& blk : target) blk *= sigma * mu;
    BlockMatrix rhs_mat = combine(1.0, target, -1.0, x);
    axpy(-1.0, second, rhs_mat);
    axpy(1.0, x_rd_z, rhs_mat);
    dy = solve_schur(op.apply(rhs_mat) - rp);
    ds = op.adjoint(dy);
    for (std::size_t k = 0; k < ds.size(); ++k) ds[k] -= rd[k];
    dx = combine(1.0, target, -1.0, x);
    axpy(-1.0, second, dx);
    axpy(-1.0, sym_product(x, ds, z, sizes), dx);

    const double ap = std::min(1.0, options.step_fraction * max_step(x, dx, sizes));
    const double ad = std::min(1.0, options.step_fraction * max_step(s, ds, sizes));
    last_ap = ap;
    last_ad = ad;
    axpy(ap, dx, x);
    axpy(ad, ds, s);
    y += ad * dy;
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (sizes[k] > 0) {
        x[k] = 0.5 * (x[k] + x[k].transpose()).eval();
        s[k] = 0.5 * (s[k] + s[k].transpose()).eval();
      }
    }
    stalls = (ap < 1e-8 && ad < 1e-8) ? stalls + 1 : 0;
    if (stalls >= 3) {
      sol.status = SolveStatus::kNumericalBreakdown;
      sol.warnings.push_back("step lengths underflowed");
      break;
    }
  }

  if (sol.status != SolveStatus::kOptimal && best.merit < std::numeric_limits<double>::infinity()) {
    x = best.x;
    s = best.s;
    y = best.y;
  }
  y *= obj_unit;
  for (auto& blk : s) blk *= obj_unit;
  sol.iterations = iter;
  sol.primal = std::move(x);
  sol.dual_slack = std::move(s);
  sol.dual.assign(program.constraint_count(), 0.0);
  for (int r = 0; r < m; ++r) sol.dual[active[r]] = y[r];
  evaluate_solution(program, sol);
  if (sol.status != SolveStatus::kOptimal) {
    const double loose = 100.0;
    if (sol.primal_residual <= loose * options.tol_feas &&
        sol.dual_residual <= loose * options.tol_feas &&
        sol.relative_gap <= loose * options.tol_gap) {
      sol.status = SolveStatus::kNearOptimal;
    }
  }
  return sol;
}

}  // namespace occsynth
