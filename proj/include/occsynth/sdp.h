#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace occsynth {

/// One stored entry of a symmetric block-diagonal matrix. Indices are
/// 0-based and row <= col; an off-diagonal entry stands for both (row, col)
/// and (col, row), as in the SDPA convention.
struct SparseEntry {
  int block = 0;
  int row = 0;
  int col = 0;
  double value = 0.0;
  bool operator==(const SparseEntry&) const = default;
};

using SparseMatrixEntries = std::vector<SparseEntry>;

/// Block-diagonal conic program in the form
///
///   maximize  <C, X>   s.t.  <A_k, X> = b_k,  X >= 0 (blockwise PSD)
///
/// with dual
///
///   minimize  b'y      s.t.  S = sum_k y_k A_k - C >= 0.
///
/// A positive block size is a dense PSD block; a negative size -k is a
/// diagonal block, i.e. k nonnegative scalars. This matches the SDPA file
/// convention with F_0 = C, F_k = A_k and c = b.
struct ConicProgram {
  std::vector<int> block_sizes;
  std::vector<SparseMatrixEntries> constraints;
  std::vector<double> rhs;
  SparseMatrixEntries objective;

  int constraint_count() const { return static_cast<int>(constraints.size()); }
  /// Sum of |block size|, the barrier parameter normalizer.
  int total_dimension() const;
  /// Throws SolverError on malformed structure.
  void check() const;

  bool operator==(const ConicProgram&) const = default;
};

/// Blocks of a block-diagonal matrix. Dense blocks are stored as square
/// matrices, diagonal blocks as k x 1 columns.
using BlockMatrix = std::vector<Eigen::MatrixXd>;

/// Zero block matrix shaped for `block_sizes`.
BlockMatrix zero_blocks(const std::vector<int>& block_sizes);

/// <A, X> for a sparse A.
double sparse_inner(const SparseMatrixEntries& a, const BlockMatrix& x);

/// Densifies entries into a block matrix shaped for `block_sizes`.
BlockMatrix to_blocks(const SparseMatrixEntries& entries,
                      const std::vector<int>& block_sizes);

double block_inner(const BlockMatrix& a, const BlockMatrix& b);

/// Smallest eigenvalue over all blocks (diagonal entries for diagonal blocks).
double min_eigenvalue(const BlockMatrix& x, const std::vector<int>& block_sizes);

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SolveStatus {
  kOptimal,
  kNearOptimal,
  kInfeasibleDetected,
  kIterationLimit,
  kNumericalBreakdown,
};

std::string to_string(SolveStatus status);

struct SolverOptions {
  double tol_feas = 1e-8;
  double tol_gap = 1e-8;
  int max_iterations = 200;
  /// Relative pivot threshold for dropping dependent equality rows.
  double presolve_pivot = 1e-10;
  /// Fraction of the distance to the cone boundary taken per step.
  double step_fraction = 0.95;
  /// Iterative-refinement passes per Schur solve.
  int refinement_steps = 2;
  /// Stop once this many iterations pass without a better merit
  /// max(p-inf, d-inf, gap).
  int stall_iterations = 25;
  /// Per-iteration log lines are written here when non-null.
  std::ostream* log = nullptr;
};

struct SdpSolution {
  SolveStatus status = SolveStatus::kIterationLimit;
  BlockMatrix primal;      // X
  std::vector<double> dual;  // y, one per constraint; dropped rows get 0
  BlockMatrix dual_slack;  // S
  double primal_objective = 0.0;  // <C, X>
  double dual_objective = 0.0;    // b'y
  // Dual-side measures are taken relative to u = |C| (1 when C = 0), so
  // they do not change when the objective is rescaled.
  double primal_residual = 0.0;   // |b - A(X)| / (1 + |b|)
  double dual_residual = 0.0;     // |A'y - S - C| / (u + |C|)
  double relative_gap = 0.0;      // |b'y - <C, X>| / (u + |b'y| + |<C, X>|)
  double complementarity = 0.0;   // <X, S> / (u * total_dimension)
  int iterations = 0;
  std::vector<int> dropped_rows;
  std::vector<std::string> warnings;

  bool converged() const {
    return status == SolveStatus::kOptimal || status == SolveStatus::kNearOptimal;
  }
};

/// Rows of `program` that are numerically dependent on earlier rows
/// (greedy pivoted Cholesky of A A' in row order).
std::vector<int> dependent_rows(const ConicProgram& program, double pivot_tol);

/// Primal-dual path following with the HKM direction and Mehrotra
/// predictor-corrector. Single-threaded and deterministic.
SdpSolution solve(const ConicProgram& program, const SolverOptions& options = {});

/// Recomputes objectives and residual norms of a solution against a program.
void evaluate_solution(const ConicProgram& program, SdpSolution& solution);

}  // namespace occsynth
