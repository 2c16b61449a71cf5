#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "occsynth/model.h"
#include "occsynth/moments.h"
#include "occsynth/polynomial.h"
#include "occsynth/sdp.h"

namespace occsynth {

class RelaxationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SequenceKind {
  kInitial,       // y0^i over x, degree 2r
  kInitialSlack,  // yhat0^i over x, degree 2r
  kFinal,         // y_1 over x, degree 2r (mode 0 only)
  kOccupation,    // z_i over (x, u), degree 2 r d_i
  kTransition,    // y_ij over (x, u), degree 2 r d_i
};

/// One moment sequence of the relaxation and its slice of the variable vector.
struct SequenceSpec {
  std::string name;
  SequenceKind kind = SequenceKind::kInitial;
  int mode = 0;
  int to_mode = -1;  // target mode for transitions
  int var_count = 0;
  int degree = 0;
  int offset = 0;

  int size() const { return monomial_count(var_count, degree); }
};

enum class RowFamily { kLiouville, kDomination };
std::string to_string(RowFamily family);

/// Sparse equality over the concatenated moment vector, before scaling.
struct EqualityRow {
  RowFamily family = RowFamily::kLiouville;
  int mode = 0;
  MultiIndex beta;
  std::vector<std::pair<int, double>> coeffs;  // (variable, coefficient)
  double rhs = 0.0;
};

/// M_order(h * sequence) >= 0. A constant multiplier 1 is the moment matrix.
struct PsdBlockSpec {
  int sequence = 0;
  Polynomial multiplier;
  int order = 0;
  std::string label;

  int dimension(int var_count) const { return monomial_count(var_count, order); }
};

struct RelaxationOptions {
  /// Omit the multiplier-1 moment matrices and keep only the listed
  /// localizing blocks; moments that then appear in no block become free
  /// variables (split into two nonnegative parts).
  bool strict_blocks = false;
  /// Optional weight eps in the objective term -eps * sum_i mass(z_i).
  double occupation_penalty = 0.0;
  /// Per-mode Lebesgue moments of the cells; an empty sequence means the
  /// cell's moments are computed from its box.
  std::vector<MomentSequence> cell_moments;
  ModelOptions model;
};

struct SdpProblem {
  HybridSystem system;
  int order = 0;
  std::vector<int> dynamics_degree;  // d_i
  std::vector<TransitionSet> transitions;
  std::vector<SequenceSpec> sequences;
  std::vector<EqualityRow> equalities;
  std::vector<PsdBlockSpec> blocks;
  std::vector<std::pair<int, double>> objective;
  int variable_count = 0;

  int find_sequence(SequenceKind kind, int mode, int to_mode = -1) const;
  /// Global variable index of alpha inside sequence s.
  int variable(int s, const MultiIndex& alpha) const;
  /// Sequence holding a global variable index.
  int sequence_of(int variable) const;
};

/// max ceil(deg h / 2) over the defining polynomials of the cells, the input
/// box, the transition sets and the target (all with the ball constraint).
int relaxation_order_min(const HybridSystem& sys, const ModelOptions& options = {});

SdpProblem assemble_primal(const HybridSystem& sys, int r,
                           const RelaxationOptions& options = {});

/// Where each moment lives in the conic program and how rows were scaled.
struct ConicLayout {
  /// Problem variable -> representative entry (block, row, col). Free
  /// variables use the first of their two diagonal parts.
  std::vector<SparseEntry> canonical;
  /// Free variables: conic entry of the negative part, or block -1.
  std::vector<SparseEntry> negative_part;
  /// Conic block holding each PsdBlockSpec, or -1 when it is a scalar stored
  /// in the shared diagonal block at diagonal_slot.
  std::vector<int> spec_block;
  std::vector<int> diagonal_slot;
  int diagonal_block = -1;
  /// Multiplier of each problem equality; conic row k (k < problem rows) is
  /// scale[k] times problem equality k.
  std::vector<double> row_scale;
  int problem_rows = 0;
};

struct Relaxation {
  SdpProblem problem;
  ConicProgram program;
  ConicLayout layout;
};

/// Standard-form encoding: every moment is an entry of its sequence's
/// moment matrix; extra rows tie repeated and localizing entries to it.
Relaxation to_conic(SdpProblem problem, const RelaxationOptions& options = {});

Relaxation build_relaxation(const HybridSystem& sys, int r,
                            const RelaxationOptions& options = {});

/// Moment sequences read off a primal solution, one per SequenceSpec.
std::vector<MomentSequence> recover_moments(const Relaxation& relax,
                                            const BlockMatrix& primal);

struct ResidualReport {
  double liouville_max = 0.0;
  double domination_max = 0.0;
  double max() const { return std::max(liouville_max, domination_max); }
};

/// Residuals of the unscaled equalities at the given moments.
ResidualReport equality_residuals(const SdpProblem& problem,
                                  const std::vector<MomentSequence>& moments);

/// sum_i mass(y0^i).
double objective_value(const SdpProblem& problem,
                       const std::vector<MomentSequence>& moments);

struct ModuleCheck {
  std::string sequence;
  /// |p - sum_k <G_k, localizer pattern>| in coefficient 2-norm.
  double identity_residual = 0.0;
  double min_gram_eigenvalue = 0.0;
};

/// Polynomial certificate read from the dual: v_i from the Liouville rows,
/// w_i from the domination rows, and the Gram matrix of every block.
struct DualCertificate {
  std::vector<Polynomial> v;
  std::vector<Polynomial> w;
  /// Per sequence: the polynomial that must lie in its quadratic module.
  std::vector<Polynomial> module_target;
  std::vector<std::vector<Eigen::MatrixXd>> gram;  // [sequence][block spec]
  std::vector<ModuleCheck> modules;
  double objective = 0.0;  // sum_i <w_i, Lebesgue moments of X_i>

  double max_identity_residual() const;
  double min_gram_eigenvalue() const;
};

DualCertificate read_dual(const Relaxation& relax, const SdpSolution& solution);

struct GridCheck {
  std::string name;
  int points = 0;
  double min_value = 0.0;
  bool passed = false;
};

/// w_i >= -tol and w_i - v_i - 1 >= -tol on grids over every cell, and
/// v_0 >= -tol on a grid over the target.
std::vector<GridCheck> grid_checks(const SdpProblem& problem, const DualCertificate& cert,
                                   int points_per_set = 100, double tol = 1e-5);

/// JSON sidecar mapping conic entries to (sequence, multi-index) and conic
/// rows to their origin.
void write_index_sidecar(const Relaxation& relax, std::ostream& out);

}  // namespace occsynth
