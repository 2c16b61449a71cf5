#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "occsynth/polynomial.h"

namespace occsynth {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Interval&) const = default;
};
using Box = std::vector<Interval>;

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by mode_of() when a state lies outside every cell.
class OutOfDomainError : public ModelError {
 public:
  using ModelError::ModelError;
};

/// {x : h_j(x) >= 0 for all j}, enclosed by a declared bounding box.
class SemialgebraicSet {
 public:
  SemialgebraicSet() = default;
  SemialgebraicSet(std::vector<Polynomial> polys, Box box);

  /// The box itself, written as the 2n linear constraints x_k - lo_k >= 0 and
  /// hi_k - x_k >= 0.
  static SemialgebraicSet from_box(const Box& box);

  int var_count() const { return static_cast<int>(box_.size()); }
  const std::vector<Polynomial>& polys() const { return polys_; }
  const Box& box() const { return box_; }

  bool contains(const std::vector<double>& x, double tol) const;

  /// N - |x|^2 with N = 1.05 * squared norm of the farthest box corner.
  Polynomial ball_polynomial() const;
  bool has_ball() const;
  /// Copy with the ball polynomial appended unless already present.
  SemialgebraicSet with_ball() const;

  SemialgebraicSet with_extra(std::vector<Polynomial> extra) const;

  bool operator==(const SemialgebraicSet&) const = default;

 private:
  std::vector<Polynomial> polys_;
  Box box_;
};

struct Mode {
  SemialgebraicSet cell;
  /// n drift polynomials in x.
  std::vector<Polynomial> f;
  /// n x m input-gain polynomials in x, row-major by state component.
  std::vector<std::vector<Polynomial>> g;

  bool operator==(const Mode&) const = default;
};

/// Discrete-time hybrid control-affine system
///   x+ = f_i(x) + g_i(x) u   for x in cell i, u in the input box.
/// Mode 0 is the cell holding the origin and the target set.
struct HybridSystem {
  int n = 0;
  int m = 0;
  std::vector<Mode> modes;
  Box input_box;
  SemialgebraicSet target;
  std::vector<std::pair<int, int>> switches;

  int mode_count() const { return static_cast<int>(modes.size()); }

  /// The full map phi_i over the joint variables (x, u), n + m of them.
  std::vector<Polynomial> phi(int mode) const;
  /// Max total degree of phi_i in (x, u).
  int phi_degree(int mode) const;

  /// The input box as a semialgebraic set over u.
  SemialgebraicSet input_set() const;

  /// Bounding box of the union of the cells.
  Box state_box() const;

  bool has_switch(int i, int j) const;

  /// phi_i evaluated at (x, u).
  std::vector<double> apply_dynamics(int mode, const std::vector<double>& x,
                                     const std::vector<double>& u) const;

  bool operator==(const HybridSystem&) const = default;
};

/// Y_ij: pairs (x, u) in X_i x U whose successor lands in X_j.
struct TransitionSet {
  int from_mode = 0;
  int to_mode = 0;
  SemialgebraicSet set;
};

struct ModelOptions {
  double cell_tolerance = 1e-9;
  /// Transition sets whose composed constraints exceed this degree are rejected.
  int max_composed_degree = 12;
  int witness_samples = 10000;
  int target_samples = 1000;
  std::uint64_t seed = 0x5eed;
};

TransitionSet build_transition_set(const HybridSystem& sys, int i, int j,
                                   const ModelOptions& options = {});

/// Lowest index i with x in X_i (tolerance options.cell_tolerance).
/// Throws OutOfDomainError when no cell contains x.
int mode_of(const HybridSystem& sys, const std::vector<double>& x,
            const ModelOptions& options = {});

/// Non-throwing variant used by the simulator.
std::optional<int> find_mode(const HybridSystem& sys,
                             const std::vector<double>& x, double tol);

struct ValidationCheck {
  std::string name;
  bool passed = false;
  /// Warnings are reported but do not fail the report.
  bool warning_only = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool ok() const;
  const ValidationCheck* find(const std::string& name) const;
  std::string to_string() const;
};

/// Check names: "dimensions", "origin_interior_mode0", "target_in_mode0",
/// "input_normalized", "cells_compact", "switch_nonempty(i,j)",
/// "putinar_augmentation".
ValidationReport validate(const HybridSystem& sys, const ModelOptions& options = {});

/// Rescales u = c + s * v so the input box becomes [-1, 1]^m.
HybridSystem normalize_input_box(const HybridSystem& sys);

/// Maps a normalized input v in [-1, 1]^m back to the original box.
std::vector<double> denormalize_input(const Box& original_box,
                                      const std::vector<double>& v);

}  // namespace occsynth
