#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "occsynth/model.h"
#include "occsynth/polynomial.h"

namespace occsynth {

/// Truncated moment vector y_alpha, |alpha| <= max_degree, stored densely in
/// graded-lex order (index = monomial_rank(alpha)).
class MomentSequence {
 public:
  MomentSequence() = default;
  MomentSequence(int var_count, int max_degree);
  MomentSequence(int var_count, int max_degree, std::vector<double> values);

  int var_count() const { return var_count_; }
  int max_degree() const { return max_degree_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  int size() const { return static_cast<int>(values_.size()); }

  double mass() const { return values_.empty() ? 0.0 : values_[0]; }
  double operator[](const MultiIndex& alpha) const;
  double& operator[](const MultiIndex& alpha);

  /// The Riesz functional l_y(p) = sum_alpha p_alpha y_alpha.
  double apply(const Polynomial& p) const;

  /// Moments of the marginal on the first `k` variables.
  MomentSequence marginal(int k) const;

  bool operator==(const MomentSequence&) const = default;

 private:
  int var_count_ = 0;
  int max_degree_ = 0;
  std::vector<double> values_;
};

class MomentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// y_alpha = prod_k (hi_k^(a_k+1) - lo_k^(a_k+1)) / (a_k + 1).
MomentSequence lebesgue_box_moments(const Box& box, int max_degree);

/// Lebesgue moments of {x in box : h(x) >= 0} where h is affine and
/// involves at most two variables. Exact up to rounding.
MomentSequence lebesgue_cut_box_moments(const Box& box, const Polynomial& h, int max_degree);

/// Lebesgue moments of a cell that is its bounding box intersected with
/// affine constraints, at most one of which couples two variables. Empty
/// when the cell has any other shape.
std::optional<MomentSequence> cell_lebesgue_moments(const SemialgebraicSet& cell,
                                                    int max_degree);

/// Moments of mass * delta_point.
MomentSequence dirac_moments(const std::vector<double>& point, int max_degree,
                             double mass = 1.0);

/// [M_r(y)]_{a,b} = y_{a+b} over |a|, |b| <= r.
Eigen::MatrixXd moment_matrix(const MomentSequence& y, int r);

/// [M_r(h y)]_{a,b} = sum_g h_g y_{g+a+b}.
Eigen::MatrixXd localizing_matrix(const MomentSequence& y, const Polynomial& h,
                                  int r);

/// Coefficients c with l_z(prod_k phi_k^beta_k) = <c, z.values()> where z
/// is a moment sequence over phi's variables truncated at z_degree.
Eigen::VectorXd pushforward_row(const std::vector<Polynomial>& phi,
                                const MultiIndex& beta, int z_degree);

/// Coefficient vector of p aligned with the graded-lex moment index.
Eigen::VectorXd coefficient_vector(const Polynomial& p, int max_degree);

/// CSV with header a1,...,an,value; one row per multi-index.
void write_moments_csv(const MomentSequence& y, std::ostream& out);
MomentSequence read_moments_csv(std::istream& in);

}  // namespace occsynth
