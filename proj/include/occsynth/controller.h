#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "occsynth/model.h"
#include "occsynth/moments.h"
#include "occsynth/polynomial.h"

namespace occsynth {

class ControllerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// u = laws[i](x) for x in cell i, optionally clamped to [-1, 1]^m.
struct PiecewiseController {
  int n = 0;
  int m = 0;
  std::vector<std::vector<Polynomial>> laws;  // [mode][input], over x
  bool clamp = true;

  int mode_count() const { return static_cast<int>(laws.size()); }
  /// Unclamped law of one mode.
  std::vector<double> evaluate(int mode, const std::vector<double>& x) const;

  bool operator==(const PiecewiseController&) const = default;
};

PiecewiseController zero_controller(int n, int m, int modes);

struct ExtractionOptions {
  /// Singular values below cutoff * sigma_max are discarded.
  double cutoff = 1e-10;
  /// Masses at or below this are treated as an empty mode.
  double min_mass = 1e-9;
};

struct ExtractedLaw {
  std::vector<Polynomial> law;  // m polynomials in x
  bool uncontrolled = false;
  int rank = 0;                 // numerical rank of the marginal moment matrix
  std::string warning;
};

/// Moment regression: M_k(y^x) c_j = b_j with y^x the x-marginal of z and
/// (b_j)_alpha = z_(alpha, e_j). Needs z.max_degree() >= max(2k, k + 1).
ExtractedLaw extract(const MomentSequence& z, int n, int m, int k,
                     const ExtractionOptions& options = {});

/// Clamps each component to [-1, 1].
std::vector<double> clamp_unit(std::vector<double> u);

/// u^{mode_of(x)}(x), clamped when ctrl.clamp is set. Throws
/// OutOfDomainError outside every cell.
std::vector<double> apply(const PiecewiseController& ctrl, const HybridSystem& sys,
                          const std::vector<double>& x, double cell_tolerance = 1e-9);

/// {"n", "m", "clamp", "variables", "modes": [{"mode", "u": [strings]}]}
nlohmann::json controller_to_json(const PiecewiseController& ctrl);
PiecewiseController controller_from_json(const nlohmann::json& doc);

void write_controller(const PiecewiseController& ctrl, std::ostream& out);
PiecewiseController read_controller(std::istream& in);

}  // namespace occsynth
