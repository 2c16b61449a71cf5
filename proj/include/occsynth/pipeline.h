#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "occsynth/controller.h"
#include "occsynth/relaxation.h"
#include "occsynth/sdp.h"

namespace occsynth {

struct SynthOptions {
  int order = 1;              // relaxation order r
  int controller_degree = 1;  // k
  RelaxationOptions relaxation;
  SolverOptions solver;
  ExtractionOptions extraction;
  bool clamp = true;
  int grid_points = 100;  // per set, for the dual grid checks
  double grid_tolerance = 1e-5;
};

struct SynthResult {
  Relaxation relaxation;
  SdpSolution solution;
  std::vector<MomentSequence> moments;
  ResidualReport residuals;
  /// sum_i mass(y0_i): the estimated volume of the controllable set.
  double initial_mass = 0.0;
  /// Optimal value of the program as solved (includes any penalty term).
  double solved_objective = 0.0;
  std::vector<ExtractedLaw> laws;
  PiecewiseController controller;
  DualCertificate certificate;
  std::vector<GridCheck> grid;
  double seconds = 0.0;

  bool grid_passed() const;
};

/// Throws ControllerError when degree-k extraction cannot be done from the
/// moments of a relaxation of order r.
void check_extraction_degree(const HybridSystem& sys, int r, int k);

/// Relaxation, solve, moment recovery, extraction and dual checks. Solver
/// failure is reported through result.solution.status, not by throwing.
SynthResult synthesize(const HybridSystem& sys, const SynthOptions& options);

/// The post-solve half of synthesize() for a solution obtained elsewhere
/// (for example an imported SDPA result).
SynthResult finish_synthesis(Relaxation relaxation, SdpSolution solution,
                             const SynthOptions& options);

/// p_r, residuals, iterations, masses, extraction notes and grid checks.
nlohmann::json synth_summary(const SynthResult& result);

}  // namespace occsynth
