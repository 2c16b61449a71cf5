#include "occsynth/pipeline.h"

#include <algorithm>
#include <chrono>

namespace occsynth {

bool SynthResult::grid_passed() const {
  return std::all_of(grid.begin(), grid.end(), [](const GridCheck& g) { return g.passed; });
}

void check_extraction_degree(const HybridSystem& sys, int r, int k) {
  const int needed = std::max(2 * k, k + 1);
  for (int i = 0; i < sys.mode_count(); ++i) {
    const int have = 2 * r * sys.phi_degree(i);
    if (have < needed) {
      throw ControllerError("degree-" + std::to_string(k) + " controller needs moments of degree " +
                            std::to_string(needed) + " but mode " + std::to_string(i) +
                            " only has " + std::to_string(have) + " at r = " +
                            std::to_string(r));
    }
  }
}

SynthResult finish_synthesis(Relaxation relaxation, SdpSolution solution,
                             const SynthOptions& options) {
  SynthResult out;
  out.relaxation = std::move(relaxation);
  out.solution = std::move(solution);
  const SdpProblem& prob = out.relaxation.problem;
  const HybridSystem& sys = prob.system;
  out.solved_objective = out.solution.primal_objective;
  out.moments = recover_moments(out.relaxation, out.solution.primal);
  out.residuals = equality_residuals(prob, out.moments);
  out.initial_mass = objective_value(prob, out.moments);

  out.controller = zero_controller(sys.n, sys.m, sys.mode_count());
  out.controller.clamp = options.clamp;
  for (int i = 0; i < sys.mode_count(); ++i) {
    const int s = prob.find_sequence(SequenceKind::kOccupation, i);
    ExtractedLaw law =
        extract(out.moments[s], sys.n, sys.m, options.controller_degree, options.extraction);
    out.controller.laws[i] = law.law;
    out.laws.push_back(std::move(law));
  }
  out.certificate = read_dual(out.relaxation, out.solution);
  out.grid = grid_checks(prob, out.certificate, options.grid_points, options.grid_tolerance);
  return out;
}

SynthResult synthesize(const HybridSystem& sys, const SynthOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  check_extraction_degree(sys, options.order, options.controller_degree);
  Relaxation relax = build_relaxation(sys, options.order, options.relaxation);
  SdpSolution sol = solve(relax.program, options.solver);
  SynthResult out = finish_synthesis(std::move(relax), std::move(sol), options);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

nlohmann::json synth_summary(const SynthResult& result) {
  const SdpSolution& sol = result.solution;
  const SdpProblem& prob = result.relaxation.problem;
  nlohmann::json doc;
  doc["order"] = prob.order;
  doc["status"] = to_string(sol.status);
  doc["iterations"] = sol.iterations;
  doc["p_r"] = result.solved_objective;
  doc["initial_mass"] = result.initial_mass;
  doc["dual_objective"] = sol.dual_objective;
  doc["primal_residual"] = sol.primal_residual;
  doc["dual_residual"] = sol.dual_residual;
  doc["relative_gap"] = sol.relative_gap;
  doc["liouville_residual"] = result.residuals.liouville_max;
  doc["domination_residual"] = result.residuals.domination_max;
  doc["dropped_rows"] = sol.dropped_rows.size();
  doc["warnings"] = sol.warnings;
  doc["variables"] = prob.variable_count;
  doc["constraints"] = result.relaxation.program.constraint_count();
  doc["blocks"] = result.relaxation.program.block_sizes;
  nlohmann::json modes = nlohmann::json::array();
  for (std::size_t i = 0; i < result.laws.size(); ++i) {
    const int s = prob.find_sequence(SequenceKind::kOccupation, static_cast<int>(i));
    modes.push_back({{"mode", i},
                     {"occupation_mass", result.moments[s].mass()},
                     {"rank", result.laws[i].rank},
                     {"uncontrolled", result.laws[i].uncontrolled},
                     {"warning", result.laws[i].warning}});
  }
  doc["extraction"] = std::move(modes);
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& g : result.grid) {
    grid.push_back(
        {{"name", g.name}, {"points", g.points}, {"min", g.min_value}, {"passed", g.passed}});
  }
  doc["dual_certificate"] = {{"objective", result.certificate.objective},
                             {"identity_residual", result.certificate.max_identity_residual()},
                             {"min_gram_eigenvalue", result.certificate.min_gram_eigenvalue()},
                             {"grid_checks", std::move(grid)}};
  doc["seconds"] = result.seconds;
  return doc;
}

}  // namespace occsynth
