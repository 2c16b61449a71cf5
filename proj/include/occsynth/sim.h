#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "occsynth/controller.h"
#include "occsynth/model.h"

namespace occsynth {

enum class ExitReason { kReached, kLeftDomain, kStepCap };
std::string to_string(ExitReason reason);

struct SimOptions {
  double cell_tolerance = 1e-9;
};

/// states.size() == modes.size() == inputs.size() + 1. A final state outside
/// every cell carries mode -1.
struct Trajectory {
  std::vector<std::vector<double>> states;
  std::vector<std::vector<double>> inputs;
  std::vector<int> modes;
  bool reached = false;
  std::optional<int> reach_step;
  ExitReason exit_reason = ExitReason::kStepCap;

  bool operator==(const Trajectory&) const = default;
};

/// One closed-loop step: f_i(x) + g_i(x) u with i = mode_of(x) and u from
/// the controller. Throws OutOfDomainError outside X.
std::vector<double> step(const HybridSystem& sys, const PiecewiseController& ctrl,
                         const std::vector<double>& x, const SimOptions& options = {});

/// Iterates until the state is in Z, leaves X, or t_max steps have run.
Trajectory rollout(const HybridSystem& sys, const PiecewiseController& ctrl,
                   const std::vector<double>& x0, int t_max, const SimOptions& options = {});

enum class SampleLabel { kControllable, kUncontrollable, kLeftDomain };
std::string to_string(SampleLabel label);

struct SampleSpec {
  enum class Kind { kGrid, kUniform };
  Kind kind = Kind::kGrid;
  /// Points per free coordinate (grid mode), in coordinate order.
  std::vector<int> grid;
  /// Number of draws (uniform mode).
  int count = 0;
  /// Per coordinate: a fixed value for section sampling, or empty.
  std::vector<std::optional<double>> fixed;
  /// Sampling box; the union of the cells when empty.
  Box box;
  std::optional<std::uint64_t> seed;
  int t_max = 1000;
  /// Worker threads; 0 picks the hardware concurrency.
  int threads = 0;
};

struct ControllabilityMap {
  SampleSpec spec;
  std::vector<std::vector<double>> points;
  std::vector<SampleLabel> labels;
  std::vector<int> steps;  // reach step, or the trajectory length otherwise

  int count(SampleLabel label) const;
  double fraction(SampleLabel label) const;
};

class SampleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The points a spec describes, in sample-index order (grid: x1 varies fastest).
std::vector<std::vector<double>> sample_points(const HybridSystem& sys, const SampleSpec& spec);

ControllabilityMap sample_controllability(const HybridSystem& sys,
                                          const PiecewiseController& ctrl,
                                          const SampleSpec& spec,
                                          const SimOptions& options = {});

/// t,x1..xn,u1..um,mode; the last row leaves the inputs empty.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);
/// x1..xn,label
void write_map_csv(const ControllabilityMap& map, std::ostream& out);
nlohmann::json map_summary(const ControllabilityMap& map);
nlohmann::json spec_to_json(const SampleSpec& spec);

}  // namespace occsynth
