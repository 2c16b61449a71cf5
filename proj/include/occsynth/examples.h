#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "occsynth/controller.h"
#include "occsynth/model.h"

namespace occsynth::examples {

class UnknownExampleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExampleEntry {
  std::string name;
  HybridSystem system;
  /// Published piecewise controller, over the normalized input.
  std::optional<PiecewiseController> reference_controller;
  int order = 1;             // suggested relaxation order r
  int controller_degree = 1;  // suggested k
  int t_max = 1000;
  /// Suggested weight of the occupation-mass penalty.
  double occupation_penalty = 1e-3;
  /// Whether controllers for this entry saturate to the unit input box.
  bool clamp_inputs = true;
  /// Where the constants come from and how derived data was checked.
  std::string provenance;
  /// Published initial states that should reach the target.
  std::vector<std::vector<double>> validation_states;
  /// Too large for the embedded solver; shipped for export only.
  bool heavy = false;
};

/// Registered names in a fixed order.
std::vector<std::string> names();

/// Throws UnknownExampleError for names that are not registered.
ExampleEntry get(const std::string& name);

}  // namespace occsynth::examples
