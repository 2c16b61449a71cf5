#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "occsynth/model.h"
#include "occsynth/moments.h"

namespace occsynth {

class SystemFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A system plus optional per-mode Lebesgue moments of the cells (empty
/// sequences where none were given).
struct SystemDescription {
  HybridSystem system;
  std::vector<MomentSequence> cell_moments;

  bool operator==(const SystemDescription&) const = default;
};

/// Schema:
///   {
///     "n": 2, "m": 1,
///     "variables": ["x1", "x2"],                      (optional)
///     "modes": [{
///        "cell": {"h": ["x1 + 1", ...], "box": [[-1, 0.5], [-1, 1]]},
///        "f": ["x1 + 0.01*x2", "x2"],
///        "g": [["0"], ["0.01"]],
///        "lebesgue_moments": {"degree": 2, "values": [...]}  (optional,
///                                                           graded lex order)
///     }, ...],
///     "input_box": [[-1, 1]],
///     "target": {"h": [...], "box": [...]},
///     "switches": [[0, 1], [1, 0]]
///   }
/// A cell or target without "h" is its box.
nlohmann::json system_to_json(const SystemDescription& desc);
SystemDescription system_from_json(const nlohmann::json& doc);

void write_system(const SystemDescription& desc, std::ostream& out);
SystemDescription read_system(std::istream& in);
SystemDescription read_system_file(const std::string& path);

}  // namespace occsynth
