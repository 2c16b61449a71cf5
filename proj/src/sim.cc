#include "occsynth/sim.h"

#include <algorithm>
#include <ostream>
#include <thread>

#include "occsynth/random.h"

namespace occsynth {

std::string to_string(ExitReason reason) {
  switch (reason) {
    case ExitReason::kReached:
      return "reached";
    case ExitReason::kLeftDomain:
      return "left-domain";
    case ExitReason::kStepCap:
      return "step-cap";
  }
  return "unknown";
}

std::string to_string(SampleLabel label) {
  switch (label) {
    case SampleLabel::kControllable:
      return "controllable";
    case SampleLabel::kUncontrollable:
      return "uncontrollable";
    case SampleLabel::kLeftDomain:
      return "left-domain";
  }
  return "unknown";
}

std::vector<double> step(const HybridSystem& sys, const PiecewiseController& ctrl,
                         const std::vector<double>& x, const SimOptions& options) {
  ModelOptions mopts;
  mopts.cell_tolerance = options.cell_tolerance;
  const int mode = mode_of(sys, x, mopts);
  const auto u = apply(ctrl, sys, x, options.cell_tolerance);
  return sys.apply_dynamics(mode, x, u);
}

Trajectory rollout(const HybridSystem& sys, const PiecewiseController& ctrl,
                   const std::vector<double>& x0, int t_max, const SimOptions& options) {
  Trajectory traj;
  std::vector<double> x = x0;
  for (int t = 0;; ++t) {
    const auto mode = find_mode(sys, x, options.cell_tolerance);
    traj.states.push_back(x);
    traj.modes.push_back(mode ? *mode : -1);
    if (sys.target.contains(x, options.cell_tolerance)) {
      traj.reached = true;
      traj.reach_step = t;
      traj.exit_reason = ExitReason::kReached;
      return traj;
    }
    if (!mode) {
      traj.exit_reason = ExitReason::kLeftDomain;
      return traj;
    }
    if (t >= t_max) {
      traj.exit_reason = ExitReason::kStepCap;
      return traj;
    }
    auto u = ctrl.evaluate(*mode, x);
    if (ctrl.clamp) u = clamp_unit(std::move(u));
    x = sys.apply_dynamics(*mode, x, u);
    traj.inputs.push_back(std::move(u));
  }
}

int ControllabilityMap::count(SampleLabel label) const {
  return static_cast<int>(std::count(labels.begin(), labels.end(), label));
}

double ControllabilityMap::fraction(SampleLabel label) const {
  return labels.empty() ? 0.0 : static_cast<double>(count(label)) / labels.size();
}

std::vector<std::vector<double>> sample_points(const HybridSystem& sys, const SampleSpec& spec) {
  const int n = sys.n;
  const Box box = spec.box.empty() ? sys.state_box() : spec.box;
  if (static_cast<int>(box.size()) != n) throw SampleError("sampling box has wrong dimension");
  std::vector<std::optional<double>> fixed = spec.fixed;
  if (fixed.empty()) fixed.assign(n, std::nullopt);
  if (static_cast<int>(fixed.size()) != n) throw SampleError("section spec has wrong dimension");
  std::vector<int> free_axes;
  for (int k = 0; k < n; ++k) {
    if (!fixed[k]) free_axes.push_back(k);
  }
  std::vector<std::vector<double>> points;
  if (spec.kind == SampleSpec::Kind::kGrid) {
    if (spec.grid.size() != free_axes.size()) {
      throw SampleError("grid lists " + std::to_string(spec.grid.size()) +
                        " sizes for " + std::to_string(free_axes.size()) + " free coordinates");
    }
    for (int g : spec.grid) {
      if (g < 1) throw SampleError("grid sizes must be positive");
    }
    std::vector<int> idx(free_axes.size(), 0);
    for (;;) {
      std::vector<double> x(n);
      for (int k = 0; k < n; ++k) {
        if (fixed[k]) x[k] = *fixed[k];
      }
      for (std::size_t a = 0; a < free_axes.size(); ++a) {
        const int k = free_axes[a];
        const int g = spec.grid[a];
        x[k] = g == 1 ? 0.5 * (box[k].lo + box[k].hi)
                      : box[k].lo + (box[k].hi - box[k].lo) * idx[a] / (g - 1);
      }
      points.push_back(std::move(x));
      std::size_t a = 0;
      while (a < idx.size() && ++idx[a] == spec.grid[a]) idx[a++] = 0;
      if (a == idx.size()) break;
    }
  } else {
    if (!spec.seed) throw SampleError("uniform sampling needs a seed");
    if (spec.count < 0) throw SampleError("sample count must be nonnegative");
    const CounterRng rng(*spec.seed);
    const std::uint64_t dims = free_axes.size();
    for (int s = 0; s < spec.count; ++s) {
      std::vector<double> x(n);
      for (int k = 0; k < n; ++k) {
        if (fixed[k]) x[k] = *fixed[k];
      }
      for (std::size_t a = 0; a < free_axes.size(); ++a) {
        const int k = free_axes[a];
        x[k] = rng.uniform(static_cast<std::uint64_t>(s) * dims + a, box[k].lo, box[k].hi);
      }
      points.push_back(std::move(x));
    }
  }
  return points;
}

ControllabilityMap sample_controllability(const HybridSystem& sys,
                                          const PiecewiseController& ctrl,
                                          const SampleSpec& spec, const SimOptions& options) {
  ControllabilityMap map;
  map.spec = spec;
  map.points = sample_points(sys, spec);
  const std::size_t total = map.points.size();
  map.labels.assign(total, SampleLabel::kUncontrollable);
  map.steps.assign(total, 0);

  auto run = [&](std::size_t idx) {
    const auto traj = rollout(sys, ctrl, map.points[idx], spec.t_max, options);
    switch (traj.exit_reason) {
      case ExitReason::kReached:
        map.labels[idx] = SampleLabel::kControllable;
        map.steps[idx] = *traj.reach_step;
        break;
      case ExitReason::kLeftDomain:
        map.labels[idx] = SampleLabel::kLeftDomain;
        map.steps[idx] = static_cast<int>(traj.states.size()) - 1;
        break;
      case ExitReason::kStepCap:
        map.labels[idx] = SampleLabel::kUncontrollable;
        map.steps[idx] = static_cast<int>(traj.states.size()) - 1;
        break;
    }
  };
  // Each sample writes only its own slot, so results come out in index order
  // regardless of scheduling.
  int threads = spec.threads > 0 ? spec.threads
                                 : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<int>(std::min<std::size_t>(threads, std::max<std::size_t>(total, 1)));
  if (threads <= 1) {
    for (std::size_t idx = 0; idx < total; ++idx) run(idx);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t idx = w; idx < total; idx += threads) run(idx);
      });
    }
    for (auto& th : pool) th.join();
  }
  return map;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  const std::size_t n = traj.states.empty() ? 0 : traj.states[0].size();
  const std::size_t m = traj.inputs.empty() ? 0 : traj.inputs[0].size();
  out << 't';
  for (std::size_t k = 0; k < n; ++k) out << ",x" << (k + 1);
  for (std::size_t j = 0; j < m; ++j) out << ",u" << (j + 1);
  out << ",mode\n";
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    out << t;
    for (double v : traj.states[t]) out << ',' << format_double(v);
    for (std::size_t j = 0; j < m; ++j) {
      out << ',';
      if (t < traj.inputs.size()) out << format_double(traj.inputs[t][j]);
    }
    out << ',' << traj.modes[t] << '\n';
  }
}

void write_map_csv(const ControllabilityMap& map, std::ostream& out) {
  const std::size_t n = map.points.empty() ? 0 : map.points[0].size();
  for (std::size_t k = 0; k < n; ++k) out << 'x' << (k + 1) << ',';
  out << "label\n";
  for (std::size_t idx = 0; idx < map.points.size(); ++idx) {
    for (double v : map.points[idx]) out << format_double(v) << ',';
    out << to_string(map.labels[idx]) << '\n';
  }
}

nlohmann::json spec_to_json(const SampleSpec& spec) {
  nlohmann::json doc;
  doc["kind"] = spec.kind == SampleSpec::Kind::kGrid ? "grid" : "uniform";
  if (spec.kind == SampleSpec::Kind::kGrid) {
    doc["grid"] = spec.grid;
  } else {
    doc["count"] = spec.count;
  }
  nlohmann::json fixed = nlohmann::json::array();
  for (const auto& f : spec.fixed) {
    fixed.push_back(f ? nlohmann::json(*f) : nlohmann::json(nullptr));
  }
  doc["fixed"] = std::move(fixed);
  nlohmann::json box = nlohmann::json::array();
  for (const auto& iv : spec.box) box.push_back({iv.lo, iv.hi});
  doc["box"] = std::move(box);
  doc["seed"] = spec.seed ? nlohmann::json(*spec.seed) : nlohmann::json(nullptr);
  doc["t_max"] = spec.t_max;
  return doc;
}

nlohmann::json map_summary(const ControllabilityMap& map) {
  nlohmann::json doc;
  doc["samples"] = map.points.size();
  doc["counts"] = {{"controllable", map.count(SampleLabel::kControllable)},
                   {"uncontrollable", map.count(SampleLabel::kUncontrollable)},
                   {"left-domain", map.count(SampleLabel::kLeftDomain)}};
  doc["fractions"] = {{"controllable", map.fraction(SampleLabel::kControllable)},
                      {"uncontrollable", map.fraction(SampleLabel::kUncontrollable)},
                      {"left-domain", map.fraction(SampleLabel::kLeftDomain)}};
  doc["controllable_fraction"] = map.fraction(SampleLabel::kControllable);
  doc["spec"] = spec_to_json(map.spec);
  return doc;
}

}  // namespace occsynth
