// Command-line front end: synth | simulate | sample | export | validate.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "occsynth/controller.h"
#include "occsynth/examples.h"
#include "occsynth/model.h"
#include "occsynth/pipeline.h"
#include "occsynth/relaxation.h"
#include "occsynth/sdpa_io.h"
#include "occsynth/sim.h"
#include "occsynth/system_io.h"

namespace fs = std::filesystem;
using namespace occsynth;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;

// Thrown inside commands to leave with a specific exit code.
struct Exit {
  int code;
  std::string message;
};

struct SystemSource {
  std::string example;
  std::string system_file;
};

struct Loaded {
  HybridSystem system;
  std::vector<MomentSequence> cell_moments;
  std::optional<examples::ExampleEntry> entry;
};

Loaded load_system(const SystemSource& src) {
  Loaded out;
  if (!src.example.empty() && !src.system_file.empty()) {
    throw Exit{kExitValidation, "give either --example or --system, not both"};
  }
  if (!src.example.empty()) {
    try {
      out.entry = examples::get(src.example);
    } catch (const examples::UnknownExampleError& e) {
      throw Exit{kExitValidation, e.what()};
    }
    out.system = out.entry->system;
    return out;
  }
  if (src.system_file.empty()) throw Exit{kExitValidation, "no system given (--example or --system)"};
  if (!fs::exists(src.system_file)) {
    throw Exit{kExitIo, "cannot open system file " + src.system_file};
  }
  try {
    SystemDescription desc = read_system_file(src.system_file);
    out.system = std::move(desc.system);
    out.cell_moments = std::move(desc.cell_moments);
  } catch (const SystemFileError& e) {
    throw Exit{kExitValidation, e.what()};
  }
  return out;
}

fs::path prepare_out_dir(const std::string& requested) {
  fs::path dir = requested;
  if (dir.empty()) {
    const char* env = std::getenv("OCCSYNTH_OUT");
    dir = env && *env ? fs::path(env) : fs::path("occsynth_out");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Exit{kExitIo, "cannot create output directory " + dir.string() + ": " + ec.message()};
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Exit{kExitIo, "cannot write " + path.string()};
  out << text;
  if (!out) throw Exit{kExitIo, "write failed for " + path.string()};
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

std::vector<double> parse_vector(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Exit{kExitValidation, "bad number '" + item + "' in " + what};
    }
  }
  return out;
}

PiecewiseController load_controller(const std::string& spec, const Loaded& loaded) {
  if (spec.empty()) throw Exit{kExitValidation, "missing controller (--controller reference|FILE)"};
  if (spec == "reference") {
    if (!loaded.entry || !loaded.entry->reference_controller) {
      throw Exit{kExitValidation, "this system has no published reference controller"};
    }
    return *loaded.entry->reference_controller;
  }
  std::ifstream in(spec);
  if (!in) throw Exit{kExitIo, "cannot open controller file " + spec};
  try {
    PiecewiseController ctrl = read_controller(in);
    if (ctrl.n != loaded.system.n || ctrl.m != loaded.system.m ||
        ctrl.mode_count() != loaded.system.mode_count()) {
      throw Exit{kExitValidation, "controller dimensions do not match the system"};
    }
    return ctrl;
  } catch (const ControllerError& e) {
    throw Exit{kExitValidation, e.what()};
  }
}

void apply_clamp_override(PiecewiseController& ctrl, const std::string& clamp) {
  if (clamp == "on") ctrl.clamp = true;
  if (clamp == "off") ctrl.clamp = false;
}

// The active subcommand's settings as TOML; unset options are left out so
// `occsynth --config config.toml` replays the run.
void echo_config(const CLI::App& app, const fs::path& dir) {
  std::string text;
  for (const CLI::App* sub : app.get_subcommands()) {
    text += "[" + sub->get_name() + "]\n";
    std::istringstream lines(sub->config_to_str(true, false));
    std::string line;
    while (std::getline(lines, line)) {
      if (line.size() >= 3 && line.compare(line.size() - 3, 3, "=\"\"") == 0) continue;
      text += line + "\n";
    }
  }
  write_text(dir / "config.toml", text);
}

// ---------------------------------------------------------------- validate

int cmd_validate(const SystemSource& src) {
  const Loaded loaded = load_system(src);
  const ValidationReport report = validate(loaded.system);
  std::cout << report.to_string();
  if (!report.ok()) return kExitValidation;
  std::cout << "r_min = " << relaxation_order_min(loaded.system) << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------ export

struct ExportConfig {
  SystemSource src;
  std::string out;
  int order = 0;
  double penalty = -1.0;
};

int cmd_export(const ExportConfig& cfg, const CLI::App& app) {
  const Loaded loaded = load_system(cfg.src);
  const fs::path dir = prepare_out_dir(cfg.out);
  echo_config(app, dir);
  std::ostringstream sys_text;
  write_system({loaded.system, loaded.cell_moments}, sys_text);
  write_text(dir / "system.json", sys_text.str());
  std::cout << "wrote " << (dir / "system.json").string() << "\n";
  if (loaded.entry && loaded.entry->reference_controller) {
    std::ostringstream ctrl;
    write_controller(*loaded.entry->reference_controller, ctrl);
    write_text(dir / "reference_controller.json", ctrl.str());
    std::cout << "wrote " << (dir / "reference_controller.json").string() << "\n";
  }
  if (cfg.order > 0) {
    RelaxationOptions ro;
    ro.cell_moments = loaded.cell_moments;
    ro.occupation_penalty =
        cfg.penalty >= 0 ? cfg.penalty : (loaded.entry ? loaded.entry->occupation_penalty : 0.0);
    Relaxation relax;
    try {
      relax = build_relaxation(loaded.system, cfg.order, ro);
    } catch (const RelaxationError& e) {
      throw Exit{kExitValidation, e.what()};
    }
    write_sdpa(relax.program, dir / "relaxation.dat-s");
    std::ostringstream idx;
    write_index_sidecar(relax, idx);
    write_text(dir / "relaxation.index.json", idx.str());
    std::cout << "wrote " << (dir / "relaxation.dat-s").string() << " and index sidecar\n";
  }
  return kExitOk;
}

// ------------------------------------------------------------------- synth

struct SynthConfig {
  SystemSource src;
  std::string out;
  int order = -1;
  int degree = -1;
  double tol_feas = 1e-8;
  double tol_gap = 1e-8;
  int max_iterations = 200;
  double penalty = -1.0;
  std::string export_sdpa = "none";
  std::string import_solution;
  std::string clamp = "auto";
  int grid_points = 100;
  bool quiet = false;
};

int cmd_synth(const SynthConfig& cfg, const CLI::App& app) {
  const Loaded loaded = load_system(cfg.src);
  const ValidationReport report = validate(loaded.system);
  if (!report.ok()) {
    std::cerr << report.to_string();
    return kExitValidation;
  }
  SynthOptions opts;
  opts.order = cfg.order >= 0 ? cfg.order : (loaded.entry ? loaded.entry->order : 1);
  opts.controller_degree =
      cfg.degree >= 0 ? cfg.degree : (loaded.entry ? loaded.entry->controller_degree : 1);
  opts.relaxation.cell_moments = loaded.cell_moments;
  opts.relaxation.occupation_penalty =
      cfg.penalty >= 0 ? cfg.penalty : (loaded.entry ? loaded.entry->occupation_penalty : 1e-3);
  opts.solver.tol_feas = cfg.tol_feas;
  opts.solver.tol_gap = cfg.tol_gap;
  opts.solver.max_iterations = cfg.max_iterations;
  opts.clamp = cfg.clamp == "auto" ? (!loaded.entry || loaded.entry->clamp_inputs) : cfg.clamp == "on";
  opts.grid_points = cfg.grid_points;

  const int r_min = relaxation_order_min(loaded.system);
  if (opts.order < r_min) {
    throw Exit{kExitValidation, "relaxation order r = " + std::to_string(opts.order) +
                                    " is below r_min = " + std::to_string(r_min)};
  }
  try {
    check_extraction_degree(loaded.system, opts.order, opts.controller_degree);
  } catch (const ControllerError& e) {
    throw Exit{kExitValidation, e.what()};
  }

  const fs::path dir = prepare_out_dir(cfg.out);
  echo_config(app, dir);
  Relaxation relax;
  try {
    relax = build_relaxation(loaded.system, opts.order, opts.relaxation);
  } catch (const RelaxationError& e) {
    throw Exit{kExitValidation, e.what()};
  }
  if (cfg.export_sdpa != "none") {
    write_sdpa(relax.program, dir / "relaxation.dat-s");
    std::ostringstream idx;
    write_index_sidecar(relax, idx);
    write_text(dir / "relaxation.index.json", idx.str());
    std::cout << "wrote " << (dir / "relaxation.dat-s").string() << " and index sidecar\n";
    if (cfg.export_sdpa == "only") return kExitOk;
  }

  std::ostringstream log;
  SdpSolution sol;
  const auto start = std::chrono::steady_clock::now();
  if (!cfg.import_solution.empty()) {
    if (!fs::exists(cfg.import_solution)) {
      throw Exit{kExitIo, "cannot open solution file " + cfg.import_solution};
    }
    try {
      sol = read_sdpa_solution(fs::path(cfg.import_solution), relax.program);
    } catch (const SdpaParseError& e) {
      throw Exit{kExitIo, std::string("solution file: ") + e.what()};
    } catch (const IoError& e) {
      throw Exit{kExitIo, e.what()};
    }
    log << "imported solution from " << cfg.import_solution << "\n";
  } else {
    SolverOptions so = opts.solver;
    so.log = &log;
    sol = solve(relax.program, so);
  }
  if (!cfg.quiet) std::cout << log.str();
  const bool converged = sol.converged();
  SynthResult result = finish_synthesis(std::move(relax), std::move(sol), opts);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const nlohmann::json summary = synth_summary(result);
  log << summary.dump(2) << "\n";
  write_text(dir / "solve_log.txt", log.str());
  write_json(dir / "synth_summary.json", summary);
  write_json(dir / "dual_report.json", summary["dual_certificate"]);

  std::cout << "status " << summary["status"].get<std::string>() << ", p_" << opts.order << " = "
            << format_double(result.solved_objective)
            << ", initial mass = " << format_double(result.initial_mass)
            << ", Liouville residual = " << result.residuals.liouville_max << "\n";
  for (const auto& g : result.grid) {
    std::cout << (g.passed ? "  ok   " : "  FAIL ") << g.name << "  min " << g.min_value
              << " over " << g.points << " points\n";
  }
  if (!converged) {
    std::cerr << "solver did not converge (" << to_string(result.solution.status) << ")\n";
    for (const auto& w : result.solution.warnings) std::cerr << "  " << w << "\n";
    return kExitSolver;
  }
  std::ostringstream ctrl;
  write_controller(result.controller, ctrl);
  write_text(dir / "controller.json", ctrl.str());
  for (std::size_t i = 0; i < result.laws.size(); ++i) {
    if (!result.laws[i].warning.empty()) {
      std::cerr << "mode " << i << ": " << result.laws[i].warning << "\n";
    }
  }
  std::cout << "wrote " << (dir / "controller.json").string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateConfig {
  SystemSource src;
  std::string out;
  std::string controller;
  std::vector<std::string> x0;
  int t_max = -1;
  std::string clamp = "auto";
};

int cmd_simulate(const SimulateConfig& cfg, const CLI::App& app) {
  const Loaded loaded = load_system(cfg.src);
  PiecewiseController ctrl = load_controller(cfg.controller, loaded);
  apply_clamp_override(ctrl, cfg.clamp);
  std::vector<std::vector<double>> starts;
  for (const auto& s : cfg.x0) {
    auto x = parse_vector(s, "--x0");
    if (static_cast<int>(x.size()) != loaded.system.n) {
      throw Exit{kExitValidation, "--x0 " + s + " needs " + std::to_string(loaded.system.n) +
                                      " coordinates"};
    }
    starts.push_back(std::move(x));
  }
  if (starts.empty() && loaded.entry) starts = loaded.entry->validation_states;
  if (starts.empty()) throw Exit{kExitValidation, "no initial state given (--x0)"};
  const int t_max = cfg.t_max > 0 ? cfg.t_max : (loaded.entry ? loaded.entry->t_max : 1000);

  const fs::path dir = prepare_out_dir(cfg.out);
  echo_config(app, dir);
  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t idx = 0; idx < starts.size(); ++idx) {
    const Trajectory traj = rollout(loaded.system, ctrl, starts[idx], t_max);
    std::ostringstream csv;
    write_trajectory_csv(traj, csv);
    const std::string name = "trajectory_" + std::to_string(idx) + ".csv";
    write_text(dir / name, csv.str());
    const int steps = static_cast<int>(traj.states.size()) - 1;
    std::cout << "x0 = (";
    for (std::size_t k = 0; k < starts[idx].size(); ++k) {
      std::cout << (k ? ", " : "") << format_double(starts[idx][k]);
    }
    std::cout << "): " << to_string(traj.exit_reason) << " after " << steps << " steps\n";
    runs.push_back({{"x0", starts[idx]},
                    {"exit", to_string(traj.exit_reason)},
                    {"reached", traj.reached},
                    {"steps", steps},
                    {"file", name}});
  }
  write_json(dir / "simulate_summary.json", {{"t_max", t_max}, {"runs", runs}});
  return kExitOk;
}

// ------------------------------------------------------------------ sample

struct SampleConfig {
  SystemSource src;
  std::string out;
  std::string controller;
  std::string grid;
  int uniform = 0;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> fix;
  int t_max = -1;
  int threads = 0;
  std::string clamp = "auto";
};

int cmd_sample(const SampleConfig& cfg, const CLI::App& app) {
  const Loaded loaded = load_system(cfg.src);
  PiecewiseController ctrl = load_controller(cfg.controller, loaded);
  apply_clamp_override(ctrl, cfg.clamp);
  const int n = loaded.system.n;
  SampleSpec spec;
  spec.t_max = cfg.t_max > 0 ? cfg.t_max : (loaded.entry ? loaded.entry->t_max : 1000);
  spec.threads = cfg.threads;
  spec.fixed.assign(n, std::nullopt);
  for (const auto& f : cfg.fix) {
    const auto eq = f.find('=');
    if (eq == std::string::npos) throw Exit{kExitValidation, "section fix '" + f + "' is not k=v"};
    int k = 0;
    try {
      k = std::stoi(f.substr(0, eq));
    } catch (const std::exception&) {
      throw Exit{kExitValidation, "section fix '" + f + "' has a bad coordinate"};
    }
    if (k < 1 || k > n) {
      throw Exit{kExitValidation, "section fix '" + f + "' names coordinate outside 1.." +
                                      std::to_string(n)};
    }
    const auto v = parse_vector(f.substr(eq + 1), "--fix");
    if (v.size() != 1) throw Exit{kExitValidation, "section fix '" + f + "' needs one value"};
    spec.fixed[k - 1] = v[0];
  }
  int free_count = 0;
  for (const auto& f : spec.fixed) free_count += f ? 0 : 1;
  if (!cfg.grid.empty() && cfg.uniform > 0) {
    throw Exit{kExitValidation, "choose --grid or --uniform, not both"};
  }
  if (cfg.uniform > 0) {
    if (!cfg.seed) throw Exit{kExitValidation, "uniform sampling needs --seed"};
    spec.kind = SampleSpec::Kind::kUniform;
    spec.count = cfg.uniform;
    spec.seed = cfg.seed;
  } else {
    spec.kind = SampleSpec::Kind::kGrid;
    std::string g = cfg.grid.empty() ? "21" : cfg.grid;
    std::stringstream ss(g);
    std::string item;
    while (std::getline(ss, item, 'x')) {
      try {
        spec.grid.push_back(std::stoi(item));
      } catch (const std::exception&) {
        throw Exit{kExitValidation, "bad grid spec '" + g + "'"};
      }
    }
    if (spec.grid.size() == 1 && free_count > 1) spec.grid.assign(free_count, spec.grid[0]);
  }
  ControllabilityMap map;
  try {
    map = sample_controllability(loaded.system, ctrl, spec);
  } catch (const SampleError& e) {
    throw Exit{kExitValidation, e.what()};
  }
  const fs::path dir = prepare_out_dir(cfg.out);
  echo_config(app, dir);
  std::ostringstream csv;
  write_map_csv(map, csv);
  write_text(dir / "map.csv", csv.str());
  const nlohmann::json summary = map_summary(map);
  write_json(dir / "summary.json", summary);
  std::cout << "samples " << map.points.size() << ", controllable fraction "
            << format_double(map.fraction(SampleLabel::kControllable)) << "\n";
  return kExitOk;
}

void add_source(CLI::App* sub, SystemSource& src) {
  auto* ex = sub->add_option("--example", src.example, "Registered example name");
  auto* sys = sub->add_option("--system", src.system_file, "System description file (JSON)");
  ex->excludes(sys);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Piecewise polynomial controller synthesis for hybrid systems"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Replay a canonical config.toml");

  std::string clamp_help = "Input saturation: auto (system default), on, off";

  ExportConfig ec;
  auto* exp = app.add_subcommand("export", "Write a system file and optionally its relaxation");
  exp->configurable();
  add_source(exp, ec.src);
  exp->add_option("--out", ec.out, "Output directory (default $OCCSYNTH_OUT)");
  exp->add_option("-r,--order", ec.order, "Also export the order-r relaxation in SDPA form");
  exp->add_option("--occupation-penalty", ec.penalty, "Penalty weight (default per example)");

  SynthConfig sc;
  auto* syn = app.add_subcommand("synth", "Build, solve and extract a piecewise controller");
  syn->configurable();
  add_source(syn, sc.src);
  syn->add_option("--out", sc.out, "Output directory (default $OCCSYNTH_OUT)");
  syn->add_option("-r,--order", sc.order, "Relaxation order (default per example)");
  syn->add_option("-k,--degree", sc.degree, "Controller degree (default per example)");
  syn->add_option("--tol-feas", sc.tol_feas, "Feasibility tolerance")->capture_default_str();
  syn->add_option("--tol-gap", sc.tol_gap, "Relative gap tolerance")->capture_default_str();
  syn->add_option("--max-iter", sc.max_iterations, "Iteration cap")->capture_default_str();
  syn->add_option("--occupation-penalty", sc.penalty, "Weight of the occupation-mass penalty");
  syn->add_option("--export-sdpa", sc.export_sdpa, "none | also | only")
      ->check(CLI::IsMember({"none", "also", "only"}))
      ->capture_default_str();
  syn->add_option("--import-solution", sc.import_solution,
                  "Use an SDPA solution file instead of the built-in solver");
  syn->add_option("--clamp", sc.clamp, clamp_help)->check(CLI::IsMember({"auto", "on", "off"}));
  syn->add_option("--grid-points", sc.grid_points, "Points per set for dual grid checks")
      ->capture_default_str();
  syn->add_flag("--quiet", sc.quiet, "Suppress the iteration log on stdout");

  SimulateConfig mc;
  auto* sim = app.add_subcommand("simulate", "Roll out trajectories under a controller");
  sim->configurable();
  add_source(sim, mc.src);
  sim->add_option("--out", mc.out, "Output directory (default $OCCSYNTH_OUT)");
  sim->add_option("--controller", mc.controller, "reference | controller JSON file");
  sim->add_option("--x0", mc.x0, "Initial state, comma separated (repeatable)");
  sim->add_option("--tmax", mc.t_max, "Step cap (default per example)");
  sim->add_option("--clamp", mc.clamp, clamp_help)->check(CLI::IsMember({"auto", "on", "off"}));

  SampleConfig pc;
  auto* smp = app.add_subcommand("sample", "Estimate the controllable set by sampling");
  smp->configurable();
  add_source(smp, pc.src);
  smp->add_option("--out", pc.out, "Output directory (default $OCCSYNTH_OUT)");
  smp->add_option("--controller", pc.controller, "reference | controller JSON file");
  smp->add_option("--grid", pc.grid, "Grid sizes per free coordinate, e.g. 21x21");
  smp->add_option("--uniform", pc.uniform, "Number of uniform samples");
  smp->add_option("--seed", pc.seed, "Seed for uniform sampling");
  smp->add_option("--fix", pc.fix, "Section constraint k=v on coordinate k (1-based)");
  smp->add_option("--tmax", pc.t_max, "Step cap (default per example)");
  smp->add_option("--threads", pc.threads, "Worker threads (0 = hardware)");
  smp->add_option("--clamp", pc.clamp, clamp_help)->check(CLI::IsMember({"auto", "on", "off"}));

  SystemSource vc;
  auto* val = app.add_subcommand("validate", "Check a system description");
  val->configurable();
  add_source(val, vc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*val) return cmd_validate(vc);
    if (*exp) return cmd_export(ec, app);
    if (*syn) return cmd_synth(sc, app);
    if (*sim) return cmd_simulate(mc, app);
    if (*smp) return cmd_sample(pc, app);
  } catch (const Exit& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const OutOfDomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
