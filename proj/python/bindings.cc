#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"
#include "occsynth/controller.h"
#include "occsynth/examples.h"
#include "occsynth/model.h"
#include "occsynth/moments.h"
#include "occsynth/pipeline.h"
#include "occsynth/polynomial.h"
#include "occsynth/sdp.h"
#include "occsynth/sdpa_io.h"
#include "occsynth/sim.h"
#include "occsynth/system_io.h"

namespace py = pybind11;
using namespace occsynth;

namespace {

Box to_box(const std::vector<std::pair<double, double>>& bounds) {
  Box box;
  for (const auto& [lo, hi] : bounds) box.push_back({lo, hi});
  return box;
}

std::vector<std::pair<double, double>> from_box(const Box& box) {
  std::vector<std::pair<double, double>> out;
  for (const auto& iv : box) out.emplace_back(iv.lo, iv.hi);
  return out;
}

std::vector<std::vector<std::string>> law_strings(const PiecewiseController& c) {
  std::vector<std::vector<std::string>> out;
  for (const auto& mode : c.laws) {
    std::vector<std::string> row;
    for (const auto& p : mode) row.push_back(p.to_string());
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Piecewise polynomial controller synthesis for hybrid systems";

  py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
  py::register_exception<OutOfDomainError>(m, "OutOfDomainError", PyExc_ValueError);
  py::register_exception<ControllerError>(m, "ControllerError", PyExc_ValueError);
  py::register_exception<SystemFileError>(m, "SystemFileError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<SampleError>(m, "SampleError", PyExc_ValueError);
  py::register_exception<examples::UnknownExampleError>(m, "UnknownExampleError", PyExc_KeyError);

  py::class_<Polynomial>(m, "Polynomial")
      .def(py::init<int, double>(), py::arg("var_count"), py::arg("constant") = 0.0)
      .def_static("parse", &Polynomial::parse, py::arg("text"), py::arg("var_count"),
                  py::arg("names") = std::vector<std::string>{})
      .def_static("variable", &Polynomial::variable)
      .def_property_readonly("var_count", &Polynomial::var_count)
      .def_property_readonly("degree", &Polynomial::degree)
      .def("coefficient", [](const Polynomial& p, const std::vector<int>& e) {
        return p.coefficient(MultiIndex(e));
      })
      .def("__call__", &Polynomial::evaluate)
      .def("compose", &Polynomial::compose)
      .def("pow", &Polynomial::pow)
      .def(py::self + py::self)
      .def(py::self - py::self)
      .def(py::self * py::self)
      .def(py::self * double())
      .def(double() * py::self)
      .def(-py::self)
      .def(py::self == py::self)
      .def("__str__", [](const Polynomial& p) { return p.to_string(); })
      .def("__repr__", [](const Polynomial& p) { return "Polynomial('" + p.to_string() + "')"; });

  m.def("monomial_count", &monomial_count);

  py::class_<SemialgebraicSet>(m, "SemialgebraicSet")
      .def_static("from_box", [](const std::vector<std::pair<double, double>>& b) {
        return SemialgebraicSet::from_box(to_box(b));
      })
      .def_property_readonly("polys", &SemialgebraicSet::polys)
      .def_property_readonly("box", [](const SemialgebraicSet& s) { return from_box(s.box()); })
      .def("contains", &SemialgebraicSet::contains, py::arg("x"), py::arg("tol") = 0.0);

  py::class_<HybridSystem>(m, "HybridSystem")
      .def_readonly("n", &HybridSystem::n)
      .def_readonly("m", &HybridSystem::m)
      .def_readonly("target", &HybridSystem::target)
      .def_readonly("switches", &HybridSystem::switches)
      .def_property_readonly("mode_count", &HybridSystem::mode_count)
      .def_property_readonly("input_box", [](const HybridSystem& s) { return from_box(s.input_box); })
      .def_property_readonly("cells", [](const HybridSystem& s) {
        std::vector<SemialgebraicSet> out;
        for (const auto& md : s.modes) out.push_back(md.cell);
        return out;
      })
      .def("mode_of", [](const HybridSystem& s, const std::vector<double>& x) { return mode_of(s, x); })
      .def("apply_dynamics", &HybridSystem::apply_dynamics)
      .def("to_json", [](const HybridSystem& s) { return system_to_json({s, {}}).dump(); })
      .def_static("from_json", [](const std::string& text) {
        return system_from_json(nlohmann::json::parse(text)).system;
      })
      .def_static("from_file", [](const std::string& path) { return read_system_file(path).system; })
      .def(py::self == py::self);

  py::class_<ValidationReport>(m, "ValidationReport")
      .def_property_readonly("ok", &ValidationReport::ok)
      .def_property_readonly("checks", [](const ValidationReport& r) {
        std::vector<std::pair<std::string, bool>> out;
        for (const auto& c : r.checks) out.emplace_back(c.name, c.passed);
        return out;
      })
      .def("__str__", &ValidationReport::to_string);
  m.def("validate", [](const HybridSystem& s) { return validate(s); });
  m.def("normalize_input_box", &normalize_input_box);

  py::class_<PiecewiseController>(m, "PiecewiseController")
      .def_readonly("n", &PiecewiseController::n)
      .def_readonly("m", &PiecewiseController::m)
      .def_readwrite("clamp", &PiecewiseController::clamp)
      .def_property_readonly("laws", &law_strings)
      .def("evaluate", &PiecewiseController::evaluate)
      .def("apply", [](const PiecewiseController& c, const HybridSystem& s,
                       const std::vector<double>& x) { return apply(c, s, x); })
      .def("to_json", [](const PiecewiseController& c) { return controller_to_json(c).dump(); })
      .def_static("from_json", [](const std::string& text) {
        try {
          return controller_from_json(nlohmann::json::parse(text));
        } catch (const nlohmann::json::exception& e) {
          throw ControllerError(e.what());
        }
      })
      .def(py::self == py::self);
  m.def("zero_controller", &zero_controller);

  py::class_<examples::ExampleEntry>(m, "Example")
      .def_readonly("name", &examples::ExampleEntry::name)
      .def_readonly("system", &examples::ExampleEntry::system)
      .def_readonly("reference_controller", &examples::ExampleEntry::reference_controller)
      .def_readonly("order", &examples::ExampleEntry::order)
      .def_readonly("controller_degree", &examples::ExampleEntry::controller_degree)
      .def_readonly("t_max", &examples::ExampleEntry::t_max)
      .def_readonly("occupation_penalty", &examples::ExampleEntry::occupation_penalty)
      .def_readonly("clamp_inputs", &examples::ExampleEntry::clamp_inputs)
      .def_readonly("provenance", &examples::ExampleEntry::provenance)
      .def_readonly("validation_states", &examples::ExampleEntry::validation_states)
      .def_readonly("heavy", &examples::ExampleEntry::heavy);
  m.def("example_names", &examples::names);
  m.def("example", &examples::get);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("states", &Trajectory::states)
      .def_readonly("inputs", &Trajectory::inputs)
      .def_readonly("modes", &Trajectory::modes)
      .def_readonly("reached", &Trajectory::reached)
      .def_readonly("reach_step", &Trajectory::reach_step)
      .def_property_readonly("exit_reason", [](const Trajectory& t) { return to_string(t.exit_reason); });
  m.def("step", [](const HybridSystem& s, const PiecewiseController& c, const std::vector<double>& x) {
    return step(s, c, x);
  });
  m.def("rollout", [](const HybridSystem& s, const PiecewiseController& c,
                      const std::vector<double>& x0, int t_max) { return rollout(s, c, x0, t_max); },
        py::arg("system"), py::arg("controller"), py::arg("x0"), py::arg("t_max"));

  py::class_<ControllabilityMap>(m, "ControllabilityMap")
      .def_readonly("points", &ControllabilityMap::points)
      .def_readonly("steps", &ControllabilityMap::steps)
      .def_property_readonly("labels", [](const ControllabilityMap& map) {
        std::vector<std::string> out;
        for (const auto l : map.labels) out.push_back(to_string(l));
        return out;
      })
      .def_property_readonly("controllable_fraction", [](const ControllabilityMap& map) {
        return map.fraction(SampleLabel::kControllable);
      })
      .def("summary", [](const ControllabilityMap& map) { return map_summary(map).dump(); });
  m.def(
      "sample_grid",
      [](const HybridSystem& s, const PiecewiseController& c, const std::vector<int>& grid, int t_max,
         int threads) {
        SampleSpec spec;
        spec.grid = grid;
        spec.t_max = t_max;
        spec.threads = threads;
        return sample_controllability(s, c, spec);
      },
      py::arg("system"), py::arg("controller"), py::arg("grid"), py::arg("t_max"),
      py::arg("threads") = 0);
  m.def(
      "sample_uniform",
      [](const HybridSystem& s, const PiecewiseController& c, int count, std::uint64_t seed,
         int t_max, int threads) {
        SampleSpec spec;
        spec.kind = SampleSpec::Kind::kUniform;
        spec.count = count;
        spec.seed = seed;
        spec.t_max = t_max;
        spec.threads = threads;
        return sample_controllability(s, c, spec);
      },
      py::arg("system"), py::arg("controller"), py::arg("count"), py::arg("seed"), py::arg("t_max"),
      py::arg("threads") = 0);

  m.def("lebesgue_box_moments",
        [](const std::vector<std::pair<double, double>>& box, int degree) {
          return lebesgue_box_moments(to_box(box), degree).values();
        });
  m.def("moment_matrix", [](int n, int degree, const std::vector<double>& values, int r) {
    return moment_matrix(MomentSequence(n, degree, values), r);
  });

  py::class_<SdpSolution>(m, "SdpSolution")
      .def_property_readonly("status", [](const SdpSolution& s) { return to_string(s.status); })
      .def_readonly("primal_objective", &SdpSolution::primal_objective)
      .def_readonly("dual_objective", &SdpSolution::dual_objective)
      .def_readonly("primal_residual", &SdpSolution::primal_residual)
      .def_readonly("dual_residual", &SdpSolution::dual_residual)
      .def_readonly("relative_gap", &SdpSolution::relative_gap)
      .def_readonly("iterations", &SdpSolution::iterations)
      .def_readonly("dual", &SdpSolution::dual);
  m.def("solve_sdpa_file", [](const std::string& path) { return solve(read_sdpa(path)); });

  py::class_<SynthResult>(m, "SynthResult")
      .def_readonly("controller", &SynthResult::controller)
      .def_readonly("solution", &SynthResult::solution)
      .def_readonly("initial_mass", &SynthResult::initial_mass)
      .def_readonly("solved_objective", &SynthResult::solved_objective)
      .def_readonly("seconds", &SynthResult::seconds)
      .def_property_readonly("liouville_residual",
                             [](const SynthResult& r) { return r.residuals.liouville_max; })
      .def_property_readonly("grid_passed", &SynthResult::grid_passed)
      .def("summary", [](const SynthResult& r) { return synth_summary(r).dump(); });
  m.def(
      "synthesize",
      [](const HybridSystem& s, int order, int degree, double penalty, bool clamp) {
        SynthOptions o;
        o.order = order;
        o.controller_degree = degree;
        o.relaxation.occupation_penalty = penalty;
        o.clamp = clamp;
        py::gil_scoped_release release;
        return synthesize(s, o);
      },
      py::arg("system"), py::arg("order") = 1, py::arg("degree") = 1,
      py::arg("occupation_penalty") = 1e-3, py::arg("clamp") = true);
}
