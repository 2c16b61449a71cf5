#include "occsynth/examples.h"

#include <cmath>
#include <functional>
#include <map>
#include <numbers>

namespace occsynth::examples {

namespace {

using Strings = std::vector<std::string>;

std::vector<Polynomial> parse_all(const Strings& texts, int n, const Strings& names = {}) {
  std::vector<Polynomial> out;
  for (const auto& t : texts) out.push_back(Polynomial::parse(t, n, names));
  return out;
}

// g given row by row, one string per (state, input) pair.
std::vector<std::vector<Polynomial>> parse_gain(const std::vector<Strings>& rows, int n,
                                                const Strings& names = {}) {
  std::vector<std::vector<Polynomial>> out;
  for (const auto& row : rows) out.push_back(parse_all(row, n, names));
  return out;
}

Box cube(int n, double radius) { return Box(n, Interval{-radius, radius}); }

SemialgebraicSet box_set(const Box& box) { return SemialgebraicSet::from_box(box); }

PiecewiseController controller(int n, int m, const std::vector<Strings>& laws) {
  PiecewiseController ctrl{n, m, {}, true};
  for (const auto& law : laws) ctrl.laws.push_back(parse_all(law, n));
  return ctrl;
}

ExampleEntry double_integrator() {
  ExampleEntry e;
  e.name = "double_integrator";
  HybridSystem& s = e.system;
  s.n = 2;
  s.m = 1;
  const auto f = parse_all({"x1 + 0.01*x2", "x2"}, 2);
  const auto g = parse_gain({{"0"}, {"0.01"}}, 2);
  s.modes.push_back({box_set({{-1.0, 0.5}, {-1.0, 1.0}}), f, g});
  s.modes.push_back({box_set({{0.5, 1.0}, {-1.0, 1.0}}), f, g});
  s.input_box = cube(1, 1.0);
  s.target = box_set(cube(2, 0.1));
  s.switches = {{0, 1}, {1, 0}};
  e.reference_controller = controller(
      2, 1, {{"-0.079924 - 1.1147*x1 - 1.4952*x2"}, {"-0.36197 - 0.53351*x1 - 0.6395*x2"}});
  e.reference_controller->clamp = false;
  e.order = 1;
  e.controller_degree = 1;
  e.t_max = 1000;
  e.clamp_inputs = false;
  e.provenance =
      "Dynamics, sets, controller coefficients and initial states as published for the "
      "hybridized double integrator. Mode 0 is the cell x1 <= 0.5 holding the origin. "
      "Inputs are not saturated: from (-0.7, -0.8) no input in [-1, 1] stops the state "
      "before x1 = -1, while the published trajectory reaches the target, so the "
      "published runs applied the laws unclamped.";
  e.validation_states = {{0.8, -0.9}, {0.4, 0.6}, {-0.7, -0.8}, {-0.5, 0.9}};
  return e;
}

// Linear inverted pendulum against a wall: m = 1, l = 1, d = 0.1, g = 10,
// k = 1000, Euler step 0.01, torque |u| <= 4 rescaled to [-1, 1].
ExampleEntry pendulum_wall() {
  ExampleEntry e;
  e.name = "pendulum_wall";
  HybridSystem& s = e.system;
  s.n = 2;
  s.m = 1;
  const auto g = parse_gain({{"0"}, {"0.04"}}, 2);
  s.modes.push_back({box_set({{-0.12, 0.1}, {-1.0, 1.0}}),
                     parse_all({"x1 + 0.01*x2", "0.1*x1 + x2"}, 2), g});
  s.modes.push_back({box_set({{0.1, 0.12}, {-1.0, 1.0}}),
                     parse_all({"x1 + 0.01*x2", "-9.9*x1 + x2 + 1"}, 2), g});
  s.input_box = cube(1, 1.0);
  s.target = box_set({{-0.03, 0.03}, {-0.1, 0.1}});
  s.switches = {{0, 1}, {1, 0}};
  e.reference_controller = controller(
      2, 1, {{"0.10336 - 6.7202*x1 - 1.6978*x2"}, {"-0.62962 + 5.4774*x1 - 0.60315*x2"}});
  e.order = 1;
  e.controller_degree = 1;
  e.t_max = 2000;
  e.provenance =
      "Derived: theta'' = (g/l) theta + u/(m l^2) free, plus wall torque -k (l theta - d)/(m l) "
      "for theta >= d; explicit Euler with dt = 0.01; torque bound 4 scaled to a unit input. "
      "Validated by the five published initial states (0.08, 0.2 + 0.1 i) reaching the "
      "target under the published controller. State box [-0.12, 0.12] x [-1, 1] and t_max "
      "are artifact choices.";
  for (int i = 0; i < 5; ++i) e.validation_states.push_back({0.08, (2.0 + i) / 10.0});
  return e;
}

ExampleEntry dubins() {
  ExampleEntry e;
  e.name = "dubins";
  HybridSystem& s = e.system;
  s.n = 3;
  s.m = 2;
  const auto f = parse_all({"x1", "x2", "x3"}, 3);
  const auto g = parse_gain({{"0.01", "0"}, {"0", "0.01"}, {"0.01*x2", "-0.01*x1"}}, 3);
  s.modes.push_back({box_set({{-1.0, 1.0}, {-1.0, 0.5}, {-1.0, 1.0}}), f, g});
  s.modes.push_back({box_set({{-1.0, 1.0}, {0.5, 1.0}, {-1.0, 1.0}}), f, g});
  s.input_box = cube(2, 1.0);
  s.target = box_set(cube(3, 0.1));
  s.switches = {{0, 1}, {1, 0}};
  e.order = 2;
  e.controller_degree = 4;
  e.t_max = 2000;
  e.provenance =
      "Brockett integrator with Euler step 0.01 as published; input box [-1, 1]^2 and t_max "
      "are artifact choices. No published controller.";
  e.validation_states = {{-1, 1, 0.9}, {1, 1, 0},      {-0.2, 1, -0.7},
                         {0.7, -1, 0.9}, {1, -1, -0.6}, {-1, -1, -0.6}};
  e.heavy = true;
  return e;
}

// Variable-height inverted pendulum, m q'' = -m g + m (q - b) u, with base
// b = c_i + 0.1 v_b and leg force u = 10 + 5 v_u. The bilinear v_b v_u term
// is dropped so the model stays control-affine.
ExampleEntry variable_height_pendulum() {
  ExampleEntry e;
  e.name = "variable_height_pendulum";
  HybridSystem& s = e.system;
  s.n = 4;
  s.m = 2;
  const double centers[2] = {0.0, 0.2};
  const Box cells[2] = {{{-0.1, 0.1}, {-0.1, 0.1}, {-1.0, 1.0}, {-1.0, 1.0}},
                        {{0.1, 0.3}, {-0.1, 0.1}, {-1.0, 1.0}, {-1.0, 1.0}}};
  for (int i = 0; i < 2; ++i) {
    const std::string c = format_double(centers[i]);
    const std::string dx = "(x1 - " + c + ")";
    const auto f = parse_all({"x1 + 0.01*x3", "x2 + 0.01*x4", "x3 + 0.1*" + dx, "x4 + 0.1*x2"}, 4);
    const auto g =
        parse_gain({{"0", "0"}, {"0", "0"}, {"-0.01", "0.05*" + dx}, {"0", "0.05 + 0.05*x2"}}, 4);
    s.modes.push_back({box_set(cells[i]), f, g});
  }
  s.input_box = cube(2, 1.0);
  s.target = box_set({{-0.02, 0.02}, {-0.02, 0.02}, {-0.1, 0.1}, {-0.1, 0.1}});
  s.switches = {{0, 1}, {1, 0}};
  e.order = 2;
  e.controller_degree = 3;
  e.t_max = 2000;
  e.provenance =
      "Derived from m q'' = -m g + m (q - b) u with m = 1, g = 10, nominal height 1, base "
      "intervals [-0.1, 0.1] and [0.1, 0.3]; control-affine approximation drops the "
      "base-force product; explicit Euler with dt = 0.01. Box bounds, target and t_max are "
      "artifact choices.";
  e.validation_states = {{0.2, 0.08, 0, 0}, {0.08, 0.05, 0, 0}, {0.04, -0.08, 0, 0}};
  e.heavy = true;
  return e;
}

// Cart-pole against a wall, linearized: m_c = m_p = 1, l = 1, g = 10,
// d = 0.5, k = 50, dt = 0.01, force |f| <= 20. Physical state
// (x, theta, x', theta') = D xi with D = diag(1.5, pi/6, 20, 5).
ExampleEntry cart_pole_wall() {
  ExampleEntry e;
  e.name = "cart_pole_wall";
  HybridSystem& s = e.system;
  s.n = 4;
  s.m = 1;
  const double scale[4] = {1.5, std::numbers::pi / 6.0, 20.0, 5.0};
  const double force = 20.0;
  const double dt = 0.01;
  const Strings phys = {"p", "q", "v", "w"};
  const Strings updates[2] = {
      {"p + 0.01*v", "q + 0.01*w", "v + 0.1*q", "w + 0.2*q"},
      {"p + 0.01*v", "q + 0.01*w", "v + 0.1*q", "w + 0.01*(50*p - 30*q + 25)"}};
  std::vector<Polynomial> to_phys;
  for (int k = 0; k < 4; ++k) to_phys.push_back(scale[k] * Polynomial::variable(4, k));
  std::vector<std::vector<Polynomial>> g(4, std::vector<Polynomial>(1, Polynomial(4)));
  g[2][0] = Polynomial(4, dt * force / scale[2]);
  g[3][0] = Polynomial(4, dt * force / scale[3]);
  // No contact while the tip stays right of the wall: x - theta + d >= 0.
  const Polynomial gap =
      Polynomial::parse("p - q + 0.5", 4, phys).compose(to_phys);
  for (int i = 0; i < 2; ++i) {
    std::vector<Polynomial> f;
    for (int k = 0; k < 4; ++k) {
      f.push_back((1.0 / scale[k]) * Polynomial::parse(updates[i][k], 4, phys).compose(to_phys));
    }
    const SemialgebraicSet cell =
        box_set(cube(4, 1.0)).with_extra({i == 0 ? gap : -gap});
    s.modes.push_back({cell, f, g});
  }
  s.input_box = cube(1, 1.0);
  s.target = box_set(cube(4, 0.1));
  s.switches = {{0, 1}, {1, 0}};
  e.order = 1;
  e.controller_degree = 1;
  e.t_max = 2000;
  e.provenance =
      "Derived: linearized cart-pole x'' = f + (m_p g/m_c) theta, theta'' = f/(m_c l) + "
      "((m_c + m_p) g/(m_c l)) theta, plus wall force k (theta - x - d) on the pole in "
      "contact; explicit Euler with dt = 0.01; state scaled by diag(1.5, pi/6, 20, 5). Mode 0 "
      "is the free mode (the published numbering puts the contact mode first). Force bound "
      "20 and t_max are artifact choices. Validation set: the four published initial "
      "states; no published controller.";
  e.validation_states = {{-0.5, -0.35, 0, 0}, {-0.5, 0, 0, 0}, {-0.75, -0.2, 0, 0}, {1, -0.55, 0, 0}};
  e.heavy = true;
  return e;
}

const std::map<std::string, std::function<ExampleEntry()>>& registry() {
  static const std::map<std::string, std::function<ExampleEntry()>> table = {
      {"double_integrator", double_integrator},
      {"pendulum_wall", pendulum_wall},
      {"dubins", dubins},
      {"variable_height_pendulum", variable_height_pendulum},
      {"cart_pole_wall", cart_pole_wall},
  };
  return table;
}

}  // namespace

std::vector<std::string> names() {
  return {"double_integrator", "pendulum_wall", "dubins", "variable_height_pendulum",
          "cart_pole_wall"};
}

ExampleEntry get(const std::string& name) {
  const auto& table = registry();
  const auto it = table.find(name);
  if (it == table.end()) {
    std::string known;
    for (const auto& n : names()) known += (known.empty() ? "" : ", ") + n;
    throw UnknownExampleError("unknown example '" + name + "' (known: " + known + ")");
  }
  return it->second();
}

}  // namespace occsynth::examples
