#include "occsynth/model.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "occsynth/random.h"

namespace occsynth {

SemialgebraicSet::SemialgebraicSet(std::vector<Polynomial> polys, Box box)
    : polys_(std::move(polys)), box_(std::move(box)) {
  for (const auto& iv : box_) {
    if (!(iv.lo <= iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi)) {
      throw ModelError("bounding box must be finite with lo <= hi");
    }
  }
  for (const auto& p : polys_) {
    if (p.var_count() != var_count()) {
      throw ModelError("defining polynomial has wrong variable count");
    }
  }
}

SemialgebraicSet SemialgebraicSet::from_box(const Box& box) {
  const int n = static_cast<int>(box.size());
  std::vector<Polynomial> polys;
  for (int k = 0; k < n; ++k) {
    const Polynomial xk = Polynomial::variable(n, k);
    polys.push_back(xk - box[k].lo);
    polys.push_back(-xk + box[k].hi);
  }
  return SemialgebraicSet(std::move(polys), box);
}

bool SemialgebraicSet::contains(const std::vector<double>& x, double tol) const {
  for (const auto& h : polys_) {
    if (h.evaluate(x) < -tol) return false;
  }
  return true;
}

Polynomial SemialgebraicSet::ball_polynomial() const {
  const int n = var_count();
  double radius_sq = 0.0;
  for (const auto& iv : box_) {
    radius_sq += std::max(iv.lo * iv.lo, iv.hi * iv.hi);
  }
  Polynomial ball(n, 1.05 * radius_sq);
  for (int k = 0; k < n; ++k) {
    const Polynomial xk = Polynomial::variable(n, k);
    ball -= xk * xk;
  }
  return ball;
}

bool SemialgebraicSet::has_ball() const {
  const Polynomial ball = ball_polynomial();
  return std::find(polys_.begin(), polys_.end(), ball) != polys_.end();
}

SemialgebraicSet SemialgebraicSet::with_ball() const {
  if (has_ball()) return *this;
  SemialgebraicSet out(*this);
  out.polys_.push_back(ball_polynomial());
  return out;
}

SemialgebraicSet SemialgebraicSet::with_extra(std::vector<Polynomial> extra) const {
  std::vector<Polynomial> polys(polys_);
  for (auto& p : extra) polys.push_back(std::move(p));
  return SemialgebraicSet(std::move(polys), box_);
}

std::vector<Polynomial> HybridSystem::phi(int mode) const {
  const Mode& md = modes.at(mode);
  const int nv = n + m;
  std::vector<Polynomial> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    Polynomial comp = md.f[k].lift(nv, 0);
    for (int j = 0; j < m; ++j) {
      comp += md.g[k][j].lift(nv, 0) * Polynomial::variable(nv, n + j);
    }
    out.push_back(std::move(comp));
  }
  return out;
}

int HybridSystem::phi_degree(int mode) const {
  int d = 1;
  for (const auto& p : phi(mode)) d = std::max(d, p.degree());
  return d;
}

SemialgebraicSet HybridSystem::input_set() const {
  return SemialgebraicSet::from_box(input_box);
}

Box HybridSystem::state_box() const {
  Box out(n, Interval{INFINITY, -INFINITY});
  for (const auto& md : modes) {
    for (int k = 0; k < n; ++k) {
      out[k].lo = std::min(out[k].lo, md.cell.box()[k].lo);
      out[k].hi = std::max(out[k].hi, md.cell.box()[k].hi);
    }
  }
  return out;
}

bool HybridSystem::has_switch(int i, int j) const {
  return std::find(switches.begin(), switches.end(), std::make_pair(i, j)) !=
         switches.end();
}

std::vector<double> HybridSystem::apply_dynamics(int mode,
                                                 const std::vector<double>& x,
                                                 const std::vector<double>& u) const {
  const Mode& md = modes.at(mode);
  std::vector<double> next(n);
  for (int k = 0; k < n; ++k) {
    double v = md.f[k].evaluate(x);
    for (int j = 0; j < m; ++j) v += md.g[k][j].evaluate(x) * u[j];
    next[k] = v;
  }
  return next;
}

TransitionSet build_transition_set(const HybridSystem& sys, int i, int j,
                                   const ModelOptions& options) {
  if (i == j) throw ModelError("transition set needs distinct modes");
  if (i < 0 || j < 0 || i >= sys.mode_count() || j >= sys.mode_count()) {
    throw ModelError("transition set mode index out of range");
  }
  if (!sys.has_switch(i, j)) {
    throw ModelError("switch (" + std::to_string(i) + "," + std::to_string(j) +
                     ") is not declared");
  }
  const int nv = sys.n + sys.m;
  const auto phi = sys.phi(i);
  std::vector<Polynomial> polys;
  for (const auto& h : sys.modes[i].cell.polys()) polys.push_back(h.lift(nv, 0));
  const SemialgebraicSet inputs = sys.input_set();
  for (const auto& h : inputs.polys()) polys.push_back(h.lift(nv, sys.n));
  for (const auto& h : sys.modes[j].cell.polys()) {
    Polynomial composed = h.compose(phi);
    if (composed.degree() > options.max_composed_degree) {
      throw ModelError("composed transition constraint degree " +
                       std::to_string(composed.degree()) + " exceeds cap " +
                       std::to_string(options.max_composed_degree));
    }
    polys.push_back(std::move(composed));
  }
  Box box = sys.modes[i].cell.box();
  box.insert(box.end(), sys.input_box.begin(), sys.input_box.end());
  return TransitionSet{i, j, SemialgebraicSet(std::move(polys), std::move(box))};
}

std::optional<int> find_mode(const HybridSystem& sys, const std::vector<double>& x,
                             double tol) {
  for (int i = 0; i < sys.mode_count(); ++i) {
    if (sys.modes[i].cell.contains(x, tol)) return i;
  }
  return std::nullopt;
}

int mode_of(const HybridSystem& sys, const std::vector<double>& x,
            const ModelOptions& options) {
  auto mode = find_mode(sys, x, options.cell_tolerance);
  if (!mode) {
    std::ostringstream os;
    os << "state (";
    for (std::size_t k = 0; k < x.size(); ++k) os << (k ? ", " : "") << x[k];
    os << ") lies outside every cell";
    throw OutOfDomainError(os.str());
  }
  return *mode;
}

bool ValidationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const ValidationCheck& c) {
    return c.passed || c.warning_only;
  });
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.passed ? "PASS" : (c.warning_only ? "WARN" : "FAIL")) << "  "
       << c.name;
    if (!c.detail.empty()) os << "  (" << c.detail << ")";
    os << '\n';
  }
  return os.str();
}

namespace {

std::vector<double> sample_box(const CounterRng& rng, std::uint64_t draw,
                               const Box& box) {
  std::vector<double> x(box.size());
  for (std::size_t k = 0; k < box.size(); ++k) {
    x[k] = rng.uniform(draw * box.size() + k, box[k].lo, box[k].hi);
  }
  return x;
}

bool strictly_inside(const SemialgebraicSet& set, const std::vector<double>& x,
                     double margin) {
  for (const auto& h : set.polys()) {
    if (h.evaluate(x) <= margin) return false;
  }
  return true;
}

}  // namespace

ValidationReport validate(const HybridSystem& sys, const ModelOptions& options) {
  ValidationReport report;
  auto add = [&](std::string name, bool passed, std::string detail = {},
                 bool warning_only = false) {
    report.checks.push_back({std::move(name), passed, warning_only, std::move(detail)});
  };

  // Structural checks first; the sampling checks below rely on them.
  std::string dim_problem;
  if (sys.n < 1 || sys.m < 1) dim_problem = "n and m must be positive";
  if (sys.modes.empty()) dim_problem = "no modes";
  if (static_cast<int>(sys.input_box.size()) != sys.m) dim_problem = "input box size != m";
  if (sys.target.var_count() != sys.n) dim_problem = "target has wrong dimension";
  for (std::size_t i = 0; i < sys.modes.size() && dim_problem.empty(); ++i) {
    const Mode& md = sys.modes[i];
    const std::string tag = "mode " + std::to_string(i) + ": ";
    if (md.cell.var_count() != sys.n) dim_problem = tag + "cell dimension";
    if (static_cast<int>(md.f.size()) != sys.n) dim_problem = tag + "f size";
    if (static_cast<int>(md.g.size()) != sys.n) dim_problem = tag + "g rows";
    for (const auto& row : md.g) {
      if (static_cast<int>(row.size()) != sys.m) dim_problem = tag + "g columns";
      for (const auto& p : row) {
        if (p.var_count() != sys.n) dim_problem = tag + "g arity";
      }
    }
    for (const auto& p : md.f) {
      if (p.var_count() != sys.n) dim_problem = tag + "f arity";
    }
  }
  for (const auto& [a, b] : sys.switches) {
    if (a < 0 || b < 0 || a >= sys.mode_count() || b >= sys.mode_count() || a == b) {
      dim_problem = "invalid switch pair";
    }
  }
  add("dimensions", dim_problem.empty(), dim_problem);
  if (!dim_problem.empty()) return report;

  const CounterRng rng(options.seed);
  const std::vector<double> origin(sys.n, 0.0);
  const bool origin_ok = strictly_inside(sys.modes[0].cell, origin, options.cell_tolerance);
  add("origin_interior_mode0", origin_ok,
      origin_ok ? "" : "origin must lie strictly inside the mode-0 cell");

  {
    int tested = 0;
    int outside = 0;
    const Box& zbox = sys.target.box();
    for (int s = 0; s < 20 * options.target_samples && tested < options.target_samples; ++s) {
      const auto x = sample_box(rng, s, zbox);
      if (!sys.target.contains(x, 0.0)) continue;
      ++tested;
      if (!sys.modes[0].cell.contains(x, options.cell_tolerance)) ++outside;
    }
    const bool ok = tested > 0 && outside == 0;
    add("target_in_mode0", ok,
        std::to_string(outside) + " of " + std::to_string(tested) +
            " target samples outside the mode-0 cell");
  }

  {
    bool normalized = true;
    for (const auto& iv : sys.input_box) {
      normalized = normalized && iv.lo == -1.0 && iv.hi == 1.0;
    }
    add("input_normalized", normalized,
        normalized ? "" : "input box is not [-1,1]^m; call normalize_input_box");
  }

  {
    // Points satisfying all h_j >= 0 must stay in the declared box. Sample
    // a box twice as wide and look for escapees.
    std::string problem;
    for (int i = 0; i < sys.mode_count() && problem.empty(); ++i) {
      const auto& cell = sys.modes[i].cell;
      Box wide = cell.box();
      for (auto& iv : wide) {
        const double w = std::max(iv.hi - iv.lo, 1e-6);
        iv.lo -= w / 2;
        iv.hi += w / 2;
      }
      if (cell.polys().empty()) problem = "cell " + std::to_string(i) + " has no constraints";
      for (int s = 0; s < 2000 && problem.empty(); ++s) {
        const auto x = sample_box(CounterRng(options.seed + 17 + i), s, wide);
        if (!cell.contains(x, 0.0)) continue;
        for (int k = 0; k < sys.n; ++k) {
          if (x[k] < cell.box()[k].lo - 1e-12 || x[k] > cell.box()[k].hi + 1e-12) {
            problem = "cell " + std::to_string(i) + " escapes its bounding box";
            break;
          }
        }
      }
    }
    add("cells_compact", problem.empty(), problem);
  }

  {
    int overlaps = 0;
    const Box xbox = sys.state_box();
    const CounterRng cell_rng(options.seed + 99);
    for (int s = 0; s < 2000; ++s) {
      const auto x = sample_box(cell_rng, s, xbox);
      int count = 0;
      for (const auto& md : sys.modes) {
        if (strictly_inside(md.cell, x, 1e-9)) ++count;
      }
      if (count > 1) ++overlaps;
    }
    add("cells_disjoint_interiors", overlaps == 0,
        std::to_string(overlaps) + " samples in more than one cell interior");
  }

  for (const auto& [i, j] : sys.switches) {
    const std::string name =
        "switch_nonempty(" + std::to_string(i) + "," + std::to_string(j) + ")";
    TransitionSet ts;
    try {
      ts = build_transition_set(sys, i, j, options);
    } catch (const ModelError& e) {
      add(name, false, e.what());
      continue;
    }
    bool found = false;
    const CounterRng ts_rng(options.seed + 1000 + 31 * i + j);
    for (int s = 0; s < options.witness_samples && !found; ++s) {
      found = ts.set.contains(sample_box(ts_rng, s, ts.set.box()), 0.0);
    }
    add(name, found, found ? "" : "no witness found by rejection sampling",
        /*warning_only=*/true);
  }

  // The relaxation appends the ball polynomial to every set it uses.
  {
    bool ok = sys.target.with_ball().has_ball() && sys.input_set().with_ball().has_ball();
    for (const auto& md : sys.modes) ok = ok && md.cell.with_ball().has_ball();
    add("putinar_augmentation", ok);
  }
  return report;
}

HybridSystem normalize_input_box(const HybridSystem& sys) {
  HybridSystem out(sys);
  std::vector<double> center(sys.m), scale(sys.m);
  for (int j = 0; j < sys.m; ++j) {
    const Interval& iv = sys.input_box.at(j);
    if (!(iv.lo < iv.hi)) {
      throw ModelError("input interval " + std::to_string(j) + " is degenerate");
    }
    center[j] = 0.5 * (iv.lo + iv.hi);
    scale[j] = 0.5 * (iv.hi - iv.lo);
  }
  for (auto& md : out.modes) {
    for (int k = 0; k < sys.n; ++k) {
      for (int j = 0; j < sys.m; ++j) {
        if (center[j] != 0.0) md.f[k] += md.g[k][j] * center[j];
        md.g[k][j] *= scale[j];
      }
    }
  }
  out.input_box.assign(sys.m, Interval{-1.0, 1.0});
  return out;
}

std::vector<double> denormalize_input(const Box& original_box,
                                      const std::vector<double>& v) {
  std::vector<double> u(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    const Interval& iv = original_box.at(j);
    u[j] = 0.5 * (iv.lo + iv.hi) + 0.5 * (iv.hi - iv.lo) * v[j];
  }
  return u;
}

}  // namespace occsynth
