#include "occsynth/controller.h"

#include <algorithm>
#include <istream>
#include <ostream>

namespace occsynth {

std::vector<double> PiecewiseController::evaluate(int mode, const std::vector<double>& x) const {
  const auto& law = laws.at(mode);
  std::vector<double> u(law.size());
  for (std::size_t j = 0; j < law.size(); ++j) u[j] = law[j].evaluate(x);
  return u;
}

PiecewiseController zero_controller(int n, int m, int modes) {
  PiecewiseController ctrl{n, m, {}, true};
  ctrl.laws.assign(modes, std::vector<Polynomial>(m, Polynomial(n)));
  return ctrl;
}

ExtractedLaw extract(const MomentSequence& z, int n, int m, int k,
                     const ExtractionOptions& options) {
  if (z.var_count() != n + m) throw ControllerError("moment sequence is not over (x, u)");
  if (k < 0) throw ControllerError("controller degree must be nonnegative");
  const int needed = std::max(2 * k, k + 1);
  if (z.max_degree() < needed) {
    throw ControllerError("degree-" + std::to_string(k) + " extraction needs moments up to " +
                          std::to_string(needed) + ", sequence stops at " +
                          std::to_string(z.max_degree()));
  }
  ExtractedLaw out;
  out.law.assign(m, Polynomial(n));
  const auto basis = enumerate_monomials(n, k);
  const int size = static_cast<int>(basis.size());
  const MultiIndex u_zero(m);

  if (!(z.mass() > options.min_mass)) {
    out.uncontrolled = true;
    out.warning = "mode carries no occupation mass; zero controller emitted";
    return out;
  }
  Eigen::MatrixXd mx(size, size);
  for (int a = 0; a < size; ++a) {
    for (int b = a; b < size; ++b) {
      mx(a, b) = mx(b, a) = z[(basis[a] + basis[b]).concat(u_zero)];
    }
  }
  Eigen::MatrixXd rhs(size, m);
  for (int j = 0; j < m; ++j) {
    const MultiIndex ej = MultiIndex::unit(m, j);
    for (int a = 0; a < size; ++a) rhs(a, j) = z[basis[a].concat(ej)];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(mx, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv[0] : 0.0;
  if (!(smax > 0.0)) {
    out.uncontrolled = true;
    out.warning = "marginal moment matrix is numerically zero; zero controller emitted";
    return out;
  }
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (int i = 0; i < sv.size(); ++i) {
    if (sv[i] > options.cutoff * smax) {
      inv[i] = 1.0 / sv[i];
      ++out.rank;
    }
  }
  const Eigen::MatrixXd coef = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose() * rhs;
  if (out.rank < size) {
    out.warning = "marginal moment matrix has numerical rank " + std::to_string(out.rank) +
                  " of " + std::to_string(size);
  }
  for (int j = 0; j < m; ++j) {
    Polynomial::TermMap terms;
    for (int a = 0; a < size; ++a) {
      if (coef(a, j) != 0.0) terms[basis[a]] = coef(a, j);
    }
    out.law[j] = Polynomial(n, std::move(terms));
  }
  return out;
}

std::vector<double> clamp_unit(std::vector<double> u) {
  for (auto& v : u) v = std::clamp(v, -1.0, 1.0);
  return u;
}

std::vector<double> apply(const PiecewiseController& ctrl, const HybridSystem& sys,
                          const std::vector<double>& x, double cell_tolerance) {
  ModelOptions opts;
  opts.cell_tolerance = cell_tolerance;
  const int mode = mode_of(sys, x, opts);
  if (mode >= ctrl.mode_count()) throw ControllerError("controller has no law for this mode");
  auto u = ctrl.evaluate(mode, x);
  return ctrl.clamp ? clamp_unit(std::move(u)) : u;
}

namespace {

std::vector<std::string> state_names(int n) {
  std::vector<std::string> names;
  for (int k = 0; k < n; ++k) names.push_back("x" + std::to_string(k + 1));
  return names;
}

}  // namespace

nlohmann::json controller_to_json(const PiecewiseController& ctrl) {
  nlohmann::json doc;
  doc["n"] = ctrl.n;
  doc["m"] = ctrl.m;
  doc["clamp"] = ctrl.clamp;
  doc["variables"] = state_names(ctrl.n);
  nlohmann::json modes = nlohmann::json::array();
  for (int i = 0; i < ctrl.mode_count(); ++i) {
    nlohmann::json laws = nlohmann::json::array();
    for (const auto& p : ctrl.laws[i]) laws.push_back(p.to_string());
    modes.push_back({{"mode", i}, {"u", std::move(laws)}});
  }
  doc["modes"] = std::move(modes);
  return doc;
}

PiecewiseController controller_from_json(const nlohmann::json& doc) {
  try {
    PiecewiseController ctrl;
    ctrl.n = doc.at("n").get<int>();
    ctrl.m = doc.at("m").get<int>();
    ctrl.clamp = doc.value("clamp", true);
    std::vector<std::string> names = state_names(ctrl.n);
    if (doc.contains("variables")) names = doc.at("variables").get<std::vector<std::string>>();
    const auto& modes = doc.at("modes");
    ctrl.laws.assign(modes.size(), {});
    for (std::size_t idx = 0; idx < modes.size(); ++idx) {
      const auto& entry = modes[idx];
      const int mode = entry.value("mode", static_cast<int>(idx));
      if (mode < 0 || mode >= static_cast<int>(modes.size())) {
        throw ControllerError("controller mode index out of range");
      }
      const auto texts = entry.at("u").get<std::vector<std::string>>();
      if (static_cast<int>(texts.size()) != ctrl.m) {
        throw ControllerError("mode " + std::to_string(mode) + " lists " +
                              std::to_string(texts.size()) + " laws, expected m = " +
                              std::to_string(ctrl.m));
      }
      for (const auto& t : texts) ctrl.laws[mode].push_back(Polynomial::parse(t, ctrl.n, names));
    }
    return ctrl;
  } catch (const nlohmann::json::exception& e) {
    throw ControllerError(std::string("controller file: ") + e.what());
  } catch (const PolynomialError& e) {
    throw ControllerError(std::string("controller file: ") + e.what());
  }
}

void write_controller(const PiecewiseController& ctrl, std::ostream& out) {
  out << controller_to_json(ctrl).dump(2) << '\n';
}

PiecewiseController read_controller(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ControllerError(std::string("controller file: ") + e.what());
  }
  return controller_from_json(doc);
}

}  // namespace occsynth
