#include "occsynth/moments.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace occsynth {

MomentSequence::MomentSequence(int var_count, int max_degree)
    : var_count_(var_count),
      max_degree_(max_degree),
      values_(monomial_count(var_count, max_degree), 0.0) {}

MomentSequence::MomentSequence(int var_count, int max_degree,
                               std::vector<double> values)
    : var_count_(var_count), max_degree_(max_degree), values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != monomial_count(var_count, max_degree)) {
    throw MomentError("moment vector length does not match C(n+d, n)");
  }
}

double MomentSequence::operator[](const MultiIndex& alpha) const {
  if (alpha.degree() > max_degree_) {
    throw MomentError("moment of degree " + std::to_string(alpha.degree()) +
                      " requested from a sequence truncated at " +
                      std::to_string(max_degree_));
  }
  return values_[monomial_rank(alpha)];
}

double& MomentSequence::operator[](const MultiIndex& alpha) {
  if (alpha.degree() > max_degree_) {
    throw MomentError("moment index beyond truncation degree");
  }
  return values_[monomial_rank(alpha)];
}

double MomentSequence::apply(const Polynomial& p) const {
  if (p.var_count() != var_count_) {
    throw MomentError("functional applied to polynomial of wrong arity");
  }
  double sum = 0.0;
  for (const auto& [alpha, c] : p.terms()) sum += c * (*this)[alpha];
  return sum;
}

MomentSequence MomentSequence::marginal(int k) const {
  MomentSequence out(k, max_degree_);
  const MultiIndex tail(var_count_ - k);
  for (const auto& alpha : enumerate_monomials(k, max_degree_)) {
    out[alpha] = (*this)[alpha.concat(tail)];
  }
  return out;
}

MomentSequence lebesgue_box_moments(const Box& box, int max_degree) {
  const int n = static_cast<int>(box.size());
  for (const auto& iv : box) {
    if (!(iv.lo < iv.hi)) throw MomentError("degenerate box");
  }
  // One-dimensional integrals of x^a on each side, then products.
  std::vector<std::vector<double>> axis(n, std::vector<double>(max_degree + 1));
  for (int k = 0; k < n; ++k) {
    double lo_pow = box[k].lo;
    double hi_pow = box[k].hi;
    for (int a = 0; a <= max_degree; ++a) {
      axis[k][a] = (hi_pow - lo_pow) / (a + 1);
      lo_pow *= box[k].lo;
      hi_pow *= box[k].hi;
    }
  }
  MomentSequence y(n, max_degree);
  const auto basis = enumerate_monomials(n, max_degree);
  for (std::size_t idx = 0; idx < basis.size(); ++idx) {
    double v = 1.0;
    for (int k = 0; k < n; ++k) v *= axis[k][basis[idx][k]];
    y.values()[idx] = v;
  }
  return y;
}

namespace {

// Gauss-Legendre nodes and weights on [-1, 1] (Golub-Welsch).
void gauss_legendre(int points, std::vector<double>& nodes, std::vector<double>& weights) {
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(points, points);
  for (int k = 1; k < points; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jac(k, k - 1) = jac(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  nodes.resize(points);
  weights.resize(points);
  for (int k = 0; k < points; ++k) {
    nodes[k] = es.eigenvalues()[k];
    const double v = es.eigenvectors()(0, k);
    weights[k] = 2.0 * v * v;
  }
}

// Integrals of u^i w^j, i + j <= degree, over the part of [ul,uh] x [wl,wh]
// where c + a u + b w >= 0, with b != 0.
std::vector<std::vector<double>> cut_rectangle_moments(Interval ur, Interval wr, double c,
                                                       double a, double b, int degree) {
  std::vector<std::vector<double>> out(degree + 1, std::vector<double>(degree + 1, 0.0));
  // Boundary line w = l(u).
  auto line = [&](double u) { return (-c - a * u) / b; };
  std::vector<double> cuts{ur.lo, ur.hi};
  if (a != 0.0) {
    for (double wv : {wr.lo, wr.hi}) {
      const double u = (-c - b * wv) / a;
      if (u > ur.lo && u < ur.hi) cuts.push_back(u);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> nodes, weights;
  gauss_legendre(degree / 2 + 2, nodes, weights);
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double u0 = cuts[s], u1 = cuts[s + 1];
    if (!(u1 > u0)) continue;
    const double half = 0.5 * (u1 - u0), mid = 0.5 * (u0 + u1);
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      const double u = mid + half * nodes[q];
      double lo = wr.lo, hi = wr.hi;
      if (b > 0) {
        lo = std::max(lo, line(u));
      } else {
        hi = std::min(hi, line(u));
      }
      if (!(hi > lo)) continue;
      double upow = 1.0;
      for (int i = 0; i <= degree; ++i) {
        double lo_pow = lo, hi_pow = hi;
        for (int j = 0; i + j <= degree; ++j) {
          out[i][j] += weights[q] * half * upow * (hi_pow - lo_pow) / (j + 1);
          lo_pow *= lo;
          hi_pow *= hi;
        }
        upow *= u;
      }
    }
  }
  return out;
}

std::vector<double> axis_moments(Interval iv, int degree) {
  std::vector<double> out(degree + 1, 0.0);
  if (!(iv.hi > iv.lo)) return out;
  double lo_pow = iv.lo, hi_pow = iv.hi;
  for (int a = 0; a <= degree; ++a) {
    out[a] = (hi_pow - lo_pow) / (a + 1);
    lo_pow *= iv.lo;
    hi_pow *= iv.hi;
  }
  return out;
}

}  // namespace

MomentSequence lebesgue_cut_box_moments(const Box& box, const Polynomial& h, int max_degree) {
  const int n = static_cast<int>(box.size());
  if (h.var_count() != n || h.degree() > 1) throw MomentError("cut must be affine in x");
  std::vector<int> vars;
  for (int k = 0; k < n; ++k) {
    if (h.coefficient(MultiIndex::unit(n, k)) != 0.0) vars.push_back(k);
  }
  const double c = h.coefficient(MultiIndex(n));
  Box cut = box;
  if (vars.size() > 2) throw MomentError("cut couples more than two variables");
  std::vector<std::vector<double>> axis(n);
  std::vector<std::vector<double>> plane;
  if (vars.size() == 1) {
    const int k = vars[0];
    const double a = h.coefficient(MultiIndex::unit(n, k));
    const double root = -c / a;
    if (a > 0) {
      cut[k].lo = std::max(cut[k].lo, root);
    } else {
      cut[k].hi = std::min(cut[k].hi, root);
    }
  } else if (vars.size() == 2) {
    const int p = vars[0], q = vars[1];
    plane = cut_rectangle_moments(box[p], box[q], c, h.coefficient(MultiIndex::unit(n, p)),
                                  h.coefficient(MultiIndex::unit(n, q)), max_degree);
  } else if (c < 0) {
    return MomentSequence(n, max_degree);
  }
  for (int k = 0; k < n; ++k) axis[k] = axis_moments(cut[k], max_degree);
  MomentSequence y(n, max_degree);
  const auto basis = enumerate_monomials(n, max_degree);
  for (std::size_t idx = 0; idx < basis.size(); ++idx) {
    double v = 1.0;
    for (int k = 0; k < n; ++k) {
      if (vars.size() == 2 && (k == vars[0] || k == vars[1])) continue;
      v *= axis[k][basis[idx][k]];
    }
    if (vars.size() == 2) v *= plane[basis[idx][vars[0]]][basis[idx][vars[1]]];
    y.values()[idx] = v;
  }
  return y;
}

std::optional<MomentSequence> cell_lebesgue_moments(const SemialgebraicSet& cell,
                                                    int max_degree) {
  const int n = cell.var_count();
  const auto box_polys = SemialgebraicSet::from_box(cell.box()).polys();
  const Polynomial ball = cell.ball_polynomial();
  Box box = cell.box();
  std::optional<Polynomial> coupled;
  for (const auto& h : cell.polys()) {
    if (h == ball || std::find(box_polys.begin(), box_polys.end(), h) != box_polys.end()) {
      continue;
    }
    if (h.degree() > 1) return std::nullopt;
    int used = 0;
    int var = -1;
    for (int k = 0; k < n; ++k) {
      if (h.coefficient(MultiIndex::unit(n, k)) != 0.0) {
        ++used;
        var = k;
      }
    }
    if (used == 1) {
      // Tighten the box along one axis.
      const double a = h.coefficient(MultiIndex::unit(n, var));
      const double root = -h.coefficient(MultiIndex(n)) / a;
      if (a > 0) {
        box[var].lo = std::max(box[var].lo, root);
      } else {
        box[var].hi = std::min(box[var].hi, root);
      }
    } else if (used == 2 && !coupled) {
      coupled = h;
    } else {
      return std::nullopt;
    }
  }
  for (const auto& iv : box) {
    if (!(iv.hi > iv.lo)) return MomentSequence(n, max_degree);
  }
  if (coupled) return lebesgue_cut_box_moments(box, *coupled, max_degree);
  return lebesgue_box_moments(box, max_degree);
}

MomentSequence dirac_moments(const std::vector<double>& point, int max_degree,
                             double mass) {
  const int n = static_cast<int>(point.size());
  MomentSequence y(n, max_degree);
  const auto basis = enumerate_monomials(n, max_degree);
  for (std::size_t idx = 0; idx < basis.size(); ++idx) {
    double v = mass;
    for (int k = 0; k < n; ++k) v *= std::pow(point[k], basis[idx][k]);
    y.values()[idx] = v;
  }
  return y;
}

Eigen::MatrixXd moment_matrix(const MomentSequence& y, int r) {
  return localizing_matrix(y, Polynomial(y.var_count(), 1.0), r);
}

Eigen::MatrixXd localizing_matrix(const MomentSequence& y, const Polynomial& h,
                                  int r) {
  if (h.var_count() != y.var_count()) {
    throw MomentError("localizing polynomial has wrong arity");
  }
  if (y.max_degree() < 2 * r + h.degree()) {
    throw MomentError("moment sequence of degree " + std::to_string(y.max_degree()) +
                      " cannot fill a localizing matrix of order " +
                      std::to_string(r) + " for a degree-" +
                      std::to_string(h.degree()) + " multiplier");
  }
  const auto basis = enumerate_monomials(y.var_count(), r);
  const int size = static_cast<int>(basis.size());
  Eigen::MatrixXd mat(size, size);
  for (int a = 0; a < size; ++a) {
    for (int b = a; b < size; ++b) {
      const MultiIndex ab = basis[a] + basis[b];
      double v = 0.0;
      for (const auto& [gamma, c] : h.terms()) v += c * y[gamma + ab];
      mat(a, b) = v;
      mat(b, a) = v;
    }
  }
  return mat;
}

Eigen::VectorXd coefficient_vector(const Polynomial& p, int max_degree) {
  if (p.degree() > max_degree) {
    throw MomentError("polynomial degree " + std::to_string(p.degree()) +
                      " exceeds moment truncation " + std::to_string(max_degree));
  }
  Eigen::VectorXd c = Eigen::VectorXd::Zero(monomial_count(p.var_count(), max_degree));
  for (const auto& [alpha, coef] : p.terms()) c[monomial_rank(alpha)] = coef;
  return c;
}

Eigen::VectorXd pushforward_row(const std::vector<Polynomial>& phi,
                                const MultiIndex& beta, int z_degree) {
  if (phi.empty() || static_cast<int>(phi.size()) != beta.size()) {
    throw MomentError("pushforward map and multi-index sizes differ");
  }
  Polynomial prod(phi.front().var_count(), 1.0);
  for (int k = 0; k < beta.size(); ++k) {
    if (beta[k] > 0) prod = prod * phi[k].pow(beta[k]);
  }
  return coefficient_vector(prod, z_degree);
}

void write_moments_csv(const MomentSequence& y, std::ostream& out) {
  for (int k = 0; k < y.var_count(); ++k) out << 'a' << (k + 1) << ',';
  out << "value\n";
  const auto basis = enumerate_monomials(y.var_count(), y.max_degree());
  for (std::size_t idx = 0; idx < basis.size(); ++idx) {
    for (int k = 0; k < y.var_count(); ++k) out << basis[idx][k] << ',';
    out << format_double(y.values()[idx]) << '\n';
  }
}

MomentSequence read_moments_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw MomentError("moment CSV is empty");
  int n = 0;
  {
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) {
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      if (cell == "value") break;
      ++n;
    }
  }
  if (n == 0) throw MomentError("moment CSV header names no index columns");
  std::vector<std::pair<MultiIndex, double>> rows;
  int max_degree = 0;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::stringstream row(line);
    std::string cell;
    std::vector<int> alpha;
    double value = 0.0;
    for (int k = 0; k <= n; ++k) {
      if (!std::getline(row, cell, ',')) {
        throw MomentError("moment CSV line " + std::to_string(line_no) +
                          ": expected " + std::to_string(n + 1) + " columns");
      }
      try {
        if (k < n) {
          alpha.push_back(std::stoi(cell));
        } else {
          value = std::stod(cell);
        }
      } catch (const std::exception&) {
        throw MomentError("moment CSV line " + std::to_string(line_no) +
                          ": bad number '" + cell + "'");
      }
    }
    MultiIndex mi(std::move(alpha));
    max_degree = std::max(max_degree, mi.degree());
    rows.emplace_back(std::move(mi), value);
  }
  MomentSequence y(n, max_degree);
  if (static_cast<int>(rows.size()) != y.size()) {
    throw MomentError("moment CSV does not list every index up to degree " +
                      std::to_string(max_degree));
  }
  for (const auto& [alpha, v] : rows) y[alpha] = v;
  return y;
}

}  // namespace occsynth
