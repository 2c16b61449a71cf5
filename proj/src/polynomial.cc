#include "occsynth/polynomial.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

namespace occsynth {

MultiIndex::MultiIndex(std::vector<int> exponents)
    : exponents_(std::move(exponents)) {
  for (int e : exponents_) {
    if (e < 0) throw PolynomialError("negative exponent in multi-index");
    degree_ += e;
  }
}

MultiIndex MultiIndex::unit(int var_count, int k) {
  std::vector<int> e(var_count, 0);
  e.at(k) = 1;
  return MultiIndex(std::move(e));
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  if (size() != other.size()) {
    throw PolynomialError("multi-index size mismatch");
  }
  std::vector<int> e(exponents_);
  for (int k = 0; k < size(); ++k) e[k] += other.exponents_[k];
  return MultiIndex(std::move(e));
}

MultiIndex MultiIndex::concat(const MultiIndex& other) const {
  std::vector<int> e(exponents_);
  e.insert(e.end(), other.exponents_.begin(), other.exponents_.end());
  return MultiIndex(std::move(e));
}

std::strong_ordering MultiIndex::operator<=>(const MultiIndex& other) const {
  if (degree_ != other.degree_) return degree_ <=> other.degree_;
  // Same degree: lexicographically larger exponent vector sorts first.
  return other.exponents_ <=> exponents_;
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (int i = 1; i <= k; ++i) {
    result = result * static_cast<std::uint64_t>(n - k + i) / i;
  }
  return result;
}

int monomial_count(int n, int d) {
  if (d < 0) return 0;
  return static_cast<int>(binomial(n + d, d));
}

namespace {

// Monomials of exact degree j in n variables.
std::uint64_t exact_count(int n, int j) {
  if (n == 0) return j == 0 ? 1 : 0;
  return binomial(j + n - 1, n - 1);
}

void enumerate_exact(int n, int k, int pos, std::vector<int>& current,
                     std::vector<MultiIndex>& out) {
  if (pos == n - 1) {
    current[pos] = k;
    out.emplace_back(current);
    return;
  }
  for (int e = k; e >= 0; --e) {
    current[pos] = e;
    enumerate_exact(n, k - e, pos + 1, current, out);
  }
  current[pos] = 0;
}

}  // namespace

std::vector<MultiIndex> enumerate_monomials(int n, int d) {
  std::vector<MultiIndex> out;
  if (n <= 0 || d < 0) return out;
  out.reserve(monomial_count(n, d));
  std::vector<int> current(n, 0);
  for (int k = 0; k <= d; ++k) enumerate_exact(n, k, 0, current, out);
  return out;
}

int monomial_rank(const MultiIndex& alpha) {
  const int n = alpha.size();
  const int k = alpha.degree();
  std::uint64_t rank = k == 0 ? 0 : binomial(n + k - 1, n);
  int remaining = k;
  for (int pos = 0; pos + 1 < n; ++pos) {
    const int vars_after = n - pos - 1;
    for (int e = alpha[pos] + 1; e <= remaining; ++e) {
      rank += exact_count(vars_after, remaining - e);
    }
    remaining -= alpha[pos];
  }
  return static_cast<int>(rank);
}

Polynomial::Polynomial(int var_count, double constant) : var_count_(var_count) {
  add_term(MultiIndex(var_count), constant);
}

Polynomial::Polynomial(int var_count, TermMap terms) : var_count_(var_count) {
  for (auto& [alpha, c] : terms) {
    if (alpha.size() != var_count) {
      throw PolynomialError("term arity does not match variable count");
    }
    add_term(alpha, c);
  }
}

Polynomial Polynomial::variable(int var_count, int k) {
  if (k < 0 || k >= var_count) throw PolynomialError("variable out of range");
  return monomial(MultiIndex::unit(var_count, k));
}

Polynomial Polynomial::monomial(const MultiIndex& alpha, double coefficient) {
  Polynomial p(alpha.size());
  p.add_term(alpha, coefficient);
  return p;
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [alpha, c] : terms_) d = std::max(d, alpha.degree());
  return d;
}

double Polynomial::coefficient(const MultiIndex& alpha) const {
  auto it = terms_.find(alpha);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::add_term(const MultiIndex& alpha, double c) {
  if (c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(alpha, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

Polynomial Polynomial::operator-() const {
  Polynomial p(*this);
  for (auto& [alpha, c] : p.terms_) c = -c;
  return p;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  if (other.var_count_ != var_count_) {
    throw PolynomialError("variable count mismatch in addition");
  }
  for (const auto& [alpha, c] : other.terms_) add_term(alpha, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  if (other.var_count_ != var_count_) {
    throw PolynomialError("variable count mismatch in subtraction");
  }
  for (const auto& [alpha, c] : other.terms_) add_term(alpha, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double scalar) {
  if (scalar == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= scalar;
    if (it->second == 0.0) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
  return *this;
}

Polynomial operator*(const Polynomial& p, const Polynomial& q) {
  if (p.var_count_ != q.var_count_) {
    throw PolynomialError("variable count mismatch in multiplication");
  }
  Polynomial r(p.var_count_);
  for (const auto& [a, ca] : p.terms_) {
    for (const auto& [b, cb] : q.terms_) r.add_term(a + b, ca * cb);
  }
  return r;
}

Polynomial operator+(Polynomial p, double c) {
  p.add_term(MultiIndex(p.var_count_), c);
  return p;
}

Polynomial Polynomial::pow(int exponent) const {
  if (exponent < 0) throw PolynomialError("negative polynomial power");
  Polynomial result(var_count_, 1.0);
  Polynomial base(*this);
  while (exponent > 0) {
    if (exponent & 1) result = result * base;
    exponent >>= 1;
    if (exponent > 0) base = base * base;
  }
  return result;
}

double Polynomial::evaluate(const std::vector<double>& point) const {
  if (static_cast<int>(point.size()) != var_count_) {
    throw PolynomialError("evaluation point has wrong dimension");
  }
  double sum = 0.0;
  for (const auto& [alpha, c] : terms_) {
    double term = c;
    for (int k = 0; k < var_count_; ++k) {
      for (int e = 0; e < alpha[k]; ++e) term *= point[k];
    }
    sum += term;
  }
  return sum;
}

Polynomial Polynomial::compose(const std::vector<Polynomial>& subs) const {
  if (static_cast<int>(subs.size()) != var_count_) {
    throw PolynomialError("composition needs one substitute per variable");
  }
  if (subs.empty()) return *this;
  const int k = subs.front().var_count();
  for (const auto& s : subs) {
    if (s.var_count() != k) {
      throw PolynomialError("substitutes have inconsistent variable counts");
    }
  }
  // Cache powers of each substitute; the same powers recur across terms.
  std::vector<std::vector<Polynomial>> powers(var_count_);
  for (int v = 0; v < var_count_; ++v) powers[v].emplace_back(k, 1.0);
  auto power = [&](int v, int e) -> const Polynomial& {
    while (static_cast<int>(powers[v].size()) <= e) {
      powers[v].push_back(powers[v].back() * subs[v]);
    }
    return powers[v][e];
  };
  Polynomial result(k);
  for (const auto& [alpha, c] : terms_) {
    Polynomial term(k, c);
    for (int v = 0; v < var_count_; ++v) {
      if (alpha[v] > 0) term = term * power(v, alpha[v]);
    }
    result += term;
  }
  return result;
}

Polynomial Polynomial::lift(int new_var_count, int offset) const {
  if (offset < 0 || offset + var_count_ > new_var_count) {
    throw PolynomialError("lift target too small");
  }
  Polynomial r(new_var_count);
  for (const auto& [alpha, c] : terms_) {
    std::vector<int> e(new_var_count, 0);
    for (int k = 0; k < var_count_; ++k) e[offset + k] = alpha[k];
    r.add_term(MultiIndex(std::move(e)), c);
  }
  return r;
}

Polynomial Polynomial::pruned(double tol) const {
  Polynomial r(var_count_);
  for (const auto& [alpha, c] : terms_) {
    if (std::abs(c) > tol) r.add_term(alpha, c);
  }
  return r;
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

namespace {

std::vector<std::string> default_names(int n) {
  std::vector<std::string> names;
  for (int k = 0; k < n; ++k) names.push_back("x" + std::to_string(k + 1));
  return names;
}

std::string monomial_text(const MultiIndex& alpha,
                          const std::vector<std::string>& names) {
  std::string out;
  for (int k = 0; k < alpha.size(); ++k) {
    if (alpha[k] == 0) continue;
    if (!out.empty()) out += '*';
    out += names[k];
    if (alpha[k] > 1) out += '^' + std::to_string(alpha[k]);
  }
  return out;
}

}  // namespace

std::string Polynomial::to_string(const std::vector<std::string>& names) const {
  const auto& vars = names.empty() ? default_names(var_count_) : names;
  if (static_cast<int>(vars.size()) != var_count_) {
    throw PolynomialError("name list does not match variable count");
  }
  if (terms_.empty()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [alpha, c] : terms_) {
    const double mag = std::abs(c);
    if (first) {
      if (c < 0) out += '-';
    } else {
      out += c < 0 ? " - " : " + ";
    }
    first = false;
    const std::string mono = monomial_text(alpha, vars);
    if (mono.empty()) {
      out += format_double(mag);
    } else if (mag == 1.0) {
      out += mono;
    } else {
      out += format_double(mag) + "*" + mono;
    }
  }
  return out;
}

namespace {

class Parser {
 public:
  Parser(const std::string& text, int n, const std::vector<std::string>& names)
      : text_(text), n_(n), names_(names) {}

  Polynomial parse() {
    Polynomial p = expression();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected character");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw PolynomialError("polynomial parse error at column " +
                          std::to_string(pos_ + 1) + ": " + what + " in \"" +
                          text_ + "\"");
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Polynomial expression() {
    Polynomial acc(n_);
    bool negate = false;
    if (accept('-')) {
      negate = true;
    } else {
      accept('+');
    }
    Polynomial t = term();
    acc += negate ? -t : t;
    while (true) {
      if (accept('+')) {
        acc += term();
      } else if (accept('-')) {
        acc -= term();
      } else {
        break;
      }
    }
    return acc;
  }

  Polynomial term() {
    Polynomial p = factor();
    while (accept('*')) p = p * factor();
    return p;
  }

  Polynomial factor() {
    Polynomial base = primary();
    if (accept('^')) {
      skip_space();
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      }
      if (start == pos_) fail("expected integer exponent");
      base = base.pow(std::stoi(text_.substr(start, pos_ - start)));
    }
    return base;
  }

  Polynomial primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    if (accept('(')) {
      Polynomial p = expression();
      if (!accept(')')) fail("expected ')'");
      return p;
    }
    if (accept('-')) return -factor();
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(text_.data() + pos_,
                                       text_.data() + text_.size(), value);
      if (ec != std::errc()) fail("bad number");
      pos_ = ptr - text_.data();
      return Polynomial(n_, value);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
      const std::string name = text_.substr(start, pos_ - start);
      auto it = std::find(names_.begin(), names_.end(), name);
      if (it == names_.end()) {
        pos_ = start;
        fail("unknown variable '" + name + "'");
      }
      return Polynomial::variable(n_, static_cast<int>(it - names_.begin()));
    }
    fail("unexpected character");
  }

  const std::string& text_;
  int n_;
  const std::vector<std::string>& names_;
  std::size_t pos_ = 0;
};

}  // namespace

Polynomial Polynomial::parse(const std::string& text, int var_count,
                             const std::vector<std::string>& names) {
  const auto vars = names.empty() ? default_names(var_count) : names;
  if (static_cast<int>(vars.size()) != var_count) {
    throw PolynomialError("name list does not match variable count");
  }
  return Parser(text, var_count, vars).parse();
}

Polynomial poly_arith(const Polynomial& p, const Polynomial& q, ArithOp op) {
  switch (op) {
    case ArithOp::kAdd:
      return p + q;
    case ArithOp::kSub:
      return p - q;
    case ArithOp::kMul:
      return p * q;
  }
  throw PolynomialError("unknown arithmetic op");
}

}  // namespace occsynth
