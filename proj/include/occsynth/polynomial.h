#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace occsynth {

/// Exponent vector of a monomial x^alpha. Ordered graded-lexicographically:
/// lower total degree first; within one degree, the exponent vector that is
/// lexicographically larger comes first, so the degree-1 block reads
/// x1, x2, ..., xn.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(int var_count) : exponents_(var_count, 0) {}
  explicit MultiIndex(std::vector<int> exponents);

  /// The unit index e_k in `var_count` variables.
  static MultiIndex unit(int var_count, int k);

  int size() const { return static_cast<int>(exponents_.size()); }
  int degree() const { return degree_; }
  int operator[](int k) const { return exponents_[k]; }
  const std::vector<int>& exponents() const { return exponents_; }

  MultiIndex operator+(const MultiIndex& other) const;

  /// Concatenation: (alpha, beta) over size() + other.size() variables.
  MultiIndex concat(const MultiIndex& other) const;

  bool operator==(const MultiIndex& other) const {
    return exponents_ == other.exponents_;
  }
  std::strong_ordering operator<=>(const MultiIndex& other) const;

 private:
  std::vector<int> exponents_;
  int degree_ = 0;
};

std::uint64_t binomial(int n, int k);

/// All multi-indices in n variables with total degree <= d, in graded-lex
/// order. Length is C(n + d, d).
std::vector<MultiIndex> enumerate_monomials(int n, int d);

/// Position of alpha inside enumerate_monomials(alpha.size(), d) for any
/// d >= |alpha|. Computed combinatorially, no table lookups.
int monomial_rank(const MultiIndex& alpha);

/// Number of monomials with |alpha| <= d in n variables.
int monomial_count(int n, int d);

class PolynomialError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sparse multivariate polynomial with double coefficients. Stored terms
/// never carry a zero coefficient.
class Polynomial {
 public:
  using TermMap = std::map<MultiIndex, double>;

  Polynomial() = default;
  explicit Polynomial(int var_count) : var_count_(var_count) {}
  Polynomial(int var_count, double constant);
  Polynomial(int var_count, TermMap terms);

  static Polynomial variable(int var_count, int k);
  static Polynomial monomial(const MultiIndex& alpha, double coefficient = 1.0);

  int var_count() const { return var_count_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  /// Zero polynomial has degree 0.
  int degree() const;
  double coefficient(const MultiIndex& alpha) const;

  Polynomial operator-() const;
  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(double scalar);

  friend Polynomial operator+(Polynomial p, const Polynomial& q) { return p += q; }
  friend Polynomial operator-(Polynomial p, const Polynomial& q) { return p -= q; }
  friend Polynomial operator*(const Polynomial& p, const Polynomial& q);
  friend Polynomial operator*(Polynomial p, double s) { return p *= s; }
  friend Polynomial operator*(double s, Polynomial p) { return p *= s; }
  friend Polynomial operator+(Polynomial p, double c);
  friend Polynomial operator-(Polynomial p, double c) { return std::move(p) + (-c); }

  bool operator==(const Polynomial& other) const = default;

  Polynomial pow(int exponent) const;

  double evaluate(const std::vector<double>& point) const;

  /// p(subs_1, ..., subs_n); every substitute must share one variable count.
  Polynomial compose(const std::vector<Polynomial>& subs) const;

  /// Re-embeds p into `new_var_count` variables, sending variable k to
  /// variable offset + k.
  Polynomial lift(int new_var_count, int offset = 0) const;

  /// Drops terms with |coefficient| <= tol.
  Polynomial pruned(double tol) const;

  /// "c0 + c1*x1^a*x2^b + ..." using x1..xn unless names are given.
  std::string to_string(const std::vector<std::string>& names = {}) const;

  /// Parses + - * ^ with parentheses, decimal/scientific literals and the
  /// variable names x1..xn (or the provided names).
  static Polynomial parse(const std::string& text, int var_count,
                          const std::vector<std::string>& names = {});

 private:
  void add_term(const MultiIndex& alpha, double c);

  int var_count_ = 0;
  TermMap terms_;
};

enum class ArithOp { kAdd, kSub, kMul };
Polynomial poly_arith(const Polynomial& p, const Polynomial& q, ArithOp op);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

}  // namespace occsynth
