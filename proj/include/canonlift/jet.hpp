#pragma once

// Truncated multivariate Taylor polynomials ("jets") for forward-mode
// differentiation to arbitrary order.
//
// A jet in `vars` variables of order N stores the Taylor coefficients
//   f(p + d) = sum_{|a| <= N} c_a d^a
// at an implicit expansion point p. Monomials are numbered in graded order,
// so the coefficients of a lower-order jet are a prefix of those of a
// higher-order one. Jets with zero variables are plain constants and mix
// with jets of any shape.

#include <complex>
#include <cstdint>
#include <limits>
#include <span>
#include <type_traits>
#include <vector>

namespace canonlift {

/// Exponent bookkeeping shared by all jets with the same (vars, order).
struct MonomialTable {
  struct Product {
    int lhs, rhs, out;
  };
  struct Shift {
    int source;
    double factor;
  };

  int vars = 0;
  int order = 0;
  std::vector<std::vector<std::uint8_t>> exponents;
  std::vector<int> degree;
  /// Pairs whose product has total degree <= order.
  std::vector<Product> products;
  /// For each variable: coefficient of monomial k in d/dx_i comes from
  /// monomial `source` scaled by `factor`; covers monomials of degree < order.
  std::vector<std::vector<Shift>> shifts;
  /// For compose(): index of a monomial with one fewer power, and which
  /// variable was removed (-1 for the constant monomial).
  std::vector<int> parent;
  std::vector<int> parent_var;

  int size() const { return static_cast<int>(exponents.size()); }
  int index_of(std::span<const std::uint8_t> exps) const;

  static const MonomialTable& get(int vars, int order);
  static int count(int vars, int order);
};

template <class T>
class BasicJet {
 public:
  using value_type = T;
  static constexpr int kUnbounded = std::numeric_limits<int>::max();

  BasicJet() : c_(1, T{}) {}
  BasicJet(T constant) : c_(1, constant) {}  // NOLINT(implicit)
  BasicJet(double constant)                  // NOLINT(implicit)
    requires(!std::is_same_v<T, double>)
      : c_(1, T(constant)) {}
  template <class U>
    requires(!std::is_same_v<U, T> && std::is_convertible_v<U, T>)
  BasicJet(const BasicJet<U>& other)  // NOLINT(implicit)
      : vars_(other.vars()), order_(other.order()) {
    c_.reserve(other.coefficients().size());
    for (const U& v : other.coefficients()) c_.push_back(T(v));
  }

  static BasicJet variable(int vars, int order, int index, T value);
  static BasicJet constant(int vars, int order, T value);
  /// `coeffs` must hold MonomialTable::count(vars, order) entries.
  static BasicJet from_coefficients(int vars, int order, std::vector<T> coeffs);

  bool is_constant() const { return vars_ == 0; }
  int vars() const { return vars_; }
  int order() const { return order_; }
  const T& value() const { return c_.front(); }
  std::span<const T> coefficients() const { return c_; }
  T coefficient(int monomial) const {
    return monomial < static_cast<int>(c_.size()) ? c_[monomial] : T{};
  }
  /// First partial derivative at the expansion point.
  T gradient(int var) const;

  /// d/dx_var; the result has one order less.
  BasicJet derivative(int var) const;
  BasicJet truncated(int order) const;

  BasicJet operator-() const;
  BasicJet& operator+=(const BasicJet& o);
  BasicJet& operator-=(const BasicJet& o);
  BasicJet& operator*=(const BasicJet& o);
  BasicJet& operator/=(const BasicJet& o);

  friend BasicJet operator+(BasicJet a, const BasicJet& b) { return a += b; }
  friend BasicJet operator-(BasicJet a, const BasicJet& b) { return a -= b; }
  friend BasicJet operator*(const BasicJet& a, const BasicJet& b) {
    return multiply(a, b);
  }
  friend BasicJet operator/(const BasicJet& a, const BasicJet& b) {
    return multiply(a, reciprocal(b));
  }

  static BasicJet multiply(const BasicJet& a, const BasicJet& b);
  static BasicJet reciprocal(const BasicJet& a);
  /// sum_k taylor[k] * (a - a(p))^k, truncated to the order of `a`.
  static BasicJet apply_series(const BasicJet& a, std::span<const T> taylor);

 private:
  BasicJet(int vars, int order, std::vector<T> c)
      : vars_(vars), order_(order), c_(std::move(c)) {}

  int vars_ = 0;
  int order_ = kUnbounded;
  std::vector<T> c_;
};

using Jet = BasicJet<double>;
using CJet = BasicJet<std::complex<double>>;

// Mixed real/complex arithmetic promotes to CJet. Exact-type templates keep
// these out of overload resolution for scalar operands.
template <class A, class B>
concept MixedJets = (std::is_same_v<A, Jet> && std::is_same_v<B, CJet>) ||
                    (std::is_same_v<A, CJet> && std::is_same_v<B, Jet>);

template <class A, class B>
  requires MixedJets<A, B>
CJet operator*(const A& a, const B& b) { return CJet(a) * CJet(b); }
template <class A, class B>
  requires MixedJets<A, B>
CJet operator+(const A& a, const B& b) { return CJet(a) + CJet(b); }
template <class A, class B>
  requires MixedJets<A, B>
CJet operator-(const A& a, const B& b) { return CJet(a) - CJet(b); }

Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sqrt(const Jet& a);
Jet pow(const Jet& a, double exponent);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
CJet exp(const CJet& a);

Jet real(const CJet& a);
Jet imag(const CJet& a);
CJet conj(const CJet& a);
CJet make_complex(const Jet& re, const Jet& im);

/// Substitutes `args` (jets in some other set of variables, whose values are
/// the expansion point of `f`) into the Taylor polynomial of `f`.
template <class T>
BasicJet<T> compose(const BasicJet<T>& f, std::span<const Jet> args);

/// Coordinates of a point seeded as independent variables of the given order.
std::vector<Jet> seed(std::span<const double> point, int order);
std::vector<double> values(std::span<const Jet> jets);

}  // namespace canonlift
