#include "canonlift/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>

#include "canonlift/errors.hpp"

namespace canonlift {

namespace {

void enumerate_degree(int vars, int remaining, int var, std::vector<std::uint8_t>& cur,
                      std::vector<std::vector<std::uint8_t>>& out) {
  if (var == vars - 1) {
    cur[var] = static_cast<std::uint8_t>(remaining);
    out.push_back(cur);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    cur[var] = static_cast<std::uint8_t>(e);
    enumerate_degree(vars, remaining - e, var + 1, cur, out);
  }
  cur[var] = 0;
}

struct TableCache {
  std::mutex mutex;
  std::map<std::pair<int, int>, std::unique_ptr<MonomialTable>> tables;
  std::map<const MonomialTable*, std::map<std::vector<std::uint8_t>, int>> lookup;
};

TableCache& cache() {
  static TableCache c;
  return c;
}

std::unique_ptr<MonomialTable> build_table(int vars, int order,
                                           std::map<std::vector<std::uint8_t>, int>& index) {
  auto t = std::make_unique<MonomialTable>();
  t->vars = vars;
  t->order = order;
  std::vector<std::uint8_t> cur(vars, 0);
  for (int d = 0; d <= order; ++d) {
    if (vars == 0) {
      if (d == 0) t->exponents.emplace_back();
      continue;
    }
    enumerate_degree(vars, d, 0, cur, t->exponents);
  }
  const int size = t->size();
  t->degree.resize(size);
  for (int k = 0; k < size; ++k) {
    int deg = 0;
    for (auto e : t->exponents[k]) deg += e;
    t->degree[k] = deg;
    index.emplace(t->exponents[k], k);
  }

  for (int a = 0; a < size; ++a) {
    for (int b = 0; b < size; ++b) {
      if (t->degree[a] + t->degree[b] > order) continue;
      std::vector<std::uint8_t> sum(vars);
      for (int i = 0; i < vars; ++i) sum[i] = t->exponents[a][i] + t->exponents[b][i];
      t->products.push_back({a, b, index.at(sum)});
    }
  }

  t->shifts.resize(vars);
  for (int i = 0; i < vars; ++i) {
    for (int k = 0; k < size && t->degree[k] < order; ++k) {
      auto e = t->exponents[k];
      const double factor = e[i] + 1.0;
      e[i] += 1;
      t->shifts[i].push_back({index.at(e), factor});
    }
  }

  t->parent.assign(size, -1);
  t->parent_var.assign(size, -1);
  for (int k = 1; k < size; ++k) {
    auto e = t->exponents[k];
    int v = vars - 1;
    while (e[v] == 0) --v;
    e[v] -= 1;
    t->parent[k] = index.at(e);
    t->parent_var[k] = v;
  }
  return t;
}

template <class T>
T power(T base, int k) {
  T r(1.0);
  for (int i = 0; i < k; ++i) r *= base;
  return r;
}

int check_order(int order) {
  if (order < 0) throw std::logic_error("jet order exhausted");
  return order;
}

}  // namespace

int MonomialTable::count(int vars, int order) {
  // C(vars + order, order)
  long long c = 1;
  for (int i = 1; i <= order; ++i) c = c * (vars + i) / i;
  return static_cast<int>(c);
}

const MonomialTable& MonomialTable::get(int vars, int order) {
  auto& c = cache();
  std::lock_guard<std::mutex> lock(c.mutex);
  auto key = std::make_pair(vars, order);
  auto it = c.tables.find(key);
  if (it != c.tables.end()) return *it->second;
  std::map<std::vector<std::uint8_t>, int> index;
  auto table = build_table(vars, order, index);
  const MonomialTable* raw = table.get();
  c.lookup.emplace(raw, std::move(index));
  c.tables.emplace(key, std::move(table));
  return *raw;
}

int MonomialTable::index_of(std::span<const std::uint8_t> exps) const {
  auto& c = cache();
  std::lock_guard<std::mutex> lock(c.mutex);
  const auto& idx = c.lookup.at(this);
  auto it = idx.find(std::vector<std::uint8_t>(exps.begin(), exps.end()));
  return it == idx.end() ? -1 : it->second;
}

template <class T>
BasicJet<T> BasicJet<T>::variable(int vars, int order, int index, T value) {
  if (index < 0 || index >= vars) throw DimensionError("jet variable index out of range");
  std::vector<T> c(MonomialTable::count(vars, check_order(order)), T{});
  c[0] = value;
  if (order >= 1) c[1 + index] = T(1.0);
  return BasicJet(vars, order, std::move(c));
}

template <class T>
BasicJet<T> BasicJet<T>::constant(int vars, int order, T value) {
  std::vector<T> c(MonomialTable::count(vars, check_order(order)), T{});
  c[0] = value;
  return BasicJet(vars, order, std::move(c));
}

template <class T>
T BasicJet<T>::gradient(int var) const {
  if (is_constant() || order_ < 1) return T{};
  return c_[1 + var];
}

template <class T>
BasicJet<T> BasicJet<T>::derivative(int var) const {
  if (is_constant()) return BasicJet(T{});
  if (var < 0 || var >= vars_) throw DimensionError("derivative variable out of range");
  const int out_order = check_order(order_ - 1);
  const auto& table = MonomialTable::get(vars_, order_);
  std::vector<T> out(MonomialTable::count(vars_, out_order));
  const auto& shifts = table.shifts[var];
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = c_[shifts[k].source] * shifts[k].factor;
  return BasicJet(vars_, out_order, std::move(out));
}

template <class T>
BasicJet<T> BasicJet<T>::truncated(int order) const {
  if (is_constant() || order >= order_) return *this;
  std::vector<T> out(c_.begin(), c_.begin() + MonomialTable::count(vars_, check_order(order)));
  return BasicJet(vars_, order, std::move(out));
}

template <class T>
BasicJet<T> BasicJet<T>::operator-() const {
  BasicJet r = *this;
  for (auto& v : r.c_) v = -v;
  return r;
}

template <class T>
BasicJet<T>& BasicJet<T>::operator+=(const BasicJet& o) {
  if (o.is_constant()) {
    c_[0] += o.c_[0];
    return *this;
  }
  if (is_constant()) {
    T v = c_[0];
    *this = o;
    c_[0] += v;
    return *this;
  }
  if (vars_ != o.vars_) throw DimensionError("jets over different variable sets");
  if (o.order_ < order_) *this = truncated(o.order_);
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
  return *this;
}

template <class T>
BasicJet<T>& BasicJet<T>::operator-=(const BasicJet& o) {
  return *this += -o;
}

template <class T>
BasicJet<T>& BasicJet<T>::operator*=(const BasicJet& o) {
  return *this = multiply(*this, o);
}

template <class T>
BasicJet<T>& BasicJet<T>::operator/=(const BasicJet& o) {
  return *this = multiply(*this, reciprocal(o));
}

template <class T>
BasicJet<T> BasicJet<T>::multiply(const BasicJet& a, const BasicJet& b) {
  if (a.is_constant()) {
    BasicJet r = b;
    for (auto& v : r.c_) v *= a.c_[0];
    return r;
  }
  if (b.is_constant()) {
    BasicJet r = a;
    for (auto& v : r.c_) v *= b.c_[0];
    return r;
  }
  if (a.vars_ != b.vars_) throw DimensionError("jets over different variable sets");
  const int order = std::min(a.order_, b.order_);
  const auto& table = MonomialTable::get(a.vars_, order);
  std::vector<T> out(table.size(), T{});
  for (const auto& p : table.products) out[p.out] += a.c_[p.lhs] * b.c_[p.rhs];
  return BasicJet(a.vars_, order, std::move(out));
}

template <class T>
BasicJet<T> BasicJet<T>::apply_series(const BasicJet& a, std::span<const T> taylor) {
  if (a.is_constant() || a.order_ == 0) {
    BasicJet r = a;
    r.c_[0] = taylor[0];
    return r;
  }
  BasicJet delta = a;
  delta.c_[0] = T{};
  const int n = a.order_;
  BasicJet r = constant(a.vars_, n, taylor[n]);
  for (int k = n - 1; k >= 0; --k) {
    r = multiply(r, delta);
    r.c_[0] += taylor[k];
  }
  return r;
}

template <class T>
BasicJet<T> BasicJet<T>::reciprocal(const BasicJet& a) {
  const T a0 = a.value();
  if (a0 == T{}) throw DomainError("reciprocal of a jet with zero value");
  const int n = a.is_constant() ? 0 : a.order_;
  std::vector<T> t(n + 1);
  T inv = T(1.0) / a0;
  T p = inv;
  for (int k = 0; k <= n; ++k) {
    t[k] = (k % 2 == 0 ? p : -p);
    p *= inv;
  }
  return apply_series(a, t);
}

namespace {

int series_length(const Jet& a) { return a.is_constant() ? 0 : a.order(); }

}  // namespace

Jet exp(const Jet& a) {
  const int n = series_length(a);
  std::vector<double> t(n + 1);
  double f = std::exp(a.value());
  for (int k = 0; k <= n; ++k) {
    t[k] = f;
    f /= (k + 1);
  }
  return Jet::apply_series(a, t);
}

CJet exp(const CJet& a) {
  const int n = a.is_constant() ? 0 : a.order();
  std::vector<std::complex<double>> t(n + 1);
  std::complex<double> f = std::exp(a.value());
  for (int k = 0; k <= n; ++k) {
    t[k] = f;
    f /= double(k + 1);
  }
  return CJet::apply_series(a, t);
}

Jet log(const Jet& a) {
  const double a0 = a.value();
  if (!(a0 > 0.0)) throw DomainError("log of a non-positive jet");
  const int n = series_length(a);
  std::vector<double> t(n + 1);
  t[0] = std::log(a0);
  for (int k = 1; k <= n; ++k) t[k] = (k % 2 == 1 ? 1.0 : -1.0) / (k * power(a0, k));
  return Jet::apply_series(a, t);
}

Jet pow(const Jet& a, double exponent) {
  const double a0 = a.value();
  const int n = series_length(a);
  const bool integral = exponent == std::floor(exponent);
  if (a0 < 0.0 && !integral) throw DomainError("fractional power of a negative jet");
  if (a0 == 0.0 && n > 0 && !(integral && exponent >= 0.0))
    throw DomainError("power of a jet with zero value is not differentiable");
  std::vector<double> t(n + 1);
  double binom = 1.0;
  for (int k = 0; k <= n; ++k) {
    t[k] = binom * std::pow(a0, exponent - k);
    binom *= (exponent - k) / (k + 1);
  }
  if (a0 == 0.0) {
    for (int k = 0; k <= n; ++k) t[k] = (exponent == k) ? 1.0 : 0.0;
    if (exponent == 0.0) t[0] = 1.0;
  }
  return Jet::apply_series(a, t);
}

Jet sqrt(const Jet& a) { return pow(a, 0.5); }

Jet sin(const Jet& a) {
  const int n = series_length(a);
  const double s = std::sin(a.value()), c = std::cos(a.value());
  const double cycle[4] = {s, c, -s, -c};
  std::vector<double> t(n + 1);
  double fact = 1.0;
  for (int k = 0; k <= n; ++k) {
    if (k > 0) fact *= k;
    t[k] = cycle[k % 4] / fact;
  }
  return Jet::apply_series(a, t);
}

Jet cos(const Jet& a) {
  const int n = series_length(a);
  const double s = std::sin(a.value()), c = std::cos(a.value());
  const double cycle[4] = {c, -s, -c, s};
  std::vector<double> t(n + 1);
  double fact = 1.0;
  for (int k = 0; k <= n; ++k) {
    if (k > 0) fact *= k;
    t[k] = cycle[k % 4] / fact;
  }
  return Jet::apply_series(a, t);
}

template <class T>
BasicJet<T> BasicJet<T>::from_coefficients(int vars, int order, std::vector<T> coeffs) {
  if (vars == 0) return BasicJet(coeffs.at(0));
  if (static_cast<int>(coeffs.size()) != MonomialTable::count(vars, check_order(order)))
    throw DimensionError("coefficient count does not match jet shape");
  return BasicJet(vars, order, std::move(coeffs));
}

namespace {

template <class F>
Jet map_real(const CJet& a, F f) {
  std::vector<double> c;
  c.reserve(a.coefficients().size());
  for (const auto& v : a.coefficients()) c.push_back(f(v));
  return Jet::from_coefficients(a.vars(), a.order(), std::move(c));
}

}  // namespace

Jet real(const CJet& a) {
  return map_real(a, [](const std::complex<double>& v) { return v.real(); });
}

Jet imag(const CJet& a) {
  return map_real(a, [](const std::complex<double>& v) { return v.imag(); });
}

CJet conj(const CJet& a) {
  std::vector<std::complex<double>> c(a.coefficients().begin(), a.coefficients().end());
  for (auto& v : c) v = std::conj(v);
  return CJet::from_coefficients(a.vars(), a.order(), std::move(c));
}

CJet make_complex(const Jet& re, const Jet& im) {
  return CJet(re) + CJet(im) * CJet(std::complex<double>(0.0, 1.0));
}

template <class T>
BasicJet<T> compose(const BasicJet<T>& f, std::span<const Jet> args) {
  if (f.is_constant()) return f;
  if (static_cast<int>(args.size()) != f.vars())
    throw DimensionError("compose: argument count does not match jet variables");
  int out_vars = 0;
  int out_order = BasicJet<T>::kUnbounded;
  for (const auto& a : args) {
    if (a.is_constant()) continue;
    if (out_vars != 0 && a.vars() != out_vars)
      throw DimensionError("compose: arguments over different variable sets");
    out_vars = a.vars();
    out_order = std::min(out_order, a.order());
  }
  if (out_vars == 0) return BasicJet<T>(f.value());
  const int order = std::min(f.order(), out_order);
  const auto& table = MonomialTable::get(f.vars(), f.order());
  const int terms = MonomialTable::count(f.vars(), order);

  std::vector<Jet> delta;
  delta.reserve(args.size());
  for (const auto& a : args) delta.push_back((a - Jet(a.value())).truncated(order));

  std::vector<Jet> mono;
  mono.reserve(terms);
  mono.push_back(Jet::constant(out_vars, order, 1.0));
  BasicJet<T> result = BasicJet<T>::constant(out_vars, order, f.coefficient(0));
  for (int k = 1; k < terms; ++k) {
    mono.push_back(mono[table.parent[k]] * delta[table.parent_var[k]]);
    const T ck = f.coefficient(k);
    if (ck == T{}) continue;
    result += BasicJet<T>(mono.back()) * BasicJet<T>(ck);
  }
  return result;
}

std::vector<Jet> seed(std::span<const double> point, int order) {
  const int n = static_cast<int>(point.size());
  std::vector<Jet> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(Jet::variable(n, order, i, point[i]));
  return out;
}

std::vector<double> values(std::span<const Jet> jets) {
  std::vector<double> out;
  out.reserve(jets.size());
  for (const auto& j : jets) out.push_back(j.value());
  return out;
}

template class BasicJet<double>;
template class BasicJet<std::complex<double>>;
template Jet compose(const Jet&, std::span<const Jet>);
template CJet compose(const CJet&, std::span<const Jet>);

}  // namespace canonlift
