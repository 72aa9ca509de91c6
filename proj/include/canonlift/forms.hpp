#pragma once

// Point-wise exterior algebra over real chart coordinates with complex
// coefficients, plus form fields whose coefficients are jets.

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "canonlift/errors.hpp"
#include "canonlift/jet.hpp"

namespace canonlift {

using Complex = std::complex<double>;

/// Local coordinates of a point in some chart.
class ChartPoint {
 public:
  ChartPoint() = default;
  explicit ChartPoint(std::vector<double> coords);
  int dim() const { return static_cast<int>(coords_.size()); }
  std::span<const double> coords() const { return coords_; }
  double operator[](int i) const { return coords_[i]; }

 private:
  std::vector<double> coords_;
};

/// Strictly increasing multi-indices of {0..dim-1} of a given size, in
/// lexicographic order.
const std::vector<std::vector<int>>& index_sets(int dim, int degree);
/// Position of a strictly increasing multi-index in index_sets(), or -1.
int index_set_rank(int dim, std::span<const int> sorted);

struct WedgeEntry {
  int lhs, rhs, out;
  double sign;
};
/// Non-vanishing products dx^I ^ dx^J for |I| = p, |J| = q in dimension dim.
const std::vector<WedgeEntry>& wedge_table(int dim, int p, int q);

template <class S>
class Form {
 public:
  Form() : Form(0, 0) {}
  Form(int dim, int degree)
      : dim_(dim), degree_(degree), c_(index_sets(dim, degree).size(), S(0.0)) {}

  static Form scalar(int dim, S value) {
    Form f(dim, 0);
    f.c_[0] = value;
    return f;
  }
  static Form one_form(std::span<const S> components) {
    Form f(static_cast<int>(components.size()), 1);
    for (std::size_t i = 0; i < components.size(); ++i) f.c_[i] = components[i];
    return f;
  }
  /// dx^{i_1} ^ ... ^ dx^{i_k} for indices in any order.
  static Form basis(int dim, std::vector<int> indices);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  int size() const { return static_cast<int>(c_.size()); }
  S& operator[](int i) { return c_[i]; }
  const S& operator[](int i) const { return c_[i]; }
  std::span<const S> coefficients() const { return c_; }
  /// Component on dx^{i_1} ^ ... ^ dx^{i_k}, indices in any order.
  S component(std::vector<int> indices) const;

  Form& operator+=(const Form& o) {
    check_same(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  Form& operator-=(const Form& o) {
    check_same(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Form operator-() const {
    Form r = *this;
    for (auto& v : r.c_) v = -v;
    return r;
  }
  template <class U>
  Form scaled(const U& s) const {
    Form r = *this;
    for (auto& v : r.c_) v = v * s;
    return r;
  }

  friend Form operator+(Form a, const Form& b) { return a += b; }
  friend Form operator-(Form a, const Form& b) { return a -= b; }

 private:
  void check_same(const Form& o) const {
    if (dim_ != o.dim_ || degree_ != o.degree_)
      throw DimensionError("forms of different dimension or degree");
  }

  int dim_;
  int degree_;
  std::vector<S> c_;
};

using AlternatingForm = Form<Complex>;
using JetForm = Form<CJet>;

template <class S>
Form<S> wedge(const Form<S>& a, const Form<S>& b) {
  if (a.dim() != b.dim()) throw DimensionError("wedge: ambient dimensions differ");
  Form<S> out(a.dim(), a.degree() + b.degree());
  if (out.size() == 0) return out;
  for (const auto& e : wedge_table(a.dim(), a.degree(), b.degree())) {
    out[e.out] += a[e.lhs] * b[e.rhs] * e.sign;
  }
  return out;
}

template <class S>
Form<S> Form<S>::basis(int dim, std::vector<int> indices) {
  Form<S> f(dim, static_cast<int>(indices.size()));
  double sign = 1.0;
  for (std::size_t i = 0; i < indices.size(); ++i)
    for (std::size_t j = i + 1; j < indices.size(); ++j) {
      if (indices[i] == indices[j]) return f;
      if (indices[i] > indices[j]) sign = -sign;
    }
  std::sort(indices.begin(), indices.end());
  for (int i : indices)
    if (i < 0 || i >= dim) throw DimensionError("basis index out of range");
  f[index_set_rank(dim, indices)] = S(sign);
  return f;
}

template <class S>
S Form<S>::component(std::vector<int> indices) const {
  if (static_cast<int>(indices.size()) != degree_) throw DimensionError("component arity");
  double sign = 1.0;
  for (std::size_t i = 0; i < indices.size(); ++i)
    for (std::size_t j = i + 1; j < indices.size(); ++j) {
      if (indices[i] == indices[j]) return S(0.0);
      if (indices[i] > indices[j]) sign = -sign;
    }
  std::sort(indices.begin(), indices.end());
  return c_[index_set_rank(dim_, indices)] * sign;
}

/// Small dense matrix over an arbitrary ring (used with Jet entries).
template <class S>
struct Matrix {
  int rows = 0, cols = 0;
  std::vector<S> a;
  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, S(0.0)) {}
  S& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  const S& operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
};
using JetMatrix = Matrix<Jet>;

/// Gaussian elimination with pivoting on the value of each entry.
Jet determinant(const JetMatrix& m);
Eigen::MatrixXd values(const JetMatrix& m);

namespace detail {

template <class S>
S cofactor_determinant(std::vector<S>& m, int k, std::vector<int>& cols, int row) {
  if (row == k) return S(1.0);
  S total(0.0);
  int parity = 0;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const int col = cols[c];
    if (col < 0) continue;
    const S& entry = m[static_cast<std::size_t>(row) * k + col];
    cols[c] = -1;
    S term = entry * cofactor_determinant(m, k, cols, row + 1);
    cols[c] = col;
    if (parity % 2 == 0)
      total += term;
    else
      total -= term;
    ++parity;
  }
  return total;
}

}  // namespace detail

/// Cofactor expansion; fine for the small minors that appear in pullbacks.
template <class S, class Entry>
S minor_determinant(int k, Entry entry) {
  if (k == 0) return S(1.0);
  if (k == 1) return S(entry(0, 0));
  if (k == 2) return S(entry(0, 0)) * S(entry(1, 1)) - S(entry(0, 1)) * S(entry(1, 0));
  std::vector<S> m;
  m.reserve(static_cast<std::size_t>(k) * k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) m.push_back(S(entry(i, j)));
  std::vector<int> cols(k);
  for (int j = 0; j < k; ++j) cols[j] = j;
  return detail::cofactor_determinant(m, k, cols, 0);
}

AlternatingForm value(const JetForm& f);
JetForm constant_jet_form(const AlternatingForm& f);
/// Exterior derivative of a jet-valued form; consumes one jet order.
JetForm d(const JetForm& f);
JetForm conj(const JetForm& f);
AlternatingForm conj(const AlternatingForm& f);

/// omega(v_1, ..., v_k) with the vectors as columns of `vectors`.
Complex evaluate(const AlternatingForm& omega, const Eigen::MatrixXd& vectors);
double max_abs(const AlternatingForm& omega);
double max_abs(std::span<const AlternatingForm> forms);

/// Pullback through a linear map given by its Jacobian (codomain x domain).
AlternatingForm pullback(const AlternatingForm& omega, const Eigen::MatrixXd& jacobian);
JetForm pullback(const JetForm& omega, const JetMatrix& jacobian);

/// The 1-form g(v, .).
AlternatingForm metric_dual(const Eigen::VectorXd& v, const Eigen::MatrixXd& g);
/// Inverse of metric_dual for real 1-forms.
Eigen::VectorXd metric_sharp(const AlternatingForm& alpha, const Eigen::MatrixXd& g);
/// Hermitian inner product induced on k-forms: det of inverse-metric minors.
Complex form_inner(const AlternatingForm& a, const AlternatingForm& b, const Eigen::MatrixXd& g);
double form_norm(const AlternatingForm& omega, const Eigen::MatrixXd& g);
/// Throws LinearAlgebraError unless g is symmetric positive definite.
void require_positive_definite(const Eigen::MatrixXd& g, double min_eigenvalue = 0.0);

/// A differential form as a function of coordinates. `eval` receives the
/// coordinates seeded as independent jet variables at the evaluation point
/// and returns coefficients of order (seed order - depth).
struct FormField {
  int dim = 0;
  int degree = 0;
  int depth = 0;
  std::function<JetForm(std::span<const Jet>)> eval;
};

/// A smooth map between charts; `eval` is an ordinary function of its jet
/// arguments (it must not differentiate them internally), so any jets may
/// be substituted.
struct SmoothMap {
  int domain_dim = 0;
  int codomain_dim = 0;
  std::function<std::vector<Jet>(std::span<const Jet>)> eval;

  std::vector<double> operator()(std::span<const double> p) const;
  Eigen::MatrixXd jacobian(std::span<const double> p) const;
};

/// Evaluates `f`, which differentiates its seeded arguments and consumes
/// `depth` orders, at arbitrary jet arguments: f is expanded at their values
/// and the expansion composed with them.
Jet compose_local(const std::function<Jet(std::span<const Jet>)>& f, int depth,
                  std::span<const Jet> args);
/// Vector-valued compose_local.
std::vector<Jet> compose_local_map(
    const std::function<std::vector<Jet>(std::span<const Jet>)>& f, int depth,
    std::span<const Jet> args);

struct ForwardJet {};
struct CentralDifference {
  double step = 1e-5;
  bool richardson = true;
};
using DifferentiationScheme = std::variant<ForwardJet, CentralDifference>;

AlternatingForm evaluate(const FormField& field, const ChartPoint& p);
FormField exterior_derivative(const FormField& field);
AlternatingForm exterior_derivative(const FormField& field, const ChartPoint& p,
                                    const DifferentiationScheme& scheme = ForwardJet{});
/// Value of phi^* omega at p, with omega given at phi(p). Degrees above the
/// domain dimension give the zero form.
AlternatingForm pullback(const SmoothMap& phi, const AlternatingForm& omega_at_image,
                         const ChartPoint& p);
/// The field x -> phi^*(F)(x).
FormField pullback(const SmoothMap& phi, const FormField& field);

/// Standard complex structure on (x1, y1, ..., xn, yn): J d/dx = d/dy.
Eigen::MatrixXd standard_complex_structure(int real_dim);
/// i d d-bar phi as a real 2-form in coordinates (x1, y1, ...); consumes two
/// jet orders.
JetForm i_ddbar(const Jet& phi, int real_dim);
/// The derivation induced by J on forms, sum over slots of omega(.., J v, ..).
/// It acts on a (p,q)-form as multiplication by i(p - q).
AlternatingForm j_derivation(const AlternatingForm& omega, const Eigen::MatrixXd& J);
/// max |D_J omega - i(p - q) omega|.
double type_residual(const AlternatingForm& omega, const Eigen::MatrixXd& J, int p, int q);
/// g-orthonormal basis e_0, J e_0, e_1, J e_1, ... as columns, built from the
/// coordinate vectors in order. g must be J-invariant.
Eigen::MatrixXd unitary_frame(const Eigen::MatrixXd& g, const Eigen::MatrixXd& J);
/// omega(e_0, e_2, e_4, ...): the coefficient of a (k,0)-form on the wedge of
/// the complex coframe dual to a unitary frame.
Complex holomorphic_coefficient(const AlternatingForm& omega, const Eigen::MatrixXd& frame);

/// d^c phi = sum_k (phi_x dy_k - phi_y dx_k); consumes one jet order.
JetForm dc(const Jet& phi, int real_dim);

}  // namespace canonlift
