#include "canonlift/forms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

namespace canonlift {

ChartPoint::ChartPoint(std::vector<double> coords) : coords_(std::move(coords)) {
  for (double c : coords_)
    if (!std::isfinite(c)) throw DomainError("chart point with non-finite coordinate");
}

namespace {

struct IndexCache {
  std::mutex mutex;
  std::map<std::pair<int, int>, std::unique_ptr<std::vector<std::vector<int>>>> sets;
  std::map<std::pair<int, int>, std::unique_ptr<std::map<std::vector<int>, int>>> ranks;
  std::map<std::tuple<int, int, int>, std::unique_ptr<std::vector<WedgeEntry>>> wedges;
};

IndexCache& index_cache() {
  static IndexCache c;
  return c;
}

void enumerate_sets(int dim, int degree, int start, std::vector<int>& cur,
                    std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == degree) {
    out.push_back(cur);
    return;
  }
  for (int i = start; i < dim; ++i) {
    cur.push_back(i);
    enumerate_sets(dim, degree, i + 1, cur, out);
    cur.pop_back();
  }
}

const std::vector<std::vector<int>>& sets_locked(IndexCache& c, int dim, int degree) {
  auto key = std::make_pair(dim, degree);
  auto it = c.sets.find(key);
  if (it != c.sets.end()) return *it->second;
  auto sets = std::make_unique<std::vector<std::vector<int>>>();
  auto ranks = std::make_unique<std::map<std::vector<int>, int>>();
  if (degree >= 0 && degree <= dim) {
    std::vector<int> cur;
    enumerate_sets(dim, degree, 0, cur, *sets);
  }
  for (std::size_t i = 0; i < sets->size(); ++i) ranks->emplace((*sets)[i], static_cast<int>(i));
  const auto& ref = *sets;
  c.sets.emplace(key, std::move(sets));
  c.ranks.emplace(key, std::move(ranks));
  return ref;
}

}  // namespace

const std::vector<std::vector<int>>& index_sets(int dim, int degree) {
  auto& c = index_cache();
  std::lock_guard<std::mutex> lock(c.mutex);
  return sets_locked(c, dim, degree);
}

int index_set_rank(int dim, std::span<const int> sorted) {
  auto& c = index_cache();
  std::lock_guard<std::mutex> lock(c.mutex);
  const int degree = static_cast<int>(sorted.size());
  sets_locked(c, dim, degree);
  const auto& ranks = *c.ranks.at(std::make_pair(dim, degree));
  auto it = ranks.find(std::vector<int>(sorted.begin(), sorted.end()));
  return it == ranks.end() ? -1 : it->second;
}

const std::vector<WedgeEntry>& wedge_table(int dim, int p, int q) {
  auto& c = index_cache();
  std::lock_guard<std::mutex> lock(c.mutex);
  auto key = std::make_tuple(dim, p, q);
  auto it = c.wedges.find(key);
  if (it != c.wedges.end()) return *it->second;
  const auto& lhs = sets_locked(c, dim, p);
  const auto& rhs = sets_locked(c, dim, q);
  sets_locked(c, dim, p + q);
  const auto& out_rank = *c.ranks.at(std::make_pair(dim, p + q));
  auto table = std::make_unique<std::vector<WedgeEntry>>();
  for (std::size_t a = 0; a < lhs.size(); ++a) {
    for (std::size_t b = 0; b < rhs.size(); ++b) {
      const auto& I = lhs[a];
      const auto& J = rhs[b];
      bool disjoint = true;
      int inversions = 0;
      for (int i : I)
        for (int j : J) {
          if (i == j) disjoint = false;
          if (i > j) ++inversions;
        }
      if (!disjoint) continue;
      std::vector<int> merged(I);
      merged.insert(merged.end(), J.begin(), J.end());
      std::sort(merged.begin(), merged.end());
      table->push_back({static_cast<int>(a), static_cast<int>(b), out_rank.at(merged),
                        inversions % 2 == 0 ? 1.0 : -1.0});
    }
  }
  const auto& ref = *table;
  c.wedges.emplace(key, std::move(table));
  return ref;
}

Jet determinant(const JetMatrix& m) {
  if (m.rows != m.cols) throw DimensionError("determinant of a non-square matrix");
  JetMatrix a = m;
  const int n = a.rows;
  Jet det(1.0);
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a(r, col).value()) > std::abs(a(pivot, col).value())) pivot = r;
    if (a(pivot, col).value() == 0.0) throw LinearAlgebraError("singular jet matrix");
    if (pivot != col) {
      for (int j = 0; j < n; ++j) std::swap(a(pivot, j), a(col, j));
      det = -det;
    }
    det = det * a(col, col);
    const Jet inv = Jet::reciprocal(a(col, col));
    for (int r = col + 1; r < n; ++r) {
      if (a(r, col).is_constant() && a(r, col).value() == 0.0) continue;
      const Jet factor = a(r, col) * inv;
      for (int j = col + 1; j < n; ++j) a(r, j) -= factor * a(col, j);
    }
  }
  return det;
}

Eigen::MatrixXd values(const JetMatrix& m) {
  Eigen::MatrixXd out(m.rows, m.cols);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) out(i, j) = m(i, j).value();
  return out;
}

AlternatingForm value(const JetForm& f) {
  AlternatingForm out(f.dim(), f.degree());
  for (int i = 0; i < f.size(); ++i) out[i] = f[i].value();
  return out;
}

JetForm constant_jet_form(const AlternatingForm& f) {
  JetForm out(f.dim(), f.degree());
  for (int i = 0; i < f.size(); ++i) out[i] = CJet(f[i]);
  return out;
}

JetForm d(const JetForm& f) {
  JetForm out(f.dim(), f.degree() + 1);
  if (out.size() == 0) return out;
  for (const auto& e : wedge_table(f.dim(), 1, f.degree())) {
    const CJet& coeff = f[e.rhs];
    if (coeff.is_constant()) continue;
    out[e.out] += coeff.derivative(e.lhs) * e.sign;
  }
  return out;
}

JetForm conj(const JetForm& f) {
  JetForm out(f.dim(), f.degree());
  for (int i = 0; i < f.size(); ++i) out[i] = conj(f[i]);
  return out;
}

AlternatingForm conj(const AlternatingForm& f) {
  AlternatingForm out(f.dim(), f.degree());
  for (int i = 0; i < f.size(); ++i) out[i] = std::conj(f[i]);
  return out;
}

Complex evaluate(const AlternatingForm& omega, const Eigen::MatrixXd& vectors) {
  if (vectors.rows() != omega.dim() || vectors.cols() != omega.degree())
    throw DimensionError("evaluate: need degree-many vectors of the ambient dimension");
  const int k = omega.degree();
  if (k == 0) return omega.size() ? omega[0] : Complex(0.0);
  const auto& sets = index_sets(omega.dim(), k);
  Complex total(0.0);
  Eigen::MatrixXd sub(k, k);
  for (std::size_t s = 0; s < sets.size(); ++s) {
    if (omega[static_cast<int>(s)] == Complex(0.0)) continue;
    for (int r = 0; r < k; ++r) sub.row(r) = vectors.row(sets[s][r]);
    total += omega[static_cast<int>(s)] * sub.determinant();
  }
  return total;
}

double max_abs(const AlternatingForm& omega) {
  double m = 0.0;
  for (const auto& c : omega.coefficients()) m = std::max(m, std::abs(c));
  return m;
}

double max_abs(std::span<const AlternatingForm> forms) {
  double m = 0.0;
  for (const auto& f : forms) m = std::max(m, max_abs(f));
  return m;
}

AlternatingForm pullback(const AlternatingForm& omega, const Eigen::MatrixXd& jacobian) {
  if (jacobian.rows() != omega.dim()) throw DimensionError("pullback: Jacobian rows");
  const int dim = static_cast<int>(jacobian.cols());
  const int k = omega.degree();
  AlternatingForm out(dim, k);
  const auto& target = index_sets(dim, k);
  const auto& source = index_sets(omega.dim(), k);
  for (std::size_t t = 0; t < target.size(); ++t) {
    Complex acc(0.0);
    for (std::size_t s = 0; s < source.size(); ++s) {
      const Complex w = omega[static_cast<int>(s)];
      if (w == Complex(0.0)) continue;
      const auto& J = source[s];
      const auto& I = target[t];
      acc += w * minor_determinant<double>(k, [&](int i, int j) { return jacobian(J[i], I[j]); });
    }
    out[static_cast<int>(t)] = acc;
  }
  return out;
}

JetForm pullback(const JetForm& omega, const JetMatrix& jacobian) {
  if (jacobian.rows != omega.dim()) throw DimensionError("pullback: Jacobian rows");
  const int dim = jacobian.cols;
  const int k = omega.degree();
  JetForm out(dim, k);
  const auto& target = index_sets(dim, k);
  const auto& source = index_sets(omega.dim(), k);
  for (std::size_t t = 0; t < target.size(); ++t) {
    CJet acc(0.0);
    for (std::size_t s = 0; s < source.size(); ++s) {
      const CJet& w = omega[static_cast<int>(s)];
      if (w.is_constant() && w.value() == Complex(0.0)) continue;
      const auto& J = source[s];
      const auto& I = target[t];
      acc += w * minor_determinant<Jet>(k, [&](int i, int j) { return jacobian(J[i], I[j]); });
    }
    out[static_cast<int>(t)] = acc;
  }
  return out;
}

void require_positive_definite(const Eigen::MatrixXd& g, double min_eigenvalue) {
  if (g.rows() != g.cols()) throw DimensionError("metric must be square");
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + g.cwiseAbs().maxCoeff()))
    throw LinearAlgebraError("metric is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > min_eigenvalue))
    throw LinearAlgebraError("metric is not positive definite");
}

AlternatingForm metric_dual(const Eigen::VectorXd& v, const Eigen::MatrixXd& g) {
  require_positive_definite(g);
  if (v.size() != g.rows()) throw DimensionError("metric_dual: vector length");
  const Eigen::VectorXd a = g * v;
  AlternatingForm out(static_cast<int>(v.size()), 1);
  for (int i = 0; i < a.size(); ++i) out[i] = a(i);
  return out;
}

Eigen::VectorXd metric_sharp(const AlternatingForm& alpha, const Eigen::MatrixXd& g) {
  require_positive_definite(g);
  if (alpha.degree() != 1 || alpha.dim() != g.rows()) throw DimensionError("metric_sharp");
  Eigen::VectorXd a(alpha.dim());
  for (int i = 0; i < alpha.dim(); ++i) a(i) = alpha[i].real();
  return g.llt().solve(a);
}

Complex form_inner(const AlternatingForm& a, const AlternatingForm& b, const Eigen::MatrixXd& g) {
  if (a.dim() != b.dim() || a.degree() != b.degree() || a.dim() != g.rows())
    throw DimensionError("form_inner: shape mismatch");
  require_positive_definite(g);
  const Eigen::MatrixXd ginv = g.inverse();
  const int k = a.degree();
  const auto& sets = index_sets(a.dim(), k);
  Complex total(0.0);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (a[static_cast<int>(i)] == Complex(0.0)) continue;
    for (std::size_t j = 0; j < sets.size(); ++j) {
      if (b[static_cast<int>(j)] == Complex(0.0)) continue;
      const auto& I = sets[i];
      const auto& J = sets[j];
      const double minor =
          minor_determinant<double>(k, [&](int r, int c) { return ginv(I[r], J[c]); });
      total += a[static_cast<int>(i)] * std::conj(b[static_cast<int>(j)]) * minor;
    }
  }
  return total;
}

double form_norm(const AlternatingForm& omega, const Eigen::MatrixXd& g) {
  return std::sqrt(std::max(0.0, form_inner(omega, omega, g).real()));
}

std::vector<double> SmoothMap::operator()(std::span<const double> p) const {
  std::vector<Jet> x;
  for (double v : p) x.emplace_back(v);
  return values(eval(x));
}

Eigen::MatrixXd SmoothMap::jacobian(std::span<const double> p) const {
  if (static_cast<int>(p.size()) != domain_dim) throw DimensionError("SmoothMap: point dimension");
  const auto y = eval(seed(p, 1));
  Eigen::MatrixXd J(codomain_dim, domain_dim);
  for (int a = 0; a < codomain_dim; ++a)
    for (int i = 0; i < domain_dim; ++i) J(a, i) = y[a].gradient(i);
  return J;
}

AlternatingForm evaluate(const FormField& field, const ChartPoint& p) {
  if (p.dim() != field.dim) throw DimensionError("form field evaluated at a point of wrong dimension");
  return value(field.eval(seed(p.coords(), field.depth)));
}

FormField exterior_derivative(const FormField& field) {
  FormField out;
  out.dim = field.dim;
  out.degree = field.degree + 1;
  out.depth = field.depth + 1;
  auto inner = field.eval;
  out.eval = [inner](std::span<const Jet> x) { return d(inner(x)); };
  return out;
}

namespace {

AlternatingForm central_derivative(const FormField& field, const ChartPoint& p, double h) {
  const int m = field.dim;
  std::vector<AlternatingForm> partial;
  partial.reserve(m);
  std::vector<double> q(p.coords().begin(), p.coords().end());
  for (int i = 0; i < m; ++i) {
    const double saved = q[i];
    q[i] = saved + h;
    auto plus = evaluate(field, ChartPoint(q));
    q[i] = saved - h;
    auto minus = evaluate(field, ChartPoint(q));
    q[i] = saved;
    partial.push_back((plus - minus).scaled(1.0 / (2.0 * h)));
  }
  AlternatingForm out(m, field.degree + 1);
  if (out.size() == 0) return out;
  for (const auto& e : wedge_table(m, 1, field.degree)) out[e.out] += partial[e.lhs][e.rhs] * e.sign;
  return out;
}

}  // namespace

AlternatingForm exterior_derivative(const FormField& field, const ChartPoint& p,
                                    const DifferentiationScheme& scheme) {
  if (std::holds_alternative<ForwardJet>(scheme)) return evaluate(exterior_derivative(field), p);
  const auto& cd = std::get<CentralDifference>(scheme);
  if (!(cd.step > 0.0)) throw DomainError("central difference step must be positive");
  auto coarse = central_derivative(field, p, cd.step);
  if (!cd.richardson) return coarse;
  auto fine = central_derivative(field, p, cd.step / 2.0);
  return fine.scaled(4.0 / 3.0) - coarse.scaled(1.0 / 3.0);
}

AlternatingForm pullback(const SmoothMap& phi, const AlternatingForm& omega_at_image,
                         const ChartPoint& p) {
  return pullback(omega_at_image, phi.jacobian(p.coords()));
}

FormField pullback(const SmoothMap& phi, const FormField& field) {
  FormField out;
  out.dim = phi.domain_dim;
  out.degree = field.degree;
  out.depth = std::max(field.depth, 1);
  out.eval = [phi, field](std::span<const Jet> x) {
    const auto y = phi.eval(x);
    const int order = x.empty() ? 0 : x.front().order();
    const auto y0 = values(y);
    const JetForm at_image = field.eval(seed(y0, order));
    JetForm composed(at_image.dim(), at_image.degree());
    for (int i = 0; i < at_image.size(); ++i) composed[i] = compose(at_image[i], std::span<const Jet>(y));
    JetMatrix jac(phi.codomain_dim, phi.domain_dim);
    for (int a = 0; a < phi.codomain_dim; ++a)
      for (int i = 0; i < phi.domain_dim; ++i) jac(a, i) = y[a].derivative(i);
    return pullback(composed, jac);
  };
  return out;
}

Eigen::MatrixXd standard_complex_structure(int real_dim) {
  if (real_dim % 2 != 0) throw DimensionError("complex structure needs even dimension");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(real_dim, real_dim);
  for (int k = 0; k < real_dim / 2; ++k) {
    J(2 * k + 1, 2 * k) = 1.0;   // J d/dx = d/dy
    J(2 * k, 2 * k + 1) = -1.0;  // J d/dy = -d/dx
  }
  return J;
}

JetForm dc(const Jet& phi, int real_dim) {
  JetForm out(real_dim, 1);
  for (int k = 0; k < real_dim / 2; ++k) {
    out[2 * k + 1] = CJet(phi.derivative(2 * k));
    out[2 * k] = CJet(-phi.derivative(2 * k + 1));
  }
  return out;
}

JetForm i_ddbar(const Jet& phi, int real_dim) { return d(dc(phi, real_dim)).scaled(0.5); }

Jet compose_local(const std::function<Jet(std::span<const Jet>)>& f, int depth,
                  std::span<const Jet> args) {
  int order = Jet::kUnbounded;
  for (const Jet& a : args)
    if (!a.is_constant()) order = std::min(order, a.order());
  const auto x0 = values(args);
  if (order == Jet::kUnbounded) return Jet(f(seed(x0, depth)).value());
  return compose(f(seed(x0, order + depth)), args);
}

std::vector<Jet> compose_local_map(
    const std::function<std::vector<Jet>(std::span<const Jet>)>& f, int depth,
    std::span<const Jet> args) {
  int order = Jet::kUnbounded;
  for (const Jet& a : args)
    if (!a.is_constant()) order = std::min(order, a.order());
  const auto x0 = values(args);
  if (order == Jet::kUnbounded) {
    std::vector<Jet> out;
    for (const Jet& y : f(seed(x0, depth))) out.emplace_back(y.value());
    return out;
  }
  std::vector<Jet> out;
  for (const Jet& y : f(seed(x0, order + depth))) out.push_back(compose(y, args));
  return out;
}

AlternatingForm j_derivation(const AlternatingForm& omega, const Eigen::MatrixXd& J) {
  const int m = omega.dim(), k = omega.degree();
  if (J.rows() != m || J.cols() != m) throw DimensionError("j_derivation: J has wrong shape");
  AlternatingForm out(m, k);
  const auto& sets = index_sets(m, k);
  Eigen::MatrixXd vecs(m, k);
  for (std::size_t s = 0; s < sets.size(); ++s) {
    vecs.setZero();
    for (int a = 0; a < k; ++a) vecs(sets[s][a], a) = 1.0;
    Complex total(0.0);
    for (int a = 0; a < k; ++a) {
      Eigen::MatrixXd v = vecs;
      v.col(a) = J.col(sets[s][a]);
      total += evaluate(omega, v);
    }
    out[static_cast<int>(s)] = total;
  }
  return out;
}

double type_residual(const AlternatingForm& omega, const Eigen::MatrixXd& J, int p, int q) {
  if (p + q != omega.degree()) throw DimensionError("type_residual: p + q must equal the degree");
  return max_abs(j_derivation(omega, J) - omega.scaled(Complex(0.0, p - q)));
}

Eigen::MatrixXd unitary_frame(const Eigen::MatrixXd& g, const Eigen::MatrixXd& J) {
  const int m = static_cast<int>(g.rows());
  if (m % 2 != 0 || J.rows() != m) throw DimensionError("unitary_frame: need even dimension");
  Eigen::MatrixXd E(m, m);
  int filled = 0;
  for (int c = 0; c < m && filled < m; ++c) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(m, c);
    for (int pass = 0; pass < 2; ++pass)
      for (int j = 0; j < filled; ++j) v -= E.col(j) * E.col(j).dot(g * v);
    const double len2 = v.dot(g * v);
    if (!(len2 > 1e-20)) continue;
    E.col(filled) = v / std::sqrt(len2);
    E.col(filled + 1) = J * E.col(filled);
    filled += 2;
  }
  if (filled < m) throw LinearAlgebraError("unitary_frame: metric is degenerate");
  return E;
}

Complex holomorphic_coefficient(const AlternatingForm& omega, const Eigen::MatrixXd& frame) {
  const int k = omega.degree();
  Eigen::MatrixXd v(frame.rows(), k);
  for (int a = 0; a < k; ++a) v.col(a) = frame.col(2 * a);
  return evaluate(omega, v);
}

}  // namespace canonlift
