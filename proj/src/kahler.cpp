#include "canonlift/kahler.hpp"

#include <cmath>
#include <numbers>

namespace canonlift {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::FubiniStudy: return "fs";
    case ModelKind::FlatTorus: return "flat";
    case ModelKind::ComplexHyperbolic: return "hyperbolic";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "fs" || name == "fubini-study" || name == "fubini_study" || name == "cpn")
    return ModelKind::FubiniStudy;
  if (name == "flat" || name == "torus" || name == "flat-torus" || name == "flat_torus")
    return ModelKind::FlatTorus;
  if (name == "hyperbolic" || name == "ball" || name == "complex-hyperbolic" ||
      name == "complex_hyperbolic")
    return ModelKind::ComplexHyperbolic;
  throw ConfigError("unknown model '" + name + "' (expected fs, flat or hyperbolic)");
}

KahlerModel::KahlerModel(ModelKind kind, int n, double scale) : kind_(kind), n_(n), scale_(scale) {
  if (n < 1) throw DimensionError("model dimension must be at least 1");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("model scale must be positive");
}

double KahlerModel::declared_c() const {
  switch (kind_) {
    case ModelKind::FubiniStudy: return (n_ + 1) / scale_;
    case ModelKind::FlatTorus: return 0.0;
    case ModelKind::ComplexHyperbolic: return -(n_ + 1) / scale_;
  }
  return 0.0;
}

std::string KahlerModel::name() const { return to_string(kind_) + "(" + std::to_string(n_) + ")"; }

bool KahlerModel::contains(std::span<const double> p) const {
  if (static_cast<int>(p.size()) != real_dim()) return false;
  double s = 0.0;
  for (double v : p) {
    if (!std::isfinite(v)) return false;
    s += v * v;
  }
  return kind_ != ModelKind::ComplexHyperbolic || s < 1.0;
}

void KahlerModel::require_contains(std::span<const double> p) const {
  if (static_cast<int>(p.size()) != real_dim())
    throw DimensionError(name() + ": point has wrong dimension");
  if (!contains(p)) throw DomainError(name() + ": point outside the chart domain");
}

double KahlerModel::sampling_radius() const {
  switch (kind_) {
    case ModelKind::FubiniStudy: return 1.5;
    case ModelKind::FlatTorus: return std::numbers::pi;
    case ModelKind::ComplexHyperbolic: return 0.8;
  }
  return 1.0;
}

ChartPoint KahlerModel::sample_point(std::mt19937_64& rng) const {
  const double R = sampling_radius();
  std::uniform_real_distribution<double> u(-R, R);
  std::vector<double> p(real_dim());
  for (;;) {
    double s = 0.0;
    for (double& v : p) {
      v = u(rng);
      s += v * v;
    }
    // keep hyperbolic samples away from the boundary sphere
    if (kind_ != ModelKind::ComplexHyperbolic || s < 0.95 * 0.95) return ChartPoint(p);
  }
}

Jet KahlerModel::potential(std::span<const Jet> x) const {
  if (static_cast<int>(x.size()) != real_dim())
    throw DimensionError(name() + ": potential evaluated with wrong dimension");
  Jet s(0.0);
  for (const Jet& v : x) s += v * v;
  switch (kind_) {
    case ModelKind::FubiniStudy: return log(1.0 + s) * scale_;
    case ModelKind::FlatTorus: return s * scale_;
    case ModelKind::ComplexHyperbolic:
      if (!(s.value() < 1.0)) throw DomainError(name() + ": point outside the unit ball");
      return -log(1.0 - s) * scale_;
  }
  return s;
}

JetMatrix metric_jets(const KahlerModel& model, std::span<const Jet> x) {
  const int n = model.n();
  const Jet K = model.potential(x);
  std::vector<Jet> first;
  first.reserve(2 * n);
  for (int i = 0; i < 2 * n; ++i) first.push_back(K.derivative(i));
  auto hess = [&](int a, int b) { return first[a].derivative(b); };
  JetMatrix g(2 * n, 2 * n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const int xj = 2 * j, yj = 2 * j + 1, xk = 2 * k, yk = 2 * k + 1;
      // g_{jk} = A + iB
      const Jet A = (hess(xj, xk) + hess(yj, yk)) * 0.25;
      const Jet B = (hess(xj, yk) - hess(yj, xk)) * 0.25;
      g(xj, xk) = A * 2.0;
      g(yj, yk) = A * 2.0;
      g(xj, yk) = B * 2.0;
      g(yj, xk) = B * -2.0;
    }
  return g;
}

Jet log_det_metric(const KahlerModel& model, std::span<const Jet> x) {
  return log(determinant(metric_jets(model, x)));
}

JetForm kahler_form_jets(const KahlerModel& model, std::span<const Jet> x) {
  return i_ddbar(model.potential(x), model.real_dim());
}

JetForm ricci_form_jets(const KahlerModel& model, std::span<const Jet> x) {
  // det g0 = 4^n |det g_{jk}|^2
  return i_ddbar(log_det_metric(model, x), model.real_dim()).scaled(-0.5);
}

FormField kahler_form_field(const KahlerModel& model) {
  return FormField{model.real_dim(), 2, 2,
                   [model](std::span<const Jet> x) { return kahler_form_jets(model, x); }};
}

FormField ricci_form_field(const KahlerModel& model) {
  return FormField{model.real_dim(), 2, 4,
                   [model](std::span<const Jet> x) { return ricci_form_jets(model, x); }};
}

MetricAt metric_at(const KahlerModel& model, const ChartPoint& p) {
  model.require_contains(p.coords());
  MetricAt m;
  m.g0 = values(metric_jets(model, seed(p.coords(), 2)));
  m.J = standard_complex_structure(model.real_dim());
  require_positive_definite(m.g0, 1e-10);
  return m;
}

Eigen::MatrixXcd hermitian_metric_at(const KahlerModel& model, const ChartPoint& p) {
  const auto m = metric_at(model, p);
  const int n = model.n();
  Eigen::MatrixXcd G(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      G(j, k) = Complex(m.g0(2 * j, 2 * k), m.g0(2 * j, 2 * k + 1)) * 0.5;
  return G;
}

AlternatingForm kahler_form_at(const KahlerModel& model, const ChartPoint& p) {
  model.require_contains(p.coords());
  return evaluate(kahler_form_field(model), p);
}

AlternatingForm ricci_form_at(const KahlerModel& model, const ChartPoint& p) {
  model.require_contains(p.coords());
  return evaluate(ricci_form_field(model), p);
}

double compatibility_residual(const KahlerModel& model, const ChartPoint& p,
                              const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const auto m = metric_at(model, p);
  const auto w = kahler_form_at(model, p);
  Eigen::MatrixXd xy(model.real_dim(), 2);
  xy.col(0) = x;
  xy.col(1) = m.J * y;
  return std::abs(Complex(x.dot(m.g0 * y)) - evaluate(w, xy));
}

double metric_j_invariance_residual(const MetricAt& m) {
  return (m.J.transpose() * m.g0 * m.J - m.g0).cwiseAbs().maxCoeff();
}

double j_invariance_residual(const AlternatingForm& omega, const Eigen::MatrixXd& J) {
  return max_abs(pullback(omega, J) - omega);
}

EinsteinFit einstein_constant(const KahlerModel& model, int samples, std::uint64_t seed) {
  if (samples < 1) throw DomainError("einstein_constant needs at least one sample");
  std::mt19937_64 rng(seed);
  std::vector<AlternatingForm> rho, w;
  double num = 0.0, den = 0.0;
  for (int s = 0; s < samples; ++s) {
    const ChartPoint p = model.sample_point(rng);
    rho.push_back(ricci_form_at(model, p));
    w.push_back(kahler_form_at(model, p));
    for (int i = 0; i < w.back().size(); ++i) {
      num += std::real(rho.back()[i] * std::conj(w.back()[i]));
      den += std::norm(w.back()[i]);
    }
  }
  EinsteinFit fit;
  fit.samples = samples;
  fit.c = den > 0.0 ? num / den : 0.0;
  for (int s = 0; s < samples; ++s)
    fit.max_deviation = std::max(fit.max_deviation, max_abs(rho[s] - w[s].scaled(fit.c)));
  return fit;
}

namespace {

KahlerModel certified(KahlerModel model) {
  const auto fit = einstein_constant(model, 6, 0x5eedULL);
  const double tol = 1e-6 * (1.0 + std::abs(model.declared_c()));
  if (std::abs(fit.c - model.declared_c()) > tol || fit.max_deviation > tol)
    throw CertificationError(model.name() + ": measured Einstein constant " +
                             std::to_string(fit.c) + " does not match the declared " +
                             std::to_string(model.declared_c()));
  return model;
}

}  // namespace

KahlerModel make_model(ModelKind kind, int n, double scale) {
  return certified(KahlerModel(kind, n, scale));
}

KahlerModel fubini_study(int n, double scale) { return make_model(ModelKind::FubiniStudy, n, scale); }
KahlerModel flat_torus(int n, double scale) { return make_model(ModelKind::FlatTorus, n, scale); }
KahlerModel complex_hyperbolic(int n, double scale) {
  return make_model(ModelKind::ComplexHyperbolic, n, scale);
}

}  // namespace canonlift
