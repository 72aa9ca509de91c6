#include "canonlift/cybundle.hpp"

#include <cmath>
#include <numbers>

namespace canonlift {

namespace {

constexpr double kCertificationTolerance = 1e-8;
constexpr std::uint64_t kCertificationSeed = 0xc0ffeeULL;

/// Base form re-read in total-space coordinates (base coordinates come first).
JetForm embed(const JetForm& f, int total_dim) {
  JetForm out(total_dim, f.degree());
  const auto& sets = index_sets(f.dim(), f.degree());
  for (std::size_t s = 0; s < sets.size(); ++s)
    out[index_set_rank(total_dim, sets[s])] = f[static_cast<int>(s)];
  return out;
}

std::span<const Jet> base_part(const KahlerModel& model, std::span<const Jet> total) {
  if (static_cast<int>(total.size()) != model.real_dim() + 2)
    throw DimensionError(model.name() + ": total-space point has wrong dimension");
  return total.first(model.real_dim());
}

JetForm exact_form(const Jet& f, int dim) {
  JetForm out(dim, 1);
  for (int i = 0; i < dim; ++i) out[i] = CJet(f.derivative(i));
  return out;
}

}  // namespace

ChartPoint TotalSpacePoint::coords() const {
  std::vector<double> c(base.coords().begin(), base.coords().end());
  c.push_back(w.real());
  c.push_back(w.imag());
  return ChartPoint(std::move(c));
}

TotalSpacePoint TotalSpacePoint::from_coords(const ChartPoint& p) {
  if (p.dim() < 4 || p.dim() % 2 != 0) throw DimensionError("total-space point has wrong dimension");
  const auto c = p.coords();
  return {ChartPoint(std::vector<double>(c.begin(), c.end() - 2)), Complex(c[p.dim() - 2], c[p.dim() - 1])};
}

AlternatingForm holomorphic_coframe_wedge(int n, int extra_dims) {
  const int m = 2 * n + extra_dims;
  AlternatingForm out = AlternatingForm::scalar(m, 1.0);
  for (int k = 0; k < n; ++k) {
    AlternatingForm dz(m, 1);
    dz[2 * k] = 1.0;
    dz[2 * k + 1] = Complex(0.0, 1.0);
    out = wedge(out, dz);
  }
  return out;
}

double hermitian_h(const KahlerModel& model, const ChartPoint& p) {
  const double norm = form_norm(holomorphic_coframe_wedge(model.n(), 0), metric_at(model, p).g0);
  return norm * norm;
}

Jet h_jets(const KahlerModel& model, std::span<const Jet> base) {
  return pow(determinant(metric_jets(model, base)), -0.5) * std::pow(2.0, model.n());
}

Jet radius_jets(const KahlerModel& model, std::span<const Jet> total) {
  const auto base = base_part(model, total);
  const Jet& u = total[model.real_dim()];
  const Jet& v = total[model.real_dim() + 1];
  return sqrt((u * u + v * v) * h_jets(model, base));
}

double radius(const KahlerModel& model, const TotalSpacePoint& u) {
  return std::abs(u.w) * std::sqrt(hermitian_h(model, u.base));
}

FormField upsilon0_field(const KahlerModel& model) {
  const int m = model.real_dim() + 2;
  const JetForm sigma = constant_jet_form(holomorphic_coframe_wedge(model.n(), 2));
  return FormField{m, model.n(), 0, [sigma, m](std::span<const Jet> x) {
                     return sigma.scaled(make_complex(x[m - 2], x[m - 1]));
                   }};
}

FormField base_connection_field(const KahlerModel& model) {
  const int d = model.real_dim();
  return FormField{d, 1, 3, [model, d](std::span<const Jet> x) {
                     return dc(log(h_jets(model, x)), d).scaled(-0.5);
                   }};
}

JetForm gamma_jets(const KahlerModel& model, std::span<const Jet> total) {
  const int m = model.real_dim() + 2;
  const auto base = base_part(model, total);
  const Jet& u = total[m - 2];
  const Jet& v = total[m - 1];
  const Jet rho2 = u * u + v * v;
  if (rho2.value() == 0.0) throw DomainError("the angle of w is undefined on the zero section");
  JetForm dpsi(m, 1);
  dpsi[m - 2] = CJet(-v / rho2);
  dpsi[m - 1] = CJet(u / rho2);
  return -dpsi - dc(log(h_jets(model, base)), m).scaled(0.5);
}

FormField gamma_field(const KahlerModel& model) {
  return FormField{model.real_dim() + 2, 1, 3,
                   [model](std::span<const Jet> x) { return gamma_jets(model, x); }};
}

SmoothMap unit_circle_chart(const KahlerModel& model) {
  const int d = model.real_dim();
  SmoothMap phi;
  phi.domain_dim = d + 1;
  phi.codomain_dim = d + 2;
  phi.eval = [model, d](std::span<const Jet> a) {
    const auto x = a.first(d);
    const Jet h = compose_local([&model](std::span<const Jet> b) { return h_jets(model, b); }, 2, x);
    const Jet s = pow(h, -0.5);
    std::vector<Jet> out(x.begin(), x.end());
    out.push_back(s * cos(a[d]));
    out.push_back(s * sin(a[d]));
    return out;
  };
  return phi;
}

ConnectionCertificate certify_connection(const KahlerModel& model, int samples, std::uint64_t seed) {
  const int m = model.real_dim() + 2;
  const auto ups = upsilon0_field(model);
  FormField structure{m, model.n() + 1, 3, [model, ups](std::span<const Jet> x) {
                        const JetForm u0 = ups.eval(x);
                        return d(u0) + wedge(gamma_jets(model, x).scaled(CJet(Complex(0.0, 1.0))), u0);
                      }};
  const FormField on_circle = pullback(unit_circle_chart(model), structure);
  const FormField curvature = exterior_derivative(gamma_field(model));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  ConnectionCertificate cert;
  cert.samples = samples;
  std::vector<AlternatingForm> dg, w;
  double num = 0.0, den = 0.0;
  for (int s = 0; s < samples; ++s) {
    const ChartPoint p = model.sample_point(rng);
    const double psi = angle(rng);
    std::vector<double> xp(p.coords().begin(), p.coords().end());
    xp.push_back(psi);
    cert.upsilon_residual = std::max(cert.upsilon_residual, max_abs(evaluate(on_circle, ChartPoint(xp))));

    const TotalSpacePoint u{p, std::polar(1.0, psi)};
    dg.push_back(evaluate(curvature, u.coords()));
    w.push_back(value(embed(constant_jet_form(kahler_form_at(model, p)), m)));
    for (int i = 0; i < w.back().size(); ++i) {
      num += std::real(dg.back()[i] * std::conj(w.back()[i]));
      den += std::norm(w.back()[i]);
    }
  }
  cert.kappa = den > 0.0 ? num / den : 0.0;
  for (int s = 0; s < samples; ++s) {
    cert.kappa_deviation = std::max(cert.kappa_deviation, max_abs(dg[s] - w[s].scaled(cert.kappa)));
    cert.einstein_sign_residual =
        std::max(cert.einstein_sign_residual, max_abs(dg[s] - w[s].scaled(model.declared_c())));
  }
  return cert;
}

ConnectionForm::ConnectionForm(KahlerModel model)
    : model_(std::move(model)), cert_(certify_connection(model_, 8, kCertificationSeed)) {
  if (!(cert_.upsilon_residual < kCertificationTolerance))
    throw CertificationError(model_.name() + ": d Upsilon_0 = -i gamma ^ Upsilon_0 fails on the unit circle bundle (residual " +
                             std::to_string(cert_.upsilon_residual) + ")");
  if (!(cert_.kappa_deviation < kCertificationTolerance * (1.0 + std::abs(cert_.kappa))))
    throw CertificationError(model_.name() + ": d gamma is not a constant multiple of varpi (residual " +
                             std::to_string(cert_.kappa_deviation) + ")");
}

AlternatingForm ConnectionForm::at(const TotalSpacePoint& u) const {
  return evaluate(field(), u.coords());
}

ConnectionForm connection_gamma(const KahlerModel& model) { return ConnectionForm(model); }

ProfileF::ProfileF(int n_, double c_, double c_prime_)
    : n(n_), c(c_), c_prime(c_prime_), radial_factor((n_ + 1) / 2.0),
      exponent(n_ / (2.0 * n_ + 2.0)) {
  if (n < 1) throw DimensionError("profile dimension must be at least 1");
  if (!(c_prime > 0.0)) throw DomainError("profile constant c' must be positive");
}

std::optional<double> ProfileF::domain_bound() const {
  const double ac = radial_factor * c;
  if (ac <= 0.0) return std::nullopt;
  return std::sqrt(c_prime / ac);
}

bool ProfileF::in_domain(double r) const {
  if (!(r >= 0.0) || !std::isfinite(r)) return false;
  return c_prime - radial_factor * c * r * r > 0.0;
}

double ProfileF::value(double r) const { return value(Jet(r)).value(); }

Jet ProfileF::value(const Jet& r) const {
  if (!in_domain(r.value())) {
    const auto b = domain_bound();
    throw DomainError("profile evaluated at r = " + std::to_string(r.value()) + " outside [0, " +
                      (b ? std::to_string(*b) + ")" : std::string("inf)")));
  }
  return pow(c_prime - r * r * (radial_factor * c), exponent) * multiplier;
}

double ProfileF::ode_residual(double r) const {
  const Jet f = value(seed(std::vector<double>{r}, 1)[0]);
  const double f0 = f.value();
  return c * r + (2.0 / n) * std::pow(f0, 2.0 / n + 1.0) * f.gradient(0);
}

CYStructure::CYStructure(ConnectionForm connection, ProfileF profile)
    : connection_(std::move(connection)), profile_(profile) {
  if (profile_.n != connection_.model().n())
    throw DimensionError("profile and model dimensions differ");
}

std::pair<double, double> CYStructure::radial_range() const {
  if (const auto b = profile_.domain_bound()) return {0.1 * *b, 0.9 * *b};
  return {0.1, 3.0};
}

TotalSpacePoint CYStructure::point_at(const ChartPoint& base, double r, double psi) const {
  return {base, std::polar(r / std::sqrt(hermitian_h(model(), base)), psi)};
}

TotalSpacePoint CYStructure::sample_point(std::mt19937_64& rng) const {
  const auto [lo, hi] = radial_range();
  const ChartPoint base = model().sample_point(rng);
  std::uniform_real_distribution<double> rd(lo, hi), angle(0.0, 2.0 * std::numbers::pi);
  const double r = rd(rng);
  return point_at(base, r, angle(rng));
}

bool CYStructure::in_domain(const TotalSpacePoint& u) const {
  if (!model().contains(u.base.coords()) || u.w == Complex(0.0)) return false;
  return profile_.in_domain(radius(model(), u));
}

void CYStructure::require_domain(const TotalSpacePoint& u) const {
  model().require_contains(u.base.coords());
  if (u.w == Complex(0.0)) throw DomainError("polar coordinates are singular on the zero section");
  const double r = radius(model(), u);
  if (!profile_.in_domain(r)) profile_.value(r);
}

JetForm CYStructure::eta0_jets(std::span<const Jet> x) const {
  const Jet r = radius_jets(model(), x);
  return exact_form(r, dim()) - gamma_jets(model(), x).scaled(CJet(Complex(0.0, 1.0)) * CJet(r));
}

JetMatrix CYStructure::metric_jets(std::span<const Jet> x) const {
  const int m = dim();
  const int d = model().real_dim();
  const Jet r = radius_jets(model(), x);
  const Jet f = profile_.value(r);
  const Jet radial = pow(f, -2.0);
  const Jet base_factor = pow(f, 2.0 / model().n());
  const JetForm g = gamma_jets(model(), x);
  std::vector<Jet> dr(m), rg(m);
  for (int i = 0; i < m; ++i) {
    dr[i] = r.derivative(i);
    rg[i] = r * real(g[i]);
  }
  const JetMatrix g0 = canonlift::metric_jets(model(), x.first(d));
  JetMatrix out(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      out(i, j) = radial * (dr[i] * dr[j] + rg[i] * rg[j]);
      if (i < d && j < d) out(i, j) += base_factor * g0(i, j);
    }
  return out;
}

JetForm CYStructure::two_form_jets(std::span<const Jet> x) const {
  const Jet r = radius_jets(model(), x);
  const Jet f = profile_.value(r);
  const JetForm e0 = eta0_jets(x);
  const JetForm w = embed(kahler_form_jets(model(), x.first(model().real_dim())), dim());
  return wedge(e0, conj(e0)).scaled(CJet(Complex(0.0, 0.5)) * CJet(pow(f, -2.0))) +
         w.scaled(CJet(pow(f, 2.0 / model().n())));
}

JetForm CYStructure::potential_form_jets(std::span<const Jet> x) const {
  const int m = dim();
  const int n = model().n();
  const auto base = x.first(model().real_dim());
  const Jet& u = x[m - 2];
  const Jet& v = x[m - 1];
  const Jet s = (u * u + v * v) * h_jets(model(), base);
  const double c = -connection_.kappa();
  if (std::abs(c) < 1e-9) {
    const Jet f = profile_.value(sqrt(s));
    const Jet phi = pow(f, 2.0 / n) * model().potential(base) + pow(f, -2.0) * s * 0.5;
    return i_ddbar(phi, m);
  }
  const Jet P = pow(profile_.value(sqrt(s)), 2.0 / n) * (1.0 / c);
  return d(dc(log(s), m).scaled(CJet(P))).scaled(0.5);
}

FormField CYStructure::eta0_field() const {
  const CYStructure self = *this;
  return FormField{dim(), 1, 3, [self](std::span<const Jet> x) { return self.eta0_jets(x); }};
}

FormField CYStructure::two_form_field() const {
  const CYStructure self = *this;
  return FormField{dim(), 2, 3, [self](std::span<const Jet> x) { return self.two_form_jets(x); }};
}

FormField CYStructure::volume_field() const { return exterior_derivative(upsilon0_field(model())); }

FormField CYStructure::potential_form_field() const {
  const CYStructure self = *this;
  return FormField{dim(), 2, 4, [self](std::span<const Jet> x) { return self.potential_form_jets(x); }};
}

FormField CYStructure::ricci_field() const {
  const CYStructure self = *this;
  return FormField{dim(), 2, 6, [self](std::span<const Jet> x) {
                     const int m = self.dim();
                     const JetForm w = self.potential_form_jets(x);
                     const Eigen::MatrixXd J = standard_complex_structure(m);
                     // g(a, b) = w(a, J b)
                     JetMatrix W(m, m), g(m, m);
                     for (int i = 0; i < m; ++i)
                       for (int j = i + 1; j < m; ++j) {
                         W(i, j) = real(w.component({i, j}));
                         W(j, i) = -W(i, j);
                       }
                     for (int i = 0; i < m; ++i)
                       for (int j = 0; j < m; ++j)
                         for (int k = 0; k < m; ++k)
                           if (J(k, j) != 0.0) g(i, j) += W(i, k) * J(k, j);
                     return i_ddbar(log(determinant(g)), m).scaled(-0.5);
                   }};
}

AlternatingForm CYStructure::eta0(const TotalSpacePoint& u) const {
  require_domain(u);
  return evaluate(eta0_field(), u.coords());
}

Eigen::MatrixXd CYStructure::metric(const TotalSpacePoint& u) const {
  require_domain(u);
  Eigen::MatrixXd g = values(metric_jets(seed(u.coords().coords(), 3)));
  require_positive_definite(g, 1e-12);
  return g;
}

AlternatingForm CYStructure::two_form(const TotalSpacePoint& u) const {
  require_domain(u);
  return evaluate(two_form_field(), u.coords());
}

AlternatingForm CYStructure::upsilon0(const TotalSpacePoint& u) const {
  return evaluate(upsilon0_field(model()), u.coords());
}

AlternatingForm CYStructure::volume(const TotalSpacePoint& u) const {
  return evaluate(volume_field(), u.coords());
}

CYStructure make_cy_structure(const KahlerModel& model, double c_prime) {
  ConnectionForm conn(model);
  ProfileF profile(model.n(), conn.kappa(), c_prime);
  return CYStructure(std::move(conn), profile);
}

double two_form_compatibility_residual(const CYStructure& cy, const TotalSpacePoint& u) {
  const Eigen::MatrixXd g = cy.metric(u);
  const Eigen::MatrixXd M = standard_complex_structure(cy.dim()).transpose() * g;
  const AlternatingForm pi = cy.two_form(u);
  double res = (M + M.transpose()).cwiseAbs().maxCoeff();
  for (int i = 0; i < cy.dim(); ++i)
    for (int j = i + 1; j < cy.dim(); ++j)
      res = std::max(res, std::abs(pi.component({i, j}) - M(i, j)));
  return res;
}

double closure_residual(const CYStructure& cy, const TotalSpacePoint& u,
                        const DifferentiationScheme& scheme) {
  return max_abs(exterior_derivative(cy.two_form_field(), u.coords(), scheme));
}

double volume_factorization_residual(const CYStructure& cy, const TotalSpacePoint& u) {
  const double r = radius(cy.model(), u);
  const AlternatingForm normalized =
      holomorphic_coframe_wedge(cy.model().n(), 2).scaled(u.w / r);
  return max_abs(cy.volume(u) - wedge(cy.eta0(u), normalized));
}

double volume_norm(const CYStructure& cy, const TotalSpacePoint& u) {
  return form_norm(cy.volume(u), cy.metric(u));
}

double volume_coefficient(const CYStructure& cy, const TotalSpacePoint& u) {
  const auto E = unitary_frame(cy.metric(u), standard_complex_structure(cy.dim()));
  return std::abs(holomorphic_coefficient(cy.volume(u), E));
}

RicciScan ricci_residual(const CYStructure& cy, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  RicciScan scan;
  const FormField ricci = cy.ricci_field();
  for (int s = 0; s < samples; ++s) {
    const TotalSpacePoint u = cy.sample_point(rng);
    try {
      scan.max_residual = std::max(scan.max_residual, max_abs(evaluate(ricci, u.coords())));
      ++scan.evaluated;
    } catch (const DomainError&) {
      ++scan.skipped;
    }
  }
  return scan;
}

}  // namespace canonlift
