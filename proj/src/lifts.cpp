#include "canonlift/lifts.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace canonlift {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Neumaier compensated sum.
class Accumulator {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0, comp_ = 0.0;
};

LagrangianImmersion torus_immersion(std::string name, KahlerModel model, int n,
                                    std::function<std::vector<Jet>(std::span<const Jet>)> f) {
  LagrangianImmersion phi{std::move(name), std::move(model), std::vector<double>(n, 0.0),
                          std::vector<double>(n, kTwoPi), true, SmoothMap{}};
  phi.map.domain_dim = n;
  phi.map.codomain_dim = phi.model.real_dim();
  phi.map.eval = std::move(f);
  return phi;
}

/// Orthonormal frame covectors e_k^* and (J e_k)^* as jets; consumes one order.
struct FrameCovectors {
  std::vector<std::vector<Jet>> e, n;
};

FrameCovectors frame_covectors(const LagrangianImmersion& phi, const std::vector<int>& order,
                               std::span<const Jet> params) {
  const int k = phi.dim();
  const int d = phi.model.real_dim();
  const auto z = phi.map.eval(params);
  const KahlerModel model = phi.model;
  const auto g_entries = compose_local_map(
      [&model](std::span<const Jet> x) { return metric_jets(model, x).a; }, 2, z);
  auto g = [&](int i, int j) -> const Jet& { return g_entries[static_cast<std::size_t>(i) * d + j]; };
  auto lower = [&](const std::vector<Jet>& v) {
    std::vector<Jet> out(d, Jet(0.0));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) out[i] += g(i, j) * v[j];
    return out;
  };
  auto dot = [](const std::vector<Jet>& a, const std::vector<Jet>& b) {
    Jet s(0.0);
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };

  std::vector<std::vector<Jet>> u;
  FrameCovectors out;
  for (int a = 0; a < k; ++a) {
    const int col = order[a];
    std::vector<Jet> v(d);
    for (int i = 0; i < d; ++i) v[i] = z[i].derivative(col);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& w : u) {
        const Jet c = dot(lower(w), v);
        for (int i = 0; i < d; ++i) v[i] -= c * w[i];
      }
    const Jet len2 = dot(lower(v), v);
    if (!(len2.value() > 1e-24)) throw DimensionError(phi.name + ": tangent frame degenerates");
    const Jet inv = pow(len2, -0.5);
    for (auto& c : v) c = c * inv;
    std::vector<Jet> Jv(d);
    for (int l = 0; l < d / 2; ++l) {
      Jv[2 * l] = -v[2 * l + 1];
      Jv[2 * l + 1] = v[2 * l];
    }
    out.e.push_back(lower(v));
    out.n.push_back(lower(Jv));
    u.push_back(std::move(v));
  }
  return out;
}

std::vector<int> checked_order(int n, std::vector<int> order) {
  if (order.empty()) {
    order.resize(n);
    std::iota(order.begin(), order.end(), 0);
  }
  std::vector<int> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < n; ++i)
    if (static_cast<int>(sorted.size()) != n || sorted[i] != i)
      throw DimensionError("frame order must be a permutation of the parameter indices");
  return order;
}

}  // namespace

std::vector<ChartPoint> LagrangianImmersion::grid(int per_dim) const {
  if (per_dim < 1) throw DomainError("grid needs at least one point per dimension");
  const int n = dim();
  std::vector<ChartPoint> out;
  std::vector<int> idx(n, 0);
  for (;;) {
    std::vector<double> p(n);
    for (int k = 0; k < n; ++k) {
      const double frac = periodic ? static_cast<double>(idx[k]) / per_dim : (idx[k] + 0.5) / per_dim;
      p[k] = lo[k] + (hi[k] - lo[k]) * frac;
    }
    out.emplace_back(std::move(p));
    int k = 0;
    while (k < n && ++idx[k] == per_dim) idx[k++] = 0;
    if (k == n) break;
  }
  return out;
}

ChartPoint LagrangianImmersion::sample(std::mt19937_64& rng) const {
  std::vector<double> p(dim());
  for (int k = 0; k < dim(); ++k) p[k] = std::uniform_real_distribution<double>(lo[k], hi[k])(rng);
  return ChartPoint(std::move(p));
}

LagrangianImmersion hexagonal_torus(int n) {
  return torus_immersion("hexagonal_torus(" + std::to_string(n) + ")", fubini_study(n), n,
                         [](std::span<const Jet> t) {
                           std::vector<Jet> z;
                           for (const Jet& th : t) {
                             z.push_back(cos(th));
                             z.push_back(sin(th));
                           }
                           return z;
                         });
}

LagrangianImmersion offset_circle(double radius) {
  return torus_immersion("offset_circle(" + std::to_string(radius) + ")", fubini_study(1), 1,
                         [radius](std::span<const Jet> t) {
                           return std::vector<Jet>{cos(t[0]) * radius, sin(t[0]) * radius};
                         });
}

LagrangianImmersion linear_subtorus(int n) {
  return torus_immersion("linear_subtorus(" + std::to_string(n) + ")", flat_torus(n), n,
                         [](std::span<const Jet> t) {
                           std::vector<Jet> z;
                           for (const Jet& th : t) {
                             z.push_back(th);
                             z.push_back(Jet(0.0));
                           }
                           return z;
                         });
}

LagrangianImmersion complex_line() {
  LagrangianImmersion phi{"complex_line", fubini_study(2), {-1.0, -1.0}, {1.0, 1.0}, false, SmoothMap{}};
  phi.map.domain_dim = 2;
  phi.map.codomain_dim = 4;
  phi.map.eval = [](std::span<const Jet> s) {
    return std::vector<Jet>{s[0], s[1], Jet(0.0), Jet(0.0)};
  };
  return phi;
}

Eigen::MatrixXd tangent_frame(const LagrangianImmersion& phi, const ChartPoint& params) {
  return phi.map.jacobian(params.coords());
}

double lagrangian_residual(const LagrangianImmersion& phi, const ChartPoint& params) {
  const Eigen::MatrixXd J = tangent_frame(phi, params);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
  if (!(svd.singularValues().minCoeff() > 1e-10))
    throw DimensionError(phi.name + ": not an immersion at a sampled parameter");
  const ChartPoint image(phi.map(params.coords()));
  return max_abs(pullback(kahler_form_at(phi.model, image), J));
}

double lagrangian_scan(const LagrangianImmersion& phi, int per_dim) {
  double worst = 0.0;
  for (const auto& p : phi.grid(per_dim)) worst = std::max(worst, lagrangian_residual(phi, p));
  return worst;
}

CanonicalSection::CanonicalSection(LagrangianImmersion phi, std::vector<int> frame_order)
    : phi_(std::move(phi)), order_(checked_order(phi_.dim(), std::move(frame_order))) {
  if (phi_.dim() != phi_.model.n())
    throw DimensionError(phi_.name + ": canonical section needs a half-dimensional immersion");
}

std::vector<Jet> CanonicalSection::coefficient_jets(std::span<const Jet> params) const {
  const int n = phi_.dim();
  const auto f = frame_covectors(phi_, order_, params);
  // s(d/dx^1, ..., d/dx^n) = 2^{-n/2} det[(e_k^* + i n_k^*)(d/dx^l)]
  const CJet w = minor_determinant<CJet>(n, [&](int k, int l) {
                   return make_complex(f.e[k][2 * l], f.n[k][2 * l]);
                 }) *
                 std::pow(2.0, -0.5 * n);
  return {real(w), imag(w)};
}

Complex CanonicalSection::coefficient(const ChartPoint& params) const {
  const auto w = coefficient_jets(seed(params.coords(), 1));
  return {w[0].value(), w[1].value()};
}

AlternatingForm CanonicalSection::at(const ChartPoint& params) const {
  const int n = phi_.dim();
  const int d = phi_.model.real_dim();
  const auto f = frame_covectors(phi_, order_, seed(params.coords(), 1));
  AlternatingForm s = AlternatingForm::scalar(d, std::pow(2.0, -0.5 * n));
  for (int k = 0; k < n; ++k) {
    AlternatingForm leg(d, 1);
    for (int i = 0; i < d; ++i) leg[i] = Complex(f.e[k][i].value(), f.n[k][i].value());
    s = wedge(s, leg);
  }
  return s;
}

double CanonicalSection::norm(const ChartPoint& params) const {
  const ChartPoint image(phi_.map(params.coords()));
  return form_norm(at(params), metric_at(phi_.model, image).g0);
}

SmoothMap CanonicalSection::section_map(double phase) const {
  const CanonicalSection self = *this;
  const Complex rot = std::polar(1.0, phase);
  SmoothMap m;
  m.domain_dim = phi_.dim();
  m.codomain_dim = phi_.model.real_dim() + 2;
  m.eval = [self, rot](std::span<const Jet> args) {
    return compose_local_map(
        [&self, rot](std::span<const Jet> p) {
          auto out = self.immersion().map.eval(p);
          const auto w = self.coefficient_jets(p);
          out.push_back(w[0] * rot.real() - w[1] * rot.imag());
          out.push_back(w[0] * rot.imag() + w[1] * rot.real());
          return out;
        },
        1, args);
  };
  return m;
}

double minimality_residual(const CanonicalSection& s, int per_dim) {
  const FormField pulled = pullback(s.section_map(), gamma_field(s.immersion().model));
  double worst = 0.0;
  for (const auto& p : s.immersion().grid(per_dim)) worst = std::max(worst, max_abs(evaluate(pulled, p)));
  return worst;
}

LegendrianLift legendrian_lift(const CanonicalSection& s, double phase, double gate, int per_dim) {
  const double res = minimality_residual(s, per_dim);
  if (!(res < gate)) {
    std::ostringstream msg;
    msg << s.immersion().name << ": minimality residual |s^* gamma| = " << res
        << " is not below the gate " << gate;
    throw MinimalityGateError(msg.str(), res);
  }
  return LegendrianLift{s, phase, res, s.section_map(phase)};
}

SlagCertificate slag_certificate(const LegendrianLift& lift, const CYStructure& cy, int samples,
                                 std::uint64_t seed, std::optional<double> phase) {
  const auto& phi = lift.section.immersion();
  if (phi.model.kind() != cy.model().kind() || phi.model.n() != cy.model().n())
    throw DimensionError("lift and structure live over different models");
  const int n = phi.dim();
  const CanonicalSection section = lift.section;
  const Complex rot = std::polar(1.0, lift.phase);
  // (t, params) -> t e^{i phase} s(params)
  SmoothMap cone;
  cone.domain_dim = n + 1;
  cone.codomain_dim = cy.dim();
  cone.eval = [section, rot](std::span<const Jet> args) {
    return compose_local_map(
        [&section, rot](std::span<const Jet> a) {
          const auto p = a.subspan(1);
          auto out = section.immersion().map.eval(p);
          const auto w = compose_local_map(
              [&section](std::span<const Jet> q) { return section.coefficient_jets(q); }, 1, p);
          out.push_back(a[0] * (w[0] * rot.real() - w[1] * rot.imag()));
          out.push_back(a[0] * (w[0] * rot.imag() + w[1] * rot.real()));
          return out;
        },
        1, args);
  };

  SlagCertificate cert;
  std::mt19937_64 rng(seed);
  const auto [r_lo, r_hi] = cy.radial_range();
  std::uniform_real_distribution<double> rd(r_lo, r_hi);
  const Eigen::MatrixXd J = standard_complex_structure(cy.dim());
  std::vector<Complex> zetas;
  for (int s = 0; s < samples; ++s) {
    std::vector<double> a{rd(rng)};
    const ChartPoint p = phi.sample(rng);
    a.insert(a.end(), p.coords().begin(), p.coords().end());
    const TotalSpacePoint u = TotalSpacePoint::from_coords(ChartPoint(cone(a)));
    if (!cy.in_domain(u)) {
      ++cert.skipped;
      continue;
    }
    const Eigen::MatrixXd g = cy.metric(u);
    Eigen::MatrixXd F = cone.jacobian(a);
    for (int c = 0; c < F.cols(); ++c) {
      for (int pass = 0; pass < 2; ++pass)
        for (int b = 0; b < c; ++b) F.col(c) -= F.col(b) * F.col(b).dot(g * F.col(c));
      F.col(c) /= std::sqrt(F.col(c).dot(g * F.col(c)));
    }
    const AlternatingForm pi = cy.two_form(u);
    Eigen::MatrixXd pair(cy.dim(), 2);
    for (int i = 0; i < F.cols(); ++i)
      for (int j = i + 1; j < F.cols(); ++j) {
        pair.col(0) = F.col(i);
        pair.col(1) = F.col(j);
        cert.lagrangian_residual = std::max(cert.lagrangian_residual, std::abs(evaluate(pi, pair)));
      }
    zetas.push_back(evaluate(cy.volume(u), F));
    ++cert.evaluated;
  }
  if (zetas.empty()) return cert;
  cert.optimal_phase = phase ? *phase : -std::arg(zetas.front());
  const Complex e = std::polar(1.0, cert.optimal_phase);
  const double scale = std::pow(2.0, 0.5 * n);
  cert.min_ratio = 1e300;
  cert.max_ratio = -1e300;
  for (const Complex& z : zetas) {
    const Complex rotated = e * z;
    cert.imaginary_residual = std::max(cert.imaginary_residual, std::abs(rotated.imag()));
    cert.min_ratio = std::min(cert.min_ratio, scale * rotated.real());
    cert.max_ratio = std::max(cert.max_ratio, scale * rotated.real());
    cert.phase_spread = std::max(cert.phase_spread, std::abs(std::arg(rotated)));
  }
  return cert;
}

Loop Loop::cycle(std::vector<double> base, std::vector<int> windings) {
  if (base.size() != windings.size()) throw DimensionError("loop base and windings differ in size");
  std::string label = "cycle(";
  for (std::size_t i = 0; i < windings.size(); ++i) label += (i ? "," : "") + std::to_string(windings[i]);
  label += ")";
  return Loop{label, [base, windings](const Jet& t) {
                std::vector<Jet> out;
                for (std::size_t i = 0; i < base.size(); ++i) out.push_back(t * (kTwoPi * windings[i]) + base[i]);
                return out;
              }};
}

Loop Loop::generator(int n, int j, int winding) {
  std::vector<int> w(n, 0);
  w.at(j) = winding;
  Loop l = cycle(std::vector<double>(n, 0.0), w);
  l.label = "generator(" + std::to_string(j) + (winding != 1 ? "^" + std::to_string(winding) : "") + ")";
  return l;
}

Loop Loop::contractible(std::vector<double> center, double radius) {
  const bool planar = center.size() >= 2;
  return Loop{"contractible", [center, radius, planar](const Jet& t) {
                std::vector<Jet> out;
                for (double c : center) out.emplace_back(c);
                out[0] += sin(t * kTwoPi) * radius;
                if (planar) out[1] += (cos(t * kTwoPi) - 1.0) * radius;
                return out;
              }};
}

Loop Loop::wiggled(std::vector<int> windings, double amplitude) {
  Loop base = cycle(std::vector<double>(windings.size(), 0.0), windings);
  auto inner = base.path;
  return Loop{"wiggled " + base.label, [inner, amplitude](const Jet& t) {
                auto out = inner(t);
                for (std::size_t i = 0; i < out.size(); ++i)
                  out[i] += sin(t * (kTwoPi * (i + 1)) + 0.3 * i) * amplitude;
                return out;
              }};
}

HolonomyElement classify_holonomy(Complex value, int k_max, double tolerance) {
  HolonomyElement h;
  h.value = value;
  h.root_distance = 1e300;
  Complex power(1.0, 0.0);
  for (int k = 1; k <= k_max; ++k) {
    power *= value;
    if (!h.order && std::abs(power - 1.0) < tolerance) h.order = k;
    const double nearest = std::round(k * std::arg(value) / kTwoPi);
    h.root_distance = std::min(h.root_distance, std::abs(value - std::polar(1.0, kTwoPi * nearest / k)));
  }
  return h;
}

HolonomyElement hopf_holonomy(const LagrangianImmersion& phi, const Loop& loop, int steps,
                              double tolerance) {
  if (phi.model.kind() != ModelKind::FubiniStudy)
    throw DomainError("Hopf holonomy is defined for Fubini-Study models only");
  if (steps < 8) throw DomainError("holonomy quadrature needs at least 8 steps");
  const int n = phi.dim();
  const auto start = values(loop.path(Jet(0.0)));
  const auto end = values(loop.path(Jet(1.0)));
  if (static_cast<int>(start.size()) != n) throw DimensionError("loop has wrong dimension");
  for (int k = 0; k < n; ++k) {
    double gap = end[k] - start[k];
    if (phi.periodic) {
      const double period = phi.hi[k] - phi.lo[k];
      gap -= period * std::round(gap / period);
    }
    if (std::abs(gap) > 1e-9) throw DomainError("loop " + loop.label + " is not closed");
  }

  const int m = phi.model.n();
  auto integrand = [&](double t) {
    const auto tj = seed(std::vector<double>{t}, 1);
    const auto z = phi.map.eval(loop.path(tj[0]));
    double num = 0.0, den = 1.0;
    for (int k = 0; k < m; ++k) {
      const Complex Z(z[2 * k].value(), z[2 * k + 1].value());
      const Complex dZ(z[2 * k].gradient(0), z[2 * k + 1].gradient(0));
      num += std::imag(std::conj(Z) * dZ);
      den += std::norm(Z);
    }
    return num / den;
  };
  auto trapezoid = [&](int N) {
    Accumulator acc;
    for (int i = 0; i < N; ++i) acc.add(integrand(static_cast<double>(i) / N));
    return acc.value() / N;
  };
  const double coarse = trapezoid(steps);
  const double fine = trapezoid(2 * steps);
  HolonomyElement h = classify_holonomy(std::polar(1.0, fine), 2 * (m + 2), tolerance);
  h.quadrature_error = std::abs(fine - coarse);
  return h;
}

namespace {

std::vector<double> quadrature_weights(const LagrangianImmersion& phi, int k, int resolution,
                                       std::vector<double>& nodes) {
  const double len = phi.hi[k] - phi.lo[k];
  std::vector<double> w;
  nodes.clear();
  if (phi.periodic) {
    for (int i = 0; i < resolution; ++i) {
      nodes.push_back(phi.lo[k] + len * i / resolution);
      w.push_back(len / resolution);
    }
  } else {
    const int N = resolution + resolution % 2;
    const double h = len / N;
    for (int i = 0; i <= N; ++i) {
      nodes.push_back(phi.lo[k] + h * i);
      w.push_back(h / 3.0 * (i == 0 || i == N ? 1.0 : (i % 2 ? 4.0 : 2.0)));
    }
  }
  return w;
}

double integrate(const LagrangianImmersion& phi, int resolution,
                 const std::function<double(const ChartPoint&)>& density) {
  if (resolution < 8) throw DomainError("quadrature resolution must be at least 8");
  const int n = phi.dim();
  std::vector<std::vector<double>> nodes(n), weights(n);
  for (int k = 0; k < n; ++k) weights[k] = quadrature_weights(phi, k, resolution, nodes[k]);
  Accumulator acc;
  std::vector<int> idx(n, 0);
  for (;;) {
    std::vector<double> p(n);
    double w = 1.0;
    for (int k = 0; k < n; ++k) {
      p[k] = nodes[k][idx[k]];
      w *= weights[k][idx[k]];
    }
    acc.add(w * density(ChartPoint(std::move(p))));
    int k = 0;
    while (k < n && ++idx[k] == static_cast<int>(nodes[k].size())) idx[k++] = 0;
    if (k == n) break;
  }
  return acc.value();
}

}  // namespace

double area(const LagrangianImmersion& phi, int resolution) {
  return integrate(phi, resolution, [&phi](const ChartPoint& p) {
    const Eigen::MatrixXd J = tangent_frame(phi, p);
    const ChartPoint image(phi.map(p.coords()));
    const Eigen::MatrixXd G = J.transpose() * metric_at(phi.model, image).g0 * J;
    return std::sqrt(std::max(0.0, G.determinant()));
  });
}

LiftArea lift_area(const LagrangianImmersion& phi, int resolution) {
  if (phi.model.kind() != ModelKind::FubiniStudy)
    throw DomainError("sphere lifts are defined for Fubini-Study models only");
  const int n = phi.dim();
  const int m = phi.model.n();
  const double R2 = 2.0 * phi.model.scale();
  LiftArea out;
  out.area = area(phi, resolution);
  out.sheet_area = integrate(phi, resolution, [&](const ChartPoint& p) {
    const auto z = phi.map.eval(seed(p.coords(), 1));
    // s = (z, 1) / |(z, 1)|
    Jet norm2(1.0);
    for (const Jet& c : z) norm2 += c * c;
    const Jet inv = pow(norm2, -0.5);
    std::vector<CJet> s;
    for (int k = 0; k < m; ++k) s.push_back(make_complex(z[2 * k] * inv, z[2 * k + 1] * inv));
    s.emplace_back(make_complex(inv, Jet(0.0)));
    Eigen::MatrixXcd ds(m + 1, n);
    Eigen::VectorXcd s0(m + 1);
    for (int a = 0; a <= m; ++a) {
      s0(a) = s[a].value();
      for (int i = 0; i < n; ++i) ds(a, i) = s[a].gradient(i);
    }
    Eigen::MatrixXd G(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double ai = s0.dot(ds.col(i)).imag();
        const double aj = s0.dot(ds.col(j)).imag();
        G(i, j) = R2 * (ds.col(i).dot(ds.col(j)).real() - ai * aj);
      }
    return std::sqrt(std::max(0.0, G.determinant()));
  });
  if (phi.periodic) {
    out.sheet_count = 1;
    for (int j = 0; j < n; ++j) {
      const auto h = hopf_holonomy(phi, Loop::generator(n, j));
      if (!h.order)
        throw CertificationError(phi.name + ": generator holonomy has no finite order; sheet count undefined");
      out.sheet_count = std::lcm(out.sheet_count, *h.order);
    }
  }
  out.lift_area = out.sheet_count * out.sheet_area;
  out.ratio = out.lift_area / out.area;
  return out;
}

}  // namespace canonlift
