#include "canonlift/app.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "canonlift/errors.hpp"
#include "canonlift/lifts.hpp"

namespace canonlift {

namespace {

constexpr double kPi = std::numbers::pi;

const std::map<std::string, std::map<std::string, double>>& tolerance_table() {
  static const std::map<std::string, std::map<std::string, double>> table{
      {"verify-model",
       {{"einstein_constant", 1e-8},
        {"einstein_deviation", 1e-8},
        {"metric_compatibility", 1e-10},
        {"metric_j_invariance", 1e-10},
        {"kahler_closed", 1e-10},
        {"ricci_type", 1e-8}}},
      {"verify-cy",
       {{"connection_upsilon", 1e-8},
        {"connection_constant_curvature", 1e-8},
        {"connection_kappa", 1e-8},
        {"connection_einstein_sign", 1e-8},
        {"profile_ode", 1e-10},
        {"profile_positive", 0.0},
        {"two_form_compatibility", 1e-10},
        {"two_form_closed", 1e-7},
        {"potential_matches_two_form", 1e-8},
        {"volume_closed", 1e-8},
        {"volume_type", 1e-10},
        {"volume_norm_constant", 1e-8},
        {"volume_norm", 1e-8},
        {"volume_unitary_coefficient", 1e-8},
        {"ricci_flat", 1e-6}}},
      {"verify-lift",
       {{"lagrangian_gate", 1e-10},
        {"section_unit_norm", 1e-10},
        {"minimality_gate", 1e-8},
        {"slag_lagrangian", 1e-8},
        {"slag_imaginary", 1e-8},
        {"calibration_ratio", 1e-6},
        {"phase_constancy", 1e-7}}},
      {"holonomy", {{"holonomy", 1e-6}, {"holonomy_contractible", 1e-8}, {"holonomy_group", 1e-6}}},
      {"area-table",
       {{"area_ratio", 1e-3},
        {"area_closed_form", 1e-6},
        {"lift_area_closed_form", 1e-6},
        {"area_resolution", 1e-3}}},
      {"profile-plot", {{"profile_ode", 1e-10}}},
  };
  return table;
}

class Tolerances {
 public:
  Tolerances(const std::string& command, const std::map<std::string, double>& overrides)
      : values_(default_tolerances(command)) {
    for (const auto& [k, v] : overrides) values_.at(k) = v;
  }
  double operator()(const std::string& name) const { return values_.at(name); }
  const std::map<std::string, double>& all() const { return values_; }

 private:
  std::map<std::string, double> values_;
};

/// Evaluates a check; an exception thrown by the computation fails the record.
CheckRecord check(std::string name, std::string anchor, Comparison cmp, double tol,
                  const std::function<double()>& compute, std::optional<double> expected = std::nullopt) {
  try {
    return timed_check(name, anchor, cmp, tol, compute, expected);
  } catch (const std::exception& e) {
    CheckRecord r;
    r.name = std::move(name);
    r.anchor = std::move(anchor);
    r.comparison = cmp;
    r.tolerance = tol;
    r.expected = expected;
    r.pass = false;
    r.detail["error"] = e.what();
    return r;
  }
}

CheckRecord info(std::string name, std::string anchor, std::optional<double> value,
                 nlohmann::json detail = nlohmann::json::object()) {
  CheckRecord r;
  r.name = std::move(name);
  r.anchor = std::move(anchor);
  r.comparison = Comparison::Info;
  if (value && std::isfinite(*value)) r.value = value;
  r.detail = std::move(detail);
  return r;
}

KahlerModel config_model(const RunConfig& cfg) {
  return make_model(parse_model_kind(cfg.model), cfg.n);
}

// ---------------------------------------------------------------- verify-model

VerificationReport verify_model(const RunConfig& cfg, const Tolerances& tol) {
  const KahlerModel model = config_model(cfg);
  VerificationReport rep;
  EinsteinFit fit;
  rep.add(check("einstein_constant", "Ric = c varpi with c = 2(n+1), 0, -2(n+1)", Comparison::Near,
                tol("einstein_constant"),
                [&] {
                  fit = einstein_constant(model, cfg.samples, cfg.seed);
                  return fit.c;
                },
                model.declared_c()));
  rep.add(check("einstein_deviation", "max |rho - c varpi|", Comparison::Below, tol("einstein_deviation"),
                [&] { return fit.max_deviation; }));

  std::vector<ChartPoint> pts;
  std::mt19937_64 rng(cfg.seed);
  for (int i = 0; i < cfg.samples; ++i) pts.push_back(model.sample_point(rng));
  const Eigen::MatrixXd J = standard_complex_structure(model.real_dim());

  rep.add(check("metric_compatibility", "g0(x, y) = varpi(x, J y)", Comparison::Below,
                tol("metric_compatibility"), [&] {
                  std::normal_distribution<double> nd;
                  double worst = 0.0;
                  for (const auto& p : pts) {
                    Eigen::VectorXd x(model.real_dim()), y(model.real_dim());
                    for (int i = 0; i < x.size(); ++i) {
                      x(i) = nd(rng);
                      y(i) = nd(rng);
                    }
                    worst = std::max(worst, compatibility_residual(model, p, x, y));
                  }
                  return worst;
                }));
  rep.add(check("metric_j_invariance", "g0(Jx, Jy) = g0(x, y)", Comparison::Below,
                tol("metric_j_invariance"), [&] {
                  double worst = 0.0;
                  for (const auto& p : pts) worst = std::max(worst, metric_j_invariance_residual(metric_at(model, p)));
                  return worst;
                }));
  rep.add(check("kahler_closed", "d varpi = 0", Comparison::Below, tol("kahler_closed"), [&] {
    const FormField w = kahler_form_field(model);
    double worst = 0.0;
    for (const auto& p : pts) worst = std::max(worst, max_abs(exterior_derivative(w, p)));
    return worst;
  }));
  rep.add(check("ricci_type", "rho of type (1,1)", Comparison::Below, tol("ricci_type"), [&] {
    double worst = 0.0;
    for (const auto& p : pts) worst = std::max(worst, type_residual(ricci_form_at(model, p), J, 1, 1));
    return worst;
  }));
  return rep;
}

// ------------------------------------------------------------------- verify-cy

VerificationReport verify_cy(const RunConfig& cfg, const Tolerances& tol) {
  const KahlerModel model = config_model(cfg);
  const int n = model.n();
  VerificationReport rep;

  ConnectionCertificate cert;
  rep.add(check("connection_upsilon", "d Upsilon_0 = -i gamma ^ Upsilon_0", Comparison::Below,
                tol("connection_upsilon"), [&] {
                  cert = certify_connection(model, cfg.samples, cfg.seed);
                  return cert.upsilon_residual;
                }));
  rep.add(check("connection_constant_curvature", "d gamma = kappa varpi, kappa constant", Comparison::Below,
                tol("connection_constant_curvature"), [&] { return cert.kappa_deviation; }));
  rep.add(check("connection_kappa", "kappa = -c", Comparison::Near, tol("connection_kappa"),
                [&] { return cert.kappa; }, -model.declared_c()));
  rep.add(check("connection_einstein_sign", "d gamma = c varpi (c the Einstein constant)", Comparison::Below,
                tol("connection_einstein_sign"), [&] { return cert.einstein_sign_residual; }));

  const CYStructure cy(ConnectionForm(model), ProfileF(n, cert.kappa, cfg.c_prime));
  const ProfileF& f = cy.profile();
  const auto [r_lo, r_hi] = cy.radial_range();
  {
    const auto bound = f.domain_bound();
    rep.add(info("profile_domain_bound", "f > 0 on [0, bound)", bound ? std::optional<double>(*bound) : std::nullopt,
                 {{"c", f.c}, {"c_prime", f.c_prime}, {"r_min", r_lo}, {"r_max", r_hi}}));
  }
  rep.add(check("profile_ode", "c r + (2/n) f^{2/n+1} f' = 0", Comparison::Below, tol("profile_ode"), [&] {
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) worst = std::max(worst, std::abs(f.ode_residual(r_lo + (r_hi - r_lo) * i / 19.0)));
    return worst;
  }));
  rep.add(check("profile_positive", "min f over the sampled radii", Comparison::Above, tol("profile_positive"), [&] {
    double lo = 1e300;
    for (int i = 0; i < 20; ++i) lo = std::min(lo, f.value(r_lo + (r_hi - r_lo) * i / 19.0));
    return lo;
  }));

  std::vector<TotalSpacePoint> pts;
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  for (int i = 0; i < cfg.samples; ++i) pts.push_back(cy.sample_point(rng));
  const Eigen::MatrixXd J = standard_complex_structure(cy.dim());
  auto sup = [&](const std::function<double(const TotalSpacePoint&)>& fn) {
    double worst = 0.0;
    for (const auto& u : pts) worst = std::max(worst, fn(u));
    return worst;
  };

  rep.add(check("two_form_compatibility", "Pi(x, y) = g(Jx, y)", Comparison::Below, tol("two_form_compatibility"),
                [&] { return sup([&](const TotalSpacePoint& u) { return two_form_compatibility_residual(cy, u); }); }));
  rep.add(check("two_form_closed", "d Pi = 0", Comparison::Below, tol("two_form_closed"),
                [&] { return sup([&](const TotalSpacePoint& u) { return closure_residual(cy, u); }); }));
  rep.add(check("potential_matches_two_form", "1/2 d(P d^c log r^2) = Pi", Comparison::Below,
                tol("potential_matches_two_form"), [&] {
                  const FormField pf = cy.potential_form_field();
                  return sup([&](const TotalSpacePoint& u) {
                    return max_abs(evaluate(pf, u.coords()) - cy.two_form(u));
                  });
                }));
  rep.add(check("volume_closed", "d Upsilon = 0", Comparison::Below, tol("volume_closed"), [&] {
    const FormField v = cy.volume_field();
    return sup([&](const TotalSpacePoint& u) { return max_abs(exterior_derivative(v, u.coords())); });
  }));
  rep.add(check("volume_type", "Upsilon of type (n+1, 0)", Comparison::Below, tol("volume_type"),
                [&] { return sup([&](const TotalSpacePoint& u) { return type_residual(cy.volume(u), J, n + 1, 0); }); }));

  std::vector<double> norms;
  for (const auto& u : pts) {
    try {
      norms.push_back(volume_norm(cy, u));
    } catch (const std::exception&) {
    }
  }
  rep.add(check("volume_norm_constant", "|Upsilon|_g constant", Comparison::Below, tol("volume_norm_constant"), [&] {
    if (norms.size() != pts.size()) throw DomainError("volume norm failed at a sample");
    return *std::max_element(norms.begin(), norms.end()) - *std::min_element(norms.begin(), norms.end());
  }));
  const double unit = std::pow(2.0, -0.5 * n);
  rep.add(check("volume_norm", "|Upsilon|_g = 2^{-n/2}", Comparison::Near, tol("volume_norm"), [&] {
    if (norms.empty()) throw DomainError("no volume norm evaluated");
    double far = norms.front();
    for (double v : norms)
      if (std::abs(v - unit) > std::abs(far - unit)) far = v;
    return far;
  }, unit));
  rep.add(check("volume_unitary_coefficient", "Upsilon(unitary frame) = 2^{-n/2}", Comparison::Near,
                tol("volume_unitary_coefficient"), [&] {
                  double far = unit;
                  for (const auto& u : pts) {
                    const double v = volume_coefficient(cy, u);
                    if (std::abs(v - unit) > std::abs(far - unit)) far = v;
                  }
                  return far;
                }, unit));
  RicciScan scan;
  rep.add(check("ricci_flat", "Ric = 0 for the Kahler potential of the profile", Comparison::Below, tol("ricci_flat"), [&] {
    scan = ricci_residual(cy, std::min(cfg.samples, 10), cfg.seed);
    if (scan.evaluated == 0) throw DomainError("no Ricci sample evaluated");
    return scan.max_residual;
  }));
  return rep;
}

// ----------------------------------------------------------------- verify-lift

LagrangianImmersion config_immersion(const RunConfig& cfg) {
  if (cfg.immersion == "hexagonal_torus") {
    if (cfg.n > 3) throw ConfigError("hexagonal_torus: n must be <= 3");
    return hexagonal_torus(cfg.n);
  }
  if (cfg.immersion == "offset_circle") {
    if (cfg.n != 1) throw ConfigError("offset_circle: n must be 1");
    if (!(cfg.radius > 0.0)) throw ConfigError("offset_circle: radius must be > 0");
    return offset_circle(cfg.radius);
  }
  if (cfg.immersion == "linear_subtorus") {
    if (cfg.n > 3) throw ConfigError("linear_subtorus: n must be <= 3");
    return linear_subtorus(cfg.n);
  }
  if (cfg.immersion == "complex_line") {
    if (cfg.n != 2) throw ConfigError("complex_line: n must be 2");
    return complex_line();
  }
  throw ConfigError("unknown immersion '" + cfg.immersion +
                    "' (expected hexagonal_torus, offset_circle, linear_subtorus or complex_line)");
}

VerificationReport verify_lift(const RunConfig& cfg, const Tolerances& tol) {
  const LagrangianImmersion phi = config_immersion(cfg);
  const int n = phi.dim();
  const int per_dim = n == 1 ? 20 : n == 2 ? 12 : 6;
  VerificationReport rep;
  rep.add(info("immersion_model", "model the immersion lives in", std::nullopt, {{"model", phi.model.name()}}));

  const auto gate = check("lagrangian_gate", "phi^* varpi = 0", Comparison::Below, tol("lagrangian_gate"),
                          [&] { return lagrangian_scan(phi, per_dim); });
  rep.add(gate);
  if (!*gate.pass) return rep;

  const CanonicalSection s(phi);
  rep.add(check("section_unit_norm", "|s| = 1", Comparison::Below, tol("section_unit_norm"), [&] {
    std::mt19937_64 rng(cfg.seed);
    double worst = 0.0;
    for (int i = 0; i < cfg.samples; ++i) worst = std::max(worst, std::abs(s.norm(phi.sample(rng)) - 1.0));
    return worst;
  }));

  const int min_grid = n == 1 ? 16 : n == 2 ? 6 : 3;
  const auto minimal = check("minimality_gate", "s^* gamma = 0", Comparison::Below, tol("minimality_gate"),
                             [&] { return minimality_residual(s, min_grid); });
  rep.add(minimal);
  if (!*minimal.pass) return rep;

  const LegendrianLift lift{s, cfg.phase, *minimal.value, s.section_map(cfg.phase)};
  const CYStructure cy = make_cy_structure(phi.model, cfg.c_prime);
  SlagCertificate cert;
  rep.add(check("slag_lagrangian", "Pi restricted to L = 0", Comparison::Below, tol("slag_lagrangian"), [&] {
    cert = slag_certificate(lift, cy, cfg.samples, cfg.seed);
    if (cert.evaluated == 0) throw DomainError("no cone sample inside the profile domain");
    return cert.lagrangian_residual;
  }));
  rep.add(check("slag_imaginary", "Im(e^{i theta'} Upsilon) restricted to L = 0", Comparison::Below,
                tol("slag_imaginary"), [&] { return cert.imaginary_residual; }));
  rep.add(check("calibration_ratio", "2^{n/2} Re(e^{i theta'} Upsilon) = vol on L", Comparison::Near,
                tol("calibration_ratio"),
                [&] { return std::abs(cert.min_ratio - 1.0) > std::abs(cert.max_ratio - 1.0) ? cert.min_ratio : cert.max_ratio; },
                1.0));
  rep.add(check("phase_constancy", "arg(e^{i theta'} Upsilon) constant on L", Comparison::Below,
                tol("phase_constancy"), [&] { return cert.phase_spread; }));
  rep.add(info("optimal_phase", "theta'", cert.optimal_phase,
               {{"lift_phase", cfg.phase}, {"evaluated", cert.evaluated}, {"skipped", cert.skipped}}));
  return rep;
}

// -------------------------------------------------------------------- holonomy

struct LoopSpec {
  Loop loop;
  std::optional<int> total_winding;  // nullopt: constant loop
  bool contractible = false;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

int parse_winding(const std::string& text, const std::string& spec) {
  double v = 0.0;
  try {
    std::size_t used = 0;
    v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw ConfigError("loop '" + spec + "': '" + text + "' is not a number");
  }
  if (v != std::round(v)) throw ConfigError("loop '" + spec + "' is not closed (non-integer winding)");
  return static_cast<int>(v);
}

LoopSpec parse_loop(const std::string& spec, int n) {
  const auto parts = split(spec, ':');
  if (parts.empty()) throw ConfigError("empty loop spec");
  const std::string& kind = parts[0];
  if (kind == "trivial" && parts.size() == 1) {
    return {Loop{"trivial", [n](const Jet& t) { return std::vector<Jet>(n, t * 0.0); }}, std::nullopt, true};
  }
  if (kind == "contractible" && parts.size() <= 2) {
    const double radius = parts.size() == 2 ? std::stod(parts[1]) : 0.3;
    Loop l = Loop::contractible(std::vector<double>(n, 0.4), radius);
    l.label = "contractible";
    return {l, 0, true};
  }
  if (kind == "generator" && (parts.size() == 2 || parts.size() == 3)) {
    const int j = parse_winding(parts[1], spec);
    const int w = parts.size() == 3 ? parse_winding(parts[2], spec) : 1;
    if (j < 0 || j >= n) throw ConfigError("loop '" + spec + "': generator index out of range");
    Loop l = Loop::generator(n, j, w);
    l.label = spec;
    return {l, w, w == 0};
  }
  if (kind == "cycle" && parts.size() == 2) {
    const auto ws = split(parts[1], ',');
    if (static_cast<int>(ws.size()) != n)
      throw ConfigError("loop '" + spec + "': expected " + std::to_string(n) + " windings");
    std::vector<int> w;
    int total = 0;
    for (const auto& x : ws) {
      w.push_back(parse_winding(x, spec));
      total += w.back();
    }
    Loop l = Loop::cycle(std::vector<double>(n, 0.0), w);
    l.label = spec;
    return {l, total, false};
  }
  throw ConfigError("bad loop spec '" + spec +
                    "' (expected generator:J[:W], cycle:W1,...,Wn, contractible[:R] or trivial)");
}

std::vector<std::string> default_loops(int n) {
  std::vector<std::string> out;
  for (int j = 0; j < n; ++j) {
    out.push_back("generator:" + std::to_string(j));
    out.push_back("generator:" + std::to_string(j) + ":" + std::to_string(n + 1));
  }
  out.push_back("contractible");
  out.push_back("trivial");
  return out;
}

VerificationReport holonomy(const RunConfig& cfg, const Tolerances& tol) {
  if (cfg.immersion != "hexagonal_torus")
    throw ConfigError("holonomy is implemented for --immersion hexagonal_torus");
  if (parse_model_kind(cfg.model) != ModelKind::FubiniStudy)
    throw ConfigError("holonomy needs the fubini_study model");
  const LagrangianImmersion phi = config_immersion(cfg);
  const int n = cfg.n;
  std::vector<LoopSpec> loops;
  std::set<std::string> labels;
  for (const auto& spec : cfg.loops.empty() ? default_loops(n) : cfg.loops) {
    loops.push_back(parse_loop(spec, n));
    if (!labels.insert(loops.back().loop.label).second) throw ConfigError("duplicate loop '" + spec + "'");
  }

  VerificationReport rep;
  for (const auto& ls : loops) {
    HolonomyElement h;
    const std::string base = "holonomy[" + ls.loop.label + "]";
    const Complex expected = ls.total_winding ? std::polar(1.0, 2 * kPi * *ls.total_winding / (n + 1)) : Complex(1.0);
    const std::string tol_name = ls.contractible ? "holonomy_contractible" : "holonomy";
    auto rec = check(base, "Hol = exp(2 pi i k/(n+1))", Comparison::Below, tol(tol_name), [&] {
      h = hopf_holonomy(phi, ls.loop, cfg.steps);
      return std::abs(h.value - expected);
    });
    rec.detail["re"] = h.value.real();
    rec.detail["im"] = h.value.imag();
    rec.detail["order"] = h.order ? nlohmann::json(*h.order) : nlohmann::json(nullptr);
    rec.detail["expected_angle"] = std::arg(expected);
    rec.detail["quadrature_error"] = h.quadrature_error;
    rep.add(rec);
    rep.add(check(base + ".group", "Hol in Z_{n+1}", Comparison::Below, tol("holonomy_group"), [&] {
      double d = 1e300;
      for (int k = 0; k <= n; ++k) d = std::min(d, std::abs(h.value - std::polar(1.0, 2 * kPi * k / (n + 1))));
      return d;
    }));
  }
  return rep;
}

// ------------------------------------------------------------------ area-table

void write_csv(const std::string& path, const std::string& header, const std::vector<std::vector<double>>& rows) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path);
  os << header << '\n';
  char buf[64];
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (std::isfinite(row[i]))
        std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      else
        std::snprintf(buf, sizeof buf, "nan");
      os << (i ? "," : "") << buf;
    }
    os << '\n';
  }
}

VerificationReport area_table(const RunConfig& cfg, const Tolerances& tol, bool write_files) {
  VerificationReport rep;
  std::vector<std::vector<double>> rows;
  for (int n : cfg.n_list) {
    const auto phi = hexagonal_torus(n);
    const std::string tag = "[n=" + std::to_string(n) + "]";
    LiftArea la, fine;
    double estimate = 0.0;
    rep.add(check("area_resolution" + tag, "|A(2N) - A(N)| / A", Comparison::Info, tol("area_resolution"), [&] {
      la = lift_area(phi, cfg.resolution);
      fine = lift_area(phi, 2 * cfg.resolution);
      estimate = std::max(std::abs(fine.area - la.area) / fine.area,
                          std::abs(fine.sheet_area - la.sheet_area) / fine.sheet_area);
      return estimate;
    }));
    const bool resolved = estimate <= tol("area_resolution");
    auto ratio = check("area_ratio" + tag, "lift area / area = n + 1", Comparison::Below, tol("area_ratio"),
                       [&] { return std::abs(la.ratio - (n + 1)) / (n + 1); });
    ratio.detail = {{"ratio", la.ratio}, {"sheet_count", la.sheet_count}};
    if (!resolved) {
      ratio.comparison = Comparison::Info;
      ratio.pass.reset();
      ratio.detail["warning"] = "resolution too low for a 0.1% estimate";
    }
    rep.add(ratio);
    // (2 pi)^n (n+1)^{-(n+1)/2}
    const double closed = std::pow(2 * kPi, n) * std::pow(n + 1.0, -0.5 * (n + 1));
    rep.add(check("area_closed_form" + tag, "area = (2 pi)^n (n+1)^{-(n+1)/2}", Comparison::Below,
                  tol("area_closed_form"), [&] { return std::abs(la.area - closed) / closed; }));
    rep.add(check("lift_area_closed_form" + tag, "lift area = (n+1) area", Comparison::Below,
                  tol("lift_area_closed_form"), [&] { return std::abs(la.lift_area - (n + 1) * closed) / ((n + 1) * closed); }));
    rows.push_back({double(n), la.area, la.lift_area, la.ratio, double(la.sheet_count)});
  }
  if (write_files) {
    const std::string path = side_file_path(cfg.output_path, "area");
    write_csv(path, "n,area,lift_area,ratio,sheet_count", rows);
    rep.side_files.push_back(path);
  }
  return rep;
}

// ---------------------------------------------------------------- profile-plot

VerificationReport profile_plot(const RunConfig& cfg, const Tolerances& tol, bool write_files) {
  const int n = cfg.n;
  double c = 0.0;
  if (cfg.c) {
    c = *cfg.c;
  } else {
    c = ConnectionForm(config_model(cfg)).kappa();
  }
  const ProfileF f(n, c, cfg.c_prime);
  const auto bound = f.domain_bound();
  const double r_max = cfg.r_max > 0.0 ? cfg.r_max : bound ? 1.25 * *bound : 3.0;
  std::vector<std::vector<double>> rows;
  double worst = 0.0;
  int inside = 0;
  for (int i = 0; i < cfg.r_count; ++i) {
    const double r = r_max * i / (cfg.r_count - 1);
    if (f.in_domain(r)) {
      const double res = std::abs(f.ode_residual(r));
      worst = std::max(worst, res);
      ++inside;
      rows.push_back({r, f.value(r), res, 1.0});
    } else {
      rows.push_back({r, std::nan(""), std::nan(""), 0.0});
    }
  }
  VerificationReport rep;
  rep.add(check("profile_ode", "c r + (2/n) f^{2/n+1} f' = 0 on in-domain rows", Comparison::Below,
                tol("profile_ode"), [&] { return worst; }));
  rep.add(info("profile_rows", "rows inside the domain", inside,
               {{"c", c}, {"rows", cfg.r_count}, {"r_max", r_max},
                {"bound", bound ? nlohmann::json(*bound) : nlohmann::json(nullptr)}}));
  if (write_files) {
    const std::string path = side_file_path(cfg.output_path, "profile");
    write_csv(path, "r,f,ode_residual,domain_flag", rows);
    rep.side_files.push_back(path);
  }
  return rep;
}

}  // namespace

void RunConfig::validate() const {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), command) == names.end())
    throw ConfigError("unknown command '" + command + "'");
  if (n < 1) throw ConfigError("n must be >= 1");
  parse_model_kind(model);
  if (!(c_prime > 0.0) || !std::isfinite(c_prime)) throw ConfigError("c' must be > 0");
  if (samples < 10) throw ConfigError("samples must be >= 10");
  if (resolution < 8) throw ConfigError("resolution must be >= 8");
  if (steps < 8) throw ConfigError("steps must be >= 8");
  if (!std::isfinite(phase)) throw ConfigError("phase must be finite");
  const auto& defaults = default_tolerances(command);
  for (const auto& [k, v] : tolerances) {
    if (!defaults.count(k)) {
      std::string known;
      for (const auto& [name, d] : defaults) known += (known.empty() ? "" : ", ") + name;
      throw ConfigError("unknown tolerance '" + k + "' for " + command + " (known: " + known + ")");
    }
    if (!std::isfinite(v) || v < 0.0) throw ConfigError("tolerance '" + k + "' must be a finite value >= 0");
  }
  if (command == "area-table") {
    if (n_list.empty()) throw ConfigError("area-table needs a non-empty n list");
    for (int k : n_list)
      if (k < 1 || k > 3) throw ConfigError("area-table: n values must lie in 1..3");
    std::set<int> unique(n_list.begin(), n_list.end());
    if (unique.size() != n_list.size()) throw ConfigError("area-table: repeated n value");
  }
  if (command == "profile-plot" && r_count < 2) throw ConfigError("profile-plot needs r-count >= 2");
  if (command == "profile-plot" && (r_max < 0.0 || !std::isfinite(r_max))) throw ConfigError("r-max must be >= 0");
  if (c && !std::isfinite(*c)) throw ConfigError("c must be finite");
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["model"] = model;
  j["n"] = n;
  j["c_prime"] = c_prime;
  j["seed"] = seed;
  j["samples"] = samples;
  j["tolerance_overrides"] = tolerances;
  j["resolution"] = resolution;
  j["output_path"] = output_path;
  j["immersion"] = immersion;
  j["phase"] = phase;
  j["radius"] = radius;
  j["loops"] = loops;
  j["steps"] = steps;
  j["n_list"] = n_list;
  j["c"] = c ? nlohmann::json(*c) : nlohmann::json(nullptr);
  j["r_max"] = r_max;
  j["r_count"] = r_count;
  return j;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"verify-model", "verify-cy",  "verify-lift",
                                              "holonomy",     "area-table", "profile-plot"};
  return names;
}

const std::map<std::string, double>& default_tolerances(const std::string& command) {
  const auto& t = tolerance_table();
  auto it = t.find(command);
  if (it == t.end()) throw ConfigError("unknown command '" + command + "'");
  return it->second;
}

std::string side_file_path(const std::string& report_path, const std::string& tag) {
  const std::filesystem::path p(report_path);
  return (p.parent_path() / (p.stem().string() + "_" + tag + ".csv")).string();
}

VerificationReport run_command(const RunConfig& cfg, bool write_side_files) {
  cfg.validate();
  const Tolerances tol(cfg.command, cfg.tolerances);
  VerificationReport rep;
  try {
    if (cfg.command == "verify-model") rep = verify_model(cfg, tol);
    else if (cfg.command == "verify-cy") rep = verify_cy(cfg, tol);
    else if (cfg.command == "verify-lift") rep = verify_lift(cfg, tol);
    else if (cfg.command == "holonomy") rep = holonomy(cfg, tol);
    else if (cfg.command == "area-table") rep = area_table(cfg, tol, write_side_files);
    else rep = profile_plot(cfg, tol, write_side_files);
  } catch (const DimensionError& e) {
    throw ConfigError(e.what());
  }
  rep.config = cfg.to_json();
  rep.config["tolerances"] = tol.all();
  return rep;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"canonlift: numerical certificates for Calabi-Yau structures on canonical bundles"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "INI file of key = value defaults; flags win");
  app.allow_config_extras(false);
  app.require_subcommand(1, 1);
  app.fallthrough();

  RunConfig cfg;
  std::vector<std::string> tol_specs;
  std::optional<double> c;
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_option("--samples", cfg.samples, "sample count (>= 10)");
  app.add_option("--out", cfg.output_path, "report path");
  app.add_option("--tol", tol_specs, "NAME=VALUE tolerance override (repeatable)");
  app.add_option("--model", cfg.model, "fubini_study | flat_torus | complex_hyperbolic");
  app.add_option("--n", cfg.n, "complex dimension");
  app.add_option("--c-prime", cfg.c_prime, "profile constant c'");
  app.add_option("--resolution", cfg.resolution, "quadrature points per dimension");
  app.add_option("--immersion", cfg.immersion, "hexagonal_torus | offset_circle | linear_subtorus | complex_line");
  app.add_option("--phase", cfg.phase, "lift phase");
  app.add_option("--radius", cfg.radius, "offset_circle radius");
  app.add_option("--loop", cfg.loops, "generator:J[:W] | cycle:W1,...,Wn | contractible[:R] | trivial");
  app.add_option("--steps", cfg.steps, "holonomy quadrature steps");
  app.add_option("--n-list", cfg.n_list, "comma separated n values")->delimiter(',');
  app.add_option("--c", c, "profile constant c (default: the model's connection curvature)");
  app.add_option("--r-max", cfg.r_max, "largest plotted radius (0: automatic)");
  app.add_option("--r-count", cfg.r_count, "number of plotted radii");

  for (const auto& name : command_names()) app.add_subcommand(name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  cfg.command = app.get_subcommands().front()->get_name();
  cfg.c = c;
  VerificationReport rep;
  try {
    for (const auto& spec : tol_specs) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError("--tol expects NAME=VALUE, got '" + spec + "'");
      double v = 0.0;
      try {
        std::size_t used = 0;
        v = std::stod(spec.substr(eq + 1), &used);
        if (used != spec.size() - eq - 1) throw std::invalid_argument(spec);
      } catch (const std::invalid_argument&) {
        throw ConfigError("--tol " + spec + ": value is not a number");
      } catch (const std::out_of_range&) {
        throw ConfigError("--tol " + spec + ": value out of range");
      }
      cfg.tolerances[spec.substr(0, eq)] = v;
    }
    rep = run_command(cfg);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  {
    std::ofstream os(cfg.output_path, std::ios::binary);
    if (!os) {
      err << "error: cannot write " << cfg.output_path << '\n';
      return 2;
    }
    nlohmann::json j = rep.to_json();
    j["hash"] = rep.hash();
    os << j.dump(2) << '\n';
  }
  for (const auto& r : rep.checks()) {
    if (r.pass ? *r.pass : !r.detail.contains("warning")) continue;
    err << (r.pass ? "FAIL " : "warning ") << r.name << ": value ";
    if (r.value)
      err << *r.value;
    else
      err << "n/a";
    if (r.comparison == Comparison::Near && r.expected)
      err << " (expected " << *r.expected << " +- " << r.tolerance << ')';
    else if (r.comparison != Comparison::Info)
      err << " (" << to_string(r.comparison) << ' ' << r.tolerance << ')';
    if (r.detail.contains("warning")) err << " - " << r.detail["warning"].get<std::string>();
    if (r.detail.contains("error")) err << " - " << r.detail["error"].get<std::string>();
    err << '\n';
  }
  out << cfg.output_path << '\n';
  return rep.verdict() ? 0 : 1;
}

}  // namespace canonlift
