// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include "canonlift/app.hpp"
#include "canonlift/errors.hpp"
#include "canonlift/lifts.hpp"
#include "generators.hpp"

using namespace canonlift;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "!") + what;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int failures = 0;

void criterion(const char* id, const char* title, double budget_s, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail += std::string(o.detail.empty() ? "" : "; ") + "exception: " + e.what();
  }
  const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (t > budget_s) o.require(false, fmt("runtime %.1fs over budget", t));
  if (!o.pass) ++failures;
  std::printf("%s %s  %s [%.2fs]\n    %s\n", id, o.pass ? "PASS" : "FAIL", title, t, o.detail.c_str());
  std::fflush(stdout);
}

}  // namespace

int main() {
  criterion("AC1", "Einstein constants", 40.0, [](Outcome& o) {
    for (int n : {1, 2}) {
      const auto fit = einstein_constant(fubini_study(n), 100, 101);
      o.require(std::abs(fit.c - 2 * (n + 1)) < 1e-8 && fit.max_deviation < 1e-8,
                "fs(" + std::to_string(n) + ") c=" + fmt("%.12f", fit.c) + fmt(" dev=%.1e", fit.max_deviation));
    }
    const auto flat = einstein_constant(flat_torus(1), 100, 102);
    o.require(std::abs(flat.c) < 1e-12 && flat.max_deviation < 1e-12, fmt("flat c=%.1e", flat.c));
    const auto hyp = einstein_constant(complex_hyperbolic(1), 100, 103);
    o.require(std::abs(hyp.c + 4) < 1e-8 && hyp.max_deviation < 1e-8,
              fmt("hyperbolic(1) c=%.12f", hyp.c) + fmt(" dev=%.1e", hyp.max_deviation));
  });

  criterion("AC2", "structure equations dUpsilon_0 = -i gamma ^ Upsilon_0 and d gamma = c varpi", 30.0, [](Outcome& o) {
    for (auto kind : {ModelKind::FubiniStudy, ModelKind::FlatTorus, ModelKind::ComplexHyperbolic})
      for (int n : {1, 2}) {
        const KahlerModel m = make_model(kind, n);
        const auto cert = certify_connection(m, 50, 200 + n);
        o.require(cert.upsilon_residual < 1e-8, m.name() + fmt(" upsilon=%.1e", cert.upsilon_residual));
        o.require(cert.einstein_sign_residual < 1e-8,
                  m.name() + fmt(" |d gamma - c varpi|=%.3g", cert.einstein_sign_residual) +
                      fmt(" (d gamma = %.6f varpi", cert.kappa) + fmt(", spread %.1e)", cert.kappa_deviation));
      }
  });

  criterion("AC3", "profile ODE identity and its power", 5.0, [](Outcome& o) {
    double worst = 0.0, weakest_control = 1e300;
    int cells = 0;
    for (int n : {1, 2, 3})
      for (double c : {-6.0, 0.0, 4.0, 6.0})
        for (double cp : {0.5, 1.0, 2.0}) {
          const ProfileF f(n, c, cp);
          ProfileF scaled = f, half = f;
          scaled.exponent *= 1.1;
          half.exponent = 0.5;
          const auto bound = f.domain_bound();
          const double R = bound ? 0.95 * *bound : 3.0;
          double scaled_gap = 0.0, half_gap = 0.0;
          for (int i = 0; i < 20; ++i) {
            const double r = R * i / 19.0;
            worst = std::max(worst, std::abs(f.ode_residual(r)));
            scaled_gap = std::max(scaled_gap, std::abs(scaled.ode_residual(r)));
            half_gap = std::max(half_gap, std::abs(half.ode_residual(r)));
          }
          ++cells;
          // with c = 0 every exponent gives a constant solution
          if (c != 0.0) weakest_control = std::min({weakest_control, scaled_gap, half_gap});
        }
    o.require(worst < 1e-10, std::to_string(cells) + fmt(" grids, max residual %.1e", worst));
    o.require(weakest_control > 1e-2, fmt("perturbed exponent residual >= %.3g", weakest_control));
  });

  criterion("AC4", "Kahler and Calabi-Yau structure on the total space", 180.0, [](Outcome& o) {
    struct Case {
      KahlerModel model;
      bool ricci;
    };
    for (const auto& [model, ricci] : {Case{fubini_study(1), true}, Case{fubini_study(2), false},
                                       Case{flat_torus(2), false}, Case{complex_hyperbolic(1), false},
                                       Case{flat_torus(1), true}}) {
      const CYStructure cy = make_cy_structure(model, 1.0);
      const int n = model.n();
      std::mt19937_64 rng(400 + n);
      double closure = 0.0, norm_gap = 0.0, norm = 0.0, coef_gap = 0.0;
      const bool listed = !(model.kind() == ModelKind::FlatTorus && n == 1);
      if (listed) {
        for (int i = 0; i < 50; ++i) {
          const auto u = cy.sample_point(rng);
          closure = std::max(closure, closure_residual(cy, u));
          norm = volume_norm(cy, u);
          norm_gap = std::max(norm_gap, std::abs(norm - std::pow(2.0, -0.5 * n)));
          coef_gap = std::max(coef_gap, std::abs(volume_coefficient(cy, u) - std::pow(2.0, -0.5 * n)));
        }
        o.require(closure < 1e-7, model.name() + fmt(" dPi=%.1e", closure));
        o.require(norm_gap < 1e-8, model.name() + fmt(" |Upsilon|_g=%.10f", norm) +
                                       fmt(" vs 2^{-n/2}=%.10f", std::pow(2.0, -0.5 * n)) +
                                       fmt(" (unitary coefficient gap %.1e)", coef_gap));
      }
      if (ricci) {
        const auto scan = ricci_residual(cy, 10, 410 + n);
        o.require(scan.evaluated > 0 && scan.max_residual < 1e-6,
                  model.name() + fmt(" Ricci=%.1e", scan.max_residual));
      }
    }
  });

  criterion("AC5", "special Lagrangian cone over the Legendrian lift", 60.0, [](Outcome& o) {
    for (int n : {1, 2}) {
      const auto phi = hexagonal_torus(n);
      const auto lift = legendrian_lift(CanonicalSection(phi), 0.0, 1e-8, n == 1 ? 16 : 6);
      const auto cert = slag_certificate(lift, make_cy_structure(phi.model, 1.0), 200, 500 + n);
      o.require(cert.evaluated >= 200, "hexagonal_torus(" + std::to_string(n) + ") frames=" + std::to_string(cert.evaluated));
      o.require(cert.lagrangian_residual < 1e-8, fmt("Pi|L=%.1e", cert.lagrangian_residual));
      o.require(cert.imaginary_residual < 1e-8, fmt("Im|L=%.1e", cert.imaginary_residual));
      o.require(std::abs(cert.min_ratio - 1) < 1e-6 && std::abs(cert.max_ratio - 1) < 1e-6,
                fmt("ratio in [%.10f", cert.min_ratio) + fmt(", %.10f]", cert.max_ratio));
    }
    double residual = 0.0;
    bool refused = false;
    try {
      legendrian_lift(CanonicalSection(offset_circle(2.0)));
    } catch (const MinimalityGateError& e) {
      refused = true;
      residual = e.residual();
    }
    o.require(refused && residual > 0.1, fmt("offset circle refused at the gate, residual %.3f", residual));
  });

  criterion("AC6", "Hopf holonomy of the hexagonal tori", 30.0, [](Outcome& o) {
    for (int n = 1; n <= 3; ++n) {
      const auto phi = hexagonal_torus(n);
      const Complex root = std::polar(1.0, 2 * kPi / (n + 1));
      double gen = 0.0, multiple = 0.0;
      for (int j = 0; j < n; ++j) {
        gen = std::max(gen, std::abs(hopf_holonomy(phi, Loop::generator(n, j)).value - root));
        multiple = std::max(multiple, std::abs(hopf_holonomy(phi, Loop::generator(n, j, n + 1)).value - 1.0));
      }
      const double small =
          std::abs(hopf_holonomy(phi, Loop::contractible(std::vector<double>(n, 0.4), 0.3)).value - 1.0);
      o.require(gen < 1e-6 && small < 1e-8 && multiple < 1e-6,
                "n=" + std::to_string(n) + fmt(" generator %.1e", gen) + fmt(" contractible %.1e", small) +
                    fmt(" (n+1)-fold %.1e", multiple));
    }
  });

  criterion("AC7", "cover-area law", 60.0, [](Outcome& o) {
    const auto one = lift_area(hexagonal_torus(1), 64);
    o.require(std::abs(one.ratio - 2) / 2 < 1e-3, fmt("n=1 ratio %.9f", one.ratio));
    o.require(std::abs(one.area - kPi) < 1e-6 && std::abs(one.lift_area - 2 * kPi) < 1e-6,
              fmt("area %.10f", one.area) + fmt(" lift %.10f", one.lift_area));
    const auto two = lift_area(hexagonal_torus(2), 32);
    o.require(std::abs(two.ratio - 3) / 3 < 1e-3, fmt("n=2 ratio %.9f", two.ratio));
  });

  criterion("AC8", "engine self-tests", 10.0, [](Outcome& o) {
    using namespace canonlift::testing;
    std::mt19937_64 rng(800);
    double dd = 0.0, algebra = 0.0, natural = 0.0, worst_ratio = 0.0;
    for (int dim = 2; dim <= 5; ++dim)
      for (int degree = 0; degree + 2 <= dim; ++degree) {
        const auto ddf = exterior_derivative(exterior_derivative(random_field(rng, dim, degree)));
        dd = std::max(dd, max_abs(evaluate(ddf, random_point(rng, dim))));
      }
    for (int trial = 0; trial < 20; ++trial) {
      const int dim = 3 + trial % 4;
      const int p = trial % 3, q = (trial / 3) % 2 + 1, r = 1;
      auto a = random_form(rng, dim, p), b = random_form(rng, dim, q), c = random_form(rng, dim, r);
      const double sign = (p * q) % 2 == 0 ? 1.0 : -1.0;
      algebra = std::max(algebra, max_abs(wedge(a, b) - wedge(b, a).scaled(sign)));
      algebra = std::max(algebra, max_abs(wedge(wedge(a, b), c) - wedge(a, wedge(b, c))));
    }
    for (int trial = 0; trial < 8; ++trial) {
      auto phi = random_map(rng, 2 + trial % 3, 3 + trial % 2);
      auto F = random_field(rng, phi.codomain_dim, trial % 2);
      auto x = random_point(rng, phi.domain_dim, 0.8);
      auto lhs = pullback(phi, exterior_derivative(F, ChartPoint(phi(x.coords()))), x);
      natural = std::max(natural, max_abs(lhs - exterior_derivative(pullback(phi, F), x)));
    }
    for (int trial = 0; trial < 5; ++trial) {
      auto F = random_field(rng, 3, 1);
      auto p = random_point(rng, 3);
      const auto exact = exterior_derivative(F, p);
      auto gap = [&](double h) { return max_abs(exterior_derivative(F, p, CentralDifference{h, false}) - exact); };
      const double ratio = gap(1e-2) / gap(5e-3);
      worst_ratio = std::max(worst_ratio, std::abs(ratio - 4.0) / 4.0);
    }
    o.require(dd < 1e-9, fmt("d^2=%.1e", dd));
    o.require(algebra < 1e-13, fmt("wedge=%.1e", algebra));
    o.require(natural < 1e-10, fmt("pullback naturality=%.1e", natural));
    o.require(worst_ratio < 0.15, fmt("FD halving ratio within %.1f%% of 4", 100 * worst_ratio));
  });

  criterion("AC9", "determinism of report hashes", 30.0, [](Outcome& o) {
    for (const char* command : {"verify-model", "verify-lift", "holonomy"}) {
      RunConfig cfg;
      cfg.command = command;
      cfg.n = 2;
      cfg.seed = 9;
      const auto a = run_command(cfg, false);
      const auto b = run_command(cfg, false);
      cfg.seed = 10;
      const auto c = run_command(cfg, false);
      const bool seeded = std::string(command) == "holonomy" || a.hash() != c.hash();
      o.require(a.hash() == b.hash() && seeded, std::string(command) + " " + a.hash());
    }
  });

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
