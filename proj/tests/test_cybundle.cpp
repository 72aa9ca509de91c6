#include <doctest.h>

#include <cmath>
#include <random>

#include "canonlift/cybundle.hpp"

using namespace canonlift;

namespace {

KahlerModel model_of(int which, int n) {
  switch (which) {
    case 0: return fubini_study(n);
    case 1: return complex_hyperbolic(n);
    default: return flat_torus(n);
  }
}

}  // namespace

TEST_CASE("hermitian h: Gram route, closed form, scaling") {
  auto flat = flat_torus(1);
  CHECK(std::abs(hermitian_h(flat, ChartPoint({0.3, 1.1})) - 1.0 / flat.scale()) < 1e-13);

  for (int n = 1; n <= 2; ++n) {
    auto fs = fubini_study(n);
    const double h0 = hermitian_h(fs, ChartPoint(std::vector<double>(2 * n, 0.0)));
    std::mt19937_64 rng(n);
    for (int s = 0; s < 10; ++s) {
      auto p = fs.sample_point(rng);
      double z2 = 0.0;
      for (double c : p.coords()) z2 += c * c;
      const double h = hermitian_h(fs, p);
      CHECK(std::abs(h / h0 - std::pow(1.0 + z2, n + 1)) < 1e-10 * h / h0);
      CHECK(std::abs(h_jets(fs, seed(p.coords(), 2)).value() - h) < 1e-12 * h);
      auto doubled = fs.with_scale(2 * fs.scale());
      CHECK(std::abs(hermitian_h(doubled, p) / h - std::pow(2.0, -n)) < 1e-12);
    }
  }
}

TEST_CASE("radius of a total-space point is the base norm of the (n,0)-form") {
  auto fs = fubini_study(2);
  ChartPoint p({0.2, -0.4, 1.0, 0.3});
  CHECK(radius(fs, {p, Complex(0.0)}) == 0.0);
  const Complex w(0.7, -1.3);
  const double r = radius(fs, {p, w});
  CHECK(r > 0.0);
  auto u = holomorphic_coframe_wedge(2, 0).scaled(w);
  CHECK(std::abs(form_norm(u, metric_at(fs, p).g0) - r) < 1e-10);
}

TEST_CASE("connection form certification") {
  // flat: the connection of h vanishes; only the angular -d psi remains
  auto flat = flat_torus(2);
  auto A = base_connection_field(flat);
  CHECK(max_abs(evaluate(A, ChartPoint({0.1, 0.2, 0.3, 0.4}))) < 1e-15);

  for (int n = 1; n <= 2; ++n) {
    for (int which = 0; which < 3; ++which) {
      auto model = model_of(which, n);
      CAPTURE(model.name());
      auto conn = connection_gamma(model);
      const auto cert = certify_connection(model, 20, 77);
      CHECK(cert.upsilon_residual < 1e-8);
      CHECK(cert.kappa_deviation < 1e-8);
      // d gamma = kappa varpi with kappa = -c: opposite sign to the Einstein constant
      CHECK(std::abs(cert.kappa + model.declared_c()) < 1e-8);
      CHECK(std::abs(conn.kappa() - cert.kappa) < 1e-8);
      if (which != 2) CHECK(cert.einstein_sign_residual > 1.0);
    }
  }
}

TEST_CASE("tautological form and unitary coefficient") {
  auto fs = fubini_study(2);
  auto cy = make_cy_structure(fs);
  ChartPoint p({0.5, -0.2, 0.1, 0.9});
  CHECK(max_abs(cy.upsilon0({p, Complex(0.0)})) == 0.0);

  auto g0 = metric_at(fs, p).g0;
  const TotalSpacePoint unit = cy.point_at(p, 1.0, 0.4);
  AlternatingForm u0 = holomorphic_coframe_wedge(2, 0).scaled(unit.w);
  CHECK(std::abs(form_norm(u0, g0) - 1.0) < 1e-10);
  auto E = unitary_frame(g0, standard_complex_structure(4));
  CHECK(std::abs(std::abs(holomorphic_coefficient(u0, E)) - 0.5) < 1e-9);
}

TEST_CASE("eta0") {
  auto flat = make_cy_structure(flat_torus(1));
  auto u = flat.point_at(ChartPoint({0.4, 0.1}), 1.3, 0.7);
  auto e0 = flat.eta0(u);
  // gamma = -d psi on the flat bundle, so eta0 = dr + i r d psi = (r / w) dw
  const Complex k = 1.3 / u.w;
  CHECK(std::abs(e0[2] - k) < 1e-12);
  CHECK(std::abs(e0[3] - Complex(0.0, 1.0) * k) < 1e-12);
  CHECK(std::abs(e0[0]) < 1e-15);

  for (int which = 0; which < 3; ++which) {
    auto cy = make_cy_structure(model_of(which, 2));
    std::mt19937_64 rng(4);
    auto J = standard_complex_structure(cy.dim());
    for (int s = 0; s < 5; ++s) {
      auto v = cy.sample_point(rng);
      CHECK(type_residual(cy.eta0(v), J, 1, 0) < 1e-9);
    }
    CHECK_THROWS_AS(cy.eta0({ChartPoint({0, 0, 0, 0}), Complex(0.0)}), DomainError);
  }
}

TEST_CASE("profile: closed form solves the radial equation") {
  ProfileF flat(2, 0.0, 1.0);
  for (double r : {0.0, 1.0, 10.0}) {
    CHECK(flat.value(r) == doctest::Approx(1.0));
    CHECK(flat.ode_residual(r) == 0.0);
  }

  ProfileF sphere(1, 4.0, 1.0);
  CHECK(sphere.value(0.0) == 1.0);
  REQUIRE(sphere.domain_bound());
  CHECK(std::abs(*sphere.domain_bound() - 0.5) < 1e-15);
  CHECK_THROWS_AS(sphere.value(0.6), DomainError);

  for (int n = 1; n <= 3; ++n)
    for (double c : {-6.0, 0.0, 4.0, 6.0})
      for (double cp : {0.5, 1.0, 2.0}) {
        ProfileF f(n, c, cp);
        CAPTURE(n);
        CAPTURE(c);
        CAPTURE(cp);
        const double top = f.domain_bound() ? 0.99 * *f.domain_bound() : 50.0;
        for (double t : {0.0, 0.01, 0.1, 0.5, 1.0}) {
          const double r = t * top;
          CHECK(std::abs(f.ode_residual(r)) < 1e-10);
        }
        if (c != 0.0) {
          ProfileF printed = f;
          printed.radial_factor = (n + 2) / 2.0;
          const double r = 0.5 * (printed.domain_bound() ? *printed.domain_bound() : 1.0);
          CHECK(std::abs(printed.ode_residual(r)) > 1e-3);
        }
      }

  ProfileF neg(2, -6.0, 2.0);
  for (double r : {0.0, 0.5, 1.0, 5.0, 50.0}) CHECK(std::abs(neg.ode_residual(r)) < 1e-10);
}

TEST_CASE("profile domain law") {
  for (int n = 1; n <= 3; ++n)
    for (double c : {-6.0, -1.0, 0.0})
      for (double cp : {0.5, 1.0, 2.0}) {
        ProfileF f(n, c, cp);
        CHECK_FALSE(f.domain_bound());
        for (int k = -6; k <= 6; ++k) {
          const double r = std::pow(10.0, k);
          CHECK(f.value(r) > 0.0);
        }
      }
  for (int n = 1; n <= 3; ++n)
    for (double c : {1.0, 4.0, 6.0})
      for (double cp : {0.5, 1.0, 2.0}) {
        ProfileF f(n, c, cp);
        REQUIRE(f.domain_bound());
        CHECK(std::abs(*f.domain_bound() - std::sqrt(2 * cp / (c * (n + 1)))) < 1e-12);
      }
  CHECK_THROWS_AS(ProfileF(1, 1.0, 0.0), DomainError);
}

TEST_CASE("metric and two-form") {
  auto flat = make_cy_structure(flat_torus(1));
  auto u = flat.point_at(ChartPoint({0.0, 0.0}), 1.0, 0.0);
  auto g = flat.metric(u);
  // h = 2 and w real: dr^2 = 2 du^2, r^2 gamma^2 = 2 dv^2
  CHECK((g.topLeftCorner(2, 2) - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-14);
  CHECK(std::abs(g(2, 2) - 2.0) < 1e-14);
  CHECK(std::abs(g(3, 3) - 2.0) < 1e-14);

  auto fs = make_cy_structure(fubini_study(1));
  std::mt19937_64 rng(8);
  double min_eig = 1e300, compat = 0.0;
  for (int s = 0; s < 100; ++s) {
    auto v = fs.sample_point(rng);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fs.metric(v));
    min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
    if (s < 20) compat = std::max(compat, two_form_compatibility_residual(fs, v));
  }
  CHECK(min_eig > 0.0);
  CHECK(compat < 1e-10);
}

TEST_CASE("two-form is closed exactly for the solving profile") {
  for (int which = 0; which < 2; ++which)
    for (int n = 1; n <= 2; ++n) {
      auto model = model_of(which, n);
      CAPTURE(model.name());
      auto cy = make_cy_structure(model);
      std::mt19937_64 rng(10 + n);
      double jet = 0.0, fd = 0.0;
      for (int s = 0; s < 10; ++s) {
        auto u = cy.sample_point(rng);
        jet = std::max(jet, closure_residual(cy, u));
        fd = std::max(fd, closure_residual(cy, u, CentralDifference{}));
      }
      CHECK(jet < 1e-7);
      CHECK(fd < 1e-6);

      ProfileF bumped = cy.profile();
      bumped.multiplier = 1.01;
      ProfileF printed = cy.profile();
      printed.radial_factor = (n + 2) / 2.0;
      ProfileF einstein_sign(n, model.declared_c(), 1.0);
      for (const auto& broken : {bumped, printed, einstein_sign}) {
        CYStructure bad(cy.connection(), broken);
        std::mt19937_64 rng2(3);
        double res = 0.0;
        for (int s = 0; s < 5; ++s) res = std::max(res, closure_residual(bad, bad.sample_point(rng2)));
        CHECK(res > 1e-3);
      }
    }
}

TEST_CASE("holomorphic volume form") {
  for (int which = 0; which < 3; ++which)
    for (int n = 1; n <= 2; ++n) {
      auto cy = make_cy_structure(model_of(which, n));
      CAPTURE(cy.model().name());
      auto dU = exterior_derivative(cy.volume_field());
      auto J = standard_complex_structure(cy.dim());
      std::mt19937_64 rng(20 + n);
      double closed = 0.0, fact = 0.0, type = 0.0, lo = 1e300, hi = 0.0, coef = 0.0;
      for (int s = 0; s < 10; ++s) {
        auto u = cy.sample_point(rng);
        closed = std::max(closed, max_abs(evaluate(dU, u.coords())));
        fact = std::max(fact, volume_factorization_residual(cy, u));
        type = std::max(type, type_residual(cy.volume(u), J, n + 1, 0));
        const double nv = volume_norm(cy, u);
        lo = std::min(lo, nv);
        hi = std::max(hi, nv);
        coef = std::max(coef, std::abs(volume_coefficient(cy, u) - std::pow(2.0, -0.5 * n)));
      }
      CHECK(closed < 1e-8);
      CHECK(fact < 1e-8);
      CHECK(type < 1e-9);
      CHECK(hi - lo < 1e-8);
      CHECK(std::abs(lo - std::sqrt(2.0)) < 1e-8);
      CHECK(coef < 1e-9);
    }
}

TEST_CASE("total-space Ricci form") {
  auto flat = make_cy_structure(flat_torus(1));
  CHECK(ricci_residual(flat, 5, 1).max_residual < 1e-10);

  auto fs = make_cy_structure(fubini_study(1));
  auto scan = ricci_residual(fs, 10, 2);
  CHECK(scan.evaluated == 10);
  CHECK(scan.max_residual < 1e-6);

  // the potential metric agrees with the two-form for the solving profile
  std::mt19937_64 rng(5);
  for (int s = 0; s < 5; ++s) {
    auto u = fs.sample_point(rng);
    CHECK(max_abs(evaluate(fs.potential_form_field(), u.coords()) - fs.two_form(u)) < 1e-10);
  }

  auto fs2 = make_cy_structure(fubini_study(2));
  ProfileF wrong = fs2.profile();
  wrong.exponent = 0.5;
  CYStructure bad(fs2.connection(), wrong);
  CHECK(ricci_residual(bad, 5, 3).max_residual > 1e-2);
}
