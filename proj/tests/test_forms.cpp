#include <cmath>
#include <random>

#include "canonlift/forms.hpp"
#include "doctest.h"
#include "generators.hpp"

using namespace canonlift;
using canonlift::testing::random_field;
using canonlift::testing::random_form;
using canonlift::testing::random_map;
using canonlift::testing::random_point;

namespace {

AlternatingForm dx(int dim, int i) { return AlternatingForm::basis(dim, {i}); }

}  // namespace

TEST_CASE("wedge basics") {
  auto a = wedge(dx(2, 0), dx(2, 1));
  auto b = wedge(dx(2, 1), dx(2, 0));
  CHECK(a[0] == Complex(1.0));
  CHECK(b[0] == Complex(-1.0));

  auto one = AlternatingForm::scalar(3, 1.0);
  std::mt19937_64 rng(1);
  auto w = random_form(rng, 3, 2);
  auto u = wedge(one, w);
  for (int i = 0; i < w.size(); ++i) CHECK(u[i] == w[i]);

  const Complex I(0.0, 1.0);
  auto dz = dx(2, 0) + dx(2, 1).scaled(I);
  auto dzbar = dx(2, 0) - dx(2, 1).scaled(I);
  auto prod = wedge(dz, dzbar);
  CHECK(std::abs(prod[0] - Complex(0.0, -2.0)) < 1e-15);

  CHECK_THROWS_AS(wedge(dx(2, 0), dx(3, 0)), DimensionError);
  CHECK(wedge(wedge(dx(2, 0), dx(2, 1)), dx(2, 0)).size() == 0);
}

TEST_CASE("wedge is graded commutative and associative") {
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int dim = 1; dim <= 8; ++dim) {
    for (int trial = 0; trial < 6; ++trial) {
      std::uniform_int_distribution<int> deg(0, std::min(4, dim));
      const int p = deg(rng), q = deg(rng), r = deg(rng);
      auto a = random_form(rng, dim, p), b = random_form(rng, dim, q), c = random_form(rng, dim, r);
      const double sign = (p * q) % 2 == 0 ? 1.0 : -1.0;
      worst = std::max(worst, max_abs(wedge(a, b) - wedge(b, a).scaled(sign)));
      worst = std::max(worst, max_abs(wedge(wedge(a, b), c) - wedge(a, wedge(b, c))));
    }
  }
  CHECK(worst < 1e-13);
}

TEST_CASE("exterior derivative of x dy is dx ^ dy") {
  FormField f;
  f.dim = 2;
  f.degree = 1;
  f.eval = [](std::span<const Jet> x) {
    JetForm out(2, 1);
    out[1] = CJet(x[0]);
    return out;
  };
  auto df = exterior_derivative(f, ChartPoint({0.3, -0.4}));
  CHECK(std::abs(df[0] - Complex(1.0)) < 1e-15);
  auto df_fd = exterior_derivative(f, ChartPoint({0.3, -0.4}), CentralDifference{});
  CHECK(std::abs(df_fd[0] - Complex(1.0)) < 1e-9);
}

TEST_CASE("d of d f vanishes for sin(x) y") {
  FormField f;
  f.dim = 2;
  f.degree = 0;
  f.eval = [](std::span<const Jet> x) { return JetForm::scalar(2, CJet(sin(x[0]) * x[1])); };
  auto ddf = evaluate(exterior_derivative(exterior_derivative(f)), ChartPoint({0.8, 1.9}));
  CHECK(max_abs(ddf) < 1e-10);
}

TEST_CASE("d squared vanishes on random fields") {
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int dim = 2; dim <= 5; ++dim)
    for (int degree = 0; degree + 2 <= dim; ++degree) {
      auto f = random_field(rng, dim, degree);
      auto ddf = exterior_derivative(exterior_derivative(f));
      for (int s = 0; s < 3; ++s) worst = std::max(worst, max_abs(evaluate(ddf, random_point(rng, dim))));
    }
  CHECK(worst < 1e-9);
}

TEST_CASE("pullback: identity, degree overflow, naturality") {
  std::mt19937_64 rng(3);
  SmoothMap id{3, 3, [](std::span<const Jet> x) { return std::vector<Jet>(x.begin(), x.end()); }};
  auto w = random_form(rng, 3, 2);
  auto p = random_point(rng, 3);
  CHECK(max_abs(pullback(id, w, p) - w) < 1e-15);

  SmoothMap curve{1, 3, [](std::span<const Jet> t) { return std::vector<Jet>{t[0], t[0] * t[0], sin(t[0])}; }};
  auto two = pullback(curve, w, ChartPoint({0.2}));
  CHECK(two.degree() == 2);
  CHECK(two.size() == 0);

  double jet_worst = 0.0, fd_worst = 0.0;
  for (int trial = 0; trial < 8; ++trial) {
    const int from = 2 + trial % 3, to = 3 + trial % 2, degree = trial % 2;
    auto phi = random_map(rng, from, to);
    auto F = random_field(rng, to, degree);
    auto x = random_point(rng, from, 0.8);
    auto lhs = pullback(phi, exterior_derivative(F, ChartPoint(phi(x.coords()))), x);
    auto pulled = pullback(phi, F);
    auto rhs_jet = exterior_derivative(pulled, x);
    auto rhs_fd = exterior_derivative(pulled, x, CentralDifference{});
    jet_worst = std::max(jet_worst, max_abs(lhs - rhs_jet));
    fd_worst = std::max(fd_worst, max_abs(lhs - rhs_fd));
  }
  CHECK(jet_worst < 1e-10);
  CHECK(fd_worst < 1e-7);
}

TEST_CASE("central differences converge at second order") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    auto F = random_field(rng, 3, 1);
    auto p = random_point(rng, 3);
    auto exact = exterior_derivative(F, p);
    const double h = 1e-2;
    auto gap = [&](double step) {
      return max_abs(exterior_derivative(F, p, CentralDifference{step, false}) - exact);
    };
    const double ratio = gap(h) / gap(h / 2);
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.15));
  }
}

TEST_CASE("metric dual and sharp") {
  Eigen::Vector2d e1(1.0, 0.0);
  auto a = metric_dual(e1, Eigen::Matrix2d::Identity());
  CHECK(a[0] == Complex(1.0));
  CHECK(a[1] == Complex(0.0));
  auto b = metric_dual(e1, 4.0 * Eigen::Matrix2d::Identity());
  CHECK(b[0] == Complex(4.0));

  std::mt19937_64 rng(2);
  Eigen::MatrixXd m = Eigen::MatrixXd::Random(4, 4);
  Eigen::MatrixXd g = m * m.transpose() + Eigen::MatrixXd::Identity(4, 4);
  Eigen::VectorXd v = Eigen::VectorXd::Random(4);
  CHECK((metric_sharp(metric_dual(v, g), g) - v).norm() < 1e-12);

  Eigen::Matrix2d singular;
  singular << 1, 1, 1, 1;
  CHECK_THROWS_AS(metric_dual(e1, singular), LinearAlgebraError);
}

TEST_CASE("form norms") {
  const Eigen::Matrix2d I2 = Eigen::Matrix2d::Identity();
  auto area = wedge(dx(2, 0), dx(2, 1));
  CHECK(form_norm(area, I2) == doctest::Approx(1.0));
  CHECK(form_norm(area.scaled(2.0), I2) == doctest::Approx(2.0));

  // A unitary coframe eta^k = e_k^* + i (J e_k)^* of a random Hermitian
  // metric has |eta^1 ^ ... ^ eta^n| = 2^{n/2}.
  for (int n = 1; n <= 3; ++n) {
    const int m = 2 * n;
    Eigen::MatrixXd J = standard_complex_structure(m);
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(m, m);
    Eigen::MatrixXd s = a * a.transpose() + Eigen::MatrixXd::Identity(m, m);
    Eigen::MatrixXd g = 0.5 * (s + J.transpose() * s * J);  // J-invariant
    std::vector<Eigen::VectorXd> frame;
    for (int k = 0; k < n; ++k) {
      Eigen::VectorXd v = Eigen::VectorXd::Unit(m, 2 * k) + 0.3 * Eigen::VectorXd::Random(m);
      for (const auto& u : frame) v -= (u.transpose() * g * v)(0) * u;
      v /= std::sqrt((v.transpose() * g * v)(0));
      Eigen::VectorXd jv = J * v;
      frame.push_back(v);
      frame.push_back(jv);
    }
    AlternatingForm top = AlternatingForm::scalar(m, 1.0);
    for (int k = 0; k < n; ++k) {
      auto eta = metric_dual(frame[2 * k], g) + metric_dual(frame[2 * k + 1], g).scaled(Complex(0.0, 1.0));
      top = wedge(top, eta);
    }
    CHECK(form_norm(top, g) == doctest::Approx(std::pow(2.0, n / 2.0)).epsilon(1e-12));
  }
}

TEST_CASE("complex type and unitary frames") {
  const Complex I(0.0, 1.0);
  auto J = standard_complex_structure(4);
  auto dz1 = dx(4, 0) + dx(4, 1).scaled(I);
  auto dz2 = dx(4, 2) + dx(4, 3).scaled(I);
  CHECK(type_residual(dz1, J, 1, 0) < 1e-15);
  CHECK(type_residual(conj(dz1), J, 0, 1) < 1e-15);
  CHECK(type_residual(wedge(dz1, conj(dz2)), J, 1, 1) < 1e-15);
  CHECK(type_residual(wedge(dz1, dz2), J, 2, 0) < 1e-15);
  CHECK(type_residual(wedge(dz1, dz2), J, 1, 1) > 1.0);

  Eigen::MatrixXcd H = Eigen::MatrixXcd::Identity(2, 2);
  H(0, 1) = Complex(0.3, 0.2);
  H(1, 0) = std::conj(H(0, 1));
  Eigen::MatrixXd g(4, 4);
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) {
      g(2 * j, 2 * k) = g(2 * j + 1, 2 * k + 1) = H(j, k).real();
      g(2 * j, 2 * k + 1) = H(j, k).imag();
      g(2 * j + 1, 2 * k) = -H(j, k).imag();
    }
  auto E = unitary_frame(g, J);
  CHECK((E.transpose() * g * E - Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-13);
  // a unitary coframe wedge has coefficient 1 on itself
  Eigen::MatrixXd theta = E.inverse();
  auto zeta = [&](int k) {
    AlternatingForm f(4, 1);
    for (int i = 0; i < 4; ++i) f[i] = Complex(theta(2 * k, i), theta(2 * k + 1, i));
    return f;
  };
  auto vol = wedge(zeta(0), zeta(1));
  CHECK(std::abs(holomorphic_coefficient(vol, E) - 1.0) < 1e-13);
  CHECK(std::abs(form_norm(vol, g) - 2.0) < 1e-13);
}

TEST_CASE("compose_local differentiates through substituted arguments") {
  // f(a, b) = d/da (a^3) * b along a = t^2, b = t at t = 1.5
  auto fx = [](std::span<const Jet> x) { return (x[0] * x[0] * x[0]).derivative(0) * x[1]; };
  auto t = seed(std::vector<double>{1.5}, 2);
  std::vector<Jet> args{t[0] * t[0], t[0]};
  Jet out = compose_local(fx, 1, args);
  // 3 t^4 * t = 3 t^5
  CHECK(std::abs(out.value() - 3 * std::pow(1.5, 5)) < 1e-12);
  CHECK(std::abs(out.gradient(0) - 15 * std::pow(1.5, 4)) < 1e-11);
}
