#pragma once

// Lagrangian immersions into the models, their canonical sections and
// Legendrian lifts into the unit circle bundle, special Lagrangian
// certificates for the cone over a lift, Hopf holonomy and areas.

#include <complex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "canonlift/cybundle.hpp"

namespace canonlift {

struct LagrangianImmersion {
  std::string name;
  KahlerModel model;
  /// Parameter box; periodic domains are tori with period hi - lo.
  std::vector<double> lo, hi;
  bool periodic = true;
  /// Parameters -> model chart coordinates.
  SmoothMap map;

  int dim() const { return static_cast<int>(lo.size()); }
  std::vector<ChartPoint> grid(int per_dim) const;
  ChartPoint sample(std::mt19937_64& rng) const;
};

/// z^k = e^{i theta^k} in fubini_study(n): |z^1| = ... = |z^n| = 1.
LagrangianImmersion hexagonal_torus(int n);
/// z = radius e^{i theta} in fubini_study(1); minimal only for radius 1.
LagrangianImmersion offset_circle(double radius = 2.0);
/// x^k = theta^k, y^k = 0 in flat_torus(n).
LagrangianImmersion linear_subtorus(int n);
/// z^1 = s + i t, z^2 = 0 in fubini_study(2): a complex curve, not Lagrangian.
LagrangianImmersion complex_line();

/// Coordinate tangent vectors as columns (codomain x n).
Eigen::MatrixXd tangent_frame(const LagrangianImmersion& phi, const ChartPoint& params);
/// max |phi^* varpi| at one parameter.
double lagrangian_residual(const LagrangianImmersion& phi, const ChartPoint& params);
/// Sup of lagrangian_residual over a grid; throws DimensionError when the
/// frame degenerates somewhere.
double lagrangian_scan(const LagrangianImmersion& phi, int per_dim);

/// s = 2^{-n/2} (e_1^* + i n_1^*) ^ ... ^ (e_n^* + i n_n^*), n_k = J e_k, from
/// the g0-orthonormalized tangent frame.
class CanonicalSection {
 public:
  /// `frame_order` permutes the tangent vectors before Gram-Schmidt.
  explicit CanonicalSection(LagrangianImmersion phi, std::vector<int> frame_order = {});

  const LagrangianImmersion& immersion() const { return phi_; }
  const std::vector<int>& frame_order() const { return order_; }

  /// Coefficient w of s on dz^1 ^ ... ^ dz^n (Re, Im); consumes one order.
  std::vector<Jet> coefficient_jets(std::span<const Jet> params) const;
  Complex coefficient(const ChartPoint& params) const;
  /// s as an n-form on the base chart.
  AlternatingForm at(const ChartPoint& params) const;
  double norm(const ChartPoint& params) const;
  /// params -> total-space coordinates of e^{i phase} s.
  SmoothMap section_map(double phase = 0.0) const;

 private:
  LagrangianImmersion phi_;
  std::vector<int> order_;
};

/// Sup over the parameter grid of |s^* gamma|.
double minimality_residual(const CanonicalSection& s, int per_dim = 8);

struct LegendrianLift {
  CanonicalSection section;
  double phase = 0.0;
  double minimality = 0.0;
  SmoothMap map;
};

/// Refuses (MinimalityGateError) unless minimality_residual < gate.
LegendrianLift legendrian_lift(const CanonicalSection& s, double phase = 0.0, double gate = 1e-8,
                               int per_dim = 8);

struct SlagCertificate {
  /// sup |Pi| on orthonormal tangent frames of the cone over the lift.
  double lagrangian_residual = 0.0;
  /// phase with e^{i phase} Upsilon(frame) real positive at the first sample
  double optimal_phase = 0.0;
  /// sup |Im(e^{i phase} Upsilon(frame))|
  double imaginary_residual = 0.0;
  /// 2^{n/2} Re(e^{i phase} Upsilon(frame)) over samples
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  /// sup |arg(e^{i phase} Upsilon(frame))|
  double phase_spread = 0.0;
  int evaluated = 0;
  int skipped = 0;
};

/// Samples t e^{i lift phase} s(x) with t in the structure's radial range.
/// With `phase` given, that phase replaces the optimal one.
SlagCertificate slag_certificate(const LegendrianLift& lift, const CYStructure& cy, int samples,
                                 std::uint64_t seed, std::optional<double> phase = std::nullopt);

/// A closed parameter curve t in [0, 1] -> domain.
struct Loop {
  std::string label;
  std::function<std::vector<Jet>(const Jet& t)> path;

  /// theta = base + 2 pi t windings.
  static Loop cycle(std::vector<double> base, std::vector<int> windings);
  /// theta_j running once around, all other coordinates at 0.
  static Loop generator(int n, int j, int winding = 1);
  /// Small circle of the given radius in the (0, 1) coordinate plane (or the
  /// single coordinate line for n = 1, traversed there and back).
  static Loop contractible(std::vector<double> center, double radius);
  /// cycle() plus a periodic wiggle of the given amplitude in every coordinate.
  static Loop wiggled(std::vector<int> windings, double amplitude);
};

struct HolonomyElement {
  Complex value{1.0, 0.0};
  /// smallest k <= k_max with |value^k - 1| < tolerance
  std::optional<int> order;
  /// distance to the nearest k-th root of unity over k <= k_max
  double root_distance = 0.0;
  /// |I_2N - I_N| of the line integral
  double quadrature_error = 0.0;

  double angle() const { return std::arg(value); }
};

HolonomyElement classify_holonomy(Complex value, int k_max, double tolerance = 1e-4);

/// exp(i \oint Im<s, ds>) for s = (z, 1)/|(z, 1)|; fubini_study models only.
HolonomyElement hopf_holonomy(const LagrangianImmersion& phi, const Loop& loop, int steps = 2048,
                              double tolerance = 1e-4);

/// Riemannian area of the parameter domain under phi^* g0.
double area(const LagrangianImmersion& phi, int resolution);

struct LiftArea {
  double area = 0.0;
  /// one sheet of the horizontal lift, measured on the round sphere
  double sheet_area = 0.0;
  int sheet_count = 1;
  double lift_area = 0.0;
  double ratio = 0.0;
};

/// Horizontal lift to the sphere of radius sqrt(2 scale) over fubini_study;
/// sheet count from generator holonomies.
LiftArea lift_area(const LagrangianImmersion& phi, int resolution);

}  // namespace canonlift
