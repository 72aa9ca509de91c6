#pragma once

// Kahler-Einstein model geometries given by a potential in one affine chart.
// Real coordinates are (x1, y1, ..., xn, yn) with z_k = x_k + i y_k.
//
//   g0 = 2 Re(g_{jk} dz^j dzbar^k),  varpi = i g_{jk} dz^j ^ dzbar^k,
//   g_{jk} = d^2 (scale K) / dz^j dzbar^k,
//
// so that g0(x, y) = varpi(x, J y) and varpi(x, y) = g0(J x, y).

#include <Eigen/Dense>
#include <random>
#include <span>
#include <string>

#include "canonlift/forms.hpp"

namespace canonlift {

enum class ModelKind { FubiniStudy, FlatTorus, ComplexHyperbolic };

std::string to_string(ModelKind kind);
/// Accepts "fs", "flat", "hyperbolic" and a few spelled-out aliases.
ModelKind parse_model_kind(const std::string& name);

class KahlerModel {
 public:
  KahlerModel(ModelKind kind, int n, double scale);

  ModelKind kind() const { return kind_; }
  int n() const { return n_; }
  int real_dim() const { return 2 * n_; }
  double scale() const { return scale_; }
  /// The Einstein constant the potential is designed to have; einstein_constant
  /// measures it independently.
  double declared_c() const;
  std::string name() const;

  /// scale * K as a jet; throws DomainError outside the chart domain.
  Jet potential(std::span<const Jet> x) const;
  bool contains(std::span<const double> p) const;
  void require_contains(std::span<const double> p) const;
  /// Coordinate box half-width used for random sampling.
  double sampling_radius() const;
  ChartPoint sample_point(std::mt19937_64& rng) const;

  KahlerModel with_scale(double scale) const { return KahlerModel(kind_, n_, scale); }

 private:
  ModelKind kind_;
  int n_;
  double scale_;
};

/// Scale 1/2 throughout, which gives c = 2(n+1) for Fubini-Study.
KahlerModel fubini_study(int n, double scale = 0.5);
KahlerModel flat_torus(int n, double scale = 0.5);
KahlerModel complex_hyperbolic(int n, double scale = 0.5);
/// Same as the factories, dispatched on kind.
KahlerModel make_model(ModelKind kind, int n, double scale = 0.5);

/// Real metric g0 from second derivatives of the potential; consumes two
/// jet orders.
JetMatrix metric_jets(const KahlerModel& model, std::span<const Jet> x);
/// log det g0; consumes two jet orders.
Jet log_det_metric(const KahlerModel& model, std::span<const Jet> x);
/// i d dbar (scale K) = 1/2 d d^c (scale K); consumes two jet orders.
JetForm kahler_form_jets(const KahlerModel& model, std::span<const Jet> x);
/// rho = -i d dbar log det(g_{jk}) = -1/4 d d^c log det g0; consumes four.
JetForm ricci_form_jets(const KahlerModel& model, std::span<const Jet> x);

FormField kahler_form_field(const KahlerModel& model);
FormField ricci_form_field(const KahlerModel& model);

struct MetricAt {
  Eigen::MatrixXd g0;
  Eigen::MatrixXd J;
};

/// Throws LinearAlgebraError when the smallest eigenvalue is below 1e-10.
MetricAt metric_at(const KahlerModel& model, const ChartPoint& p);
/// The Hermitian matrix g_{jk} itself.
Eigen::MatrixXcd hermitian_metric_at(const KahlerModel& model, const ChartPoint& p);
AlternatingForm kahler_form_at(const KahlerModel& model, const ChartPoint& p);
AlternatingForm ricci_form_at(const KahlerModel& model, const ChartPoint& p);

/// |g0(x, y) - varpi(x, J y)|.
double compatibility_residual(const KahlerModel& model, const ChartPoint& p,
                              const Eigen::VectorXd& x, const Eigen::VectorXd& y);
/// |g0(Jx, Jy) - g0(x, y)| maximized over coordinate basis pairs.
double metric_j_invariance_residual(const MetricAt& m);
/// max |omega(J., J.) - omega(., .)| over basis pairs; zero for type (1,1).
double j_invariance_residual(const AlternatingForm& omega, const Eigen::MatrixXd& J);

struct EinsteinFit {
  double c = 0.0;
  double max_deviation = 0.0;
  int samples = 0;
};

/// Least-squares c with rho ~ c varpi over random sample points.
EinsteinFit einstein_constant(const KahlerModel& model, int samples, std::uint64_t seed);

}  // namespace canonlift
