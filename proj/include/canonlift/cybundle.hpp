#pragma once

// The canonical bundle L = Lambda^{n,0} T*X of a model, charted as
// (x1, y1, ..., xn, yn, u, v) through the trivialization
//   point = w dz^1 ^ ... ^ dz^n,  w = u + i v,
// together with the Ricci-flat Kahler structure built from a radial profile.

#include <Eigen/Dense>
#include <optional>
#include <random>
#include <utility>

#include "canonlift/kahler.hpp"

namespace canonlift {

struct TotalSpacePoint {
  ChartPoint base;
  Complex w;

  /// (base coords..., Re w, Im w)
  ChartPoint coords() const;
  static TotalSpacePoint from_coords(const ChartPoint& p);
};

/// h = |dz^1 ^ ... ^ dz^n|^2 under g0, from the Gram determinant.
double hermitian_h(const KahlerModel& model, const ChartPoint& p);
/// The same quantity as 1 / det(g_{jk}) = 2^n / sqrt(det g0); consumes two orders.
Jet h_jets(const KahlerModel& model, std::span<const Jet> base);
/// r = |w| sqrt(h), as a jet in total-space coordinates; consumes two orders.
Jet radius_jets(const KahlerModel& model, std::span<const Jet> total);
double radius(const KahlerModel& model, const TotalSpacePoint& u);

/// dz^1 ^ ... ^ dz^n on the total space (or the base when extra = 0).
AlternatingForm holomorphic_coframe_wedge(int n, int extra_dims);
/// Upsilon_0 = w dz^1 ^ ... ^ dz^n on the total space.
FormField upsilon0_field(const KahlerModel& model);
/// -1/2 d^c log h on the base: the connection of h in the trivialization.
FormField base_connection_field(const KahlerModel& model);
/// gamma = -d psi - 1/2 d^c log h on the total space minus the zero section,
/// psi = arg w; consumes three orders.
JetForm gamma_jets(const KahlerModel& model, std::span<const Jet> total);
FormField gamma_field(const KahlerModel& model);
/// (x, psi) -> (x, h^{-1/2} cos psi, h^{-1/2} sin psi), onto the unit circle bundle.
SmoothMap unit_circle_chart(const KahlerModel& model);

struct ConnectionCertificate {
  int samples = 0;
  /// max |dUpsilon_0 + i gamma ^ Upsilon_0| pulled back to the unit circle bundle.
  double upsilon_residual = 0.0;
  /// Least-squares constant with d gamma = kappa varpi, and the misfit.
  double kappa = 0.0;
  double kappa_deviation = 0.0;
  /// max |d gamma - c varpi| with c the Einstein constant of the base.
  double einstein_sign_residual = 0.0;
};

ConnectionCertificate certify_connection(const KahlerModel& model, int samples,
                                         std::uint64_t seed);

class ConnectionForm {
 public:
  /// Throws CertificationError if the defining identity for Upsilon_0 or the
  /// constant-curvature identity fails beyond 1e-8.
  explicit ConnectionForm(KahlerModel model);

  const KahlerModel& model() const { return model_; }
  const ConnectionCertificate& certificate() const { return cert_; }
  double kappa() const { return cert_.kappa; }
  FormField field() const { return gamma_field(model_); }
  AlternatingForm at(const TotalSpacePoint& u) const;

 private:
  KahlerModel model_;
  ConnectionCertificate cert_;
};

ConnectionForm connection_gamma(const KahlerModel& model);

/// f(r) = m (c' - a c r^2)^e, solving  c r + (2/n) f^{2/n+1} f' = 0  for the
/// default a = (n+1)/2, e = n/(2n+2), m = 1. The other fields exist so
/// that broken profiles can be built as controls.
struct ProfileF {
  int n = 1;
  double c = 0.0;
  double c_prime = 1.0;
  double radial_factor = 1.0;
  double exponent = 0.5;
  double multiplier = 1.0;

  ProfileF() = default;
  ProfileF(int n, double c, double c_prime);

  /// Right end of the domain, or nullopt when f > 0 on all of [0, inf).
  std::optional<double> domain_bound() const;
  bool in_domain(double r) const;
  double value(double r) const;
  Jet value(const Jet& r) const;
  /// c r + (2/n) f^{2/n+1} f'(r), with f' from a jet.
  double ode_residual(double r) const;
};

class CYStructure {
 public:
  CYStructure(ConnectionForm connection, ProfileF profile);

  const KahlerModel& model() const { return connection_.model(); }
  const ConnectionForm& connection() const { return connection_; }
  const ProfileF& profile() const { return profile_; }
  int dim() const { return 2 * model().n() + 2; }

  /// Radii used for sampling: [0.1, 0.9] of the bound, or [0.1, 3].
  std::pair<double, double> radial_range() const;
  TotalSpacePoint point_at(const ChartPoint& base, double r, double psi) const;
  TotalSpacePoint sample_point(std::mt19937_64& rng) const;
  bool in_domain(const TotalSpacePoint& u) const;

  // Jet evaluators in total-space coordinates; each consumes three orders.
  JetForm eta0_jets(std::span<const Jet> x) const;
  JetMatrix metric_jets(std::span<const Jet> x) const;
  JetForm two_form_jets(std::span<const Jet> x) const;

  /// The Kahler form with potential built from the profile: for base constant
  /// c != 0, 1/2 d(P d^c t) with t = log r^2 and P = f^{2/n} / c; for c = 0,
  /// 1/2 d d^c (f^{2/n} scale K + f^{-2} r^2 / 2). Equals the two-form exactly
  /// when f solves the profile equation. Consumes four orders.
  JetForm potential_form_jets(std::span<const Jet> x) const;

  FormField eta0_field() const;
  FormField two_form_field() const;
  FormField volume_field() const;
  FormField potential_form_field() const;
  /// -1/4 d d^c log det of the metric of potential_form; consumes six orders.
  FormField ricci_field() const;

  AlternatingForm eta0(const TotalSpacePoint& u) const;
  Eigen::MatrixXd metric(const TotalSpacePoint& u) const;
  AlternatingForm two_form(const TotalSpacePoint& u) const;
  AlternatingForm upsilon0(const TotalSpacePoint& u) const;
  AlternatingForm volume(const TotalSpacePoint& u) const;

 private:
  void require_domain(const TotalSpacePoint& u) const;

  ConnectionForm connection_;
  ProfileF profile_;
};

/// Profile with c = kappa of the certified connection.
CYStructure make_cy_structure(const KahlerModel& model, double c_prime = 1.0);

/// max over coordinate pairs of |Pi(e_i, e_j) - g(J e_i, e_j)|.
double two_form_compatibility_residual(const CYStructure& cy, const TotalSpacePoint& u);
double closure_residual(const CYStructure& cy, const TotalSpacePoint& u,
                        const DifferentiationScheme& scheme = ForwardJet{});
/// max |Upsilon - eta0 ^ (w/r) dz^1 ^ ... ^ dz^n|.
double volume_factorization_residual(const CYStructure& cy, const TotalSpacePoint& u);
double volume_norm(const CYStructure& cy, const TotalSpacePoint& u);
/// |Upsilon| against the wedge of a g-unitary complex coframe.
double volume_coefficient(const CYStructure& cy, const TotalSpacePoint& u);

struct RicciScan {
  double max_residual = 0.0;
  int evaluated = 0;
  int skipped = 0;
};
RicciScan ricci_residual(const CYStructure& cy, int samples, std::uint64_t seed);

}  // namespace canonlift
