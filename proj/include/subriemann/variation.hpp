// First and second variation of the sub-Riemannian area, the index form,
// the stability operator and the quadratic form pasted across singular
// curves.
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "subriemann/surfaces.hpp"

namespace subriemann {

// A chart function with first and second derivatives.
struct ScalarField {
  std::function<double(const Coords&)> value;
  std::function<Vec3(const Coords&)> gradient;
  std::function<Mat3(const Coords&)> hessian;

  static ScalarField from_expr(const ExprFn& f);
  static ScalarField zero();
  static ScalarField constant(double c);
  // g(p) = outer(inner(p)) with a scalar profile and its first two derivatives.
  static ScalarField compose(std::function<std::array<double, 3>(double)> outer, ScalarField inner);
  friend ScalarField operator*(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator+(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator*(double c, const ScalarField& a);
};

// C2 cutoff: 1 on |t| <= inner, 0 on |t| >= outer, quintic in between.
// Returns value, first and second derivative.
std::array<double, 3> cutoff_profile(double t, double inner, double outer);
// C2 window: 1 on [a, b], 0 outside [a - ramp, b + ramp].
std::array<double, 3> window_profile(double t, double a, double b, double ramp);

// Value and derivatives of a scalar field seen from a surface point.
double along(const SurfaceFramePoint& sf, const ScalarField& u, const Vec3& v);
double along_ZZ(const SurfaceFramePoint& sf, const ScalarField& u);

// Integration over a piece of surface with respect to the Riemannian area.
class SurfaceMeasure {
 public:
  virtual ~SurfaceMeasure() = default;
  virtual double integrate(const std::function<double(const Coords&)>& F) const = 0;
};

class ParametricMeasure : public SurfaceMeasure {
 public:
  ParametricMeasure(const Structure& s, Parametrization P, PatchQuadrature q = {})
      : s_(&s), P_(std::move(P)), q_(q) {}
  double integrate(const std::function<double(const Coords&)>& F) const override;
  const Parametrization& parametrization() const { return P_; }
  const PatchQuadrature& quadrature() const { return q_; }

 private:
  const Structure* s_;
  Parametrization P_;
  PatchQuadrature q_;
};

// Characteristic coordinates F(eps, s): flow of Z for time s from a base
// curve transverse to Z. dSigma = f_eps ds deps with f_eps = |g(dF/deps, S)|.
class CharPatch : public SurfaceMeasure {
 public:
  struct Options {
    int order = 12;
    int panels_eps = 2;
    int panels_s = 2;
    double step = 2e-3;       // Z-flow step
    double fd_eps = 1e-5;     // transverse difference
  };
  CharPatch(const Structure& s, const ImplicitSurface& surf, std::array<ExprFn, 3> base, std::array<double, 2> eps_range,
            std::array<double, 2> s_range, Options opt);
  CharPatch(const Structure& s, const ImplicitSurface& surf, std::array<ExprFn, 3> base, std::array<double, 2> eps_range,
            std::array<double, 2> s_range)
      : CharPatch(s, surf, std::move(base), eps_range, s_range, Options{}) {}
  double integrate(const std::function<double(const Coords&)>& F) const override;

  struct Node {
    Coords point;
    double weight;  // quadrature weight times f_eps
    double f_eps;
    double gVT;     // g(dF/deps, T)
    double nh;
  };
  const std::vector<Node>& nodes() const { return nodes_; }

 private:
  std::vector<Node> nodes_;
};

// U = f nu_h + l Z + h T + v N.
struct VariationField {
  ScalarField f = ScalarField::zero();
  ScalarField l = ScalarField::zero();
  ScalarField h = ScalarField::zero();
  ScalarField v = ScalarField::zero();

  static VariationField normal(ScalarField u);
  static VariationField vertical(ScalarField w);
  // frame components of U and g(U, N) at a surface point
  Vec3 frame(const SurfaceFramePoint& sf) const;
  double normal_component(const SurfaceFramePoint& sf) const;
  // derivative of the frame components along the frame vector e
  Vec3 frame_derivative(const SurfaceFramePoint& sf, const Vec3& e) const;
};

// Integrand of the first variation at a non-singular point.
double first_variation_integrand(const SurfaceFramePoint& sf, const VariationField& U);
double first_variation_formula(const Structure& s, const ImplicitSurface& surf, const SurfaceMeasure& m,
                               const VariationField& U);
// -integral of g(U, N) H
double first_variation_normal(const Structure& s, const ImplicitSurface& surf, const SurfaceMeasure& m,
                              const VariationField& U);

// Area of the immersion p + eps U + eps^2/2 a over a parametrized patch,
// a the second order term of the Riemannian exponential (or zero).
struct NumericVariation {
  double epsilon = 1e-4;
  bool geodesic = true;
  // extra acceleration added to the second order term, coordinates
  std::function<Vec3(const Coords&)> acceleration;
};
double deformed_area(const Structure& s, const ImplicitSurface& surf, const ParametricMeasure& patch,
                     const VariationField& U, double eps, const NumericVariation& opt);
double first_variation_numeric(const Structure& s, const ImplicitSurface& surf, const ParametricMeasure& patch,
                               const VariationField& U, const NumericVariation& opt = {});
// Central second difference with Richardson extrapolation over eps, eps/2.
double second_variation_numeric(const Structure& s, const ImplicitSurface& surf, const ParametricMeasure& patch,
                                const VariationField& U, NumericVariation opt = {.epsilon = 1e-3});

struct SecondVariationTerms {
  double q = 0.0, xi = 0.0, zeta = 0.0, eta = 0.0;
  double u = 0.0;
  double B_ZS = 0.0;  // g(B(Z), S) with B = -D N, from the Z(g(N,T)) identity
};
double q_coefficient(const SurfaceFramePoint& sf);
SecondVariationTerms second_variation_terms(const SurfaceFramePoint& sf, double v, double w);

// Max |H| over the measure's nodes, sampled through the integrator.
double max_mean_curvature(const Structure& s, const ImplicitSurface& surf, const SurfaceMeasure& m);
class NotMinimalError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
void require_minimal(const Structure& s, const ImplicitSurface& surf, const SurfaceMeasure& m, double tol = 1e-8);

// Index form and the stability operator.
double index_form(const Structure& s, const ImplicitSurface& surf, const SurfaceMeasure& m, const ScalarField& u,
                  const ScalarField& v);
double stability_operator(const SurfaceFramePoint& sf, const ScalarField& v);
// div(|N_h|^-1 Z(v) Z) - q v, assembled from the divergence identity.
double stability_operator_divergence_form(const SurfaceFramePoint& sf, const ScalarField& v);
double minus_integral_u_L(const Structure& s, const ImplicitSurface& surf, const SurfaceMeasure& m,
                          const ScalarField& u, const ScalarField& v);

struct LNhValues {
  double path_a = 0.0;          // from theta(S), with the torsion term counted once
  double path_a_printed = 0.0;  // the displayed variant with 3 c1 g(tau(Z), nu_h)
  double path_b = 0.0;          // from Z(g(N,T)/|N_h|)
  double direct = 0.0;          // the operator applied to |N_h| with flow derivatives
  double difference = 0.0;      // path_a - path_b
};
LNhValues L_of_Nh(const Structure& s, const ImplicitSurface& surf, const Coords& p);

// Integration-by-parts and canonical-reduction residuals.
double integration_by_parts_residual(const Structure& s, const ImplicitSurface& surf, const SurfaceMeasure& m,
                                     const ScalarField& u, const ScalarField& v);
struct CanonicalReduction {
  double lhs = 0.0;  // I(u |N_h|, u |N_h|)
  double rhs = 0.0;  // integral of |N_h| (Z(u)^2 - L(|N_h|) u^2)
};
CanonicalReduction canonical_reduction(const Structure& s, const ImplicitSurface& surf, const SurfaceMeasure& m,
                                       const ScalarField& u);

// A singular curve given as a chart map of one parameter (variable x).
struct SingularCurveParam {
  std::array<ExprFn, 3> map;
  std::array<double, 2> range{0.0, 1.0};
  std::vector<double> breaks{};  // kinks of the integrands along the curve
  Coords point(double t) const;
  Vec3 tangent(double t) const;
};

// Limit of (xi + zeta)/u^2 g(Z, nu) at a point of a singular curve, from one
// side; nu is the conormal pointing away from the curve.
double singular_line_coefficient(const Structure& s, const ImplicitSurface& surf, const Coords& p,
                                 const Vec3& tangent, double side);

struct QOptions {
  double tube = 0.1;             // admissibility tube radius
  double admissibility_tol = 1e-8;
  int line_order = 24;
  int line_panels = 4;
  int admissibility_samples = 8;
};
struct QReport {
  double value = 0.0;
  double regular = 0.0;  // integral of |N_h|^-1 Z(u)^2 + q u^2
  double line = 0.0;     // sum over sides of the (xi + zeta) terms
  double tangential = 0.0;  // integral of S(u)^2 along the curves
  double max_Zu_in_tube = 0.0;
};
class InadmissibleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
QReport stability_quadratic_Q(const Structure& s, const ImplicitSurface& surf, const SurfaceMeasure& m,
                              const std::vector<SingularCurveParam>& curves, const ScalarField& u,
                              const QOptions& opt = {});

// Vertical variation w T near a singular curve.
struct SingularCurveVariation {
  double value = 0.0;
  double area_term = 0.0;
  double divergence_term = 0.0;
  double curve_term = 0.0;
};
SingularCurveVariation singular_curve_second_variation(const Structure& s, const ImplicitSurface& surf,
                                                       const SurfaceMeasure& tube,
                                                       const std::vector<SingularCurveParam>& curves,
                                                       const ScalarField& w, bool isolated_point = false,
                                                       const QOptions& opt = {});

// W - c1 g(tau(Z), nu_h), sampled.
struct SignField {
  double min = 0.0, max = 0.0;
  int samples = 0;
  std::string classification;  // "nonpositive" or "positive somewhere"
  std::vector<double> values;
};
double stability_criterion(const SurfaceFramePoint& sf);
SignField stability_sign_field(const Structure& s, const ImplicitSurface& surf, const std::vector<Coords>& points);
// Left-invariant structures: a vertical surface can have any horizontal
// normal, so the criterion is sampled over directions.
SignField stability_sign_field_directions(const Structure& s, int directions = 360);

}  // namespace subriemann
