// Surfaces in a pseudo-hermitian chart: implicit level sets and graphs over
// a Darboux chart, the adapted frame (nu_h, Z, S), sub-Riemannian area,
// mean curvature and the singular set.
#pragma once

#include <array>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "subriemann/expr.hpp"
#include "subriemann/quadrature.hpp"
#include "subriemann/structure.hpp"

namespace subriemann {

class SingularPointError : public std::runtime_error {
 public:
  SingularPointError(const std::string& what, double nh) : std::runtime_error(what), nh_(nh) {}
  double nh() const { return nh_; }

 private:
  double nh_;
};

// Level set f = 0; the unit normal is orientation * grad f / |grad f| with
// the Riemannian gradient of the structure.
class ImplicitSurface {
 public:
  ImplicitSurface() = default;
  ImplicitSurface(ExprFn f, double orientation = 1.0, std::string label = {});

  const ExprJet& jet() const { return jet_; }
  const ExprFn& fn() const { return jet_.fn(); }
  double orientation() const { return orientation_; }
  const std::string& label() const { return label_; }

  // Newton steps along the coordinate gradient onto f = 0.
  Coords project(const Coords& p, double tol = 1e-14) const;

 private:
  ExprJet jet_;
  double orientation_ = 1.0;
  std::string label_;
};

// Graph t = u(x, y) over a chart with horizontal fields Z1 = d/dx + y d/dt,
// Z2 = d/dy - x d/dt, T = d/dt and metric g_ij = g(Z_i, Z_j) on span{Z1, Z2}.
class GraphSurface {
 public:
  using Metric = std::array<std::array<ExprFn, 2>, 2>;

  GraphSurface(ExprFn u, Metric metric, std::array<double, 2> x_range, std::array<double, 2> y_range,
               std::string label = {});
  // Identity metric (the Heisenberg group).
  GraphSurface(ExprFn u, std::array<double, 2> x_range, std::array<double, 2> y_range, std::string label = {});

  const ExprFn& u() const { return u_.fn(); }
  const ExprJet& u_jet() const { return u_; }
  const Metric& metric() const { return metric_; }
  const std::array<double, 2>& x_range() const { return x_range_; }
  const std::array<double, 2>& y_range() const { return y_range_; }
  const std::string& label() const { return label_; }

  // grad u + F with F(x, y) = (-y, x)
  Eigen::Vector2d w(double x, double y) const;
  Eigen::Matrix2d g(double x, double y) const;
  // smallest leading minor of g over a sample grid
  double min_leading_minor(int n = 16) const;

  // Orthonormal frame e1 = Z1/sqrt(g11), e2 = (-g12 Z1 + g11 Z2)/sqrt(g11 det g), T.
  // c1 = 2/sqrt(det g), so det g must be constant.
  Structure darboux_structure(std::array<double, 2> t_range = {-1e3, 1e3}) const;
  // f = t - u with the downward normal.
  ImplicitSurface implicit() const;

 private:
  ExprJet u_;
  Metric metric_;
  std::array<double, 2> x_range_, y_range_;
  std::string label_;
};

// Adapted data at a non-singular surface point. Vectors are frame
// components; D(...) derivatives are along a frame vector v and exact (from
// the Hessian of f), valid for v tangent to the level set.
struct SurfaceFramePoint {
  Coords point{};
  FrameGeometry geometry;
  Vec3 N = Vec3::Zero(), nu = Vec3::Zero(), Z = Vec3::Zero(), S = Vec3::Zero();
  double nh = 0.0, gNT = 0.0;
  double thetaS = 0.0, thetaZ = 0.0, H = 0.0;
  double tauZZ = 0.0, tauZnu = 0.0;
  double thetaS_identity = 0.0;  // theta(S) solved from the Z(g(N,T)) identity
  Mat3 DN = Mat3::Zero();         // column m: d/dx_m of the components of N

  Vec3 coord(const Vec3& v) const { return geometry.A.transpose() * v; }
  Vec3 dN(const Vec3& v) const { return DN * coord(v); }
  double d_nh(const Vec3& v) const;
  double d_gNT(const Vec3& v) const { return dN(v)[2]; }
  Vec3 d_nu(const Vec3& v) const;
  Vec3 d_Z(const Vec3& v) const { return geometry.J_of(d_nu(v)); }
  Vec3 d_S(const Vec3& v) const;
  // theta(v) = g(nabla_v nu_h, Z)
  double theta(const Vec3& v) const;
  // v(tau(Z, nu_h)) and v(tau(Z, Z))
  double d_tauZnu(const Vec3& v) const;
  double d_tauZZ(const Vec3& v) const;
  // Derivatives of a chart function along v, and Z(Z(u)).
  double derivative(const ExprJet& u, const Vec3& v) const;
  double second_derivative_ZZ(const ExprJet& u) const;
};

SurfaceFramePoint surface_frame(const Structure& s, const ImplicitSurface& surf, const Coords& p,
                                double eps_sing = 1e-10);

// Unit fields of the level-set foliation in chart coordinates, from the
// frame matrix and grad f only.
enum class SurfaceField { Z, S, Nu };
Vec3 surface_field_coords(const Structure& s, const ImplicitSurface& surf, const Coords& p, SurfaceField field);
// RK4 flow of a surface field for time `length`.
Coords flow_surface_field(const Structure& s, const ImplicitSurface& surf, const Coords& p, SurfaceField field,
                          double length, int steps = 1);
// First and second derivatives of q along the flow, 5-point stencil.
struct FlowDerivative {
  double first = 0.0;
  double second = 0.0;
};
FlowDerivative derivative_along(const Structure& s, const ImplicitSurface& surf, const Coords& p, SurfaceField field,
                                const std::function<double(const Coords&)>& q, double h = 1e-3);

// |g(T,E1) E2 - g(T,E2) E1| / G(E1,E2)^(1/2) for frame-component vectors.
double horizontal_jacobian(const Vec3& e1, const Vec3& e2);

// A patch of an implicit surface given by a chart-valued map of (u, v),
// expressions in the variables x (for u) and y (for v).
struct Parametrization {
  std::array<ExprFn, 3> map;
  std::array<double, 2> u_range{0.0, 1.0};
  std::array<double, 2> v_range{0.0, 1.0};
  std::vector<double> u_breaks, v_breaks;

  Coords point(double u, double v) const;
  // chart tangent vectors d/du and d/dv
  std::array<Vec3, 2> tangents(double u, double v) const;
};

struct PatchQuadrature {
  int order = 16;
  int panels_u = 4;
  int panels_v = 4;
};

// Riemannian area element of the patch in frame terms.
double area_element(const Structure& s, const Parametrization& P, double u, double v);
// Sub-Riemannian area: integral of the horizontal Jacobian.
double area_parametric(const Structure& s, const Parametrization& P, const PatchQuadrature& q = {});
// Integral of F over the patch with respect to the Riemannian area element.
double integrate_patch(const Structure& s, const Parametrization& P, const PatchQuadrature& q,
                       const std::function<double(const Coords&, double u, double v)>& F);

// Graph area integrand and its quadrature over the graph's rectangle, with
// panels graded geometrically toward singular points of the projection.
double area_graph_integrand(const GraphSurface& gs, double x, double y);
double area_graph(const GraphSurface& gs, int order = 20, int grading_levels = 30);

struct GraphMeanCurvature {
  double divergence_term = 0.0;  // -div(b w / <w, b w>^(1/2))
  double frame = 0.0;            // -g(nabla_Z nu_h, Z)
  double mu = 0.0;               // frame - divergence_term
  double rho = 0.0;              // div(b w/|w|_b) - det(g) div(w/|w|)
};
// Symbolic divergences are built once per surface.
class GraphCurvature {
 public:
  explicit GraphCurvature(const GraphSurface& gs);
  GraphMeanCurvature at(const Structure& darboux, double x, double y) const;
  double divergence_term(double x, double y) const;

 private:
  const GraphSurface* gs_;
  ExprFn div_b_, div_euclid_, det_g_;
};
GraphMeanCurvature mean_curvature_graph(const Structure& darboux, const GraphSurface& gs, double x, double y);
double mean_curvature_frame(const Structure& s, const ImplicitSurface& surf, const Coords& p);

// Roto-translation minimal surface expression for the level set of u(x, y, alpha).
double rt_minimal_residual(const ExprJet& u, const Coords& p);

// Singular set: points where (f, X f, Y f) = 0.
struct SingularLocus {
  enum class Kind { IsolatedPoint, Curve, Unclassified };
  Kind kind = Kind::Unclassified;
  std::vector<Coords> points;  // one point, or a traced polyline
  std::vector<Vec3> tangents;  // chart tangents along a curve
  int rank = 0;
  double residual = 0.0;
  std::string note;
};
std::string to_string(SingularLocus::Kind k);

struct SingularSearch {
  std::array<int, 3> grid{24, 24, 24};
  double step = 1e-2;      // continuation step
  double newton_tol = 1e-10;
  int max_curve_points = 4000;
};
std::vector<SingularLocus> singular_set_detect(const Structure& s, const ImplicitSurface& surf, const Box& region,
                                               const SingularSearch& opt = {});
// Zeros of grad u + F in the graph rectangle, classified by the rank of its Jacobian.
std::vector<SingularLocus> singular_set_graph(const GraphSurface& gs, int grid = 40);

struct StationarityReport {
  bool orthogonal = false;
  bool inconclusive = false;
  double max_deviation = 0.0;  // |pi/2 - angle(Z, curve tangent)| over sampled points and sides
  std::vector<double> deviations;
  std::string note;
};
StationarityReport stationarity_at_singular_curve(const Structure& s, const ImplicitSurface& surf,
                                                  const SingularLocus& curve, int samples = 5,
                                                  double tolerance = 1e-6);

}  // namespace subriemann
