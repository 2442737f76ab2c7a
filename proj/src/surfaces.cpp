#include "subriemann/surfaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "subriemann/parallel.hpp"

namespace subriemann {

namespace {

Vec3 grad_vec(const ExprJet& j, const Coords& p) {
  const auto g = j.gradient(p);
  return {g[0], g[1], g[2]};
}

Mat3 hess_mat(const ExprJet& j, const Coords& p) {
  const auto h = j.hessian(p);
  Mat3 m;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) m(a, b) = h[a][b];
  return m;
}

void require_chart(const Structure& s) {
  if (s.kind() != Structure::Kind::CoordinateFrame)
    throw std::invalid_argument("surfaces need a structure given by a coordinate frame");
}

}  // namespace

ImplicitSurface::ImplicitSurface(ExprFn f, double orientation, std::string label)
    : jet_(std::move(f)), orientation_(orientation >= 0.0 ? 1.0 : -1.0), label_(std::move(label)) {}

Coords ImplicitSurface::project(const Coords& p, double tol) const {
  Coords q = p;
  for (int it = 0; it < 50; ++it) {
    const double v = jet_.value(q);
    if (std::abs(v) <= tol) break;
    const Vec3 g = grad_vec(jet_, q);
    const double n2 = g.squaredNorm();
    if (n2 == 0.0) throw DomainError("vanishing gradient while projecting onto the surface");
    for (int i = 0; i < 3; ++i) q[i] -= v * g[i] / n2;
  }
  return q;
}

// ---------------------------------------------------------------- graphs

GraphSurface::GraphSurface(ExprFn u, Metric metric, std::array<double, 2> x_range, std::array<double, 2> y_range,
                           std::string label)
    : u_(std::move(u)), metric_(std::move(metric)), x_range_(x_range), y_range_(y_range), label_(std::move(label)) {
  if (u_.fn().depends_on(2)) throw std::invalid_argument("graph function must depend on x and y only");
  if (min_leading_minor() <= 0.0) throw std::invalid_argument("graph metric is not positive definite");
}

GraphSurface::GraphSurface(ExprFn u, std::array<double, 2> x_range, std::array<double, 2> y_range, std::string label)
    : GraphSurface(std::move(u),
                   Metric{{{ExprFn::constant(1.0), ExprFn::constant(0.0)}, {ExprFn::constant(0.0), ExprFn::constant(1.0)}}},
                   x_range, y_range, std::move(label)) {}

Eigen::Vector2d GraphSurface::w(double x, double y) const {
  const auto g = u_.gradient({x, y, 0.0});
  return {g[0] - y, g[1] + x};
}

Eigen::Matrix2d GraphSurface::g(double x, double y) const {
  Eigen::Matrix2d m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m(i, j) = metric_[i][j]({x, y, 0.0});
  return m;
}

double GraphSurface::min_leading_minor(int n) const {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      const double x = x_range_[0] + (x_range_[1] - x_range_[0]) * i / n;
      const double y = y_range_[0] + (y_range_[1] - y_range_[0]) * j / n;
      const Eigen::Matrix2d m = g(x, y);
      best = std::min({best, m(0, 0), m.determinant()});
    }
  return best;
}

Structure GraphSurface::darboux_structure(std::array<double, 2> t_range) const {
  const ExprFn x = ExprFn::variable(0), y = ExprFn::variable(1);
  const ExprFn one = ExprFn::constant(1.0), zero;
  const std::array<ExprFn, 3> Z1{one, zero, y}, Z2{zero, one, -x};
  const ExprFn& g11 = metric_[0][0];
  const ExprFn& g12 = metric_[0][1];
  const ExprFn det = g11 * metric_[1][1] - g12 * metric_[0][1];
  const ExprFn s1 = sqrt(g11);
  const ExprFn s2 = sqrt(g11 * det);
  Structure::FrameExprs rows;
  for (int k = 0; k < 3; ++k) {
    rows[0][k] = Z1[k] / s1;
    rows[1][k] = (g11 * Z2[k] - g12 * Z1[k]) / s2;
    rows[2][k] = k == 2 ? one : zero;
  }
  Box box{{x_range_[0], y_range_[0], t_range[0]}, {x_range_[1], y_range_[1], t_range[1]}};
  return Structure::from_frame(rows, box, label_.empty() ? "darboux" : label_ + "-darboux");
}

ImplicitSurface GraphSurface::implicit() const {
  return ImplicitSurface(ExprFn::variable(2) - u_.fn(), -1.0, label_);
}

// ---------------------------------------------------------------- frame

double SurfaceFramePoint::d_nh(const Vec3& v) const {
  const Vec3 d = dN(v);
  return nu[0] * d[0] + nu[1] * d[1];
}

Vec3 SurfaceFramePoint::d_nu(const Vec3& v) const {
  const Vec3 d = dN(v);
  const double along = nu[0] * d[0] + nu[1] * d[1];
  return {(d[0] - along * nu[0]) / nh, (d[1] - along * nu[1]) / nh, 0.0};
}

Vec3 SurfaceFramePoint::d_S(const Vec3& v) const {
  Vec3 out = d_gNT(v) * nu + gNT * d_nu(v);
  out[2] -= d_nh(v);
  return out;
}

double SurfaceFramePoint::theta(const Vec3& v) const { return Z.dot(geometry.nabla(v, nu, d_nu(v))); }

double SurfaceFramePoint::d_tauZnu(const Vec3& v) const {
  const Mat3& t = geometry.tau;
  return Z.dot(geometry.tau_derivative(v) * nu) + d_Z(v).dot(t * nu) + Z.dot(t * d_nu(v));
}

double SurfaceFramePoint::d_tauZZ(const Vec3& v) const {
  const Mat3& t = geometry.tau;
  return Z.dot(geometry.tau_derivative(v) * Z) + 2.0 * d_Z(v).dot(t * Z);
}

double SurfaceFramePoint::derivative(const ExprJet& u, const Vec3& v) const {
  return grad_vec(u, point).dot(coord(v));
}

double SurfaceFramePoint::second_derivative_ZZ(const ExprJet& u) const {
  const Vec3 c = coord(Z);
  Vec3 dc = geometry.A.transpose() * d_Z(Z);
  for (int m = 0; m < 3; ++m) dc += c[m] * (geometry.dA[m].transpose() * Z);
  return c.dot(hess_mat(u, point) * c) + grad_vec(u, point).dot(dc);
}

SurfaceFramePoint surface_frame(const Structure& s, const ImplicitSurface& surf, const Coords& p, double eps_sing) {
  require_chart(s);
  SurfaceFramePoint sf;
  sf.point = p;
  sf.geometry = s.at(p, Structure::Detail::Full);
  const FrameGeometry& g = sf.geometry;
  const Vec3 grad = grad_vec(surf.jet(), p);
  const Mat3 hess = hess_mat(surf.jet(), p);
  const Vec3 phi = g.A * grad;
  const double len = phi.norm();
  if (len == 0.0) throw DomainError("vanishing gradient of the defining function");
  Mat3 Dphi;
  for (int m = 0; m < 3; ++m) Dphi.col(m) = g.dA[m] * grad + g.A * hess.col(m);
  const Vec3 n = phi / len;
  const double sigma = surf.orientation();
  sf.N = sigma * n;
  sf.DN = sigma * (Mat3::Identity() - n * n.transpose()) * Dphi / len;
  sf.nh = std::hypot(sf.N[0], sf.N[1]);
  sf.gNT = sf.N[2];
  if (sf.nh <= eps_sing) throw SingularPointError("singular point of the surface", sf.nh);
  sf.nu = {sf.N[0] / sf.nh, sf.N[1] / sf.nh, 0.0};
  sf.Z = g.J_of(sf.nu);
  sf.S = sf.gNT * sf.nu;
  sf.S[2] = -sf.nh;
  sf.thetaS = sf.theta(sf.S);
  sf.thetaZ = sf.theta(sf.Z);
  sf.H = -sf.thetaZ;
  sf.tauZZ = g.tau_form(sf.Z, sf.Z);
  sf.tauZnu = g.tau_form(sf.Z, sf.nu);
  const double ZgNT = sf.d_gNT(sf.Z);
  sf.thetaS_identity =
      (-g.c1 * sf.gNT * sf.gNT + sf.nh * sf.nh * sf.tauZnu - ZgNT / sf.nh) / sf.nh;
  return sf;
}

double mean_curvature_frame(const Structure& s, const ImplicitSurface& surf, const Coords& p) {
  return surface_frame(s, surf, p).H;
}

// ---------------------------------------------------------------- flows

Vec3 surface_field_coords(const Structure& s, const ImplicitSurface& surf, const Coords& p, SurfaceField field) {
  const Mat3 A = s.frame_matrix(p);
  const Vec3 phi = A * grad_vec(surf.jet(), p);
  const Vec3 N = surf.orientation() * phi / phi.norm();
  const double nh = std::hypot(N[0], N[1]);
  if (nh == 0.0) throw SingularPointError("surface field undefined at a singular point", nh);
  const Vec3 nu{N[0] / nh, N[1] / nh, 0.0};
  Vec3 v;
  switch (field) {
    case SurfaceField::Z: {
      // J(nu) with sign(c1) = +1
      v = {-nu[1], nu[0], 0.0};
      break;
    }
    case SurfaceField::S:
      v = N[2] * nu;
      v[2] = -nh;
      break;
    case SurfaceField::Nu:
      v = nu;
      break;
  }
  return A.transpose() * v;
}

Coords flow_surface_field(const Structure& s, const ImplicitSurface& surf, const Coords& p, SurfaceField field,
                          double length, int steps) {
  Vec3 x = to_vec(p);
  const double h = length / steps;
  auto f = [&](const Vec3& q) { return surface_field_coords(s, surf, to_coords(q), field); };
  for (int i = 0; i < steps; ++i) {
    const Vec3 k1 = f(x);
    const Vec3 k2 = f(x + 0.5 * h * k1);
    const Vec3 k3 = f(x + 0.5 * h * k2);
    const Vec3 k4 = f(x + h * k3);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return to_coords(x);
}

FlowDerivative derivative_along(const Structure& s, const ImplicitSurface& surf, const Coords& p, SurfaceField field,
                                const std::function<double(const Coords&)>& q, double h) {
  const double f0 = q(p);
  const double fp1 = q(flow_surface_field(s, surf, p, field, h, 1));
  const double fm1 = q(flow_surface_field(s, surf, p, field, -h, 1));
  const double fp2 = q(flow_surface_field(s, surf, p, field, 2.0 * h, 2));
  const double fm2 = q(flow_surface_field(s, surf, p, field, -2.0 * h, 2));
  FlowDerivative d;
  d.first = (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
  d.second = (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h);
  return d;
}

// ---------------------------------------------------------------- area

double horizontal_jacobian(const Vec3& e1, const Vec3& e2) {
  const double G = e1.squaredNorm() * e2.squaredNorm() - std::pow(e1.dot(e2), 2);
  const double scale = e1.squaredNorm() * e2.squaredNorm();
  if (!(G > 1e-15 * scale) || scale == 0.0) throw std::invalid_argument("degenerate tangent basis");
  return (e1[2] * e2 - e2[2] * e1).norm() / std::sqrt(G);
}

Coords Parametrization::point(double u, double v) const {
  const Coords q{u, v, 0.0};
  return {map[0](q), map[1](q), map[2](q)};
}

std::array<Vec3, 2> Parametrization::tangents(double u, double v) const {
  const Coords q{u, v, 0.0};
  std::array<Vec3, 2> t;
  for (int k = 0; k < 3; ++k) {
    t[0][k] = map[k].derivative(0)(q);
    t[1][k] = map[k].derivative(1)(q);
  }
  return t;
}

namespace {

std::array<Vec3, 2> frame_tangents(const Structure& s, const Parametrization& P, double u, double v) {
  const auto t = P.tangents(u, v);
  const Mat3 A = s.frame_matrix(P.point(u, v));
  const Mat3 AinvT = A.inverse().transpose();
  return {AinvT * t[0], AinvT * t[1]};
}

}  // namespace

double area_element(const Structure& s, const Parametrization& P, double u, double v) {
  const auto e = frame_tangents(s, P, u, v);
  return std::sqrt(std::max(0.0, e[0].squaredNorm() * e[1].squaredNorm() - std::pow(e[0].dot(e[1]), 2)));
}

double integrate_patch(const Structure& s, const Parametrization& P, const PatchQuadrature& q,
                       const std::function<double(const Coords&, double, double)>& F) {
  const QuadratureRule ru = composite_rule(P.u_range[0], P.u_range[1], q.order, q.panels_u, P.u_breaks);
  const QuadratureRule rv = composite_rule(P.v_range[0], P.v_range[1], q.order, q.panels_v, P.v_breaks);
  return integrate_2d(ru, rv, [&](double u, double v) {
    return F(P.point(u, v), u, v) * area_element(s, P, u, v);
  });
}

double area_parametric(const Structure& s, const Parametrization& P, const PatchQuadrature& q) {
  const QuadratureRule ru = composite_rule(P.u_range[0], P.u_range[1], q.order, q.panels_u, P.u_breaks);
  const QuadratureRule rv = composite_rule(P.v_range[0], P.v_range[1], q.order, q.panels_v, P.v_breaks);
  return integrate_2d(ru, rv, [&](double u, double v) {
    const auto e = frame_tangents(s, P, u, v);
    const double G = e[0].squaredNorm() * e[1].squaredNorm() - std::pow(e[0].dot(e[1]), 2);
    if (G <= 0.0) return 0.0;
    return horizontal_jacobian(e[0], e[1]) * std::sqrt(G);
  });
}

double area_graph_integrand(const GraphSurface& gs, double x, double y) {
  const Eigen::Vector2d w = gs.w(x, y);
  const Eigen::Matrix2d g = gs.g(x, y);
  const double wbw = w.dot(g.inverse() * w);
  const double det = (g + w * w.transpose()).determinant();
  return std::sqrt(wbw) * std::sqrt(det) / std::sqrt(1.0 + wbw);
}

namespace {

std::vector<double> graded_breaks(double lo, double hi, const std::vector<double>& centers, int levels) {
  std::vector<double> cuts;
  for (double c : centers) {
    if (c < lo - 1e-12 || c > hi + 1e-12) continue;
    cuts.push_back(c);
    for (double side : {lo, hi}) {
      const double span = side - c;
      for (int k = 1; k <= levels; ++k) cuts.push_back(c + span * std::ldexp(1.0, -k));
    }
  }
  return cuts;
}

}  // namespace

double area_graph(const GraphSurface& gs, int order, int grading_levels) {
  const auto& xr = gs.x_range();
  const auto& yr = gs.y_range();
  if (xr[1] == xr[0] || yr[1] == yr[0]) return 0.0;
  std::vector<double> cx, cy;
  for (const auto& locus : singular_set_graph(gs)) {
    if (locus.kind != SingularLocus::Kind::IsolatedPoint) continue;
    cx.push_back(locus.points[0][0]);
    cy.push_back(locus.points[0][1]);
  }
  const auto bx = graded_breaks(xr[0], xr[1], cx, grading_levels);
  const auto by = graded_breaks(yr[0], yr[1], cy, grading_levels);
  const QuadratureRule rx = composite_rule(xr[0], xr[1], order, 1, bx);
  const QuadratureRule ry = composite_rule(yr[0], yr[1], order, 1, by);
  return integrate_2d(rx, ry, [&](double x, double y) { return area_graph_integrand(gs, x, y); });
}

// ---------------------------------------------------------------- mean curvature of graphs

GraphCurvature::GraphCurvature(const GraphSurface& gs) : gs_(&gs) {
  const ExprFn x = ExprFn::variable(0), y = ExprFn::variable(1);
  const ExprFn w1 = gs.u().derivative(0) - y;
  const ExprFn w2 = gs.u().derivative(1) + x;
  const auto& g = gs.metric();
  det_g_ = g[0][0] * g[1][1] - g[0][1] * g[1][0];
  const ExprFn b11 = g[1][1] / det_g_, b12 = -g[0][1] / det_g_, b22 = g[0][0] / det_g_;
  const ExprFn bw1 = b11 * w1 + b12 * w2;
  const ExprFn bw2 = b12 * w1 + b22 * w2;
  const ExprFn nb = sqrt(w1 * bw1 + w2 * bw2);
  div_b_ = (bw1 / nb).derivative(0) + (bw2 / nb).derivative(1);
  const ExprFn ne = sqrt(w1 * w1 + w2 * w2);
  div_euclid_ = (w1 / ne).derivative(0) + (w2 / ne).derivative(1);
}

double GraphCurvature::divergence_term(double x, double y) const { return -div_b_({x, y, 0.0}); }

GraphMeanCurvature GraphCurvature::at(const Structure& darboux, double x, double y) const {
  GraphMeanCurvature out;
  const Coords q{x, y, 0.0};
  out.divergence_term = -div_b_(q);
  out.rho = div_b_(q) - det_g_(q) * div_euclid_(q);
  const Coords p{x, y, gs_->u()(q)};
  out.frame = surface_frame(darboux, gs_->implicit(), p).H;
  out.mu = out.frame - out.divergence_term;
  return out;
}

GraphMeanCurvature mean_curvature_graph(const Structure& darboux, const GraphSurface& gs, double x, double y) {
  if (gs.w(x, y).norm() <= 1e-10) throw SingularPointError("point projects onto the singular set", 0.0);
  return GraphCurvature(gs).at(darboux, x, y);
}

// ---------------------------------------------------------------- roto-translation

double rt_minimal_residual(const ExprJet& u, const Coords& p) {
  const auto g = u.gradient(p);
  const auto h = u.hessian(p);
  if (std::hypot(g[0], g[1], g[2]) == 0.0) throw DomainError("vanishing gradient");
  const double c = std::cos(p[2]), s = std::sin(p[2]);
  const double ux = g[0], uy = g[1], ua = g[2];
  const double uxx = h[0][0], uxy = h[0][1], uyy = h[1][1], uaa = h[2][2], uax = h[2][0], uay = h[2][1];
  const double L = c * ux + s * uy;
  return ua * ua * (c * c * uxx + 2.0 * c * s * uxy + s * s * uyy) + L * L * uaa -
         ua * L * (2.0 * c * uax + 2.0 * s * uay - s * ux + c * uy);
}

// ---------------------------------------------------------------- singular set

std::string to_string(SingularLocus::Kind k) {
  switch (k) {
    case SingularLocus::Kind::IsolatedPoint:
      return "isolated-point";
    case SingularLocus::Kind::Curve:
      return "curve";
    case SingularLocus::Kind::Unclassified:
      return "unclassified";
  }
  return "unclassified";
}

namespace {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

struct ZeroProblem {
  int dim = 3;
  std::function<VecX(const VecX&)> G;
  std::function<MatX(const VecX&)> J;
  VecX lo, hi;

  bool inside(const VecX& x, double slack = 0.0) const {
    for (int i = 0; i < dim; ++i)
      if (x[i] < lo[i] - slack || x[i] > hi[i] + slack) return false;
    return true;
  }
};

int numeric_rank(const MatX& J, VecX* kernel) {
  Eigen::JacobiSVD<MatX> svd(J, Eigen::ComputeFullV);
  const VecX sv = svd.singularValues();
  const double tol = 1e-8 * std::max(1.0, sv.size() ? sv[0] : 0.0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > tol) ++rank;
  if (kernel) *kernel = svd.matrixV().col(J.cols() - 1);
  return rank;
}

bool gauss_newton(const ZeroProblem& zp, VecX& x, double tol, double* residual) {
  for (int it = 0; it < 60; ++it) {
    const VecX g = zp.G(x);
    if (residual) *residual = g.norm();
    if (g.norm() <= tol) return true;
    const MatX J = zp.J(x);
    const VecX dx = J.completeOrthogonalDecomposition().solve(-g);
    x += dx;
    if (!std::isfinite(x.norm())) return false;
  }
  const double r = zp.G(x).norm();
  if (residual) *residual = r;
  return r <= tol;
}

double distance_to_locus(const VecX& x, const std::vector<VecX>& pts) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) best = std::min(best, (p - x).norm());
  return best;
}

std::vector<VecX> trace_direction(const ZeroProblem& zp, VecX x, VecX t, double h, double tol, int max_points,
                                  const VecX& start, bool* closed) {
  std::vector<VecX> out;
  for (int k = 0; k < max_points; ++k) {
    VecX y = x + h * t;
    if (!gauss_newton(zp, y, tol, nullptr)) break;
    if (!zp.inside(y)) break;
    VecX tn;
    if (numeric_rank(zp.J(y), &tn) != zp.dim - 1) break;
    if (tn.dot(t) < 0.0) tn = -tn;
    out.push_back(y);
    if (k > 3 && (y - start).norm() < 0.75 * h) {
      *closed = true;
      break;
    }
    x = y;
    t = tn;
  }
  return out;
}

std::vector<SingularLocus> detect(const ZeroProblem& zp, const std::vector<int>& grid, const SingularSearch& opt,
                                  const std::function<Coords(const VecX&)>& to_chart,
                                  const std::function<Vec3(const VecX&, const VecX&)>& to_tangent) {
  const int n = zp.dim;
  std::vector<int> strides(n, 1);
  for (int i = 1; i < n; ++i) strides[i] = strides[i - 1] * (grid[i - 1] + 1);
  const int total = strides[n - 1] * (grid[n - 1] + 1);
  auto node = [&](int idx) {
    VecX x(n);
    for (int i = 0; i < n; ++i) {
      const int k = (idx / strides[i]) % (grid[i] + 1);
      x[i] = zp.lo[i] + (zp.hi[i] - zp.lo[i]) * k / grid[i];
    }
    return x;
  };
  const std::vector<double> values =
      parallel_map<double>(static_cast<std::size_t>(total), [&](std::size_t i) { return zp.G(node(static_cast<int>(i))).norm(); });
  std::vector<std::pair<double, int>> candidates;
  for (int idx = 0; idx < total; ++idx) {
    bool minimum = true;
    for (int i = 0; i < n && minimum; ++i) {
      const int k = (idx / strides[i]) % (grid[i] + 1);
      if (k > 0 && values[idx - strides[i]] < values[idx]) minimum = false;
      if (k < grid[i] && values[idx + strides[i]] < values[idx]) minimum = false;
    }
    if (minimum) candidates.emplace_back(values[idx], idx);
  }
  std::sort(candidates.begin(), candidates.end());

  std::vector<SingularLocus> loci;
  std::vector<std::vector<VecX>> traced;
  for (const auto& [value, idx] : candidates) {
    VecX x = node(idx);
    double residual = 0.0;
    if (!gauss_newton(zp, x, opt.newton_tol, &residual)) continue;
    if (!zp.inside(x, 1e-9)) continue;
    bool known = false;
    for (const auto& pts : traced)
      if (distance_to_locus(x, pts) < std::max(2.0 * opt.step, 1e-6)) known = true;
    if (known) continue;
    VecX kernel;
    const int rank = numeric_rank(zp.J(x), &kernel);
    SingularLocus locus;
    locus.rank = rank;
    locus.residual = residual;
    if (rank == n) {
      locus.kind = SingularLocus::Kind::IsolatedPoint;
      locus.points.push_back(to_chart(x));
      traced.push_back({x});
    } else if (rank == n - 1) {
      locus.kind = SingularLocus::Kind::Curve;
      bool closed = false;
      auto fwd = trace_direction(zp, x, kernel, opt.step, opt.newton_tol, opt.max_curve_points, x, &closed);
      std::vector<VecX> bwd;
      if (!closed) {
        bool closed_b = false;
        bwd = trace_direction(zp, x, -kernel, opt.step, opt.newton_tol, opt.max_curve_points, x, &closed_b);
      }
      std::vector<VecX> pts(bwd.rbegin(), bwd.rend());
      pts.push_back(x);
      pts.insert(pts.end(), fwd.begin(), fwd.end());
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const VecX& prev = pts[i == 0 ? 0 : i - 1];
        const VecX& next = pts[i + 1 < pts.size() ? i + 1 : i];
        VecX tan = next - prev;
        VecX ker;
        numeric_rank(zp.J(pts[i]), &ker);
        if (ker.dot(tan) < 0.0) ker = -ker;
        locus.points.push_back(to_chart(pts[i]));
        locus.tangents.push_back(to_tangent(pts[i], ker));
      }
      if (closed) locus.note = "closed curve";
      traced.push_back(std::move(pts));
    } else {
      locus.kind = SingularLocus::Kind::Unclassified;
      locus.points.push_back(to_chart(x));
      locus.note = "degenerate Jacobian of rank " + std::to_string(rank);
      traced.push_back({x});
    }
    loci.push_back(std::move(locus));
  }
  return loci;
}

}  // namespace

std::vector<SingularLocus> singular_set_detect(const Structure& s, const ImplicitSurface& surf, const Box& region,
                                               const SingularSearch& opt) {
  require_chart(s);
  const ExprJet& f = surf.jet();
  // X f and Y f with symbolic coordinate derivatives of the frame rows
  std::array<ExprFn, 2> hf;
  std::array<std::array<ExprFn, 3>, 2> dhf;
  for (int a = 0; a < 2; ++a) {
    ExprFn e;
    for (int k = 0; k < 3; ++k) e = e + s.frame()[a][k] * f.d(k);
    hf[a] = e;
    for (int m = 0; m < 3; ++m) dhf[a][m] = e.derivative(m);
  }
  ZeroProblem zp;
  zp.dim = 3;
  zp.lo = VecX::Map(region.lo.data(), 3);
  zp.hi = VecX::Map(region.hi.data(), 3);
  zp.G = [&](const VecX& x) {
    const Coords p{x[0], x[1], x[2]};
    VecX g(3);
    g << f.value(p), hf[0](p), hf[1](p);
    return g;
  };
  zp.J = [&](const VecX& x) {
    const Coords p{x[0], x[1], x[2]};
    MatX J(3, 3);
    const auto gf = f.gradient(p);
    for (int m = 0; m < 3; ++m) {
      J(0, m) = gf[m];
      J(1, m) = dhf[0][m](p);
      J(2, m) = dhf[1][m](p);
    }
    return J;
  };
  return detect(
      zp, {opt.grid[0], opt.grid[1], opt.grid[2]}, opt, [](const VecX& x) { return Coords{x[0], x[1], x[2]}; },
      [](const VecX&, const VecX& k) { return Vec3(k[0], k[1], k[2]); });
}

std::vector<SingularLocus> singular_set_graph(const GraphSurface& gs, int grid) {
  const ExprJet& u = gs.u_jet();
  ZeroProblem zp;
  zp.dim = 2;
  zp.lo = Eigen::Vector2d(gs.x_range()[0], gs.y_range()[0]);
  zp.hi = Eigen::Vector2d(gs.x_range()[1], gs.y_range()[1]);
  zp.G = [&](const VecX& x) -> VecX { return gs.w(x[0], x[1]); };
  zp.J = [&](const VecX& x) -> MatX {
    const auto h = u.hessian({x[0], x[1], 0.0});
    MatX J(2, 2);
    J << h[0][0], h[0][1] - 1.0, h[1][0] + 1.0, h[1][1];
    return J;
  };
  SingularSearch opt;
  const double span = std::max(gs.x_range()[1] - gs.x_range()[0], gs.y_range()[1] - gs.y_range()[0]);
  opt.step = 1e-2 * std::max(span, 1e-12);
  auto to_chart = [&](const VecX& x) { return Coords{x[0], x[1], u.value({x[0], x[1], 0.0})}; };
  auto to_tangent = [&](const VecX& x, const VecX& k) {
    const auto g = u.gradient({x[0], x[1], 0.0});
    return Vec3(k[0], k[1], g[0] * k[0] + g[1] * k[1]);
  };
  return detect(zp, {grid, grid}, opt, to_chart, to_tangent);
}

StationarityReport stationarity_at_singular_curve(const Structure& s, const ImplicitSurface& surf,
                                                  const SingularLocus& curve, int samples, double tolerance) {
  StationarityReport rep;
  if (curve.kind != SingularLocus::Kind::Curve || curve.points.size() < 3)
    throw std::invalid_argument("stationarity needs a traced singular curve");
  const std::size_t n = curve.points.size();
  const double d0 = 1e-3;
  for (int k = 0; k < samples; ++k) {
    const std::size_t i = 1 + (n - 2) * (2 * k + 1) / (2 * samples);
    const Coords p = curve.points[i];
    const Vec3 tc = curve.tangents[i].normalized();
    const FrameGeometry g = s.at(p, Structure::Detail::Connection);
    const Vec3 side = g.coords_of(g.J_of(g.frame_of(tc))).normalized();
    for (double sgn : {1.0, -1.0}) {
      std::array<double, 3> v{};
      for (int j = 0; j < 3; ++j) {
        const double d = d0 * std::ldexp(1.0, -j);
        Coords q = p;
        for (int m = 0; m < 3; ++m) q[m] += sgn * d * side[m];
        q = surf.project(q);
        const SurfaceFramePoint sf = surface_frame(s, surf, q);
        const Vec3 tf = sf.geometry.frame_of(tc);
        v[j] = sf.Z.dot(tf) / tf.norm();
      }
      const double r1 = 2.0 * v[1] - v[0];
      const double r2 = 2.0 * v[2] - v[1];
      if (std::abs(r1 - r2) > 1e-3) rep.inconclusive = true;
      const double dev = std::asin(std::min(1.0, std::abs(r2)));
      rep.deviations.push_back(dev);
      rep.max_deviation = std::max(rep.max_deviation, dev);
    }
  }
  rep.orthogonal = !rep.inconclusive && rep.max_deviation <= tolerance;
  if (rep.inconclusive) rep.note = "side limits of the characteristic direction did not settle";
  return rep;
}

}  // namespace subriemann
