#include "subriemann/variation.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "subriemann/parallel.hpp"

namespace subriemann {

// ---------------------------------------------------------------- scalar fields

ScalarField ScalarField::from_expr(const ExprFn& f) {
  auto jet = std::make_shared<const ExprJet>(f);
  ScalarField s;
  s.value = [jet](const Coords& p) { return jet->value(p); };
  s.gradient = [jet](const Coords& p) {
    const auto g = jet->gradient(p);
    return Vec3(g[0], g[1], g[2]);
  };
  s.hessian = [jet](const Coords& p) {
    const auto h = jet->hessian(p);
    Mat3 m;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) m(a, b) = h[a][b];
    return m;
  };
  return s;
}

ScalarField ScalarField::constant(double c) {
  ScalarField s;
  s.value = [c](const Coords&) { return c; };
  s.gradient = [](const Coords&) { return Vec3::Zero().eval(); };
  s.hessian = [](const Coords&) { return Mat3::Zero().eval(); };
  return s;
}

ScalarField ScalarField::zero() { return constant(0.0); }

ScalarField ScalarField::compose(std::function<std::array<double, 3>(double)> outer, ScalarField inner) {
  ScalarField s;
  s.value = [outer, inner](const Coords& p) { return outer(inner.value(p))[0]; };
  s.gradient = [outer, inner](const Coords& p) { return (outer(inner.value(p))[1] * inner.gradient(p)).eval(); };
  s.hessian = [outer, inner](const Coords& p) {
    const auto o = outer(inner.value(p));
    const Vec3 g = inner.gradient(p);
    return (o[2] * g * g.transpose() + o[1] * inner.hessian(p)).eval();
  };
  return s;
}

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  ScalarField s;
  s.value = [a, b](const Coords& p) { return a.value(p) * b.value(p); };
  s.gradient = [a, b](const Coords& p) {
    return (a.value(p) * b.gradient(p) + b.value(p) * a.gradient(p)).eval();
  };
  s.hessian = [a, b](const Coords& p) {
    const Vec3 ga = a.gradient(p), gb = b.gradient(p);
    return (a.value(p) * b.hessian(p) + b.value(p) * a.hessian(p) + ga * gb.transpose() + gb * ga.transpose()).eval();
  };
  return s;
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  ScalarField s;
  s.value = [a, b](const Coords& p) { return a.value(p) + b.value(p); };
  s.gradient = [a, b](const Coords& p) { return (a.gradient(p) + b.gradient(p)).eval(); };
  s.hessian = [a, b](const Coords& p) { return (a.hessian(p) + b.hessian(p)).eval(); };
  return s;
}

ScalarField operator*(double c, const ScalarField& a) { return ScalarField::constant(c) * a; }

namespace {

std::array<double, 3> smoothstep(double s) {
  if (s <= 0.0) return {0.0, 0.0, 0.0};
  if (s >= 1.0) return {1.0, 0.0, 0.0};
  const double s2 = s * s, s3 = s2 * s;
  return {s3 * (10.0 - 15.0 * s + 6.0 * s2), 30.0 * s2 * (1.0 - s) * (1.0 - s), 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s)};
}

}  // namespace

std::array<double, 3> cutoff_profile(double t, double inner, double outer) {
  const double a = std::abs(t);
  const double sg = t < 0.0 ? -1.0 : 1.0;
  const double w = outer - inner;
  const auto S = smoothstep((a - inner) / w);
  return {1.0 - S[0], -sg * S[1] / w, -S[2] / (w * w)};
}

std::array<double, 3> window_profile(double t, double a, double b, double ramp) {
  if (t < a) {
    const auto S = smoothstep((t - (a - ramp)) / ramp);
    return {S[0], S[1] / ramp, S[2] / (ramp * ramp)};
  }
  if (t > b) {
    const auto S = smoothstep((t - b) / ramp);
    return {1.0 - S[0], -S[1] / ramp, -S[2] / (ramp * ramp)};
  }
  return {1.0, 0.0, 0.0};
}

double along(const SurfaceFramePoint& sf, const ScalarField& u, const Vec3& v) {
  return u.gradient(sf.point).dot(sf.coord(v));
}

double along_ZZ(const SurfaceFramePoint& sf, const ScalarField& u) {
  const FrameGeometry& g = sf.geometry;
  const Vec3 c = sf.coord(sf.Z);
  Vec3 dc = g.A.transpose() * sf.d_Z(sf.Z);
  for (int m = 0; m < 3; ++m) dc += c[m] * (g.dA[m].transpose() * sf.Z);
  return c.dot(u.hessian(sf.point) * c) + u.gradient(sf.point).dot(dc);
}

// ---------------------------------------------------------------- measures

double ParametricMeasure::integrate(const std::function<double(const Coords&)>& F) const {
  return integrate_patch(*s_, P_, q_, [&](const Coords& p, double, double) { return F(p); });
}

CharPatch::CharPatch(const Structure& s, const ImplicitSurface& surf, std::array<ExprFn, 3> base,
                     std::array<double, 2> eps_range, std::array<double, 2> s_range, Options opt) {
  const QuadratureRule re = composite_rule(eps_range[0], eps_range[1], opt.order, opt.panels_eps);
  const QuadratureRule rs = composite_rule(s_range[0], s_range[1], opt.order, opt.panels_s);
  std::vector<std::size_t> forward, backward;
  for (std::size_t j = 0; j < rs.nodes.size(); ++j) (rs.nodes[j] >= 0.0 ? forward : backward).push_back(j);
  std::sort(forward.begin(), forward.end(), [&](auto a, auto b) { return rs.nodes[a] < rs.nodes[b]; });
  std::sort(backward.begin(), backward.end(), [&](auto a, auto b) { return rs.nodes[a] > rs.nodes[b]; });

  auto base_point = [&](double e) {
    const Coords q{e, 0.0, 0.0};
    return surf.project({base[0](q), base[1](q), base[2](q)});
  };
  // points F(e, s_j) for every s node
  auto flow_all = [&](double e) {
    std::vector<Coords> out(rs.nodes.size());
    for (const auto* order : {&forward, &backward}) {
      Coords p = base_point(e);
      double at = 0.0;
      for (std::size_t j : *order) {
        const double ds = rs.nodes[j] - at;
        const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(ds) / opt.step)));
        p = flow_surface_field(s, surf, p, SurfaceField::Z, ds, steps);
        at = rs.nodes[j];
        out[j] = p;
      }
    }
    return out;
  };
  auto rows = parallel_map<std::vector<Node>>(re.nodes.size(), [&](std::size_t i) {
    const double e = re.nodes[i];
    const auto mid = flow_all(e);
    const auto plus = flow_all(e + opt.fd_eps);
    const auto minus = flow_all(e - opt.fd_eps);
    std::vector<Node> row;
    for (std::size_t j = 0; j < rs.nodes.size(); ++j) {
      const SurfaceFramePoint sf = surface_frame(s, surf, mid[j]);
      Vec3 V;
      for (int k = 0; k < 3; ++k) V[k] = (plus[j][k] - minus[j][k]) / (2.0 * opt.fd_eps);
      const Vec3 Vf = sf.geometry.frame_of(V);
      Node n;
      n.point = mid[j];
      n.f_eps = std::abs(Vf.dot(sf.S));
      n.gVT = Vf[2];
      n.nh = sf.nh;
      n.weight = re.weights[i] * rs.weights[j] * n.f_eps;
      row.push_back(n);
    }
    return row;
  });
  for (auto& r : rows) nodes_.insert(nodes_.end(), r.begin(), r.end());
}

double CharPatch::integrate(const std::function<double(const Coords&)>& F) const {
  auto terms = parallel_map<double>(nodes_.size(), [&](std::size_t i) { return nodes_[i].weight * F(nodes_[i].point); });
  return ordered_sum(terms);
}

// ---------------------------------------------------------------- variation fields

VariationField VariationField::normal(ScalarField u) {
  VariationField U;
  U.v = std::move(u);
  return U;
}

VariationField VariationField::vertical(ScalarField w) {
  VariationField U;
  U.h = std::move(w);
  return U;
}

Vec3 VariationField::frame(const SurfaceFramePoint& sf) const {
  const Coords& p = sf.point;
  const double vv = v.value(p);
  Vec3 out = (f.value(p) + vv * sf.nh) * sf.nu + l.value(p) * sf.Z;
  out[2] += h.value(p) + vv * sf.gNT;
  return out;
}

double VariationField::normal_component(const SurfaceFramePoint& sf) const {
  const Coords& p = sf.point;
  return f.value(p) * sf.nh + h.value(p) * sf.gNT + v.value(p);
}

Vec3 VariationField::frame_derivative(const SurfaceFramePoint& sf, const Vec3& e) const {
  const Coords& p = sf.point;
  const double vv = v.value(p), dv = along(sf, v, e);
  Vec3 out = (along(sf, f, e) + dv * sf.nh + vv * sf.d_nh(e)) * sf.nu + (f.value(p) + vv * sf.nh) * sf.d_nu(e) +
             along(sf, l, e) * sf.Z + l.value(p) * sf.d_Z(e);
  out[2] += along(sf, h, e) + dv * sf.gNT + vv * sf.d_gNT(e);
  return out;
}

double first_variation_integrand(const SurfaceFramePoint& sf, const VariationField& U) {
  const Coords& p = sf.point;
  const double vv = U.v.value(p);
  const double S_gUT = along(sf, U.h, sf.S) + along(sf, U.v, sf.S) * sf.gNT + vv * sf.d_gNT(sf.S);
  const double l = U.l.value(p);
  const double a = U.f.value(p) + vv * sf.nh;  // nu_h component of U_h
  const double gUT = U.h.value(p) + vv * sf.gNT;
  return -S_gUT + sf.geometry.c1 * sf.gNT * l + sf.nh * (along(sf, U.l, sf.Z) + a * sf.thetaZ) +
         sf.nh * gUT * sf.tauZZ;
}

namespace {

// Evaluates F at non-singular points; singular points contribute zero.
double regular_only(const Structure& s, const ImplicitSurface& surf, const Coords& p,
                    const std::function<double(const SurfaceFramePoint&)>& F) {
  try {
    return F(surface_frame(s, surf, p));
  } catch (const SingularPointError&) {
    return 0.0;
  }
}

}  // namespace

double first_variation_formula(const Structure& s, const ImplicitSurface& surf, const SurfaceMeasure& m,
                               const VariationField& U) {
  return m.integrate([&](const Coords& p) {
    return regular_only(s, surf, p, [&](const SurfaceFramePoint& sf) { return first_variation_integrand(sf, U); });
  });
}

double first_variation_normal(const Structure& s, const ImplicitSurface& surf, const SurfaceMeasure& m,
                              const VariationField& U) {
  return m.integrate([&](const Coords& p) {
    return regular_only(s, surf, p, [&](const SurfaceFramePoint& sf) { return -U.normal_component(sf) * sf.H; });
  });
}

// ---------------------------------------------------------------- numeric variations

namespace {

struct DeformNode {
  Vec3 p, tu, tv;       // point and parameter tangents
  Vec3 U, dU_u, dU_v;   // displacement and its parameter derivatives
  Vec3 a, da_u, da_v;   // second order term and its parameter derivatives
  double weight = 0.0;
  bool moves = false;
};

bool field_vanishes(const VariationField& U, const Coords& p) {
  for (const ScalarField* c : {&U.f, &U.l, &U.h, &U.v})
    if (c->value(p) != 0.0 || c->gradient(p).squaredNorm() != 0.0) return false;
  return true;
}

// Displacement field in coordinates and its second order term.
struct Displacement {
  Vec3 U = Vec3::Zero();
  Vec3 a = Vec3::Zero();
  bool moves = false;
};

Displacement displacement_at(const Structure& s, const ImplicitSurface& surf, const Coords& p,
                             const VariationField& Uf, const NumericVariation& opt, const Vec3* tangent,
                             Vec3* dU) {
  Displacement d;
  if (field_vanishes(Uf, p)) {
    if (dU) dU->setZero();
    if (opt.acceleration) d.a = opt.acceleration(p);
    return d;
  }
  const SurfaceFramePoint sf = surface_frame(s, surf, p);
  const FrameGeometry& g = sf.geometry;
  const Vec3 Ufr = Uf.frame(sf);
  d.U = g.A.transpose() * Ufr;
  d.moves = true;
  if (opt.geodesic) {
    Vec3 acc = Vec3::Zero();
    for (int m = 0; m < 3; ++m) acc += d.U[m] * (g.dA[m].transpose() * Ufr);
    Vec3 cov = Vec3::Zero();
    for (int a = 0; a < 3; ++a) cov += Ufr[a] * (g.LC[a].transpose() * Ufr);
    d.a = acc - g.A.transpose() * cov;
  }
  if (opt.acceleration) d.a += opt.acceleration(p);
  if (dU && tangent) {
    const Vec3 e = g.frame_of(*tangent);
    Vec3 out = g.A.transpose() * Uf.frame_derivative(sf, e);
    for (int m = 0; m < 3; ++m) out += (*tangent)[m] * (g.dA[m].transpose() * Ufr);
    *dU = out;
  }
  return d;
}

std::vector<DeformNode> deformation_nodes(const Structure& s, const ImplicitSurface& surf,
                                          const ParametricMeasure& patch, const VariationField& U,
                                          const NumericVariation& opt) {
  const Parametrization& P = patch.parametrization();
  const PatchQuadrature& q = patch.quadrature();
  const QuadratureRule ru = composite_rule(P.u_range[0], P.u_range[1], q.order, q.panels_u, P.u_breaks);
  const QuadratureRule rv = composite_rule(P.v_range[0], P.v_range[1], q.order, q.panels_v, P.v_breaks);
  const double du = 1e-5 * (P.u_range[1] - P.u_range[0]);
  const double dv = 1e-5 * (P.v_range[1] - P.v_range[0]);
  const std::size_t nv = rv.nodes.size();
  return parallel_map<DeformNode>(ru.nodes.size() * nv, [&](std::size_t k) {
    const double u = ru.nodes[k / nv], v = rv.nodes[k % nv];
    DeformNode n;
    n.weight = ru.weights[k / nv] * rv.weights[k % nv];
    const Coords p = P.point(u, v);
    const auto t = P.tangents(u, v);
    n.p = to_vec(p);
    n.tu = t[0];
    n.tv = t[1];
    Vec3 dUu, dUv;
    const Displacement d0 = displacement_at(s, surf, p, U, opt, &n.tu, &dUu);
    displacement_at(s, surf, p, U, opt, &n.tv, &dUv);
    n.U = d0.U;
    n.a = d0.a;
    n.dU_u = dUu;
    n.dU_v = dUv;
    n.moves = d0.moves || opt.acceleration != nullptr;
    n.da_u.setZero();
    n.da_v.setZero();
    if (n.moves) {
      auto acc = [&](double uu, double vvv) { return displacement_at(s, surf, P.point(uu, vvv), U, opt, nullptr, nullptr).a; };
      n.da_u = (acc(u + du, v) - acc(u - du, v)) / (2.0 * du);
      n.da_v = (acc(u, v + dv) - acc(u, v - dv)) / (2.0 * dv);
    }
    return n;
  });
}

double area_of(const Structure& s, const std::vector<DeformNode>& nodes, double eps) {
  std::vector<double> terms(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const DeformNode& n = nodes[i];
    const double e2 = 0.5 * eps * eps;
    const Vec3 p = n.p + eps * n.U + e2 * n.a;
    const Vec3 tu = n.tu + eps * n.dU_u + e2 * n.da_u;
    const Vec3 tv = n.tv + eps * n.dU_v + e2 * n.da_v;
    const Mat3 AinvT = s.frame_matrix(to_coords(p)).inverse().transpose();
    const Vec3 eu = AinvT * tu, ev = AinvT * tv;
    terms[i] = n.weight * (eu[2] * ev - ev[2] * eu).norm();
  }
  return ordered_sum(terms);
}

}  // namespace

double deformed_area(const Structure& s, const ImplicitSurface& surf, const ParametricMeasure& patch,
                     const VariationField& U, double eps, const NumericVariation& opt) {
  return area_of(s, deformation_nodes(s, surf, patch, U, opt), eps);
}

double first_variation_numeric(const Structure& s, const ImplicitSurface& surf, const ParametricMeasure& patch,
                               const VariationField& U, const NumericVariation& opt) {
  const auto nodes = deformation_nodes(s, surf, patch, U, opt);
  const double e = opt.epsilon;
  const double d1 = (area_of(s, nodes, e) - area_of(s, nodes, -e)) / (2.0 * e);
  const double d2 = (area_of(s, nodes, e / 2) - area_of(s, nodes, -e / 2)) / e;
  return (4.0 * d2 - d1) / 3.0;
}

double second_variation_numeric(const Structure& s, const ImplicitSurface& surf, const ParametricMeasure& patch,
                                const VariationField& U, NumericVariation opt) {
  const auto nodes = deformation_nodes(s, surf, patch, U, opt);
  const double e = opt.epsilon;
  const double a0 = area_of(s, nodes, 0.0);
  const double d1 = (area_of(s, nodes, e) - 2.0 * a0 + area_of(s, nodes, -e)) / (e * e);
  const double d2 = (area_of(s, nodes, e / 2) - 2.0 * a0 + area_of(s, nodes, -e / 2)) / (e * e / 4);
  return (4.0 * d2 - d1) / 3.0;
}

// ---------------------------------------------------------------- second variation

double q_coefficient(const SurfaceFramePoint& sf) {
  const FrameGeometry& g = sf.geometry;
  const double c1 = g.c1, W = g.webster();
  const Vec3 T(0.0, 0.0, 1.0);
  const double RZTnuZ = g.curvature(sf.Z, T, sf.nu).dot(sf.Z);
  const double inner = sf.nh * (c1 + sf.tauZnu) - sf.thetaS;
  return sf.nh * (-W + c1 * c1 + c1 * sf.tauZnu) - sf.nh * inner * inner + sf.gNT * RZTnuZ -
         sf.gNT * sf.d_tauZnu(sf.Z);
}

SecondVariationTerms second_variation_terms(const SurfaceFramePoint& sf, double v, double w) {
  if (std::abs(sf.H) > 1e-8) throw NotMinimalError("second variation terms need a minimal surface");
  SecondVariationTerms t;
  const double c1 = sf.geometry.c1;
  const double g = sf.gNT, nh = sf.nh;
  t.q = q_coefficient(sf);
  t.u = v + g * w;
  const double K = nh * sf.thetaS + c1 * g * g + (1.0 + g * g) * sf.tauZnu;
  t.B_ZS = c1 / 2.0 - sf.tauZnu + sf.d_gNT(sf.Z) / nh;
  t.xi = g * K * t.u * t.u;
  t.zeta = nh * nh * (g * K * w * w - 2.0 * t.B_ZS * v * w);
  t.eta = (nh * nh * v * v - std::pow(g * v + w, 2)) * sf.tauZZ;
  return t;
}

double max_mean_curvature(const Structure& s, const ImplicitSurface& surf, const SurfaceMeasure& m) {
  std::mutex mutex;
  double worst = 0.0;
  m.integrate([&](const Coords& p) {
    const double h = regular_only(s, surf, p, [](const SurfaceFramePoint& sf) { return std::abs(sf.H); });
    std::lock_guard lock(mutex);
    worst = std::max(worst, h);
    return 0.0;
  });
  return worst;
}

void require_minimal(const Structure& s, const ImplicitSurface& surf, const SurfaceMeasure& m, double tol) {
  const double h = max_mean_curvature(s, surf, m);
  if (h > tol) throw NotMinimalError("surface is not minimal on the patch: max |H| = " + std::to_string(h));
}

double stability_operator(const SurfaceFramePoint& sf, const ScalarField& v) {
  const double c1 = sf.geometry.c1, nh = sf.nh;
  const double coeff = sf.gNT * (-2.0 * nh * sf.thetaS - c1 + 2.0 * nh * nh * (c1 + sf.tauZnu)) / nh;
  return (along_ZZ(sf, v) + coeff * along(sf, v, sf.Z) - q_coefficient(sf) * nh * v.value(sf.point)) / nh;
}

double stability_operator_divergence_form(const SurfaceFramePoint& sf, const ScalarField& v) {
  const FrameGeometry& g = sf.geometry;
  const double nh = sf.nh;
  const double divZ = sf.S.dot(g.levi_civita(sf.S, sf.Z, sf.d_Z(sf.S)));
  const double Zv = along(sf, v, sf.Z);
  return along_ZZ(sf, v) / nh - sf.d_nh(sf.Z) * Zv / (nh * nh) + Zv * divZ / nh - q_coefficient(sf) * v.value(sf.point);
}

double index_form(const Structure& s, const ImplicitSurface& surf, const SurfaceMeasure& m, const ScalarField& u,
                  const ScalarField& v) {
  require_minimal(s, surf, m);
  return m.integrate([&](const Coords& p) {
    return regular_only(s, surf, p, [&](const SurfaceFramePoint& sf) {
      return along(sf, u, sf.Z) * along(sf, v, sf.Z) / sf.nh + q_coefficient(sf) * u.value(p) * v.value(p);
    });
  });
}

double minus_integral_u_L(const Structure& s, const ImplicitSurface& surf, const SurfaceMeasure& m,
                          const ScalarField& u, const ScalarField& v) {
  require_minimal(s, surf, m);
  return -m.integrate([&](const Coords& p) {
    return regular_only(s, surf, p, [&](const SurfaceFramePoint& sf) { return u.value(p) * stability_operator(sf, v); });
  });
}

namespace {

double L_nh_path_b(const SurfaceFramePoint& sf) {
  const double c1 = sf.geometry.c1, nh = sf.nh, g = sf.gNT;
  const double Z_ratio = (sf.d_gNT(sf.Z) * nh - g * sf.d_nh(sf.Z)) / (nh * nh);
  return sf.geometry.webster() - c1 * sf.tauZnu + 2.0 * c1 * Z_ratio + c1 * c1 * g * g / (nh * nh);
}

}  // namespace

LNhValues L_of_Nh(const Structure& s, const ImplicitSurface& surf, const Coords& p) {
  const SurfaceFramePoint sf = surface_frame(s, surf, p);
  if (std::abs(sf.H) > 1e-8) throw NotMinimalError("L(|N_h|) formulas need a minimal surface");
  const double c1 = sf.geometry.c1, nh = sf.nh, g = sf.gNT, W = sf.geometry.webster();
  LNhValues out;
  out.path_a = W + c1 * sf.tauZnu - 2.0 * c1 * sf.thetaS / nh - c1 * c1 * g * g / (nh * nh);
  out.path_a_printed =
      W + c1 * sf.tauZnu - 2.0 * c1 * (nh * sf.thetaS - nh * nh * sf.tauZnu) / (nh * nh) - c1 * c1 * g * g / (nh * nh);
  out.path_b = L_nh_path_b(sf);
  const auto d = derivative_along(s, surf, p, SurfaceField::Z,
                                  [&](const Coords& q) { return surface_frame(s, surf, q).nh; });
  const double coeff = g * (-2.0 * nh * sf.thetaS - c1 + 2.0 * nh * nh * (c1 + sf.tauZnu)) / nh;
  out.direct = (d.second + coeff * sf.d_nh(sf.Z) - q_coefficient(sf) * nh * nh) / nh;
  out.difference = out.path_a - out.path_b;
  return out;
}

double integration_by_parts_residual(const Structure& s, const ImplicitSurface& surf, const SurfaceMeasure& m,
                                     const ScalarField& u, const ScalarField& v) {
  return m.integrate([&](const Coords& p) {
    return regular_only(s, surf, p, [&](const SurfaceFramePoint& sf) {
      const double Zv = along(sf, v, sf.Z);
      return sf.nh * (along(sf, u, sf.Z) * Zv + u.value(p) * along_ZZ(sf, v)) +
             sf.geometry.c1 * sf.gNT * u.value(p) * Zv;
    });
  });
}

CanonicalReduction canonical_reduction(const Structure& s, const ImplicitSurface& surf, const SurfaceMeasure& m,
                                       const ScalarField& u) {
  require_minimal(s, surf, m);
  CanonicalReduction r;
  r.lhs = m.integrate([&](const Coords& p) {
    return regular_only(s, surf, p, [&](const SurfaceFramePoint& sf) {
      const double uu = u.value(p);
      const double Zw = along(sf, u, sf.Z) * sf.nh + uu * sf.d_nh(sf.Z);
      return Zw * Zw / sf.nh + q_coefficient(sf) * uu * uu * sf.nh * sf.nh;
    });
  });
  r.rhs = m.integrate([&](const Coords& p) {
    return regular_only(s, surf, p, [&](const SurfaceFramePoint& sf) {
      const double uu = u.value(p), Zu = along(sf, u, sf.Z);
      return sf.nh * (Zu * Zu - L_nh_path_b(sf) * uu * uu);
    });
  });
  return r;
}

// ---------------------------------------------------------------- singular curves

Coords SingularCurveParam::point(double t) const {
  const Coords q{t, 0.0, 0.0};
  return {map[0](q), map[1](q), map[2](q)};
}

Vec3 SingularCurveParam::tangent(double t) const {
  const Coords q{t, 0.0, 0.0};
  return {map[0].derivative(0)(q), map[1].derivative(0)(q), map[2].derivative(0)(q)};
}

namespace {

// Unit horizontal direction J(curve tangent) in coordinates, and the frame
// components of the conormal at a nearby point.
Vec3 side_direction(const Structure& s, const Coords& p, const Vec3& tangent) {
  const FrameGeometry g = s.at(p, Structure::Detail::Connection);
  return g.coords_of(g.J_of(g.frame_of(tangent))).normalized();
}

Coords side_point(const ImplicitSurface& surf, const Coords& p, const Vec3& dir, double d) {
  Coords q = p;
  for (int m = 0; m < 3; ++m) q[m] += d * dir[m];
  return surf.project(q);
}

}  // namespace

double singular_line_coefficient(const Structure& s, const ImplicitSurface& surf, const Coords& p,
                                 const Vec3& tangent, double side) {
  const Vec3 dir = side * side_direction(s, p, tangent);
  auto value = [&](double d) {
    const SurfaceFramePoint sf = surface_frame(s, surf, side_point(surf, p, dir, d));
    const double c1 = sf.geometry.c1, g = sf.gNT;
    const double K = sf.nh * sf.thetaS + c1 * g * g + (1.0 + g * g) * sf.tauZnu;
    // conormal: the side direction made orthogonal to the curve tangent
    const Vec3 t = sf.geometry.frame_of(tangent).normalized();
    Vec3 n = sf.geometry.frame_of(dir);
    n -= n.dot(t) * t;
    n.normalize();
    return K / g * sf.Z.dot(n);
  };
  const double d = 1e-4;
  return 2.0 * value(d / 2) - value(d);
}

namespace {

double max_Z_in_tube(const Structure& s, const ImplicitSurface& surf, const std::vector<SingularCurveParam>& curves,
                     const ScalarField& u, const QOptions& opt) {
  double worst = 0.0;
  for (const auto& c : curves)
    for (int k = 0; k < opt.admissibility_samples; ++k) {
      const double t = c.range[0] + (c.range[1] - c.range[0]) * (k + 0.5) / opt.admissibility_samples;
      const Coords p = c.point(t);
      const Vec3 dir = side_direction(s, p, c.tangent(t));
      for (double side : {1.0, -1.0})
        for (double frac : {1e-2, 0.25, 0.5, 0.75, 1.0}) {
          const Coords q = side_point(surf, p, side * dir, frac * opt.tube);
          worst = std::max(worst, regular_only(s, surf, q, [&](const SurfaceFramePoint& sf) {
                             return std::abs(along(sf, u, sf.Z));
                           }));
        }
    }
  return worst;
}

struct LineIntegrals {
  double line = 0.0;
  double tangential = 0.0;
};

LineIntegrals line_integrals(const Structure& s, const ImplicitSurface& surf,
                             const std::vector<SingularCurveParam>& curves, const ScalarField& u, const QOptions& opt,
                             bool with_line) {
  LineIntegrals out;
  for (const auto& c : curves) {
    const QuadratureRule r = composite_rule(c.range[0], c.range[1], opt.line_order, opt.line_panels, c.breaks);
    std::vector<double> line(r.nodes.size()), tang(r.nodes.size());
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
      const Coords p = c.point(r.nodes[i]);
      const Vec3 t = c.tangent(r.nodes[i]);
      const FrameGeometry g = s.at(p, Structure::Detail::Connection);
      const double ds = g.frame_of(t).norm();
      const double uu = u.value(p);
      const double Su = u.gradient(p).dot(t) / ds;
      if (with_line && uu != 0.0)
        line[i] = r.weights[i] * ds * uu * uu *
                  (singular_line_coefficient(s, surf, p, t, 1.0) + singular_line_coefficient(s, surf, p, t, -1.0));
      tang[i] = r.weights[i] * ds * Su * Su;
    }
    out.line += ordered_sum(line);
    out.tangential += ordered_sum(tang);
  }
  return out;
}

}  // namespace

QReport stability_quadratic_Q(const Structure& s, const ImplicitSurface& surf, const SurfaceMeasure& m,
                              const std::vector<SingularCurveParam>& curves, const ScalarField& u,
                              const QOptions& opt) {
  require_minimal(s, surf, m);
  QReport rep;
  rep.max_Zu_in_tube = max_Z_in_tube(s, surf, curves, u, opt);
  if (rep.max_Zu_in_tube > opt.admissibility_tol)
    throw InadmissibleError("Z(u) does not vanish in the tube around a singular curve: max |Z(u)| = " +
                            std::to_string(rep.max_Zu_in_tube));
  rep.regular = m.integrate([&](const Coords& p) {
    return regular_only(s, surf, p, [&](const SurfaceFramePoint& sf) {
      const double Zu = along(sf, u, sf.Z), uu = u.value(p);
      return Zu * Zu / sf.nh + q_coefficient(sf) * uu * uu;
    });
  });
  const LineIntegrals li = line_integrals(s, surf, curves, u, opt, true);
  rep.line = li.line;
  rep.tangential = li.tangential;
  rep.value = rep.regular + rep.line + rep.tangential;
  return rep;
}

SingularCurveVariation singular_curve_second_variation(const Structure& s, const ImplicitSurface& surf,
                                                       const SurfaceMeasure& tube,
                                                       const std::vector<SingularCurveParam>& curves,
                                                       const ScalarField& w, bool isolated_point,
                                                       const QOptions& opt) {
  require_minimal(s, surf, tube);
  std::mutex mutex;
  double worst = 0.0;
  tube.integrate([&](const Coords& p) {
    const double z = regular_only(s, surf, p, [&](const SurfaceFramePoint& sf) { return std::abs(along(sf, w, sf.Z)); });
    std::lock_guard lock(mutex);
    worst = std::max(worst, z);
    return 0.0;
  });
  if (worst > opt.admissibility_tol)
    throw InadmissibleError("w is not constant along characteristic curves: max |Z(w)| = " + std::to_string(worst));
  SingularCurveVariation out;
  out.area_term = tube.integrate([&](const Coords& p) {
    return regular_only(s, surf, p, [&](const SurfaceFramePoint& sf) {
      const double ww = w.value(p);
      return 2.0 * ww * ww * sf.nh * (sf.tauZnu * sf.tauZnu + sf.tauZZ * sf.tauZZ);
    });
  });
  if (!isolated_point) {
    out.divergence_term = tube.integrate([&](const Coords& p) {
      return regular_only(s, surf, p, [&](const SurfaceFramePoint& sf) {
        const double ww = w.value(p);
        const double f = ww * ww * sf.tauZZ;
        const double Sf = 2.0 * ww * along(sf, w, sf.S) * sf.tauZZ + ww * ww * sf.d_tauZZ(sf.S);
        return Sf + f * sf.gNT * sf.thetaZ - f * sf.nh * sf.tauZZ;
      });
    });
    out.curve_term = line_integrals(s, surf, curves, w, opt, false).tangential;
  }
  out.value = out.area_term + out.divergence_term + out.curve_term;
  return out;
}

// ---------------------------------------------------------------- sign field

double stability_criterion(const SurfaceFramePoint& sf) {
  return sf.geometry.webster() - sf.geometry.c1 * sf.tauZnu;
}

namespace {

SignField summarize(std::vector<double> values) {
  SignField f;
  f.samples = static_cast<int>(values.size());
  if (!values.empty()) {
    f.min = *std::min_element(values.begin(), values.end());
    f.max = *std::max_element(values.begin(), values.end());
  }
  f.classification = f.max <= 1e-12 ? "nonpositive" : "positive somewhere";
  f.values = std::move(values);
  return f;
}

}  // namespace

SignField stability_sign_field(const Structure& s, const ImplicitSurface& surf, const std::vector<Coords>& points) {
  auto values = parallel_map<double>(points.size(), [&](std::size_t i) {
    return stability_criterion(surface_frame(s, surf, surf.project(points[i])));
  });
  return summarize(std::move(values));
}

SignField stability_sign_field_directions(const Structure& s, int directions) {
  const FrameGeometry g = s.at({0.0, 0.0, 0.0}, Structure::Detail::Full);
  std::vector<double> values;
  for (int k = 0; k < directions; ++k) {
    const double psi = 2.0 * std::numbers::pi * k / directions;
    const Vec3 nu(std::cos(psi), std::sin(psi), 0.0);
    values.push_back(g.webster() - g.c1 * g.tau_form(g.J_of(nu), nu));
  }
  return summarize(std::move(values));
}

}  // namespace subriemann
