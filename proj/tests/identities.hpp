// Pointwise surface identities evaluated with derivatives taken along
// integrated surface flows and chart finite differences, independent of the
// closed-form derivatives in SurfaceFramePoint.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "subriemann/surfaces.hpp"
#include "subriemann/variation.hpp"

namespace fixtures {

using namespace subriemann;

// Surface frames at p and at flow times -2h, -h, h, 2h of one surface field.
class FlowStencil {
 public:
  FlowStencil(const Structure& s, const ImplicitSurface& surf, const Coords& p, SurfaceField field, double h = 1e-3)
      : h_(h) {
    const double times[4] = {-2.0 * h, -h, h, 2.0 * h};
    const int steps[4] = {2, 1, 1, 2};
    for (int k = 0; k < 4; ++k) frames_[k] = surface_frame(s, surf, flow_surface_field(s, surf, p, field, times[k], steps[k]));
  }
  double d(const std::function<double(const SurfaceFramePoint&)>& q) const {
    return (q(frames_[0]) - 8.0 * q(frames_[1]) + 8.0 * q(frames_[2]) - q(frames_[3])) / (12.0 * h_);
  }
  Vec3 d_vec(const std::function<Vec3(const SurfaceFramePoint&)>& q) const {
    return (q(frames_[0]) - 8.0 * q(frames_[1]) + 8.0 * q(frames_[2]) - q(frames_[3])) / (12.0 * h_);
  }

 private:
  double h_;
  std::array<SurfaceFramePoint, 4> frames_;
};

// Chart Jacobian of a coordinate vector field by central differences.
inline Mat3 chart_jacobian(const std::function<Vec3(const Coords&)>& V, const Coords& p, double h = 1e-5) {
  Mat3 J;
  for (int m = 0; m < 3; ++m) {
    Coords a = p, b = p;
    a[m] += h;
    b[m] -= h;
    J.col(m) = (V(a) - V(b)) / (2.0 * h);
  }
  return J;
}

// Coordinate Lie bracket [V, W] = DW V - DV W.
inline Vec3 chart_bracket(const std::function<Vec3(const Coords&)>& V, const std::function<Vec3(const Coords&)>& W,
                          const Coords& p) {
  return chart_jacobian(W, p) * V(p) - chart_jacobian(V, p) * W(p);
}

struct IdentityResiduals {
  std::array<double, 5> frame_relations{};  // Z-derivatives of |N_h| and g(N,T), g(B(Z),S), g(B(S),Z)
  double div_S = 0.0, div_Z = 0.0;
  std::array<double, 3> brackets{};  // [Z, nu], [Z, T], [nu, T]
  double curvature_T = 0.0;
  double curvature_T_minimal = 0.0;
  double max() const {
    double m = std::max({div_S, div_Z, curvature_T, curvature_T_minimal});
    for (double c : frame_relations) m = std::max(m, c);
    for (double b : brackets) m = std::max(m, b);
    return m;
  }
};

// f is any smooth chart function used in the divergence identities.
inline IdentityResiduals identity_residuals(const Structure& s, const ImplicitSurface& surf, const Coords& p,
                                            const ScalarField& f) {
  const SurfaceFramePoint sf = surface_frame(s, surf, p);
  const FrameGeometry& g = sf.geometry;
  const double c1 = g.c1;
  const FlowStencil alongZ(s, surf, p, SurfaceField::Z), alongS(s, surf, p, SurfaceField::S);

  const double Znh = alongZ.d([](const SurfaceFramePoint& q) { return q.nh; });
  const double ZgNT = alongZ.d([](const SurfaceFramePoint& q) { return q.gNT; });
  const Vec3 dN_Z = alongZ.d_vec([](const SurfaceFramePoint& q) { return q.N; });
  const Vec3 dN_S = alongS.d_vec([](const SurfaceFramePoint& q) { return q.N; });
  const Vec3 dnu_Z = alongZ.d_vec([](const SurfaceFramePoint& q) { return q.nu; });
  const Vec3 dnu_S = alongS.d_vec([](const SurfaceFramePoint& q) { return q.nu; });
  const double thetaZ = sf.Z.dot(g.nabla(sf.Z, sf.nu, dnu_Z));
  const double thetaS = sf.Z.dot(g.nabla(sf.S, sf.nu, dnu_S));
  const double H = -thetaZ;
  // shape operator B(v) = -D_v N
  const double BZS = -sf.S.dot(g.levi_civita(sf.Z, sf.N, dN_Z));
  const double BSZ = -sf.Z.dot(g.levi_civita(sf.S, sf.N, dN_S));
  const double nh = sf.nh, gNT = sf.gNT, tZn = sf.tauZnu, tZZ = sf.tauZZ;

  IdentityResiduals r;
  r.frame_relations[0] = std::abs(nh * Znh + gNT * ZgNT);
  r.frame_relations[1] = std::abs(ZgNT / nh - (nh * ZgNT - gNT * Znh));
  r.frame_relations[2] = std::abs(BZS - (c1 / 2.0 - tZn + ZgNT / nh));
  r.frame_relations[3] = std::abs(BSZ - (-gNT * gNT * g.tau_form(sf.nu, sf.Z) + c1 / 2.0 * (nh * nh - gNT * gNT) - nh * thetaS));
  r.frame_relations[4] = std::abs(ZgNT / nh - (-c1 * gNT * gNT + nh * nh * tZn - nh * thetaS));

  // Riemannian divergence over the tangent basis {Z, S}
  const double f0 = f.value(p);
  const auto div = [&](const std::function<Vec3(const SurfaceFramePoint&)>& V) {
    const Vec3 dV_Z = alongZ.d_vec([&](const SurfaceFramePoint& q) { return f.value(q.point) * V(q); });
    const Vec3 dV_S = alongS.d_vec([&](const SurfaceFramePoint& q) { return f.value(q.point) * V(q); });
    const Vec3 fV = f0 * V(sf);
    return sf.Z.dot(g.levi_civita(sf.Z, fV, dV_Z)) + sf.S.dot(g.levi_civita(sf.S, fV, dV_S));
  };
  const Vec3 grad_f = f.gradient(p);
  const double Sf = grad_f.dot(sf.coord(sf.S)), Zf = grad_f.dot(sf.coord(sf.Z));
  r.div_S = std::abs(div([](const SurfaceFramePoint& q) { return q.S; }) - (Sf + f0 * gNT * thetaZ - f0 * nh * tZZ));
  r.div_Z = std::abs(div([](const SurfaceFramePoint& q) { return q.Z; }) -
                     (Zf - f0 * gNT * thetaS + f0 * gNT * nh * g.tau_form(sf.nu, sf.Z) +
                      c1 * f0 * gNT * nh * g.J_of(sf.nu).dot(sf.Z)));

  // brackets of the level-set extensions, compared in frame components
  const auto Zc = [&](const Coords& q) { return surface_field_coords(s, surf, q, SurfaceField::Z); };
  const auto nuc = [&](const Coords& q) { return surface_field_coords(s, surf, q, SurfaceField::Nu); };
  const auto Tc = [&](const Coords& q) { return Vec3(s.frame_matrix(q).row(2).transpose()); };
  const Vec3 T{0.0, 0.0, 1.0};
  const double thetaNu = sf.theta(sf.nu), thetaT = sf.theta(T);
  const Vec3 bZnu = g.frame_of(chart_bracket(Zc, nuc, p));
  const Vec3 bZT = g.frame_of(chart_bracket(Zc, Tc, p));
  const Vec3 bnuT = g.frame_of(chart_bracket(nuc, Tc, p));
  r.brackets[0] = (bZnu - (c1 * T + thetaZ * sf.Z + thetaNu * sf.nu)).norm();
  r.brackets[1] = (bZT - (tZZ * sf.Z + (tZn + thetaT) * sf.nu)).norm();
  r.brackets[2] = (bnuT - ((tZn - thetaT) * sf.Z + g.tau_form(sf.nu, sf.nu) * sf.nu)).norm();

  // curvature against torsion derivatives
  const double RTZ = g.curvature(T, sf.Z, sf.nu).dot(sf.Z);
  const double Z_tZn = alongZ.d([](const SurfaceFramePoint& q) { return q.tauZnu; });
  const Vec3 nu_coords = sf.coord(sf.nu);
  const double step = 1e-5;
  Coords a = p, b = p;
  for (int k = 0; k < 3; ++k) {
    a[k] += step * nu_coords[k];
    b[k] -= step * nu_coords[k];
  }
  const double nu_tZZ = (surface_frame(s, surf, a).tauZZ - surface_frame(s, surf, b).tauZZ) / (2.0 * step);
  r.curvature_T = std::abs(RTZ - (-nu_tZZ + Z_tZn - 2.0 * thetaNu * tZn + 2.0 * H * tZZ));
  r.curvature_T_minimal = std::abs(RTZ - Z_tZn - 2.0 * H * tZZ);
  return r;
}

}  // namespace fixtures
