#include "subriemann/curves.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace subriemann {

namespace {

using State = std::array<double, 5>;  // x, y, t, phi, lambda

void require_chart(const Structure& s) {
  if (s.kind() != Structure::Kind::CoordinateFrame)
    throw std::invalid_argument("curve integration needs a structure given on a coordinate chart");
}

State derivative(const Structure& s, const State& y, bool geodesic) {
  const Coords p{y[0], y[1], y[2]};
  const FrameGeometry g = s.at(p, Structure::Detail::Connection);
  const Vec3 z = direction(y[3]);
  const Vec3 dp = g.coords_of(z);
  State out{dp[0], dp[1], dp[2], phi_rate(g, y[3], y[4]), 0.0};
  if (geodesic) out[4] = -g.tau_form(z, z) / g.c1;
  return out;
}

State axpy(const State& y, double h, const State& k) {
  State out;
  for (int i = 0; i < 5; ++i) out[i] = y[i] + h * k[i];
  return out;
}

CurveTrace integrate(const Structure& s, const CharState& init, double s_end, const IntegrationOptions& opt,
                     bool geodesic) {
  require_chart(s);
  if (!s.domain().contains(init.point)) throw DomainError("initial point outside the chart domain");
  if (opt.step <= 0.0) throw std::invalid_argument("integration step must be positive");
  CurveTrace trace;
  trace.geodesic = geodesic;
  State y{init.point[0], init.point[1], init.point[2], init.phi, init.lambda};
  auto record = [&](double sv) { trace.samples.push_back({sv, {y[0], y[1], y[2]}, y[3], y[4]}); };
  record(0.0);
  if (s_end <= 0.0) return trace;
  const long steps = std::lround(std::ceil(s_end / opt.step - 1e-9));
  const double h = s_end / static_cast<double>(steps);
  for (long n = 0; n < steps; ++n) {
    try {
      const State k1 = derivative(s, y, geodesic);
      const State k2 = derivative(s, axpy(y, 0.5 * h, k1), geodesic);
      const State k3 = derivative(s, axpy(y, 0.5 * h, k2), geodesic);
      const State k4 = derivative(s, axpy(y, h, k3), geodesic);
      for (int i = 0; i < 5; ++i) y[i] += h * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]) / 6.0;
    } catch (const DomainError&) {
      trace.truncated = true;
      trace.note = "left the chart domain";
      return trace;
    }
    if (!s.domain().contains({y[0], y[1], y[2]})) {
      trace.truncated = true;
      trace.note = "left the chart domain";
      return trace;
    }
    if ((n + 1) % opt.record_every == 0 || n + 1 == steps) record(h * static_cast<double>(n + 1));
  }
  return trace;
}

// Cubic Lagrange interpolation through the four samples nearest to s.
double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double s) {
  const std::size_t n = xs.size();
  if (n == 1) return ys[0];
  std::size_t i = 0;
  while (i + 1 < n && xs[i + 1] <= s) ++i;
  std::size_t lo = i >= 1 ? i - 1 : 0;
  if (lo + 4 > n) lo = n >= 4 ? n - 4 : 0;
  const std::size_t hi = std::min(n, lo + 4);
  double sum = 0.0;
  for (std::size_t a = lo; a < hi; ++a) {
    double w = 1.0;
    for (std::size_t b = lo; b < hi; ++b)
      if (b != a) w *= (s - xs[b]) / (xs[a] - xs[b]);
    sum += w * ys[a];
  }
  return sum;
}

}  // namespace

double rotation_form(const FrameGeometry& g, const Vec3& v) {
  return v[0] * g.Gam[0](0, 1) + v[1] * g.Gam[1](0, 1) + v[2] * g.Gam[2](0, 1);
}

double phi_rate(const FrameGeometry& g, double phi, double lambda) {
  return -rotation_form(g, direction(phi)) - g.sign_c1 * g.c1 * lambda;
}

CurveTrace integrate_characteristic(const Structure& s, const CharState& init, double s_end,
                                    const IntegrationOptions& opt) {
  return integrate(s, init, s_end, opt, false);
}

CurveTrace integrate_geodesic(const Structure& s, const CharState& init, double s_end,
                              const IntegrationOptions& opt) {
  return integrate(s, init, s_end, opt, true);
}

double characteristic_residual(const Structure& s, const CurveTrace& trace) {
  const auto& v = trace.samples;
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    const double dphi = (v[i + 1].phi - v[i - 1].phi) / (v[i + 1].s - v[i - 1].s);
    const FrameGeometry g = s.at(v[i].point, Structure::Detail::Connection);
    worst = std::max(worst, std::abs(dphi - phi_rate(g, v[i].phi, v[i].lambda)));
  }
  return worst;
}

RtInitialData rt_initial_data(const CharState& state) {
  const double a = state.point[2];
  return {state.point[0], state.point[1], a,
          std::sin(state.phi) * std::cos(a), std::sin(state.phi) * std::sin(a), std::cos(state.phi)};
}

Coords rt_characteristic_closed_form(const RtInitialData& in, double t) {
  const double ca = std::cos(in.alpha0), sa = std::sin(in.alpha0);
  if (std::abs(in.dx0 * sa - in.dy0 * ca) > 1e-12 * std::max(1.0, std::hypot(in.dx0, in.dy0)))
    throw std::invalid_argument("initial velocity is not horizontal");
  const double r0 = in.dx0 * ca + in.dy0 * sa;
  if (in.dalpha0 == 0.0) return {in.x0 + r0 * ca * t, in.y0 + r0 * sa * t, in.alpha0};
  // (sin a - sin a0) / dalpha0 written through sinc so small dalpha0 stays accurate
  const double half = 0.5 * in.dalpha0 * t;
  const double sinc = std::abs(half) < 1e-8 ? 1.0 - half * half / 6.0 : std::sin(half) / half;
  const double mid = in.alpha0 + half;
  return {in.x0 + r0 * t * sinc * std::cos(mid), in.y0 + r0 * t * sinc * std::sin(mid), in.alpha0 + in.dalpha0 * t};
}

JacobiCoefficients jacobi_coefficients(const Structure& s, const CurveSample& sample) {
  const FrameGeometry g = s.at(sample.point);
  const double c1 = g.c1;
  const Vec3 z = direction(sample.phi);
  const Vec3 jz = g.J_of(z);
  const Vec3 t(0.0, 0.0, 1.0);
  const double lambda = sample.lambda;
  const double tau11 = g.tau_form(z, z);
  const double tau12 = g.tau_form(z, jz);
  const double rho = g.curvature(z, t, z).dot(jz);
  const double dphi = phi_rate(g, sample.phi, lambda);
  const double dtau12 = z.dot(g.tau_derivative(z) * jz) + dphi * (g.tau_form(jz, jz) - tau11);
  return {g.webster() + c1 * tau12 + c1 * c1 * lambda * lambda, c1 * lambda * tau11 + rho + dtau12};
}

JacobiTrace jacobi_vertical_ode(const Structure& s, const CurveTrace& base, const std::array<double, 3>& init,
                                double residual_tolerance) {
  JacobiTrace out;
  const auto& smp = base.samples;
  if (smp.empty()) return out;
  if (smp.size() >= 3) {
    const double res = characteristic_residual(s, base);
    if (res > residual_tolerance)
      throw std::invalid_argument("base curve is not a characteristic curve (residual " + std::to_string(res) + ")");
  }
  const double c1 = s.c1();
  std::vector<double> xs(smp.size()), b1(smp.size()), b2(smp.size());
  for (std::size_t i = 0; i < smp.size(); ++i) {
    const auto c = jacobi_coefficients(s, smp[i]);
    xs[i] = smp[i].s;
    b1[i] = c.beta1;
    b2[i] = c.beta2;
  }
  using F = std::array<double, 3>;
  auto rhs = [&](double sv, const F& f) {
    const double p = interpolate(xs, b1, sv), q = interpolate(xs, b2, sv);
    return F{f[1], f[2], -p * f[1] - c1 * q * f[0]};
  };
  F f = init;
  auto push = [&](std::size_t i) {
    out.samples.push_back({xs[i], f[0], f[1], f[2], std::numeric_limits<double>::quiet_NaN(), f[1] / c1, b1[i], b2[i]});
  };
  push(0);
  for (std::size_t i = 0; i + 1 < smp.size(); ++i) {
    const double h = xs[i + 1] - xs[i], sv = xs[i];
    auto add = [](const F& a, double k, const F& b) { return F{a[0] + k * b[0], a[1] + k * b[1], a[2] + k * b[2]}; };
    const F k1 = rhs(sv, f);
    const F k2 = rhs(sv + 0.5 * h, add(f, 0.5 * h, k1));
    const F k3 = rhs(sv + 0.5 * h, add(f, 0.5 * h, k2));
    const F k4 = rhs(sv + h, add(f, h, k3));
    for (int j = 0; j < 3; ++j) f[j] += h * (k1[j] + 2.0 * (k2[j] + k3[j]) + k4[j]) / 6.0;
    push(i + 1);
  }
  out.truncated = base.truncated;
  return out;
}

namespace {

Coords flow_constant_field(const Structure& s, Coords p, const Vec3& field, double length) {
  if (length == 0.0 || field.isZero()) return p;
  const int n = std::max(4, static_cast<int>(std::ceil(std::abs(length) / 1e-3)));
  const double h = length / n;
  auto f = [&](const Vec3& q) { return Vec3(s.frame_matrix(to_coords(q)).transpose() * field); };
  Vec3 y = to_vec(p);
  for (int i = 0; i < n; ++i) {
    const Vec3 k1 = f(y), k2 = f(y + 0.5 * h * k1), k3 = f(y + 0.5 * h * k2), k4 = f(y + h * k3);
    y += h * (k1 + 2.0 * (k2 + k3) + k4) / 6.0;
  }
  return to_coords(y);
}

CharState family_member(const Structure& s, const CurveFamily& fam, double eps) {
  CharState st = fam.base;
  st.point = flow_constant_field(s, fam.base.point, fam.transverse, eps);
  st.phi = fam.base.phi + eps * fam.dphi;
  return st;
}

}  // namespace

std::array<double, 3> jacobi_initial_data(const Structure& s, const CurveFamily& fam) {
  const FrameGeometry g = s.at(fam.base.point);
  const double c1 = g.c1;
  const Vec3 z = direction(fam.base.phi);
  const Vec3 jz = g.J_of(z);
  const Vec3& v = fam.transverse;
  const Vec3 nabla_v_z = g.nabla(v, z, fam.dphi * jz);
  return {v[2], c1 * jz.dot(v), c1 * (c1 * fam.base.lambda * z.dot(v) + jz.dot(nabla_v_z + g.torsion(z, v)))};
}

JacobiTrace jacobi_from_curve_family(const Structure& s, const CurveFamily& fam, double s_end, double eps,
                                     const IntegrationOptions& opt) {
  const CurveTrace plus = integrate_characteristic(s, family_member(s, fam, eps), s_end, opt);
  const CurveTrace minus = integrate_characteristic(s, family_member(s, fam, -eps), s_end, opt);
  const CurveTrace mid = integrate_characteristic(s, fam.base, s_end, opt);
  JacobiTrace out;
  const std::size_t n = std::min({plus.samples.size(), minus.samples.size(), mid.samples.size()});
  out.truncated = n < mid.samples.size() || plus.truncated || minus.truncated || mid.truncated;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& m = mid.samples[i];
    Vec3 dv;
    for (int k = 0; k < 3; ++k) dv[k] = (plus.samples[i].point[k] - minus.samples[i].point[k]) / (2.0 * eps);
    const FrameGeometry g = s.at(m.point, Structure::Detail::Connection);
    const Vec3 v = g.frame_of(dv);
    const Vec3 z = direction(m.phi);
    JacobiSample js;
    js.s = m.s;
    js.gVT = v[2];
    js.gVZ = v.dot(z);
    js.gVJZ = v.dot(g.J_of(z));
    js.beta1 = js.beta2 = std::numeric_limits<double>::quiet_NaN();
    out.samples.push_back(js);
  }
  // derivatives of the vertical component by central differences in s
  auto& v = out.samples;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1, b = std::min(v.size() - 1, i + 1);
    v[i].dgVT = b > a ? (v[b].gVT - v[a].gVT) / (v[b].s - v[a].s) : 0.0;
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i == 0 || i + 1 >= v.size()) {
      v[i].ddgVT = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const double h = v[i + 1].s - v[i].s;
    v[i].ddgVT = (v[i + 1].gVT - 2.0 * v[i].gVT + v[i - 1].gVT) / (h * h);
  }
  return out;
}

}  // namespace subriemann
