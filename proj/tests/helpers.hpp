// Shared fixtures: seeded sampling, random surfaces, compactly supported
// test functions with panel edges on their kinks.
#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "subriemann/catalog.hpp"
#include "subriemann/curves.hpp"
#include "subriemann/variation.hpp"

namespace fixtures {

using namespace subriemann;

constexpr double kPi = std::numbers::pi;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform(double a, double b) { return a + (b - a) * (static_cast<double>(engine_() >> 11) * 0x1.0p-53); }
  int integer(int lo, int hi) { return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1)); }

 private:
  std::mt19937_64 engine_;
};

inline ExprFn var(int i) { return ExprFn::variable(i); }
inline ScalarField field(const ExprFn& e) { return ScalarField::from_expr(e); }
inline ScalarField field(const char* text) { return ScalarField::from_expr(ExprFn::parse(text)); }

inline ScalarField window(const ScalarField& inner, double a, double b, double ramp) {
  return ScalarField::compose([=](double t) { return window_profile(t, a, b, ramp); }, inner);
}

// Cubic polynomial in x, y with random coefficients.
inline ExprFn random_cubic(Rng& rng, double scale = 0.5) {
  const ExprFn x = var(0), y = var(1);
  const std::vector<ExprFn> monomials{x, y, x * x, x * y, y * y, x * x * x, x * x * y, x * y * y, y * y * y};
  ExprFn u = ExprFn::constant(rng.uniform(-scale, scale));
  for (const auto& m : monomials) u = u + rng.uniform(-scale, scale) * m;
  return u;
}

// A random cubic in x, y with a random polynomial coefficient of t, as a
// function on the chart.
inline ExprFn random_chart_polynomial(Rng& rng) {
  return random_cubic(rng, 1.0) + rng.uniform(-1.0, 1.0) * var(2) + rng.uniform(-0.5, 0.5) * var(0) * var(2);
}

struct SampledSurface {
  std::string name;
  const Structure* structure;
  ImplicitSurface surface;
  Parametrization patch;
};

// A point of the patch where |N_h| is at least nh_min.
inline Coords regular_point(const SampledSurface& s, Rng& rng, double nh_min = 0.1) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const auto& P = s.patch;
    const Coords p = P.point(rng.uniform(P.u_range[0], P.u_range[1]), rng.uniform(P.v_range[0], P.v_range[1]));
    try {
      if (surface_frame(*s.structure, s.surface, p).nh >= nh_min) return p;
    } catch (const SingularPointError&) {
    }
  }
  throw std::runtime_error("no regular point found on " + s.name);
}

inline SampledSurface heisenberg_graph(const Structure& h, const ExprFn& u, const std::string& name) {
  const GraphSurface gs(u, {-1.0, 1.0}, {-1.0, 1.0}, name);
  SampledSurface out{name, &h, gs.implicit(), {}};
  out.patch.map = {var(0), var(1), u};
  out.patch.u_range = {-1.0, 1.0};
  out.patch.v_range = {-1.0, 1.0};
  return out;
}

inline std::vector<SampledSurface> rt_catalog_samples(const Structure& rt) {
  std::vector<SampledSurface> out;
  for (const auto& e : catalog_rt_surfaces()) out.push_back({e.name, &rt, e.surface, e.patch});
  return out;
}

// Compactly supported function on a patch whose first two chart
// coordinates are the patch parameters, with matching breakpoints.
struct Bump {
  ScalarField u;
  Parametrization patch;
};

inline Bump chart_bump(Rng& rng, const Parametrization& base, double cx, double cy, double w, double ramp) {
  Bump b;
  const double c1 = rng.uniform(-1.0, 1.0), c2 = rng.uniform(-1.0, 1.0), c3 = rng.uniform(-1.0, 1.0);
  b.u = window(field(var(0)), cx - w, cx + w, ramp) * window(field(var(1)), cy - w, cy + w, ramp) *
        field(1.0 + c1 * var(0) + c2 * var(1) * var(1) + c3 * sin(var(2)));
  b.patch = base;
  b.patch.u_range = {cx - w - ramp, cx + w + ramp};
  b.patch.v_range = {cy - w - ramp, cy + w + ramp};
  b.patch.u_breaks = {cx - w, cx + w};
  b.patch.v_breaks = {cy - w, cy + w};
  return b;
}

// Bump on a helicoid through the t axis, supported in an annulus away from
// the axis. Right-handed: (r cos a, r sin a, a); left-handed: (-r sin a, r cos a, a).
inline Bump helicoid_bump(Rng& rng, bool right_handed = true) {
  const double r0 = rng.uniform(0.3, 0.6), dr = rng.uniform(0.1, 0.3), rr = rng.uniform(0.1, 0.2);
  const double a0 = rng.uniform(0.5, 2.5), da = rng.uniform(0.2, 0.8), ra = rng.uniform(0.2, 0.5);
  const double c1 = rng.uniform(-1.0, 1.0), c2 = rng.uniform(-1.0, 1.0);
  Bump b;
  const double lo = r0, hi = r0 + dr;
  b.u = window(field(sqrt(var(0) * var(0) + var(1) * var(1))), lo, hi, rr) *
        window(field(var(2)), a0, a0 + da, ra) * field(1.0 + c1 * var(0) + c2 * cos(var(2)));
  if (right_handed)
    b.patch.map = {var(0) * cos(var(1)), var(0) * sin(var(1)), var(1)};
  else
    b.patch.map = {-var(0) * sin(var(1)), var(0) * cos(var(1)), var(1)};
  b.patch.u_range = {lo - rr, hi + rr};
  b.patch.u_breaks = {lo, hi};
  b.patch.v_range = {a0 - ra, a0 + da + ra};
  b.patch.v_breaks = {a0, a0 + da};
  return b;
}

inline SurfaceEntry rt_entry(const char* name) {
  auto e = find_rt_surface(name);
  if (!e) throw std::runtime_error(std::string("no catalog surface ") + name);
  return *e;
}

// Nonminimal Heisenberg graph with a compact variation inside [0.2, 0.8]^2.
struct GraphCase {
  ExprFn u = ExprFn::parse("0.3*x^2 + 0.2*x*y - 0.1*y^3 + 0.5*x");
  SampledSurface graph;
  ScalarField bump;
  Parametrization patch;
  explicit GraphCase(const Structure& h) : graph(heisenberg_graph(h, u, "cubic")) {
    bump = window(field(var(0)), 0.45, 0.55, 0.23) * window(field(var(1)), 0.5, 0.5, 0.28);
    patch = graph.patch;
    patch.u_range = {0.2, 0.8};
    patch.v_range = {0.2, 0.8};
    patch.u_breaks = {0.22, 0.45, 0.55, 0.78};
    patch.v_breaks = {0.22, 0.5, 0.78};
  }
};

// Minimal surfaces with a compactly supported function and a matching patch.
struct MinimalSample {
  const Structure* structure;
  ImplicitSurface surface;
  Bump bump;
};

inline MinimalSample minimal_sample(Rng& rng, int kind, const Structure& rt, const Structure& h) {
  switch (kind) {
    case 0: {
      const SurfaceEntry vp = rt_entry("vertical-plane");
      return {&rt, vp.surface,
              chart_bump(rng, vp.patch, rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(0.1, 0.3), rng.uniform(0.1, 0.3))};
    }
    case 1: return {&rt, rt_entry("right-helicoid").surface, helicoid_bump(rng, true)};
    case 2: return {&rt, rt_entry("left-helicoid").surface, helicoid_bump(rng, false)};
    case 3: {
      // plane t = a x + b y + c, singular at (-b, a)
      const ExprFn u = rng.uniform(-0.2, 0.2) * var(0) + rng.uniform(-0.2, 0.2) * var(1) + rng.uniform(-1, 1);
      const SampledSurface g = heisenberg_graph(h, u, "plane");
      return {&h, g.surface,
              chart_bump(rng, g.patch, rng.uniform(0.4, 0.6), rng.uniform(0.4, 0.6), rng.uniform(0.1, 0.2), rng.uniform(0.1, 0.2))};
    }
    default: {
      // t = x y + b y, singular along x = -b/2
      const ExprFn u = var(0) * var(1) + rng.uniform(-0.2, 0.2) * var(1);
      const SampledSurface g = heisenberg_graph(h, u, "saddle");
      return {&h, g.surface,
              chart_bump(rng, g.patch, rng.uniform(0.4, 0.6), rng.uniform(-0.5, 0.5), rng.uniform(0.1, 0.2), rng.uniform(0.1, 0.2))};
    }
  }
}

}  // namespace fixtures
