// Characteristic curves, sub-Riemannian geodesics and the vertical
// component of Jacobi-like fields along them.
#pragma once

#include <array>
#include <string>
#include <vector>

#include "subriemann/structure.hpp"

namespace subriemann {

// Point plus the angle of the unit horizontal direction
// Z = cos(phi) X + sin(phi) Y, and the curvature lambda.
struct CharState {
  Coords point{};
  double phi = 0.0;
  double lambda = 0.0;
};

struct CurveSample {
  double s = 0.0;
  Coords point{};
  double phi = 0.0;
  double lambda = 0.0;
};

struct CurveTrace {
  std::vector<CurveSample> samples;
  bool geodesic = false;
  bool truncated = false;  // left the chart domain before s_end
  std::string note;
};

struct IntegrationOptions {
  double step = 1e-3;
  int record_every = 1;
};

inline Vec3 direction(double phi) { return {std::cos(phi), std::sin(phi), 0.0}; }

// Connection one-form g(nabla_V X, Y); the angle of a horizontal field
// with constant frame components rotates at this rate relative to nabla.
double rotation_form(const FrameGeometry& g, const Vec3& v);

// Right-hand side of the angle equation: phi' = -omega(Z) - c1 lambda.
double phi_rate(const FrameGeometry& g, double phi, double lambda);

CurveTrace integrate_characteristic(const Structure& s, const CharState& init, double s_end,
                                    const IntegrationOptions& opt = {});
// Adds lambda' = -(1/c1) g(tau(gamma'), gamma').
CurveTrace integrate_geodesic(const Structure& s, const CharState& init, double s_end,
                              const IntegrationOptions& opt = {});

// Largest |phi' + omega(Z) + c1 lambda| over a trace, with phi' from
// central differences of the samples.
double characteristic_residual(const Structure& s, const CurveTrace& trace);

// Roto-translation closed form for zero curvature. The initial velocity
// (dx0, dy0, dalpha0) must be horizontal.
struct RtInitialData {
  double x0 = 0.0, y0 = 0.0, alpha0 = 0.0;
  double dx0 = 0.0, dy0 = 0.0, dalpha0 = 0.0;
};
Coords rt_characteristic_closed_form(const RtInitialData& init, double t);
RtInitialData rt_initial_data(const CharState& state);

struct JacobiSample {
  double s = 0.0;
  double gVT = 0.0, dgVT = 0.0, ddgVT = 0.0;
  double gVZ = 0.0, gVJZ = 0.0;
  double beta1 = 0.0, beta2 = 0.0;
};

struct JacobiTrace {
  std::vector<JacobiSample> samples;
  bool truncated = false;
  std::string note;
};

struct JacobiCoefficients {
  double beta1 = 0.0;
  double beta2 = 0.0;
};

// Coefficients of f''' + beta1 f' + c1 beta2 f = 0 for f = g(V, T) along a
// characteristic curve at the given state.
JacobiCoefficients jacobi_coefficients(const Structure& s, const CurveSample& sample);

// Integrates the vertical equation along a recorded characteristic trace.
// init = (f(0), f'(0), f''(0)).
JacobiTrace jacobi_vertical_ode(const Structure& s, const CurveTrace& base, const std::array<double, 3>& init,
                                double residual_tolerance = 1e-6);

// A one-parameter family of characteristic curves of common curvature:
// the initial points run along the flow of a horizontal field with
// constant frame components, the initial angle changes at rate dphi.
struct CurveFamily {
  CharState base;
  Vec3 transverse = Vec3::Zero();
  double dphi = 0.0;
};

// Finite-difference Jacobi field: V = (F(eps, s) - F(-eps, s)) / (2 eps).
JacobiTrace jacobi_from_curve_family(const Structure& s, const CurveFamily& family, double s_end, double eps,
                                     const IntegrationOptions& opt = {});

// Initial data (f, f', f'') of the family at s = 0.
std::array<double, 3> jacobi_initial_data(const Structure& s, const CurveFamily& family);

}  // namespace subriemann
