// Stability survey of the roto-translation catalog: criterion signs,
// stationarity at singular curves, sampled quadratic forms and the search
// for negative directions on planes.
#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "subriemann/catalog.hpp"

namespace subriemann {

// A test function together with a patch whose panel edges sit on its kinks.
struct TestFunction {
  ScalarField u;
  Parametrization patch;
  std::string description;
};

// Admissible functions on the right-handed helicoid: constant near the axis
// inside radius > tube, windowed in alpha, random coefficients.
std::vector<TestFunction> helicoid_admissible_functions(int count, unsigned seed, double tube = 0.1);
// Compact bumps on the vertical plane alpha = 0.3.
std::vector<TestFunction> vertical_plane_functions(int count, unsigned seed);
// cos(pi x / (2 x0)) on [-x0, x0], zero outside, independent of alpha.
TestFunction plane_cos_bump(double x0);
std::vector<SingularCurveParam> plane_y0_curves(double x0);

struct RtReportOptions {
  int q_samples = 50;
  int index_samples = 10;
  unsigned seed = 1;
  double tube = 0.1;
  std::vector<double> plane_widths{10.0, 20.0, 40.0, 80.0};
  double stationarity_tol = 1e-6;
  double q_floor = -1e-8;
};

struct ReportItem {
  std::string id;
  std::string claim;
  bool pass = false;
  std::string detail;
  nlohmann::json data;
};

struct RtReport {
  std::vector<ReportItem> items;
  nlohmann::json surfaces;  // per catalog surface: tags and engine findings
  bool all_pass() const;
  nlohmann::json to_json() const;
};

RtReport run_rt_report(const RtReportOptions& opt = {});

}  // namespace subriemann
