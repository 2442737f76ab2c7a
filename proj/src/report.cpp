#include "subriemann/report.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace subriemann {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

ScalarField chart(const char* text) { return ScalarField::from_expr(ExprFn::parse(text)); }

ScalarField window(const ScalarField& inner, double a, double b, double ramp) {
  return ScalarField::compose([=](double t) { return window_profile(t, a, b, ramp); }, inner);
}

ScalarField radial_cutoff(double r_in, double r_out) {
  return ScalarField::compose([=](double t) { return cutoff_profile(t, r_in * r_in, r_out * r_out); },
                              chart("x^2 + y^2"));
}

double uniform(std::mt19937_64& rng, double a, double b) {
  // fixed mapping of the raw engine output, portable across standard libraries
  return a + (b - a) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

std::vector<double> symmetric(std::initializer_list<double> radii) {
  std::vector<double> out{0.0};
  for (double r : radii) {
    out.push_back(r);
    out.push_back(-r);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<TestFunction> helicoid_admissible_functions(int count, unsigned seed, double tube) {
  std::mt19937_64 rng(seed);
  std::vector<TestFunction> out;
  for (int k = 0; k < count; ++k) {
    const double r_in = uniform(rng, tube + 0.05, 0.4);
    const double r_mid = r_in + uniform(rng, 0.1, 0.3);
    const double r_out = r_mid + uniform(rng, 0.1, 0.3);
    const double a = uniform(rng, 0.5, 3.0), b = a + uniform(rng, 0.3, 1.5), ramp = uniform(rng, 0.2, 0.6);
    const double c0 = uniform(rng, 0.5, 1.5), c1 = uniform(rng, -0.5, 0.5), c2 = uniform(rng, -0.5, 0.5);
    const double d = uniform(rng, -0.5, 0.5);
    const ScalarField amp = ScalarField::from_expr(ExprFn::constant(c0) + c1 * sin(ExprFn::variable(2)) +
                                                   c2 * cos(2.0 * ExprFn::variable(2)));
    TestFunction f;
    f.u = amp * window(chart("alpha"), a, b, ramp) * (radial_cutoff(r_in, r_out) + d * radial_cutoff(r_in, r_mid));
    f.patch.map = {ExprFn::parse("x*cos(y)"), ExprFn::parse("x*sin(y)"), ExprFn::parse("y")};
    f.patch.u_range = {-r_out, r_out};
    f.patch.u_breaks = symmetric({r_in, r_mid});
    f.patch.v_range = {a - ramp, b + ramp};
    f.patch.v_breaks = {a, b};
    f.description = "radii " + std::to_string(r_in) + ", " + std::to_string(r_mid) + ", " + std::to_string(r_out) +
                    "; alpha window [" + std::to_string(a) + ", " + std::to_string(b) + "]";
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<TestFunction> vertical_plane_functions(int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::vector<TestFunction> out;
  for (int k = 0; k < count; ++k) {
    const double x0 = uniform(rng, -0.3, 0.3), y0 = uniform(rng, -0.3, 0.3);
    const double wx = uniform(rng, 0.1, 0.4), wy = uniform(rng, 0.1, 0.4);
    const double rx = uniform(rng, 0.1, 0.3), ry = uniform(rng, 0.1, 0.3);
    const double c1 = uniform(rng, -1.0, 1.0), c2 = uniform(rng, -1.0, 1.0);
    TestFunction f;
    f.u = window(chart("x"), x0 - wx, x0 + wx, rx) * window(chart("y"), y0 - wy, y0 + wy, ry) *
          ScalarField::from_expr(1.0 + c1 * ExprFn::variable(0) + c2 * ExprFn::variable(1) * ExprFn::variable(1));
    f.patch.map = {ExprFn::variable(0), ExprFn::variable(1), ExprFn::constant(0.3)};
    f.patch.u_range = {x0 - wx - rx, x0 + wx + rx};
    f.patch.u_breaks = {x0 - wx, x0 + wx};
    f.patch.v_range = {y0 - wy - ry, y0 + wy + ry};
    f.patch.v_breaks = {y0 - wy, y0 + wy};
    f.description = "bump at (" + std::to_string(x0) + ", " + std::to_string(y0) + ")";
    out.push_back(std::move(f));
  }
  return out;
}

TestFunction plane_cos_bump(double x0) {
  const double k = kPi / (2.0 * x0);
  TestFunction f;
  f.u = ScalarField::compose(
      [=](double x) -> std::array<double, 3> {
        if (std::abs(x) >= x0) return {0.0, 0.0, 0.0};
        return {std::cos(k * x), -k * std::sin(k * x), -k * k * std::cos(k * x)};
      },
      chart("x"));
  f.patch.map = {ExprFn::variable(0), ExprFn::constant(0.0), ExprFn::variable(1)};
  f.patch.u_range = {-x0, x0};
  f.patch.v_range = {0.0, 2.0 * kPi};
  f.patch.v_breaks = {kPi};
  f.description = "cos(pi x / " + std::to_string(2.0 * x0) + ") on [-" + std::to_string(x0) + ", " +
                  std::to_string(x0) + "]";
  return f;
}

std::vector<SingularCurveParam> plane_y0_curves(double x0) {
  const ExprFn x = ExprFn::variable(0), zero = ExprFn::constant(0.0);
  return {{{x, zero, zero}, {-x0, x0}}, {{x, zero, ExprFn::constant(kPi)}, {-x0, x0}}};
}

bool RtReport::all_pass() const {
  for (const auto& it : items)
    if (!it.pass) return false;
  return true;
}

json RtReport::to_json() const {
  json j;
  j["items"] = json::array();
  for (const auto& it : items)
    j["items"].push_back({{"id", it.id}, {"claim", it.claim}, {"pass", it.pass}, {"detail", it.detail}, {"data", it.data}});
  j["surfaces"] = surfaces;
  j["all_pass"] = all_pass();
  return j;
}

namespace {

struct CriterionRange {
  double min = 0.0, max = 0.0;
  double max_H = 0.0;
};

// Samples the criterion and |H| on a grid of the entry's patch, skipping
// singular points.
CriterionRange sample_patch(const Structure& s, const SurfaceEntry& e, int n = 12) {
  CriterionRange r{1e300, -1e300, 0.0};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double u = e.patch.u_range[0] + (e.patch.u_range[1] - e.patch.u_range[0]) * (i + 0.5) / n;
      const double v = e.patch.v_range[0] + (e.patch.v_range[1] - e.patch.v_range[0]) * (j + 0.5) / n;
      try {
        const SurfaceFramePoint sf = surface_frame(s, e.surface, e.surface.project(e.patch.point(u, v)));
        const double c = stability_criterion(sf);
        r.min = std::min(r.min, c);
        r.max = std::max(r.max, c);
        r.max_H = std::max(r.max_H, std::abs(sf.H));
      } catch (const SingularPointError&) {
      }
    }
  return r;
}

const Box kSearchBox{{-2.0, -2.0, 0.05}, {2.0, 2.0, 2.0 * kPi - 0.05}};

std::vector<StationarityReport> stationarity(const Structure& s, const SurfaceEntry& e) {
  SingularSearch search;
  search.grid = {16, 16, 16};
  std::vector<StationarityReport> out;
  for (const auto& locus : singular_set_detect(s, e.surface, kSearchBox, search))
    if (locus.kind == SingularLocus::Kind::Curve) out.push_back(stationarity_at_singular_curve(s, e.surface, locus));
  return out;
}

json stationarity_json(const std::vector<StationarityReport>& reps) {
  json a = json::array();
  for (const auto& r : reps)
    a.push_back({{"orthogonal", r.orthogonal}, {"inconclusive", r.inconclusive}, {"max_deviation", r.max_deviation}});
  return a;
}

}  // namespace

RtReport run_rt_report(const RtReportOptions& opt) {
  RtReport rep;
  const Structure rt = rt_structure();
  const auto surfaces = catalog_rt_surfaces();
  auto entry = [&](const std::string& name) -> const SurfaceEntry& {
    for (const auto& e : surfaces)
      if (e.name == name) return e;
    throw std::logic_error("missing catalog surface " + name);
  };

  // (a) vertical planes
  {
    const SurfaceEntry& e = entry("vertical-plane");
    const CriterionRange cr = sample_patch(rt, e);
    double min_I = 1e300;
    json values = json::array();
    for (const auto& f : vertical_plane_functions(opt.index_samples, opt.seed)) {
      const ParametricMeasure m(rt, f.patch, {12, 1, 1});
      const CanonicalReduction c = canonical_reduction(rt, e.surface, m, f.u);
      min_I = std::min(min_I, c.lhs);
      values.push_back(c.lhs);
    }
    ReportItem it{"a", "vertical planes: criterion identically zero and I(u|N_h|, u|N_h|) >= 0", false, "", {}};
    it.pass = std::max(std::abs(cr.min), std::abs(cr.max)) <= 1e-12 && min_I >= opt.q_floor;
    it.detail = "criterion in [" + std::to_string(cr.min) + ", " + std::to_string(cr.max) +
                "], min I = " + std::to_string(min_I);
    it.data = {{"criterion_minmax", {cr.min, cr.max}}, {"index_form_samples", values}};
    rep.items.push_back(std::move(it));
  }
  // (b) left-handed helicoids
  {
    const SurfaceEntry& e = entry("left-helicoid");
    const CriterionRange cr = sample_patch(rt, e);
    ReportItem it{"b", "left-handed helicoid: criterion > 0 off the axis", cr.min > 0.0, "", {}};
    it.detail = "criterion in [" + std::to_string(cr.min) + ", " + std::to_string(cr.max) + "]";
    it.data = {{"criterion_minmax", {cr.min, cr.max}}};
    rep.items.push_back(std::move(it));
  }
  // (c) right-handed helicoid
  {
    const SurfaceEntry& e = entry("right-helicoid");
    const auto st = stationarity(rt, e);
    bool orth = !st.empty();
    double dev = 0.0;
    for (const auto& r : st) {
      orth = orth && r.orthogonal && r.max_deviation <= opt.stationarity_tol;
      dev = std::max(dev, r.max_deviation);
    }
    double min_Q = 1e300;
    json values = json::array();
    QOptions qo;
    qo.tube = opt.tube;
    for (const auto& f : helicoid_admissible_functions(opt.q_samples, opt.seed, opt.tube)) {
      const ParametricMeasure m(rt, f.patch, {12, 1, 1});
      const SingularCurveParam axis{e.singular_curves[0].map, f.patch.v_range, f.patch.v_breaks};
      const QReport q = stability_quadratic_Q(rt, e.surface, m, {axis}, f.u, qo);
      min_Q = std::min(min_Q, q.value);
      values.push_back({{"Q", q.value}, {"regular", q.regular}, {"line", q.line}, {"tangential", q.tangential}});
    }
    ReportItem it{"c", "right-handed helicoid: stationary and Q(u) >= 0 on admissible samples", false, "", {}};
    it.pass = orth && min_Q >= opt.q_floor;
    it.detail = "orthogonality deviation " + std::to_string(dev) + " rad over " + std::to_string(st.size()) +
                " curve(s), min Q = " + std::to_string(min_Q) + " over " + std::to_string(opt.q_samples) + " functions";
    it.data = {{"stationarity", stationarity_json(st)}, {"Q_values", values}};
    rep.items.push_back(std::move(it));
  }
  // (d) plane y = 0
  {
    const SurfaceEntry& e = entry("plane-y0");
    json values = json::array();
    bool found = false;
    double best = 1e300;
    for (double x0 : opt.plane_widths) {
      const TestFunction f = plane_cos_bump(x0);
      const ParametricMeasure m(rt, f.patch, {16, 8, 2});
      const QReport q = stability_quadratic_Q(rt, e.surface, m, plane_y0_curves(x0), f.u);
      values.push_back({{"x0", x0}, {"Q", q.value}, {"regular", q.regular}, {"line", q.line}, {"tangential", q.tangential}});
      best = std::min(best, q.value);
      found = found || q.value < 0.0;
    }
    ReportItem it{"d", "plane y = 0: an explicit u with Q(u) < 0", found, "", {}};
    it.detail = found ? "negative direction found"
                      : "no negative direction among the cos bumps; smallest Q = " + std::to_string(best);
    it.data = {{"Q_values", values}};
    rep.items.push_back(std::move(it));
  }
  // (e) x + sin(alpha) = 0
  {
    const SurfaceEntry& e = entry("x-plus-sin");
    const auto st = stationarity(rt, e);
    bool fails = !st.empty();
    for (const auto& r : st) fails = fails && !r.orthogonal && !r.inconclusive;
    ReportItem it{"e", "x + sin(alpha) = 0 fails the orthogonality test", fails, "", {}};
    it.detail = std::to_string(st.size()) + " singular curve(s), none orthogonal: " + (fails ? "yes" : "no");
    it.data = {{"stationarity", stationarity_json(st)}};
    rep.items.push_back(std::move(it));
  }

  // per-surface table: tags against what the engine finds
  rep.surfaces = json::array();
  for (const auto& e : surfaces) {
    const CriterionRange cr = sample_patch(rt, e);
    json row{{"name", e.name},
             {"description", e.description},
             {"tags", {{"minimal", e.tags.minimal}, {"stationary", e.tags.stationary}}},
             {"max_H", cr.max_H},
             {"criterion_minmax", {cr.min, cr.max}}};
    row["tags"]["stable"] = e.tags.stable ? json(*e.tags.stable) : json(nullptr);
    if (!e.singular_curves.empty()) {
      const auto st = stationarity(rt, e);
      bool orth = !st.empty();
      for (const auto& r : st) orth = orth && r.orthogonal;
      row["stationarity"] = stationarity_json(st);
      row["engine_stationary"] = cr.max_H <= 1e-8 && orth;
    } else {
      row["engine_stationary"] = cr.max_H <= 1e-8;
    }
    row["notes"] = e.notes;
    rep.surfaces.push_back(row);
  }
  return rep;
}

}  // namespace subriemann
