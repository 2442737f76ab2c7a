// Command-line front end. Exit codes: 0 ok, 1 a checked property failed,
// 2 invalid input.
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "subriemann/catalog.hpp"
#include "subriemann/curves.hpp"
#include "subriemann/io.hpp"
#include "subriemann/report.hpp"

using namespace subriemann;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kPropertyFailure = 1;
constexpr int kInputError = 2;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> split_numbers(const std::string& text, std::size_t expected, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError(what + ": '" + item + "' is not a number");
    }
  }
  if (expected && out.size() != expected)
    throw InputError(what + ": expected " + std::to_string(expected) + " comma-separated numbers");
  return out;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

// Writes CSV to a file when a path is given, otherwise to stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw InputError("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

// ---------------------------------------------------------------- structure

int structure_info(const std::string& ref, const std::string& point_text, bool as_json) {
  const Structure s = load_structure(ref);
  Coords p{0.0, 0.0, 0.0};
  if (!point_text.empty()) {
    const auto v = split_numbers(point_text, 3, "--point");
    p = {v[0], v[1], v[2]};
  }
  const FrameGeometry g = s.at(p);
  json j;
  j["name"] = s.name();
  j["kind"] = s.kind() == Structure::Kind::LieGroup ? "lie-group" : "frame";
  j["point"] = p;
  j["c1"] = s.c1();
  j["swapped_xy"] = s.swapped_xy();
  j["webster"] = g.webster() + 0.0;
  j["tau_norm"] = g.tau_norm();
  j["tau"] = {{g.tau(0, 0), g.tau(0, 1)}, {g.tau(1, 0), g.tau(1, 1)}};
  const char* names[] = {"X", "Y", "T"};
  json br = json::object();
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      br[std::string("[") + names[a] + "," + names[b] + "]"] = {g.C[a](b, 0), g.C[a](b, 1), g.C[a](b, 2)};
  j["brackets"] = br;
  const auto& v = s.validation();
  j["validation"] = {{"samples", v.samples},
                     {"c1_spread", v.c1_spread},
                     {"reeb_residual", v.reeb_residual},
                     {"min_abs_det", v.min_abs_det}};
  if (auto uc = s.unimodular_constants()) {
    const auto cls = classify_unimodular((*uc)[0], (*uc)[1]);
    j["class"] = to_string(cls.group);
  }
  if (as_json) {
    std::cout << j.dump(2) << '\n';
    return kOk;
  }
  std::cout << "structure " << s.name() << " (" << j["kind"].get<std::string>() << ")\n"
            << "  c1        " << format_number(s.c1()) << (s.swapped_xy() ? "  (X and Y swapped)" : "") << '\n'
            << "  W         " << format_number(g.webster()) << '\n'
            << "  |tau|     " << format_number(g.tau_norm()) << '\n'
            << "  tau       [[" << format_number(g.tau(0, 0)) << ", " << format_number(g.tau(0, 1)) << "], ["
            << format_number(g.tau(1, 0)) << ", " << format_number(g.tau(1, 1)) << "]]\n";
  for (auto& [k, val] : br.items())
    std::cout << "  " << k << " = " << format_number(val[0].get<double>()) << " X + "
              << format_number(val[1].get<double>()) << " Y + " << format_number(val[2].get<double>()) << " T\n";
  if (j.contains("class")) std::cout << "  class     " << j["class"].get<std::string>() << '\n';
  std::cout << "  checks    " << v.samples << " samples, c1 spread " << format_number(v.c1_spread)
            << ", Reeb residual " << format_number(v.reeb_residual) << '\n';
  return kOk;
}

// ---------------------------------------------------------------- curves

struct CurveArgs {
  std::string structure = "rt";
  std::string init;
  double lambda = 0.0;
  double range = 10.0;
  double step = 1e-3;
  int record_every = 1;
  bool geodesic = false;
  bool oracle = false;
  std::string jacobi;
  std::string output;
  double tolerance = 1e-8;
  bool as_json = false;
};

int curve_integrate(const CurveArgs& a) {
  const Structure s = load_structure(a.structure);
  const auto v = split_numbers(a.init, 4, "--init");
  const CharState init{{v[0], v[1], v[2]}, v[3], a.lambda};
  if (!s.domain().contains(init.point)) throw DomainError("initial point outside the chart domain");
  if (a.step <= 0.0) throw InputError("--step must be positive");
  if (a.oracle && (s.name() != "rt" || a.lambda != 0.0 || a.geodesic))
    throw InputError("--oracle needs the rt structure, lambda = 0 and a characteristic curve");
  const IntegrationOptions opt{a.step, a.record_every};
  CurveTrace trace;
  if (a.range > 0.0) trace = a.geodesic ? integrate_geodesic(s, init, a.range, opt) : integrate_characteristic(s, init, a.range, opt);

  std::vector<std::string> header{"s", "x", "y", "t", "phi", "lambda"};
  std::optional<JacobiTrace> jac;
  if (!a.jacobi.empty() && !trace.samples.empty()) {
    const auto f = split_numbers(a.jacobi, 3, "--jacobi");
    jac = jacobi_vertical_ode(s, trace, {f[0], f[1], f[2]});
    header.insert(header.end(), {"gVT", "dgVT", "ddgVT"});
  }
  std::optional<RtInitialData> cf;
  if (a.oracle) {
    cf = rt_initial_data(init);
    header.insert(header.end(), {"x_closed", "y_closed", "t_closed", "deviation"});
  }
  std::vector<std::vector<double>> rows;
  double max_dev = 0.0;
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    const auto& c = trace.samples[i];
    std::vector<double> r{c.s, c.point[0], c.point[1], c.point[2], c.phi, c.lambda};
    if (jac) {
      const auto& js = jac->samples.at(i);
      r.insert(r.end(), {js.gVT, js.dgVT, js.ddgVT});
    }
    if (cf) {
      const Coords q = rt_characteristic_closed_form(*cf, c.s);
      const double dev = std::hypot(q[0] - c.point[0], q[1] - c.point[1], q[2] - c.point[2]);
      max_dev = std::max(max_dev, dev);
      r.insert(r.end(), {q[0], q[1], q[2], dev});
    }
    rows.push_back(std::move(r));
  }
  const bool fail = cf && max_dev > a.tolerance;
  if (a.as_json) {
    json j{{"structure", s.name()},
           {"init", {v[0], v[1], v[2], v[3]}},
           {"lambda", a.lambda},
           {"range", a.range},
           {"step", a.step},
           {"geodesic", a.geodesic},
           {"truncated", trace.truncated},
           {"columns", header},
           {"rows", rows}};
    if (cf) j["max_deviation"] = max_dev, j["tolerance"] = a.tolerance;
    Output out(a.output);
    out.stream() << j.dump() << '\n';
  } else {
    Output out(a.output);
    CsvWriter csv(out.stream(), header);
    for (const auto& r : rows) csv.row(r);
    if (cf) std::cerr << "max deviation from the closed form: " << format_number(max_dev) << '\n';
    if (trace.truncated) std::cerr << "trace truncated: " << trace.note << '\n';
  }
  return fail ? kPropertyFailure : kOk;
}

// ---------------------------------------------------------------- surfaces

struct SurfaceArgs {
  std::string structure = "rt";
  std::string surface;
  int grid = 12;
  std::string box;
  std::string csv;
  bool as_json = false;
};

int surface_analyze(const SurfaceArgs& a) {
  const Structure s = load_structure(a.structure);
  const SurfaceSpec spec = load_surface(a.surface);
  const auto entry = find_rt_surface(a.surface);
  if (a.grid < 1) throw InputError("--grid must be positive");
  std::optional<Box> box;
  if (!a.box.empty()) {
    const auto b = split_numbers(a.box, 6, "--box");
    box = Box{{b[0], b[1], b[2]}, {b[3], b[4], b[5]}};
  }
  // sample points on the surface
  std::vector<Coords> points;
  const int n = a.grid;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double fu = (i + 0.5) / n, fv = (j + 0.5) / n;
      if (entry) {
        const auto& P = entry->patch;
        points.push_back(P.point(P.u_range[0] + fu * (P.u_range[1] - P.u_range[0]),
                                 P.v_range[0] + fv * (P.v_range[1] - P.v_range[0])));
      } else if (spec.graph) {
        const auto& g = *spec.graph;
        const double x = g.x_range()[0] + fu * (g.x_range()[1] - g.x_range()[0]);
        const double y = g.y_range()[0] + fv * (g.y_range()[1] - g.y_range()[0]);
        points.push_back({x, y, g.u()(x, y, 0.0)});
      } else {
        if (!box) throw InputError("implicit surfaces from a file need --box");
        points.push_back(spec.surface.project({box->lo[0] + fu * (box->hi[0] - box->lo[0]),
                                               box->lo[1] + fv * (box->hi[1] - box->lo[1]),
                                               0.5 * (box->lo[2] + box->hi[2])}));
      }
    }
  Output out(a.csv);
  std::optional<CsvWriter> csv;
  if (!a.as_json || !a.csv.empty())
    csv.emplace(out.stream(), std::vector<std::string>{"x", "y", "t", "nh", "gNT", "H", "thetaS", "tauZZ", "tauZnu"});
  double max_H = 0.0;
  int singular = 0;
  for (const auto& p : points) {
    try {
      const SurfaceFramePoint sf = surface_frame(s, spec.surface, p);
      max_H = std::max(max_H, std::abs(sf.H));
      if (csv) csv->row({p[0], p[1], p[2], sf.nh, sf.gNT, sf.H, sf.thetaS, sf.tauZZ, sf.tauZnu});
    } catch (const SingularPointError&) {
      ++singular;
    }
  }
  json j{{"surface", a.surface}, {"structure", s.name()}, {"samples", points.size()}, {"singular_samples", singular},
         {"max_abs_H", max_H}};
  Box region = box.value_or(Box{{-2.0, -2.0, 0.05}, {2.0, 2.0, 2.0 * std::numbers::pi - 0.05}});
  if (spec.graph && !box)
    region = Box{{spec.graph->x_range()[0], spec.graph->y_range()[0], -1e3}, {spec.graph->x_range()[1], spec.graph->y_range()[1], 1e3}};
  json loci = json::array();
  if (spec.graph) {
    for (const auto& L : singular_set_graph(*spec.graph))
      loci.push_back({{"kind", to_string(L.kind)}, {"points", L.points.size()}, {"first", L.points.front()}, {"rank", L.rank}});
  } else if (s.kind() == Structure::Kind::CoordinateFrame) {
    SingularSearch search;
    search.grid = {16, 16, 16};
    for (const auto& L : singular_set_detect(s, spec.surface, region, search)) {
      json l{{"kind", to_string(L.kind)}, {"points", L.points.size()}, {"first", L.points.front()}, {"rank", L.rank}};
      if (L.kind == SingularLocus::Kind::Curve) {
        const auto st = stationarity_at_singular_curve(s, spec.surface, L);
        l["orthogonal"] = st.orthogonal;
        l["inconclusive"] = st.inconclusive;
        l["max_deviation"] = st.max_deviation;
      }
      loci.push_back(l);
    }
  }
  j["singular_set"] = loci;
  if (a.as_json) {
    std::cout << j.dump(2) << '\n';
  } else {
    std::cerr << "max |H| " << format_number(max_H) << " over " << points.size() - singular << " regular samples, "
              << loci.size() << " singular locus/loci\n";
    for (const auto& l : loci) std::cerr << "  " << l.dump() << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------- variations

struct VariationArgs {
  std::string structure = "rt";
  std::string surface;
  std::string patch;
  std::string u_range, v_range;
  std::string f = "0", l = "0", h = "0", v = "0";
  std::vector<std::string> windows;
  int order = 12;
  int panels = 1;
  double epsilon = 0.0;
  double tolerance = 0.0;
  // Q
  std::string preset;
  double x0 = 10.0;
  double tube = 0.1;
  unsigned seed = 1;
  std::string expect;
  bool as_json = false;
};

struct Window {
  int var;
  double a, b, ramp;
};

std::vector<Window> parse_windows(const std::vector<std::string>& items) {
  std::vector<Window> out;
  for (const auto& w : items) {
    const auto parts = split(w, ':');
    if (parts.size() != 4) throw InputError("--window expects var:a:b:ramp, got '" + w + "'");
    int var = parts[0] == "x" ? 0 : parts[0] == "y" ? 1 : (parts[0] == "t" || parts[0] == "alpha") ? 2 : -1;
    if (var < 0) throw InputError("--window variable must be x, y, t or alpha");
    const auto nums = split_numbers(parts[1] + "," + parts[2] + "," + parts[3], 3, "--window");
    if (!(nums[0] <= nums[1]) || nums[2] <= 0.0) throw InputError("--window needs a <= b and ramp > 0");
    out.push_back({var, nums[0], nums[1], nums[2]});
  }
  return out;
}

ScalarField windowed(const std::string& expr, const std::vector<Window>& windows) {
  ExprFn e;
  try {
    e = ExprFn::parse(expr);
  } catch (const ParseError& err) {
    throw InputError(std::string("field expression: ") + err.what());
  }
  ScalarField out = ScalarField::from_expr(e);
  for (const auto& w : windows)
    out = out * ScalarField::compose([w](double t) { return window_profile(t, w.a, w.b, w.ramp); },
                                     ScalarField::from_expr(ExprFn::variable(w.var)));
  return out;
}

Parametrization resolve_patch(const VariationArgs& a, const SurfaceSpec& spec, const std::vector<Window>& windows) {
  Parametrization P;
  if (!a.patch.empty()) {
    const auto parts = split(a.patch, ';');
    if (parts.size() != 3) throw InputError("--patch expects three expressions separated by ';'");
    for (int k = 0; k < 3; ++k) P.map[k] = ExprFn::parse(parts[k]);
  } else if (auto e = find_rt_surface(a.surface)) {
    P = e->patch;
  } else if (spec.graph) {
    P.map = {ExprFn::variable(0), ExprFn::variable(1), spec.graph->u()};
    P.u_range = spec.graph->x_range();
    P.v_range = spec.graph->y_range();
  } else {
    throw InputError("implicit surfaces from a file need --patch");
  }
  if (!a.u_range.empty()) {
    const auto r = split_numbers(a.u_range, 2, "--u-range");
    P.u_range = {r[0], r[1]};
    P.u_breaks.clear();
  }
  if (!a.v_range.empty()) {
    const auto r = split_numbers(a.v_range, 2, "--v-range");
    P.v_range = {r[0], r[1]};
    P.v_breaks.clear();
  }
  // panel edges on window kinks when a chart variable is a patch parameter
  const std::string pu = ExprFn::variable(0).str(), pv = ExprFn::variable(1).str();
  for (const auto& w : windows) {
    const std::string m = P.map[w.var].str();
    auto& breaks = m == pu ? P.u_breaks : m == pv ? P.v_breaks : P.u_breaks;
    const auto& range = m == pu ? P.u_range : P.v_range;
    if (m != pu && m != pv) continue;
    for (double c : {w.a - w.ramp, w.a, w.b, w.b + w.ramp})
      if (c > range[0] && c < range[1]) breaks.push_back(c);
  }
  for (auto* b : {&P.u_breaks, &P.v_breaks}) {
    std::sort(b->begin(), b->end());
    b->erase(std::unique(b->begin(), b->end()), b->end());
  }
  return P;
}

// Largest |field| on the patch boundary; compact support makes it zero.
double boundary_max(const Parametrization& P, const std::vector<const ScalarField*>& fields) {
  double out = 0.0;
  const int n = 64;
  for (int i = 0; i <= n; ++i) {
    const double fu = P.u_range[0] + (P.u_range[1] - P.u_range[0]) * i / n;
    const double fv = P.v_range[0] + (P.v_range[1] - P.v_range[0]) * i / n;
    for (const Coords& p : {P.point(fu, P.v_range[0]), P.point(fu, P.v_range[1]), P.point(P.u_range[0], fv),
                            P.point(P.u_range[1], fv)})
      for (const auto* f : fields) out = std::max(out, std::abs(f->value(p)));
  }
  return out;
}

double relative(double a, double b) {
  const double scale = std::max(std::abs(b), 1e-12);
  return std::abs(a - b) / scale;
}

int variation_first_second(const VariationArgs& a, bool second) {
  const Structure s = load_structure(a.structure);
  const SurfaceSpec spec = load_surface(a.surface);
  const auto windows = parse_windows(a.windows);
  const Parametrization P = resolve_patch(a, spec, windows);
  const ParametricMeasure m(s, P, {a.order, a.panels, a.panels});
  VariationField U;
  U.f = windowed(a.f, windows);
  U.l = windowed(a.l, windows);
  U.h = windowed(a.h, windows);
  U.v = windowed(a.v, windows);
  json j{{"structure", s.name()}, {"surface", a.surface}, {"order", a.order}, {"panels", a.panels}};
  const double edge = boundary_max(P, {&U.f, &U.l, &U.h, &U.v});
  j["boundary_max"] = edge;
  if (edge > 1e-12)
    std::cerr << "warning: the variation field does not vanish on the patch boundary (max "
              << format_number(edge) << "), boundary terms are not accounted for\n";
  bool fail = false;
  if (!second) {
    NumericVariation nv;
    if (a.epsilon > 0.0) nv.epsilon = a.epsilon;
    const double tol = a.tolerance > 0.0 ? a.tolerance : 1e-4;
    const double num = first_variation_numeric(s, spec.surface, m, U, nv);
    const double formula = first_variation_formula(s, spec.surface, m, U);
    const double normal = first_variation_normal(s, spec.surface, m, U);
    const double rel = std::abs(num) < 1e-10 ? std::abs(formula - num) : relative(formula, num);
    fail = rel > tol;
    j.update({{"epsilon", nv.epsilon}, {"numeric", num}, {"formula", formula}, {"normal_form", normal},
              {"relative_difference", rel}, {"tolerance", tol}, {"pass", !fail}});
  } else {
    if (a.f != "0" || a.l != "0" || a.h != "0")
      throw InputError("second variation compares against the index form, so only --v may be set");
    NumericVariation nv;
    nv.epsilon = a.epsilon > 0.0 ? a.epsilon : 1e-3;
    const double tol = a.tolerance > 0.0 ? a.tolerance : 1e-3;
    require_minimal(s, spec.surface, m);
    const double num = second_variation_numeric(s, spec.surface, m, U, nv);
    const double I = index_form(s, spec.surface, m, U.v, U.v);
    const double mIL = minus_integral_u_L(s, spec.surface, m, U.v, U.v);
    const double rel = relative(I, num);
    fail = rel > tol;
    j.update({{"epsilon", nv.epsilon}, {"numeric", num}, {"index_form", I}, {"minus_integral_uL", mIL},
              {"relative_difference", rel}, {"tolerance", tol}, {"pass", !fail}});
  }
  if (a.as_json) {
    std::cout << j.dump(2) << '\n';
  } else {
    for (auto& [k, v] : j.items()) std::cout << k << ": " << (v.is_number_float() ? format_number(v.get<double>()) : v.dump()) << '\n';
  }
  return fail ? kPropertyFailure : kOk;
}

int variation_Q(const VariationArgs& a) {
  const Structure s = load_structure(a.structure);
  json j{{"structure", s.name()}, {"surface", a.surface}, {"tube", a.tube}};
  QOptions qo;
  qo.tube = a.tube;
  QReport q;
  if (a.preset == "helicoid-bump") {
    const auto e = find_rt_surface("right-helicoid");
    const TestFunction f = helicoid_admissible_functions(1, a.seed, a.tube).front();
    const ParametricMeasure m(s, f.patch, {a.order, 1, 1});
    q = stability_quadratic_Q(s, e->surface, m, {{e->singular_curves[0].map, f.patch.v_range, f.patch.v_breaks}}, f.u, qo);
    j["function"] = f.description;
    j["surface"] = "right-helicoid";
  } else if (a.preset == "plane-cos") {
    const auto e = find_rt_surface("plane-y0");
    const TestFunction f = plane_cos_bump(a.x0);
    const ParametricMeasure m(s, f.patch, {16, 8, 2});
    q = stability_quadratic_Q(s, e->surface, m, plane_y0_curves(a.x0), f.u, qo);
    j["function"] = f.description;
    j["surface"] = "plane-y0";
  } else if (a.preset.empty()) {
    const SurfaceSpec spec = load_surface(a.surface);
    const auto entry = find_rt_surface(a.surface);
    const auto windows = parse_windows(a.windows);
    const Parametrization P = resolve_patch(a, spec, windows);
    const ParametricMeasure m(s, P, {a.order, a.panels, a.panels});
    std::vector<SingularCurveParam> curves;
    if (entry) curves = entry->singular_curves;
    q = stability_quadratic_Q(s, spec.surface, m, curves, windowed(a.v, windows), qo);
    j["function"] = a.v;
  } else {
    throw InputError("unknown preset '" + a.preset + "' (helicoid-bump, plane-cos)");
  }
  j.update({{"Q", q.value}, {"regular", q.regular}, {"line", q.line}, {"tangential", q.tangential},
            {"max_Zu_in_tube", q.max_Zu_in_tube}, {"sign", q.value < 0.0 ? "negative" : "nonnegative"}});
  bool fail = false;
  if (a.expect == "negative") fail = !(q.value < 0.0);
  else if (a.expect == "nonnegative") fail = q.value < -1e-8;
  else if (!a.expect.empty()) throw InputError("--expect takes negative or nonnegative");
  if (!a.expect.empty()) j["expectation_met"] = !fail;
  if (a.as_json) {
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "Q(u) = " << format_number(q.value) << "  (regular " << format_number(q.regular) << ", line "
              << format_number(q.line) << ", along curves " << format_number(q.tangential) << ")\n"
              << "sign: " << j["sign"].get<std::string>() << '\n';
  }
  return fail ? kPropertyFailure : kOk;
}

// ---------------------------------------------------------------- classify, report, catalog

int classify(const std::vector<double>& c, int grid, double tol, bool as_json) {
  if (grid > 0) {
    json rows = json::array();
    std::map<std::string, int> counts;
    for (int i = 0; i < grid; ++i)
      for (int k = 0; k < grid; ++k) {
        const double c2 = -3.0 + 6.0 * i / (grid - 1), c3 = -3.0 + 6.0 * k / (grid - 1);
        const auto r = classify_unimodular(c2, c3, tol);
        ++counts[to_string(r.group)];
        rows.push_back({{"c2", c2}, {"c3", c3}, {"class", to_string(r.group)}, {"W", r.webster}, {"tau_norm", r.tau_norm}});
      }
    if (as_json) {
      std::cout << json{{"grid", grid}, {"counts", counts}, {"points", rows}}.dump(2) << '\n';
    } else {
      for (const auto& [k, v] : counts) std::cout << k << ": " << v << '\n';
    }
    return kOk;
  }
  if (c.size() != 2) throw InputError("classify needs c2 and c3, or --grid");
  const auto r = classify_unimodular(c[0], c[1], tol);
  if (as_json) {
    std::cout << json{{"c2", c[0]}, {"c3", c[1]}, {"class", to_string(r.group)}, {"W", r.webster}, {"tau_norm", r.tau_norm}}.dump(2)
              << '\n';
  } else {
    std::cout << to_string(r.group) << "  (W = " << format_number(r.webster) << ", |tau| = " << format_number(r.tau_norm)
              << ")\n";
  }
  return kOk;
}

int rt_report(const RtReportOptions& opt, const std::string& output, bool as_json) {
  const RtReport rep = run_rt_report(opt);
  json j = rep.to_json();
  j["options"] = {{"q_samples", opt.q_samples}, {"index_samples", opt.index_samples}, {"seed", opt.seed},
                  {"tube", opt.tube}, {"plane_widths", opt.plane_widths}};
  if (!output.empty()) {
    Output out(output);
    out.stream() << j.dump(2) << '\n';
  }
  if (as_json) {
    std::cout << j.dump(2) << '\n';
  } else {
    for (const auto& it : rep.items)
      std::cout << "(" << it.id << ") " << (it.pass ? "PASS  " : "FAIL  ") << it.claim << "\n      " << it.detail << '\n';
    std::cout << "\nsurface               minimal  stationary  stable(tag)  engine stationary\n";
    for (const auto& row : rep.surfaces) {
      const auto& t = row["tags"];
      std::printf("%-22s %-8s %-11s %-12s %s\n", row["name"].get<std::string>().c_str(),
                  t["minimal"].get<bool>() ? "yes" : "no", t["stationary"].get<bool>() ? "yes" : "no",
                  t["stable"].is_null() ? "-" : (t["stable"].get<bool>() ? "yes" : "no"),
                  row["engine_stationary"].get<bool>() ? "yes" : "no");
    }
  }
  return rep.all_pass() ? kOk : kPropertyFailure;
}

json structure_entry_json(const StructureEntry& e) {
  json j{{"name", e.name}, {"description", e.description}, {"c1", e.c1}, {"webster", e.webster}, {"tau_norm", e.tau_norm}};
  if (e.group) j["class"] = to_string(*e.group);
  return j;
}

json surface_entry_json(const SurfaceEntry& e) {
  json curves = json::array();
  for (const auto& c : e.singular_curves)
    curves.push_back({{"map", {c.map[0].str(), c.map[1].str(), c.map[2].str()}}, {"range", c.range}});
  json j{{"name", e.name},
         {"description", e.description},
         {"expr", e.surface.fn().str()},
         {"singular_set", e.singular_set},
         {"singular_curves", curves},
         {"minimal", e.tags.minimal},
         {"stationary", e.tags.stationary},
         {"criterion", to_string(e.criterion)},
         {"patch", {{"map", {e.patch.map[0].str(), e.patch.map[1].str(), e.patch.map[2].str()}},
                    {"u_range", e.patch.u_range},
                    {"v_range", e.patch.v_range}}}};
  j["stable"] = e.tags.stable ? json(*e.tags.stable) : json(nullptr);
  if (!e.notes.empty()) j["notes"] = e.notes;
  return j;
}

int catalog_list(bool as_json) {
  json j{{"structures", json::array()}, {"rt_surfaces", json::array()}};
  for (const auto& e : catalog_structures()) j["structures"].push_back(structure_entry_json(e));
  for (const auto& e : catalog_rt_surfaces()) j["rt_surfaces"].push_back(surface_entry_json(e));
  if (as_json) {
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "structures:\n";
    for (const auto& e : catalog_structures()) std::cout << "  " << e.name << "  " << e.description << '\n';
    std::cout << "roto-translation surfaces:\n";
    for (const auto& e : catalog_rt_surfaces()) std::cout << "  " << e.name << "  " << e.description << '\n';
  }
  return kOk;
}

int catalog_show(const std::string& name, bool as_json) {
  json j;
  if (auto e = find_structure(name)) j = structure_entry_json(*e);
  else if (auto e2 = find_rt_surface(name)) j = surface_entry_json(*e2);
  else throw InputError("no catalog entry named '" + name + "'");
  if (as_json) std::cout << j.dump(2) << '\n';
  else
    for (auto& [k, v] : j.items()) std::cout << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-hermitian 3-manifolds: structures, characteristic curves, surfaces and area variations"};
  app.require_subcommand(1);

  // structure info
  auto* structure = app.add_subcommand("structure", "structure constants and checks");
  structure->require_subcommand(1);
  auto* sinfo = structure->add_subcommand("info", "c1, W, |tau|, brackets and validation");
  std::string sref, spoint;
  bool sjson = false;
  sinfo->add_option("ref", sref, "catalog name or JSON spec path")->required();
  sinfo->add_option("--point", spoint, "evaluation point x,y,t");
  sinfo->add_flag("--json", sjson, "machine-readable output");

  // curve integrate
  auto* curve = app.add_subcommand("curve", "characteristic curves and geodesics");
  curve->require_subcommand(1);
  auto* cint = curve->add_subcommand("integrate", "RK4 trace as CSV");
  CurveArgs ca;
  cint->add_option("--structure", ca.structure, "catalog name or JSON spec path")->capture_default_str();
  cint->add_option("--init", ca.init, "x,y,t,phi with Z = cos(phi) X + sin(phi) Y")->required();
  cint->add_option("--lambda", ca.lambda, "curvature")->capture_default_str();
  cint->add_option("--range", ca.range, "arc length")->capture_default_str();
  cint->add_option("--step", ca.step, "RK4 step")->capture_default_str();
  cint->add_option("--record-every", ca.record_every, "keep every n-th step")->capture_default_str();
  cint->add_flag("--geodesic", ca.geodesic, "evolve lambda by the geodesic equation");
  cint->add_flag("--oracle", ca.oracle, "add closed-form columns (rt, lambda = 0)");
  cint->add_option("--jacobi", ca.jacobi, "f,f',f'' initial data for the vertical Jacobi component");
  cint->add_option("--tolerance", ca.tolerance, "oracle tolerance")->capture_default_str();
  cint->add_option("--output", ca.output, "CSV path (default stdout)");
  cint->add_flag("--json", ca.as_json, "machine-readable output");

  // surface analyze
  auto* surface = app.add_subcommand("surface", "surface frames, curvature and singular sets");
  surface->require_subcommand(1);
  auto* sana = surface->add_subcommand("analyze", "sampled frame data, max |H| and singular loci");
  SurfaceArgs sa;
  sana->add_option("--structure", sa.structure, "catalog name or JSON spec path")->capture_default_str();
  sana->add_option("--surface", sa.surface, "rt catalog name or JSON spec path")->required();
  sana->add_option("--grid", sa.grid, "samples per direction")->capture_default_str();
  sana->add_option("--box", sa.box, "search box x0,y0,t0,x1,y1,t1");
  sana->add_option("--csv", sa.csv, "CSV path (default stdout)");
  sana->add_flag("--json", sa.as_json, "machine-readable output");

  // variation first | second | Q
  auto* variation = app.add_subcommand("variation", "first and second variation of area");
  variation->require_subcommand(1);
  VariationArgs va;
  auto common = [&](CLI::App* c) {
    c->add_option("--structure", va.structure, "catalog name or JSON spec path")->capture_default_str();
    c->add_option("--surface", va.surface, "rt catalog name or JSON spec path");
    c->add_option("--patch", va.patch, "map 'X;Y;T' in the patch variables x, y");
    c->add_option("--u-range", va.u_range, "a,b");
    c->add_option("--v-range", va.v_range, "c,d");
    c->add_option("--window", va.windows, "var:a:b:ramp cutoff factor, repeatable");
    c->add_option("--order", va.order, "Gauss-Legendre order per panel")->capture_default_str();
    c->add_option("--panels", va.panels, "panels per patch interval")->capture_default_str();
    c->add_flag("--json", va.as_json, "machine-readable output");
  };
  auto* vfirst = variation->add_subcommand("first", "formula against numeric derivative");
  auto* vsecond = variation->add_subcommand("second", "index form against numeric second difference");
  auto* vq = variation->add_subcommand("Q", "quadratic form with singular-curve terms");
  for (auto* c : {vfirst, vsecond, vq}) common(c);
  for (auto* c : {vfirst, vsecond}) {
    c->set_help_flag("--help", "print this help message and exit");
    c->add_option("--f", va.f, "nu_h component");
    c->add_option("--l", va.l, "Z component");
    c->add_option("--h", va.h, "T component");
    c->add_option("--v", va.v, "N component");
    c->add_option("--epsilon", va.epsilon, "difference step");
    c->add_option("--tolerance", va.tolerance, "relative tolerance");
  }
  vq->add_option("--u", va.v, "test function");
  vq->add_option("--preset", va.preset, "helicoid-bump or plane-cos");
  vq->add_option("--x0", va.x0, "half width of the plane-cos bump")->capture_default_str();
  vq->add_option("--tube", va.tube, "admissibility tube radius")->capture_default_str();
  vq->add_option("--seed", va.seed, "seed for the helicoid-bump preset")->capture_default_str();
  vq->add_option("--expect", va.expect, "negative or nonnegative; exit 1 when not met");

  // classify
  auto* cls = app.add_subcommand("classify", "unimodular Lie group class from (c2, c3)");
  std::vector<double> cvals;
  int cgrid = 0;
  double ctol = 1e-12;
  bool cjson = false;
  cls->add_option("constants", cvals, "c2 c3");
  cls->add_option("--grid", cgrid, "classify an n x n grid on [-3, 3]^2");
  cls->add_option("--tol", ctol, "tolerance on the equality strata")->capture_default_str();
  cls->add_flag("--json", cjson, "machine-readable output");

  // rt-report
  auto* rtr = app.add_subcommand("rt-report", "stability survey of roto-translation surfaces");
  RtReportOptions ro;
  std::string rout;
  bool rjson = false;
  rtr->add_option("--samples", ro.q_samples, "admissible functions on the helicoid")->capture_default_str();
  rtr->add_option("--index-samples", ro.index_samples, "test functions on vertical planes")->capture_default_str();
  rtr->add_option("--seed", ro.seed, "random seed")->capture_default_str();
  rtr->add_option("--tube", ro.tube, "admissibility tube radius")->capture_default_str();
  rtr->add_option("--widths", ro.plane_widths, "half widths x0 of the plane test bumps");
  rtr->add_option("--output", rout, "write the JSON verdict document here");
  rtr->add_flag("--json", rjson, "machine-readable output");

  // catalog
  auto* cat = app.add_subcommand("catalog", "named structures and surfaces");
  cat->require_subcommand(1);
  auto* clist = cat->add_subcommand("list", "all entries");
  auto* cshow = cat->add_subcommand("show", "one entry");
  std::string cname;
  bool catjson = false;
  clist->add_flag("--json", catjson, "machine-readable output");
  cshow->add_option("name", cname, "entry name")->required();
  cshow->add_flag("--json", catjson, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*sinfo) return structure_info(sref, spoint, sjson);
    if (*cint) return curve_integrate(ca);
    if (*sana) return surface_analyze(sa);
    if (*vfirst || *vsecond) {
      if (va.surface.empty()) throw InputError("--surface is required");
      return variation_first_second(va, vsecond->parsed());
    }
    if (*vq) {
      if (va.surface.empty() && va.preset.empty()) throw InputError("--surface or --preset is required");
      return variation_Q(va);
    }
    if (*cls) return classify(cvals, cgrid, ctol, cjson);
    if (*rtr) return rt_report(ro, rout, rjson);
    if (*clist) return catalog_list(catjson);
    if (*cshow) return catalog_show(cname, catjson);
  } catch (const SpecError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kInputError;
  } catch (const NotMinimalError& e) {
    std::cerr << "precondition failed: " << e.what() << '\n';
    return kInputError;
  } catch (const InadmissibleError& e) {
    std::cerr << "precondition failed: " << e.what() << '\n';
    return kInputError;
  } catch (const SingularPointError& e) {
    std::cerr << "singular point: " << e.what() << '\n';
    return kInputError;
  }
  return kOk;
}
