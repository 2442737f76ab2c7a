#include "subriemann/catalog.hpp"

#include <cmath>
#include <numbers>

namespace subriemann {

namespace {

constexpr double kPi = std::numbers::pi;

ExprFn E(const char* text) { return ExprFn::parse(text); }
ExprFn C(double c) { return ExprFn::constant(c); }
const ExprFn X = ExprFn::variable(0);
const ExprFn Y = ExprFn::variable(1);

const Box kChart{{-1e3, -1e3, -1e3}, {1e3, 1e3, 1e3}};

}  // namespace

std::string to_string(LieGroupClass g) {
  switch (g) {
    case LieGroupClass::Heisenberg: return "Heisenberg";
    case LieGroupClass::SU2: return "SU(2)";
    case LieGroupClass::SL2R: return "SL~(2,R)";
    case LieGroupClass::E2: return "E~(2)";
    case LieGroupClass::E11: return "E(1,1)";
  }
  return "unknown";
}

UnimodularClass classify_unimodular(double c2, double c3, double tol) {
  UnimodularClass out;
  out.webster = webster_unimodular(c2, c3);
  out.tau_norm = tau_norm_unimodular(c2, c3);
  const double W = out.webster, t2 = 2.0 * out.tau_norm;
  if (std::abs(W) <= tol && out.tau_norm <= tol)
    out.group = LieGroupClass::Heisenberg;
  else if (std::abs(W - t2) <= tol && W > 0.0)
    out.group = LieGroupClass::E2;
  else if (std::abs(W + t2) <= tol && W < 0.0)
    out.group = LieGroupClass::E11;
  else if (W > t2)
    out.group = LieGroupClass::SU2;
  else
    out.group = LieGroupClass::SL2R;
  return out;
}

const std::vector<Representative>& representative_constants() {
  static const std::vector<Representative> reps{
      {LieGroupClass::Heisenberg, 0.0, 0.0},  // W = |tau| = 0
      {LieGroupClass::SU2, 1.0, -2.0},        // W = 3, 2|tau| = 1
      {LieGroupClass::SL2R, 1.0, 1.0},        // W = 0, 2|tau| = 2
      {LieGroupClass::E2, 2.0, 0.0},          // W = 2 = 2|tau|
      {LieGroupClass::E11, 0.0, 2.0},         // W = -2 = -2|tau|
  };
  return reps;
}

Structure rt_structure() {
  return Structure::from_frame({{{E("0"), E("0"), E("1")},
                                 {E("cos(alpha)"), E("sin(alpha)"), E("0")},
                                 {E("sin(alpha)"), E("-cos(alpha)"), E("0")}}},
                               kChart, "rt");
}

Structure heisenberg_structure() {
  return Structure::from_frame(
      {{{E("1"), E("0"), E("y")}, {E("0"), E("1"), E("-x")}, {E("0"), E("0"), E("1")}}}, kChart, "heisenberg");
}

std::vector<StructureEntry> catalog_structures() {
  std::vector<StructureEntry> out;
  out.push_back({"heisenberg", "first Heisenberg group, X = d/dx + y d/dt, Y = d/dy - x d/dt, T = d/dt",
                 heisenberg_structure(), 2.0, 0.0, 0.0, LieGroupClass::Heisenberg});
  out.push_back({"rt", "roto-translation group, X = d/dalpha, Y = cos(alpha) d/dx + sin(alpha) d/dy",
                 rt_structure(), 1.0, 0.5, 0.5, std::nullopt});
  const char* names[] = {"lie-heisenberg", "lie-su2", "lie-sl2r", "lie-e2", "lie-e11"};
  int k = 0;
  for (const auto& r : representative_constants()) {
    const std::string name = names[k++];
    out.push_back({name,
                   "unimodular group [X,Y] = -2T, [X,T] = c2 Y, [Y,T] = c3 X with (c2, c3) = (" +
                       std::to_string(r.c2) + ", " + std::to_string(r.c3) + "), class " + to_string(r.group),
                   Structure::unimodular(r.c2, r.c3, name), 2.0, webster_unimodular(r.c2, r.c3),
                   tau_norm_unimodular(r.c2, r.c3), r.group});
  }
  out.push_back({"sasakian-nonunimodular", "non-unimodular group with alpha = 1, gamma = 0",
                 Structure::nonunimodular(1.0, 0.0, "sasakian-nonunimodular"), 2.0, -1.0, 0.0, std::nullopt});
  out.push_back({"nonunimodular", "non-unimodular group with alpha = 1, gamma = 1",
                 Structure::nonunimodular(1.0, 1.0, "nonunimodular"), 2.0, webster_nonunimodular(1.0, 1.0), 0.5,
                 std::nullopt});
  return out;
}

std::optional<StructureEntry> find_structure(const std::string& name) {
  for (auto& e : catalog_structures())
    if (e.name == name) return e;
  return std::nullopt;
}

std::string to_string(CriterionSign c) {
  switch (c) {
    case CriterionSign::Zero: return "zero";
    case CriterionSign::PositiveOffAxis: return "positive off the axis";
    case CriterionSign::NotApplicable: return "not applicable";
  }
  return "unknown";
}

std::vector<SurfaceEntry> catalog_rt_surfaces() {
  std::vector<SurfaceEntry> out;
  const double two_pi = 2.0 * kPi;

  {
    SurfaceEntry e;
    e.name = "vertical-plane";
    e.description = "vertical plane alpha = a with a = 0.3";
    e.surface = ImplicitSurface(E("alpha - 0.3"), 1.0, e.name);
    e.patch = {{X, Y, C(0.3)}, {-1.0, 1.0}, {-1.0, 1.0}, {}, {}};
    e.singular_set = "empty";
    e.tags = {true, true, true};
    e.criterion = CriterionSign::Zero;
    out.push_back(std::move(e));
  }
  {
    SurfaceEntry e;
    e.name = "left-helicoid";
    e.description = "left-handed helicoid cos(b alpha) x + sin(b alpha) y = 0 with b = 1";
    e.surface = ImplicitSurface(E("cos(alpha)*x + sin(alpha)*y"), 1.0, e.name);
    e.patch = {{-X * sin(Y), X * cos(Y), Y}, {-1.0, 1.0}, {0.0, two_pi}, {0.0}, {}};
    e.singular_set = "empty";
    e.tags = {true, true, false};
    e.criterion = CriterionSign::PositiveOffAxis;
    out.push_back(std::move(e));
  }
  {
    SurfaceEntry e;
    e.name = "right-helicoid";
    e.description = "right-handed helicoid x sin(c alpha) - y cos(c alpha) = 0 with c = 1";
    e.surface = ImplicitSurface(E("x*sin(alpha) - y*cos(alpha)"), 1.0, e.name);
    e.patch = {{X * cos(Y), X * sin(Y), Y}, {-1.0, 1.0}, {0.0, two_pi}, {0.0}, {}};
    e.singular_curves = {{{C(0.0), C(0.0), X}, {0.0, two_pi}}};
    e.singular_set = "the line x = y = 0";
    e.tags = {true, true, true};
    out.push_back(std::move(e));
  }
  {
    SurfaceEntry e;
    e.name = "plane-y0";
    e.description = "plane y = 0";
    e.surface = ImplicitSurface(E("y"), 1.0, e.name);
    e.patch = {{X, C(0.0), Y}, {-1.0, 1.0}, {0.0, two_pi}, {}, {kPi}};
    e.singular_curves = {{{X, C(0.0), C(0.0)}, {-1.0, 1.0}}, {{X, C(0.0), C(kPi)}, {-1.0, 1.0}}};
    e.singular_set = "the lines (x, 0, 0) and (x, 0, pi)";
    e.tags = {true, true, false};
    e.notes = "the claimed negative direction is not reproduced: with u = u(x) the quadratic form is 2 int u'^2";
    out.push_back(std::move(e));
  }
  {
    // a x + b y + c = 0 with (a, b, c) = (1, 2, 0.5)
    const double a = 1.0, b = 2.0, c = 0.5, n = std::hypot(a, b);
    const double x0 = -c * a / (n * n), y0 = -c * b / (n * n);
    const double alpha1 = std::atan2(-a, b) + kPi;  // in (0, pi), where a cos + b sin = 0
    SurfaceEntry e;
    e.name = "plane-abc";
    e.description = "plane x + 2 y + 0.5 = 0";
    e.surface = ImplicitSurface(E("x + 2*y + 0.5"), 1.0, e.name);
    const ExprFn px = x0 - (b / n) * X, py = y0 + (a / n) * X;
    e.patch = {{px, py, Y}, {-1.0, 1.0}, {0.0, two_pi}, {}, {alpha1, alpha1 + kPi}};
    e.singular_curves = {{{px, py, C(alpha1)}, {-1.0, 1.0}}, {{px, py, C(alpha1 + kPi)}, {-1.0, 1.0}}};
    e.singular_set = "two lines at the angles where cos(alpha) + 2 sin(alpha) = 0";
    e.tags = {true, true, false};
    out.push_back(std::move(e));
  }
  {
    SurfaceEntry e;
    e.name = "x-plus-sin";
    e.description = "x + sin(alpha) = 0";
    e.surface = ImplicitSurface(E("x + sin(alpha)"), 1.0, e.name);
    e.patch = {{-sin(X), Y, X}, {0.0, two_pi}, {-1.0, 1.0}, {kPi / 2, 3 * kPi / 2}, {}};
    e.singular_curves = {{{C(-1.0), X, C(kPi / 2)}, {-1.0, 1.0}}, {{C(1.0), X, C(3 * kPi / 2)}, {-1.0, 1.0}}};
    e.singular_set = "the lines (-1, y, pi/2) and (1, y, 3 pi/2)";
    e.tags = {true, false, std::nullopt};
    out.push_back(std::move(e));
  }
  {
    SurfaceEntry e;
    e.name = "x-minus-y";
    e.description = "x - y + sin(alpha) + cos(alpha) = 0";
    e.surface = ImplicitSurface(E("x - y + sin(alpha) + cos(alpha)"), 1.0, e.name);
    e.patch = {{Y - sin(X) - cos(X), Y, X}, {0.0, two_pi}, {-1.0, 1.0}, {kPi / 4, 5 * kPi / 4}, {}};
    const double r2 = std::sqrt(2.0);
    e.singular_curves = {{{X - r2, X, C(kPi / 4)}, {-1.0, 1.0}}, {{X + r2, X, C(5 * kPi / 4)}, {-1.0, 1.0}}};
    e.singular_set = "the lines (y - sqrt 2, y, pi/4) and (y + sqrt 2, y, 5 pi/4)";
    e.tags = {true, false, std::nullopt};
    out.push_back(std::move(e));
  }
  return out;
}

std::optional<SurfaceEntry> find_rt_surface(const std::string& name) {
  for (auto& e : catalog_rt_surfaces())
    if (e.name == name) return e;
  return std::nullopt;
}

}  // namespace subriemann
