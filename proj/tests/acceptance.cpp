// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <cstdio>
#include <string>

#include "helpers.hpp"
#include "identities.hpp"
#include "subriemann/report.hpp"

using namespace fixtures;

namespace {

int failures = 0;

void verdict(const char* id, bool pass, const std::string& detail) {
  std::printf("%-4s %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

void structure_constants() {
  const FrameGeometry rt = rt_structure().at({0.3, -0.2, 0.7});
  const double rt_err = std::max({std::abs(rt.webster() - 0.5), std::abs(rt.tau(0, 0)), std::abs(rt.tau(1, 1)),
                                  std::abs(rt.tau(0, 1) - 0.5), std::abs(rt.tau(1, 0) - 0.5)});
  const FrameGeometry h = heisenberg_structure().at({0.3, -0.2, 0.7});
  const double h_err = std::max({std::abs(h.c1 - 2.0), std::abs(h.webster()), h.tau.norm()});
  verdict("1", rt_err <= 1e-12 && h_err <= 1e-12, fmt("rt deviation %.2e, heisenberg deviation %.2e", rt_err, h_err));
}

LieGroupClass expected_class(double W, double tau) {
  const double tol = 1e-12;
  if (std::abs(W) <= tol && tau <= tol) return LieGroupClass::Heisenberg;
  if (W > 2 * tau + tol) return LieGroupClass::SU2;
  if (std::abs(W - 2 * tau) <= tol && W > 0) return LieGroupClass::E2;
  if (std::abs(W + 2 * tau) <= tol && W < 0) return LieGroupClass::E11;
  return LieGroupClass::SL2R;
}

void classifier() {
  int wrong = 0, classes_seen = 0;
  for (const auto& rep : representative_constants())
    if (classify_unimodular(rep.c2, rep.c3).group != rep.group) ++wrong;
  bool seen[5] = {false, false, false, false, false};
  for (int i = 0; i <= 20; ++i)
    for (int j = 0; j <= 20; ++j) {
      const double c2 = -3.0 + 0.3 * i, c3 = -3.0 + 0.3 * j;
      const FrameGeometry g = Structure::unimodular(c2, c3).at({0, 0, 0});
      const LieGroupClass c = classify_unimodular(c2, c3).group;
      if (c != expected_class(g.webster(), g.tau_norm())) ++wrong;
      seen[static_cast<int>(c)] = true;
    }
  for (bool s : seen) classes_seen += s;
  Rng rng(2);
  double rot = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double c2 = rng.uniform(-3, 3), c3 = rng.uniform(-3, 3), th = rng.uniform(0, 2 * kPi);
    const UnimodularClass c = classify_unimodular(c2, c3);
    const Mat2 r = torsion_in_rotated_frame(c2, c3, std::cos(th), std::sin(th));
    rot = std::max({rot, std::abs(r.operatorNorm() - c.tau_norm), std::abs(r.trace())});
  }
  verdict("2", wrong == 0 && classes_seen == 5 && rot <= 1e-10,
          std::to_string(wrong) + " misclassified, " + std::to_string(classes_seen) + " classes on the grid" +
              fmt(", rotation deviation %.2e", rot));
}

double closed_form_error(const Structure& rt, const CharState& st, double s_end, double step) {
  const CurveTrace tr = integrate_characteristic(rt, st, s_end, {step, 1});
  const RtInitialData in = rt_initial_data(st);
  double err = 0.0;
  for (const auto& smp : tr.samples) {
    const Coords c = rt_characteristic_closed_form(in, smp.s);
    for (int k = 0; k < 3; ++k) err = std::max(err, std::abs(c[k] - smp.point[k]));
  }
  return err;
}

void curve_oracle() {
  const Structure rt = rt_structure();
  Rng rng(3);
  double sup = 0.0;
  for (int k = 0; k < 8; ++k) {
    const CharState st{{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}, rng.uniform(0, 2 * kPi), 0.0};
    sup = std::max(sup, closed_form_error(rt, st, 10.0, 1e-3));
  }
  const CharState st{{0, 0, 0}, kPi / 4, 0};
  const double steps[] = {0.2, 0.1, 0.05, 0.025};
  double lh[4], le[4], mh = 0, me = 0;
  for (int i = 0; i < 4; ++i) {
    lh[i] = std::log(steps[i]);
    le[i] = std::log(closed_form_error(rt, st, 10.0, steps[i]));
    mh += lh[i] / 4;
    me += le[i] / 4;
  }
  double num = 0, den = 0;
  for (int i = 0; i < 4; ++i) {
    num += (lh[i] - mh) * (le[i] - me);
    den += (lh[i] - mh) * (lh[i] - mh);
  }
  const double slope = num / den;
  verdict("3", sup <= 1e-8 && slope >= 3.8 && slope <= 4.2, fmt("sup error %.2e, fitted order %.3f", sup, slope));
}

void jacobi_oracle() {
  struct Case {
    Structure s;
    double phi, lambda, k;
  };
  const std::vector<Case> cases{{rt_structure(), kPi / 3, 0.0, 0.25}, {rt_structure(), 0.0, 0.0, 1.0},
                                {heisenberg_structure(), 0.4, 1.0, 4.0}};
  double sine = 0.0, fd = 0.0;
  for (const auto& c : cases) {
    CurveFamily fam;
    fam.base = {{0.2, 0.1, 0.3}, c.phi, c.lambda};
    fam.transverse = -c.s.at(fam.base.point).J_of(direction(c.phi)) / c.s.c1();
    const CurveTrace base = integrate_characteristic(c.s, fam.base, 6.0, {1e-3, 10});
    const JacobiTrace ode = jacobi_vertical_ode(c.s, base, jacobi_initial_data(c.s, fam));
    const JacobiTrace fam_trace = jacobi_from_curve_family(c.s, fam, 6.0, 1e-4, {1e-3, 10});
    const double r = std::sqrt(c.k);
    for (std::size_t i = 0; i < ode.samples.size(); ++i) {
      const auto& smp = ode.samples[i];
      sine = std::max(sine, std::abs(smp.gVT + std::sin(r * smp.s) / r));
      fd = std::max(fd, std::abs(smp.gVT - fam_trace.samples.at(i).gVT));
    }
  }
  verdict("4", sine <= 1e-6 && fd <= 1e-4, fmt("sine deviation %.2e, curve-family deviation %.2e", sine, fd));
}

void identity_suites() {
  Rng rng(5);
  const Structure rt = rt_structure(), h = heisenberg_structure();
  std::vector<SampledSurface> surfaces = rt_catalog_samples(rt);
  for (int k = 0; k < 6; ++k) surfaces.push_back(heisenberg_graph(h, random_cubic(rng), "cubic-" + std::to_string(k)));
  double pointwise = 0.0;
  const int n = 200;
  for (int k = 0; k < n; ++k) {
    const SampledSurface& smp = surfaces[k % surfaces.size()];
    const Coords p = regular_point(smp, rng, 0.15);
    pointwise = std::max(pointwise, identity_residuals(*smp.structure, smp.surface, p, field(random_chart_polynomial(rng))).max());
  }
  double integral = 0.0;
  for (int k = 0; k < n; ++k) {
    const MinimalSample ms = minimal_sample(rng, k % 5, rt, h);
    const ParametricMeasure m(*ms.structure, ms.bump.patch, {12, 1, 1});
    const ScalarField v = field(random_chart_polynomial(rng)) * ms.bump.u;
    const CanonicalReduction cr = canonical_reduction(*ms.structure, ms.surface, m, ms.bump.u);
    integral = std::max({integral, std::abs(integration_by_parts_residual(*ms.structure, ms.surface, m, ms.bump.u, v)),
                         std::abs(cr.lhs - cr.rhs)});
  }
  verdict("5", pointwise <= 1e-6 && integral <= 1e-6,
          std::to_string(n) + " samples each" + fmt(", largest pointwise residual %.2e, largest integral residual %.2e", pointwise, integral));
}

void mean_curvature() {
  Rng rng(6);
  double graph = 0.0;
  int compared = 0;
  while (compared < 100) {
    const GraphSurface gs(random_cubic(rng), {-1, 1}, {-1, 1});
    const GraphCurvature gc(gs);
    const Structure d = gs.darboux_structure();
    for (int k = 0; k < 10; ++k) {
      const double x = rng.uniform(-1, 1), y = rng.uniform(-1, 1);
      if (gs.w(x, y).norm() < 0.05) continue;
      const GraphMeanCurvature gm = gc.at(d, x, y);
      graph = std::max(graph, std::abs(gm.divergence_term - gm.frame) / std::max(1.0, std::abs(gm.frame)));
      ++compared;
    }
  }
  const Structure rt = rt_structure();
  double minimal = 0.0;
  for (const char* name : {"vertical-plane", "left-helicoid", "right-helicoid", "x-plus-sin"}) {
    const SurfaceEntry e = rt_entry(name);
    const SampledSurface smp{name, &rt, e.surface, e.patch};
    for (int k = 0; k < 50; ++k) minimal = std::max(minimal, std::abs(rt_minimal_residual(e.surface.jet(), regular_point(smp, rng))));
  }
  const ImplicitSurface tilted(ExprFn::parse("x + 2*y + 0.5*alpha - 1"));
  // zero at two angles per period
  double tilted_max = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Coords p = tilted.project({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 2 * kPi)});
    tilted_max = std::max(tilted_max, std::abs(rt_minimal_residual(tilted.jet(), p)));
  }
  verdict("6", graph <= 1e-6 && minimal <= 1e-10 && tilted_max > 0.1,
          fmt("graph vs frame %.2e, minimal residual %.2e, tilted plane max |residual| %.3f", graph, minimal, tilted_max));
}

void variation_oracles() {
  const Structure h = heisenberg_structure();
  const GraphCase gc(h);
  const ParametricMeasure m(h, gc.patch, {12, 1, 1});
  VariationField U;
  U.f = gc.bump * field("1 + x");
  U.l = gc.bump * field("y - 0.3");
  U.h = gc.bump * field("0.5*x*y");
  U.v = gc.bump * field("1 - y");
  const double num = first_variation_numeric(h, gc.graph.surface, m, U);
  const double first = std::abs(first_variation_formula(h, gc.graph.surface, m, U) - num) / std::abs(num);
  const Structure rt = rt_structure();
  const SurfaceEntry vp = rt_entry("vertical-plane");
  Rng rng(7);
  double second = 0.0;
  for (int k = 0; k < 5; ++k) {
    const Bump b = chart_bump(rng, vp.patch, rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(0.1, 0.3), rng.uniform(0.1, 0.3));
    const ParametricMeasure pm(rt, b.patch, {12, 1, 1});
    const double I = index_form(rt, vp.surface, pm, b.u, b.u);
    const double n2 = second_variation_numeric(rt, vp.surface, pm, VariationField::normal(b.u));
    second = std::max(second, std::abs(n2 - I) / std::abs(I));
  }
  verdict("7", first <= 1e-4 && second <= 1e-3, fmt("first variation rel. error %.2e, second variation rel. error %.2e", first, second));
}

void rt_reproduction() {
  const RtReport r = run_rt_report();
  for (const auto& item : r.items) {
    const std::string id = "8" + item.id;
    verdict(id.c_str(), item.pass, item.claim + ": " + item.detail);
  }
}

void area_quadrature() {
  const GraphSurface flat(ExprFn::constant(0.0), {0, 1}, {0, 1});
  const double oracle = (std::sqrt(2.0) + std::log(1 + std::sqrt(2.0))) / 3.0;
  const double exact_err = std::abs(area_graph(flat) - oracle);
  const ExprFn four = ExprFn::constant(4.0), zero = ExprFn::constant(0.0);
  const GraphSurface scaled(ExprFn::parse("0.3*x*y - 0.2*x^2"), {{{four, zero}, {zero, four}}}, {0, 1}, {0, 1});
  Rng rng(9);
  const int n = 1000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) sum += area_graph_integrand(scaled, (i + rng.uniform(0, 1)) / n, (j + rng.uniform(0, 1)) / n);
  const double mc = sum / (static_cast<double>(n) * n), quad = area_graph(scaled);
  const double mc_err = std::abs(quad - mc) / mc;
  verdict("9", exact_err <= 1e-8 && mc_err <= 1e-4, fmt("closed-form error %.2e, Monte-Carlo rel. deviation %.2e", exact_err, mc_err));
}

}  // namespace

int main() {
  structure_constants();
  classifier();
  curve_oracle();
  jacobi_oracle();
  identity_suites();
  mean_curvature();
  variation_oracles();
  rt_reproduction();
  area_quadrature();
  std::printf("%d criterion line(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
