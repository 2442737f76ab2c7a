#include <algorithm>

#include "doctest.h"
#include "helpers.hpp"

using namespace fixtures;

namespace {

SurfaceEntry entry(const char* name) {
  auto e = find_rt_surface(name);
  REQUIRE(e.has_value());
  return *e;
}

}  // namespace

TEST_SUITE("surfaces") {
  TEST_CASE("adapted frame is orthonormal and tangent") {
    Rng rng(31);
    const Structure rt = rt_structure();
    for (const auto& smp : rt_catalog_samples(rt)) {
      for (int k = 0; k < 20; ++k) {
        const Coords p = regular_point(smp, rng);
        const SurfaceFramePoint sf = surface_frame(rt, smp.surface, p);
        CHECK(sf.nh * sf.nh + sf.gNT * sf.gNT == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((sf.Z - sf.geometry.J_of(sf.nu)).norm() < 1e-12);
        CHECK((sf.S - (sf.gNT * sf.nu - sf.nh * Vec3(0, 0, 1))).norm() < 1e-12);
        CHECK(std::abs(sf.Z.dot(sf.N)) < 1e-12);
        CHECK(std::abs(sf.Z[2]) < 1e-12);
        CHECK(std::abs(sf.S.dot(sf.N)) < 1e-12);
        CHECK(std::abs(sf.Z.dot(sf.S)) < 1e-12);
        CHECK(sf.S.norm() == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("frame values on catalog surfaces") {
    const Structure rt = rt_structure();
    // plane y = 0 at a point with sin(alpha) > 0
    const SurfaceFramePoint pl = surface_frame(rt, entry("plane-y0").surface, {0.3, 0.0, 1.0});
    CHECK(pl.tauZnu == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(std::abs(std::abs(pl.Z[0]) - 1.0) < 1e-12);
    CHECK(std::abs(std::abs(pl.nu[1]) - 1.0) < 1e-12);
    CHECK(pl.thetaS == doctest::Approx(pl.nh / 2).epsilon(1e-12));
    // right-handed helicoid off the axis
    const double r = 0.7, a = 0.4;
    const SurfaceFramePoint hc = surface_frame(rt, entry("right-helicoid").surface, {r * std::cos(a), r * std::sin(a), a});
    CHECK(hc.tauZnu == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(hc.thetaS == doctest::Approx(hc.nh / 2).epsilon(1e-12));
    CHECK(hc.thetaS_identity == doctest::Approx(hc.thetaS).epsilon(1e-10));
    // Heisenberg graph u = 0 at (1, 0)
    const GraphSurface flat(ExprFn::constant(0.0), {0, 1}, {0, 1});
    const SurfaceFramePoint hf = surface_frame(flat.darboux_structure(), flat.implicit(), {1, 0, 0});
    CHECK(hf.nh == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(hf.gNT == doctest::Approx(-1 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(std::abs(hf.nu[0]) < 1e-14);
    CHECK(hf.nu[1] == doctest::Approx(1.0));  // along grad u + F = (0, 1)
    // singular point
    try {
      (void)surface_frame(rt, entry("right-helicoid").surface, {0, 0, 0.5});
      FAIL("expected a singular point");
    } catch (const SingularPointError& err) {
      CHECK(err.nh() < 1e-10);
    }
  }

  TEST_CASE("exact frame derivatives against flow differences") {
    Rng rng(32);
    const Structure rt = rt_structure();
    for (const auto& smp : rt_catalog_samples(rt)) {
      const Coords p = regular_point(smp, rng, 0.2);
      const SurfaceFramePoint sf = surface_frame(rt, smp.surface, p);
      for (SurfaceField fld : {SurfaceField::Z, SurfaceField::S}) {
        const Vec3 v = fld == SurfaceField::Z ? sf.Z : sf.S;
        const auto nh = derivative_along(rt, smp.surface, p, fld, [&](const Coords& q) { return surface_frame(rt, smp.surface, q).nh; });
        CHECK(nh.first == doctest::Approx(sf.d_nh(v)).epsilon(1e-7));
        const auto tzn =
            derivative_along(rt, smp.surface, p, fld, [&](const Coords& q) { return surface_frame(rt, smp.surface, q).tauZnu; });
        CHECK(std::abs(tzn.first - sf.d_tauZnu(v)) < 1e-7);
      }
    }
  }

  TEST_CASE("horizontal Jacobian") {
    CHECK(horizontal_jacobian({1, 0, 0}, {0.3, -2, 0}) == 0.0);
    Rng rng(33);
    const Structure rt = rt_structure();
    for (const auto& smp : rt_catalog_samples(rt)) {
      for (int k = 0; k < 10; ++k) {
        const SurfaceFramePoint sf = surface_frame(rt, smp.surface, regular_point(smp, rng));
        CHECK(horizontal_jacobian(sf.Z, sf.S) == doctest::Approx(sf.nh).epsilon(1e-12));
        Mat2 M;
        do {
          M << rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2);
        } while (std::abs(M.determinant()) < 0.1);
        const Vec3 e1 = M(0, 0) * sf.Z + M(0, 1) * sf.S, e2 = M(1, 0) * sf.Z + M(1, 1) * sf.S;
        CHECK(std::abs(horizontal_jacobian(e1, e2) - sf.nh) < 1e-12);
      }
    }
    CHECK_THROWS(horizontal_jacobian({1, 0, 0}, {2, 0, 0}));
  }

  TEST_CASE("graph areas") {
    const GraphSurface flat(ExprFn::constant(0.0), {0, 1}, {0, 1});
    const double oracle = (std::sqrt(2.0) + std::log(1 + std::sqrt(2.0))) / 3.0;
    CHECK(area_graph(flat) == doctest::Approx(oracle).epsilon(1e-10));
    CHECK(area_graph(GraphSurface(ExprFn::constant(0.0), {0.5, 0.5}, {0, 1})) == 0.0);
    // stratified Monte-Carlo over the scaled metric
    const ExprFn four = ExprFn::constant(4.0), zero = ExprFn::constant(0.0);
    const GraphSurface scaled(ExprFn::parse("0.3*x*y - 0.2*x^2"), {{{four, zero}, {zero, four}}}, {0, 1}, {0, 1});
    Rng rng(34);
    const int n = 400;
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) sum += area_graph_integrand(scaled, (i + rng.uniform(0, 1)) / n, (j + rng.uniform(0, 1)) / n);
    CHECK(area_graph(scaled) == doctest::Approx(sum / (n * n)).epsilon(1e-3));
  }

  TEST_CASE("parametric area agrees with graph area") {
    const ExprFn u = ExprFn::parse("0.3*x*y - 0.2*x^2 + 0.1*y");
    const GraphSurface gs(u, {0.2, 1.0}, {0.1, 0.9});
    Parametrization P;
    P.map = {var(0), var(1), u};
    P.u_range = {0.2, 1.0};
    P.v_range = {0.1, 0.9};
    CHECK(area_parametric(gs.darboux_structure(), P, {20, 4, 4}) == doctest::Approx(area_graph(gs)).epsilon(1e-9));
  }

  TEST_CASE("graph mean curvature") {
    const Structure h = heisenberg_structure();
    const GraphSurface flat(ExprFn::constant(0.0), {-1, 1}, {-1, 1});
    const GraphMeanCurvature m = mean_curvature_graph(flat.darboux_structure(), flat, 1, 1);
    CHECK(std::abs(m.divergence_term) < 1e-14);
    Rng rng(35);
    for (int k = 0; k < 5; ++k) {
      const ExprFn plane = rng.uniform(-1, 1) * var(0) + rng.uniform(-1, 1) * var(1) + rng.uniform(-1, 1);
      const GraphSurface gs(plane, {-1, 1}, {-1, 1});
      const double x = rng.uniform(-1, 1), y = rng.uniform(-1, 1);
      CHECK(std::abs(mean_curvature_graph(gs.darboux_structure(), gs, x, y).divergence_term) < 1e-12);
      CHECK(std::abs(mean_curvature_frame(h, gs.implicit(), {x, y, plane({x, y, 0})})) < 1e-12);
    }
    for (int k = 0; k < 20; ++k) {
      const GraphSurface gs(random_cubic(rng), {-1, 1}, {-1, 1});
      const Structure d = gs.darboux_structure();
      const GraphCurvature gc(gs);
      const double x = rng.uniform(-1, 1), y = rng.uniform(-1, 1);
      if (gs.w(x, y).norm() < 0.05) continue;
      const GraphMeanCurvature gm = gc.at(d, x, y);
      CHECK(gm.divergence_term == doctest::Approx(gm.frame).epsilon(1e-6));
      CHECK(std::abs(gm.mu) < 1e-6);
      CHECK(gm.frame == doctest::Approx(mean_curvature_frame(d, gs.implicit(), {x, y, gs.u()({x, y, 0})})).epsilon(1e-10));
    }
  }

  TEST_CASE("graph mean curvature under a constant metric") {
    // det g = 1, so the Darboux frame has c1 = 2
    const GraphSurface::Metric b{{{ExprFn::constant(2.0), ExprFn::constant(0.5)}, {ExprFn::constant(0.5), ExprFn::constant(0.625)}}};
    const GraphSurface gs(ExprFn::constant(0.0), b, {-1, 1}, {-1, 1});
    CHECK(gs.min_leading_minor() > 0.0);
    const Structure d = gs.darboux_structure();
    CHECK(d.c1() == doctest::Approx(2.0));
    // remainder stays bounded on the way into the singular point
    double worst = 0.0;
    for (double r : {1e-1, 1e-2, 1e-3, 1e-4}) {
      const GraphMeanCurvature gm = mean_curvature_graph(d, gs, r * 0.6, r * 0.8);
      CHECK(gm.frame == doctest::Approx(mean_curvature_frame(d, gs.implicit(), {r * 0.6, r * 0.8, 0})).epsilon(1e-9));
      worst = std::max(worst, std::abs(gm.rho));
    }
    CHECK(worst < 10.0);
  }

  TEST_CASE("minimal surfaces of the roto-translation group") {
    Rng rng(36);
    const Structure rt = rt_structure();
    for (const auto& e : catalog_rt_surfaces()) {
      const SampledSurface smp{e.name, &rt, e.surface, e.patch};
      for (int k = 0; k < 10; ++k) {
        const Coords p = regular_point(smp, rng);
        const double H = mean_curvature_frame(rt, e.surface, p);
        if (e.tags.minimal) CHECK(std::abs(H) < 1e-10);
        CHECK(std::abs(rt_minimal_residual(e.surface.jet(), p)) < 1e-10);
      }
    }
    const ExprJet tilted(ExprFn::parse("x + 2*y + 0.5*alpha - 1"));
    CHECK(std::abs(rt_minimal_residual(tilted, {0.3, 0.2, 0.7})) > 1e-2);
    const ImplicitSurface tilted_surface(tilted.fn());
    CHECK(std::abs(mean_curvature_frame(rt, tilted_surface, tilted_surface.project({0.3, 0.2, 0.3}))) > 1e-2);
    CHECK(std::abs(rt_minimal_residual(ExprJet(ExprFn::parse("alpha - 1.2")), {0.5, -0.4, 1.2})) == 0.0);
  }

  TEST_CASE("singular sets") {
    const GraphSurface flat(ExprFn::constant(0.0), {-1, 1}, {-1, 1});
    const auto loci = singular_set_graph(flat);
    REQUIRE(loci.size() == 1);
    CHECK(loci[0].kind == SingularLocus::Kind::IsolatedPoint);
    CHECK(std::hypot(loci[0].points[0][0], loci[0].points[0][1]) < 1e-10);

    const Structure rt = rt_structure();
    const Box box{{-2, -2, -3.5}, {2, 2, 3.5}};
    const auto helicoid = singular_set_detect(rt, entry("right-helicoid").surface, box);
    REQUIRE(helicoid.size() == 1);
    CHECK(helicoid[0].kind == SingularLocus::Kind::Curve);
    for (const auto& p : helicoid[0].points) CHECK(std::hypot(p[0], p[1]) < 1e-9);
    const auto report = stationarity_at_singular_curve(rt, entry("right-helicoid").surface, helicoid[0]);
    CHECK(report.orthogonal);
    CHECK_FALSE(report.inconclusive);

    const auto xs = singular_set_detect(rt, entry("x-plus-sin").surface, box);
    REQUIRE(xs.size() == 2);
    std::vector<double> xs_x;
    for (const auto& l : xs) {
      CHECK(l.kind == SingularLocus::Kind::Curve);
      const Coords p = l.points[l.points.size() / 2];
      xs_x.push_back(p[0]);
      // alpha = pi/2 at x = -1 and alpha = 3 pi/2 (= -pi/2 in the box) at x = 1
      CHECK(std::abs(std::sin(p[2]) + p[0]) < 1e-9);
      CHECK(std::abs(std::cos(p[2])) < 1e-9);
      CHECK_FALSE(stationarity_at_singular_curve(rt, entry("x-plus-sin").surface, l).orthogonal);
    }
    std::sort(xs_x.begin(), xs_x.end());
    CHECK(xs_x[0] == doctest::Approx(-1.0));
    CHECK(xs_x[1] == doctest::Approx(1.0));

    for (const auto& l : singular_set_detect(rt, entry("plane-y0").surface, box)) {
      CHECK(std::abs(std::sin(l.points[0][2])) < 1e-9);
      CHECK(stationarity_at_singular_curve(rt, entry("plane-y0").surface, l).orthogonal);
    }
    for (const auto& l : singular_set_detect(rt, entry("plane-abc").surface, box))
      CHECK(stationarity_at_singular_curve(rt, entry("plane-abc").surface, l).orthogonal);
    CHECK(singular_set_detect(rt, entry("left-helicoid").surface, box).empty());
  }
}
