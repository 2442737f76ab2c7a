#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "subriemann/io.hpp"

using namespace fixtures;

namespace {

// Sign table written out from the inequalities, independent of the classifier.
LieGroupClass expected_class(double W, double tau, double tol = 1e-12) {
  if (std::abs(W) <= tol && tau <= tol) return LieGroupClass::Heisenberg;
  if (W > 2 * tau + tol) return LieGroupClass::SU2;
  if (std::abs(W - 2 * tau) <= tol && W > 0) return LieGroupClass::E2;
  if (std::abs(W + 2 * tau) <= tol && W < 0) return LieGroupClass::E11;
  return LieGroupClass::SL2R;
}

}  // namespace

TEST_SUITE("catalog") {
  TEST_CASE("classifier examples") {
    CHECK(classify_unimodular(0, 0).group == LieGroupClass::Heisenberg);
    const UnimodularClass su2 = classify_unimodular(1, -2);
    CHECK(su2.group == LieGroupClass::SU2);
    CHECK(su2.webster == doctest::Approx(3.0));
    CHECK(su2.tau_norm == doctest::Approx(0.5));
    const UnimodularClass e2 = classify_unimodular(2, 0);
    CHECK(e2.group == LieGroupClass::E2);
    CHECK(e2.webster == doctest::Approx(2.0));
    CHECK(e2.tau_norm == doctest::Approx(1.0));
    CHECK(classify_unimodular(0, 2).group == LieGroupClass::E11);
    CHECK(classify_unimodular(1, 1).group == LieGroupClass::SL2R);
    for (const auto& rep : representative_constants()) CHECK(classify_unimodular(rep.c2, rep.c3).group == rep.group);
  }

  TEST_CASE("classifier over a 21 x 21 grid") {
    int counts[5] = {0, 0, 0, 0, 0};
    for (int i = 0; i <= 20; ++i)
      for (int j = 0; j <= 20; ++j) {
        const double c2 = -3.0 + 0.3 * i, c3 = -3.0 + 0.3 * j;
        const UnimodularClass c = classify_unimodular(c2, c3);
        const FrameGeometry g = Structure::unimodular(c2, c3).at({0, 0, 0});
        CHECK(c.webster == doctest::Approx(g.webster()).epsilon(1e-9));
        CHECK(c.tau_norm == doctest::Approx(g.tau_norm()).epsilon(1e-9));
        CAPTURE(c2);
        CAPTURE(c3);
        CHECK(c.group == expected_class(g.webster(), g.tau_norm(), 1e-9));
        ++counts[static_cast<int>(c.group)];
      }
    for (int k = 0; k < 5; ++k) CHECK(counts[k] > 0);
  }

  TEST_CASE("classification is invariant under frame rotation") {
    Rng rng(61);
    for (int k = 0; k < 50; ++k) {
      const double c2 = rng.uniform(-3, 3), c3 = rng.uniform(-3, 3), th = rng.uniform(0, 2 * kPi);
      const Mat2 rotated = torsion_in_rotated_frame(c2, c3, std::cos(th), std::sin(th));
      const double norm = rotated.operatorNorm();
      CHECK(norm == doctest::Approx(classify_unimodular(c2, c3).tau_norm).epsilon(1e-12));
      CHECK(std::abs(rotated.trace()) < 1e-12);
    }
  }

  TEST_CASE("structure catalog entries") {
    const auto rt = find_structure("rt");
    REQUIRE(rt.has_value());
    CHECK(rt->c1 == doctest::Approx(1.0));
    CHECK(rt->webster == doctest::Approx(0.5));
    CHECK(rt->tau_norm == doctest::Approx(0.5));
    const auto h = find_structure("heisenberg");
    REQUIRE(h.has_value());
    CHECK(h->c1 == doctest::Approx(2.0));
    CHECK(h->webster == 0.0);
    CHECK(h->tau_norm == 0.0);
    const auto sas = find_structure("sasakian-nonunimodular");
    REQUIRE(sas.has_value());
    CHECK(sas->webster == doctest::Approx(-1.0));
    CHECK(sas->tau_norm == 0.0);
    for (const auto& e : catalog_structures()) {
      const FrameGeometry g = e.structure.at({0.1, -0.2, 0.3});
      CAPTURE(e.name);
      CHECK(g.c1 == doctest::Approx(e.c1));
      CHECK(g.webster() == doctest::Approx(e.webster).epsilon(1e-9));
      CHECK(g.tau_norm() == doctest::Approx(e.tau_norm).epsilon(1e-9));
      if (e.group) CHECK(*e.group == expected_class(g.webster(), g.tau_norm(), 1e-9));
    }
    CHECK_FALSE(find_structure("no-such-structure").has_value());
  }

  TEST_CASE("surface catalog tags reproduce") {
    Rng rng(62);
    const Structure rt = rt_structure();
    const Box box{{-2, -2, -3.5}, {2, 2, 3.5}};
    const auto tag = [](const char* name) { return find_rt_surface(name)->tags; };
    CHECK(tag("right-helicoid").stable == std::optional<bool>(true));
    CHECK(tag("plane-abc").stable == std::optional<bool>(false));
    CHECK_FALSE(tag("x-plus-sin").stationary);
    CHECK(tag("x-plus-sin").minimal);
    for (const auto& e : catalog_rt_surfaces()) {
      CAPTURE(e.name);
      const SampledSurface smp{e.name, &rt, e.surface, e.patch};
      for (int k = 0; k < 10; ++k) CHECK(std::abs(mean_curvature_frame(rt, e.surface, regular_point(smp, rng))) <= 1e-8);
      // declared singular curves are singular and exhaust the detected set
      for (const auto& c : e.singular_curves)
        for (double t : {c.range[0], 0.5 * (c.range[0] + c.range[1])}) {
          const Coords p = c.point(t);
          CHECK(std::abs(e.surface.fn()(p)) < 1e-8);
          CHECK_THROWS_AS((void)surface_frame(rt, e.surface, p), SingularPointError);
        }
      const auto loci = singular_set_detect(rt, e.surface, box);
      bool stationary = true;
      for (const auto& l : loci) {
        const StationarityReport r = stationarity_at_singular_curve(rt, e.surface, l);
        CHECK_FALSE(r.inconclusive);
        stationary = stationary && r.orthogonal;
      }
      CHECK(stationary == e.tags.stationary);
      if (e.criterion == CriterionSign::Zero || e.criterion == CriterionSign::PositiveOffAxis) {
        std::vector<Coords> pts;
        for (int k = 0; k < 20; ++k) pts.push_back(regular_point(smp, rng));
        const SignField f = stability_sign_field(rt, e.surface, pts);
        if (e.criterion == CriterionSign::Zero) CHECK(std::abs(f.max) + std::abs(f.min) < 1e-12);
        else CHECK(f.min > 0.0);
      }
    }
  }
}

TEST_SUITE("io") {
  TEST_CASE("JSON syntax errors carry a position") {
    try {
      (void)parse_json_text("{\n  \"kind\": \"frame\",\n  oops\n}", "spec.json");
      FAIL("expected a syntax error");
    } catch (const SpecError& err) {
      CHECK(std::string(err.what()).find("line 3") != std::string::npos);
      CHECK(err.field() == "spec.json");
    }
  }

  TEST_CASE("structure specs") {
    const Structure lie = structure_from_json(parse_json_text(R"({"kind": "lie-group", "c2": 1, "c3": -2})"));
    CHECK(lie.at({0, 0, 0}).webster() == doctest::Approx(3.0));
    const Structure frame = structure_from_json(parse_json_text(R"({
      "kind": "frame", "name": "heis",
      "chart_domain": {"lo": [-5, -5, -5], "hi": [5, 5, 5]},
      "frame": {"X": ["1", "0", "y"], "Y": ["0", "1", "-x"], "T": ["0", "0", "1"]}})"));
    CHECK(frame.c1() == doctest::Approx(2.0));
    const auto field_of = [](const char* text) {
      try {
        (void)structure_from_json(parse_json_text(text));
      } catch (const SpecError& err) {
        return err.field();
      }
      return std::string("no error");
    };
    CHECK(field_of(R"({"kind": "frame", "chart_domain": {"lo": [-1,-1,-1], "hi": [1,1,1]},
                       "frame": {"X": ["1", "0"], "Y": ["0", "1", "-x"], "T": ["0", "0", "1"]}})")
              .find("frame.X") != std::string::npos);
    CHECK(field_of(R"({"kind": "frame", "chart_domain": {"lo": [-1,-1,-1], "hi": [1,1,1]},
                       "frame": {"X": ["1", "0", "y +"], "Y": ["0", "1", "-x"], "T": ["0", "0", "1"]}})")
              .find("frame.X") != std::string::npos);
    CHECK(field_of(R"({"kind": "lie-group", "c2": "one", "c3": 0})").find("c2") != std::string::npos);
    CHECK(field_of(R"({"kind": "torus"})").find("kind") != std::string::npos);
    // a frame with nonconstant c1 is rejected as a spec error on the structure
    CHECK(field_of(R"({"kind": "frame", "chart_domain": {"lo": [-1,-1,-1], "hi": [1,1,1]},
                       "frame": {"X": ["1", "0", "y^2"], "Y": ["0", "1", "0"], "T": ["0", "0", "1"]}})") == "structure");
  }

  TEST_CASE("surface specs") {
    const SurfaceSpec g = surface_from_json(parse_json_text(R"({"kind": "graph", "expr": "x*y", "domain": {"x": [-1, 1], "y": [0, 2]}})"));
    REQUIRE(g.graph.has_value());
    CHECK(g.graph->y_range()[1] == 2.0);
    const SurfaceSpec s = surface_from_json(parse_json_text(R"({"kind": "implicit", "expr": "y", "orientation": -1})"));
    CHECK(s.surface.orientation() == -1.0);
    CHECK_THROWS_AS(surface_from_json(parse_json_text(R"({"kind": "implicit", "expr": "y", "orientation": 2})")), SpecError);
    CHECK_THROWS_AS(surface_from_json(parse_json_text(R"({"kind": "graph", "expr": "x", "domain": {"x": [1, -1], "y": [0, 1]}})")),
                    SpecError);
    CHECK(load_surface("right-helicoid").surface.label() == "right-helicoid");
  }

  TEST_CASE("CSV formatting") {
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(2.0) == "2");
    CHECK(std::stod(format_number(kPi)) == kPi);
    std::ostringstream out;
    CsvWriter w(out, {"s", "x"});
    w.row({0.5, -1.25});
    CHECK(out.str() == "s,x\n0.5,-1.25\n");
  }
}
