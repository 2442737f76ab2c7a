// Named structures and surfaces with their expected properties, and the
// classifier for unimodular contact Lie groups.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "subriemann/variation.hpp"

namespace subriemann {

enum class LieGroupClass { Heisenberg, SU2, SL2R, E2, E11 };
std::string to_string(LieGroupClass g);

struct UnimodularClass {
  LieGroupClass group = LieGroupClass::Heisenberg;
  double webster = 0.0;
  double tau_norm = 0.0;
};
// Sign table in (W, |tau|); the equality strata W = 0 = |tau| and
// W = +-2|tau| are matched within `tol`.
UnimodularClass classify_unimodular(double c2, double c3, double tol = 1e-12);

struct Representative {
  LieGroupClass group;
  double c2, c3;
};
// One (c2, c3) pair per class, used by the catalog and the classifier tests.
const std::vector<Representative>& representative_constants();

// Roto-translation group: X = d/dalpha, Y = cos(alpha) d/dx + sin(alpha) d/dy,
// T = sin(alpha) d/dx - cos(alpha) d/dy.
Structure rt_structure();
// Heisenberg group: X = d/dx + y d/dt, Y = d/dy - x d/dt, T = d/dt.
Structure heisenberg_structure();

struct StructureEntry {
  std::string name;
  std::string description;
  Structure structure;
  double c1 = 0.0;
  double webster = 0.0;
  double tau_norm = 0.0;
  std::optional<LieGroupClass> group;
};
std::vector<StructureEntry> catalog_structures();
std::optional<StructureEntry> find_structure(const std::string& name);

struct SurfaceTags {
  bool minimal = false;
  bool stationary = false;
  std::optional<bool> stable;  // unset when no verdict is claimed
};

enum class CriterionSign { Zero, PositiveOffAxis, NotApplicable };
std::string to_string(CriterionSign c);

struct SurfaceEntry {
  std::string name;
  std::string description;
  ImplicitSurface surface;
  Parametrization patch;  // a representative piece, singular curves on panel edges
  std::vector<SingularCurveParam> singular_curves;
  std::string singular_set;
  SurfaceTags tags;
  CriterionSign criterion = CriterionSign::NotApplicable;
  std::string notes;
};
// Surfaces in the roto-translation group.
std::vector<SurfaceEntry> catalog_rt_surfaces();
std::optional<SurfaceEntry> find_rt_surface(const std::string& name);

}  // namespace subriemann
