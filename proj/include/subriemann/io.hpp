// JSON structure and surface specs, CSV output.
//
// Structure spec:
//   { "kind": "frame", "name": "...", "chart_domain": {"lo": [..3], "hi": [..3]},
//     "frame": {"X": [e, e, e], "Y": [e, e, e], "T": [e, e, e]} }
//   { "kind": "lie-group", "c2": c2, "c3": c3 }
//   { "kind": "lie-group", "alpha": a, "gamma": g }
// Surface spec:
//   { "kind": "implicit", "expr": f, "orientation": +-1 }
//   { "kind": "graph", "expr": u, "domain": {"x": [a, b], "y": [c, d]},
//     "metric": [[g11, g12], [g12, g22]] }
// Expressions use the ExprFn grammar.
#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "subriemann/surfaces.hpp"

namespace subriemann {

// Invalid spec; `field` is the JSON path of the offending entry.
class SpecError : public std::invalid_argument {
 public:
  SpecError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Parses JSON text, reporting syntax errors with line and column.
nlohmann::json parse_json_text(const std::string& text, const std::string& source = "input");
nlohmann::json read_json_file(const std::string& path);

Structure structure_from_json(const nlohmann::json& j);
// A catalog name or a path to a JSON spec.
Structure load_structure(const std::string& ref);

struct SurfaceSpec {
  ImplicitSurface surface;
  std::optional<GraphSurface> graph;
};
SurfaceSpec surface_from_json(const nlohmann::json& j);
// A roto-translation catalog name or a path to a JSON spec.
SurfaceSpec load_surface(const std::string& ref);

// 17 significant digits, '.' decimal point.
std::string format_number(double v);

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);

 private:
  std::ostream* out_;
  std::size_t width_;
};

}  // namespace subriemann
