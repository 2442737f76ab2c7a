#include "subriemann/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "subriemann/catalog.hpp"

namespace subriemann {

using nlohmann::json;

nlohmann::json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw SpecError(source, "JSON syntax error at line " + std::to_string(line) + ", column " +
                                std::to_string(col));
  }
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError(path, "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

namespace {

const json& member(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw SpecError(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw SpecError(path + "." + key, "missing field");
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SpecError(path, "expected a number");
  return j.get<double>();
}

ExprFn expression(const json& j, const std::string& path) {
  if (j.is_number()) return ExprFn::constant(j.get<double>());
  if (!j.is_string()) throw SpecError(path, "expected an expression string");
  try {
    return ExprFn::parse(j.get<std::string>());
  } catch (const ParseError& e) {
    throw SpecError(path, e.what());
  }
}

Coords triple(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw SpecError(path, "expected an array of three numbers");
  Coords c;
  for (int i = 0; i < 3; ++i) c[i] = number(j[i], path + "[" + std::to_string(i) + "]");
  return c;
}

std::array<double, 2> interval(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw SpecError(path, "expected [lo, hi]");
  const double a = number(j[0], path + "[0]"), b = number(j[1], path + "[1]");
  if (!(a < b)) throw SpecError(path, "empty interval");
  return {a, b};
}

std::string kind_of(const json& j, const std::string& path) {
  const json& k = member(j, "kind", path);
  if (!k.is_string()) throw SpecError(path + ".kind", "expected a string");
  return k.get<std::string>();
}

}  // namespace

Structure structure_from_json(const json& j) {
  const std::string kind = kind_of(j, "structure");
  const std::string name = j.is_object() && j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>() : "";
  try {
    if (kind == "lie-group") {
      if (j.contains("c2") || j.contains("c3"))
        return Structure::unimodular(number(member(j, "c2", "structure"), "structure.c2"),
                                     number(member(j, "c3", "structure"), "structure.c3"), name);
      return Structure::nonunimodular(number(member(j, "alpha", "structure"), "structure.alpha"),
                                      number(member(j, "gamma", "structure"), "structure.gamma"), name);
    }
    if (kind != "frame") throw SpecError("structure.kind", "unknown kind '" + kind + "'");
    const json& dom = member(j, "chart_domain", "structure");
    Box box{triple(member(dom, "lo", "structure.chart_domain"), "structure.chart_domain.lo"),
            triple(member(dom, "hi", "structure.chart_domain"), "structure.chart_domain.hi")};
    const json& fr = member(j, "frame", "structure");
    Structure::FrameExprs rows;
    const char* names[] = {"X", "Y", "T"};
    for (int r = 0; r < 3; ++r) {
      const std::string path = std::string("structure.frame.") + names[r];
      const json& row = member(fr, names[r], "structure.frame");
      if (!row.is_array() || row.size() != 3) throw SpecError(path, "expected three coefficient expressions");
      for (int c = 0; c < 3; ++c) rows[r][c] = expression(row[c], path + "[" + std::to_string(c) + "]");
    }
    return Structure::from_frame(rows, box, name);
  } catch (const SpecError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw SpecError("structure", e.what());
  } catch (const DomainError& e) {
    throw SpecError("structure", e.what());
  }
}

Structure load_structure(const std::string& ref) {
  if (auto e = find_structure(ref)) return e->structure;
  return structure_from_json(read_json_file(ref));
}

SurfaceSpec surface_from_json(const json& j) {
  const std::string kind = kind_of(j, "surface");
  if (kind == "implicit") {
    const ExprFn f = expression(member(j, "expr", "surface"), "surface.expr");
    double orientation = 1.0;
    if (j.contains("orientation")) {
      orientation = number(j["orientation"], "surface.orientation");
      if (orientation != 1.0 && orientation != -1.0) throw SpecError("surface.orientation", "expected +1 or -1");
    }
    const std::string label = j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>() : "";
    return {ImplicitSurface(f, orientation, label), std::nullopt};
  }
  if (kind != "graph") throw SpecError("surface.kind", "unknown kind '" + kind + "'");
  const ExprFn u = expression(member(j, "expr", "surface"), "surface.expr");
  const json& dom = member(j, "domain", "surface");
  const auto xr = interval(member(dom, "x", "surface.domain"), "surface.domain.x");
  const auto yr = interval(member(dom, "y", "surface.domain"), "surface.domain.y");
  GraphSurface::Metric metric{{{ExprFn::constant(1.0), ExprFn()}, {ExprFn(), ExprFn::constant(1.0)}}};
  if (j.contains("metric")) {
    const json& m = j["metric"];
    if (!m.is_array() || m.size() != 2) throw SpecError("surface.metric", "expected a 2x2 array");
    for (int a = 0; a < 2; ++a) {
      if (!m[a].is_array() || m[a].size() != 2) throw SpecError("surface.metric", "expected a 2x2 array");
      for (int b = 0; b < 2; ++b)
        metric[a][b] = expression(m[a][b], "surface.metric[" + std::to_string(a) + "][" + std::to_string(b) + "]");
    }
  }
  try {
    GraphSurface gs(u, metric, xr, yr);
    return {gs.implicit(), gs};
  } catch (const std::invalid_argument& e) {
    throw SpecError("surface.metric", e.what());
  }
}

SurfaceSpec load_surface(const std::string& ref) {
  if (auto e = find_rt_surface(ref)) return {e->surface, std::nullopt};
  return surface_from_json(read_json_file(ref));
}

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of zero
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header) : out_(&out), width_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) *out_ << (i ? "," : "") << header[i];
  *out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != width_) throw std::invalid_argument("CSV row width does not match the header");
  for (std::size_t i = 0; i < values.size(); ++i) *out_ << (i ? "," : "") << format_number(values[i]);
  *out_ << '\n';
}

}  // namespace subriemann
