#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include <json.hpp>

#include "geometry.hpp"

namespace wisp {

struct MacroInstance {
  std::string name;
  Point origin;  // lower-left, microns
  double w = 0.0;
  double h = 0.0;
  bool movable = true;

  Rect rect() const { return {origin.x, origin.y, w, h}; }
  Rect rect_at(Point o) const { return {o.x, o.y, w, h}; }
};

/// Stand-in for a region of placed standard cells.
struct CellRegion {
  Rect rect;
  double utilization = 1.0;
};

/// A pin on a macro. Without an explicit offset the pin sits at the macro
/// center.
struct MacroPin {
  std::string macro;
  std::optional<Point> offset;
};

/// A fixed IO pad location.
struct FixedPin {
  Point at;
};

using PinRef = std::variant<MacroPin, FixedPin>;

struct Net {
  std::string name;
  std::vector<PinRef> pins;
};

/// Macro name -> lower-left origin in microns.
using Positions = std::map<std::string, Point>;

struct Floorplan {
  std::string name;
  RectilinearOutline outline;
  std::vector<MacroInstance> macros;
  std::vector<CellRegion> cells;
  std::vector<Net> nets;
  // Non-fatal findings from parsing (e.g. overlapping macros in an initial
  // placement that refinement is expected to repair).
  std::vector<std::string> warnings;

  std::optional<std::size_t> macro_index(std::string_view n) const {
    for (std::size_t i = 0; i < macros.size(); ++i)
      if (macros[i].name == n) return i;
    return std::nullopt;
  }

  std::vector<Point> origins() const {
    std::vector<Point> o;
    o.reserve(macros.size());
    for (const auto& m : macros) o.push_back(m.origin);
    return o;
  }

  Positions positions() const {
    Positions p;
    for (const auto& m : macros) p[m.name] = m.origin;
    return p;
  }
};

namespace detail {

inline int line_of_offset(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

inline double require_number(const nlohmann::json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) throw ParseError(where + ": missing numeric field '" + key + "'");
  return it->get<double>();
}

inline std::string require_string(const nlohmann::json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) throw ParseError(where + ": missing string field '" + key + "'");
  return it->get<std::string>();
}

}  // namespace detail

/// Parses the floorplan JSON format. Hard errors throw ParseError; macro
/// overlaps or macros outside the outline are recorded in `warnings`.
inline Floorplan parse_floorplan(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("syntax error: ") + e.what(), detail::line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0));
  }
  if (!doc.is_object()) throw ParseError("syntax error: top level must be an object", 1);

  Floorplan fp;
  fp.name = doc.value("name", std::string("floorplan"));

  auto outline = doc.find("outline");
  if (outline == doc.end() || !outline->is_array()) throw ParseError("missing 'outline' array");
  std::vector<Point> verts;
  for (std::size_t i = 0; i < outline->size(); ++i) {
    const auto& v = (*outline)[i];
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw ParseError("outline vertex " + std::to_string(i) + " must be [x, y]");
    verts.push_back({v[0].get<double>(), v[1].get<double>()});
  }
  fp.outline = RectilinearOutline(std::move(verts));

  if (auto ms = doc.find("macros"); ms != doc.end()) {
    if (!ms->is_array()) throw ParseError("'macros' must be an array");
    for (std::size_t i = 0; i < ms->size(); ++i) {
      const auto& m = (*ms)[i];
      const std::string where = "macro " + std::to_string(i);
      MacroInstance mi;
      mi.name = detail::require_string(m, "name", where);
      mi.origin = {detail::require_number(m, "x", where), detail::require_number(m, "y", where)};
      mi.w = detail::require_number(m, "w", where);
      mi.h = detail::require_number(m, "h", where);
      mi.movable = m.value("movable", true);
      if (!(mi.w > 0) || !(mi.h > 0)) throw ParseError(where + " ('" + mi.name + "') must have positive size");
      if (fp.macro_index(mi.name)) throw ParseError("duplicate macro name '" + mi.name + "'");
      fp.macros.push_back(std::move(mi));
    }
  }

  if (auto cs = doc.find("cells"); cs != doc.end()) {
    if (!cs->is_array()) throw ParseError("'cells' must be an array");
    for (std::size_t i = 0; i < cs->size(); ++i) {
      const auto& c = (*cs)[i];
      const std::string where = "cell region " + std::to_string(i);
      CellRegion cr;
      cr.rect = {detail::require_number(c, "x", where), detail::require_number(c, "y", where),
                 detail::require_number(c, "w", where), detail::require_number(c, "h", where)};
      cr.utilization = c.value("util", 1.0);
      if (!(cr.rect.w > 0) || !(cr.rect.h > 0)) throw ParseError(where + " must have positive size");
      if (cr.utilization < 0.0 || cr.utilization > 1.0) throw ParseError(where + ": utilization outside [0, 1]");
      if (!fp.outline.contains(cr.rect)) throw ParseError(where + " lies outside the outline");
      fp.cells.push_back(cr);
    }
  }

  if (auto ns = doc.find("nets"); ns != doc.end()) {
    if (!ns->is_array()) throw ParseError("'nets' must be an array");
    for (std::size_t i = 0; i < ns->size(); ++i) {
      const auto& n = (*ns)[i];
      const std::string where = "net " + std::to_string(i);
      Net net;
      net.name = n.value("name", "net" + std::to_string(i));
      auto pins = n.find("pins");
      if (pins == n.end() || !pins->is_array() || pins->empty()) throw ParseError(where + " needs at least one pin");
      for (const auto& p : *pins) {
        if (p.contains("macro")) {
          MacroPin mp{detail::require_string(p, "macro", where), std::nullopt};
          if (!fp.macro_index(mp.macro))
            throw ParseError(where + " ('" + net.name + "') references unknown macro '" + mp.macro + "'");
          if (p.contains("dx") || p.contains("dy"))
            mp.offset = Point{p.value("dx", 0.0), p.value("dy", 0.0)};
          net.pins.emplace_back(std::move(mp));
        } else {
          net.pins.emplace_back(FixedPin{{detail::require_number(p, "x", where), detail::require_number(p, "y", where)}});
        }
      }
      fp.nets.push_back(std::move(net));
    }
  }

  for (std::size_t i = 0; i < fp.macros.size(); ++i) {
    if (!fp.outline.contains(fp.macros[i].rect()))
      fp.warnings.push_back("macro '" + fp.macros[i].name + "' is not inside the outline");
    for (std::size_t j = i + 1; j < fp.macros.size(); ++j)
      if (fp.macros[i].rect().overlaps(fp.macros[j].rect()))
        fp.warnings.push_back("macros '" + fp.macros[i].name + "' and '" + fp.macros[j].name + "' overlap");
  }
  return fp;
}

inline nlohmann::ordered_json to_json(const Floorplan& fp) {
  nlohmann::ordered_json j;
  j["name"] = fp.name;
  j["outline"] = nlohmann::ordered_json::array();
  for (const auto& v : fp.outline.vertices()) j["outline"].push_back({v.x, v.y});
  j["macros"] = nlohmann::ordered_json::array();
  for (const auto& m : fp.macros)
    j["macros"].push_back({{"name", m.name}, {"x", m.origin.x}, {"y", m.origin.y}, {"w", m.w}, {"h", m.h}, {"movable", m.movable}});
  j["cells"] = nlohmann::ordered_json::array();
  for (const auto& c : fp.cells)
    j["cells"].push_back({{"x", c.rect.x}, {"y", c.rect.y}, {"w", c.rect.w}, {"h", c.rect.h}, {"util", c.utilization}});
  j["nets"] = nlohmann::ordered_json::array();
  for (const auto& n : fp.nets) {
    nlohmann::ordered_json pins = nlohmann::ordered_json::array();
    for (const auto& p : n.pins) {
      if (const auto* mp = std::get_if<MacroPin>(&p)) {
        nlohmann::ordered_json pj{{"macro", mp->macro}};
        if (mp->offset) {
          pj["dx"] = mp->offset->x;
          pj["dy"] = mp->offset->y;
        }
        pins.push_back(pj);
      } else {
        const auto& fpin = std::get<FixedPin>(p);
        pins.push_back({{"x", fpin.at.x}, {"y", fpin.at.y}});
      }
    }
    j["nets"].push_back({{"name", n.name}, {"pins", pins}});
  }
  return j;
}

inline std::string dump_floorplan(const Floorplan& fp) { return to_json(fp).dump(2) + "\n"; }

/// Nets with macro pins resolved to indices, for repeated HPWL evaluation
/// over index-addressed origins.
class ResolvedNets {
public:
  struct Pin {
    std::size_t macro = npos;  // npos for fixed pins
    Point offset;              // from macro origin, or absolute for fixed pins
  };
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  explicit ResolvedNets(const Floorplan& fp) {
    for (const auto& n : fp.nets) {
      std::vector<Pin> pins;
      for (const auto& p : n.pins) {
        if (const auto* mp = std::get_if<MacroPin>(&p)) {
          auto idx = fp.macro_index(mp->macro);
          if (!idx) throw Error("unresolved pin: net '" + n.name + "' references unknown macro '" + mp->macro + "'");
          const auto& m = fp.macros[*idx];
          pins.push_back({*idx, mp->offset.value_or(Point{0.5 * m.w, 0.5 * m.h})});
        } else {
          pins.push_back({npos, std::get<FixedPin>(p).at});
        }
      }
      nets_.push_back(std::move(pins));
    }
  }

  double hpwl(std::span<const Point> origins) const {
    double total = 0.0;
    for (const auto& net : nets_) {
      double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
      for (const auto& p : net) {
        Point q = p.offset;
        if (p.macro != npos) {
          q.x += origins[p.macro].x;
          q.y += origins[p.macro].y;
        }
        x0 = std::min(x0, q.x);
        x1 = std::max(x1, q.x);
        y0 = std::min(y0, q.y);
        y1 = std::max(y1, q.y);
      }
      if (!net.empty()) total += (x1 - x0) + (y1 - y0);
    }
    return total;
  }

  std::size_t size() const { return nets_.size(); }

private:
  std::vector<std::vector<Pin>> nets_;
};

/// Half-perimeter wirelength with macro origins taken from `positions`.
/// Every macro referenced by a net must have an entry.
inline double hpwl(const Floorplan& fp, const Positions& positions) {
  std::vector<Point> origins = fp.origins();
  std::vector<bool> known(fp.macros.size(), false);
  for (std::size_t i = 0; i < fp.macros.size(); ++i) {
    if (auto it = positions.find(fp.macros[i].name); it != positions.end()) {
      origins[i] = it->second;
      known[i] = true;
    }
  }
  for (const auto& n : fp.nets)
    for (const auto& p : n.pins)
      if (const auto* mp = std::get_if<MacroPin>(&p)) {
        auto idx = fp.macro_index(mp->macro);
        if (!idx || !known[*idx]) throw Error("unresolved pin: no position for macro '" + mp->macro + "'");
      }
  return ResolvedNets(fp).hpwl(origins);
}

inline double hpwl(const Floorplan& fp) { return ResolvedNets(fp).hpwl(fp.origins()); }

/// Copy of `fp` with the listed macro origins replaced. Legality is not
/// checked here.
inline Floorplan apply_positions(const Floorplan& fp, const Positions& positions) {
  Floorplan out = fp;
  for (const auto& [name, origin] : positions) {
    auto idx = out.macro_index(name);
    if (!idx) throw Error("unknown macro '" + name + "'");
    out.macros[*idx].origin = origin;
  }
  return out;
}

inline Floorplan apply_origins(const Floorplan& fp, std::span<const Point> origins) {
  Floorplan out = fp;
  for (std::size_t i = 0; i < out.macros.size() && i < origins.size(); ++i) out.macros[i].origin = origins[i];
  return out;
}

}  // namespace wisp
