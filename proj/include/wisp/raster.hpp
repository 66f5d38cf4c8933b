#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "floorplan.hpp"

namespace wisp {

enum class PixelClass : std::uint8_t { Outside = 0, Macro = 1, Cell = 2, Whitespace = 3 };

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // row-major, 3 bytes per pixel, row 0 at the top

  RgbImage() = default;
  RgbImage(int w, int h, Rgb fill = {}) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3) {
    for (std::size_t i = 0; i < data.size(); i += 3) {
      data[i] = fill.r;
      data[i + 1] = fill.g;
      data[i + 2] = fill.b;
    }
  }

  Rgb at(int c, int r) const {
    const std::size_t i = (static_cast<std::size_t>(r) * width + c) * 3;
    return {data[i], data[i + 1], data[i + 2]};
  }
  void set(int c, int r, Rgb v) {
    const std::size_t i = (static_cast<std::size_t>(r) * width + c) * 3;
    data[i] = v.r;
    data[i + 1] = v.g;
    data[i + 2] = v.b;
  }
};

/// Class -> color, indexed by PixelClass.
struct Palette {
  std::array<Rgb, 4> colors{Rgb{80, 80, 80}, Rgb{180, 0, 0}, Rgb{0, 0, 180}, Rgb{255, 255, 255}};
  Rgb operator[](PixelClass c) const { return colors[static_cast<std::size_t>(c)]; }
};

/// Inclusive-exclusive pixel index range.
struct PixelSpan {
  int lo = 0;
  int hi = 0;
  bool empty() const { return hi <= lo; }
  int size() const { return hi > lo ? hi - lo : 0; }
};

/// Pixel rectangle [c0, c1) x [r0, r1) on the canvas.
struct PixelRect {
  int c0 = 0, r0 = 0, c1 = 0, r1 = 0;
  bool empty() const { return c1 <= c0 || r1 <= r0; }
  long long count() const { return empty() ? 0 : static_cast<long long>(c1 - c0) * (r1 - r0); }
  PixelRect clipped(int w, int h) const {
    return {std::max(c0, 0), std::max(r0, 0), std::min(c1, w), std::min(r1, h)};
  }
  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

/// Fixed-size raster of a floorplan. Row 0 is the top of the design
/// (largest y); pixel (c, r) stands for the point at its center.
struct PixelGrid {
  int width = 0;
  int height = 0;
  double scale = 1.0;  // microns per pixel
  double x0 = 0.0;     // micron x of the left canvas edge
  double y1 = 0.0;     // micron y of the top canvas edge
  std::vector<PixelClass> classes;
  std::vector<std::int32_t> macro_id;  // -1 where no macro

  std::size_t index(int c, int r) const { return static_cast<std::size_t>(r) * width + c; }
  PixelClass cls(int c, int r) const { return classes[index(c, r)]; }
  std::size_t pixel_count() const { return classes.size(); }

  Point center_um(int c, int r) const { return {x0 + (c + 0.5) * scale, y1 - (r + 0.5) * scale}; }

  // Continuous pixel coordinates; pixel centers land on integers.
  double col_coord(double x_um) const { return (x_um - x0) / scale - 0.5; }
  double row_coord(double y_um) const { return (y1 - y_um) / scale - 0.5; }

  /// Columns whose centers satisfy lo <= x < hi (unclipped).
  PixelSpan cols_for(double lo, double hi) const {
    auto first_at_or_after = [&](double v) {
      int c = static_cast<int>(std::ceil((v - x0) / scale - 0.5));
      while (x0 + (c - 0.5) * scale >= v) --c;
      while (x0 + (c + 0.5) * scale < v) ++c;
      return c;
    };
    return {first_at_or_after(lo), first_at_or_after(hi)};
  }

  /// Rows whose centers satisfy lo <= y < hi (unclipped).
  PixelSpan rows_for(double lo, double hi) const {
    // Row centers descend in y, so this is the first row strictly below v.
    auto first_below = [&](double v) {
      int r = static_cast<int>(std::floor((y1 - v) / scale - 0.5));
      while (y1 - (r - 0.5) * scale < v) --r;
      while (!(y1 - (r + 0.5) * scale < v)) ++r;
      return r;
    };
    return {first_below(hi), first_below(lo)};
  }

  PixelRect rect_for(const Rect& r) const {
    auto cs = cols_for(r.xl(), r.xh());
    auto rs = rows_for(r.yl(), r.yh());
    return {cs.lo, rs.lo, cs.hi, rs.hi};
  }
};

/// Rasterizes `fp` onto a canvas whose longer side is `max_side` pixels.
/// Class precedence is Macro > Cell > Whitespace > Outside, decided by the
/// pixel center; pixels whose centers lie outside the outline stay Outside.
inline PixelGrid rasterize(const Floorplan& fp, std::span<const Point> origins, int max_side = 800) {
  if (max_side < 1) throw Error("max_side must be positive");
  const Rect bb = fp.outline.bbox();
  if (!(fp.outline.area() > 0)) throw Error("degenerate outline (zero area)");

  PixelGrid g;
  g.scale = std::max(bb.w, bb.h) / max_side;
  if (bb.w >= bb.h) {
    g.width = max_side;
    g.height = std::max(1, static_cast<int>(std::lround(bb.h / g.scale)));
  } else {
    g.height = max_side;
    g.width = std::max(1, static_cast<int>(std::lround(bb.w / g.scale)));
  }
  g.x0 = bb.xl();
  g.y1 = bb.yh();
  g.classes.assign(static_cast<std::size_t>(g.width) * g.height, PixelClass::Outside);
  g.macro_id.assign(g.classes.size(), -1);

  // Outline fill, row by row, with the same half-open crossing rule as
  // RectilinearOutline::contains.
  const auto& v = fp.outline.vertices();
  std::vector<double> xs;
  for (int r = 0; r < g.height; ++r) {
    const double y = g.y1 - (r + 0.5) * g.scale;
    xs.clear();
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++)
      if ((v[i].y > y) != (v[j].y > y)) xs.push_back(v[i].x);
    std::sort(xs.begin(), xs.end());
    std::size_t k = 0;
    for (int c = 0; c < g.width; ++c) {
      const double x = g.x0 + (c + 0.5) * g.scale;
      while (k < xs.size() && !(x < xs[k])) ++k;
      // odd number of crossings strictly to the right -> inside
      if ((xs.size() - k) % 2 == 1) g.classes[g.index(c, r)] = PixelClass::Whitespace;
    }
  }

  auto paint = [&](const Rect& rect, PixelClass cls, std::int32_t id) {
    const PixelRect pr = g.rect_for(rect).clipped(g.width, g.height);
    for (int r = pr.r0; r < pr.r1; ++r)
      for (int c = pr.c0; c < pr.c1; ++c) {
        const std::size_t i = g.index(c, r);
        if (g.classes[i] == PixelClass::Outside) continue;
        g.classes[i] = cls;
        g.macro_id[i] = id;
      }
  };
  for (const auto& cell : fp.cells)
    if (cell.utilization > 0) paint(cell.rect, PixelClass::Cell, -1);
  for (std::size_t m = 0; m < fp.macros.size(); ++m) {
    const Point o = m < origins.size() ? origins[m] : fp.macros[m].origin;
    paint(fp.macros[m].rect_at(o), PixelClass::Macro, static_cast<std::int32_t>(m));
  }
  return g;
}

inline PixelGrid rasterize(const Floorplan& fp, int max_side = 800) {
  const auto o = fp.origins();
  return rasterize(fp, o, max_side);
}

inline RgbImage render_rgb(const PixelGrid& grid, const Palette& palette = {}) {
  RgbImage img(grid.width, grid.height);
  for (int r = 0; r < grid.height; ++r)
    for (int c = 0; c < grid.width; ++c) img.set(c, r, palette[grid.cls(c, r)]);
  return img;
}

}  // namespace wisp
