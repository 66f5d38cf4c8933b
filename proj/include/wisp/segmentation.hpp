#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numbers>
#include <vector>

#include "raster.hpp"

namespace wisp {

struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(int w, int h, bool fill = false)
      : width(w), height(h), bits(static_cast<std::size_t>(w) * h, fill ? 1 : 0) {}

  static BinaryMask from_rows(const std::vector<std::vector<int>>& rows) {
    BinaryMask m(rows.empty() ? 0 : static_cast<int>(rows[0].size()), static_cast<int>(rows.size()));
    for (int r = 0; r < m.height; ++r)
      for (int c = 0; c < m.width; ++c) m.set(c, r, rows[r][c] != 0);
    return m;
  }

  std::size_t index(int c, int r) const { return static_cast<std::size_t>(r) * width + c; }
  bool at(int c, int r) const { return bits[index(c, r)] != 0; }
  void set(int c, int r, bool v = true) { bits[index(c, r)] = v ? 1 : 0; }
  bool same_shape(const BinaryMask& o) const { return width == o.width && height == o.height; }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto b : bits) n += b;
    return n;
  }

  // Pixelwise subset test.
  bool subset_of(const BinaryMask& o) const {
    for (std::size_t i = 0; i < bits.size(); ++i)
      if (bits[i] && !o.bits[i]) return false;
    return true;
  }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

struct Hsv {
  double h = 0.0;  // degrees, [0, 360)
  double s = 0.0;  // [0, 1]
  double v = 0.0;  // [0, 1]
};

struct HsvImage {
  int width = 0;
  int height = 0;
  std::vector<Hsv> px;
  const Hsv& at(int c, int r) const { return px[static_cast<std::size_t>(r) * width + c]; }
};

inline Hsv to_hsv(Rgb p) {
  const double r = p.r, g = p.g, b = p.b;
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double d = mx - mn;
  Hsv out;
  out.v = mx / 255.0;
  out.s = mx > 0 ? d / mx : 0.0;
  if (d > 0) {
    double h;
    if (mx == r)
      h = 60.0 * std::fmod((g - b) / d, 6.0);
    else if (mx == g)
      h = 60.0 * ((b - r) / d + 2.0);
    else
      h = 60.0 * ((r - g) / d + 4.0);
    if (h < 0) h += 360.0;
    if (h >= 360.0) h -= 360.0;
    out.h = h;
  }
  return out;
}

inline HsvImage to_hsv(const RgbImage& img) {
  HsvImage out{img.width, img.height, {}};
  out.px.resize(static_cast<std::size_t>(img.width) * img.height);
  for (std::size_t i = 0; i < out.px.size(); ++i)
    out.px[i] = to_hsv(Rgb{img.data[3 * i], img.data[3 * i + 1], img.data[3 * i + 2]});
  return out;
}

// ---------------------------------------------------------------------------
// Edge detection

/// Canny edge map plus the quantized gradient orientation of every edge
/// pixel: 0 = horizontal gradient (vertical edge), 1 = 45 degrees,
/// 2 = vertical gradient (horizontal edge), 3 = 135 degrees.
struct EdgeMap {
  BinaryMask edges;
  std::vector<std::uint8_t> orientation;
};

inline std::vector<double> to_gray(const RgbImage& img) {
  std::vector<double> g(static_cast<std::size_t>(img.width) * img.height);
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] = 0.299 * img.data[3 * i] + 0.587 * img.data[3 * i + 1] + 0.114 * img.data[3 * i + 2];
  return g;
}

/// Classic Canny: Gaussian blur (sigma 1, replicated border), Sobel
/// gradients, non-maximum suppression and 8-connected hysteresis between
/// `low` and `high` gradient magnitudes.
inline EdgeMap canny(const std::vector<double>& gray, int w, int h, double low, double high) {
  if (w < 3 || h < 3) throw Error("canny: image must be at least 3x3");
  if (low < 0 || low > high) throw Error("canny: thresholds must satisfy 0 <= low <= high");

  auto clampi = [](int v, int n) { return std::clamp(v, 0, n - 1); };
  constexpr int radius = 3;
  std::array<double, 2 * radius + 1> k{};
  double ksum = 0;
  for (int i = -radius; i <= radius; ++i) ksum += k[i + radius] = std::exp(-0.5 * i * i);
  for (auto& v : k) v /= ksum;

  std::vector<double> tmp(gray.size()), blur(gray.size());
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double s = 0;
      for (int i = -radius; i <= radius; ++i) s += k[i + radius] * gray[r * w + clampi(c + i, w)];
      tmp[r * w + c] = s;
    }
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double s = 0;
      for (int i = -radius; i <= radius; ++i) s += k[i + radius] * tmp[clampi(r + i, h) * w + c];
      blur[r * w + c] = s;
    }

  std::vector<double> mag(gray.size());
  std::vector<std::uint8_t> dir(gray.size());
  auto B = [&](int c, int r) { return blur[clampi(r, h) * w + clampi(c, w)]; };
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const double gx = (B(c + 1, r - 1) + 2 * B(c + 1, r) + B(c + 1, r + 1)) - (B(c - 1, r - 1) + 2 * B(c - 1, r) + B(c - 1, r + 1));
      const double gy = (B(c - 1, r + 1) + 2 * B(c, r + 1) + B(c + 1, r + 1)) - (B(c - 1, r - 1) + 2 * B(c, r - 1) + B(c + 1, r - 1));
      mag[r * w + c] = std::hypot(gx, gy);
      double ang = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
      if (ang < 0) ang += 180.0;
      std::uint8_t d;
      if (ang < 22.5 || ang >= 157.5)
        d = 0;
      else if (ang < 67.5)
        d = 1;
      else if (ang < 112.5)
        d = 2;
      else
        d = 3;
      dir[r * w + c] = d;
    }

  // Non-maximum suppression; ties resolve towards the positive side so a
  // symmetric ridge keeps exactly one pixel.
  constexpr int dc[4] = {1, 1, 0, -1};
  constexpr int dr[4] = {0, 1, 1, 1};
  std::vector<double> nms(gray.size(), 0.0);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const double m = mag[r * w + c];
      if (m <= 0) continue;
      const int d = dir[r * w + c];
      auto M = [&](int cc, int rr) { return (cc < 0 || rr < 0 || cc >= w || rr >= h) ? 0.0 : mag[rr * w + cc]; };
      const double ahead = M(c + dc[d], r + dr[d]);
      const double behind = M(c - dc[d], r - dr[d]);
      if (m >= behind && m > ahead) nms[r * w + c] = m;
    }

  EdgeMap out{BinaryMask(w, h), std::vector<std::uint8_t>(gray.size(), 0)};
  std::deque<int> queue;
  for (int i = 0; i < w * h; ++i)
    if (nms[i] >= high && nms[i] > 0) {
      out.edges.bits[i] = 1;
      queue.push_back(i);
    }
  while (!queue.empty()) {
    const int i = queue.front();
    queue.pop_front();
    const int c = i % w, r = i / w;
    for (int y = r - 1; y <= r + 1; ++y)
      for (int x = c - 1; x <= c + 1; ++x) {
        if (x < 0 || y < 0 || x >= w || y >= h) continue;
        const int j = y * w + x;
        if (!out.edges.bits[j] && nms[j] >= low && nms[j] > 0) {
          out.edges.bits[j] = 1;
          queue.push_back(j);
        }
      }
  }
  for (int i = 0; i < w * h; ++i)
    if (out.edges.bits[i]) out.orientation[i] = dir[i];
  return out;
}

inline EdgeMap canny(const RgbImage& img, double low = 50.0, double high = 150.0) {
  return canny(to_gray(img), img.width, img.height, low, high);
}

inline BinaryMask canny_edges(const RgbImage& img, double low = 50.0, double high = 150.0) {
  return canny(img, low, high).edges;
}

/// Right-angle corners found by angle labeling: each 8-connected cluster of
/// diagonally oriented edge pixels is one corner.
inline int count_right_angle_corners(const EdgeMap& em) {
  const int w = em.edges.width, h = em.edges.height;
  std::vector<std::uint8_t> seen(em.orientation.size(), 0);
  auto diagonal = [&](int i) { return em.edges.bits[i] && (em.orientation[i] == 1 || em.orientation[i] == 3); };
  int clusters = 0;
  std::vector<int> stack;
  for (int i = 0; i < w * h; ++i) {
    if (!diagonal(i) || seen[i]) continue;
    ++clusters;
    seen[i] = 1;
    stack.push_back(i);
    while (!stack.empty()) {
      const int j = stack.back();
      stack.pop_back();
      const int c = j % w, r = j / w;
      for (int y = r - 1; y <= r + 1; ++y)
        for (int x = c - 1; x <= c + 1; ++x) {
          if (x < 0 || y < 0 || x >= w || y >= h) continue;
          const int k = y * w + x;
          if (!seen[k] && diagonal(k)) {
            seen[k] = 1;
            stack.push_back(k);
          }
        }
    }
  }
  return clusters;
}

// ---------------------------------------------------------------------------
// Mask extraction

struct ClassMasks {
  BinaryMask cell;
  BinaryMask macro;
  BinaryMask whitespace;
  std::size_t unmatched = 0;  // pixels that fall in no band (Outside, foreign colors)
};

/// HSV bands matched to the rendering palette.
inline ClassMasks extract_masks(const HsvImage& hsv) {
  ClassMasks m{BinaryMask(hsv.width, hsv.height), BinaryMask(hsv.width, hsv.height), BinaryMask(hsv.width, hsv.height), 0};
  for (std::size_t i = 0; i < hsv.px.size(); ++i) {
    const Hsv& p = hsv.px[i];
    if (p.s > 0.5 && (p.h >= 350.0 || p.h <= 10.0))
      m.macro.bits[i] = 1;
    else if (p.s > 0.5 && p.h >= 220.0 && p.h <= 260.0)
      m.cell.bits[i] = 1;
    else if (p.s < 0.1 && p.v > 0.9)
      m.whitespace.bits[i] = 1;
    else
      ++m.unmatched;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Morphology

/// Binary structuring element; cell (0, 0) is the anchor.
struct Kernel {
  int width = 2;
  int height = 2;
  std::vector<std::uint8_t> bits{1, 1, 1, 1};

  static Kernel box(int w, int h) {
    return {w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h, 1)};
  }
  bool at(int c, int r) const { return bits[static_cast<std::size_t>(r) * width + c] != 0; }
};

/// Mirror index into [0, n) without repeating the edge sample
/// (... 2 1 | 0 1 2 ... n-1 | n-2 ...).
inline int reflect101(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

/// Morphological dilation by the union of kernel translates: every true
/// pixel p sets p + (dc, dr) for each set kernel cell (dc, dr), with the
/// kernel anchored at its top-left cell. Reads past the image border are
/// mirrored (reflect-101). Repeated `iterations` times; 0 is the identity.
inline BinaryMask dilate(const BinaryMask& mask, const Kernel& kernel, int iterations) {
  if (kernel.width < 1 || kernel.height < 1) throw Error("dilate: kernel must be at least 1x1");
  if (iterations < 0) throw Error("dilate: iterations must be non-negative");
  BinaryMask cur = mask;
  if (mask.width == 0 || mask.height == 0) return cur;
  const int w = mask.width, h = mask.height;
  std::vector<int> colmap(static_cast<std::size_t>(w));
  for (int it = 0; it < iterations; ++it) {
    BinaryMask next(w, h);
    for (int kr = 0; kr < kernel.height; ++kr)
      for (int kc = 0; kc < kernel.width; ++kc) {
        if (!kernel.at(kc, kr)) continue;
        for (int c = 0; c < w; ++c) colmap[c] = reflect101(c - kc, w);
        for (int r = 0; r < h; ++r) {
          const std::uint8_t* src = &cur.bits[static_cast<std::size_t>(reflect101(r - kr, h)) * w];
          std::uint8_t* dst = &next.bits[static_cast<std::size_t>(r) * w];
          for (int c = 0; c < w; ++c) dst[c] |= src[colmap[c]];
        }
      }
    cur = std::move(next);
  }
  return cur;
}

inline BinaryMask dilate(const BinaryMask& mask, int kw, int kh, int iterations) {
  return dilate(mask, Kernel::box(kw, kh), iterations);
}

/// Pixelwise `whitespace AND NOT cell_dilated`.
inline BinaryMask subtract_dilated_cells(const BinaryMask& whitespace, const BinaryMask& cell_dilated) {
  if (!whitespace.same_shape(cell_dilated)) throw Error("subtract_dilated_cells: dimension mismatch");
  BinaryMask out(whitespace.width, whitespace.height);
  for (std::size_t i = 0; i < out.bits.size(); ++i) out.bits[i] = whitespace.bits[i] && !cell_dilated.bits[i];
  return out;
}

// ---------------------------------------------------------------------------
// Connected components

struct Region {
  int id = 0;
  long long area_px = 0;
  PixelRect bbox;
  bool touches_dilated_macro = false;
  bool wasted = false;
};

struct LabeledRegions {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> label;  // 0 = unlabeled, otherwise region id
  std::vector<Region> regions;      // regions[id - 1]

  std::int32_t at(int c, int r) const { return label[static_cast<std::size_t>(r) * width + c]; }
};

/// 4-connected labeling. Ids start at 1 and follow the raster order of
/// each region's first pixel.
inline LabeledRegions connected_components(const BinaryMask& mask) {
  const int w = mask.width, h = mask.height;
  LabeledRegions out{w, h, std::vector<std::int32_t>(mask.bits.size(), 0), {}};
  std::vector<int> queue;
  queue.reserve(mask.bits.size());
  for (int start = 0; start < w * h; ++start) {
    if (!mask.bits[start] || out.label[start]) continue;
    Region reg;
    reg.id = static_cast<int>(out.regions.size()) + 1;
    reg.bbox = {start % w, start / w, start % w + 1, start / w + 1};
    queue.clear();
    queue.push_back(start);
    out.label[start] = reg.id;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const int i = queue[head];
      const int c = i % w, r = i / w;
      ++reg.area_px;
      reg.bbox.c0 = std::min(reg.bbox.c0, c);
      reg.bbox.c1 = std::max(reg.bbox.c1, c + 1);
      reg.bbox.r1 = std::max(reg.bbox.r1, r + 1);
      auto visit = [&](int j) {
        if (mask.bits[j] && !out.label[j]) {
          out.label[j] = reg.id;
          queue.push_back(j);
        }
      };
      if (c > 0) visit(i - 1);
      if (c + 1 < w) visit(i + 1);
      if (r > 0) visit(i - w);
      if (r + 1 < h) visit(i + w);
    }
    out.regions.push_back(reg);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Wasted-whitespace labeling

struct SegmentationParams {
  long long area_min = 2000;
  long long area_max = 20000;
  Kernel cell_kernel = Kernel::box(2, 2);
  Kernel macro_kernel = Kernel::box(2, 2);
  int cell_iterations = 3;
  int macro_iterations = 3;
  Palette palette;
};

/// Flags regions that overlap the dilated macro mask and whose area lies in
/// [area_min, area_max]. Updates `regions` in place and returns the union
/// of wasted regions.
inline BinaryMask label_wasted(LabeledRegions& regions, const BinaryMask& macro_dilated, long long area_min, long long area_max) {
  if (area_min >= area_max) throw Error("label_wasted: area_min must be below area_max");
  if (regions.width != macro_dilated.width || regions.height != macro_dilated.height)
    throw Error("label_wasted: dimension mismatch");
  for (auto& reg : regions.regions) reg.touches_dilated_macro = reg.wasted = false;
  for (std::size_t i = 0; i < regions.label.size(); ++i)
    if (regions.label[i] && macro_dilated.bits[i]) regions.regions[regions.label[i] - 1].touches_dilated_macro = true;
  for (auto& reg : regions.regions)
    reg.wasted = reg.touches_dilated_macro && reg.area_px >= area_min && reg.area_px <= area_max;
  BinaryMask wasted(regions.width, regions.height);
  for (std::size_t i = 0; i < regions.label.size(); ++i)
    if (regions.label[i] && regions.regions[regions.label[i] - 1].wasted) wasted.bits[i] = 1;
  return wasted;
}

struct ParsedMasks {
  BinaryMask cell;
  BinaryMask macro;
  BinaryMask whitespace;  // after removing dilated cells
  BinaryMask cell_dilated;
  BinaryMask macro_dilated;
  BinaryMask wasted;
  LabeledRegions regions;
  std::size_t unmatched = 0;

  std::size_t wasted_pixels() const { return wasted.count(); }
};

/// Full parsing chain from a rendered image.
inline ParsedMasks parse_image(const RgbImage& img, const SegmentationParams& params = {}) {
  ClassMasks cm = extract_masks(to_hsv(img));
  ParsedMasks pm;
  pm.unmatched = cm.unmatched;
  pm.cell_dilated = dilate(cm.cell, params.cell_kernel, params.cell_iterations);
  pm.whitespace = subtract_dilated_cells(cm.whitespace, pm.cell_dilated);
  pm.macro_dilated = dilate(cm.macro, params.macro_kernel, params.macro_iterations);
  pm.regions = connected_components(pm.whitespace);
  pm.wasted = label_wasted(pm.regions, pm.macro_dilated, params.area_min, params.area_max);
  pm.cell = std::move(cm.cell);
  pm.macro = std::move(cm.macro);
  return pm;
}

/// Renders the grid with the palette and runs the parsing chain on it.
inline ParsedMasks parse(const PixelGrid& grid, const SegmentationParams& params = {}) {
  return parse_image(render_rgb(grid, params.palette), params);
}

}  // namespace wisp
