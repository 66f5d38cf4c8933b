#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "segmentation.hpp"

namespace wisp {

/// Axis-aligned Gaussian describing one macro's influence, in pixel
/// coordinates (pixel centers on integers).
struct MacroGaussian {
  double cx = 0.0;
  double cy = 0.0;
  double sx = 1.0;
  double sy = 1.0;
};

struct ScoreParams {
  double gamma = 0.8;        // extra weight on wasted-whitespace pixels
  double sigma_scale = 0.5;  // sigma = max(1, sigma_scale * macro size in px)
};

inline double gaussian_density(double x, double y, const MacroGaussian& g) {
  const double u = (x - g.cx) / g.sx;
  const double v = (y - g.cy) / g.sy;
  return std::exp(-0.5 * (u * u + v * v)) / (2.0 * std::numbers::pi * g.sx * g.sy);
}

/// Mixture weights at (x, y): each macro's weight is its center distance
/// over the sum of all center distances. When the point coincides with
/// every center the weights are uniform.
inline std::vector<double> mixture_weights(double x, double y, std::span<const MacroGaussian> macros) {
  if (macros.empty()) throw Error("mixture weights need at least one macro");
  std::vector<double> a(macros.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < macros.size(); ++k) sum += a[k] = std::hypot(x - macros[k].cx, y - macros[k].cy);
  for (auto& v : a) v = sum > 0 ? v / sum : 1.0 / static_cast<double>(macros.size());
  return a;
}

inline double mixture_value(double x, double y, std::span<const MacroGaussian> macros) {
  const auto a = mixture_weights(x, y, macros);
  double s = 0.0;
  for (std::size_t k = 0; k < macros.size(); ++k) s += a[k] * gaussian_density(x, y, macros[k]);
  return s;
}

inline double score_pixel(double x, double y, std::span<const MacroGaussian> macros, bool wasted, double gamma) {
  const double base = mixture_value(x, y, macros);
  return wasted ? (1.0 + gamma) * base : base;
}

inline std::vector<MacroGaussian> macro_gaussians(const PixelGrid& grid, const Floorplan& fp, std::span<const Point> origins,
                                                  double sigma_scale) {
  std::vector<MacroGaussian> gs;
  gs.reserve(fp.macros.size());
  for (std::size_t k = 0; k < fp.macros.size(); ++k) {
    const auto& m = fp.macros[k];
    const Point o = k < origins.size() ? origins[k] : m.origin;
    MacroGaussian g;
    g.cx = grid.col_coord(o.x + 0.5 * m.w);
    g.cy = grid.row_coord(o.y + 0.5 * m.h);
    g.sx = std::max(1.0, sigma_scale * m.w / grid.scale);
    g.sy = std::max(1.0, sigma_scale * m.h / grid.scale);
    gs.push_back(g);
  }
  return gs;
}

/// Per-pixel whitespace score over the in-outline, non-macro domain.
struct ScoreMap {
  int width = 0;
  int height = 0;
  double gamma = 0.8;
  std::vector<double> values;
  std::vector<std::uint8_t> domain;
  std::size_t domain_count = 0;

  double at(int c, int r) const { return values[static_cast<std::size_t>(r) * width + c]; }
  bool in_domain(int c, int r) const { return domain[static_cast<std::size_t>(r) * width + c] != 0; }
};

/// Evaluates the macro mixture on every domain pixel; wasted pixels are
/// scaled by (1 + gamma). Values outside the domain are exactly zero.
inline ScoreMap build_score_map(const PixelGrid& grid, const BinaryMask& wasted, std::span<const MacroGaussian> macros,
                                double gamma) {
  if (macros.empty()) throw Error("scoring undefined without macros");
  if (wasted.width != grid.width || wasted.height != grid.height) throw Error("score map: wasted mask dimension mismatch");
  const int w = grid.width, h = grid.height;
  const std::size_t K = macros.size();
  ScoreMap sm;
  sm.width = w;
  sm.height = h;
  sm.gamma = gamma;
  sm.values.assign(grid.pixel_count(), 0.0);
  sm.domain.assign(grid.pixel_count(), 0);

  // The Gaussians are separable: tabulate each axis once per macro.
  std::vector<double> gx(K * w), gy(K * h), norm(K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto& g = macros[k];
    norm[k] = 1.0 / (2.0 * std::numbers::pi * g.sx * g.sy);
    for (int c = 0; c < w; ++c) {
      const double u = (c - g.cx) / g.sx;
      gx[k * w + c] = std::exp(-0.5 * u * u);
    }
    for (int r = 0; r < h; ++r) {
      const double v = (r - g.cy) / g.sy;
      gy[k * h + r] = std::exp(-0.5 * v * v);
    }
  }

  std::vector<double> num(w), den(w), dens(w);
  for (int r = 0; r < h; ++r) {
    const std::size_t row = static_cast<std::size_t>(r) * w;
    bool any = false;
    for (int c = 0; c < w; ++c) {
      const PixelClass cls = grid.classes[row + c];
      const bool d = cls != PixelClass::Outside && cls != PixelClass::Macro;
      sm.domain[row + c] = d;
      any |= d;
    }
    if (!any) continue;
    std::fill(num.begin(), num.end(), 0.0);
    std::fill(den.begin(), den.end(), 0.0);
    std::fill(dens.begin(), dens.end(), 0.0);
    for (std::size_t k = 0; k < K; ++k) {
      const double dy = r - macros[k].cy;
      const double dy2 = dy * dy;
      const double cx = macros[k].cx;
      const double ny = norm[k] * gy[k * h + r];
      const double* gxk = &gx[k * w];
      for (int c = 0; c < w; ++c) {
        const double dx = c - cx;
        const double dist = std::sqrt(dx * dx + dy2);
        const double n = ny * gxk[c];
        num[c] += dist * n;
        den[c] += dist;
        dens[c] += n;
      }
    }
    for (int c = 0; c < w; ++c) {
      if (!sm.domain[row + c]) continue;
      const double base = den[c] > 0 ? num[c] / den[c] : dens[c] / static_cast<double>(K);
      sm.values[row + c] = wasted.bits[row + c] ? (1.0 + gamma) * base : base;
      ++sm.domain_count;
    }
  }
  return sm;
}

/// Mean score over the domain; the scalar whitespace score of a layout.
inline double total_score(const ScoreMap& sm) {
  if (sm.domain_count == 0) throw Error("total score: empty domain");
  double s = 0.0;
  for (std::size_t i = 0; i < sm.values.size(); ++i)
    if (sm.domain[i]) s += sm.values[i];
  return s / static_cast<double>(sm.domain_count);
}

}  // namespace wisp
