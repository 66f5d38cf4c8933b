#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "scoring.hpp"

namespace wisp {

/// Edge-attached rectangle of low-score whitespace that can be cut away.
struct Strip {
  std::size_t edge = 0;  // outline edge index (vertex i -> i+1)
  int depth_px = 0;
  PixelRect px;  // covered pixels
  Rect rect_um;
};

struct RecycleParams {
  double tau_percentile = 25.0;
  int min_depth_px = 5;
};

/// Score value at the given percentile of the domain (nearest rank).
inline double score_percentile(const ScoreMap& sm, double percentile) {
  std::vector<double> v;
  v.reserve(sm.domain_count);
  for (std::size_t i = 0; i < sm.values.size(); ++i)
    if (sm.domain[i]) v.push_back(sm.values[i]);
  if (v.empty()) throw Error("score percentile: empty domain");
  std::sort(v.begin(), v.end());
  const double p = std::clamp(percentile, 0.0, 100.0);
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(v.size())));
  return v[rank == 0 ? 0 : std::min(rank, v.size()) - 1];
}

/// Grows an inward strip from every outline edge, one pixel line at a time,
/// while each pixel of the next line is whitespace, scores strictly below
/// the tau-th percentile and is not wasted. Strips of at least
/// `min_depth_px` are returned in edge order.
inline std::vector<Strip> reclaim_candidates(const PixelGrid& grid, const ScoreMap& sm, const ParsedMasks& parsed,
                                             const RectilinearOutline& outline, const RecycleParams& params = {}) {
  const double threshold = score_percentile(sm, params.tau_percentile);
  auto reclaimable = [&](int c, int r) {
    if (c < 0 || r < 0 || c >= grid.width || r >= grid.height) return false;
    const std::size_t i = grid.index(c, r);
    return grid.classes[i] == PixelClass::Whitespace && sm.domain[i] && sm.values[i] < threshold && !parsed.wasted.bits[i];
  };

  std::vector<Strip> out;
  const double s = grid.scale;
  for (std::size_t e = 0; e < outline.size(); ++e) {
    auto [a, b] = outline.edge(e);
    const bool horizontal = a.y == b.y;
    // Counter-clockwise outline: the interior lies to the left of a -> b.
    int start = 0, step = 0;
    PixelSpan span;
    if (horizontal) {
      span = grid.cols_for(std::min(a.x, b.x), std::max(a.x, b.x));
      const int first_below = grid.rows_for(a.y - 1.0, a.y).lo;
      if (b.x > a.x) {  // bottom edge, interior above
        start = first_below - 1;
        step = -1;
      } else {
        start = first_below;
        step = 1;
      }
    } else {
      span = grid.rows_for(std::min(a.y, b.y), std::max(a.y, b.y));
      const int first_right = grid.cols_for(a.x, a.x + 1.0).lo;
      if (b.y > a.y) {  // right edge, interior to the left
        start = first_right - 1;
        step = -1;
      } else {
        start = first_right;
        step = 1;
      }
    }
    span.lo = std::max(span.lo, 0);
    span.hi = std::min(span.hi, horizontal ? grid.width : grid.height);
    if (span.empty()) continue;

    int depth = 0;
    for (;; ++depth) {
      const int line = start + step * depth;
      bool ok = true;
      for (int t = span.lo; t < span.hi && ok; ++t) ok = horizontal ? reclaimable(t, line) : reclaimable(line, t);
      if (!ok) break;
    }
    if (depth < params.min_depth_px) continue;

    Strip st;
    st.edge = e;
    st.depth_px = depth;
    const int l0 = start, l1 = start + step * (depth - 1);
    const double d_um = depth * s;
    if (horizontal) {
      st.px = {span.lo, std::min(l0, l1), span.hi, std::max(l0, l1) + 1};
      const double xl = std::min(a.x, b.x), xh = std::max(a.x, b.x);
      st.rect_um = step < 0 ? Rect{xl, a.y, xh - xl, d_um} : Rect{xl, a.y - d_um, xh - xl, d_um};
    } else {
      st.px = {std::min(l0, l1), span.lo, std::max(l0, l1) + 1, span.hi};
      const double yl = std::min(a.y, b.y), yh = std::max(a.y, b.y);
      st.rect_um = step < 0 ? Rect{a.x - d_um, yl, d_um, yh - yl} : Rect{a.x, yl, d_um, yh - yl};
    }
    out.push_back(st);
  }
  return out;
}

struct ReclaimPlan {
  std::vector<Strip> strips;
  RectilinearOutline new_outline;
  double old_area_um2 = 0.0;
  double new_area_um2 = 0.0;
  double delta_area_um2 = 0.0;
  double delta_area_fraction = 0.0;
  // Exact areas on the integer database grid (units of dbu^2).
  std::int64_t old_area_dbu2 = 0;
  std::int64_t new_area_dbu2 = 0;
  std::int64_t delta_area_dbu2 = 0;
};

inline constexpr double kDbuPerMicron = 1000.0;

namespace detail {

inline std::int64_t to_dbu(double um) { return std::llround(um * kDbuPerMicron); }

struct IPoint {
  std::int64_t x = 0, y = 0;
  auto operator<=>(const IPoint&) const = default;
};

inline std::int64_t twice_area(const std::vector<IPoint>& v) {
  __int128 a = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& p = v[i];
    const auto& q = v[(i + 1) % v.size()];
    a += static_cast<__int128>(p.x) * q.y - static_cast<__int128>(q.x) * p.y;
  }
  return static_cast<std::int64_t>(a);
}

}  // namespace detail

/// Subtracts every strip from the outline (exact, on a 1 nm grid) and
/// checks that the result is one simple rectilinear polygon still holding
/// every macro and cell region.
inline ReclaimPlan trim_outline(const Floorplan& fp, const std::vector<Strip>& strips) {
  using detail::IPoint;
  ReclaimPlan plan;
  plan.strips = strips;

  std::vector<IPoint> old_pts;
  for (const auto& p : fp.outline.vertices()) old_pts.push_back({detail::to_dbu(p.x), detail::to_dbu(p.y)});
  plan.old_area_dbu2 = detail::twice_area(old_pts) / 2;

  struct IRect {
    std::int64_t x0, y0, x1, y1;
  };
  std::vector<IRect> cuts;
  std::vector<std::int64_t> xs, ys;
  for (const auto& p : old_pts) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  for (const auto& st : strips) {
    IRect r{detail::to_dbu(st.rect_um.xl()), detail::to_dbu(st.rect_um.yl()), detail::to_dbu(st.rect_um.xh()),
            detail::to_dbu(st.rect_um.yh())};
    cuts.push_back(r);
    xs.insert(xs.end(), {r.x0, r.x1});
    ys.insert(ys.end(), {r.y0, r.y1});
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  // Compressed cell grid over all coordinates; a cell is kept when its
  // center is inside the old outline and outside every cut.
  const std::size_t nx = xs.size() - 1, ny = ys.size() - 1;
  std::vector<std::uint8_t> keep(nx * ny, 0);
  std::vector<Point> dbu_outline;
  for (const auto& p : old_pts) dbu_outline.push_back({static_cast<double>(p.x), static_cast<double>(p.y)});
  const RectilinearOutline scaled(dbu_outline);
  auto K = [&](std::size_t i, std::size_t j) -> std::uint8_t& { return keep[j * nx + i]; };
  std::size_t kept = 0;
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const double cx = 0.5 * (static_cast<double>(xs[i]) + static_cast<double>(xs[i + 1]));
      const double cy = 0.5 * (static_cast<double>(ys[j]) + static_cast<double>(ys[j + 1]));
      if (!scaled.contains(Point{cx, cy})) continue;
      bool cut = false;
      for (const auto& r : cuts)
        if (cx > r.x0 && cx < r.x1 && cy > r.y0 && cy < r.y1) cut = true;
      if (!cut) {
        K(i, j) = 1;
        ++kept;
      }
    }
  if (kept == 0) throw Error("trim would remove the entire outline");

  {  // connectivity across shared cell sides
    std::vector<std::uint8_t> seen(keep.size(), 0);
    std::vector<std::size_t> stack;
    for (std::size_t k = 0; k < keep.size(); ++k)
      if (keep[k]) {
        stack.push_back(k);
        seen[k] = 1;
        break;
      }
    std::size_t reached = 0;
    while (!stack.empty()) {
      const std::size_t k = stack.back();
      stack.pop_back();
      ++reached;
      const std::size_t i = k % nx, j = k / nx;
      auto push = [&](std::size_t ii, std::size_t jj) {
        const std::size_t q = jj * nx + ii;
        if (keep[q] && !seen[q]) {
          seen[q] = 1;
          stack.push_back(q);
        }
      };
      if (i > 0) push(i - 1, j);
      if (i + 1 < nx) push(i + 1, j);
      if (j > 0) push(i, j - 1);
      if (j + 1 < ny) push(i, j + 1);
    }
    if (reached != kept) throw Error("trim would disconnect the outline");
  }

  // Directed boundary edges (counter-clockwise around kept cells).
  auto kept_at = [&](long i, long j) {
    return i >= 0 && j >= 0 && i < static_cast<long>(nx) && j < static_cast<long>(ny) && K(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  };
  std::multimap<IPoint, IPoint> next;
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      if (!K(i, j)) continue;
      const long li = static_cast<long>(i), lj = static_cast<long>(j);
      const IPoint p00{xs[i], ys[j]}, p10{xs[i + 1], ys[j]}, p11{xs[i + 1], ys[j + 1]}, p01{xs[i], ys[j + 1]};
      if (!kept_at(li, lj - 1)) next.emplace(p00, p10);
      if (!kept_at(li + 1, lj)) next.emplace(p10, p11);
      if (!kept_at(li, lj + 1)) next.emplace(p11, p01);
      if (!kept_at(li - 1, lj)) next.emplace(p01, p00);
    }
  for (auto it = next.begin(); it != next.end(); ++it)
    if (next.count(it->first) != 1) throw Error("trim would leave a pinched (non-simple) outline");

  std::vector<IPoint> loop;
  const std::size_t total_edges = next.size();
  IPoint cur = next.begin()->first;
  const IPoint first = cur;
  do {
    loop.push_back(cur);
    cur = next.find(cur)->second;
  } while (!(cur == first) && loop.size() <= total_edges);
  if (loop.size() != total_edges) throw Error("trim would create a hole in the outline");

  // Drop collinear vertices.
  std::vector<IPoint> simple;
  for (std::size_t k = 0; k < loop.size(); ++k) {
    const IPoint& p = loop[(k + loop.size() - 1) % loop.size()];
    const IPoint& q = loop[k];
    const IPoint& r = loop[(k + 1) % loop.size()];
    const bool collinear = (p.x == q.x && q.x == r.x) || (p.y == q.y && q.y == r.y);
    if (!collinear) simple.push_back(q);
  }
  plan.new_area_dbu2 = detail::twice_area(simple) / 2;
  plan.delta_area_dbu2 = plan.old_area_dbu2 - plan.new_area_dbu2;

  std::vector<Point> um;
  for (const auto& p : simple) um.push_back({static_cast<double>(p.x) / kDbuPerMicron, static_cast<double>(p.y) / kDbuPerMicron});
  plan.new_outline = RectilinearOutline(std::move(um));

  std::vector<std::string> violations;
  for (const auto& m : fp.macros)
    if (!plan.new_outline.contains(m.rect())) violations.push_back("macro '" + m.name + "' orphaned");
  for (std::size_t i = 0; i < fp.cells.size(); ++i)
    if (!plan.new_outline.contains(fp.cells[i].rect)) violations.push_back("cell region " + std::to_string(i) + " orphaned");
  if (!violations.empty()) {
    std::string msg = "trim rejected:";
    for (const auto& v : violations) msg += " " + v + ";";
    throw Error(msg);
  }

  const double d2 = kDbuPerMicron * kDbuPerMicron;
  plan.old_area_um2 = static_cast<double>(plan.old_area_dbu2) / d2;
  plan.new_area_um2 = static_cast<double>(plan.new_area_dbu2) / d2;
  plan.delta_area_um2 = static_cast<double>(plan.delta_area_dbu2) / d2;
  plan.delta_area_fraction = plan.old_area_dbu2 > 0 ? static_cast<double>(plan.delta_area_dbu2) / static_cast<double>(plan.old_area_dbu2) : 0.0;
  return plan;
}

inline Floorplan apply_reclaim(const Floorplan& fp, const ReclaimPlan& plan) {
  Floorplan out = fp;
  out.outline = plan.new_outline;
  return out;
}

}  // namespace wisp
