#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "image_io.hpp"
#include "recycling.hpp"
#include "refinement.hpp"

namespace wisp {

/// Every knob of every stage, with the library defaults.
struct RunConfig {
  std::string input;
  std::filesystem::path out_dir = "out";
  int max_side = 800;
  Palette palette;
  SegmentationParams segmentation;
  ScoreParams score;
  SaConfig sa;
  RecycleParams recycle;
  bool do_recycle = false;
  double canny_low = 50.0;
  double canny_high = 150.0;

  /// Propagates the shared knobs into the per-stage configs.
  SaConfig sa_config() const {
    SaConfig c = sa;
    c.max_side = max_side;
    c.score = score;
    c.segmentation = segmentation;
    c.segmentation.palette = palette;
    return c;
  }
  SegmentationParams seg_params() const {
    SegmentationParams p = segmentation;
    p.palette = palette;
    return p;
  }
};

inline Floorplan load_floorplan(const std::string& path) {
  if (!std::filesystem::exists(path)) throw Error("input not found: " + path);
  return parse_floorplan(read_file(path));
}

// ---------------------------------------------------------------------------
// Image helpers

inline std::vector<std::uint8_t> mask_to_gray(const BinaryMask& m) {
  std::vector<std::uint8_t> g(m.bits.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = m.bits[i] ? 255 : 0;
  return g;
}

inline RgbImage wasted_overlay(const PixelGrid& grid, const ParsedMasks& pm, const Palette& pal) {
  RgbImage img = render_rgb(grid, pal);
  for (int r = 0; r < grid.height; ++r)
    for (int c = 0; c < grid.width; ++c)
      if (pm.wasted.at(c, r)) img.set(c, r, Rgb{120, 40, 170});
  return img;
}

/// Piecewise-linear dark-to-light ramp; lighter means higher score.
inline Rgb heat_color(double t) {
  static constexpr Rgb stops[] = {{0, 0, 4}, {87, 16, 110}, {188, 55, 84}, {249, 142, 9}, {252, 255, 164}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const int i = std::min(3, static_cast<int>(t));
  const double f = t - i;
  auto lerp = [&](std::uint8_t a, std::uint8_t b) { return static_cast<std::uint8_t>(std::lround(a + (b - a) * f)); };
  return {lerp(stops[i].r, stops[i + 1].r), lerp(stops[i].g, stops[i + 1].g), lerp(stops[i].b, stops[i + 1].b)};
}

inline RgbImage heatmap_image(const PixelGrid& grid, const ScoreMap& sm) {
  double mx = 0.0;
  for (std::size_t i = 0; i < sm.values.size(); ++i)
    if (sm.domain[i]) mx = std::max(mx, sm.values[i]);
  RgbImage img(grid.width, grid.height);
  for (int r = 0; r < grid.height; ++r)
    for (int c = 0; c < grid.width; ++c) {
      const PixelClass cls = grid.cls(c, r);
      if (cls == PixelClass::Outside)
        img.set(c, r, Rgb{80, 80, 80});
      else if (cls == PixelClass::Macro)
        img.set(c, r, Rgb{40, 40, 40});
      else
        img.set(c, r, heat_color(mx > 0 ? sm.at(c, r) / mx : 0.0));
    }
  return img;
}

inline std::string score_csv(const ScoreMap& sm) {
  std::string out;
  out.reserve(sm.values.size() * 12);
  char buf[32];
  for (int r = 0; r < sm.height; ++r) {
    for (int c = 0; c < sm.width; ++c) {
      std::snprintf(buf, sizeof buf, c ? ",%.6g" : "%.6g", sm.at(c, r));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

inline std::string trace_csv(const std::vector<TraceEntry>& trace) {
  std::string out = "iter,cost,wl_norm,score_norm,accepted,macro,direction\n";
  char buf[160];
  for (const auto& t : trace) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%d,", t.iter, t.cost, t.wl_norm, t.score_norm, t.accepted ? 1 : 0);
    out += buf;
    out += t.macro + "," + t.direction + "\n";
  }
  return out;
}

inline nlohmann::ordered_json pixel_rect_json(const PixelRect& r) {
  return {{"c0", r.c0}, {"r0", r.r0}, {"c1", r.c1}, {"r1", r.r1}};
}

inline nlohmann::ordered_json rect_json(const Rect& r) { return {{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}}; }

/// Micron rectangle covered by a pixel rectangle.
inline Rect pixel_rect_um(const PixelGrid& g, const PixelRect& r) {
  return {g.x0 + r.c0 * g.scale, g.y1 - r.r1 * g.scale, (r.c1 - r.c0) * g.scale, (r.r1 - r.r0) * g.scale};
}

// ---------------------------------------------------------------------------
// Stages

struct DiagnoseResult {
  PixelGrid grid;
  ParsedMasks parsed;
  int edge_pixels = 0;
  int corners = 0;
  nlohmann::ordered_json report;
};

inline DiagnoseResult diagnose(const Floorplan& fp, const RunConfig& cfg) {
  DiagnoseResult d;
  d.grid = rasterize(fp, cfg.max_side);
  const RgbImage img = render_rgb(d.grid, cfg.palette);
  d.parsed = parse_image(img, cfg.seg_params());
  if (img.width >= 3 && img.height >= 3) {
    const EdgeMap em = canny(img, cfg.canny_low, cfg.canny_high);
    d.edge_pixels = static_cast<int>(em.edges.count());
    d.corners = count_right_angle_corners(em);
  }
  nlohmann::ordered_json regions = nlohmann::ordered_json::array();
  for (const auto& reg : d.parsed.regions.regions) {
    if (!reg.wasted) continue;
    regions.push_back({{"id", reg.id}, {"area_px", reg.area_px}, {"bbox_px", pixel_rect_json(reg.bbox)},
                       {"bbox_um", rect_json(pixel_rect_um(d.grid, reg.bbox))}});
  }
  d.report = {{"design", fp.name},
              {"canvas", {{"width", d.grid.width}, {"height", d.grid.height}, {"scale_um_per_px", d.grid.scale}}},
              {"area_min", cfg.segmentation.area_min},
              {"area_max", cfg.segmentation.area_max},
              {"wasted_pixels", d.parsed.wasted_pixels()},
              {"edge_pixels", d.edge_pixels},
              {"right_angle_corners", d.corners},
              {"regions", regions}};
  return d;
}

inline void write_diagnose(const DiagnoseResult& d, const RunConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& g = d.grid;
  write_file((dir / "mask_cell.png").string(), encode_png_gray(g.width, g.height, mask_to_gray(d.parsed.cell)));
  write_file((dir / "mask_macro.png").string(), encode_png_gray(g.width, g.height, mask_to_gray(d.parsed.macro)));
  write_file((dir / "mask_whitespace.png").string(), encode_png_gray(g.width, g.height, mask_to_gray(d.parsed.whitespace)));
  write_file((dir / "mask_wasted.png").string(), encode_png_gray(g.width, g.height, mask_to_gray(d.parsed.wasted)));
  write_file((dir / "overlay.png").string(), encode_png(wasted_overlay(g, d.parsed, cfg.palette)));
  write_file((dir / "wasted_regions.json").string(), d.report.dump(2) + "\n");
}

struct ScoreResult {
  PixelGrid grid;
  ParsedMasks parsed;
  ScoreMap map;
  double total = 0.0;
};

inline ScoreResult score(const Floorplan& fp, const RunConfig& cfg) {
  ScoreResult s;
  s.grid = rasterize(fp, cfg.max_side);
  s.parsed = parse(s.grid, cfg.seg_params());
  const auto origins = fp.origins();
  const auto gs = macro_gaussians(s.grid, fp, origins, cfg.score.sigma_scale);
  s.map = build_score_map(s.grid, s.parsed.wasted, gs, cfg.score.gamma);
  s.total = total_score(s.map);
  return s;
}

inline void write_score(const ScoreResult& s, const RunConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file((dir / "heatmap.csv").string(), score_csv(s.map));
  write_file((dir / "heatmap.png").string(), encode_png(heatmap_image(s.grid, s.map)));
  nlohmann::ordered_json j{{"total_score", s.total},
                           {"gamma", cfg.score.gamma},
                           {"sigma_scale", cfg.score.sigma_scale},
                           {"domain_pixels", s.map.domain_count},
                           {"wasted_pixels", s.parsed.wasted_pixels()}};
  write_file((dir / "score.json").string(), j.dump(2) + "\n");
}

inline nlohmann::ordered_json cost_json(const CostBreakdown& c) {
  return {{"wl_norm", c.wl_norm}, {"score_norm", c.score_norm}, {"total", c.total}};
}

inline void write_refine(const Floorplan& fp, const RefinementResult& r, const RunConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file((dir / "refined.json").string(), dump_floorplan(r.refined));
  write_file((dir / "trace.csv").string(), trace_csv(r.trace));
  write_file((dir / "before.png").string(), encode_png(render_rgb(rasterize(fp, cfg.max_side), cfg.palette)));
  write_file((dir / "after.png").string(), encode_png(render_rgb(rasterize(r.refined, cfg.max_side), cfg.palette)));
  nlohmann::ordered_json j{{"initial", cost_json(r.initial)},
                           {"final", cost_json(r.final)},
                           {"hpwl_initial", r.wl_initial},
                           {"hpwl_final", r.wl_final},
                           {"wasted_before", r.wasted_before},
                           {"wasted_after", r.wasted_after},
                           {"t0", r.t0},
                           {"iterations", r.trace.size()}};
  write_file((dir / "refine.json").string(), j.dump(2) + "\n");
}

struct RecycleResult {
  PixelGrid grid;
  ScoreMap map;
  ReclaimPlan plan;
  Floorplan trimmed;
};

inline RecycleResult recycle(const Floorplan& fp, const RunConfig& cfg) {
  RecycleResult out;
  ScoreResult s = score(fp, cfg);
  out.grid = std::move(s.grid);
  out.map = std::move(s.map);
  const auto strips = reclaim_candidates(out.grid, out.map, s.parsed, fp.outline, cfg.recycle);
  out.plan = trim_outline(fp, strips);
  out.trimmed = apply_reclaim(fp, out.plan);
  return out;
}

inline nlohmann::ordered_json plan_json(const ReclaimPlan& p) {
  nlohmann::ordered_json strips = nlohmann::ordered_json::array();
  for (const auto& s : p.strips)
    strips.push_back({{"edge", s.edge}, {"depth_px", s.depth_px}, {"rect_px", pixel_rect_json(s.px)}, {"rect_um", rect_json(s.rect_um)}});
  nlohmann::ordered_json outline = nlohmann::ordered_json::array();
  for (const auto& v : p.new_outline.vertices()) outline.push_back({v.x, v.y});
  return {{"strips", strips},
          {"new_outline", outline},
          {"old_area_um2", p.old_area_um2},
          {"new_area_um2", p.new_area_um2},
          {"delta_area_um2", p.delta_area_um2},
          {"delta_area_fraction", p.delta_area_fraction}};
}

inline void write_recycle(const Floorplan& fp, const RecycleResult& r, const RunConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file((dir / "trimmed.json").string(), dump_floorplan(r.trimmed));
  write_file((dir / "reclaim_plan.json").string(), plan_json(r.plan).dump(2) + "\n");
  // Left: layout with reclaimed strips hatched in red. Right: the layout
  // with the strips removed.
  const RgbImage before = render_rgb(r.grid, cfg.palette);
  const int w = before.width, h = before.height;
  RgbImage pair(2 * w + 8, h, Rgb{255, 255, 255});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      Rgb left = before.at(x, y), right = left;
      for (const auto& s : r.plan.strips)
        if (x >= s.px.c0 && x < s.px.c1 && y >= s.px.r0 && y < s.px.r1) {
          if ((x + y) % 6 < 2) left = Rgb{220, 0, 0};
          right = cfg.palette[PixelClass::Outside];
        }
      pair.set(x, y, left);
      pair.set(x + w + 8, y, right);
    }
  (void)fp;
  write_file((dir / "recycle_overlay.png").string(), encode_png(pair));
}

// ---------------------------------------------------------------------------
// Full flow

struct RunSummary {
  std::string design;
  double cost_initial = 0.0, cost_final = 0.0;
  double hpwl_initial = 0.0, hpwl_final = 0.0;
  std::size_t wasted_before = 0, wasted_after = 0;
  double delta_area_um2 = 0.0, delta_area_fraction = 0.0;
  bool recycled = false;
  double load_s = 0.0, segmentation_s = 0.0, scoring_s = 0.0, sa_s = 0.0, total_s = 0.0;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j{{"design", design},
                             {"cost_initial", cost_initial},
                             {"cost_final", cost_final},
                             {"hpwl_initial", hpwl_initial},
                             {"hpwl_final", hpwl_final},
                             {"wasted_before", wasted_before},
                             {"wasted_after", wasted_after}};
    if (recycled) {
      j["delta_area_um2"] = delta_area_um2;
      j["delta_area_fraction"] = delta_area_fraction;
    }
    j["timing_s"] = {{"load", load_s}, {"segmentation", segmentation_s}, {"scoring", scoring_s}, {"annealing", sa_s}, {"total", total_s}};
    return j;
  }

  std::string table() const {
    std::ostringstream o;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-22s %16s %16s\n", "metric", "initial", "final");
    o << buf;
    std::snprintf(buf, sizeof buf, "%-22s %16.6f %16.6f\n", "cost", cost_initial, cost_final);
    o << buf;
    std::snprintf(buf, sizeof buf, "%-22s %16.3f %16.3f\n", "hpwl (um)", hpwl_initial, hpwl_final);
    o << buf;
    std::snprintf(buf, sizeof buf, "%-22s %16zu %16zu\n", "wasted pixels", wasted_before, wasted_after);
    o << buf;
    if (recycled) {
      std::snprintf(buf, sizeof buf, "%-22s %16.3f %15.2f%%\n", "reclaimed area (um2)", delta_area_um2, 100.0 * delta_area_fraction);
      o << buf;
    }
    const double tot = std::max(total_s, 1e-12);
    o << "timing:\n";
    auto line = [&](const char* name, double v) {
      std::snprintf(buf, sizeof buf, "  %-20s %10.3f s %6.1f%%\n", name, v, 100.0 * v / tot);
      o << buf;
    };
    line("pre-placement load", load_s);
    line("segmentation", segmentation_s);
    line("gmm scoring", scoring_s);
    line("annealing", sa_s);
    return o.str();
  }
};

/// diagnose -> score -> refine -> (optional) recycle, writing every
/// stage's artifacts into `cfg.out_dir`.
inline RunSummary run_pipeline(const RunConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  auto secs = [](Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); };
  const auto t_all = Clock::now();
  RunSummary sum;

  auto t = Clock::now();
  const Floorplan fp = load_floorplan(cfg.input);
  sum.design = fp.name;
  sum.load_s = secs(t);

  t = Clock::now();
  const DiagnoseResult d = diagnose(fp, cfg);
  write_diagnose(d, cfg, cfg.out_dir);
  sum.segmentation_s += secs(t);

  t = Clock::now();
  const ScoreResult s = score(fp, cfg);
  write_score(s, cfg, cfg.out_dir);
  sum.scoring_s += secs(t);

  const RefinementResult r = anneal(fp, cfg.sa_config());
  write_refine(fp, r, cfg, cfg.out_dir);
  sum.segmentation_s += r.timing.segmentation_s;
  sum.scoring_s += r.timing.scoring_s;
  sum.sa_s = std::max(0.0, r.timing.annealing_s - r.timing.segmentation_s - r.timing.scoring_s);
  sum.cost_initial = r.initial.total;
  sum.cost_final = r.final.total;
  sum.hpwl_initial = r.wl_initial;
  sum.hpwl_final = r.wl_final;
  sum.wasted_before = r.wasted_before;
  sum.wasted_after = r.wasted_after;

  if (cfg.do_recycle) {
    const RecycleResult rc = recycle(r.refined, cfg);
    write_recycle(r.refined, rc, cfg, cfg.out_dir);
    sum.recycled = true;
    sum.delta_area_um2 = rc.plan.delta_area_um2;
    sum.delta_area_fraction = rc.plan.delta_area_fraction;
  }
  sum.total_s = secs(t_all);
  return sum;
}

// ---------------------------------------------------------------------------
// (alpha, beta) sweep

struct SweepRow {
  double alpha = 0.0, beta = 0.0;
  double final_cost = 0.0;
  double normalized = 0.0;
  CostBreakdown final;
  std::size_t wasted_before = 0, wasted_after = 0;
};

inline constexpr double kDefaultAlpha = 0.05;
inline constexpr double kDefaultBeta = 0.95;

inline std::vector<std::pair<double, double>> default_sweep_pairs() {
  return {{0.0, 1.0}, {0.05, 0.95}, {0.1, 0.9}, {0.2, 0.8}, {0.3, 0.7}, {0.5, 0.5}, {0.7, 0.3}, {0.9, 0.1}, {1.0, 0.0}};
}

/// Refines once per (alpha, beta) pair with the same seed and normalizes
/// each final cost by the final cost of the default (0.05, 0.95) run.
inline std::vector<SweepRow> sweep(const Floorplan& fp, const RunConfig& cfg, const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.empty()) throw Error("sweep needs at least one (alpha, beta) pair");
  for (const auto& [a, b] : pairs)
    if (std::abs(a + b - 1.0) > 1e-9) throw Error("alpha+beta must equal 1");
  auto is_default = [](double a, double b) { return std::abs(a - kDefaultAlpha) < 1e-12 && std::abs(b - kDefaultBeta) < 1e-12; };

  std::vector<SweepRow> rows;
  std::optional<double> reference;
  auto run_one = [&](double a, double b) {
    SaConfig sc = cfg.sa_config();
    sc.alpha = a;
    sc.beta = b;
    const RefinementResult r = anneal(fp, sc);
    SweepRow row;
    row.alpha = a;
    row.beta = b;
    row.final = r.final;
    row.final_cost = r.final.total;
    row.wasted_before = r.wasted_before;
    row.wasted_after = r.wasted_after;
    return row;
  };
  for (const auto& [a, b] : pairs) {
    rows.push_back(run_one(a, b));
    if (is_default(a, b) && !reference) reference = rows.back().final_cost;
  }
  if (!reference) reference = run_one(kDefaultAlpha, kDefaultBeta).final_cost;
  for (auto& r : rows) r.normalized = r.final_cost / *reference;
  return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "alpha,beta,final_cost,normalized,wl_norm,score_norm,wasted_before,wasted_after\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.6g,%.6g,%.17g,%.17g,%.17g,%.17g,%zu,%zu\n", r.alpha, r.beta, r.final_cost, r.normalized,
                  r.final.wl_norm, r.final.score_norm, r.wasted_before, r.wasted_after);
    out += buf;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic fixtures

enum class FixtureKind { Rect, LShape, ZShape };

inline FixtureKind parse_fixture_kind(const std::string& s) {
  if (s == "rect") return FixtureKind::Rect;
  if (s == "lshape") return FixtureKind::LShape;
  if (s == "zshape") return FixtureKind::ZShape;
  throw Error("unknown fixture kind '" + s + "' (expected rect, lshape or zshape)");
}

/// Random legal floorplan of the requested outline class with integer
/// micron coordinates, `macros` non-overlapping macros, one cell region and
/// a random two-to-four pin netlist.
inline Floorplan gen_fixture(FixtureKind kind, int macros, std::uint64_t seed) {
  if (macros < 0) throw Error("macro count must be non-negative");
  Rng rng(seed);
  auto irand = [&](int lo, int hi) { return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1))); };

  Floorplan fp;
  const int W = irand(800, 1600), H = irand(600, 1200);
  std::vector<Point> v;
  switch (kind) {
    case FixtureKind::Rect:
      fp.name = "rect";
      v = {{0, 0}, {double(W), 0}, {double(W), double(H)}, {0, double(H)}};
      break;
    case FixtureKind::LShape: {
      fp.name = "lshape";
      const int w1 = irand(W * 5 / 10, W * 7 / 10), h1 = irand(H * 5 / 10, H * 7 / 10);
      v = {{0, 0}, {double(W), 0}, {double(W), double(h1)}, {double(w1), double(h1)}, {double(w1), double(H)}, {0, double(H)}};
      break;
    }
    case FixtureKind::ZShape: {
      fp.name = "zshape";
      const int a = irand(W * 2 / 10, W * 3 / 10), w1 = irand(W * 7 / 10, W * 8 / 10);
      const int h0 = irand(H * 2 / 10, H * 3 / 10), h1 = irand(H * 7 / 10, H * 8 / 10);
      v = {{double(a), 0},      {double(W), 0},       {double(W), double(h1)}, {double(w1), double(h1)},
           {double(w1), double(H)}, {0, double(H)}, {0, double(h0)},          {double(a), double(h0)}};
      break;
    }
  }
  fp.name += "_" + std::to_string(macros) + "m_s" + std::to_string(seed);
  fp.outline = RectilinearOutline(v);

  const int base = std::min(W, H);
  const double shrink = macros > 10 ? std::sqrt(10.0 / macros) : 1.0;
  const int lo = std::max(4, static_cast<int>(base * 0.06 * shrink)), hi = std::max(lo + 1, static_cast<int>(base * 0.16 * shrink));
  for (int m = 0; m < macros; ++m) {
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      MacroInstance mi;
      mi.name = "m" + std::to_string(m);
      mi.w = irand(lo, hi);
      mi.h = irand(lo, hi);
      mi.origin = {double(irand(0, W - static_cast<int>(mi.w))), double(irand(0, H - static_cast<int>(mi.h)))};
      if (!fp.outline.contains(mi.rect())) continue;
      bool clash = false;
      for (const auto& o : fp.macros) clash |= o.rect().overlaps(mi.rect());
      if (clash) continue;
      fp.macros.push_back(mi);
      placed = true;
    }
    if (!placed) throw Error("cannot place macros without overlap after 1000 attempts");
  }

  for (int attempt = 0; attempt < 1000; ++attempt) {
    const int cw = irand(W / 10, W * 3 / 10), ch = irand(H / 10, H * 3 / 10);
    const Rect r{double(irand(0, W - cw)), double(irand(0, H - ch)), double(cw), double(ch)};
    if (!fp.outline.contains(r)) continue;
    fp.cells.push_back({r, 0.5 + 0.5 * rng.uniform()});
    break;
  }

  if (macros > 0) {
    const int nets = 2 * macros;
    for (int n = 0; n < nets; ++n) {
      Net net;
      net.name = "n" + std::to_string(n);
      const int pins = irand(2, 4);
      for (int p = 0; p < pins; ++p) {
        if (p == pins - 1 && rng.coin(0.2)) {
          net.pins.emplace_back(FixedPin{{double(irand(0, W)), 0.0}});
        } else {
          const auto& m = fp.macros[rng.below(fp.macros.size())];
          net.pins.emplace_back(MacroPin{m.name, Point{double(irand(0, static_cast<int>(m.w))), double(irand(0, static_cast<int>(m.h)))}});
        }
      }
      fp.nets.push_back(std::move(net));
    }
  }
  return fp;
}

}  // namespace wisp
