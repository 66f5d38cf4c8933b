#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "wisp/wisp.hpp"

using namespace wisp;

namespace {

struct Scene {
  Floorplan fp;
  PixelGrid grid;
  ParsedMasks parsed;
  ScoreMap map;
};

Scene analyze(const Floorplan& fp, int max_side) {
  Scene s{fp, rasterize(fp, max_side), {}, {}};
  s.parsed = parse(s.grid);
  s.map = build_score_map(s.grid, s.parsed.wasted, macro_gaussians(s.grid, fp, fp.origins(), 0.5), 0.8);
  return s;
}

// Macro along the bottom, cells in the middle, an empty band on top.
std::string top_band_design(const char* extra_cell = "") {
  return std::string(R"({"outline": [[0,0],[100,0],[100,100],[0,100]],
    "macros": [{"name":"m","x":0,"y":0,"w":100,"h":20}],
    "cells": [{"x":0,"y":20,"w":100,"h":60,"util":0.9})") +
         extra_cell + "]}";
}

// Rows counted from the top that are entirely reclaimable, by direct scan.
int top_rows_oracle(const Scene& s, double tau) {
  std::vector<double> v;
  for (int r = 0; r < s.grid.height; ++r)
    for (int c = 0; c < s.grid.width; ++c)
      if (s.map.in_domain(c, r)) v.push_back(s.map.at(c, r));
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(std::ceil(tau / 100.0 * v.size()));
  const double thr = v[std::max<std::size_t>(rank, 1) - 1];
  int rows = 0;
  for (int r = 0; r < s.grid.height; ++r) {
    for (int c = 0; c < s.grid.width; ++c)
      if (s.grid.cls(c, r) != PixelClass::Whitespace || !(s.map.at(c, r) < thr) || s.parsed.wasted.at(c, r)) return rows;
    ++rows;
  }
  return rows;
}

Strip strip_um(std::size_t edge, Rect r) {
  Strip s;
  s.edge = edge;
  s.rect_um = r;
  return s;
}

std::string error_of(const Floorplan& fp, const std::vector<Strip>& strips) {
  try {
    trim_outline(fp, strips);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Percentile, NearestRank) {
  ScoreMap sm;
  sm.width = 5;
  sm.height = 1;
  sm.values = {5, 1, 4, 2, 3};
  sm.domain = {1, 1, 1, 1, 1};
  sm.domain_count = 5;
  EXPECT_EQ(score_percentile(sm, 0), 1);
  EXPECT_EQ(score_percentile(sm, 20), 1);
  EXPECT_EQ(score_percentile(sm, 21), 2);
  EXPECT_EQ(score_percentile(sm, 50), 3);
  EXPECT_EQ(score_percentile(sm, 100), 5);
}

TEST(Reclaim, FlushMacrosGiveEmptyPlan) {
  const auto fp = parse_floorplan(R"({"outline": [[0,0],[100,0],[100,100],[0,100]],
    "macros": [{"name":"b","x":0,"y":0,"w":100,"h":10},{"name":"t","x":0,"y":90,"w":100,"h":10},
               {"name":"l","x":0,"y":10,"w":10,"h":80},{"name":"r","x":90,"y":10,"w":10,"h":80}]})");
  const auto s = analyze(fp, 100);
  EXPECT_TRUE(reclaim_candidates(s.grid, s.map, s.parsed, fp.outline).empty());
  const auto plan = trim_outline(fp, {});
  EXPECT_EQ(plan.delta_area_dbu2, 0);
  EXPECT_EQ(plan.new_outline.vertices(), fp.outline.vertices());
}

TEST(Reclaim, TopBandDepth) {
  const auto s = analyze(parse_floorplan(top_band_design()), 100);
  RecycleParams rp;
  rp.tau_percentile = 40;
  const auto strips = reclaim_candidates(s.grid, s.map, s.parsed, s.fp.outline, rp);
  ASSERT_EQ(strips.size(), 1u);
  const auto& st = strips[0];
  const auto [a, b] = s.fp.outline.edge(st.edge);
  EXPECT_EQ(a.y, 100);
  EXPECT_EQ(b.y, 100);
  EXPECT_EQ(st.depth_px, top_rows_oracle(s, 40));
  EXPECT_NEAR(st.depth_px, 0.2 * s.grid.height, 1);
  EXPECT_EQ(st.px.c0, 0);
  EXPECT_EQ(st.px.c1, 100);
  EXPECT_DOUBLE_EQ(st.rect_um.yh(), 100);
  EXPECT_DOUBLE_EQ(st.rect_um.h, st.depth_px * s.grid.scale);

  const auto plan = trim_outline(s.fp, strips);
  EXPECT_DOUBLE_EQ(plan.new_area_um2, 100.0 * (100 - st.depth_px));
  EXPECT_EQ(plan.old_area_dbu2, plan.new_area_dbu2 + plan.delta_area_dbu2);
}

TEST(Reclaim, CellPixelStopsStrip) {
  const auto s = analyze(parse_floorplan(top_band_design(R"(,{"x":50,"y":90,"w":1,"h":1,"util":1})")), 100);
  RecycleParams rp;
  rp.tau_percentile = 40;
  const auto strips = reclaim_candidates(s.grid, s.map, s.parsed, s.fp.outline, rp);
  ASSERT_EQ(strips.size(), 1u);
  EXPECT_EQ(strips[0].depth_px, 9);
  EXPECT_EQ(strips[0].depth_px, top_rows_oracle(s, 40));
}

TEST(Reclaim, MinimumDepth) {
  const auto s = analyze(parse_floorplan(top_band_design(R"(,{"x":50,"y":96,"w":1,"h":1,"util":1})")), 100);
  RecycleParams rp;
  rp.tau_percentile = 40;
  EXPECT_TRUE(reclaim_candidates(s.grid, s.map, s.parsed, s.fp.outline, rp).empty());
  rp.min_depth_px = 3;
  ASSERT_EQ(reclaim_candidates(s.grid, s.map, s.parsed, s.fp.outline, rp).size(), 1u);
}

TEST(Trim, SquareTopStrip) {
  const auto fp = parse_floorplan(R"({"outline": [[0,0],[100,0],[100,100],[0,100]]})");
  const auto plan = trim_outline(fp, {strip_um(2, {0, 80, 100, 20})});
  EXPECT_DOUBLE_EQ(plan.new_area_um2, 8000.0);
  EXPECT_DOUBLE_EQ(plan.delta_area_fraction, 0.2);
  EXPECT_EQ(plan.delta_area_dbu2, 2000LL * 1000 * 1000);
  EXPECT_EQ(plan.new_outline.size(), 4u);
  EXPECT_DOUBLE_EQ(plan.new_outline.bbox().yh(), 80.0);
}

TEST(Trim, OrphanedMacro) {
  const auto fp = parse_floorplan(R"({"outline": [[0,0],[100,0],[100,100],[0,100]],
    "macros": [{"name":"X","x":10,"y":85,"w":10,"h":10}]})");
  const auto msg = error_of(fp, {strip_um(2, {0, 80, 100, 20})});
  EXPECT_NE(msg.find("macro 'X' orphaned"), std::string::npos) << msg;
}

TEST(Trim, OrphanedCell) {
  const auto fp = parse_floorplan(R"({"outline": [[0,0],[100,0],[100,100],[0,100]],
    "cells": [{"x":0,"y":70,"w":30,"h":30}]})");
  EXPECT_NE(error_of(fp, {strip_um(2, {0, 80, 100, 20})}).find("cell region 0 orphaned"), std::string::npos);
}

TEST(Trim, TopologyErrors) {
  const auto fp = parse_floorplan(R"({"outline": [[0,0],[100,0],[100,100],[0,100]]})");
  EXPECT_NE(error_of(fp, {strip_um(0, {40, 0, 20, 100})}).find("disconnect"), std::string::npos);
  EXPECT_NE(error_of(fp, {strip_um(0, {10, 10, 10, 10})}).find("hole"), std::string::npos);
  EXPECT_NE(error_of(fp, {strip_um(0, {0, 0, 100, 100})}).find("entire"), std::string::npos);
  EXPECT_NE(error_of(fp, {strip_um(0, {0, 0, 50, 50}), strip_um(0, {50, 50, 50, 50})}).find("disconnect"), std::string::npos);
  // Center hole touching a corner notch at one vertex.
  EXPECT_NE(error_of(fp, {strip_um(0, {30, 30, 30, 30}), strip_um(0, {60, 60, 40, 40})}).find("pinched"), std::string::npos);
}

TEST(Trim, OverlappingStripsOnLShape) {
  const auto fp = parse_floorplan(R"({"outline": [[0,0],[100,0],[100,60],[60,60],[60,100],[0,100]]})");
  // Right edge strip and top-of-notch strip overlap in the corner.
  const auto plan = trim_outline(fp, {strip_um(1, {90, 0, 10, 60}), strip_um(2, {60, 50, 40, 10})});
  EXPECT_EQ(plan.delta_area_dbu2, (600LL + 400 - 100) * 1000 * 1000);
  EXPECT_EQ(plan.new_outline.size(), 6u);
  EXPECT_EQ(plan.new_outline.reflex_corners(), 1);
}

TEST(Trim, ExactAreasAndContainment) {
  std::mt19937_64 gen(17);
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const auto fp = gen_fixture(static_cast<FixtureKind>(seed % 3), 3, seed + 200);
    const auto s = analyze(fp, 200);
    RecycleParams rp;
    rp.tau_percentile = 60;
    rp.min_depth_px = 2;
    const auto strips = reclaim_candidates(s.grid, s.map, s.parsed, fp.outline, rp);
    ReclaimPlan plan;
    try {
      plan = trim_outline(fp, strips);
    } catch (const Error&) {
      continue;
    }
    ++checked;
    EXPECT_EQ(plan.old_area_dbu2, plan.new_area_dbu2 + plan.delta_area_dbu2);
    EXPECT_NEAR(signed_area(plan.new_outline.vertices()), plan.new_area_um2, 1e-6);
    double largest = 0;
    for (const auto& st : strips) largest = std::max(largest, st.rect_um.area());
    EXPECT_GE(plan.delta_area_um2 + 1e-9, largest);
    std::uniform_real_distribution<double> ux(fp.outline.bbox().xl(), fp.outline.bbox().xh());
    std::uniform_real_distribution<double> uy(fp.outline.bbox().yl(), fp.outline.bbox().yh());
    for (int t = 0; t < 500; ++t) {
      const Point p{ux(gen), uy(gen)};
      if (oracle::inside(plan.new_outline.vertices(), p)) {
        EXPECT_TRUE(oracle::inside(fp.outline.vertices(), p));
      }
    }
    const auto trimmed = apply_reclaim(fp, plan);
    EXPECT_TRUE(is_legal(trimmed).legal);
    EXPECT_NO_THROW(parse_floorplan(dump_floorplan(trimmed)));
  }
  EXPECT_GT(checked, 0);
}
