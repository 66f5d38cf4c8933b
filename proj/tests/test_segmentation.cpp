#include <gtest/gtest.h>

#include <map>
#include <random>

#include "oracles.hpp"
#include "wisp/wisp.hpp"

using namespace wisp;

namespace {

BinaryMask random_mask(std::mt19937_64& gen, int w, int h, double p) {
  std::bernoulli_distribution b(p);
  BinaryMask m(w, h);
  for (auto& v : m.bits) v = b(gen);
  return m;
}

oracle::Grid kernel_grid(const Kernel& k) {
  oracle::Grid g(k.height, std::vector<int>(k.width));
  for (int r = 0; r < k.height; ++r)
    for (int c = 0; c < k.width; ++c) g[r][c] = k.at(c, r);
  return g;
}

PixelGrid blank_grid(int w, int h, PixelClass fill = PixelClass::Whitespace) {
  PixelGrid g;
  g.width = w;
  g.height = h;
  g.y1 = h;
  g.classes.assign(static_cast<std::size_t>(w) * h, fill);
  g.macro_id.assign(g.classes.size(), -1);
  return g;
}

void fill(PixelGrid& g, int c0, int r0, int c1, int r1, PixelClass k, int id = -1) {
  for (int r = r0; r < r1; ++r)
    for (int c = c0; c < c1; ++c) {
      g.classes[g.index(c, r)] = k;
      g.macro_id[g.index(c, r)] = id;
    }
}

}  // namespace

TEST(Hsv, ClosedForm) {
  const Hsv w = to_hsv(Rgb{255, 255, 255});
  EXPECT_DOUBLE_EQ(w.h, 0.0);
  EXPECT_DOUBLE_EQ(w.s, 0.0);
  EXPECT_DOUBLE_EQ(w.v, 1.0);
  const Hsv red = to_hsv(Rgb{180, 0, 0});
  EXPECT_DOUBLE_EQ(red.h, 0.0);
  EXPECT_DOUBLE_EQ(red.s, 1.0);
  EXPECT_DOUBLE_EQ(red.v, 180.0 / 255.0);
  const Hsv blue = to_hsv(Rgb{0, 0, 180});
  EXPECT_DOUBLE_EQ(blue.h, 240.0);
  EXPECT_DOUBLE_EQ(blue.s, 1.0);
  EXPECT_DOUBLE_EQ(blue.v, 180.0 / 255.0);
  const Hsv green = to_hsv(Rgb{0, 255, 0});
  EXPECT_DOUBLE_EQ(green.h, 120.0);
}

TEST(ExtractMasks, AllWhite) {
  const auto m = extract_masks(to_hsv(RgbImage(8, 5, {255, 255, 255})));
  EXPECT_EQ(m.whitespace.count(), 40u);
  EXPECT_EQ(m.cell.count(), 0u);
  EXPECT_EQ(m.macro.count(), 0u);
}

TEST(ExtractMasks, HalfRedHalfBlue) {
  RgbImage img(10, 4, {180, 0, 0});
  for (int r = 0; r < 4; ++r)
    for (int c = 5; c < 10; ++c) img.set(c, r, {0, 0, 180});
  const auto m = extract_masks(to_hsv(img));
  EXPECT_EQ(m.macro.count(), 20u);
  EXPECT_EQ(m.cell.count(), 20u);
  EXPECT_EQ(m.whitespace.count(), 0u);
}

TEST(ExtractMasks, RenderRoundTrip) {
  std::mt19937_64 gen(11);
  for (int t = 0; t < 20; ++t) {
    const auto g = oracle::random_grid(gen, 40, 30);
    const auto m = extract_masks(to_hsv(render_rgb(g)));
    for (int r = 0; r < g.height; ++r)
      for (int c = 0; c < g.width; ++c) {
        const auto k = g.cls(c, r);
        ASSERT_EQ(m.macro.at(c, r), k == PixelClass::Macro);
        ASSERT_EQ(m.cell.at(c, r), k == PixelClass::Cell);
        ASSERT_EQ(m.whitespace.at(c, r), k == PixelClass::Whitespace);
      }
  }
}

TEST(Canny, ConstantImageHasNoEdges) {
  EXPECT_EQ(canny_edges(RgbImage(32, 32, {90, 90, 90})).count(), 0u);
}

TEST(Canny, StepEdgeIsOnePixelLine) {
  RgbImage img(30, 20, {0, 0, 0});
  for (int r = 0; r < 20; ++r)
    for (int c = 15; c < 30; ++c) img.set(c, r, {255, 255, 255});
  const auto e = canny_edges(img);
  std::set<int> cols;
  for (int r = 0; r < 20; ++r) {
    int n = 0;
    for (int c = 0; c < 30; ++c)
      if (e.at(c, r)) {
        ++n;
        cols.insert(c);
      }
    EXPECT_EQ(n, 1) << "row " << r;
  }
  ASSERT_EQ(cols.size(), 1u);
  EXPECT_TRUE(*cols.begin() == 14 || *cols.begin() == 15);
}

TEST(Canny, SquareMacroHasFourCorners) {
  auto g = blank_grid(60, 60);
  fill(g, 20, 20, 40, 40, PixelClass::Macro, 0);
  const EdgeMap em = canny(render_rgb(g));
  EXPECT_EQ(count_right_angle_corners(em), 4);
  // Edge pixels hug the macro boundary.
  for (int r = 0; r < 60; ++r)
    for (int c = 0; c < 60; ++c) {
      if (!em.edges.at(c, r)) continue;
      const bool near_v = (std::abs(c - 20) <= 1 || std::abs(c - 39) <= 1) && r >= 18 && r <= 41;
      const bool near_h = (std::abs(r - 20) <= 1 || std::abs(r - 39) <= 1) && c >= 18 && c <= 41;
      EXPECT_TRUE(near_v || near_h) << c << "," << r;
    }
}

TEST(Canny, RejectsBadThresholds) {
  EXPECT_THROW(canny(RgbImage(8, 8), 100, 50), Error);
  EXPECT_THROW(canny(RgbImage(2, 8)), Error);
}

TEST(Dilate, WorkedFourByFour) {
  const auto in = BinaryMask::from_rows({{0, 0, 1, 0}, {0, 1, 1, 1}, {1, 1, 1, 1}, {0, 0, 1, 0}});
  const auto out = dilate(in, 2, 2, 1);
  EXPECT_EQ(out.count(), 16u);
}

TEST(Dilate, ZeroIterationsIsIdentity) {
  std::mt19937_64 gen(5);
  for (int t = 0; t < 20; ++t) {
    const auto m = random_mask(gen, 1 + gen() % 20, 1 + gen() % 20, 0.3);
    EXPECT_EQ(dilate(m, 3, 2, 0), m);
  }
}

TEST(Dilate, SinglePixelGrowsToBlock) {
  BinaryMask m(16, 16);
  m.set(5, 7);
  const auto out = dilate(m, 2, 2, 3);
  EXPECT_EQ(out.count(), 16u);
  for (int r = 7; r < 11; ++r)
    for (int c = 5; c < 9; ++c) EXPECT_TRUE(out.at(c, r));
}

TEST(Dilate, MatchesTranslateUnionOracle) {
  std::mt19937_64 gen(2024);
  for (int t = 0; t < 200; ++t) {
    const int w = 1 + gen() % 32, h = 1 + gen() % 32;
    const auto m = random_mask(gen, w, h, 0.05 + 0.3 * (gen() % 100) / 100.0);
    Kernel k{1 + static_cast<int>(gen() % 3), 1 + static_cast<int>(gen() % 3), {}};
    for (int i = 0; i < k.width * k.height; ++i) k.bits.push_back(gen() % 3 != 0);
    k.bits[0] = 1;
    const int it = gen() % 4;
    ASSERT_EQ(oracle::to_grid(dilate(m, k, it)), oracle::dilate(oracle::to_grid(m), kernel_grid(k), it))
        << "case " << t << " " << w << "x" << h << " kernel " << k.width << "x" << k.height << " it " << it;
  }
}

TEST(Dilate, ExtensiveMonotoneComposable) {
  std::mt19937_64 gen(77);
  for (int t = 0; t < 50; ++t) {
    const int w = 4 + gen() % 30, h = 4 + gen() % 30;
    const auto a = random_mask(gen, w, h, 0.1);
    auto b = a;
    for (auto& v : b.bits) v |= gen() % 10 == 0;
    const int i = gen() % 3, j = gen() % 3;
    EXPECT_TRUE(a.subset_of(dilate(a, 2, 2, i)));
    EXPECT_TRUE(dilate(a, 2, 2, i).subset_of(dilate(b, 2, 2, i)));
    EXPECT_EQ(dilate(dilate(a, 2, 2, i), 2, 2, j), dilate(a, 2, 2, i + j));
  }
}

TEST(SubtractCells, Cases) {
  std::mt19937_64 gen(9);
  const auto ws = random_mask(gen, 16, 16, 0.5);
  BinaryMask none(16, 16);
  EXPECT_EQ(subtract_dilated_cells(ws, none), ws);
  BinaryMask all(16, 16);
  for (auto& v : all.bits) v = 1;
  EXPECT_EQ(subtract_dilated_cells(ws, all).count(), 0u);
  for (int t = 0; t < 20; ++t) {
    const auto a = random_mask(gen, 16, 16, 0.5), b = random_mask(gen, 16, 16, 0.5);
    const auto d = subtract_dilated_cells(a, b);
    for (std::size_t i = 0; i < a.bits.size(); ++i) ASSERT_EQ(d.bits[i] != 0, a.bits[i] && !b.bits[i]);
  }
  EXPECT_THROW(subtract_dilated_cells(ws, BinaryMask(3, 3)), Error);
}

TEST(Components, EmptyAndDiagonal) {
  EXPECT_TRUE(connected_components(BinaryMask(5, 5)).regions.empty());
  const auto diag = connected_components(BinaryMask::from_rows({{1, 0}, {0, 1}}));
  EXPECT_EQ(diag.regions.size(), 2u);
}

TEST(Components, MatchesFloodFillOracle) {
  std::mt19937_64 gen(31);
  for (int t = 0; t < 50; ++t) {
    const auto m = random_mask(gen, 32, 32, 0.3 + 0.4 * (t % 5) / 4.0);
    const auto lab = connected_components(m);
    const auto ref = oracle::flood_regions(oracle::to_grid(m));
    ASSERT_EQ(lab.regions.size(), ref.size());
    // Same partition up to renaming.
    for (const auto& reg : ref) {
      const int id = lab.at(reg.begin()->second, reg.begin()->first);
      ASSERT_GT(id, 0);
      EXPECT_EQ(lab.regions[id - 1].area_px, static_cast<long long>(reg.size()));
      for (auto [r, c] : reg) ASSERT_EQ(lab.at(c, r), id);
    }
  }
}

TEST(LabelWasted, AreaBand) {
  // Three regions: 9 px, 30 px, 200 px, all adjacent to a macro column.
  BinaryMask ws(40, 20), macro(40, 20);
  for (int r = 0; r < 20; ++r) macro.set(0, r);
  for (int r = 0; r < 3; ++r)
    for (int c = 1; c < 4; ++c) ws.set(c, r);
  for (int r = 5; r < 8; ++r)
    for (int c = 1; c < 11; ++c) ws.set(c, r);
  for (int r = 10; r < 20; ++r)
    for (int c = 1; c < 21; ++c) ws.set(c, r);
  const auto md = dilate(macro, 2, 2, 3);
  {
    auto lab = connected_components(ws);
    const auto w = label_wasted(lab, md, 10, 100);
    EXPECT_FALSE(lab.regions[0].wasted);  // area_min - 1
    EXPECT_TRUE(lab.regions[1].wasted);
    EXPECT_FALSE(lab.regions[2].wasted);  // above area_max
    EXPECT_EQ(w.count(), 30u);
  }
  {
    auto lab = connected_components(ws);
    label_wasted(lab, md, 9, 200);
    for (const auto& r : lab.regions) EXPECT_TRUE(r.wasted);
  }
  {
    auto lab = connected_components(ws);
    label_wasted(lab, BinaryMask(40, 20), 1, 1000);
    for (const auto& r : lab.regions) EXPECT_FALSE(r.wasted);
  }
  auto lab = connected_components(ws);
  EXPECT_THROW(label_wasted(lab, md, 100, 100), Error);
}

TEST(Parse, CenteredMacroHasNoWaste) {
  const auto fp = parse_floorplan(R"({"outline": [[0,0],[800,0],[800,800],[0,800]],
    "macros": [{"name":"m","x":350,"y":350,"w":100,"h":100}]})");
  const auto pm = parse(rasterize(fp));
  EXPECT_EQ(pm.wasted_pixels(), 0u);
  EXPECT_EQ(pm.regions.regions.size(), 1u);
}

TEST(Parse, NarrowSlotIsWasted) {
  const auto fp = parse_floorplan(R"({"outline": [[0,0],[800,0],[800,800],[0,800]],
    "macros": [{"name":"a","x":0,"y":0,"w":100,"h":700},{"name":"b","x":103,"y":0,"w":100,"h":700}],
    "cells": [{"x":0,"y":700,"w":300,"h":100,"util":0.7}]})");
  const auto g = rasterize(fp);
  const auto pm = parse(g);
  EXPECT_EQ(pm.wasted_pixels(), 3u * 697u);
  for (int r = 103; r < 800; ++r)
    for (int c = 100; c < 103; ++c) ASSERT_TRUE(pm.wasted.at(c, r)) << c << "," << r;
  EXPECT_EQ(oracle::to_grid(pm.wasted), oracle::wasted_from_classes(g, 2000, 20000));
}

TEST(Parse, NotchPocketIsWasted) {
  const auto fp = load_floorplan(WISP_FIXTURE_DIR "/notch2.json");
  const auto g = rasterize(fp);
  const auto pm = parse(g);
  EXPECT_EQ(pm.wasted_pixels(), 5000u);
  EXPECT_EQ(oracle::to_grid(pm.wasted), oracle::wasted_from_classes(g, 2000, 20000));
}

TEST(Parse, RandomGridsMatchOracle) {
  std::mt19937_64 gen(404);
  SegmentationParams sp;
  sp.area_min = 20;
  sp.area_max = 400;
  for (int t = 0; t < 40; ++t) {
    const auto g = oracle::random_grid(gen, 16 + gen() % 49, 16 + gen() % 49);
    ASSERT_EQ(oracle::to_grid(parse(g, sp).wasted), oracle::wasted_from_classes(g, 20, 400)) << "case " << t;
  }
}

TEST(Parse, Deterministic) {
  const auto g = rasterize(gen_fixture(FixtureKind::ZShape, 8, 3), 300);
  const auto a = parse(g), b = parse(g);
  EXPECT_EQ(a.wasted, b.wasted);
  EXPECT_EQ(a.regions.label, b.regions.label);
  EXPECT_TRUE(a.wasted.subset_of(a.whitespace));
}
