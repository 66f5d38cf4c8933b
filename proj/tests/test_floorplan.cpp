#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "wisp/wisp.hpp"

using namespace wisp;

namespace {

const char* kLShape = R"({
  "outline": [[0,0],[100,0],[100,60],[60,60],[60,100],[0,100]]
})";

Floorplan two_pin_design() {
  return parse_floorplan(R"({
    "outline": [[0,0],[100,0],[100,100],[0,100]],
    "macros": [
      {"name": "A", "x": 0, "y": 0, "w": 10, "h": 10},
      {"name": "B", "x": 50, "y": 50, "w": 10, "h": 10}
    ],
    "nets": [{"name": "n", "pins": [{"macro": "A", "dx": 0, "dy": 0}, {"macro": "B", "dx": 0, "dy": 0}]}]
  })");
}

}  // namespace

TEST(Outline, SquareWithoutMacros) {
  const auto fp = parse_floorplan(R"({"outline": [[0,0],[10,0],[10,10],[0,10]]})");
  EXPECT_TRUE(fp.macros.empty());
  EXPECT_DOUBLE_EQ(fp.outline.area(), 100.0);
}

TEST(Outline, LShapeArea) {
  const auto fp = parse_floorplan(kLShape);
  EXPECT_EQ(fp.outline.size(), 6u);
  EXPECT_DOUBLE_EQ(fp.outline.area(), 8400.0);
  EXPECT_EQ(fp.outline.reflex_corners(), 1);
}

TEST(Outline, ClockwiseInputIsNormalized) {
  const auto fp = parse_floorplan(R"({"outline": [[0,0],[0,10],[10,10],[10,0]]})");
  EXPECT_GT(signed_area(fp.outline.vertices()), 0.0);
}

TEST(Outline, DiagonalEdgeRejected) {
  try {
    parse_floorplan(R"({"outline": [[0,0],[10,10],[0,10]]})");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("non-axis-aligned edge"), std::string::npos) << e.what();
  }
}

TEST(Outline, SelfIntersectionRejected) {
  EXPECT_THROW(parse_floorplan(R"({"outline": [[0,0],[20,0],[20,10],[5,10],[5,-5],[15,-5],[15,20],[0,20]]})"),
               ParseError);
}

TEST(Outline, SyntaxErrorCarriesLine) {
  try {
    parse_floorplan("{\n\"outline\": [[0,0],\n[10,0],,\n]}");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(Parse, DanglingNetMacro) {
  EXPECT_THROW(parse_floorplan(R"({"outline": [[0,0],[10,0],[10,10],[0,10]],
    "nets": [{"pins": [{"macro": "ghost"}]}]})"),
               ParseError);
}

TEST(Parse, CellOutsideOutlineIsError) {
  EXPECT_THROW(parse_floorplan(R"({"outline": [[0,0],[10,0],[10,10],[0,10]],
    "cells": [{"x": 5, "y": 5, "w": 10, "h": 2}]})"),
               ParseError);
}

TEST(Parse, OverlapIsWarningOnly) {
  const auto fp = parse_floorplan(R"({"outline": [[0,0],[10,0],[10,10],[0,10]],
    "macros": [{"name":"a","x":0,"y":0,"w":5,"h":5},{"name":"b","x":4,"y":4,"w":5,"h":5}]})");
  ASSERT_EQ(fp.warnings.size(), 1u);
  EXPECT_FALSE(is_legal(fp).legal);
}

TEST(Parse, SerializeRoundTrip) {
  const auto fp = load_floorplan(WISP_FIXTURE_DIR "/notch2.json");
  const auto again = parse_floorplan(dump_floorplan(fp));
  EXPECT_EQ(dump_floorplan(again), dump_floorplan(fp));
  EXPECT_DOUBLE_EQ(hpwl(again), hpwl(fp));
}

TEST(Rasterize, AspectRatio) {
  const auto fp = parse_floorplan(R"({"outline": [[0,0],[1600,0],[1600,1200],[0,1200]]})");
  const auto g = rasterize(fp);
  EXPECT_EQ(g.width, 800);
  EXPECT_EQ(g.height, 600);
  EXPECT_DOUBLE_EQ(g.scale, 2.0);
}

TEST(Rasterize, FullMacro) {
  const auto fp = parse_floorplan(R"({"outline": [[0,0],[800,0],[800,800],[0,800]],
    "macros": [{"name":"m","x":0,"y":0,"w":800,"h":800}]})");
  const auto g = rasterize(fp);
  for (auto c : g.classes) ASSERT_EQ(c, PixelClass::Macro);
}

TEST(Rasterize, LShapeNotchIsOutside) {
  const auto fp = parse_floorplan(kLShape);
  const auto g = rasterize(fp, 100);
  ASSERT_EQ(g.width, 100);
  for (int r = 0; r < g.height; ++r)
    for (int c = 0; c < g.width; ++c) {
      const Point p = g.center_um(c, r);
      const bool in = oracle::inside(fp.outline.vertices(), p);
      EXPECT_EQ(g.cls(c, r) != PixelClass::Outside, in) << c << "," << r;
      if (p.x >= 60 && p.y >= 60) {
        EXPECT_EQ(g.cls(c, r), PixelClass::Outside);
      }
    }
}

TEST(Rasterize, PrecedenceMacroOverCell) {
  const auto fp = parse_floorplan(R"({"outline": [[0,0],[100,0],[100,100],[0,100]],
    "macros": [{"name":"m","x":10,"y":10,"w":20,"h":20}],
    "cells": [{"x":0,"y":0,"w":50,"h":50}]})");
  const auto g = rasterize(fp, 100);
  EXPECT_EQ(g.cls(15, 100 - 15 - 1), PixelClass::Macro);
  EXPECT_EQ(g.cls(40, 100 - 40 - 1), PixelClass::Cell);
  EXPECT_EQ(g.cls(80, 10), PixelClass::Whitespace);
  EXPECT_EQ(g.macro_id[g.index(15, 84)], 0);
}

TEST(Rasterize, RandomOutlinesAgainstOracle) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto fp = gen_fixture(seed % 2 ? FixtureKind::ZShape : FixtureKind::LShape, 4, seed);
    const auto g = rasterize(fp, 120);
    for (int r = 0; r < g.height; ++r)
      for (int c = 0; c < g.width; ++c)
        ASSERT_EQ(g.cls(c, r) != PixelClass::Outside, oracle::inside(fp.outline.vertices(), g.center_um(c, r)));
  }
}

TEST(Render, WhiteAndSingleMacroPixel) {
  const auto fp = parse_floorplan(R"({"outline": [[0,0],[10,0],[10,10],[0,10]],
    "macros": [{"name":"m","x":3,"y":3,"w":1,"h":1}]})");
  const auto g = rasterize(fp, 10);
  const auto img = render_rgb(g);
  int red = 0, white = 0;
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c) {
      const Rgb p = img.at(c, r);
      red += p.r == 180 && p.g == 0 && p.b == 0;
      white += p.r == 255 && p.g == 255 && p.b == 255;
    }
  EXPECT_EQ(red, 1);
  EXPECT_EQ(white, 99);
}

TEST(Render, PpmRoundTrip) {
  const auto g = rasterize(load_floorplan(WISP_FIXTURE_DIR "/notch2.json"), 200);
  const auto img = render_rgb(g);
  const auto back = decode_ppm(encode_ppm(img));
  EXPECT_EQ(back.width, img.width);
  EXPECT_EQ(back.data, img.data);
}

TEST(Hpwl, TwoPin) {
  EXPECT_DOUBLE_EQ(hpwl(two_pin_design(), {{"A", {0, 0}}, {"B", {3, 4}}}), 7.0);
}

TEST(Hpwl, SinglePin) {
  const auto fp = parse_floorplan(R"({"outline": [[0,0],[10,0],[10,10],[0,10]],
    "macros": [{"name":"A","x":1,"y":1,"w":1,"h":1}],
    "nets": [{"pins": [{"macro": "A"}]}]})");
  EXPECT_DOUBLE_EQ(hpwl(fp), 0.0);
}

TEST(Hpwl, ThreePin) {
  const auto fp = parse_floorplan(R"({"outline": [[0,0],[10,0],[10,10],[0,10]],
    "nets": [{"pins": [{"x":0,"y":0},{"x":5,"y":1},{"x":2,"y":9}]}]})");
  EXPECT_DOUBLE_EQ(hpwl(fp), 14.0);
}

TEST(Hpwl, DefaultPinIsCenter) {
  const auto fp = load_floorplan(WISP_FIXTURE_DIR "/notch2.json");
  // ab: centers (250,75) and (550,60); b_io: (550,10)-(550,0); a_io: (200,75)-(0,75)
  EXPECT_DOUBLE_EQ(hpwl(fp), 300 + 15 + 10 + 200);
}

TEST(Hpwl, PermutationAndTranslationInvariant) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int t = 0; t < 50; ++t) {
    std::vector<Point> pts(2 + gen() % 5);
    for (auto& p : pts) p = {u(gen), u(gen)};
    auto design = [](const std::vector<Point>& ps) {
      nlohmann::json pins = nlohmann::json::array();
      for (auto p : ps) pins.push_back({{"x", p.x}, {"y", p.y}});
      nlohmann::json j = {{"outline", {{-500, -500}, {500, -500}, {500, 500}, {-500, 500}}},
                          {"nets", {{{"pins", pins}}}}};
      return parse_floorplan(j.dump());
    };
    const double base = hpwl(design(pts));
    auto shuffled = pts;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    EXPECT_NEAR(hpwl(design(shuffled)), base, 1e-9);
    const Point d{u(gen), u(gen)};
    for (auto& p : shuffled) p = {p.x + d.x, p.y + d.y};
    EXPECT_NEAR(hpwl(design(shuffled)), base, 1e-9);
  }
}

TEST(Hpwl, UnknownPositionNameThrows) {
  EXPECT_THROW(apply_positions(two_pin_design(), {{"Z", {0, 0}}}), Error);
}

TEST(ApplyPositions, EmptyIsIdentity) {
  const auto fp = two_pin_design();
  EXPECT_EQ(dump_floorplan(apply_positions(fp, {})), dump_floorplan(fp));
}

TEST(ApplyPositions, OnlyNamedMacroMoves) {
  const auto fp = two_pin_design();
  const auto moved = apply_positions(fp, {{"A", {10, 0}}});
  EXPECT_DOUBLE_EQ(moved.macros[0].origin.x, 10.0);
  EXPECT_DOUBLE_EQ(moved.macros[1].origin.x, fp.macros[1].origin.x);
  EXPECT_DOUBLE_EQ(moved.macros[1].origin.y, fp.macros[1].origin.y);
  EXPECT_TRUE(is_legal(moved).legal);
}

TEST(ApplyPositions, OutsideIsReportedLater) {
  const auto moved = apply_positions(two_pin_design(), {{"B", {95, 50}}});
  EXPECT_DOUBLE_EQ(moved.macros[1].origin.x, 95.0);
  const auto rep = is_legal(moved);
  EXPECT_FALSE(rep.legal);
  EXPECT_EQ(rep.violations.size(), 1u);
}
