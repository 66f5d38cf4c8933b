// wisp: whitespace diagnosis, scoring, refinement and area recycling for
// rectilinear floorplans.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "wisp/wisp.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : wisp::Error {
  using wisp::Error::Error;
};

wisp::Rgb parse_rgb(const std::string& s) {
  int r, g, b;
  char c1, c2;
  std::istringstream in(s);
  if (!(in >> r >> c1 >> g >> c2 >> b) || c1 != ',' || c2 != ',' || r < 0 || g < 0 || b < 0 || r > 255 || g > 255 || b > 255)
    throw UsageError("bad color '" + s + "' (expected R,G,B)");
  return {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)};
}

// "whitespace=255,255,255;macro=180,0,0"
wisp::Palette parse_palette(const std::string& spec) {
  wisp::Palette p;
  std::istringstream in(spec);
  std::string item;
  while (std::getline(in, item, ';')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("bad palette entry '" + item + "'");
    const std::string key = item.substr(0, eq);
    const wisp::Rgb col = parse_rgb(item.substr(eq + 1));
    if (key == "outside")
      p.colors[0] = col;
    else if (key == "macro")
      p.colors[1] = col;
    else if (key == "cell")
      p.colors[2] = col;
    else if (key == "whitespace")
      p.colors[3] = col;
    else
      throw UsageError("unknown palette class '" + key + "'");
  }
  return p;
}

std::vector<std::pair<double, double>> parse_pairs(const std::string& s) {
  std::vector<std::pair<double, double>> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw UsageError("bad pair '" + item + "' (expected alpha:beta)");
    out.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
  }
  return out;
}

void add_segmentation_flags(CLI::App* sc, wisp::RunConfig& cfg) {
  sc->add_option("--area-min", cfg.segmentation.area_min, "Smallest wasted region (px^2)")->capture_default_str();
  sc->add_option("--area-max", cfg.segmentation.area_max, "Largest wasted region (px^2)")->capture_default_str();
}

void add_score_flags(CLI::App* sc, wisp::RunConfig& cfg) {
  sc->add_option("--gamma", cfg.score.gamma, "Extra weight of wasted-whitespace pixels")->capture_default_str();
  sc->add_option("--sigma-scale", cfg.score.sigma_scale, "Gaussian sigma as a fraction of macro size")->capture_default_str();
}

void add_refine_flags(CLI::App* sc, wisp::RunConfig& cfg) {
  auto& sa = cfg.sa;
  sc->add_option("--alpha", sa.alpha, "Wirelength weight")->capture_default_str();
  sc->add_option("--beta", sa.beta, "Whitespace score weight")->capture_default_str();
  sc->add_option("--step", sa.step_px, "Move step (px)")->capture_default_str();
  sc->add_option("--fov-depth", sa.fov_depth_px, "Field-of-view depth (px)")->capture_default_str();
  sc->add_option("--max-iters", sa.max_iters, "Iteration limit")->capture_default_str();
  sc->add_option("--t0", sa.t0, "Initial temperature (<=0: calibrate)")->capture_default_str();
  sc->add_option("--cooling", sa.cooling, "Geometric cooling factor")->capture_default_str();
  sc->add_option("--iters-per-temp", sa.iters_per_temp, "Proposals per temperature (<=0: 4 x movable)")->capture_default_str();
  sc->add_option("--t-min", sa.t_min, "Stop temperature (<=0: 1e-3 x t0)")->capture_default_str();
  sc->add_option("--rescore-every", sa.rescore_every, "Re-label wasted whitespace every K evaluations")->capture_default_str();
}

void add_recycle_flags(CLI::App* sc, wisp::RunConfig& cfg) {
  sc->add_option("--tau", cfg.recycle.tau_percentile, "Score percentile below which whitespace is reclaimable")->capture_default_str();
  sc->add_option("--min-depth", cfg.recycle.min_depth_px, "Minimum strip depth (px)")->capture_default_str();
}

void print_summary(const nlohmann::ordered_json& j, bool as_json, const std::string& text) {
  if (as_json)
    std::cout << j.dump(2) << "\n";
  else
    std::cout << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wisp - whitespace diagnosis and refinement for rectilinear floorplans"};
  app.require_subcommand(1);
  app.fallthrough();

  wisp::RunConfig cfg;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool json_summary = false;
  std::string palette;
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--max-side", cfg.max_side, "Longest canvas side (px)")->capture_default_str();
  app.add_option("--seed", seed, "Random seed")->capture_default_str();
  app.add_flag("--json-summary", json_summary, "Print the summary as JSON");
  app.add_option("--palette", palette, "Palette override, e.g. macro=200,0,0;cell=0,0,200");

  auto* diag = app.add_subcommand("diagnose", "Label wasted whitespace");
  diag->add_option("input", cfg.input, "Floorplan JSON")->required();
  add_segmentation_flags(diag, cfg);
  diag->add_option("--canny-low", cfg.canny_low)->capture_default_str();
  diag->add_option("--canny-high", cfg.canny_high)->capture_default_str();

  auto* sco = app.add_subcommand("score", "Whitespace score heatmap");
  sco->add_option("input", cfg.input, "Floorplan JSON")->required();
  add_segmentation_flags(sco, cfg);
  add_score_flags(sco, cfg);

  auto* ref = app.add_subcommand("refine", "Direction-aware annealing of macro positions");
  ref->add_option("input", cfg.input, "Floorplan JSON")->required();
  add_segmentation_flags(ref, cfg);
  add_score_flags(ref, cfg);
  add_refine_flags(ref, cfg);

  auto* rec = app.add_subcommand("recycle", "Trim low-score boundary whitespace");
  rec->add_option("input", cfg.input, "Floorplan JSON")->required();
  add_segmentation_flags(rec, cfg);
  add_score_flags(rec, cfg);
  add_recycle_flags(rec, cfg);

  auto* run = app.add_subcommand("run", "diagnose, score, refine and optionally recycle");
  run->add_option("input", cfg.input, "Floorplan JSON")->required();
  add_segmentation_flags(run, cfg);
  add_score_flags(run, cfg);
  add_refine_flags(run, cfg);
  add_recycle_flags(run, cfg);
  run->add_flag("--recycle", cfg.do_recycle, "Also run area recycling on the refined placement");

  std::string pairs_arg;
  auto* swp = app.add_subcommand("sweep", "Sweep (alpha, beta) pairs");
  swp->add_option("input", cfg.input, "Floorplan JSON")->required();
  add_segmentation_flags(swp, cfg);
  add_score_flags(swp, cfg);
  add_refine_flags(swp, cfg);
  swp->add_option("--pairs", pairs_arg, "Comma-separated alpha:beta pairs (default: 0:1 .. 1:0)");

  std::string format = "png";
  auto* ren = app.add_subcommand("render", "Render the floorplan raster");
  ren->add_option("input", cfg.input, "Floorplan JSON")->required();
  ren->add_option("--format", format, "png or ppm")->check(CLI::IsMember({"png", "ppm"}))->capture_default_str();

  std::string kind = "rect";
  int macro_count = 4;
  auto* gen = app.add_subcommand("gen-fixture", "Write a synthetic floorplan");
  gen->add_option("--kind", kind, "rect, lshape or zshape")->check(CLI::IsMember({"rect", "lshape", "zshape"}))->capture_default_str();
  gen->add_option("--macros", macro_count, "Number of macros")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  cfg.out_dir = out_dir;
  cfg.sa.seed = seed;
  const char* stage = "setup";
  try {
    if (!palette.empty()) cfg.palette = parse_palette(palette);
    if (std::abs(cfg.sa.alpha + cfg.sa.beta - 1.0) > 1e-9) throw UsageError("alpha+beta must equal 1");
    if (cfg.segmentation.area_min >= cfg.segmentation.area_max) throw UsageError("--area-min must be below --area-max");
    if (!gen->parsed() && !std::filesystem::exists(cfg.input)) throw UsageError("input not found: " + cfg.input);
    std::filesystem::create_directories(cfg.out_dir);

    if (gen->parsed()) {
      stage = "gen-fixture";
      const auto fp = wisp::gen_fixture(wisp::parse_fixture_kind(kind), macro_count, seed);
      const auto path = cfg.out_dir / (fp.name + ".json");
      wisp::write_file(path.string(), wisp::dump_floorplan(fp));
      std::cout << path.string() << "\n";
      return kExitOk;
    }

    stage = "load";
    const wisp::Floorplan fp = wisp::load_floorplan(cfg.input);
    for (const auto& w : fp.warnings) std::cerr << "warning: " << w << "\n";

    if (diag->parsed()) {
      stage = "diagnose";
      const auto d = wisp::diagnose(fp, cfg);
      wisp::write_diagnose(d, cfg, cfg.out_dir);
      std::ostringstream o;
      o << "wasted regions: " << d.report["regions"].size() << ", wasted pixels: " << d.parsed.wasted_pixels()
        << ", right-angle corners: " << d.corners << "\n";
      print_summary(d.report, json_summary, o.str());
    } else if (sco->parsed()) {
      stage = "score";
      const auto s = wisp::score(fp, cfg);
      wisp::write_score(s, cfg, cfg.out_dir);
      char buf[64];
      std::snprintf(buf, sizeof buf, "total score: %.9g\n", s.total);
      print_summary({{"total_score", s.total}, {"wasted_pixels", s.parsed.wasted_pixels()}}, json_summary, buf);
    } else if (ref->parsed()) {
      stage = "refine";
      const auto r = wisp::anneal(fp, cfg.sa_config());
      wisp::write_refine(fp, r, cfg, cfg.out_dir);
      char buf[256];
      std::snprintf(buf, sizeof buf, "cost %.6f -> %.6f, hpwl %.3f -> %.3f, wasted pixels %zu -> %zu, %zu iterations\n",
                    r.initial.total, r.final.total, r.wl_initial, r.wl_final, r.wasted_before, r.wasted_after, r.trace.size());
      print_summary({{"initial", wisp::cost_json(r.initial)},
                     {"final", wisp::cost_json(r.final)},
                     {"hpwl_initial", r.wl_initial},
                     {"hpwl_final", r.wl_final},
                     {"wasted_before", r.wasted_before},
                     {"wasted_after", r.wasted_after}},
                    json_summary, buf);
    } else if (rec->parsed()) {
      stage = "recycle";
      const auto rc = wisp::recycle(fp, cfg);
      wisp::write_recycle(fp, rc, cfg, cfg.out_dir);
      char buf[160];
      std::snprintf(buf, sizeof buf, "strips: %zu, reclaimed %.3f um2 (%.2f%%)\n", rc.plan.strips.size(), rc.plan.delta_area_um2,
                    100.0 * rc.plan.delta_area_fraction);
      print_summary(wisp::plan_json(rc.plan), json_summary, buf);
    } else if (run->parsed()) {
      stage = "run";
      const auto sum = wisp::run_pipeline(cfg);
      print_summary(sum.to_json(), json_summary, sum.table());
    } else if (swp->parsed()) {
      stage = "sweep";
      const auto pairs = pairs_arg.empty() ? wisp::default_sweep_pairs() : parse_pairs(pairs_arg);
      for (const auto& [a, b] : pairs)
        if (std::abs(a + b - 1.0) > 1e-9) throw UsageError("alpha+beta must equal 1");
      const auto rows = wisp::sweep(fp, cfg, pairs);
      const std::string csv = wisp::sweep_csv(rows);
      wisp::write_file((cfg.out_dir / "sweep.csv").string(), csv);
      std::cout << csv;
    } else if (ren->parsed()) {
      stage = "render";
      const auto img = wisp::render_rgb(wisp::rasterize(fp, cfg.max_side), cfg.palette);
      const auto path = cfg.out_dir / (format == "png" ? "layout.png" : "layout.ppm");
      wisp::write_file(path.string(), format == "png" ? wisp::encode_png(img) : wisp::encode_ppm(img));
      std::cout << path.string() << "\n";
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error [" << stage << "]: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}
