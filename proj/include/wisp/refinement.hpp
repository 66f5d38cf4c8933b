#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "rng.hpp"
#include "scoring.hpp"

namespace wisp {

enum class Direction : std::uint8_t { N = 0, E = 1, S = 2, W = 3 };

inline constexpr std::array<Direction, 4> kDirections{Direction::N, Direction::E, Direction::S, Direction::W};

inline const char* to_string(Direction d) {
  switch (d) {
    case Direction::N: return "N";
    case Direction::E: return "E";
    case Direction::S: return "S";
    case Direction::W: return "W";
  }
  return "?";
}

/// Micron displacement of one step; N is +y.
inline Point step_vector(Direction d, double step_um) {
  switch (d) {
    case Direction::N: return {0, step_um};
    case Direction::E: return {step_um, 0};
    case Direction::S: return {0, -step_um};
    case Direction::W: return {-step_um, 0};
  }
  return {};
}

struct FovProbe {
  std::size_t macro = 0;
  Direction direction = Direction::N;
  PixelRect rect;  // clipped to the canvas
  double density = 0.0;
  bool blocked = false;
};

/// Field-of-view rectangle flush with the macro's facing edge, spanning the
/// macro's own extent and `depth` pixels deep, clipped to the canvas.
inline PixelRect fov_rect(const PixelGrid& grid, const PixelRect& macro_px, Direction d, int depth) {
  PixelRect r = macro_px;
  switch (d) {
    case Direction::N: r.r1 = macro_px.r0; r.r0 = macro_px.r0 - depth; break;
    case Direction::S: r.r0 = macro_px.r1; r.r1 = macro_px.r1 + depth; break;
    case Direction::E: r.c0 = macro_px.c1; r.c1 = macro_px.c1 + depth; break;
    case Direction::W: r.c1 = macro_px.c0; r.c0 = macro_px.c0 - depth; break;
  }
  r = r.clipped(grid.width, grid.height);
  if (r.empty()) r = {};
  return r;
}

/// Mean score over the FOV (pixels outside the score domain count as 0).
/// Blocked when the FOV is empty or holds Outside or another macro's pixels.
inline FovProbe fov_probe(const PixelGrid& grid, const ScoreMap& sm, std::size_t macro, const PixelRect& macro_px,
                          Direction d, int depth) {
  FovProbe p{macro, d, fov_rect(grid, macro_px, d, depth), 0.0, false};
  if (p.rect.empty()) {
    p.blocked = true;
    return p;
  }
  double sum = 0.0;
  for (int r = p.rect.r0; r < p.rect.r1; ++r)
    for (int c = p.rect.c0; c < p.rect.c1; ++c) {
      const std::size_t i = grid.index(c, r);
      const PixelClass cls = grid.classes[i];
      if (cls == PixelClass::Outside || (cls == PixelClass::Macro && grid.macro_id[i] != static_cast<std::int32_t>(macro)))
        p.blocked = true;
      if (sm.domain[i]) sum += sm.values[i];
    }
  p.density = sum / static_cast<double>(p.rect.count());
  return p;
}

inline std::array<FovProbe, 4> fov_probes(const PixelGrid& grid, const ScoreMap& sm, const Floorplan& fp,
                                          std::span<const Point> origins, std::size_t macro, int depth) {
  const PixelRect mpx = grid.rect_for(fp.macros[macro].rect_at(origins[macro]));
  std::array<FovProbe, 4> out;
  for (auto d : kDirections) out[static_cast<std::size_t>(d)] = fov_probe(grid, sm, macro, mpx, d, depth);
  return out;
}

/// Highest-density unblocked direction; ties go to the earlier of N, E, S, W.
inline std::optional<Direction> choose_direction(const std::array<FovProbe, 4>& probes) {
  std::optional<Direction> best;
  double best_density = 0.0;
  for (auto d : kDirections) {
    const auto& p = probes[static_cast<std::size_t>(d)];
    if (p.blocked) continue;
    if (!best || p.density > best_density) {
      best = d;
      best_density = p.density;
    }
  }
  return best;
}

/// Movable macros sorted by the mean of their four FOV densities, highest
/// first; ties by name.
inline std::vector<std::size_t> macro_order(const PixelGrid& grid, const ScoreMap& sm, const Floorplan& fp,
                                            std::span<const Point> origins, std::span<const std::size_t> movable, int depth) {
  std::vector<std::pair<double, std::size_t>> keyed;
  for (auto m : movable) {
    const auto probes = fov_probes(grid, sm, fp, origins, m, depth);
    double s = 0.0;
    for (const auto& p : probes) s += p.density;
    keyed.emplace_back(s / 4.0, m);
  }
  std::stable_sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return fp.macros[a.second].name < fp.macros[b.second].name;
  });
  std::vector<std::size_t> order;
  for (const auto& k : keyed) order.push_back(k.second);
  return order;
}

struct LegalityReport {
  bool legal = true;
  std::vector<std::string> violations;
};

/// Every macro inside the outline (closed containment) and no two macros
/// sharing interior area.
inline LegalityReport is_legal(const Floorplan& fp, std::span<const Point> origins) {
  LegalityReport rep;
  const std::size_t n = fp.macros.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Rect ri = fp.macros[i].rect_at(origins[i]);
    if (!fp.outline.contains(ri)) rep.violations.push_back("macro '" + fp.macros[i].name + "' outside outline");
    for (std::size_t j = i + 1; j < n; ++j)
      if (ri.overlaps(fp.macros[j].rect_at(origins[j])))
        rep.violations.push_back("macros '" + fp.macros[i].name + "' and '" + fp.macros[j].name + "' overlap");
  }
  rep.legal = rep.violations.empty();
  return rep;
}

inline LegalityReport is_legal(const Floorplan& fp, const Positions& positions) {
  return is_legal(apply_positions(fp, positions), apply_positions(fp, positions).origins());
}

inline LegalityReport is_legal(const Floorplan& fp) { return is_legal(fp, fp.origins()); }

struct CostBreakdown {
  double wl_norm = 0.0;
  double score_norm = 0.0;
  double total = 0.0;
};

/// Weighted sum of wirelength and whitespace score, each normalized by its
/// value on the initial placement.
inline CostBreakdown cost(double wl, double score, double baseline_wl, double baseline_score, double alpha, double beta) {
  if (!(baseline_wl > 0)) throw Error("cost: zero baseline wirelength");
  if (!(baseline_score > 0)) throw Error("cost: zero baseline whitespace score");
  CostBreakdown c;
  c.wl_norm = wl / baseline_wl;
  c.score_norm = score / baseline_score;
  c.total = alpha * c.wl_norm + beta * c.score_norm;
  return c;
}

struct SaConfig {
  double alpha = 0.05;
  double beta = 0.95;
  int step_px = 10;
  int fov_depth_px = 100;
  double t0 = 0.0;         // <= 0: calibrate from probe moves
  double cooling = 0.95;
  int iters_per_temp = 0;  // <= 0: 4 x number of movable macros
  double t_min = 0.0;      // <= 0: 1e-3 x t0
  int max_iters = 2000;
  std::uint64_t seed = 0;
  int max_side = 800;
  int rescore_every = 1;   // re-label wasted whitespace every K evaluations
  int calibration_moves = 50;
  ScoreParams score;
  SegmentationParams segmentation;

  void validate() const {
    if (std::abs(alpha + beta - 1.0) > 1e-9) throw Error("alpha+beta must equal 1");
    if (alpha < 0 || beta < 0) throw Error("alpha and beta must be non-negative");
    if (!(cooling > 0 && cooling < 1)) throw Error("cooling must lie in (0, 1)");
    if (step_px < 1) throw Error("step must be at least 1 pixel");
    if (fov_depth_px < 1) throw Error("fov depth must be at least 1 pixel");
    if (max_iters < 0) throw Error("max_iters must be non-negative");
    if (rescore_every < 1) throw Error("rescore_every must be at least 1");
  }
};

/// Wall-clock split of a refinement run.
struct StageTiming {
  double segmentation_s = 0.0;
  double scoring_s = 0.0;
  double annealing_s = 0.0;  // total SA time including the two above
};

/// A fully analyzed placement: raster, parsed masks, score map and cost.
struct Evaluation {
  std::vector<Point> origins;
  PixelGrid grid;
  ParsedMasks parsed;
  ScoreMap map;
  double wl = 0.0;
  double score = 0.0;
  CostBreakdown cost;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

}  // namespace detail

/// Rasterize, parse and score `origins`. With `reuse_wasted` the previous
/// wasted-whitespace labeling is carried over (restricted to whitespace)
/// instead of re-running segmentation.
inline Evaluation evaluate(const Floorplan& fp, const ResolvedNets& nets, std::vector<Point> origins, const SaConfig& cfg,
                           const ParsedMasks* reuse_wasted = nullptr, StageTiming* timing = nullptr) {
  Evaluation e;
  e.origins = std::move(origins);
  auto t = detail::Clock::now();
  e.grid = rasterize(fp, e.origins, cfg.max_side);
  if (reuse_wasted) {
    e.parsed = *reuse_wasted;
    for (std::size_t i = 0; i < e.grid.pixel_count(); ++i)
      if (e.grid.classes[i] != PixelClass::Whitespace) e.parsed.wasted.bits[i] = 0;
  } else {
    e.parsed = parse(e.grid, cfg.segmentation);
  }
  if (timing) timing->segmentation_s += detail::seconds_since(t);
  t = detail::Clock::now();
  const auto gs = macro_gaussians(e.grid, fp, e.origins, cfg.score.sigma_scale);
  e.map = build_score_map(e.grid, e.parsed.wasted, gs, cfg.score.gamma);
  e.score = total_score(e.map);
  if (timing) timing->scoring_s += detail::seconds_since(t);
  e.wl = nets.hpwl(e.origins);
  return e;
}

struct TraceEntry {
  int iter = 0;
  double cost = 0.0;  // cost of the current state after the decision
  double wl_norm = 0.0;
  double score_norm = 0.0;
  bool accepted = false;
  std::string macro;
  std::string direction;  // N/E/S/W or "none"
  double temperature = 0.0;
};

struct RefinementResult {
  std::vector<Point> final_origins;
  Floorplan refined;
  CostBreakdown initial;
  CostBreakdown final;
  double wl_initial = 0.0, wl_final = 0.0;
  double score_initial = 0.0, score_final = 0.0;
  std::size_t wasted_before = 0;
  std::size_t wasted_after = 0;
  double t0 = 0.0;
  std::vector<double> temperatures;  // temperature of each completed step, starting with t0
  std::vector<TraceEntry> trace;
  StageTiming timing;
};

/// Outcome of one direction-aware proposal.
struct Proposal {
  std::size_t macro = 0;
  std::optional<Direction> direction;
  std::vector<Point> candidate;  // empty when rejected up front
  std::string rejection;         // "blocked" or "illegal" when rejected up front
};

/// Direction-aware move for `macro` on the analyzed state `cur`: one step
/// towards the densest unblocked FOV, rejected if no direction is open or
/// the moved placement is illegal.
inline Proposal propose_move(const Floorplan& fp, const Evaluation& cur, std::size_t macro, const SaConfig& cfg) {
  Proposal p;
  p.macro = macro;
  p.direction = choose_direction(fov_probes(cur.grid, cur.map, fp, cur.origins, macro, cfg.fov_depth_px));
  if (!p.direction) {
    p.rejection = "blocked";
    return p;
  }
  std::vector<Point> cand = cur.origins;
  const Point dv = step_vector(*p.direction, cfg.step_px * cur.grid.scale);
  cand[macro].x += dv.x;
  cand[macro].y += dv.y;
  if (!is_legal(fp, cand).legal) {
    p.rejection = "illegal";
    return p;
  }
  p.candidate = std::move(cand);
  return p;
}

/// Direction-aware simulated annealing over the normalized cost. The
/// returned placement is the best one visited.
inline RefinementResult anneal(const Floorplan& fp, const SaConfig& cfg) {
  cfg.validate();
  if (fp.macros.empty()) throw Error("refinement needs at least one macro");
  std::vector<std::size_t> movable;
  for (std::size_t i = 0; i < fp.macros.size(); ++i)
    if (fp.macros[i].movable) movable.push_back(i);
  if (movable.empty()) throw Error("refinement needs at least one movable macro");
  if (auto rep = is_legal(fp); !rep.legal) {
    std::string msg = "illegal initial placement:";
    for (const auto& v : rep.violations) msg += " " + v + ";";
    throw Error(msg);
  }

  const auto t_start = detail::Clock::now();
  RefinementResult res;
  const ResolvedNets nets(fp);
  Rng rng(cfg.seed);

  Evaluation cur = evaluate(fp, nets, fp.origins(), cfg, nullptr, &res.timing);
  const double wl0 = cur.wl, score0 = cur.score;
  cur.cost = cost(cur.wl, cur.score, wl0, score0, cfg.alpha, cfg.beta);
  res.initial = cur.cost;
  res.wl_initial = wl0;
  res.score_initial = score0;
  res.wasted_before = cur.parsed.wasted_pixels();

  Evaluation best = cur;
  std::size_t evaluations = 0;
  auto evaluate_candidate = [&](std::vector<Point> cand) {
    ++evaluations;
    const bool relabel = evaluations % static_cast<std::size_t>(cfg.rescore_every) == 0;
    Evaluation e = evaluate(fp, nets, std::move(cand), cfg, relabel ? nullptr : &cur.parsed, &res.timing);
    e.cost = cost(e.wl, e.score, wl0, score0, cfg.alpha, cfg.beta);
    return e;
  };

  if (cfg.max_iters > 0) {
    // Initial temperature: median uphill delta over random single steps is
    // accepted with probability 1/2.
    double t0 = cfg.t0;
    if (t0 <= 0) {
      std::vector<double> ups;
      for (int i = 0; i < cfg.calibration_moves; ++i) {
        const std::size_t m = movable[rng.below(movable.size())];
        const Direction d = kDirections[rng.below(4)];
        std::vector<Point> cand = cur.origins;
        const Point dv = step_vector(d, cfg.step_px * cur.grid.scale);
        cand[m].x += dv.x;
        cand[m].y += dv.y;
        if (!is_legal(fp, cand).legal) continue;
        Evaluation e = evaluate(fp, nets, std::move(cand), cfg, nullptr, &res.timing);
        const double delta = cost(e.wl, e.score, wl0, score0, cfg.alpha, cfg.beta).total - cur.cost.total;
        if (delta > 0) ups.push_back(delta);
      }
      if (ups.empty()) {
        t0 = 1e-3;
      } else {
        std::sort(ups.begin(), ups.end());
        const std::size_t n = ups.size();
        const double median = n % 2 ? ups[n / 2] : 0.5 * (ups[n / 2 - 1] + ups[n / 2]);
        t0 = median / std::log(2.0);
      }
    }
    res.t0 = t0;
    const double t_min = cfg.t_min > 0 ? cfg.t_min : 1e-3 * t0;
    const int per_temp = cfg.iters_per_temp > 0 ? cfg.iters_per_temp : 4 * static_cast<int>(movable.size());

    double temp = t0;
    res.temperatures.push_back(temp);
    auto order = macro_order(cur.grid, cur.map, fp, cur.origins, movable, cfg.fov_depth_px);
    std::size_t cursor = 0;
    int in_step = 0;
    int cold_steps = 0;
    bool accepted_in_step = false;
    // Candidates of the unchanged current state are deterministic; keep
    // their evaluations until the state moves.
    std::vector<std::optional<Evaluation>> cache(fp.macros.size());

    for (int iter = 0; iter < cfg.max_iters; ++iter) {
      const std::size_t m = order[cursor++ % order.size()];
      TraceEntry te;
      te.iter = iter;
      te.macro = fp.macros[m].name;
      te.temperature = temp;

      std::optional<Direction> dir;
      if (cache[m]) {
        dir = choose_direction(fov_probes(cur.grid, cur.map, fp, cur.origins, m, cfg.fov_depth_px));
      } else {
        Proposal prop = propose_move(fp, cur, m, cfg);
        dir = prop.direction;
        if (!prop.candidate.empty()) cache[m] = evaluate_candidate(std::move(prop.candidate));
      }
      te.direction = dir ? to_string(*dir) : "none";

      if (cache[m]) {
        const double delta = cache[m]->cost.total - cur.cost.total;
        bool accept = delta <= 0;
        if (!accept) accept = rng.uniform() < std::exp(-delta / temp);
        if (accept) {
          cur = std::move(*cache[m]);
          for (auto& c : cache) c.reset();
          accepted_in_step = true;
          te.accepted = true;
          if (cur.cost.total < best.cost.total) best = cur;
        }
      }
      te.cost = cur.cost.total;
      te.wl_norm = cur.cost.wl_norm;
      te.score_norm = cur.cost.score_norm;
      res.trace.push_back(std::move(te));

      if (++in_step == per_temp) {
        in_step = 0;
        temp *= cfg.cooling;
        res.temperatures.push_back(temp);
        cold_steps = accepted_in_step ? 0 : cold_steps + 1;
        accepted_in_step = false;
        if (temp < t_min || cold_steps >= 3) break;
        order = macro_order(cur.grid, cur.map, fp, cur.origins, movable, cfg.fov_depth_px);
        cursor = 0;
      }
    }
  }

  // Report the best placement with a fresh labeling so the wasted count
  // reflects the final layout.
  Evaluation fin = evaluate(fp, nets, best.origins, cfg, nullptr, nullptr);
  fin.cost = cost(fin.wl, fin.score, wl0, score0, cfg.alpha, cfg.beta);
  res.final_origins = fin.origins;
  res.refined = apply_origins(fp, fin.origins);
  res.final = cfg.rescore_every == 1 ? best.cost : fin.cost;
  res.wl_final = fin.wl;
  res.score_final = fin.score;
  res.wasted_after = fin.parsed.wasted_pixels();
  res.timing.annealing_s = detail::seconds_since(t_start);
  return res;
}

}  // namespace wisp
