#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace wisp {

/// Raised for every recoverable failure in the library. `what()` carries a
/// human-readable message; callers that need to branch on the failure use
/// the more specific subclasses below.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
  ParseError(const std::string& msg, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
  int line() const { return line_; }

private:
  int line_ = 0;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Axis-aligned rectangle given by its lower-left corner and size.
struct Rect {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double xl() const { return x; }
  double yl() const { return y; }
  double xh() const { return x + w; }
  double yh() const { return y + h; }
  double area() const { return w * h; }
  Point center() const { return {x + 0.5 * w, y + 0.5 * h}; }

  // Half-open containment, used for pixel-center classification.
  bool contains_half_open(Point p) const { return p.x >= xl() && p.x < xh() && p.y >= yl() && p.y < yh(); }

  // Open-interior overlap: rectangles that merely touch do not overlap.
  bool overlaps(const Rect& o) const { return xl() < o.xh() && o.xl() < xh() && yl() < o.yh() && o.yl() < yh(); }

  double overlap_area(const Rect& o) const {
    const double ox = std::min(xh(), o.xh()) - std::max(xl(), o.xl());
    const double oy = std::min(yh(), o.yh()) - std::max(yl(), o.yl());
    return (ox > 0 && oy > 0) ? ox * oy : 0.0;
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

/// Shoelace signed area; positive for counter-clockwise vertex order.
inline double signed_area(const std::vector<Point>& v) {
  double a = 0.0;
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = v[i];
    const Point& q = v[(i + 1) % n];
    a += p.x * q.y - q.x * p.y;
  }
  return 0.5 * a;
}

/// Closed axis-aligned polygon with counter-clockwise vertices. Construction
/// validates the rectilinear invariants and normalizes orientation.
class RectilinearOutline {
public:
  RectilinearOutline() = default;

  explicit RectilinearOutline(std::vector<Point> vertices) : vertices_(std::move(vertices)) {
    validate_and_normalize();
  }

  static RectilinearOutline rectangle(double x, double y, double w, double h) {
    return RectilinearOutline({{x, y}, {x + w, y}, {x + w, y + h}, {x, y + h}});
  }

  const std::vector<Point>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  bool empty() const { return vertices_.empty(); }

  double area() const { return signed_area(vertices_); }

  Rect bbox() const {
    if (vertices_.empty()) return {};
    double x0 = vertices_[0].x, x1 = x0, y0 = vertices_[0].y, y1 = y0;
    for (const auto& p : vertices_) {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
    return {x0, y0, x1 - x0, y1 - y0};
  }

  // Edge i runs from vertex i to vertex i+1 (wrapping).
  std::pair<Point, Point> edge(std::size_t i) const { return {vertices_[i], vertices_[(i + 1) % vertices_.size()]}; }

  /// Even-odd ray cast towards +x. Points exactly on a boundary resolve by
  /// the half-open crossing rule.
  bool contains(Point p) const {
    bool inside = false;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Point& a = vertices_[i];
      const Point& b = vertices_[j];
      if ((a.y > p.y) != (b.y > p.y)) {
        const double xc = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
        if (p.x < xc) inside = !inside;
      }
    }
    return inside;
  }

  /// Closed containment of a rectangle: no boundary edge passes through the
  /// open interior of `r`, and the center of `r` lies inside.
  bool contains(const Rect& r) const {
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
      auto [a, b] = edge(i);
      if (a.x == b.x) {
        const double lo = std::min(a.y, b.y), hi = std::max(a.y, b.y);
        if (a.x > r.xl() && a.x < r.xh() && lo < r.yh() && hi > r.yl()) return false;
      } else {
        const double lo = std::min(a.x, b.x), hi = std::max(a.x, b.x);
        if (a.y > r.yl() && a.y < r.yh() && lo < r.xh() && hi > r.xl()) return false;
      }
    }
    const Point c = r.center();
    return contains(c) || on_boundary(c);
  }

  bool on_boundary(Point p) const {
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
      auto [a, b] = edge(i);
      if (a.x == b.x) {
        if (p.x == a.x && p.y >= std::min(a.y, b.y) && p.y <= std::max(a.y, b.y)) return true;
      } else if (p.y == a.y && p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x)) {
        return true;
      }
    }
    return false;
  }

  /// Number of 270-degree (reflex) corners; 0 for a rectangle, 1 for an
  /// L-shape, 2 for a Z-shape.
  int reflex_corners() const {
    int count = 0;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& p = vertices_[(i + n - 1) % n];
      const Point& q = vertices_[i];
      const Point& r = vertices_[(i + 1) % n];
      const double cross = (q.x - p.x) * (r.y - q.y) - (q.y - p.y) * (r.x - q.x);
      if (cross < 0) ++count;
    }
    return count;
  }

private:
  void validate_and_normalize() {
    const std::size_t n = vertices_.size();
    if (n < 2) throw ParseError("outline needs at least 4 vertices");
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = vertices_[i];
      const Point& b = vertices_[(i + 1) % n];
      const bool dx = a.x != b.x;
      const bool dy = a.y != b.y;
      if (dx && dy) throw ParseError("non-axis-aligned edge at outline vertex " + std::to_string(i));
      if (!dx && !dy) throw ParseError("repeated outline vertex " + std::to_string(i));
    }
    if (n < 4) throw ParseError("outline needs at least 4 vertices");
    // Consecutive edges must alternate orientation, otherwise a vertex is
    // collinear (180 degrees) or folds back (0 degrees).
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = vertices_[i];
      const Point& b = vertices_[(i + 1) % n];
      const Point& c = vertices_[(i + 2) % n];
      if ((a.x == b.x) == (b.x == c.x)) {
        throw ParseError("outline corner at vertex " + std::to_string((i + 1) % n) + " is not a right angle");
      }
    }
    if (n % 2 != 0) throw ParseError("outline must have an even number of vertices");
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 2; j < n; ++j) {
        if (i == 0 && j == n - 1) continue;
        if (segments_touch(edge(i), edge(j))) throw ParseError("self-intersecting outline");
      }
    }
    const double a = signed_area(vertices_);
    if (a == 0.0) throw ParseError("degenerate outline (zero area)");
    if (a < 0) std::reverse(vertices_.begin(), vertices_.end());
  }

  static bool segments_touch(std::pair<Point, Point> s, std::pair<Point, Point> t) {
    const double sx0 = std::min(s.first.x, s.second.x), sx1 = std::max(s.first.x, s.second.x);
    const double sy0 = std::min(s.first.y, s.second.y), sy1 = std::max(s.first.y, s.second.y);
    const double tx0 = std::min(t.first.x, t.second.x), tx1 = std::max(t.first.x, t.second.x);
    const double ty0 = std::min(t.first.y, t.second.y), ty1 = std::max(t.first.y, t.second.y);
    return sx0 <= tx1 && tx0 <= sx1 && sy0 <= ty1 && ty0 <= sy1;
  }

  std::vector<Point> vertices_;
};

}  // namespace wisp
