#pragma once

#include <functional>
#include <vector>

#include "chemdist/percolation.hpp"
#include "chemdist/path.hpp"

namespace fixture {

using namespace chemdist;

inline Params params(std::uint64_t seed, double p, int n, int d = 2) {
  Params pr;
  pr.seed = seed;
  pr.p = p;
  pr.n = n;
  pr.d = d;
  if (d >= 3) pr.c_star_op = 100;
  return pr;
}

inline EdgeConfig all(bool open, int n, int d = 2) {
  return make_config(params(1, 0.7, n, d), [open](const EdgeId&) { return open; });
}

inline Point pt(Coord x, Coord y) { return Point{x, y}; }

inline EdgeId edge(const EdgeConfig& cfg, const Point& a, const Point& b) { return cfg.lattice().canonical_edge(a, b); }

// Straight horizontal path from (x0, y) to (x1, y).
inline PathRep row(Coord x0, Coord x1, Coord y = 0) {
  std::vector<Point> v;
  const Coord s = x1 >= x0 ? 1 : -1;
  for (Coord x = x0;; x += s) {
    v.push_back(pt(x, y));
    if (x == x1) break;
  }
  return PathRep(std::move(v));
}

// Polyline through the given corners, each leg axis-parallel.
inline PathRep polyline(const std::vector<Point>& corners) {
  std::vector<Point> v{corners.front()};
  for (std::size_t i = 1; i < corners.size(); ++i) {
    Point cur = v.back();
    const Point& to = corners[i];
    for (int a = 0; a < cur.dim(); ++a)
      while (cur[a] != to[a]) {
        cur[a] += to[a] > cur[a] ? 1 : -1;
        v.push_back(cur);
      }
  }
  return PathRep(std::move(v));
}

// Copy of cfg with every edge outside keep flipped.
inline EdgeConfig flip_outside(const EdgeConfig& cfg, const BoxSpec& keep) {
  return make_config(cfg.params(), [&](const EdgeId& e) {
    const bool inside = keep.contains(e.x_e) && keep.contains(e.y_e);
    return inside ? cfg.open(e) : !cfg.open(e);
  });
}

}  // namespace fixture
