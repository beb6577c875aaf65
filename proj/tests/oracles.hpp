#pragma once

// Independent brute-force references used by the unit and acceptance tests.

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "chemdist/lattice.hpp"
#include "chemdist/percolation.hpp"
#include "chemdist/shortest_paths.hpp"

namespace oracle {

using namespace chemdist;

struct PathMinima {
  std::map<Point, std::int64_t> D;  // absent: no open path
  std::map<Point, PassagePair> T;
};

// Minimizes over every self-avoiding path from src inside the vertex set U.
inline PathMinima all_paths(const ConfigView& cfg, const std::vector<Point>& U, const Point& src) {
  const std::set<Point> inside(U.begin(), U.end());
  const double W = cfg.W();
  PathMinima out;
  std::set<Point> on_path{src};
  struct Walker {
    const ConfigView& cfg;
    const std::set<Point>& inside;
    std::set<Point>& on_path;
    PathMinima& out;
    double W;
    void go(const Point& v, std::int64_t open_len, bool all_open, PassagePair cost) {
      if (all_open) {
        auto it = out.D.find(v);
        if (it == out.D.end() || open_len < it->second) out.D[v] = open_len;
      }
      auto jt = out.T.find(v);
      if (jt == out.T.end() || compare(cost, jt->second, W) < 0) out.T[v] = cost;
      for (int i = 0; i < v.dim(); ++i)
        for (int s = -1; s <= 1; s += 2) {
          Point u = v;
          u[i] += s;
          if (!inside.count(u) || on_path.count(u)) continue;
          const bool open = cfg.open(v, u);
          on_path.insert(u);
          go(u, open_len + 1, all_open && open, cost + (open ? PassagePair{1, 0} : PassagePair{0, 1}));
          on_path.erase(u);
        }
    }
  } walker{cfg, inside, on_path, out, W};
  walker.go(src, 0, true, PassagePair{});
  return out;
}

// Open-edge BFS inside the vertex set U.
inline std::map<Point, std::int64_t> bfs(const ConfigView& cfg, const std::set<Point>& U, const Point& src) {
  std::map<Point, std::int64_t> dist{{src, 0}};
  std::vector<Point> frontier{src};
  for (std::size_t i = 0; i < frontier.size(); ++i) {
    const Point v = frontier[i];
    for (int a = 0; a < v.dim(); ++a)
      for (int s = -1; s <= 1; s += 2) {
        Point u = v;
        u[a] += s;
        if (!U.count(u) || dist.count(u) || !cfg.open(v, u)) continue;
        dist[u] = dist[v] + 1;
        frontier.push_back(u);
      }
  }
  return dist;
}

inline std::set<Point> ball(const Point& c, Coord lo, Coord hi) {
  std::set<Point> out;
  for (const Point& v : box_points(BoxSpec{c, hi}))
    if (dist_inf(v, c) >= lo) out.insert(v);
  return out;
}

// All pairs of Lambda_3N(e) joined inside it are within floor(c N) inside Lambda_4N(e).
inline bool V2(const ConfigView& cfg, const EdgeId& e, Coord N) {
  const auto U3 = ball(e.x_e, 0, 3 * N), U4 = ball(e.x_e, 0, 4 * N);
  const auto cap = static_cast<std::int64_t>(std::floor(cfg.params().c_op() * N));
  for (const Point& x : U3) {
    const auto d3 = bfs(cfg, U3, x), d4 = bfs(cfg, U4, x);
    for (const auto& [y, dy] : d3)
      if (d4.at(y) > cap) return false;
  }
  return true;
}

struct GoodBox {
  bool crossing = false, local = false, annulus = false, small = false;
};

// The four good-box properties at scale N with sub-box side m.
inline GoodBox goodbox(const ConfigView& cfg, const EdgeId& e, Coord N, Coord m) {
  const Point& c = e.x_e;
  const int d = c.dim();
  const auto U3 = ball(c, 0, 3 * N), U4 = ball(c, 0, 4 * N), A = ball(c, N + 1, 3 * N);
  std::map<Point, int> comp;
  int ncomp = 0;
  for (const Point& v : U3)
    if (!comp.count(v)) {
      for (const auto& [u, du] : bfs(cfg, U3, v)) comp[u] = ncomp;
      ++ncomp;
    }
  GoodBox out;

  std::set<int> cand;
  for (int i = 0; i < ncomp; ++i) cand.insert(i);
  for (const Point& corner : U3) {
    bool fits = true;
    for (int a = 0; a < d; ++a) fits = fits && corner[a] + m <= c[a] + 3 * N;
    if (!fits) continue;
    std::set<Point> sub;
    for (const Point& v : U3) {
      bool in = true;
      for (int a = 0; a < d; ++a) in = in && v[a] >= corner[a] && v[a] <= corner[a] + m;
      if (in) sub.insert(v);
    }
    std::set<int> here;
    std::set<Point> done;
    for (const Point& v : sub) {
      if (done.count(v)) continue;
      std::set<int> faces;
      for (const auto& [u, du] : bfs(cfg, sub, v)) {
        done.insert(u);
        for (int a = 0; a < d; ++a) {
          if (u[a] == corner[a]) faces.insert(2 * a);
          if (u[a] == corner[a] + m) faces.insert(2 * a + 1);
        }
      }
      if (static_cast<int>(faces.size()) == 2 * d) here.insert(comp.at(v));
    }
    std::set<int> keep;
    for (int i : cand)
      if (here.count(i)) keep.insert(i);
    cand.swap(keep);
  }
  out.crossing = !cand.empty();

  std::vector<int> big;
  for (int i = 0; i < ncomp; ++i) {
    Coord diam = 0;
    for (int a = 0; a < d; ++a) {
      Coord lo = 0, hi = 0;
      bool first = true;
      for (const auto& [v, k] : comp)
        if (k == i) {
          lo = first ? v[a] : std::min(lo, v[a]);
          hi = first ? v[a] : std::max(hi, v[a]);
          first = false;
        }
      diam = std::max(diam, hi - lo);
    }
    if (diam >= m) big.push_back(i);
  }
  out.small = big.empty() || (big.size() == 1 && cand.count(big[0]));

  const auto cap = static_cast<std::int64_t>(std::floor(4.0 * cfg.params().rho * m + 1e-9));
  auto in_band = [&](const Point& v) {
    const Coord r = dist_inf(v, c);
    return 2 * r >= 3 * N && 2 * r <= 5 * N;
  };
  out.local = out.annulus = true;
  for (const Point& x : U3) {
    const auto d4 = bfs(cfg, U4, x);
    const auto dA = in_band(x) ? bfs(cfg, A, x) : std::map<Point, std::int64_t>{};
    for (const auto& [y, dy] : d4) {
      if (dist_inf(x, y) > 2 * m) continue;
      if (U3.count(y) && dy > cap) out.local = false;
      if (in_band(x) && in_band(y)) {
        const auto it = dA.find(y);
        if (it == dA.end() || it->second > cap) out.annulus = false;
      }
    }
  }
  return out;
}

// Maximum number of marked edges over every self-avoiding path with at most L
// edges inside Lambda_L(0), by plain enumeration from every start.
inline std::int64_t animal_max(const std::function<bool(const Point&, const Point&)>& marked, int d, Coord L) {
  const auto pts = box_points(BoxSpec{Point(d), L});
  const std::set<Point> inside(pts.begin(), pts.end());
  std::set<Point> on_path;
  std::int64_t best = 0;
  std::function<void(const Point&, Coord, std::int64_t)> go = [&](const Point& v, Coord steps, std::int64_t value) {
    best = std::max(best, value);
    if (steps == L) return;
    for (int a = 0; a < d; ++a)
      for (int s = -1; s <= 1; s += 2) {
        Point u = v;
        u[a] += s;
        if (!inside.count(u) || on_path.count(u)) continue;
        on_path.insert(u);
        go(u, steps + 1, value + (marked(v, u) ? 1 : 0));
        on_path.erase(u);
      }
  };
  for (const Point& s : pts) {
    on_path = {s};
    go(s, 0, 0);
  }
  return best;
}

}  // namespace oracle
