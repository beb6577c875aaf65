#include "chemdist/effective_radius.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chemdist/errors.hpp"
#include "chemdist/union_find.hpp"

namespace chemdist {

std::string to_string(RadiusMethod m) { return m == RadiusMethod::PerPath ? "per_path" : "good_box"; }

RadiusRecord empirical_radius(const ConfigView& cfg, const PathRep& gamma, const EdgeId& e, Coord n_max) {
  RadiusRecord rec;
  rec.edge = e;
  rec.method = RadiusMethod::PerPath;
  rec.n_max = n_max > 0 ? n_max : cfg.params().radius_cap();
  rec.reason = "exhausted";
  for (Coord N = 1; N <= rec.n_max; ++N) {
    const BypassAttempt at = attempt_bypass(cfg, gamma, e, N);
    if (at.status == AttemptStatus::Ok) {
      rec.N = N;
      rec.witness = at.result.connector;
      rec.reason.clear();
      return rec;
    }
    if (is_terminal(at.status)) {
      rec.reason = to_string(at.status);
      return rec;
    }
  }
  return rec;
}

namespace {

// Lambda_R(center) with its open edges copied into a dense local array.
class LocalGrid {
 public:
  LocalGrid(const ConfigView& cfg, const Point& center, Coord R) : d_(center.dim()), R_(R), side_(2 * R + 1) {
    const Lattice& dom = cfg.lattice();
    if (!dom.contains(BoxSpec{center, R})) throw Error(ErrorKind::OutOfBox, "local box leaves the domain");
    std::int64_t s = 1;
    for (int a = d_ - 1; a >= 0; --a) {
      stride_[a] = s;
      s *= side_;
    }
    V_ = s;
    coords_.resize(static_cast<std::size_t>(V_ * d_));
    rad_.resize(static_cast<std::size_t>(V_));
    open_.assign(static_cast<std::size_t>(V_ * d_), 0);
    Point corner = center;
    for (int a = 0; a < d_; ++a) corner[a] -= R;
    const std::int64_t base = dom.vertex_index(corner);
    std::array<Coord, kMaxDim> c{};
    for (std::int64_t v = 0; v < V_; ++v) {
      std::int64_t dv = base;
      Coord r = 0;
      for (int a = 0; a < d_; ++a) {
        coords_[static_cast<std::size_t>(v * d_ + a)] = c[a];
        dv += c[a] * dom.stride(a);
        r = std::max(r, static_cast<Coord>(std::abs(c[a] - R_)));
      }
      rad_[static_cast<std::size_t>(v)] = r;
      for (int a = 0; a < d_; ++a)
        if (c[a] < side_ - 1 && cfg.open_slot(dv * d_ + a)) open_[static_cast<std::size_t>(v * d_ + a)] = 1;
      for (int a = d_ - 1; a >= 0; --a) {
        if (++c[a] < side_) break;
        c[a] = 0;
      }
    }
  }

  int d() const { return d_; }
  Coord R() const { return R_; }
  Coord side() const { return side_; }
  std::int64_t V() const { return V_; }
  std::int64_t stride(int a) const { return stride_[a]; }
  Coord coord(std::int64_t v, int a) const { return coords_[static_cast<std::size_t>(v * d_ + a)]; }
  Coord rad(std::int64_t v) const { return rad_[static_cast<std::size_t>(v)]; }
  bool open_plus(std::int64_t v, int a) const { return open_[static_cast<std::size_t>(v * d_ + a)]; }
  bool open_minus(std::int64_t v, int a) const {
    return coord(v, a) > 0 && open_[static_cast<std::size_t>((v - stride_[a]) * d_ + a)];
  }
  Coord dist_inf(std::int64_t u, std::int64_t v) const {
    Coord r = 0;
    for (int a = 0; a < d_; ++a) r = std::max(r, static_cast<Coord>(std::abs(coord(u, a) - coord(v, a))));
    return r;
  }

  template <class F>
  void for_open_neighbors(std::int64_t v, F&& f) const {
    for (int a = 0; a < d_; ++a) {
      if (open_minus(v, a)) f(v - stride_[a]);
      if (open_plus(v, a)) f(v + stride_[a]);
    }
  }

  // Union-find over open edges whose endpoints both satisfy keep.
  template <class Keep>
  std::vector<std::int32_t> components(Keep&& keep) const {
    UnionFind uf(static_cast<std::size_t>(V_));
    for (std::int64_t v = 0; v < V_; ++v) {
      if (!keep(v)) continue;
      for (int a = 0; a < d_; ++a)
        if (open_plus(v, a) && keep(v + stride_[a]))
          uf.unite(static_cast<std::int32_t>(v), static_cast<std::int32_t>(v + stride_[a]));
    }
    std::vector<std::int32_t> root(static_cast<std::size_t>(V_));
    for (std::int64_t v = 0; v < V_; ++v) root[static_cast<std::size_t>(v)] = uf.find(static_cast<std::int32_t>(v));
    return root;
  }

  // Calls f(u) for every grid vertex u with lo <= u <= hi coordinatewise,
  // after clipping to the grid.
  template <class F>
  void for_range(std::array<Coord, kMaxDim> lo, std::array<Coord, kMaxDim> hi, F&& f) const {
    std::array<Coord, kMaxDim> c{};
    for (int a = 0; a < d_; ++a) {
      lo[a] = std::max<Coord>(0, lo[a]);
      hi[a] = std::min<Coord>(side_ - 1, hi[a]);
      if (lo[a] > hi[a]) return;
      c[a] = lo[a];
    }
    while (true) {
      std::int64_t u = 0;
      for (int a = 0; a < d_; ++a) u += c[a] * stride_[a];
      f(u);
      int a = d_ - 1;
      for (; a >= 0; --a) {
        if (++c[a] <= hi[a]) break;
        c[a] = lo[a];
      }
      if (a < 0) break;
    }
  }

  // Calls f(u) for every grid vertex u with |u - v|_inf <= r.
  template <class F>
  void for_window(std::int64_t v, Coord r, F&& f) const {
    std::array<Coord, kMaxDim> lo{}, hi{};
    for (int a = 0; a < d_; ++a) {
      lo[a] = coord(v, a) - r;
      hi[a] = coord(v, a) + r;
    }
    for_range(lo, hi, f);
  }

 private:
  int d_;
  Coord R_, side_;
  std::array<std::int64_t, kMaxDim> stride_{};
  std::int64_t V_ = 0;
  std::vector<Coord> coords_;
  std::vector<Coord> rad_;
  std::vector<std::uint8_t> open_;
};

// Breadth-first search reusing its buffers across sources.
class Bfs {
 public:
  explicit Bfs(std::int64_t V) : dist_(static_cast<std::size_t>(V)), mark_(static_cast<std::size_t>(V), 0) {}

  // visit(u) is called once per reached vertex other than the source and
  // returns true to stop. Vertices at depth cap are not expanded.
  template <class Inside, class Visit>
  void run(const LocalGrid& g, std::int64_t src, std::int32_t cap, Inside&& inside, Visit&& visit) {
    ++epoch_;
    queue_.clear();
    queue_.push_back(src);
    mark_[static_cast<std::size_t>(src)] = epoch_;
    dist_[static_cast<std::size_t>(src)] = 0;
    for (std::size_t head = 0; head < queue_.size(); ++head) {
      const std::int64_t v = queue_[head];
      const std::int32_t dv = dist_[static_cast<std::size_t>(v)];
      if (dv >= cap) continue;
      bool stop = false;
      g.for_open_neighbors(v, [&](std::int64_t u) {
        if (stop || mark_[static_cast<std::size_t>(u)] == epoch_ || !inside(u)) return;
        mark_[static_cast<std::size_t>(u)] = epoch_;
        dist_[static_cast<std::size_t>(u)] = dv + 1;
        queue_.push_back(u);
        stop = visit(u);
      });
      if (stop) return;
    }
  }

  bool reached(std::int64_t u) const { return mark_[static_cast<std::size_t>(u)] == epoch_; }
  std::int32_t dist(std::int64_t u) const { return dist_[static_cast<std::size_t>(u)]; }

 private:
  std::vector<std::int32_t> dist_;
  std::vector<std::uint32_t> mark_;
  std::vector<std::int64_t> queue_;
  std::uint32_t epoch_ = 0;
};

// Crossing-cluster condition on every sub-box x + [0,m]^d of Lambda_3N.
// Returns the roots (in comps) of clusters containing a crossing cluster of
// every sub-box.
std::vector<std::int32_t> crossing_candidates(const LocalGrid& g, const std::vector<std::int32_t>& comps, Coord N,
                                              Coord m) {
  const int d = g.d();
  const Coord lo = g.R() - 3 * N, hi = g.R() + 3 * N - m;
  const Coord w = m + 1;
  std::int64_t sub_v = 1;
  std::array<std::int64_t, kMaxDim> sub_stride{};
  for (int a = d - 1; a >= 0; --a) {
    sub_stride[a] = sub_v;
    sub_v *= w;
  }
  UnionFind uf;
  std::vector<std::uint32_t> faces;
  std::vector<std::int32_t> candidates, here;
  bool first = true;
  const std::uint32_t all = (1U << (2 * d)) - 1;
  std::array<Coord, kMaxDim> corner{};
  for (int a = 0; a < d; ++a) corner[a] = lo;
  while (true) {
    std::int64_t base = 0;
    for (int a = 0; a < d; ++a) base += corner[a] * g.stride(a);
    uf.reset(static_cast<std::size_t>(sub_v));
    faces.assign(static_cast<std::size_t>(sub_v), 0);
    std::array<Coord, kMaxDim> s{};
    for (std::int64_t sv = 0; sv < sub_v; ++sv) {
      std::int64_t v = base;
      for (int a = 0; a < d; ++a) v += s[a] * g.stride(a);
      for (int a = 0; a < d; ++a)
        if (s[a] < m && g.open_plus(v, a))
          uf.unite(static_cast<std::int32_t>(sv), static_cast<std::int32_t>(sv + sub_stride[a]));
      for (int a = d - 1; a >= 0; --a) {
        if (++s[a] < w) break;
        s[a] = 0;
      }
    }
    here.clear();
    s = {};
    for (std::int64_t sv = 0; sv < sub_v; ++sv) {
      std::uint32_t bits = 0;
      for (int a = 0; a < d; ++a) {
        if (s[a] == 0) bits |= 1U << (2 * a);
        if (s[a] == m) bits |= 1U << (2 * a + 1);
      }
      if (bits) {
        const auto r = static_cast<std::size_t>(uf.find(static_cast<std::int32_t>(sv)));
        faces[r] |= bits;
        if (faces[r] == all) {
          std::int64_t v = base;
          for (int a = 0; a < d; ++a) v += s[a] * g.stride(a);
          here.push_back(comps[static_cast<std::size_t>(v)]);
          faces[r] |= 1U << 31;  // counted once
        }
      }
      for (int a = d - 1; a >= 0; --a) {
        if (++s[a] < w) break;
        s[a] = 0;
      }
    }
    std::sort(here.begin(), here.end());
    here.erase(std::unique(here.begin(), here.end()), here.end());
    if (first) {
      candidates = here;
      first = false;
    } else {
      std::vector<std::int32_t> keep;
      std::set_intersection(candidates.begin(), candidates.end(), here.begin(), here.end(), std::back_inserter(keep));
      candidates.swap(keep);
    }
    if (candidates.empty()) return candidates;
    int a = d - 1;
    for (; a >= 0; --a) {
      if (++corner[a] <= hi) break;
      corner[a] = lo;
    }
    if (a < 0) break;
  }
  return candidates;
}

// Every pair (x, y) with source(x), target(y), |x - y|_inf <= r and y in the
// component of x (comps) satisfies D_inside(x, y) <= cap. Sources are
// processed in blocks sharing a hub h: D(x,y) <= D(x,h) + D(h,y) certifies
// most pairs, and any pair left uncertified gets an exact search from x.
template <class Source, class Target, class Inside>
bool pairs_within(const LocalGrid& g, Coord r, std::int32_t cap, const std::vector<std::int32_t>& comps,
                  const std::vector<std::int32_t>& comp_size, Source&& source, Target&& target, Inside&& inside) {
  const int d = g.d();
  const Coord s = std::max<Coord>(1, r / 2);
  const Coord nb = (g.side() + s - 1) / s;
  Bfs hub_bfs(g.V()), bfs(g.V());
  std::vector<std::int64_t> members;

  auto exact = [&](std::int64_t x) {
    const std::int32_t root = comps[static_cast<std::size_t>(x)];
    std::int64_t need = 0;
    g.for_window(x, r, [&](std::int64_t u) {
      need += u != x && target(u) && comps[static_cast<std::size_t>(u)] == root;
    });
    if (need == 0) return true;
    bfs.run(g, x, cap, inside, [&](std::int64_t u) {
      if (target(u) && g.dist_inf(u, x) <= r) --need;
      return need == 0;
    });
    return need == 0;
  };

  std::array<Coord, kMaxDim> b{};
  while (true) {
    std::array<Coord, kMaxDim> lo{}, hi{};
    for (int a = 0; a < d; ++a) {
      lo[a] = b[a] * s;
      hi[a] = std::min<Coord>(g.side() - 1, lo[a] + s - 1);
    }
    members.clear();
    std::int64_t hub = -1;
    g.for_range(lo, hi, [&](std::int64_t v) {
      if (!source(v)) return;
      members.push_back(v);
      if (hub < 0 || comp_size[static_cast<std::size_t>(comps[static_cast<std::size_t>(v)])] >
                         comp_size[static_cast<std::size_t>(comps[static_cast<std::size_t>(hub)])])
        hub = v;
    });
    if (hub >= 0) {
      const std::int32_t hroot = comps[static_cast<std::size_t>(hub)];
      hub_bfs.run(g, hub, cap, inside, [](std::int64_t) { return false; });
      std::int32_t a_max = 0;
      for (std::int64_t x : members)
        if (hub_bfs.reached(x)) a_max = std::max(a_max, hub_bfs.dist(x));
      bool block_ok = true;
      std::array<Coord, kMaxDim> wlo{}, whi{};
      for (int a = 0; a < d; ++a) {
        wlo[a] = lo[a] - r;
        whi[a] = hi[a] + r;
      }
      g.for_range(wlo, whi, [&](std::int64_t y) {
        if (block_ok && target(y) && comps[static_cast<std::size_t>(y)] == hroot &&
            (!hub_bfs.reached(y) || hub_bfs.dist(y) > cap - a_max))
          block_ok = false;
      });
      for (std::int64_t x : members) {
        if (block_ok && hub_bfs.reached(x)) continue;
        bool certified = hub_bfs.reached(x);
        if (certified) {
          const std::int32_t ax = hub_bfs.dist(x);
          g.for_window(x, r, [&](std::int64_t y) {
            if (certified && y != x && target(y) && comps[static_cast<std::size_t>(y)] == hroot &&
                (!hub_bfs.reached(y) || ax + hub_bfs.dist(y) > cap))
              certified = false;
          });
        }
        if (!certified && !exact(x)) return false;
      }
    }
    int a = d - 1;
    for (; a >= 0; --a) {
      if (++b[a] < nb) break;
      b[a] = 0;
    }
    if (a < 0) break;
  }
  return true;
}

}  // namespace

bool check_V2(const ConfigView& cfg, const EdgeId& e, Coord N) {
  const LocalGrid g(cfg, e.x_e, 4 * N);
  const Coord r3 = 3 * N;
  auto in3 = [&](std::int64_t v) { return g.rad(v) <= r3; };
  const auto comps = g.components(in3);
  std::vector<std::int32_t> size(static_cast<std::size_t>(g.V()), 0);
  for (std::int64_t v = 0; v < g.V(); ++v)
    if (in3(v)) ++size[static_cast<std::size_t>(comps[static_cast<std::size_t>(v)])];
  const auto cap = static_cast<std::int32_t>(std::floor(cfg.params().c_op() * N));
  Bfs bfs(g.V());
  for (std::int64_t x = 0; x < g.V(); ++x) {
    if (!in3(x)) continue;
    const std::int32_t root = comps[static_cast<std::size_t>(x)];
    std::int64_t need = size[static_cast<std::size_t>(root)] - 1;
    if (need == 0) continue;
    bfs.run(g, x, cap, [](std::int64_t) { return true; }, [&](std::int64_t u) {
      if (in3(u) && comps[static_cast<std::size_t>(u)] == root) --need;
      return need == 0;
    });
    if (need > 0) return false;
  }
  return true;
}

Coord n_rho(const Params& params, Coord N) {
  return static_cast<Coord>(std::floor(static_cast<double>(N) / params.subbox_divisor() + 1e-12));
}

Coord goodbox_min_N(const Params& params) {
  Coord N = 1;
  while (n_rho(params, N) < 1) ++N;
  return N;
}

GoodBoxReport check_goodbox(const ConfigView& cfg, const EdgeId& e, Coord N, bool stop_early) {
  GoodBoxReport rep;
  rep.edge = e;
  rep.N = N;
  rep.n_rho = n_rho(cfg.params(), N);
  if (rep.n_rho < 1)
    throw Error(ErrorKind::RhoTooLargeForN, "N=" + std::to_string(N) + " gives an empty sub-box scale");
  const Coord m = rep.n_rho;
  const LocalGrid g(cfg, e.x_e, 4 * N);
  const Coord r3 = 3 * N;
  auto in3 = [&](std::int64_t v) { return g.rad(v) <= r3; };
  const auto comps3 = g.components(in3);

  // (i) one cluster of Lambda_3N holds a crossing cluster of every sub-box.
  const auto candidates = crossing_candidates(g, comps3, N, m);
  rep.crossing = !candidates.empty();
  if (stop_early && !rep.crossing) {
    rep.complete = false;
    return rep;
  }

  // (iv) surrogate: clusters of Lambda_3N other than C have diameter < m.
  {
    const int d = g.d();
    std::vector<Coord> lo(static_cast<std::size_t>(g.V() * d), 0), hi(static_cast<std::size_t>(g.V() * d), 0);
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(g.V()), 0);
    for (std::int64_t v = 0; v < g.V(); ++v) {
      if (!in3(v)) continue;
      const auto r = static_cast<std::size_t>(comps3[static_cast<std::size_t>(v)]);
      for (int a = 0; a < d; ++a) {
        const Coord c = g.coord(v, a);
        if (!seen[r] || c < lo[r * d + a]) lo[r * d + a] = c;
        if (!seen[r] || c > hi[r * d + a]) hi[r * d + a] = c;
      }
      seen[r] = 1;
    }
    // Any candidate may serve as C; big clusters outside the candidate set
    // fail, and two big candidates cannot both be excused.
    std::vector<std::int32_t> big;
    for (std::int64_t v = 0; v < g.V(); ++v) {
      const auto r = static_cast<std::size_t>(v);
      if (!seen[r]) continue;
      Coord diam = 0;
      for (int a = 0; a < d; ++a) diam = std::max(diam, hi[r * d + a] - lo[r * d + a]);
      if (diam >= m) big.push_back(static_cast<std::int32_t>(v));
    }
    rep.small_clusters =
        big.empty() ||
        (big.size() == 1 && std::binary_search(candidates.begin(), candidates.end(), big.front()));
  }
  if (stop_early && !rep.small_clusters) {
    rep.complete = false;
    return rep;
  }

  const auto cap = static_cast<std::int32_t>(std::floor(4.0 * cfg.params().rho * m + 1e-9));
  const auto comps4 = g.components([](std::int64_t) { return true; });
  std::vector<std::int32_t> size4(static_cast<std::size_t>(g.V()), 0);
  for (std::int32_t r : comps4) ++size4[static_cast<std::size_t>(r)];

  // (iii) pairs in the middle band of A_N(e), joined inside Lambda_4N(e),
  // are within 4 rho m of each other inside A_N(e).
  auto in_annulus = [&](std::int64_t v) { return g.rad(v) > N && g.rad(v) <= r3; };
  auto in_band = [&](std::int64_t v) { return 2 * g.rad(v) >= 3 * N && 2 * g.rad(v) <= 5 * N; };
  rep.annulus_distances = pairs_within(g, 2 * m, cap, comps4, size4, in_band, in_band, in_annulus);
  if (stop_early && !rep.annulus_distances) {
    rep.complete = false;
    return rep;
  }

  // (ii) pairs of Lambda_3N(e) at l-inf distance <= 2m, joined inside
  // Lambda_4N(e), are within 4 rho m of each other inside Lambda_4N(e).
  rep.local_distances = pairs_within(g, 2 * m, cap, comps4, size4, in3, in3, [](std::int64_t) { return true; });
  if (stop_early && !rep.local_distances) rep.complete = false;
  return rep;
}

RadiusRecord goodbox_radius(const ConfigView& cfg, const EdgeId& e, Coord n_max) {
  RadiusRecord rec;
  rec.edge = e;
  rec.method = RadiusMethod::GoodBox;
  rec.n_max = n_max > 0 ? n_max : cfg.params().radius_cap();
  rec.reason = "exhausted";
  for (Coord N = goodbox_min_N(cfg.params()); N <= rec.n_max; ++N) {
    if (!cfg.lattice().contains(BoxSpec{e.x_e, 4 * N})) {
      rec.reason = "out_of_domain";
      return rec;
    }
    if (check_goodbox(cfg, e, N, true).good()) {
      rec.N = N;
      rec.reason.clear();
      return rec;
    }
  }
  return rec;
}

std::vector<RadiusRecord> radius_field(const ConfigView& cfg, const std::vector<EdgeId>& edges, RadiusMethod mode,
                                       const PathRep* gamma, Coord n_max) {
  if (mode == RadiusMethod::PerPath && !gamma)
    throw Error(ErrorKind::PreconditionViolated, "per-path radii need the path");
  std::vector<RadiusRecord> out;
  out.reserve(edges.size());
  for (const EdgeId& e : edges)
    out.push_back(mode == RadiusMethod::PerPath ? empirical_radius(cfg, *gamma, e, n_max)
                                                : goodbox_radius(cfg, e, n_max));
  return out;
}

std::vector<SurvivalRow> survival_curve(const std::vector<RadiusRecord>& records, Coord t_from, Coord t_to) {
  std::vector<SurvivalRow> rows;
  const RadiusMethod method = records.empty() ? RadiusMethod::GoodBox : records.front().method;
  for (Coord t = t_from; t <= t_to; ++t) {
    SurvivalRow row;
    row.method = method;
    row.t = t;
    row.total = static_cast<std::int64_t>(records.size());
    for (const RadiusRecord& r : records) row.survivors += !r.N || *r.N >= t;
    rows.push_back(row);
  }
  return rows;
}

std::string survival_csv(const std::vector<SurvivalRow>& rows) {
  std::ostringstream os;
  os << "method,t,survivors,total\n";
  for (const SurvivalRow& r : rows) os << to_string(r.method) << ',' << r.t << ',' << r.survivors << ',' << r.total << '\n';
  return os.str();
}

}  // namespace chemdist
