#include "chemdist/shortest_paths.hpp"

#include <algorithm>
#include <deque>

#include "chemdist/errors.hpp"
#include "chemdist/union_find.hpp"

namespace chemdist {

namespace {

// Walks local grid coordinates alongside the matching domain vertex index.
struct GridMap {
  const Lattice& grid;
  const Lattice& dom;
  int d;
  std::int64_t base;  // domain index of the grid's lowest corner

  GridMap(const Lattice& g, const Lattice& dm) : grid(g), dom(dm), d(g.dim()) {
    Point corner = g.box().center;
    for (int i = 0; i < d; ++i) corner[i] -= g.radius();
    base = dm.vertex_index(corner);
  }

  std::int64_t domain_index(std::int64_t lv, std::array<Coord, kMaxDim>& c) const {
    std::int64_t dv = base;
    for (int i = 0; i < d; ++i) {
      c[i] = grid.digit(lv, i);
      dv += c[i] * dom.stride(i);
    }
    return dv;
  }
};

// Neighbors in lexicographic order: v-e1, ..., v-ed, v+ed, ..., v+e1.
template <class F>
void for_neighbors_lex(const Point& v, F&& f) {
  const int d = v.dim();
  for (int i = 0; i < d; ++i) {
    Point u = v;
    --u[i];
    if (f(u)) return;
  }
  for (int i = d - 1; i >= 0; --i) {
    Point u = v;
    ++u[i];
    if (f(u)) return;
  }
}

}  // namespace

FieldBase::FieldBase(const ConfigView& view, Region region)
    : view_(view), region_(std::move(region)) {
  if (!view_.lattice().contains(region_.box))
    throw Error(ErrorKind::OutOfBox, "search region leaves the simulation domain");
  grid_ = Lattice(region_.box);
  const auto V = static_cast<std::size_t>(grid_.vertex_count());
  if (!region_.hole && !region_.filter) {
    mask_.assign(V, 1);
  } else {
    mask_.assign(V, 0);
    for (std::size_t i = 0; i < V; ++i)
      mask_[i] = region_.contains(grid_.vertex_at(static_cast<std::int64_t>(i))) ? 1 : 0;
  }
}

std::optional<std::int64_t> DistanceField::distance(const Point& v) const {
  if (!in_region(v)) return std::nullopt;
  const std::int32_t d = dist_[static_cast<std::size_t>(local(v))];
  if (d < 0) return std::nullopt;
  return d;
}

std::optional<Point> DistanceField::predecessor(const Point& v) const {
  const auto dv = distance(v);
  if (!dv || *dv == 0) return std::nullopt;
  std::optional<Point> out;
  for_neighbors_lex(v, [&](const Point& u) {
    const auto du = distance(u);
    if (du && *du == *dv - 1 && view_.open(u, v)) {
      out = u;
      return true;
    }
    return false;
  });
  return out;
}

DistanceField bfs_distance(const ConfigView& cfg, const Region& U, std::span<const Point> sources,
                           const SearchLimit& limit) {
  if (sources.empty()) throw Error(ErrorKind::EmptySources, "bfs_distance");
  DistanceField f(cfg, U);
  const Lattice& dom = cfg.lattice();
  const int d = dom.dim();
  const GridMap map(f.grid_, dom);
  const auto V = static_cast<std::size_t>(f.grid_.vertex_count());
  f.dist_.assign(V, -1);
  std::vector<std::int64_t> queue;
  for (const Point& s : sources) {
    if (!f.in_region(s)) throw Error(ErrorKind::OutOfBox, "source outside U: " + s.str());
    const auto ls = static_cast<std::size_t>(f.local(s));
    if (f.dist_[ls] < 0) {
      f.dist_[ls] = 0;
      queue.push_back(static_cast<std::int64_t>(ls));
    }
    f.sources_.push_back(s);
  }
  std::int64_t stop = -1;
  if (limit.stop_at && f.in_region(*limit.stop_at)) stop = f.local(*limit.stop_at);
  const Coord top = f.grid_.side() - 1;
  std::array<Coord, kMaxDim> c{};
  std::size_t head = 0;
  while (head < queue.size()) {
    const std::int64_t lv = queue[head++];
    if (lv == stop) {
      f.complete_ = false;
      break;
    }
    const std::int32_t dcur = f.dist_[static_cast<std::size_t>(lv)];
    if (dcur >= limit.max_dist) {
      f.complete_ = false;
      continue;
    }
    const std::int64_t dv = map.domain_index(lv, c);
    for (int a = 0; a < d; ++a) {
      const std::int64_t ls = f.grid_.stride(a), ds = dom.stride(a);
      if (c[a] > 0) {
        const auto nl = static_cast<std::size_t>(lv - ls);
        if (f.dist_[nl] < 0 && f.mask_[nl] && cfg.open_slot((dv - ds) * d + a)) {
          f.dist_[nl] = dcur + 1;
          queue.push_back(static_cast<std::int64_t>(nl));
        }
      }
      if (c[a] < top) {
        const auto nl = static_cast<std::size_t>(lv + ls);
        if (f.dist_[nl] < 0 && f.mask_[nl] && cfg.open_slot(dv * d + a)) {
          f.dist_[nl] = dcur + 1;
          queue.push_back(static_cast<std::int64_t>(nl));
        }
      }
    }
  }
  return f;
}

std::optional<PassagePair> PassageField::distance(const Point& v) const {
  if (!in_region(v)) return std::nullopt;
  const auto lv = static_cast<std::size_t>(local(v));
  if (!settled_[lv]) return std::nullopt;
  return PassagePair{unit_[lv], heavy_[lv]};
}

std::optional<Point> PassageField::predecessor(const Point& v) const {
  const auto dv = distance(v);
  if (!dv || (dv->unit_edges == 0 && dv->heavy_edges == 0)) return std::nullopt;
  std::optional<Point> out;
  for_neighbors_lex(v, [&](const Point& u) {
    const auto du = distance(u);
    if (!du) return false;
    const PassagePair step = view_.open(u, v) ? PassagePair{1, 0} : PassagePair{0, 1};
    if (*du + step == *dv) {
      out = u;
      return true;
    }
    return false;
  });
  return out;
}

PassageField truncated_T_multi(const ConfigView& cfg, const Region& U, std::span<const Point> sources,
                               const SearchLimit& limit) {
  if (sources.empty()) throw Error(ErrorKind::EmptySources, "truncated_T");
  PassageField f(cfg, U);
  const Lattice& dom = cfg.lattice();
  const int d = dom.dim();
  const double W = cfg.W();
  const GridMap map(f.grid_, dom);
  const auto V = static_cast<std::size_t>(f.grid_.vertex_count());
  f.unit_.assign(V, -1);
  f.heavy_.assign(V, 0);
  f.settled_.assign(V, 0);

  struct Entry {
    std::int64_t v;
    std::int32_t u, h;
  };
  // Keys pushed into each bucket are non-decreasing, so FIFO order is sorted.
  std::deque<Entry> unit_q, heavy_q;
  for (const Point& s : sources) {
    if (!f.in_region(s)) throw Error(ErrorKind::OutOfBox, "source outside U: " + s.str());
    const auto ls = static_cast<std::size_t>(f.local(s));
    if (f.unit_[ls] < 0) {
      f.unit_[ls] = 0;
      f.heavy_[ls] = 0;
      unit_q.push_back({static_cast<std::int64_t>(ls), 0, 0});
    }
    f.sources_.push_back(s);
  }
  std::int64_t stop = -1;
  if (limit.stop_at && f.in_region(*limit.stop_at)) stop = f.local(*limit.stop_at);
  const Coord top = f.grid_.side() - 1;
  std::array<Coord, kMaxDim> c{};

  auto relax = [&](std::size_t nl, std::int32_t u, std::int32_t h, bool open) {
    if (f.settled_[nl] || !f.mask_[nl]) return;
    const PassagePair cand = open ? PassagePair{u + 1, h} : PassagePair{u, h + 1};
    if (f.unit_[nl] >= 0 && compare(cand, PassagePair{f.unit_[nl], f.heavy_[nl]}, W) >= 0) return;
    f.unit_[nl] = static_cast<std::int32_t>(cand.unit_edges);
    f.heavy_[nl] = static_cast<std::int32_t>(cand.heavy_edges);
    (open ? unit_q : heavy_q).push_back({static_cast<std::int64_t>(nl), f.unit_[nl], f.heavy_[nl]});
  };

  while (!unit_q.empty() || !heavy_q.empty()) {
    bool take_unit;
    if (unit_q.empty())
      take_unit = false;
    else if (heavy_q.empty())
      take_unit = true;
    else
      take_unit = compare(PassagePair{unit_q.front().u, unit_q.front().h},
                          PassagePair{heavy_q.front().u, heavy_q.front().h}, W) <= 0;
    const Entry e = take_unit ? unit_q.front() : heavy_q.front();
    (take_unit ? unit_q : heavy_q).pop_front();
    const auto lv = static_cast<std::size_t>(e.v);
    if (f.settled_[lv] || f.unit_[lv] != e.u || f.heavy_[lv] != e.h) continue;
    f.settled_[lv] = 1;
    if (e.v == stop) {
      f.complete_ = false;
      break;
    }
    if (limit.max_dist != std::numeric_limits<std::int64_t>::max() &&
        PassagePair{e.u, e.h}.value(W) >= static_cast<double>(limit.max_dist)) {
      f.complete_ = false;
      continue;
    }
    const std::int64_t dv = map.domain_index(e.v, c);
    for (int a = 0; a < d; ++a) {
      const std::int64_t ls = f.grid_.stride(a), ds = dom.stride(a);
      if (c[a] > 0) relax(lv - static_cast<std::size_t>(ls), e.u, e.h, cfg.open_slot((dv - ds) * d + a));
      if (c[a] < top) relax(lv + static_cast<std::size_t>(ls), e.u, e.h, cfg.open_slot(dv * d + a));
    }
  }
  return f;
}

PassageField truncated_T(const ConfigView& cfg, const Region& U, const Point& source,
                         const SearchLimit& limit) {
  return truncated_T_multi(cfg, U, std::span<const Point>(&source, 1), limit);
}

namespace {

template <class Field>
PathRep walk_back(const Field& field, const Point& target) {
  if (!field.reachable(target))
    throw Error(ErrorKind::UnreachableTarget, "target " + target.str() + " not reached");
  std::vector<Point> rev{target};
  Point cur = target;
  while (auto pred = field.predecessor(cur)) {
    rev.push_back(*pred);
    cur = *pred;
  }
  std::reverse(rev.begin(), rev.end());
  return PathRep(std::move(rev));
}

}  // namespace

PathRep extract_geodesic(const DistanceField& field, const Point& target) {
  return walk_back(field, target);
}

PathRep extract_geodesic(const PassageField& field, const Point& target) {
  return walk_back(field, target);
}

PassagePair path_cost(const ConfigView& cfg, const PathRep& path) {
  PassagePair t;
  for (std::size_t i = 1; i < path.size(); ++i) {
    if (cfg.open(path[i - 1], path[i]))
      ++t.unit_edges;
    else
      ++t.heavy_edges;
  }
  return t;
}

bool path_open(const ConfigView& cfg, const PathRep& path) {
  for (std::size_t i = 1; i < path.size(); ++i)
    if (!cfg.open(path[i - 1], path[i])) return false;
  return true;
}

std::vector<EdgeId> closed_edges(const ConfigView& cfg, const PathRep& path) {
  std::vector<EdgeId> out;
  for (std::size_t i = 1; i < path.size(); ++i)
    if (!cfg.open(path[i - 1], path[i])) out.push_back(cfg.lattice().canonical_edge(path[i - 1], path[i]));
  return out;
}

ClusterLabels label_clusters(const ConfigView& cfg) {
  const Lattice& lat = cfg.lattice();
  const int d = lat.dim();
  const std::int64_t V = lat.vertex_count();
  UnionFind uf(static_cast<std::size_t>(V));
  for (std::int64_t v = 0; v < V; ++v) {
    for (int a = 0; a < d; ++a) {
      if (lat.digit(v, a) == lat.side() - 1) continue;
      if (cfg.open_slot(v * d + a))
        uf.unite(static_cast<std::int32_t>(v), static_cast<std::int32_t>(v + lat.stride(a)));
    }
  }
  ClusterLabels out;
  out.lattice = lat;
  out.root.resize(static_cast<std::size_t>(V));
  out.size.assign(static_cast<std::size_t>(V), 0);
  for (std::int64_t v = 0; v < V; ++v) {
    const std::int32_t r = uf.find(static_cast<std::int32_t>(v));
    out.root[static_cast<std::size_t>(v)] = r;
    ++out.size[static_cast<std::size_t>(r)];
  }
  for (std::int64_t v = 0; v < V; ++v) {
    const std::int32_t r = out.root[static_cast<std::size_t>(v)];
    if (out.size[static_cast<std::size_t>(r)] > out.largest_size) {
      out.largest_size = out.size[static_cast<std::size_t>(r)];
      out.largest = r;
    }
  }
  return out;
}

Point regularize(const ClusterLabels& labels, const Point& x) {
  if (labels.largest_size <= 1) throw Error(ErrorKind::EmptyCluster, "no open edge in the domain");
  const Lattice& lat = labels.lattice;
  if (!lat.contains(x)) throw Error(ErrorKind::OutOfBox, "regularize " + x.str());
  for (Coord t = 0; t <= 2 * lat.radius(); ++t) {
    for (const Point& v : shell_points(x, t))
      if (lat.contains(v) && labels.in_largest(v)) return v;
  }
  throw Error(ErrorKind::EmptyCluster, "largest cluster not found");
}

std::int64_t D_star(const ConfigView& cfg, const ClusterLabels& labels) {
  const int d = cfg.params().d;
  const Point a = regularize(labels, Point(d));
  const Point b = regularize(labels, Point::unit(d, 0, cfg.params().n));
  SearchLimit lim;
  lim.stop_at = b;
  return *bfs_distance(cfg, Region::whole(cfg.lattice()), a, lim).distance(b);
}

PassagePair T_star(const ConfigView& cfg, const ClusterLabels& labels) {
  const int d = cfg.params().d;
  const Point a = regularize(labels, Point(d));
  const Point b = regularize(labels, Point::unit(d, 0, cfg.params().n));
  SearchLimit lim;
  lim.stop_at = b;
  return *truncated_T(cfg, Region::whole(cfg.lattice()), a, lim).distance(b);
}

PassagePair T_n(const ConfigView& cfg) {
  const int d = cfg.params().d;
  const Point b = Point::unit(d, 0, cfg.params().n);
  SearchLimit lim;
  lim.stop_at = b;
  return *truncated_T(cfg, Region::whole(cfg.lattice()), Point(d), lim).distance(b);
}

Observables measure(const ConfigView& cfg, const ClusterLabels& labels) {
  Observables o;
  const int d = cfg.params().d;
  o.origin_star = regularize(labels, Point(d));
  o.target_star = regularize(labels, Point::unit(d, 0, cfg.params().n));
  const Region all = Region::whole(cfg.lattice());
  SearchLimit lim;
  lim.stop_at = o.target_star;
  o.d_star = *bfs_distance(cfg, all, o.origin_star, lim).distance(o.target_star);
  o.t_star = *truncated_T(cfg, all, o.origin_star, lim).distance(o.target_star);
  o.t_n = T_n(cfg);
  o.proxy_size = labels.largest_size;
  o.proxy_fraction = labels.largest_fraction();
  o.supercriticality_warning = o.proxy_fraction < 0.1;
  if (o.t_star.value(cfg.W()) > static_cast<double>(o.d_star) + 1e-9)
    throw Error(ErrorKind::PreconditionViolated, "T* exceeds D*_n");
  return o;
}

bool crossing_check(const ConfigView& cfg, const BoxSpec& box) {
  if (!cfg.lattice().contains(box)) throw Error(ErrorKind::OutOfBox, "crossing_check box");
  const Lattice grid(box);
  const Lattice& dom = cfg.lattice();
  const int d = dom.dim();
  const GridMap map(grid, dom);
  const std::int64_t V = grid.vertex_count();
  UnionFind uf(static_cast<std::size_t>(V));
  std::array<Coord, kMaxDim> c{};
  const Coord top = grid.side() - 1;
  for (std::int64_t lv = 0; lv < V; ++lv) {
    const std::int64_t dv = map.domain_index(lv, c);
    for (int a = 0; a < d; ++a)
      if (c[a] < top && cfg.open_slot(dv * d + a))
        uf.unite(static_cast<std::int32_t>(lv), static_cast<std::int32_t>(lv + grid.stride(a)));
  }
  std::vector<std::uint32_t> faces(static_cast<std::size_t>(V), 0);
  const std::uint32_t all = (1U << (2 * d)) - 1;
  for (std::int64_t lv = 0; lv < V; ++lv) {
    std::uint32_t bits = 0;
    for (int a = 0; a < d; ++a) {
      const Coord ca = grid.digit(lv, a);
      if (ca == 0) bits |= 1U << (2 * a);
      if (ca == top) bits |= 1U << (2 * a + 1);
    }
    if (!bits) continue;
    auto& f = faces[static_cast<std::size_t>(uf.find(static_cast<std::int32_t>(lv)))];
    f |= bits;
    if (f == all && box.radius > 0) return true;
  }
  return false;
}

}  // namespace chemdist
