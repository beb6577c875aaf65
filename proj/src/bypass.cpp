#include "chemdist/bypass.hpp"

#include <algorithm>
#include <unordered_set>

#include "chemdist/errors.hpp"
#include "chemdist/shortest_paths.hpp"

namespace chemdist {

std::vector<Run> crossing_runs(const std::vector<Point>& vertices, const AnnulusSpec& a) {
  std::vector<Run> out;
  const Point& c = a.edge.x_e;
  std::size_t i = 0;
  while (i < vertices.size()) {
    if (!a.contains(vertices[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    bool inner = false, outer = false;
    while (j < vertices.size() && a.contains(vertices[j])) {
      const Coord r = dist_inf(vertices[j], c);
      inner = inner || r == a.N + 1;
      outer = outer || r == 3 * a.N;
      ++j;
    }
    if (inner && outer) out.push_back({i, j - 1});
    i = j;
  }
  return out;
}

Crossings crossing_subpaths(const PathRep& gamma, const AnnulusSpec& a) {
  const auto runs = crossing_runs(gamma.vertices(), a);
  if (runs.empty()) throw Error(ErrorKind::NoCrossing, "path does not cross A_N(e)");
  Crossings c;
  c.first_run = runs.front();
  c.last_run = runs.back();
  c.first = gamma.subpath(c.first_run.begin, c.first_run.end);
  c.last = gamma.subpath(c.last_run.begin, c.last_run.end);
  return c;
}

std::string to_string(BypassCase c) {
  switch (c) {
    case BypassCase::Interior: return "interior";
    case BypassCase::Endpoint2a: return "endpoint_2a";
    case BypassCase::Endpoint2b: return "endpoint_2b";
  }
  return "?";
}

std::string to_string(AttemptStatus s) {
  switch (s) {
    case AttemptStatus::Ok: return "ok";
    case AttemptStatus::NoConnector: return "no_connector";
    case AttemptStatus::ConnectorTooLong: return "connector_too_long";
    case AttemptStatus::ReconnectTooLong: return "reconnect_too_long";
    case AttemptStatus::Trapped: return "trapped";
    case AttemptStatus::EndpointsEnclosed: return "endpoints_enclosed";
    case AttemptStatus::OutOfDomain: return "out_of_domain";
  }
  return "?";
}

namespace {

std::unordered_set<std::int64_t> edge_slots(const Lattice& lat, const PathRep& p) {
  std::unordered_set<std::int64_t> s;
  s.reserve(p.size() * 2);
  for (std::size_t i = 1; i < p.size(); ++i) s.insert(lat.slot(lat.canonical_edge(p[i - 1], p[i])));
  return s;
}

// Geodesic inside Lambda_3N(e) from x to the nearest vertex of the outer shell.
std::optional<PathRep> escape_path(const ConfigView& cfg, const Point& x, const AnnulusSpec& a) {
  const BoxSpec outer = a.outer();
  if (dist_inf(x, outer.center) == outer.radius) return PathRep({x});
  const DistanceField f = bfs_distance(cfg, Region::of_box(outer), x);
  std::optional<Point> best;
  std::int64_t best_d = 0;
  for (const Point& v : shell_points(outer.center, outer.radius)) {
    const auto dv = f.distance(v);
    if (dv && (!best || *dv < best_d)) {
      best = v;
      best_d = *dv;
    }
  }
  if (!best) return std::nullopt;
  return extract_geodesic(f, *best);
}

struct Connector {
  PathRep path;            // from a source vertex to a target vertex
  std::size_t target = 0;  // index into the target sequence
};

// Shortest open path inside A_N(e) from any source to any target. Among
// nearest targets the one latest in the target sequence wins.
std::optional<Connector> connect(const ConfigView& cfg, const AnnulusSpec& a, const std::vector<Point>& sources,
                                 const std::vector<Point>& targets) {
  const DistanceField f = bfs_distance(cfg, Region::of_annulus(a), sources);
  std::optional<std::size_t> best;
  std::int64_t best_d = 0;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const auto dk = f.distance(targets[k]);
    if (dk && (!best || *dk <= best_d)) {
      best = k;
      best_d = *dk;
    }
  }
  if (!best) return std::nullopt;
  return Connector{extract_geodesic(f, targets[*best]), *best};
}

BypassAttempt attempt_oriented(const ConfigView& cfg, const PathRep& gamma, std::size_t epos, const EdgeId& e,
                               Coord N) {
  BypassAttempt out;
  const AnnulusSpec a{e, N};
  const Point& c = e.x_e;
  const double cap = cfg.params().c_op() * static_cast<double>(N);
  const Point& x = gamma.front();

  const auto runs = crossing_runs(gamma.vertices(), a);
  if (runs.empty()) throw Error(ErrorKind::NoCrossing, "path with an endpoint outside Lambda_3N crosses nowhere");
  const Run last = runs.back();
  const std::vector<Point> targets(gamma.vertices().begin() + static_cast<std::ptrdiff_t>(last.begin),
                                   gamma.vertices().begin() + static_cast<std::ptrdiff_t>(last.end) + 1);

  auto finish = [&](const PathRep& head, const Connector& conn, BypassCase tag,
                    std::optional<PathRep> reconnect) {
    if (static_cast<double>(conn.path.length()) > cap) {
      out.status = AttemptStatus::ConnectorTooLong;
      return out;
    }
    const std::size_t zo = last.begin + conn.target;
    PathRep eta = concat(concat(head, conn.path), gamma.subpath(zo, gamma.size() - 1));
    BypassResult& r = out.result;
    r.eta = eta.loop_erased();
    r.connector = conn.path;
    r.detour = reconnect ? concat(*reconnect, conn.path) : conn.path;
    r.reconnect = std::move(reconnect);
    r.detour_edges = edges_off(cfg.lattice(), r.eta, gamma);
    r.radius_used = N;
    r.case_tag = tag;
    out.status = AttemptStatus::Ok;
    return out;
  };

  const Coord rx = dist_inf(x, c);
  if (rx > 3 * N) {
    // Both endpoints outside: join the first and last crossings of gamma.
    const Run first = runs.front();
    const std::vector<Point> sources(gamma.vertices().begin() + static_cast<std::ptrdiff_t>(first.begin),
                                     gamma.vertices().begin() + static_cast<std::ptrdiff_t>(first.end) + 1);
    const auto conn = connect(cfg, a, sources, targets);
    if (!conn) {
      out.status = AttemptStatus::NoConnector;
      return out;
    }
    const std::size_t zi = first.begin + static_cast<std::size_t>(
                                             std::find(sources.begin(), sources.end(), conn->path.front()) -
                                             sources.begin());
    return finish(gamma.subpath(0, zi), *conn, BypassCase::Interior, std::nullopt);
  }

  const auto xi = escape_path(cfg, x, a);
  if (!xi) {
    out.status = AttemptStatus::Trapped;
    return out;
  }
  auto reconnect_to = [&](const Point& z) -> std::optional<PathRep> {
    SearchLimit lim;
    lim.stop_at = z;
    lim.max_dist = static_cast<std::int64_t>(cap);
    const DistanceField f = bfs_distance(cfg, Region::of_box(BoxSpec{c, 4 * N}), x, lim);
    const auto dz = f.distance(z);
    if (!dz || static_cast<double>(*dz) > cap) return std::nullopt;
    return extract_geodesic(f, z);
  };

  if (rx <= N) {
    // Endpoint inside Lambda_N(e): leave along xi, reconnect inside Lambda_4N(e).
    const auto xruns = crossing_runs(xi->vertices(), a);
    if (xruns.empty()) throw Error(ErrorKind::NoCrossing, "escape path does not cross A_N(e)");
    const Run first = xruns.front();
    const std::vector<Point> sources(xi->vertices().begin() + static_cast<std::ptrdiff_t>(first.begin),
                                     xi->vertices().begin() + static_cast<std::ptrdiff_t>(first.end) + 1);
    const auto conn = connect(cfg, a, sources, targets);
    if (!conn) {
      out.status = AttemptStatus::NoConnector;
      return out;
    }
    auto rec = reconnect_to(conn->path.front());
    if (!rec) {
      out.status = AttemptStatus::ReconnectTooLong;
      return out;
    }
    return finish(*rec, *conn, BypassCase::Endpoint2a, rec);
  }

  // Endpoint inside A_N(e): the first crossing of reverse(xi) + gamma[x..e].
  std::vector<Point> P(xi->vertices().rbegin(), xi->vertices().rend());
  const std::size_t joint = P.size() - 1;  // index of x in P
  P.insert(P.end(), gamma.vertices().begin() + 1, gamma.vertices().begin() + static_cast<std::ptrdiff_t>(epos) + 1);
  const auto pruns = crossing_runs(P, a);
  const Run first = pruns.front();
  const std::vector<Point> sources(P.begin() + static_cast<std::ptrdiff_t>(first.begin),
                                   P.begin() + static_cast<std::ptrdiff_t>(first.end) + 1);
  const auto conn = connect(cfg, a, sources, targets);
  if (!conn) {
    out.status = AttemptStatus::NoConnector;
    return out;
  }
  // Prefer the occurrence on gamma when the source vertex appears twice.
  std::size_t zi = first.end;
  while (P[zi] != conn->path.front()) --zi;
  if (zi >= joint) return finish(gamma.subpath(0, zi - joint), *conn, BypassCase::Endpoint2b, std::nullopt);
  auto rec = reconnect_to(conn->path.front());
  if (!rec) {
    out.status = AttemptStatus::ReconnectTooLong;
    return out;
  }
  return finish(*rec, *conn, BypassCase::Endpoint2b, rec);
}

}  // namespace

BypassAttempt attempt_bypass(const ConfigView& cfg, const PathRep& gamma, const EdgeId& e, Coord N) {
  const auto pos = gamma.edge_position(e);
  if (!pos) throw Error(ErrorKind::PreconditionViolated, "edge " + e.str() + " is not on the path");
  BypassAttempt out;
  if (!cfg.lattice().contains(BoxSpec{e.x_e, 4 * N})) {
    out.status = AttemptStatus::OutOfDomain;
    return out;
  }
  const bool x_in = dist_inf(gamma.front(), e.x_e) <= 3 * N;
  const bool y_in = dist_inf(gamma.back(), e.x_e) <= 3 * N;
  if (x_in && y_in) {
    out.status = AttemptStatus::EndpointsEnclosed;
    return out;
  }
  if (!y_in) return attempt_oriented(cfg, gamma, *pos, e, N);
  // Work from the enclosed endpoint, then restore the orientation.
  const PathRep rev = gamma.reversed();
  out = attempt_oriented(cfg, rev, gamma.length() - 1 - *pos, e, N);
  if (out.status == AttemptStatus::Ok) {
    BypassResult& r = out.result;
    r.eta = r.eta.reversed();
    r.detour = r.detour.reversed();
    r.connector = r.connector.reversed();
    if (r.reconnect) r.reconnect = r.reconnect->reversed();
    r.reversed = true;
  }
  return out;
}

std::size_t edges_off(const Lattice& lat, const PathRep& eta, const PathRep& gamma) {
  const auto on = edge_slots(lat, gamma);
  std::size_t count = 0;
  for (std::size_t i = 1; i < eta.size(); ++i)
    count += !on.count(lat.slot(lat.canonical_edge(eta[i - 1], eta[i])));
  return count;
}

std::vector<std::string> bypass_violations(const ConfigView& cfg, const PathRep& gamma, const EdgeId& e,
                                           const BypassResult& b) {
  std::vector<std::string> bad;
  const Lattice& lat = cfg.lattice();
  const Coord N = b.radius_used;
  const double cap = cfg.params().c_op() * static_cast<double>(N);
  if (b.eta.empty() || b.eta.front() != gamma.front() || b.eta.back() != gamma.back())
    bad.push_back("eta endpoints differ from gamma");
  if (!b.eta.is_nearest_neighbor()) bad.push_back("eta is not a nearest-neighbor path");
  if (!b.eta.is_self_avoiding()) bad.push_back("eta is not self-avoiding");
  if (!path_open(cfg, b.detour)) bad.push_back("detour has a closed edge");
  if (static_cast<double>(b.connector.length()) > cap) bad.push_back("connector longer than c_op*N");
  if (b.reconnect && static_cast<double>(b.reconnect->length()) > cap)
    bad.push_back("reconnection longer than c_op*N");
  if (static_cast<double>(b.detour_edges) > 2.0 * cap) bad.push_back("detour longer than 2*c_op*N");
  const AnnulusSpec a{e, N};
  for (const Point& v : b.connector.vertices())
    if (!a.contains(v)) {
      bad.push_back("connector leaves A_N(e)");
      break;
    }
  if (b.reconnect)
    for (const Point& v : b.reconnect->vertices())
      if (dist_inf(v, e.x_e) > 4 * N) {
        bad.push_back("reconnection leaves Lambda_4N(e)");
        break;
      }
  const auto on = edge_slots(lat, gamma);
  for (std::size_t i = 1; i < b.eta.size(); ++i) {
    const bool open = cfg.open(b.eta[i - 1], b.eta[i]);
    const bool off = !on.count(lat.slot(lat.canonical_edge(b.eta[i - 1], b.eta[i])));
    if (off && !open) bad.push_back("eta has a closed edge off gamma");
    if (!open && (dist_inf(b.eta[i - 1], e.x_e) <= N || dist_inf(b.eta[i], e.x_e) <= N))
      bad.push_back("closed edge of eta inside Lambda_N(e)");
  }
  return bad;
}

}  // namespace chemdist
