#include "chemdist/covering.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "chemdist/errors.hpp"

namespace chemdist {

BypassResult build_bypass(const ConfigView& cfg, const PathRep& gamma, const EdgeId& e, const RadiusRecord& record) {
  if (!record.N) throw Error(ErrorKind::RadiusNotFound, "no radius for " + e.str() + " (" + record.reason + ")");
  const BypassAttempt at = attempt_bypass(cfg, gamma, e, *record.N);
  if (at.status == AttemptStatus::EndpointsEnclosed)
    throw Error(ErrorKind::PreconditionViolated, "both endpoints inside Lambda_3N(e)");
  if (at.status != AttemptStatus::Ok)
    throw Error(ErrorKind::RadiusNotFound, "record does not certify a bypass: " + to_string(at.status));
  return at.result;
}

namespace {

bool edge_less(const EdgeId& a, const EdgeId& b) {
  return a.x_e != b.x_e ? a.x_e < b.x_e : a.y_e < b.y_e;
}

}  // namespace

CoveringResult covering_process(const ConfigView& cfg, const PathRep& gamma, std::ostream* trace) {
  CoveringResult res;
  res.gamma0 = gamma;
  const double c = cfg.params().c_op();
  PathRep eta = gamma;
  std::vector<EdgeId> clo = closed_edges(cfg, eta);
  const std::size_t max_iter = clo.size();
  while (!clo.empty()) {
    std::optional<RadiusRecord> best;
    for (const EdgeId& e : clo) {
      RadiusRecord rec = empirical_radius(cfg, eta, e);
      if (!rec.N) {
        if (rec.reason == to_string(AttemptStatus::EndpointsEnclosed))
          throw Error(ErrorKind::PreconditionViolated, "both endpoints inside Lambda_3N of " + e.str());
        throw Error(ErrorKind::RadiusNotFound, e.str() + ": " + rec.reason);
      }
      if (!best || *rec.N > *best->N || (*rec.N == *best->N && edge_less(e, best->edge))) best = std::move(rec);
    }
    const BypassResult b = build_bypass(cfg, eta, best->edge, *best);
    for (const std::string& v : bypass_violations(cfg, eta, best->edge, b))
      res.violations.push_back(best->edge.str() + ": " + v);
    std::vector<EdgeId> next = closed_edges(cfg, b.eta);
    if (next.size() >= clo.size() || res.Gamma.size() >= max_iter)
      throw Error(ErrorKind::StuckIteration, "closed edges did not decrease after bypassing " + best->edge.str());
    CoveringStep step;
    step.edge = best->edge;
    step.radius = *best->N;
    step.detour_edges = b.detour_edges;
    step.remaining_closed = next.size();
    step.case_tag = b.case_tag;
    res.Gamma.push_back(step);
    res.total_detour += static_cast<std::int64_t>(b.detour_edges);
    if (trace) {
      nlohmann::json j;
      j["iteration"] = res.Gamma.size();
      j["edge"] = step.edge.str();
      j["radius"] = step.radius;
      j["detour_length"] = step.detour_edges;
      j["remaining_closed"] = step.remaining_closed;
      j["case"] = to_string(step.case_tag);
      *trace << j.dump() << '\n';
    }
    eta = b.eta;
    clo = std::move(next);
  }
  res.eta_final = eta;
  res.eta_open = path_open(cfg, eta);

  SearchLimit lim;
  lim.stop_at = gamma.back();
  const auto field = bfs_distance(cfg, Region::whole(cfg.lattice()), gamma.front(), lim);
  const auto ds = field.distance(gamma.back());
  if (!ds) throw Error(ErrorKind::UnreachableTarget, "endpoints of gamma are not connected");
  res.d_star = *ds;
  res.t_star = path_cost(cfg, gamma).value(cfg.W());
  res.discrepancy = static_cast<double>(res.d_star) - res.t_star;
  for (const CoveringStep& s : res.Gamma) res.radius_sum += s.radius;
  res.bound = 2.0 * c * static_cast<double>(res.radius_sum);
  res.bound_ok = res.discrepancy <= res.bound + 1e-9;
  for (std::size_t i = 0; i < res.Gamma.size(); ++i) {
    if (i > 0 && res.Gamma[i].radius > res.Gamma[i - 1].radius) res.radii_nonincreasing = false;
    for (std::size_t j = i + 1; j < res.Gamma.size(); ++j)
      if (edge_dist_inf(res.Gamma[i].edge, res.Gamma[j].edge) < std::max(res.Gamma[i].radius, res.Gamma[j].radius))
        res.separation_ok = false;
  }
  if (static_cast<std::int64_t>(res.eta_final.length()) < res.d_star)
    res.violations.push_back("final path shorter than the graph distance");
  return res;
}

PathRep t_star_geodesic(const ConfigView& cfg, const ClusterLabels& labels) {
  const int d = cfg.params().d;
  const Point a = regularize(labels, Point(d));
  const Point b = regularize(labels, Point::unit(d, 0, cfg.params().n));
  SearchLimit lim;
  lim.stop_at = b;
  return extract_geodesic(truncated_T(cfg, Region::whole(cfg.lattice()), a, lim), b);
}

PathRep t_n_geodesic(const ConfigView& cfg) {
  const int d = cfg.params().d;
  const Point b = Point::unit(d, 0, cfg.params().n);
  SearchLimit lim;
  lim.stop_at = b;
  return extract_geodesic(truncated_T(cfg, Region::whole(cfg.lattice()), Point(d), lim), b);
}

GradResult grad_T(const ConfigView& cfg, const EdgeId& e) {
  GradResult g;
  const double W = cfg.W();
  const ConfigView open_view = cfg.with_forced(e, true);
  const ConfigView heavy_view = cfg.with_forced(e, false);
  const PathRep gamma = t_n_geodesic(open_view);
  const double t_open = path_cost(open_view, gamma).value(W);
  g.delta = T_n(heavy_view).value(W) - t_open;
  g.on_geodesic = gamma.edge_position(e).has_value();
  if (g.on_geodesic) {
    const RadiusRecord rec = empirical_radius(open_view, gamma, e);
    g.radius = rec.N;
    const Point far = Point::unit(cfg.params().d, 0, cfg.params().n);
    const Coord to_end = std::min(norm_inf(e.x_e), dist_inf(e.x_e, far));
    g.near_endpoint = !rec.N || 3 * *rec.N >= to_end;
    const double local = rec.N ? cfg.params().c_op() * *rec.N : W;
    g.bound = std::min(W, local + (g.near_endpoint ? W : 0.0));
  }
  g.holds = g.delta >= -1e-9 && g.delta <= g.bound + 1e-9;
  return g;
}

ResamplingCost resampling_cost(const ConfigView& cfg, Coord n_max) {
  ResamplingCost rc;
  const double W = cfg.W();
  const double c = cfg.params().c_op();
  const PathRep gamma = t_n_geodesic(cfg);
  rc.path_edges = gamma.length();
  for (std::size_t i = 1; i < gamma.size(); ++i) {
    const EdgeId e = cfg.lattice().canonical_edge(gamma[i - 1], gamma[i]);
    RadiusRecord rec = empirical_radius(cfg, gamma, e, n_max);
    const double r = rec.truncated(c, W);
    rc.cost += r * r;
    ++rc.per_scale[static_cast<std::int64_t>(std::floor(r)) + 1];
    rc.radii.push_back(std::move(rec));
  }
  for (const auto& [M, count] : rc.per_scale) rc.decomposed += static_cast<double>(M * M * count);
  return rc;
}

}  // namespace chemdist
