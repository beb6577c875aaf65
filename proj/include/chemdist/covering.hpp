#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "chemdist/bypass.hpp"
#include "chemdist/effective_radius.hpp"
#include "chemdist/percolation.hpp"
#include "chemdist/shortest_paths.hpp"

namespace chemdist {

// Rebuilds the bypass certified by a PerPath record. Throws
// PreconditionViolated when both endpoints of gamma lie in Lambda_3N(e) and
// RadiusNotFound when the record holds no radius.
BypassResult build_bypass(const ConfigView& cfg, const PathRep& gamma, const EdgeId& e, const RadiusRecord& record);

struct CoveringStep {
  EdgeId edge;
  Coord radius = 0;
  std::size_t detour_edges = 0;
  std::size_t remaining_closed = 0;
  BypassCase case_tag = BypassCase::Interior;
};

struct CoveringResult {
  PathRep gamma0;
  std::vector<CoveringStep> Gamma;
  PathRep eta_final;
  std::int64_t total_detour = 0;
  std::int64_t d_star = 0;   // graph distance between the endpoints of gamma0
  double t_star = 0.0;       // passage time of gamma0
  double discrepancy = 0.0;  // d_star - t_star
  double bound = 0.0;        // 2 c_op sum of radii
  std::int64_t radius_sum = 0;
  bool eta_open = false;
  bool separation_ok = true;
  bool bound_ok = true;
  bool radii_nonincreasing = true;
  std::vector<std::string> violations;  // failed per-bypass checks
};

// Procedure (G): repeatedly bypass the closed edge of largest PerPath radius
// (ties by the smaller edge) until the path is open. Throws StuckIteration,
// RadiusNotFound, and PreconditionViolated when an edge's radius scan ends
// with both endpoints enclosed. Writes one JSON line per iteration to trace.
CoveringResult covering_process(const ConfigView& cfg, const PathRep& gamma, std::ostream* trace = nullptr);

// Geodesic of T(0*, (n e1)*) in the given configuration.
PathRep t_star_geodesic(const ConfigView& cfg, const ClusterLabels& labels);
// Geodesic of T(0, n e1).
PathRep t_n_geodesic(const ConfigView& cfg);

struct GradResult {
  double delta = 0.0;  // T_n with t_e = W minus T_n with t_e = 1
  double bound = 0.0;
  bool on_geodesic = false;
  std::optional<Coord> radius;
  bool near_endpoint = false;  // U_e
  bool holds = false;          // 0 <= delta <= bound
};

GradResult grad_T(const ConfigView& cfg, const EdgeId& e);

struct ResamplingCost {
  double cost = 0.0;        // sum over the T_n geodesic of min(c_op R_e, W)^2
  double decomposed = 0.0;  // sum_M M^2 #{e : M-1 <= Rhat_e < M}
  std::size_t path_edges = 0;
  std::map<std::int64_t, std::int64_t> per_scale;
  std::vector<RadiusRecord> radii;
};

ResamplingCost resampling_cost(const ConfigView& cfg, Coord n_max = 0);

}  // namespace chemdist
