#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "chemdist/lattice.hpp"
#include "chemdist/path.hpp"
#include "chemdist/percolation.hpp"

namespace chemdist {

// Index interval [begin, end] of a vertex sequence.
struct Run {
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Maximal runs of consecutive vertices inside A_N(e) that visit both the
// innermost layer (l-inf radius N+1 around x_e) and the outer shell (3N).
std::vector<Run> crossing_runs(const std::vector<Point>& vertices, const AnnulusSpec& a);

struct Crossings {
  PathRep first;
  PathRep last;
  Run first_run;
  Run last_run;
};

// Throws NoCrossing.
Crossings crossing_subpaths(const PathRep& gamma, const AnnulusSpec& a);

enum class BypassCase { Interior, Endpoint2a, Endpoint2b };
std::string to_string(BypassCase c);

struct BypassResult {
  PathRep eta;
  // Open replacement segment: the annulus connector, preceded by the
  // reconnection from the endpoint in the endpoint cases.
  PathRep detour;
  PathRep connector;
  std::optional<PathRep> reconnect;
  std::size_t detour_edges = 0;  // edges of eta not on gamma
  Coord radius_used = 0;
  BypassCase case_tag = BypassCase::Interior;
  bool reversed = false;  // gamma was traversed from its far endpoint
};

enum class AttemptStatus {
  Ok,
  NoConnector,       // first and last crossings not joined inside A_N(e)
  ConnectorTooLong,  // joined, but longer than c_op * N
  ReconnectTooLong,  // endpoint reconnection longer than c_op * N
  Trapped,           // endpoint cannot reach the outer shell inside Lambda_3N(e)
  EndpointsEnclosed, // both endpoints inside Lambda_3N(e)
  OutOfDomain,       // Lambda_4N(e) leaves the simulation box
};
std::string to_string(AttemptStatus s);

// Statuses that persist for every larger N.
inline bool is_terminal(AttemptStatus s) {
  return s == AttemptStatus::Trapped || s == AttemptStatus::EndpointsEnclosed ||
         s == AttemptStatus::OutOfDomain;
}

struct BypassAttempt {
  AttemptStatus status = AttemptStatus::NoConnector;
  BypassResult result;
};

// One bypass construction at scale N. Throws PreconditionViolated when e is
// not an edge of gamma.
BypassAttempt attempt_bypass(const ConfigView& cfg, const PathRep& gamma, const EdgeId& e, Coord N);

// Edges of eta that are not edges of gamma, and the checks every bypass must pass.
std::size_t edges_off(const Lattice& lat, const PathRep& eta, const PathRep& gamma);
std::vector<std::string> bypass_violations(const ConfigView& cfg, const PathRep& gamma, const EdgeId& e,
                                           const BypassResult& b);

}  // namespace chemdist
