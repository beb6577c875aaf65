#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chemdist/bypass.hpp"
#include "chemdist/lattice.hpp"
#include "chemdist/path.hpp"
#include "chemdist/percolation.hpp"

namespace chemdist {

enum class RadiusMethod { PerPath, GoodBox };
std::string to_string(RadiusMethod m);

struct RadiusRecord {
  EdgeId edge;
  std::optional<Coord> N;  // nullopt: not found up to n_max
  Coord n_max = 0;
  RadiusMethod method = RadiusMethod::PerPath;
  std::optional<PathRep> witness;  // PerPath: the annulus connector
  std::string reason;              // why the scan stopped without a radius

  bool found() const { return N.has_value(); }
  // min(c_op * N, W), and W when no radius was found.
  double truncated(double c_op, double W) const {
    return N ? std::min(c_op * static_cast<double>(*N), W) : W;
  }
};

// Smallest N in [1, n_max] at which the bypass construction for (gamma, e)
// succeeds. n_max = 0 selects params.radius_cap(). Throws PreconditionViolated
// when e is not on gamma.
RadiusRecord empirical_radius(const ConfigView& cfg, const PathRep& gamma, const EdgeId& e, Coord n_max = 0);

// Every pair of Lambda_3N(e) joined inside Lambda_3N(e) is within c_op * N
// inside Lambda_4N(e). Throws OutOfBox.
bool check_V2(const ConfigView& cfg, const EdgeId& e, Coord N);

struct GoodBoxReport {
  EdgeId edge;
  Coord N = 0;
  Coord n_rho = 0;
  bool crossing = false;           // (i)
  bool local_distances = false;    // (ii)
  bool annulus_distances = false;  // (iii)
  bool small_clusters = false;     // (iv) surrogate
  bool complete = true;            // false when evaluation stopped at the first failed property

  bool good() const { return crossing && local_distances && annulus_distances && small_clusters; }
};

// Sub-box side floor(N / subbox_divisor).
Coord n_rho(const Params& params, Coord N);
// Smallest N with n_rho >= 1.
Coord goodbox_min_N(const Params& params);

// Throws OutOfBox, RhoTooLargeForN.
GoodBoxReport check_goodbox(const ConfigView& cfg, const EdgeId& e, Coord N, bool stop_early = false);

// Smallest N in [goodbox_min_N, n_max] whose box is good.
RadiusRecord goodbox_radius(const ConfigView& cfg, const EdgeId& e, Coord n_max = 0);

// PerPath mode needs the path carrying the edges.
std::vector<RadiusRecord> radius_field(const ConfigView& cfg, const std::vector<EdgeId>& edges, RadiusMethod mode,
                                       const PathRep* gamma = nullptr, Coord n_max = 0);

struct SurvivalRow {
  RadiusMethod method = RadiusMethod::GoodBox;
  Coord t = 0;
  std::int64_t survivors = 0;  // records with N >= t, or not found
  std::int64_t total = 0;
};

std::vector<SurvivalRow> survival_curve(const std::vector<RadiusRecord>& records, Coord t_from, Coord t_to);
// CSV with columns method,t,survivors,total.
std::string survival_csv(const std::vector<SurvivalRow>& rows);

}  // namespace chemdist
