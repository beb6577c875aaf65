#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "chemdist/effective_radius.hpp"
#include "chemdist/lattice.hpp"
#include "chemdist/path.hpp"
#include "chemdist/percolation.hpp"

namespace chemdist {

// Real value per edge of a box; NaN marks edges without a value.
class EdgeField {
 public:
  EdgeField() = default;
  explicit EdgeField(const BoxSpec& box);

  const Lattice& lattice() const { return lat_; }
  bool has(const EdgeId& e) const;
  // Throws OutOfBox, PreconditionViolated when the edge has no value.
  double at(const EdgeId& e) const;
  void set(const EdgeId& e, double x);

 private:
  Lattice lat_;
  std::vector<double> x_;
};

// X_e = GoodBox radius of x_e over the edges of box; radii not found up to
// cap are censored to cap + 1.
EdgeField goodbox_radius_field(const ConfigView& cfg, const BoxSpec& box, Coord cap);

// X_e = min(c_op R_e, W) / c_op from radius records.
EdgeField rhat_field(const ConfigView& cfg, const BoxSpec& box, const std::vector<RadiusRecord>& records);

// Bits I_{e,M} = 1(M-1 <= X_e < M).
class IndicatorField {
 public:
  IndicatorField(const EdgeField& X, Coord M);
  IndicatorField(const BoxSpec& box, Coord M, const std::function<bool(const EdgeId&)>& fires);

  const Lattice& lattice() const { return lat_; }
  Coord M() const { return M_; }
  bool fires(const EdgeId& e) const { return bits_[static_cast<std::size_t>(lat_.slot(e))] != 0; }
  bool fires(const Point& a, const Point& b) const;
  // Fraction of edges of the box that fire.
  double qhat() const;
  std::int64_t fired() const;

 private:
  Lattice lat_;
  Coord M_ = 1;
  std::vector<std::uint8_t> bits_;
};

enum class AnimalMethod { Exact, Beam };
std::string to_string(AnimalMethod m);

struct AnimalResult {
  Coord L = 0;
  Coord M = 0;
  std::int64_t value = 0;
  PathRep witness;
  AnimalMethod method = AnimalMethod::Exact;
};

// Firing edges on a path.
std::int64_t animal_value(const IndicatorField& f, const PathRep& gamma);

// Maximum of animal_value over self-avoiding paths in Lambda_L(0) with at most
// L edges. Throws TooLargeForExact when L > L_exact_max.
AnimalResult n_lm_exact(const IndicatorField& f, Coord L, Coord L_exact_max = 12);

// Beam search over the widths 1, 2, 4, ..., beam_width; the best witness over
// the ladder is returned, so the value never decreases with beam_width.
AnimalResult n_lm_beam(const IndicatorField& f, Coord L, std::size_t beam_width);

// Sum of f(X_e) over the edges of gamma.
double path_cost(const EdgeField& X, const PathRep& gamma, const std::function<double(double)>& f);

struct AnimalSpec {
  Params params;
  std::vector<Coord> Ms;
  std::vector<Coord> Ls;
  int reps = 10;
  Coord radius_cap = 16;
  Coord L_exact_max = 12;
  std::size_t beam_width = 1024;
  double tail_factor = 1.5;  // tail_t = ceil(tail_factor * mean)
};

struct AnimalRow {
  int d = 2;
  double p = 0.0;
  Coord M = 0;
  Coord L = 0;
  int reps = 0;
  double mean = 0.0;
  double qhat = 0.0;
  double normalized_ratio = 0.0;  // mean / (L qhat^{1/d} M^{d+1})
  double tail_t = 0.0;
  double tail_freq = 0.0;
};

struct AnimalRaw {
  int rep = 0;
  std::uint64_t seed = 0;
  Coord M = 0;
  Coord L = 0;
  std::int64_t value = 0;
  std::int64_t fired = 0;
  std::int64_t edges = 0;
};

struct AnimalScaling {
  std::vector<AnimalRow> rows;
  std::vector<AnimalRaw> raw;
};

// Replica r samples the configuration with seed params.seed + r and takes X
// as the GoodBox radius field over Lambda_{max L}(0). Throws InvalidParams
// when Lambda_{max L + 4 radius_cap} leaves the domain.
AnimalScaling animal_scaling(const AnimalSpec& spec);

}  // namespace chemdist
