#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "chemdist/lattice.hpp"

namespace chemdist {

inline constexpr const char* kGeneratorId = "splitmix64-edgehash-v1";

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double to_unit(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

// Uniform draw for the edge with lower endpoint lo along axis. Keyed by the
// edge geometry rather than its rank in one particular box, so two domains of
// different size agree on every edge they share.
inline double edge_uniform(std::uint64_t seed, const Point& lo, int axis) {
  std::uint64_t h = splitmix64(seed ^ 0x5851f42d4c957f2dULL);
  for (int i = 0; i < lo.dim(); ++i)
    h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(lo[i])));
  return to_unit(splitmix64(h ^ static_cast<std::uint64_t>(axis + 1)));
}

// Small sequential stream for auxiliary sampling (query points, edge subsets).
class Stream {
 public:
  explicit Stream(std::uint64_t seed, std::uint64_t purpose = 0)
      : state_(splitmix64(seed) ^ splitmix64(purpose + 0x632be59bd9b4e019ULL)) {}
  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return to_unit(next()); }
  // Uniform integer in [0, bound), rejection sampled.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do x = next();
    while (x >= limit);
    return x % bound;
  }

 private:
  std::uint64_t state_;
};

struct Params {
  int d = 2;
  double p = 0.7;
  int n = 64;
  int B = 2;
  std::uint64_t seed = 1;
  double c_star_op = 0.0;  // 0: default (64 in d=2, must be set for d>=3)
  double rho = 2.5;
  // Sub-box side is floor(N / goodbox_divisor); 0 selects 16*rho^2.
  double goodbox_divisor = 1.0;
  int n_max = 0;  // 0: ceil(4 ln^2 n)

  double W() const { return std::log(static_cast<double>(n)) * std::log(static_cast<double>(n)); }
  Coord domain_radius() const { return static_cast<Coord>(B) * n; }
  double c_op() const;
  int radius_cap() const;
  double subbox_divisor() const { return goodbox_divisor > 0 ? goodbox_divisor : 16.0 * rho * rho; }
  // 1/c_lower + (100 rho^2)^d; only reported, never used as a default.
  double theoretical_c_star(double c_lower) const { return 1.0 / c_lower + std::pow(100.0 * rho * rho, d); }

  void validate() const;
  std::string to_kv() const;
};

// key=value lines; unknown keys are an error.
void apply_param(Params& params, const std::string& key, const std::string& value);

class EdgeConfig {
 public:
  EdgeConfig() = default;
  EdgeConfig(const Params& params, std::vector<std::uint64_t> bits);

  const Params& params() const { return params_; }
  const Lattice& lattice() const { return lattice_; }
  double W() const { return W_; }

  bool open_slot(std::int64_t slot) const { return (bits_[slot >> 6] >> (slot & 63)) & 1U; }
  bool open(const EdgeId& e) const { return open_slot(lattice_.slot(e)); }
  double weight(const EdgeId& e) const { return open(e) ? 1.0 : W_; }
  std::int64_t open_count() const;
  const std::vector<std::uint64_t>& bits() const { return bits_; }

  void set_slot(std::int64_t slot, bool open) {
    if (open)
      bits_[slot >> 6] |= std::uint64_t{1} << (slot & 63);
    else
      bits_[slot >> 6] &= ~(std::uint64_t{1} << (slot & 63));
  }
  void set_open(const EdgeId& e, bool open) { set_slot(lattice_.slot(e), open); }
  void set_open(const Point& a, const Point& b, bool open) {
    set_open(lattice_.canonical_edge(a, b), open);
  }

 private:
  Params params_;
  Lattice lattice_;
  double W_ = 0.0;
  std::vector<std::uint64_t> bits_;
};

// Throws InvalidParams.
EdgeConfig sample_config(const Params& params);
// Deterministic fixture: every edge state given by the predicate.
EdgeConfig make_config(const Params& params, const std::function<bool(const EdgeId&)>& open);

enum class Weight { Unit, Heavy };

// Read-only view of a configuration with at most one edge forced.
class ConfigView {
 public:
  ConfigView(const EdgeConfig& cfg) : cfg_(&cfg) {}  // NOLINT: implicit by design

  const EdgeConfig& base() const { return *cfg_; }
  const Lattice& lattice() const { return cfg_->lattice(); }
  const Params& params() const { return cfg_->params(); }
  double W() const { return cfg_->W(); }

  bool open_slot(std::int64_t slot) const {
    return slot == forced_slot_ ? forced_open_ : cfg_->open_slot(slot);
  }
  bool open(const EdgeId& e) const { return open_slot(lattice().slot(e)); }
  bool open(const Point& a, const Point& b) const {
    for (int i = 0; i < a.dim(); ++i) {
      if (a[i] != b[i]) return open_slot(lattice().slot(a[i] < b[i] ? a : b, i));
    }
    return false;
  }
  double weight(const EdgeId& e) const { return open(e) ? 1.0 : W(); }

  ConfigView with_forced(const EdgeId& e, bool open) const {
    ConfigView v(*this);
    v.forced_slot_ = lattice().slot(e);
    v.forced_open_ = open;
    return v;
  }

 private:
  const EdgeConfig* cfg_;
  std::int64_t forced_slot_ = -1;
  bool forced_open_ = false;
};

inline ConfigView resample_edge(const ConfigView& cfg, const EdgeId& e, Weight value) {
  return cfg.with_forced(e, value == Weight::Unit);
}

}  // namespace chemdist
