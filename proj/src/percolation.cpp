#include "chemdist/percolation.hpp"

#include <bit>
#include <charconv>
#include <sstream>

#include "chemdist/errors.hpp"
#include "chemdist/format.hpp"

namespace chemdist {

double Params::c_op() const {
  if (c_star_op > 0) return c_star_op;
  if (d == 2) return 64.0;
  throw Error(ErrorKind::InvalidParams, "c_star_op must be given explicitly for d >= 3");
}

int Params::radius_cap() const {
  if (n_max > 0) return n_max;
  return static_cast<int>(std::ceil(4.0 * W()));
}

void Params::validate() const {
  if (d < 2 || d > kMaxDim) throw Error(ErrorKind::InvalidParams, "d must be in [2,4]");
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::InvalidParams, "p must lie in (0,1)");
  if (n < 3) throw Error(ErrorKind::InvalidParams, "n must be >= 3");
  if (B < 2) throw Error(ErrorKind::InvalidParams, "box factor must be >= 2");
  if (c_star_op < 0) throw Error(ErrorKind::InvalidParams, "c_star_op must be positive");
  if (d >= 3 && c_star_op <= 0)
    throw Error(ErrorKind::InvalidParams, "c_star_op must be given explicitly for d >= 3");
  if (!(rho > 0)) throw Error(ErrorKind::InvalidParams, "rho must be positive");
  if (goodbox_divisor < 0) throw Error(ErrorKind::InvalidParams, "goodbox_divisor must be >= 0");
  if (n_max < 0) throw Error(ErrorKind::InvalidParams, "n_max must be >= 0");
}

std::string Params::to_kv() const {
  std::ostringstream os;
  os << "d=" << d << '\n'
     << "p=" << fmt_num(p) << '\n'
     << "n=" << n << '\n'
     << "box_factor=" << B << '\n'
     << "seed=" << seed << '\n'
     << "c_star_op=" << fmt_num(c_star_op > 0 ? c_star_op : (d == 2 ? 64.0 : 0.0)) << '\n'
     << "rho=" << fmt_num(rho) << '\n'
     << "goodbox_divisor=" << fmt_num(subbox_divisor()) << '\n'
     << "n_max=" << radius_cap() << '\n'
     << "W=" << fmt_num(W()) << '\n'
     << "log=natural\n";
  return os.str();
}

void apply_param(Params& params, const std::string& key, const std::string& value) {
  auto as_int = [&](auto& out) {
    auto parsed = out;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), parsed);
    if (ec != std::errc() || ptr != value.data() + value.size())
      throw Error(ErrorKind::BadConfig, "bad integer for " + key + ": " + value);
    out = parsed;
  };
  auto as_real = [&](double& out) {
    try {
      std::size_t used = 0;
      const double parsed = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
      out = parsed;
    } catch (const std::exception&) {
      throw Error(ErrorKind::BadConfig, "bad number for " + key + ": " + value);
    }
  };
  if (key == "d") as_int(params.d);
  else if (key == "p") as_real(params.p);
  else if (key == "n") as_int(params.n);
  else if (key == "box_factor" || key == "B") as_int(params.B);
  else if (key == "seed") as_int(params.seed);
  else if (key == "c_star_op") as_real(params.c_star_op);
  else if (key == "rho") as_real(params.rho);
  else if (key == "goodbox_divisor") as_real(params.goodbox_divisor);
  else if (key == "n_max") as_int(params.n_max);
  else throw Error(ErrorKind::BadConfig, "unknown parameter key: " + key);
}

EdgeConfig::EdgeConfig(const Params& params, std::vector<std::uint64_t> bits)
    : params_(params),
      lattice_(Lattice::centered(params.d, params.domain_radius())),
      W_(params.W()),
      bits_(std::move(bits)) {
  bits_.resize(static_cast<std::size_t>((lattice_.slot_count() + 63) / 64), 0);
}

std::int64_t EdgeConfig::open_count() const {
  std::int64_t c = 0;
  for (std::uint64_t w : bits_) c += std::popcount(w);
  return c;
}

EdgeConfig sample_config(const Params& params) {
  params.validate();
  const Lattice lat = Lattice::centered(params.d, params.domain_radius());
  const int d = params.d;
  std::vector<std::uint64_t> bits(static_cast<std::size_t>((lat.slot_count() + 63) / 64), 0);
  for (std::int64_t v = 0; v < lat.vertex_count(); ++v) {
    const Point lo = lat.vertex_at(v);
    for (int axis = 0; axis < d; ++axis) {
      if (lat.digit(v, axis) == lat.side() - 1) continue;
      if (edge_uniform(params.seed, lo, axis) < params.p) {
        const std::int64_t s = v * d + axis;
        bits[s >> 6] |= std::uint64_t{1} << (s & 63);
      }
    }
  }
  return EdgeConfig(params, std::move(bits));
}

EdgeConfig make_config(const Params& params, const std::function<bool(const EdgeId&)>& open) {
  params.validate();
  EdgeConfig cfg(params, {});
  for (const EdgeId& e : cfg.lattice().edges())
    if (open(e)) cfg.set_open(e, true);
  return cfg;
}

}  // namespace chemdist
