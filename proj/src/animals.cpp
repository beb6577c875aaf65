#include "chemdist/animals.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>

#include "chemdist/errors.hpp"

namespace chemdist {

EdgeField::EdgeField(const BoxSpec& box)
    : lat_(box), x_(static_cast<std::size_t>(lat_.slot_count()), std::numeric_limits<double>::quiet_NaN()) {}

bool EdgeField::has(const EdgeId& e) const {
  return lat_.contains(e.x_e) && lat_.contains(e.y_e) && !std::isnan(x_[static_cast<std::size_t>(lat_.slot(e))]);
}

double EdgeField::at(const EdgeId& e) const {
  if (!lat_.contains(e.x_e) || !lat_.contains(e.y_e)) throw Error(ErrorKind::OutOfBox, e.str() + " outside the field");
  const double x = x_[static_cast<std::size_t>(lat_.slot(e))];
  if (std::isnan(x)) throw Error(ErrorKind::PreconditionViolated, "no field value on " + e.str());
  return x;
}

void EdgeField::set(const EdgeId& e, double x) {
  if (!lat_.contains(e.x_e) || !lat_.contains(e.y_e)) throw Error(ErrorKind::OutOfBox, e.str() + " outside the field");
  x_[static_cast<std::size_t>(lat_.slot(e))] = x;
}

EdgeField goodbox_radius_field(const ConfigView& cfg, const BoxSpec& box, Coord cap) {
  EdgeField X(box);
  std::map<Point, double> by_anchor;
  for (const EdgeId& e : X.lattice().edges()) {
    auto it = by_anchor.find(e.x_e);
    if (it == by_anchor.end()) {
      const RadiusRecord r = goodbox_radius(cfg, e, cap);
      it = by_anchor.emplace(e.x_e, static_cast<double>(r.N ? *r.N : cap + 1)).first;
    }
    X.set(e, it->second);
  }
  return X;
}

EdgeField rhat_field(const ConfigView& cfg, const BoxSpec& box, const std::vector<RadiusRecord>& records) {
  EdgeField X(box);
  const double c = cfg.params().c_op();
  for (const RadiusRecord& r : records) X.set(r.edge, r.truncated(c, cfg.W()) / c);
  return X;
}

IndicatorField::IndicatorField(const EdgeField& X, Coord M)
    : lat_(X.lattice()), M_(M), bits_(static_cast<std::size_t>(lat_.slot_count()), 0) {
  const double lo = static_cast<double>(M - 1), hi = static_cast<double>(M);
  for (const EdgeId& e : lat_.edges()) {
    if (!X.has(e)) continue;
    const double x = X.at(e);
    bits_[static_cast<std::size_t>(lat_.slot(e))] = x >= lo && x < hi;
  }
}

IndicatorField::IndicatorField(const BoxSpec& box, Coord M, const std::function<bool(const EdgeId&)>& fires)
    : lat_(box), M_(M), bits_(static_cast<std::size_t>(lat_.slot_count()), 0) {
  for (const EdgeId& e : lat_.edges()) bits_[static_cast<std::size_t>(lat_.slot(e))] = fires(e);
}

bool IndicatorField::fires(const Point& a, const Point& b) const {
  for (int i = 0; i < a.dim(); ++i)
    if (a[i] != b[i]) return bits_[static_cast<std::size_t>(lat_.slot(a[i] < b[i] ? a : b, i))] != 0;
  return false;
}

std::int64_t IndicatorField::fired() const {
  std::int64_t k = 0;
  for (std::uint8_t b : bits_) k += b;
  return k;
}

double IndicatorField::qhat() const {
  return lat_.edge_count() ? static_cast<double>(fired()) / static_cast<double>(lat_.edge_count()) : 0.0;
}

std::string to_string(AnimalMethod m) { return m == AnimalMethod::Exact ? "exact" : "beam"; }

std::int64_t animal_value(const IndicatorField& f, const PathRep& gamma) {
  std::int64_t v = 0;
  for (std::size_t i = 1; i < gamma.size(); ++i) v += f.fires(gamma[i - 1], gamma[i]);
  return v;
}

namespace {

// Lambda_L(0) as an adjacency table with firing bits.
struct Graph {
  Lattice lat;
  int deg = 0;
  std::vector<std::int32_t> nbr;  // V * deg, -1 outside
  std::vector<std::uint8_t> w;
  std::int64_t fired = 0;

  Graph(const IndicatorField& f, Coord L) : lat(BoxSpec{Point(f.lattice().dim()), L}) {
    if (!f.lattice().contains(lat.box()))
      throw Error(ErrorKind::OutOfBox, "Lambda_" + std::to_string(L) + " exceeds the indicator field");
    const int d = lat.dim();
    deg = 2 * d;
    const auto V = static_cast<std::size_t>(lat.vertex_count());
    nbr.assign(V * static_cast<std::size_t>(deg), -1);
    w.assign(V * static_cast<std::size_t>(deg), 0);
    for (std::int64_t v = 0; v < lat.vertex_count(); ++v) {
      const Point p = lat.vertex_at(v);
      for (int a = 0; a < d; ++a)
        for (int s = 0; s < 2; ++s) {
          Point q = p;
          q[a] += s ? 1 : -1;
          if (!lat.contains(q)) continue;
          const auto k = static_cast<std::size_t>(v * deg + 2 * a + s);
          nbr[k] = static_cast<std::int32_t>(lat.vertex_index(q));
          w[k] = f.fires(p, q);
          if (s) fired += w[k];
        }
    }
  }

  PathRep path(const std::vector<std::int32_t>& idx) const {
    std::vector<Point> v;
    v.reserve(idx.size());
    for (std::int32_t i : idx) v.push_back(lat.vertex_at(i));
    return PathRep(std::move(v));
  }
};

class ExactSearch {
 public:
  ExactSearch(const Graph& g, Coord L) : g_(g), L_(static_cast<int>(L)) {
    visited_.assign(static_cast<std::size_t>(g.lat.vertex_count()), 0);
    upper_ = static_cast<int>(std::min<std::int64_t>(L, g.fired));
  }

  void run() {
    for (std::int32_t s = 0; s < g_.lat.vertex_count() && best_ < upper_; ++s) {
      path_.assign(1, s);
      visited_[static_cast<std::size_t>(s)] = 1;
      go(s, 0, 0);
      visited_[static_cast<std::size_t>(s)] = 0;
    }
    if (best_path_.empty()) best_path_.assign(1, 0);
  }

  int best() const { return best_; }
  const std::vector<std::int32_t>& best_path() const { return best_path_; }

 private:
  void go(std::int32_t v, int depth, int value) {
    if (value > best_ || best_path_.empty()) {
      best_ = value;
      best_path_ = path_;
    }
    if (best_ >= upper_ || depth == L_) return;
    if (value + std::min(L_ - depth, static_cast<int>(g_.fired) - value) <= best_) return;
    for (int pass = 1; pass >= 0; --pass)
      for (int k = 0; k < g_.deg; ++k) {
        const auto slot = static_cast<std::size_t>(v * g_.deg + k);
        const std::int32_t u = g_.nbr[slot];
        if (u < 0 || g_.w[slot] != pass || visited_[static_cast<std::size_t>(u)]) continue;
        visited_[static_cast<std::size_t>(u)] = 1;
        path_.push_back(u);
        go(u, depth + 1, value + pass);
        path_.pop_back();
        visited_[static_cast<std::size_t>(u)] = 0;
        if (best_ >= upper_) return;
      }
  }

  const Graph& g_;
  int L_;
  int upper_ = 0;
  int best_ = 0;
  std::vector<std::uint8_t> visited_;
  std::vector<std::int32_t> path_, best_path_;
};

struct BeamState {
  std::vector<std::int32_t> path;
  int value = 0;
  int look = 0;  // firing edges from the end to unvisited vertices
};

bool on_path(const std::vector<std::int32_t>& path, std::int32_t u) {
  return std::find(path.begin(), path.end(), u) != path.end();
}

int lookahead(const Graph& g, const std::vector<std::int32_t>& path) {
  const std::int32_t v = path.back();
  int k = 0;
  for (int j = 0; j < g.deg; ++j) {
    const auto slot = static_cast<std::size_t>(v * g.deg + j);
    if (g.nbr[slot] >= 0 && g.w[slot] && !on_path(path, g.nbr[slot])) ++k;
  }
  return k;
}

std::pair<int, std::vector<std::int32_t>> beam_once(const Graph& g, Coord L, std::size_t width) {
  std::vector<BeamState> beam;
  for (std::int32_t s = 0; s < g.lat.vertex_count(); ++s) beam.push_back({{s}, 0, 0});
  int best = 0;
  std::vector<std::int32_t> best_path{0};
  auto better = [](const BeamState& a, const BeamState& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.look != b.look) return a.look > b.look;
    return a.path < b.path;
  };
  for (Coord step = 0; step < L && !beam.empty(); ++step) {
    std::vector<BeamState> next;
    for (const BeamState& st : beam) {
      const std::int32_t v = st.path.back();
      for (int k = 0; k < g.deg; ++k) {
        const auto slot = static_cast<std::size_t>(v * g.deg + k);
        const std::int32_t u = g.nbr[slot];
        if (u < 0 || on_path(st.path, u)) continue;
        BeamState nx;
        nx.path = st.path;
        nx.path.push_back(u);
        nx.value = st.value + g.w[slot];
        nx.look = lookahead(g, nx.path);
        next.push_back(std::move(nx));
      }
    }
    if (next.size() > width) {
      std::partial_sort(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(width), next.end(), better);
      next.resize(width);
    } else {
      std::sort(next.begin(), next.end(), better);
    }
    if (!next.empty() && next.front().value > best) {
      best = next.front().value;
      best_path = next.front().path;
    }
    beam = std::move(next);
  }
  return {best, best_path};
}

}  // namespace

AnimalResult n_lm_exact(const IndicatorField& f, Coord L, Coord L_exact_max) {
  if (L > L_exact_max)
    throw Error(ErrorKind::TooLargeForExact, "L=" + std::to_string(L) + " exceeds " + std::to_string(L_exact_max));
  const Graph g(f, L);
  ExactSearch s(g, L);
  s.run();
  return {L, f.M(), s.best(), g.path(s.best_path()), AnimalMethod::Exact};
}

AnimalResult n_lm_beam(const IndicatorField& f, Coord L, std::size_t beam_width) {
  if (beam_width < 1) throw Error(ErrorKind::InvalidParams, "beam width must be at least 1");
  const Graph g(f, L);
  int best = -1;
  std::vector<std::int32_t> best_path;
  for (std::size_t w = 1;; w = std::min(2 * w, beam_width)) {
    auto [v, p] = beam_once(g, L, w);
    if (v > best) {
      best = v;
      best_path = std::move(p);
    }
    if (w == beam_width) break;
  }
  return {L, f.M(), best, g.path(best_path), AnimalMethod::Beam};
}

double path_cost(const EdgeField& X, const PathRep& gamma, const std::function<double(double)>& f) {
  double s = 0.0;
  for (std::size_t i = 1; i < gamma.size(); ++i) s += f(X.at(X.lattice().canonical_edge(gamma[i - 1], gamma[i])));
  return s;
}

AnimalScaling animal_scaling(const AnimalSpec& spec) {
  if (spec.Ms.empty() || spec.Ls.empty() || spec.reps < 1)
    throw Error(ErrorKind::InvalidParams, "animal scaling needs M values, L values and reps");
  const Coord Lmax = *std::max_element(spec.Ls.begin(), spec.Ls.end());
  if (spec.params.domain_radius() < Lmax + 4 * spec.radius_cap)
    throw Error(ErrorKind::InvalidParams, "domain too small for Lambda_(L + 4 radius_cap)");
  const int d = spec.params.d;
  AnimalScaling out;
  std::map<Coord, std::pair<std::int64_t, std::int64_t>> fired;  // M -> (fired, edges)
  for (int r = 0; r < spec.reps; ++r) {
    Params pr = spec.params;
    pr.seed = spec.params.seed + static_cast<std::uint64_t>(r);
    const EdgeConfig cfg = sample_config(pr);
    const EdgeField X = goodbox_radius_field(cfg, BoxSpec{Point(d), Lmax}, spec.radius_cap);
    for (Coord M : spec.Ms) {
      const IndicatorField I(X, M);
      const std::int64_t k = I.fired();
      fired[M].first += k;
      fired[M].second += I.lattice().edge_count();
      for (Coord L : spec.Ls) {
        const AnimalResult a = L <= spec.L_exact_max ? n_lm_exact(I, L, spec.L_exact_max) : n_lm_beam(I, L, spec.beam_width);
        out.raw.push_back({r, pr.seed, M, L, a.value, k, I.lattice().edge_count()});
      }
    }
  }
  for (Coord M : spec.Ms)
    for (Coord L : spec.Ls) {
      AnimalRow row;
      row.d = d;
      row.p = spec.params.p;
      row.M = M;
      row.L = L;
      row.reps = spec.reps;
      std::vector<std::int64_t> vals;
      for (const AnimalRaw& a : out.raw)
        if (a.M == M && a.L == L) vals.push_back(a.value);
      double sum = 0.0;
      for (std::int64_t v : vals) sum += static_cast<double>(v);
      row.mean = sum / static_cast<double>(vals.size());
      row.qhat = static_cast<double>(fired[M].first) / static_cast<double>(fired[M].second);
      const double scale = static_cast<double>(L) * std::pow(row.qhat, 1.0 / d) * std::pow(static_cast<double>(M), d + 1);
      row.normalized_ratio = scale > 0 ? row.mean / scale : std::numeric_limits<double>::quiet_NaN();
      row.tail_t = std::ceil(spec.tail_factor * row.mean);
      std::int64_t hits = 0;
      for (std::int64_t v : vals) hits += static_cast<double>(v) >= row.tail_t;
      row.tail_freq = static_cast<double>(hits) / static_cast<double>(vals.size());
      out.rows.push_back(row);
    }
  return out;
}

}  // namespace chemdist
