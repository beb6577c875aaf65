// Acceptance checks, one pass/fail line per criterion. Usage: chemdist_acceptance [N ...]

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "chemdist/animals.hpp"
#include "chemdist/covering.hpp"
#include "chemdist/errors.hpp"
#include "chemdist/experiments.hpp"
#include "chemdist/shortest_paths.hpp"
#include "oracles.hpp"

using namespace chemdist;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

ExperimentSpec spec_for(ExperimentKind kind, double p, int reps, std::uint64_t seed) {
  ExperimentSpec s;
  s.kind = kind;
  s.params.p = p;
  s.params.seed = seed;
  s.reps = reps;
  return s;
}

// 1. bfs_distance and truncated_T against exhaustive self-avoiding paths.
Verdict c1() {
  int mismatches = 0, configs = 0;
  for (int d : {2, 3}) {
    Params pr;
    pr.d = d;
    pr.n = 4;
    if (d == 3) pr.c_star_op = 100;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
      pr.seed = 1000 * d + seed;
      pr.p = 0.35 + 0.5 * static_cast<double>(seed % 7) / 6;
      const EdgeConfig cfg = sample_config(pr);
      // d=2: 5x5 box. d=3: 2x3x3 block.
      Region U = Region::of_box(BoxSpec{Point(d), 2});
      if (d == 3) U.filter = [](const Point& v) { return v[0] < 0 && v[1] < 1 && v[2] < 1; };
      std::vector<Point> verts;
      for (const Point& v : box_points(U.box))
        if (U.contains(v)) verts.push_back(v);
      if (verts.size() > 25) return {false, "oracle region too large"};
      Stream rng(pr.seed, 3);
      const Point src = verts[rng.below(verts.size())];
      const auto brute = oracle::all_paths(cfg, verts, src);
      const auto D = bfs_distance(cfg, U, src);
      const auto T = truncated_T(cfg, U, src);
      for (const Point& v : verts) {
        const auto it = brute.D.find(v);
        const bool d_ok = it == brute.D.end() ? !D.reachable(v) : D.distance(v) == it->second;
        const bool t_ok = T.distance(v) && *T.distance(v) == brute.T.at(v);
        mismatches += !d_ok + !t_ok;
      }
      ++configs;
    }
  }
  return {mismatches == 0, std::to_string(configs) + " configs (d=2,3), " + std::to_string(mismatches) + " mismatches"};
}

// 2. n_lm_exact against plain enumeration.
Verdict c2() {
  int mismatches = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const Coord L = 2 + static_cast<Coord>(2 * (seed % 4));
    const double q = 0.1 + 0.8 * static_cast<double>(seed % 9) / 8;
    const IndicatorField f(BoxSpec{Point(2), L}, 1,
                           [&](const EdgeId& e) { return edge_uniform(seed, e.lo(), e.axis()) < q; });
    const std::int64_t exact = n_lm_exact(f, L).value;
    const std::int64_t brute = oracle::animal_max([&](const Point& a, const Point& b) { return f.fires(a, b); }, 2, L);
    mismatches += exact != brute;
  }
  return {mismatches == 0, "100 fields, L in {2,4,6,8}, " + std::to_string(mismatches) + " mismatches"};
}

// 3. Covering invariants on T* geodesics.
Verdict c3() {
  ExperimentSpec s = spec_for(ExperimentKind::CoveringAudit, 0.7, 200, 30001);
  s.params.n = 128;
  s.ps = {0.6, 0.7, 0.8};
  const ExperimentOutput out = run_experiment(s);
  const Table& m = out.main;
  std::int64_t aborted = 0, stuck = 0, bad = 0, ok = 0, nontrivial = 0;
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    const std::string& status = m.rows[r][m.col("status")];
    if (status == "stuck") {
      ++stuck;
      continue;
    }
    if (status != "ok") {
      ++aborted;
      continue;
    }
    ++ok;
    nontrivial += m.num(r, "Gamma") > 0;
    bool good = m.num(r, "violations") == 0;
    for (const char* col : {"iia", "iib", "radii_nonincreasing", "eta_open", "t_star_le_d_star"})
      good = good && m.rows[r][m.col(col)] == "true";
    bad += !good;
  }
  const double rate = static_cast<double>(aborted) / static_cast<double>(m.rows.size());
  // Diagnostic, not gated: straight segments from 0 to n e1 carry many closed edges.
  int rows = 0, row_aborts = 0;
  std::map<std::string, int> row_fails;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    Params pr;
    pr.p = 0.7;
    pr.n = 128;
    pr.seed = 31001 + seed;
    const EdgeConfig cfg = sample_config(pr);
    std::vector<Point> v;
    for (Coord x = 0; x <= pr.n; ++x) v.push_back(Point::unit(2, 0, x));
    try {
      const CoveringResult c = covering_process(cfg, PathRep(std::move(v)));
      ++rows;
      if (!c.violations.empty()) ++row_fails["bypass"];
      if (!c.separation_ok) ++row_fails["iia"];
      if (!c.bound_ok) ++row_fails["iib"];
      if (!c.radii_nonincreasing) ++row_fails["radii"];
      if (!c.eta_open) ++row_fails["open"];
    } catch (const Error&) {
      ++row_aborts;
    }
  }
  std::string row_detail = "; straight-row diagnostic: " + std::to_string(rows) + " completed, " +
                           std::to_string(row_aborts) + " aborted";
  for (const auto& [k, v] : row_fails) row_detail += ", " + k + " fails " + std::to_string(v);
  return {bad == 0 && stuck == 0 && rate <= 0.02,
          std::to_string(m.rows.size()) + " replicas, " + std::to_string(ok) + " completed (" + std::to_string(nontrivial) +
              " with closed edges), " + std::to_string(bad) + " invariant failures, " + std::to_string(stuck) +
              " stuck, abort rate " + num(rate) + " (limit 0.02)" + row_detail};
}

// 4. 0 <= grad_e T_n <= bound on geodesic edges.
Verdict c4() {
  int cases = 0, fails = 0, nonzero = 0;
  for (int r = 0; r < 100; ++r) {
    Params pr;
    pr.p = 0.7;
    pr.n = 128;
    pr.seed = 40001 + static_cast<std::uint64_t>(r);
    const EdgeConfig cfg = sample_config(pr);
    const PathRep gamma = t_n_geodesic(cfg);
    std::vector<EdgeId> edges;
    for (std::size_t i = 1; i < gamma.size(); ++i) edges.push_back(cfg.lattice().canonical_edge(gamma[i - 1], gamma[i]));
    Stream rng(pr.seed, 5);
    for (std::size_t k = 0; k < 20 && !edges.empty(); ++k) {
      const std::size_t j = k + rng.below(edges.size() - k);
      std::swap(edges[k], edges[j]);
      const GradResult g = grad_T(cfg, edges[k]);
      ++cases;
      fails += !g.holds;
      nonzero += g.delta > 0;
    }
  }
  return {cases == 2000 && fails == 0, std::to_string(cases) + " edges, " + std::to_string(fails) + " violations, " +
                                           std::to_string(nonzero) + " with positive gradient"};
}

// 5. Linear log-survival of GoodBox radii.
Verdict c5() {
  ExperimentSpec s = spec_for(ExperimentKind::RadiusTail, 0.7, 100, 50001);
  s.params.n = 256;
  s.edges_per_rep = 20;
  const ExperimentOutput out = run_experiment(s);
  const Table& fit = out.table("fit");
  const double r2 = fit.num(0, "r2"), slope = fit.num(0, "slope");
  const auto edges = out.raw.rows.size();
  return {edges >= 2000 && r2 >= 0.9 && slope < 0,
          std::to_string(edges) + " edges, R2 " + num(r2) + " (limit 0.9), slope " + num(slope) + " over " +
              num(fit.num(0, "points")) + " points; after onset R2 " + num(fit.num(1, "r2"))};
}

ExperimentOutput variance_run(int B, const std::vector<int>& ns) {
  ExperimentSpec s = spec_for(ExperimentKind::VarianceSweep, 0.7, 300, 60001);
  s.params.B = B;
  s.ns = ns;
  return run_experiment(s);
}

ExperimentOutput discrepancy_run(int B, const std::vector<int>& ns) {
  ExperimentSpec s = spec_for(ExperimentKind::DiscrepancyTail, 0.7, 200, 80001);
  s.raw = true;
  s.params.B = B;
  s.ns = ns;
  return run_experiment(s);
}

// 6. Var * ln n / n does not grow from n=64 to n=512.
Verdict c6() {
  const ExperimentOutput out = variance_run(2, {64, 128, 256, 512});
  const Table& m = out.main;
  const double d64 = m.num(0, "ratio_D"), d512 = m.num(3, "ratio_D");
  const double t64 = m.num(0, "ratio_T"), t512 = m.num(3, "ratio_T");
  std::string detail = "ratio_D";
  for (std::size_t r = 0; r < 4; ++r) detail += " " + num(m.num(r, "ratio_D"));
  detail += "; ratio_T";
  for (std::size_t r = 0; r < 4; ++r) detail += " " + num(m.num(r, "ratio_T"));
  detail += "; 512/64: D " + num(d512 / d64) + ", T " + num(t512 / t64) + " (limit 1.2)";
  return {d512 <= 1.2 * d64 && t512 <= 1.2 * t64, detail};
}

// 7. Linear log-survival of |T_n - mean| on the sqrt(n / ln n) scale.
Verdict c7() {
  ExperimentSpec s = spec_for(ExperimentKind::ConcentrationTail, 0.7, 1000, 70001);
  s.params.n = 256;
  const ExperimentOutput out = run_experiment(s);
  const Table& fit = out.table("fit");
  const double r2 = fit.num(0, "r2"), slope = fit.num(0, "slope");
  return {r2 >= 0.9 && slope < 0, "T_n: R2 " + num(r2) + " (limit 0.9), slope " + num(slope) + " over " +
                                      num(fit.num(0, "points")) + " points; D*: R2 " + num(fit.num(1, "r2"))};
}

// 8. Q95 of |D* - T_n| grows by at most 2.5 while n grows 4x, read as
// Q95(512) <= 2.5 Q95(128) so that a zero quantile stays meaningful.
Verdict c8() {
  const ExperimentOutput out = discrepancy_run(2, {128, 512});
  const Table& m = out.main;
  const double a = m.num(0, "q95"), b = m.num(1, "q95");
  std::map<double, int> nonzero;
  for (std::size_t r = 0; r < out.raw.rows.size(); ++r) nonzero[out.raw.num(r, "n")] += out.raw.num(r, "discrepancy") > 0;
  std::string detail = "Q95 " + num(a) + " -> " + num(b) + " (limit 2.5 x)";
  for (std::size_t r = 0; r < 2; ++r)
    detail += "; n=" + num(m.num(r, "n")) + ": q99 " + num(m.num(r, "q99")) + ", max " + num(m.num(r, "max")) + ", nonzero " +
              std::to_string(nonzero[m.num(r, "n")]) + "/200";
  return {b <= 2.5 * a, detail};
}

// 9. Doubling L roughly doubles the animal mean; normalized ratios bounded.
Verdict c9() {
  ExperimentSpec s = spec_for(ExperimentKind::AnimalScaling, 0.9, 20, 90001);
  s.params.n = 64;
  s.Ms = {2, 3, 4};
  s.Ls = {8, 16, 32};
  const ExperimentOutput out = run_experiment(s);
  const Table& m = out.main;
  std::map<std::int64_t, std::map<std::int64_t, double>> mean;
  double lo = INFINITY, hi = 0;
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    mean[static_cast<std::int64_t>(m.num(r, "M"))][static_cast<std::int64_t>(m.num(r, "L"))] = m.num(r, "mean");
    const double nr = m.num(r, "normalized_ratio");
    if (std::isfinite(nr)) lo = std::min(lo, nr), hi = std::max(hi, nr);
  }
  bool ok = hi > 0 && hi / lo <= 10;
  std::string detail = "factors";
  for (const auto& [M, byL] : mean)
    for (auto it = byL.begin(); std::next(it) != byL.end(); ++it) {
      const double f = std::next(it)->second / it->second;
      ok = ok && f >= 1.5 && f <= 2.5;
      detail += " M" + std::to_string(M) + ":L" + std::to_string(it->first) + "=" + num(f);
    }
  detail += "; normalized max/min " + num(hi / lo) + " (limits [1.5,2.5], 10)";
  return {ok, detail};
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

// 10. Identical specs give byte-identical files.
Verdict c10() {
  const auto root = std::filesystem::temp_directory_path() / "chemdist_acceptance_determinism";
  std::filesystem::remove_all(root);
  std::vector<ExperimentSpec> specs;
  for (ExperimentKind k : {ExperimentKind::VarianceSweep, ExperimentKind::RadiusTail, ExperimentKind::CoveringAudit,
                           ExperimentKind::AnimalScaling}) {
    ExperimentSpec s = spec_for(k, 0.7, 30, 100001);
    s.params.n = 32;
    s.raw = true;
    s.edges_per_rep = 5;
    s.Ms = {2};
    s.Ls = {4, 8};
    s.radius_cap = 4;
    specs.push_back(s);
  }
  int files = 0, differ = 0;
  for (ExperimentSpec s : specs) {
    std::vector<std::string> written[2];
    for (int run = 0; run < 2; ++run) {
      s.out = (root / std::to_string(run) / (to_string(s.kind) + ".csv")).string();
      s.threads = run + 1;
      s.order_seed = static_cast<std::uint64_t>(run) * 99;
      written[run] = write_outputs(s, run_experiment(s), 0.0);
    }
    for (std::size_t i = 0; i < written[0].size(); ++i) {
      ++files;
      differ += slurp(written[0][i]) != slurp(written[1][i]) || slurp(written[0][i]).empty();
    }
  }
  std::filesystem::remove_all(root);
  return {files > 0 && differ == 0, std::to_string(files) + " file pairs, " + std::to_string(differ) + " differ"};
}

// 11. Criteria 6 and 8 statistics at n=128 move by less than 10% from B=2 to B=3.
Verdict c11() {
  const ExperimentOutput v2 = variance_run(2, {128}), v3 = variance_run(3, {128});
  const ExperimentOutput q2 = discrepancy_run(2, {128}), q3 = discrepancy_run(3, {128});
  auto change = [](double a, double b) { return a == b ? 0.0 : std::abs(b - a) / std::abs(a); };
  const double cd = change(v2.main.num(0, "ratio_D"), v3.main.num(0, "ratio_D"));
  const double ct = change(v2.main.num(0, "ratio_T"), v3.main.num(0, "ratio_T"));
  const double cq = change(q2.main.num(0, "q95"), q3.main.num(0, "q95"));
  return {cd < 0.1 && ct < 0.1 && cq < 0.1,
          "relative change ratio_D " + num(cd) + ", ratio_T " + num(ct) + ", Q95 " + num(cq) + " (limit 0.1)"};
}

const std::map<int, std::pair<std::string, std::function<Verdict()>>> kCriteria = {
    {1, {"oracle equivalence, distances", c1}}, {2, {"oracle equivalence, animals", c2}},
    {3, {"covering invariants", c3}},           {4, {"resampling bound", c4}},
    {5, {"radius tail", c5}},                   {6, {"variance scaling", c6}},
    {7, {"concentration tail", c7}},            {8, {"discrepancy sublinearity", c8}},
    {9, {"lattice-animal scaling", c9}},        {10, {"determinism", c10}},
    {11, {"box-proxy stability", c11}},
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> which;
  for (int i = 1; i < argc; ++i) which.insert(std::stoi(argv[i]));
  if (which.empty())
    for (const auto& [k, v] : kCriteria) which.insert(k);
  int failed = 0;
  for (int k : which) {
    const auto it = kCriteria.find(k);
    if (it == kCriteria.end()) {
      std::printf("criterion %d: unknown\n", k);
      ++failed;
      continue;
    }
    Verdict v;
    try {
      v = it->second.second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    std::printf("criterion %d (%s): %s: %s\n", k, it->second.first.c_str(), v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
    failed += !v.pass;
  }
  return failed == 0 ? 0 : 1;
}
