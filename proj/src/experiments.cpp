#include "chemdist/experiments.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "chemdist/animals.hpp"
#include "chemdist/covering.hpp"
#include "chemdist/effective_radius.hpp"
#include "chemdist/errors.hpp"
#include "chemdist/format.hpp"
#include "chemdist/shortest_paths.hpp"
#include "chemdist/stats.hpp"

#ifndef CHEMDIST_GIT_DESCRIBE
#define CHEMDIST_GIT_DESCRIBE "unknown"
#endif

namespace chemdist {

void Table::add(std::vector<std::string> row) {
  if (row.size() != columns.size()) throw Error(ErrorKind::BadConfig, "row width does not match the columns");
  rows.push_back(std::move(row));
}

std::size_t Table::col(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw Error(ErrorKind::BadConfig, "no column " + name);
}

double Table::num(std::size_t row, const std::string& name) const { return std::stod(rows.at(row).at(col(name))); }

std::string cell(double x) { return fmt_num(x); }
std::string cell(std::int64_t x) { return std::to_string(x); }

namespace {

const std::vector<std::pair<ExperimentKind, std::string>> kKinds = {
    {ExperimentKind::VarianceSweep, "variance_sweep"},   {ExperimentKind::ConcentrationTail, "concentration_tail"},
    {ExperimentKind::DiscrepancyTail, "discrepancy_tail"}, {ExperimentKind::RadiusTail, "radius_tail"},
    {ExperimentKind::AnimalScaling, "animal_scaling"},   {ExperimentKind::CoveringAudit, "covering_audit"},
    {ExperimentKind::FmAverage, "fm_average"},           {ExperimentKind::Calibrate, "calibrate"},
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    T out{};
    if constexpr (std::is_floating_point_v<T>) out = static_cast<T>(std::stod(v, &used));
    else if constexpr (std::is_unsigned_v<T>) out = static_cast<T>(std::stoull(v, &used));
    else out = static_cast<T>(std::stoll(v, &used));
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw Error(ErrorKind::BadConfig, "bad value for " + key + ": " + v);
  }
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& v) {
  std::vector<T> out;
  for (const std::string& item : split_list(v)) out.push_back(parse_number<T>(key, item));
  if (out.empty()) throw Error(ErrorKind::BadConfig, "empty list for " + key);
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw Error(ErrorKind::BadConfig, "bad boolean for " + key + ": " + v);
}

Params cell_params(const ExperimentSpec& spec, int n, double p, int rep) {
  Params pr = spec.params;
  pr.n = n;
  pr.p = p;
  pr.seed = spec.params.seed + static_cast<std::uint64_t>(rep);
  pr.validate();
  return pr;
}

struct Sample {
  std::uint64_t seed = 0;
  std::int64_t d_star = 0;
  PassagePair t_star;
  PassagePair t_n;
  bool warning = false;
};

Sample sample_observables(const Params& pr) {
  const EdgeConfig cfg = sample_config(pr);
  const ClusterLabels labels = label_clusters(cfg);
  const Observables o = measure(cfg, labels);
  return {pr.seed, o.d_star, o.t_star, o.t_n, o.supercriticality_warning};
}

std::vector<Sample> sample_cell(const ExperimentSpec& spec, int n, double p) {
  return run_replicas<Sample>(spec.reps, spec.threads, spec.order_seed,
                              [&](int r) { return sample_observables(cell_params(spec, n, p, r)); });
}

void require_reps(const ExperimentSpec& spec, int min, const std::string& what) {
  if (spec.reps < min)
    throw Error(ErrorKind::InsufficientReps, what + " needs at least " + std::to_string(min) + " replicas");
}

}  // namespace

std::string to_string(ExperimentKind k) {
  for (const auto& [kind, name] : kKinds)
    if (kind == k) return name;
  return "unknown";
}

ExperimentKind parse_kind(const std::string& s) {
  for (const auto& [kind, name] : kKinds)
    if (name == s) return kind;
  throw Error(ErrorKind::BadConfig, "unknown experiment kind: " + s);
}

const Table& ExperimentOutput::table(const std::string& name) const {
  if (name == "main") return main;
  if (name == "raw") return raw;
  for (const auto& [n, t] : extra)
    if (n == name) return t;
  throw Error(ErrorKind::BadConfig, "no table " + name);
}

void apply_spec_key(ExperimentSpec& spec, const std::string& key, const std::string& value) {
  if (key == "kind") spec.kind = parse_kind(value);
  else if (key == "ns") spec.ns = parse_list<int>(key, value);
  else if (key == "ps") spec.ps = parse_list<double>(key, value);
  else if (key == "reps") spec.reps = parse_number<int>(key, value);
  else if (key == "threads") spec.threads = parse_number<int>(key, value);
  else if (key == "order_seed") spec.order_seed = parse_number<std::uint64_t>(key, value);
  else if (key == "raw") spec.raw = parse_bool(key, value);
  else if (key == "format") {
    if (value != "csv" && value != "jsonl") throw Error(ErrorKind::BadConfig, "format must be csv or jsonl");
    spec.format = value;
  } else if (key == "out") spec.out = value;
  else if (key == "kappa_step") spec.kappa_step = parse_number<double>(key, value);
  else if (key == "kappa_max") spec.kappa_max = parse_number<double>(key, value);
  else if (key == "L_factors") spec.L_factors = parse_list<double>(key, value);
  else if (key == "radius_methods") {
    spec.radius_methods = split_list(value);
    for (const std::string& m : spec.radius_methods)
      if (m != "goodbox" && m != "perpath") throw Error(ErrorKind::BadConfig, "radius method must be goodbox or perpath");
    if (spec.radius_methods.empty()) throw Error(ErrorKind::BadConfig, "empty list for radius_methods");
  } else if (key == "edges_per_rep") spec.edges_per_rep = parse_number<int>(key, value);
  else if (key == "Ms") spec.Ms = parse_list<Coord>(key, value);
  else if (key == "Ls") spec.Ls = parse_list<Coord>(key, value);
  else if (key == "beam_width") spec.beam_width = parse_number<std::size_t>(key, value);
  else if (key == "radius_cap") spec.radius_cap = parse_number<Coord>(key, value);
  else if (key == "L_exact_max") spec.L_exact_max = parse_number<Coord>(key, value);
  else if (key == "tail_factor") spec.tail_factor = parse_number<double>(key, value);
  else if (key == "samples_per_rep") spec.samples_per_rep = parse_number<int>(key, value);
  else if (key == "calib_min") spec.calib_min = parse_number<Coord>(key, value);
  else if (key == "calib_max") spec.calib_max = parse_number<Coord>(key, value);
  else if (key == "calib_level") spec.calib_level = parse_number<double>(key, value);
  else if (key == "fm_m") spec.fm_m = parse_number<int>(key, value);
  else apply_param(spec.params, key, value);
}

ExperimentSpec parse_spec(std::istream& in) {
  ExperimentSpec spec;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::BadConfig, "line " + std::to_string(lineno) + ": expected key=value");
    apply_spec_key(spec, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  spec.params.validate();
  return spec;
}

ExperimentOutput variance_sweep(const ExperimentSpec& spec) {
  require_reps(spec, 30, "variance_sweep");
  ExperimentOutput out;
  out.kind = ExperimentKind::VarianceSweep;
  out.main.columns = {"d", "p", "n", "reps", "mean_D", "var_D", "ratio_D", "mean_T", "var_T", "ratio_T", "mu_hat", "warnings"};
  out.raw.columns = {"p", "n", "rep", "seed", "D_star", "T_n", "T_n_unit", "T_n_heavy", "T_star"};
  for (double p : spec.p_grid())
    for (int n : spec.n_grid()) {
      const auto samples = sample_cell(spec, n, p);
      const double W = std::log(n) * std::log(n);
      Welford D, T;
      std::int64_t warnings = 0;
      for (std::size_t r = 0; r < samples.size(); ++r) {
        const Sample& s = samples[r];
        D.add(static_cast<double>(s.d_star));
        T.add(s.t_n.value(W));
        warnings += s.warning;
        out.raw.add({cell(p), cell(n), cell(static_cast<std::int64_t>(r)), cell(s.seed), cell(s.d_star), cell(s.t_n.value(W)),
                     cell(s.t_n.unit_edges), cell(s.t_n.heavy_edges), cell(s.t_star.value(W))});
      }
      const double scale = std::log(n) / n;
      out.main.add({cell(spec.params.d), cell(p), cell(n), cell(spec.reps), cell(D.mean()), cell(D.variance()),
                    cell(D.variance() * scale), cell(T.mean()), cell(T.variance()), cell(T.variance() * scale),
                    cell(D.mean() / n), cell(warnings)});
    }
  return out;
}

ExperimentOutput concentration_tail(const ExperimentSpec& spec) {
  require_reps(spec, 500, "concentration_tail");
  ExperimentOutput out;
  out.kind = ExperimentKind::ConcentrationTail;
  const int n = spec.params.n;
  const double p = spec.params.p;
  const double W = spec.params.W();
  const auto samples = sample_cell(spec, n, p);
  out.raw.columns = {"rep", "seed", "D_star", "T_n"};
  std::vector<double> t_vals, d_vals;
  for (std::size_t r = 0; r < samples.size(); ++r) {
    t_vals.push_back(samples[r].t_n.value(W));
    d_vals.push_back(static_cast<double>(samples[r].d_star));
    out.raw.add({cell(static_cast<std::int64_t>(r)), cell(samples[r].seed), cell(samples[r].d_star), cell(t_vals.back())});
  }
  const double scale = std::sqrt(n / std::log(n));
  out.main.columns = {"observable", "kappa", "survivors", "total", "survival"};
  Table fit;
  fit.columns = {"observable", "mean", "scale", "slope", "intercept", "r2", "points"};
  for (const auto& [name, vals] : {std::pair{std::string("T_n"), t_vals}, std::pair{std::string("D_star"), d_vals}}) {
    Welford w;
    for (double v : vals) w.add(v);
    std::vector<SurvivalCount> rows;
    const auto steps = static_cast<int>(std::floor(spec.kappa_max / spec.kappa_step + 1e-9));
    for (int k = 0; k <= steps; ++k) {
      const double kappa = k * spec.kappa_step;
      std::int64_t surv = 0;
      for (double v : vals) surv += std::abs(v - w.mean()) / scale >= kappa;
      const auto total = static_cast<std::int64_t>(vals.size());
      rows.push_back({kappa, surv, total});
      out.main.add({name, cell(kappa), cell(surv), cell(total), cell(static_cast<double>(surv) / static_cast<double>(total))});
    }
    const LinearFit f = log_survival_fit(rows);
    fit.add({name, cell(w.mean()), cell(scale), cell(f.slope), cell(f.intercept), cell(f.r2),
             cell(static_cast<std::int64_t>(f.points))});
  }
  out.extra.emplace_back("fit", std::move(fit));
  return out;
}

ExperimentOutput discrepancy_tail(const ExperimentSpec& spec) {
  ExperimentOutput out;
  out.kind = ExperimentKind::DiscrepancyTail;
  out.main.columns = {"p", "n", "reps", "mean", "q50", "q90", "q95", "q99", "max", "order_violations"};
  out.raw.columns = {"p", "n", "rep", "seed", "D_star", "T_n", "T_star", "discrepancy"};
  Table surv;
  surv.columns = {"p", "n", "L", "survivors", "total"};
  for (double p : spec.p_grid())
    for (int n : spec.n_grid()) {
      const auto samples = sample_cell(spec, n, p);
      const double W = std::log(n) * std::log(n);
      std::vector<double> disc;
      Welford w;
      std::int64_t violations = 0;
      for (std::size_t r = 0; r < samples.size(); ++r) {
        const Sample& s = samples[r];
        const double x = std::abs(static_cast<double>(s.d_star) - s.t_n.value(W));
        disc.push_back(x);
        w.add(x);
        violations += static_cast<double>(s.d_star) < s.t_star.value(W);
        out.raw.add({cell(p), cell(n), cell(static_cast<std::int64_t>(r)), cell(s.seed), cell(s.d_star),
                     cell(s.t_n.value(W)), cell(s.t_star.value(W)), cell(x)});
      }
      out.main.add({cell(p), cell(n), cell(spec.reps), cell(w.mean()), cell(quantile(disc, 0.5)), cell(quantile(disc, 0.9)),
                    cell(quantile(disc, 0.95)), cell(quantile(disc, 0.99)), cell(quantile(disc, 1.0)), cell(violations)});
      for (double f : spec.L_factors) {
        std::int64_t k = 0;
        for (double x : disc) k += x >= f * W;
        surv.add({cell(p), cell(n), cell(f * W), cell(k), cell(static_cast<std::int64_t>(disc.size()))});
      }
    }
  out.extra.emplace_back("survival", std::move(surv));
  return out;
}

ExperimentOutput radius_tail(const ExperimentSpec& spec) {
  ExperimentOutput out;
  out.kind = ExperimentKind::RadiusTail;
  const int d = spec.params.d;
  const int n = spec.params.n;
  out.main.columns = {"method", "t", "survivors", "total"};
  out.raw.columns = {"method", "rep", "seed", "edge", "N", "reason"};
  Table fit;
  fit.columns = {"method", "range", "t_from", "slope", "intercept", "r2", "points"};
  for (const std::string& method : spec.radius_methods) {
    const bool per_path = method == "perpath";
    struct Rep {
      std::uint64_t seed;
      std::vector<RadiusRecord> recs;
    };
    const auto reps = run_replicas<Rep>(spec.reps, spec.threads, spec.order_seed, [&](int r) {
      const Params pr = cell_params(spec, n, spec.params.p, r);
      const EdgeConfig cfg = sample_config(pr);
      Stream rng(pr.seed, per_path ? 12 : 11);
      if (per_path) {
        const PathRep gamma = t_n_geodesic(cfg);
        std::vector<EdgeId> all;
        for (std::size_t i = 1; i < gamma.size(); ++i) all.push_back(cfg.lattice().canonical_edge(gamma[i - 1], gamma[i]));
        const std::size_t k = std::min(all.size(), static_cast<std::size_t>(spec.edges_per_rep));
        for (std::size_t i = 0; i < k; ++i) std::swap(all[i], all[i + rng.below(all.size() - i)]);
        all.resize(k);
        return Rep{pr.seed, radius_field(cfg, all, RadiusMethod::PerPath, &gamma)};
      }
      std::vector<EdgeId> edges;
      for (int k = 0; k < spec.edges_per_rep; ++k) {
        Point x(d);
        for (int a = 0; a < d; ++a) x[a] = static_cast<Coord>(rng.below(2 * static_cast<std::uint64_t>(n) + 1)) - n;
        const int axis = static_cast<int>(rng.below(static_cast<std::uint64_t>(d)));
        edges.push_back(cfg.lattice().canonical_edge(x, x + Point::unit(d, axis)));
      }
      return Rep{pr.seed, radius_field(cfg, edges, RadiusMethod::GoodBox)};
    });
    std::vector<RadiusRecord> all;
    Coord top = 1;
    for (std::size_t r = 0; r < reps.size(); ++r)
      for (const RadiusRecord& rec : reps[r].recs) {
        all.push_back(rec);
        if (rec.N) top = std::max(top, *rec.N);
        out.raw.add({method, cell(static_cast<std::int64_t>(r)), cell(reps[r].seed), rec.edge.str(),
                     rec.N ? cell(static_cast<std::int64_t>(*rec.N)) : std::string("NA"), rec.reason});
      }
    std::vector<SurvivalCount> counts;
    for (const SurvivalRow& r : survival_curve(all, 1, top + 1)) {
      out.main.add({method, cell(static_cast<std::int64_t>(r.t)), cell(r.survivors), cell(r.total)});
      counts.push_back({static_cast<double>(r.t), r.survivors, r.total});
    }
    const LinearFit f = log_survival_fit(counts);
    fit.add({method, "all", cell(1), cell(f.slope), cell(f.intercept), cell(f.r2), cell(static_cast<std::int64_t>(f.points))});
    // Diagnostic only: the range after survival first drops to 90%.
    std::size_t onset = 0;
    while (onset < counts.size() && counts[onset].survivors * 10 > counts[onset].total * 9) ++onset;
    const std::vector<SurvivalCount> tail(counts.begin() + static_cast<std::ptrdiff_t>(onset), counts.end());
    const LinearFit g = log_survival_fit(tail);
    fit.add({method, "post_onset", cell(tail.empty() ? 0.0 : tail.front().t), cell(g.slope), cell(g.intercept), cell(g.r2),
             cell(static_cast<std::int64_t>(g.points))});
  }
  out.extra.emplace_back("fit", std::move(fit));
  return out;
}

ExperimentOutput animal_scaling_table(const ExperimentSpec& spec) {
  ExperimentOutput out;
  out.kind = ExperimentKind::AnimalScaling;
  AnimalSpec a;
  a.params = spec.params;
  a.Ms = spec.Ms;
  a.Ls = spec.Ls;
  a.reps = spec.reps;
  a.radius_cap = spec.radius_cap;
  a.L_exact_max = spec.L_exact_max;
  a.beam_width = spec.beam_width;
  a.tail_factor = spec.tail_factor;
  const AnimalScaling res = animal_scaling(a);
  out.main.columns = {"d", "p", "M", "L", "reps", "mean", "qhat", "normalized_ratio", "tail_t", "tail_freq"};
  for (const AnimalRow& r : res.rows)
    out.main.add({cell(r.d), cell(r.p), cell(static_cast<std::int64_t>(r.M)), cell(static_cast<std::int64_t>(r.L)), cell(r.reps),
                  cell(r.mean), cell(r.qhat), cell(r.normalized_ratio), cell(r.tail_t), cell(r.tail_freq)});
  out.raw.columns = {"rep", "seed", "M", "L", "value", "fired", "edges"};
  for (const AnimalRaw& r : res.raw)
    out.raw.add({cell(r.rep), cell(r.seed), cell(static_cast<std::int64_t>(r.M)), cell(static_cast<std::int64_t>(r.L)),
                 cell(r.value), cell(r.fired), cell(r.edges)});
  return out;
}

namespace {

struct Audit {
  std::uint64_t seed = 0;
  std::string status = "ok";
  std::size_t gamma_len = 0, closed0 = 0, gamma_size = 0, violations = 0;
  std::int64_t radius_sum = 0;
  double discrepancy = 0, bound = 0;
  bool iia = true, iib = true, radii = true, eta_open = true, t_le_d = true, min_radius = true;
};

Audit audit_one(const Params& pr) {
  Audit a;
  a.seed = pr.seed;
  const EdgeConfig cfg = sample_config(pr);
  const ClusterLabels labels = label_clusters(cfg);
  const PathRep gamma = t_star_geodesic(cfg, labels);
  a.gamma_len = gamma.length();
  a.closed0 = closed_edges(cfg, gamma).size();
  try {
    const CoveringResult c = covering_process(cfg, gamma);
    a.gamma_size = c.Gamma.size();
    a.radius_sum = c.radius_sum;
    a.discrepancy = c.discrepancy;
    a.bound = c.bound;
    a.iia = c.separation_ok;
    a.iib = c.bound_ok;
    a.radii = c.radii_nonincreasing;
    a.eta_open = c.eta_open;
    a.t_le_d = c.t_star <= static_cast<double>(c.d_star) + 1e-9;
    a.violations = c.violations.size();
    const double floor_r = cfg.W() / (2 * cfg.params().c_op());
    for (const CoveringStep& s : c.Gamma) a.min_radius = a.min_radius && static_cast<double>(s.radius) >= floor_r;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::PreconditionViolated) a.status = "precondition_failure";
    else if (e.kind() == ErrorKind::RadiusNotFound) a.status = "radius_not_found";
    else if (e.kind() == ErrorKind::StuckIteration) a.status = "stuck";
    else throw;
  }
  return a;
}

}  // namespace

ExperimentOutput covering_audit(const ExperimentSpec& spec) {
  ExperimentOutput out;
  out.kind = ExperimentKind::CoveringAudit;
  out.main.columns = {"p", "n", "rep", "seed", "status", "gamma_len", "closed0", "Gamma", "radius_sum", "discrepancy", "bound",
                      "iia", "iib", "radii_nonincreasing", "eta_open", "t_star_le_d_star", "violations", "min_radius_ok"};
  Table sum;
  sum.columns = {"p", "n", "reps", "aborted", "abort_rate", "stuck", "nontrivial", "iia_pass", "iib_pass", "radii_pass",
                 "eta_open_pass", "t_le_d_pass", "violation_free", "min_radius_rate", "precondition_failures"};
  for (double p : spec.p_grid())
    for (int n : spec.n_grid()) {
      const auto audits = run_replicas<Audit>(spec.reps, spec.threads, spec.order_seed,
                                              [&](int r) { return audit_one(cell_params(spec, n, p, r)); });
      std::int64_t aborted = 0, stuck = 0, nontrivial = 0, iia = 0, iib = 0, radii = 0, open = 0, tle = 0, clean = 0, minr = 0,
                   pre = 0;
      for (std::size_t r = 0; r < audits.size(); ++r) {
        const Audit& a = audits[r];
        out.main.add({cell(p), cell(n), cell(static_cast<std::int64_t>(r)), cell(a.seed), a.status,
                      cell(static_cast<std::int64_t>(a.gamma_len)), cell(static_cast<std::int64_t>(a.closed0)),
                      cell(static_cast<std::int64_t>(a.gamma_size)), cell(a.radius_sum), cell(a.discrepancy), cell(a.bound),
                      cell(a.iia), cell(a.iib), cell(a.radii), cell(a.eta_open), cell(a.t_le_d),
                      cell(static_cast<std::int64_t>(a.violations)), cell(a.min_radius)});
        pre += a.status == "precondition_failure";
        if (a.status == "stuck") {
          ++stuck;
          continue;
        }
        if (a.status != "ok") {
          ++aborted;
          continue;
        }
        nontrivial += a.gamma_size > 0;
        iia += a.iia;
        iib += a.iib;
        radii += a.radii;
        open += a.eta_open;
        tle += a.t_le_d;
        clean += a.violations == 0;
        minr += a.min_radius;
      }
      const std::int64_t ok = static_cast<std::int64_t>(audits.size()) - aborted - stuck;
      auto rate = [ok](std::int64_t k) { return ok > 0 ? static_cast<double>(k) / static_cast<double>(ok) : 0.0; };
      sum.add({cell(p), cell(n), cell(spec.reps), cell(aborted), cell(static_cast<double>(aborted) / spec.reps), cell(stuck),
               cell(nontrivial), cell(rate(iia)), cell(rate(iib)), cell(rate(radii)), cell(rate(open)), cell(rate(tle)),
               cell(rate(clean)), cell(rate(minr)), cell(pre)});
    }
  out.extra.emplace_back("summary", std::move(sum));
  return out;
}

ExperimentOutput fm_average(const ExperimentSpec& spec) {
  ExperimentOutput out;
  out.kind = ExperimentKind::FmAverage;
  const int n = spec.params.n;
  const int d = spec.params.d;
  const Coord m = spec.fm_m >= 0 ? spec.fm_m : static_cast<Coord>(std::floor(std::pow(static_cast<double>(n), 0.25) + 1e-9));
  struct Rep {
    std::uint64_t seed;
    double t_n, f_m, bound;
  };
  const auto reps = run_replicas<Rep>(spec.reps, spec.threads, spec.order_seed, [&](int r) {
    const Params pr = cell_params(spec, n, spec.params.p, r);
    const EdgeConfig cfg = sample_config(pr);
    const double W = cfg.W();
    const Region all = Region::whole(cfg.lattice());
    const Point e1n = Point::unit(d, 0, n);
    const auto box = box_points(BoxSpec{Point(d), m});
    double sum = 0.0;
    for (const Point& z : box) {
      SearchLimit lim;
      lim.stop_at = z + e1n;
      sum += truncated_T(cfg, all, z, lim).distance(z + e1n)->value(W);
    }
    const PassageField from0 = truncated_T(cfg, all, Point(d));
    const PassageField from1 = truncated_T(cfg, all, e1n);
    double m0 = 0, m1 = 0;
    for (const Point& z : box) {
      m0 = std::max(m0, from0.distance(z)->value(W));
      m1 = std::max(m1, from1.distance(e1n + z)->value(W));
    }
    return Rep{pr.seed, from0.distance(e1n)->value(W), sum / static_cast<double>(box.size()), m0 + m1};
  });
  out.raw.columns = {"rep", "seed", "T_n", "F_m", "abs_diff", "bound"};
  Welford T, F;
  std::int64_t violations = 0;
  for (std::size_t r = 0; r < reps.size(); ++r) {
    const Rep& x = reps[r];
    T.add(x.t_n);
    F.add(x.f_m);
    const double diff = std::abs(x.t_n - x.f_m);
    violations += diff > x.bound + 1e-9;
    out.raw.add({cell(static_cast<std::int64_t>(r)), cell(x.seed), cell(x.t_n), cell(x.f_m), cell(diff), cell(x.bound)});
  }
  out.main.columns = {"n", "m", "reps", "mean_T", "var_T", "mean_F", "var_F", "var_ratio", "bound_violations"};
  out.main.add({cell(n), cell(static_cast<std::int64_t>(m)), cell(spec.reps), cell(T.mean()), cell(T.variance()), cell(F.mean()),
                cell(F.variance()), cell(T.variance() > 0 ? F.variance() / T.variance() : 0.0), cell(violations)});
  return out;
}

namespace {

struct CalibSample {
  std::uint64_t seed = 0;
  std::vector<Point> x;
  std::vector<std::int64_t> dist;  // -1: not connected
};

CalibSample calib_one(const ExperimentSpec& spec, int rep) {
  const Params pr = cell_params(spec, spec.params.n, spec.params.p, rep);
  if (pr.domain_radius() < spec.calib_max + 1)
    throw Error(ErrorKind::InvalidParams, "domain smaller than the calibration range");
  const int d = pr.d;
  const EdgeConfig cfg = sample_config(pr);
  const ClusterLabels labels = label_clusters(cfg);
  const Point o = regularize(labels, Point(d));
  const DistanceField D = bfs_distance(cfg, Region::whole(cfg.lattice()), o);
  Stream rng(pr.seed, 13);
  CalibSample s;
  s.seed = pr.seed;
  for (int k = 0; k < spec.samples_per_rep; ++k) {
    const Coord r = spec.calib_min + static_cast<Coord>(rng.below(static_cast<std::uint64_t>(spec.calib_max - spec.calib_min + 1)));
    Point x(d);
    for (int a = 0; a < d; ++a) x[a] = static_cast<Coord>(rng.below(2 * static_cast<std::uint64_t>(r) + 1)) - r;
    const int axis = static_cast<int>(rng.below(static_cast<std::uint64_t>(d)));
    x[axis] = rng.below(2) ? r : -r;
    const auto dx = D.distance(regularize(labels, x));
    s.x.push_back(x);
    s.dist.push_back(dx ? *dx : -1);
  }
  return s;
}

}  // namespace

ExperimentOutput calibrate(const ExperimentSpec& spec) {
  require_reps(spec, 200, "calibrate");
  ExperimentOutput out;
  out.kind = ExperimentKind::Calibrate;
  const auto samples = run_replicas<CalibSample>(spec.reps, spec.threads, spec.order_seed,
                                                 [&](int r) { return calib_one(spec, r); });
  out.raw.columns = {"rep", "seed", "x", "norm_inf", "D_star"};
  std::vector<double> ratio;  // infinity when not connected
  for (std::size_t r = 0; r < samples.size(); ++r)
    for (std::size_t k = 0; k < samples[r].x.size(); ++k) {
      const Coord nx = norm_inf(samples[r].x[k]);
      const std::int64_t dx = samples[r].dist[k];
      ratio.push_back(dx < 0 ? INFINITY : static_cast<double>(dx) / static_cast<double>(nx));
      out.raw.add({cell(static_cast<std::int64_t>(r)), cell(samples[r].seed), samples[r].x[k].str(),
                   cell(static_cast<std::int64_t>(nx)), cell(dx)});
    }
  out.main.columns = {"rho", "exceed_freq", "qualifies"};
  double chosen = 0.0;
  for (int k = 0; k < 38; ++k) {
    const double rho = 1.5 + 0.5 * k;
    std::int64_t over = 0;
    for (double q : ratio) over += q > rho;
    const double freq = static_cast<double>(over) / static_cast<double>(ratio.size());
    const bool ok = freq < spec.calib_level;
    out.main.add({cell(rho), cell(freq), cell(ok)});
    if (ok && chosen == 0.0) chosen = rho;
  }
  Table res;
  res.columns = {"p", "d", "reps", "samples", "rho"};
  res.add({cell(spec.params.p), cell(spec.params.d), cell(spec.reps), cell(static_cast<std::int64_t>(ratio.size())), cell(chosen)});
  out.extra.emplace_back("result", std::move(res));
  return out;
}

double calibrate_rho(const ExperimentSpec& spec) {
  const ExperimentOutput out = calibrate(spec);
  const double rho = out.table("result").num(0, "rho");
  if (rho <= 0) throw Error(ErrorKind::CalibrationFailed, "no grid value of rho qualifies");
  return rho;
}

ExperimentOutput run_experiment(const ExperimentSpec& spec) {
  switch (spec.kind) {
    case ExperimentKind::VarianceSweep: return variance_sweep(spec);
    case ExperimentKind::ConcentrationTail: return concentration_tail(spec);
    case ExperimentKind::DiscrepancyTail: return discrepancy_tail(spec);
    case ExperimentKind::RadiusTail: return radius_tail(spec);
    case ExperimentKind::AnimalScaling: return animal_scaling_table(spec);
    case ExperimentKind::CoveringAudit: return covering_audit(spec);
    case ExperimentKind::FmAverage: return fm_average(spec);
    case ExperimentKind::Calibrate: return calibrate(spec);
  }
  throw Error(ErrorKind::BadConfig, "unknown experiment kind");
}

std::string git_describe() { return CHEMDIST_GIT_DESCRIBE; }

std::vector<std::pair<std::string, std::string>> output_header(const ExperimentSpec& spec) {
  std::vector<std::pair<std::string, std::string>> h;
  h.emplace_back("kind", to_string(spec.kind));
  std::istringstream kv(spec.params.to_kv());
  for (std::string line; std::getline(kv, line);) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) h.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  h.emplace_back("reps", std::to_string(spec.reps));
  auto join = [](const auto& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ",") + fmt_num(static_cast<double>(x));
    return s;
  };
  h.emplace_back("ns", join(spec.n_grid()));
  h.emplace_back("ps", join(spec.p_grid()));
  h.emplace_back("generator", kGeneratorId);
  h.emplace_back("git", git_describe());
  return h;
}

void write_table(std::ostream& os, const Table& t, const std::string& format,
                 const std::vector<std::pair<std::string, std::string>>& header) {
  if (format == "jsonl") {
    nlohmann::ordered_json h;
    for (const auto& [k, v] : header) h[k] = v;
    os << nlohmann::ordered_json{{"header", h}}.dump() << '\n';
    for (const auto& row : t.rows) {
      nlohmann::ordered_json j;
      for (std::size_t i = 0; i < t.columns.size(); ++i) {
        const std::string& v = row[i];
        double x = 0;
        std::int64_t k = 0;
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
        auto [kptr, kec] = std::from_chars(v.data(), v.data() + v.size(), k);
        if (v == "true" || v == "false") j[t.columns[i]] = v == "true";
        else if (!v.empty() && kec == std::errc() && kptr == v.data() + v.size()) j[t.columns[i]] = k;
        else if (!v.empty() && ec == std::errc() && ptr == v.data() + v.size() && std::isfinite(x)) j[t.columns[i]] = x;
        else j[t.columns[i]] = v;
      }
      os << j.dump() << '\n';
    }
    return;
  }
  for (const auto& [k, v] : header) os << "# " << k << ": " << v << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
}

namespace {

std::string sibling(const std::string& out, const std::string& name) {
  const std::filesystem::path p(out);
  return (p.parent_path() / (p.stem().string() + "." + name + p.extension().string())).string();
}

std::string now_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_file(const std::string& path, const Table& t, const std::string& format,
                const std::vector<std::pair<std::string, std::string>>& header) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::BadConfig, "cannot write " + path);
  write_table(f, t, format, header);
}

}  // namespace

std::vector<std::string> write_outputs(const ExperimentSpec& spec, const ExperimentOutput& out, double elapsed_s) {
  if (spec.out.empty()) throw Error(ErrorKind::BadConfig, "no output path");
  const auto parent = std::filesystem::path(spec.out).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  const auto header = output_header(spec);
  std::vector<std::string> written{spec.out};
  write_file(spec.out, out.main, spec.format, header);
  for (const auto& [name, t] : out.extra) {
    written.push_back(sibling(spec.out, name));
    write_file(written.back(), t, spec.format, header);
  }
  if (spec.raw) {
    written.push_back(sibling(spec.out, "raw"));
    write_file(written.back(), out.raw, spec.format, header);
  }
  std::ofstream log(spec.out + ".log");
  log << "finished: " << now_utc() << '\n' << "elapsed_s: " << fmt_num(elapsed_s) << '\n';
  for (const auto& [k, v] : header) log << k << ": " << v << '\n';
  for (const auto& w : written) log << "wrote: " << w << '\n';
  return written;
}

}  // namespace chemdist
