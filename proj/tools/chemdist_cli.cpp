#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <sstream>

#include "chemdist/covering.hpp"
#include "chemdist/effective_radius.hpp"
#include "chemdist/errors.hpp"
#include "chemdist/experiments.hpp"
#include "chemdist/format.hpp"
#include "chemdist/shortest_paths.hpp"

using namespace chemdist;
using nlohmann::ordered_json;

namespace {

struct Common {
  std::string config;
  std::map<std::string, std::string> flags;  // flag key -> value, applied after the config file
  std::vector<std::string> sets;             // extra key=value pairs
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "key=value file, overridden by flags");
  const std::vector<std::pair<std::string, std::string>> keys = {
      {"--d", "d"},       {"--p", "p"},       {"--n", "n"},           {"--box-factor", "box_factor"},
      {"--seed", "seed"}, {"--reps", "reps"}, {"--out", "out"},       {"--format", "format"},
      {"--threads", "threads"}, {"--order-seed", "order_seed"}};
  for (const auto& [flag, key] : keys)
    app->add_option_function<std::string>(flag, [&c, key = key](const std::string& v) { c.flags[key] = v; });
  app->add_flag_function("--raw", [&c](std::int64_t) { c.flags["raw"] = "true"; }, "also write per-replica rows");
  app->add_option("--set", c.sets, "any further key=value setting");
}

ExperimentSpec build_spec(const Common& c, std::optional<ExperimentKind> kind) {
  ExperimentSpec spec;
  if (!c.config.empty()) {
    std::ifstream f(c.config);
    if (!f) throw Error(ErrorKind::BadConfig, "cannot read " + c.config);
    spec = parse_spec(f);
  }
  for (const auto& [k, v] : c.flags) apply_spec_key(spec, k, v);
  for (const std::string& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::BadConfig, "--set expects key=value: " + kv);
    apply_spec_key(spec, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (kind) spec.kind = *kind;
  spec.params.validate();
  return spec;
}

void emit(const ExperimentSpec& spec, const ordered_json& j) {
  if (spec.out.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(spec.out);
  if (!f) throw Error(ErrorKind::BadConfig, "cannot write " + spec.out);
  f << j.dump(2) << '\n';
}

ExperimentOutput run_table(const ExperimentSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentOutput out = run_experiment(spec);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (spec.out.empty()) {
    write_table(std::cout, out.main, spec.format, output_header(spec));
    for (const auto& [name, t] : out.extra) {
      std::cout << '\n';
      write_table(std::cout, t, spec.format, {{"table", name}});
    }
  } else {
    for (const std::string& path : write_outputs(spec, out, elapsed)) std::cerr << "wrote " << path << '\n';
  }
  return out;
}

// "x0,x1[,...]:axis"
EdgeId parse_edge(const Lattice& lat, const std::string& s, int d) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw Error(ErrorKind::BadConfig, "edge must look like x0,x1:axis");
  Point x(d);
  std::stringstream ss(s.substr(0, colon));
  std::string item;
  int i = 0;
  while (std::getline(ss, item, ',')) {
    if (i >= d) throw Error(ErrorKind::BadConfig, "too many coordinates in " + s);
    x[i++] = static_cast<Coord>(std::stoll(item));
  }
  if (i != d) throw Error(ErrorKind::BadConfig, "edge needs " + std::to_string(d) + " coordinates");
  const int axis = std::stoi(s.substr(colon + 1));
  if (axis < 0 || axis >= d) throw Error(ErrorKind::BadConfig, "axis out of range");
  return lat.canonical_edge(x, x + Point::unit(d, axis));
}

ordered_json record_json(const RadiusRecord& r) {
  ordered_json j;
  j["edge"] = r.edge.str();
  j["method"] = to_string(r.method);
  j["N"] = r.N ? ordered_json(*r.N) : ordered_json(nullptr);
  j["n_max"] = r.n_max;
  if (!r.reason.empty()) j["reason"] = r.reason;
  return j;
}

int cmd_sample(const ExperimentSpec& spec, bool edges) {
  const EdgeConfig cfg = sample_config(spec.params);
  const ClusterLabels labels = label_clusters(cfg);
  ordered_json j;
  j["params"] = spec.params.to_kv();
  j["generator"] = kGeneratorId;
  j["edges"] = cfg.lattice().edge_count();
  j["open_edges"] = cfg.open_count();
  j["largest_cluster"] = labels.largest_size;
  j["largest_fraction"] = labels.largest_fraction();
  if (edges) {
    auto& closed = j["closed"] = ordered_json::array();
    for (const EdgeId& e : cfg.lattice().edges())
      if (!cfg.open(e)) closed.push_back(e.str());
  }
  emit(spec, j);
  return 0;
}

int cmd_dist(const ExperimentSpec& spec) {
  const EdgeConfig cfg = sample_config(spec.params);
  const Observables o = measure(cfg, label_clusters(cfg));
  const double W = cfg.W();
  ordered_json j;
  j["params"] = spec.params.to_kv();
  j["W"] = W;
  j["origin_star"] = o.origin_star.str();
  j["target_star"] = o.target_star.str();
  j["D_star"] = o.d_star;
  j["T_star"] = o.t_star.value(W);
  j["T_n"] = o.t_n.value(W);
  j["T_n_unit_edges"] = o.t_n.unit_edges;
  j["T_n_heavy_edges"] = o.t_n.heavy_edges;
  j["largest_fraction"] = o.proxy_fraction;
  j["supercriticality_warning"] = o.supercriticality_warning;
  emit(spec, j);
  return 0;
}

int cmd_radius(const ExperimentSpec& spec, const std::vector<std::string>& edge_args, const std::string& method) {
  const EdgeConfig cfg = sample_config(spec.params);
  const PathRep gamma = t_n_geodesic(cfg);
  std::vector<EdgeId> edges;
  for (const std::string& s : edge_args) edges.push_back(parse_edge(cfg.lattice(), s, spec.params.d));
  if (edges.empty()) edges = closed_edges(cfg, gamma);
  ordered_json j;
  j["params"] = spec.params.to_kv();
  j["path_edges"] = gamma.length();
  auto& recs = j["records"] = ordered_json::array();
  for (const EdgeId& e : edges) {
    if (method == "goodbox") {
      recs.push_back(record_json(goodbox_radius(cfg, e)));
    } else {
      const ConfigView view = ConfigView(cfg).with_forced(e, true);
      const PathRep g = gamma.edge_position(e) ? gamma : t_n_geodesic(view);
      if (!g.edge_position(e)) {
        recs.push_back({{"edge", e.str()}, {"method", "PerPath"}, {"N", nullptr}, {"reason", "edge not on a geodesic"}});
        continue;
      }
      recs.push_back(record_json(empirical_radius(cfg, g, e)));
    }
  }
  emit(spec, j);
  return 0;
}

int cmd_cover(const ExperimentSpec& spec, const std::string& trace_path) {
  const EdgeConfig cfg = sample_config(spec.params);
  const PathRep gamma = t_star_geodesic(cfg, label_clusters(cfg));
  std::ofstream trace_file;
  if (!trace_path.empty()) {
    trace_file.open(trace_path);
    if (!trace_file) throw Error(ErrorKind::BadConfig, "cannot write " + trace_path);
  }
  const CoveringResult c = covering_process(cfg, gamma, trace_path.empty() ? nullptr : &trace_file);
  ordered_json j;
  j["params"] = spec.params.to_kv();
  j["gamma_edges"] = gamma.length();
  j["closed_edges"] = closed_edges(cfg, gamma).size();
  j["iterations"] = c.Gamma.size();
  j["D_star"] = c.d_star;
  j["T_star"] = c.t_star;
  j["discrepancy"] = c.discrepancy;
  j["bound"] = c.bound;
  j["final_open"] = c.eta_open;
  j["separation_ok"] = c.separation_ok;
  j["bound_ok"] = c.bound_ok;
  j["radii_nonincreasing"] = c.radii_nonincreasing;
  j["violations"] = c.violations;
  emit(spec, j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"First-passage and chemical-distance experiments on supercritical bond percolation"};
  app.require_subcommand(1);

  Common c_sample, c_dist, c_radius, c_cover, c_animals, c_sweep, c_calib;
  bool dump_edges = false;
  std::vector<std::string> edge_args;
  std::string method = "perpath", trace_path, kind_name;

  auto* sample = app.add_subcommand("sample", "sample one configuration and summarize it");
  add_common(sample, c_sample);
  sample->add_flag("--edges", dump_edges, "list the closed edges");

  auto* dist = app.add_subcommand("dist", "D*, T* and T_n for one configuration");
  add_common(dist, c_dist);

  auto* radius = app.add_subcommand("radius", "effective radius of edges (default: closed edges of the T_n geodesic)");
  add_common(radius, c_radius);
  radius->add_option("--edge", edge_args, "edge as x0,x1:axis (repeatable)");
  radius->add_option("--method", method, "perpath or goodbox")->check(CLI::IsMember({"perpath", "goodbox"}));

  auto* cover = app.add_subcommand("cover", "run the covering process on the T* geodesic");
  add_common(cover, c_cover);
  cover->add_option("--trace", trace_path, "JSONL trace of each iteration");

  auto* animals = app.add_subcommand("animals", "lattice-animal scaling table");
  add_common(animals, c_animals);

  auto* sweep = app.add_subcommand("sweep", "run an experiment described by --config and flags");
  add_common(sweep, c_sweep);
  sweep->add_option("--kind", kind_name, "experiment kind (overrides the config)");

  auto* calib = app.add_subcommand("calibrate", "empirical rho for the good-box distance bound");
  add_common(calib, c_calib);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sample) return cmd_sample(build_spec(c_sample, std::nullopt), dump_edges);
    if (*dist) return cmd_dist(build_spec(c_dist, std::nullopt));
    if (*radius) return cmd_radius(build_spec(c_radius, std::nullopt), edge_args, method);
    if (*cover) return cmd_cover(build_spec(c_cover, std::nullopt), trace_path);
    if (*animals) {
      run_table(build_spec(c_animals, ExperimentKind::AnimalScaling));
      return 0;
    }
    if (*sweep) {
      ExperimentSpec spec = build_spec(c_sweep, std::nullopt);
      if (!kind_name.empty()) spec.kind = parse_kind(kind_name);
      run_table(spec);
      return 0;
    }
    if (*calib) {
      const ExperimentSpec spec = build_spec(c_calib, ExperimentKind::Calibrate);
      const double rho = run_table(spec).table("result").num(0, "rho");
      if (rho <= 0) throw Error(ErrorKind::CalibrationFailed, "no grid value of rho qualifies");
      std::cerr << "rho=" << fmt_num(rho) << '\n';
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return 2;
  }
  return 1;
}
