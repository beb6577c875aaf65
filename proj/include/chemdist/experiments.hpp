#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "chemdist/lattice.hpp"
#include "chemdist/percolation.hpp"

namespace chemdist {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  // Column position; throws BadConfig for an unknown name.
  std::size_t col(const std::string& name) const;
  double num(std::size_t row, const std::string& name) const;
};

std::string cell(double x);
std::string cell(std::int64_t x);
inline std::string cell(int x) { return cell(static_cast<std::int64_t>(x)); }
inline std::string cell(std::uint64_t x) { return std::to_string(x); }
inline std::string cell(bool b) { return b ? "true" : "false"; }
inline std::string cell(const std::string& s) { return s; }
inline std::string cell(const char* s) { return s; }

enum class ExperimentKind {
  VarianceSweep,
  ConcentrationTail,
  DiscrepancyTail,
  RadiusTail,
  AnimalScaling,
  CoveringAudit,
  FmAverage,
  Calibrate,
};
std::string to_string(ExperimentKind k);
// Throws BadConfig.
ExperimentKind parse_kind(const std::string& s);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::VarianceSweep;
  Params params;            // params.seed is the base seed
  std::vector<int> ns;      // empty: params.n
  std::vector<double> ps;   // empty: params.p
  int reps = 100;
  int threads = 1;
  std::uint64_t order_seed = 0;  // nonzero: replicas start in a shuffled order
  bool raw = false;
  std::string format = "csv";
  std::string out;

  double kappa_step = 0.25;
  double kappa_max = 6.0;
  std::vector<double> L_factors{1, 2, 4, 8};  // discrepancy survival at L = factor * W
  int edges_per_rep = 20;
  // goodbox: edges uniform in Lambda_n. perpath: edges of the T_n geodesic.
  std::vector<std::string> radius_methods{"goodbox"};
  std::vector<Coord> Ms{2, 3, 4};
  std::vector<Coord> Ls{8, 16, 32};
  std::size_t beam_width = 1024;
  Coord radius_cap = 16;
  Coord L_exact_max = 12;
  double tail_factor = 1.5;
  int samples_per_rep = 10;
  Coord calib_min = 16;
  Coord calib_max = 64;
  double calib_level = 0.01;
  int fm_m = -1;  // -1: floor(n^(1/4))

  std::vector<int> n_grid() const { return ns.empty() ? std::vector<int>{params.n} : ns; }
  std::vector<double> p_grid() const { return ps.empty() ? std::vector<double>{params.p} : ps; }
};

// Experiment keys first, then Params keys; throws BadConfig for unknown keys.
void apply_spec_key(ExperimentSpec& spec, const std::string& key, const std::string& value);
// Flat key=value lines, '#' comments.
ExperimentSpec parse_spec(std::istream& in);

struct ExperimentOutput {
  ExperimentKind kind = ExperimentKind::VarianceSweep;
  Table main;
  std::vector<std::pair<std::string, Table>> extra;
  Table raw;

  const Table& table(const std::string& name) const;
};

// Runs f(rep) for rep in [0, reps) on `threads` workers; results are stored
// by replica index, so the order of execution never shows in the output. The
// first failure by replica index is rethrown.
template <class R>
std::vector<R> run_replicas(int reps, int threads, std::uint64_t order_seed, const std::function<R(int)>& f);

ExperimentOutput variance_sweep(const ExperimentSpec& spec);
ExperimentOutput concentration_tail(const ExperimentSpec& spec);
ExperimentOutput discrepancy_tail(const ExperimentSpec& spec);
ExperimentOutput radius_tail(const ExperimentSpec& spec);
ExperimentOutput animal_scaling_table(const ExperimentSpec& spec);
ExperimentOutput covering_audit(const ExperimentSpec& spec);
ExperimentOutput fm_average(const ExperimentSpec& spec);
ExperimentOutput calibrate(const ExperimentSpec& spec);
ExperimentOutput run_experiment(const ExperimentSpec& spec);

// Smallest grid value of rho (1.5, 2, 2.5, ...) with exceedance below the
// calibration level. Throws CalibrationFailed, InsufficientReps.
double calibrate_rho(const ExperimentSpec& spec);

std::string git_describe();
// Header lines: kind, Params, generator identity, git describe.
std::vector<std::pair<std::string, std::string>> output_header(const ExperimentSpec& spec);
void write_table(std::ostream& os, const Table& t, const std::string& format,
                 const std::vector<std::pair<std::string, std::string>>& header);
// Writes spec.out, one file per extra table and the raw table when requested,
// plus a .log sidecar with wall-clock times. Returns the paths written.
std::vector<std::string> write_outputs(const ExperimentSpec& spec, const ExperimentOutput& out, double elapsed_s);

}  // namespace chemdist

#include "chemdist/replicas.ipp"
