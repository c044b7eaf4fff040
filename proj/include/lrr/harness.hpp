#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "lrr/datagen.hpp"

namespace lrr {

/// Description of one experiment. Every run's seed is derived
/// deterministically from (master_seed, run index); outputs are bit-identical
/// across replays except for wall-clock columns, which are excluded from the
/// determinism contract.
struct ExperimentSpec {
  // instance parameters
  int m = 32;
  int n = 512;
  int rank = 4;
  int k = 8;
  std::string pattern = "uniform";
  double missing_pct = 0.0;  // percent
  double noise = 0.0;

  // table1 grid; pattern blocks are (pattern, sigma)
  std::vector<std::pair<std::string, double>> pattern_blocks = {
      {"uniform", 0.0}, {"tracking", 0.0}, {"tracking", 0.1}};
  std::vector<double> missing_levels_pct = {0, 10, 20, 30, 40, 50};

  // regularization: mu < 0 selects the protocol default mu = max(m, n),
  // i.e. sqrt(mu) = sqrt(max(m, n)); empty mu_grid derives a grid from the
  // instance spectrum
  double mu = -1.0;
  std::vector<double> mu_grid;

  std::vector<double> eta_grid = {0.1, 0.5, 0.9};
  int num_cams = 6;
  int num_points = 30;
  int K = 2;

  int reps = 20;
  std::uint64_t master_seed = 1;
  std::vector<std::string> solvers = {"varpro", "admm_fmu", "admm_nuclear"};

  /// ADMM wall-clock budget: < 0 couples it to the measured VarPro run time
  /// (the comparison protocol), 0 means no cap, > 0 a fixed cap in seconds.
  double budget_seconds = -1.0;

  double delta = 0.0;  // RIP constant for certificates
};

/// Each runner streams a versioned CSV ("# lrr-csv v1 <kind>" comment line,
/// then a header row) and returns 0 on success or 2 if per-run failures were
/// recorded in the output.
int run_table1(const ExperimentSpec& spec, std::ostream& out);
int run_sweep(const ExperimentSpec& spec, std::ostream& out);
int run_bias(const ExperimentSpec& spec, std::ostream& out);
int run_pose(const ExperimentSpec& spec, std::ostream& out);
int run_nrsfm(const ExperimentSpec& spec, std::ostream& out);

/// Re-runs a single CSV data row (0-based among data rows) from the seed it
/// carries and reports original vs replayed values. Returns 0 when the
/// replayed metrics match the file, 1 otherwise.
int replay(const std::string& csv_path, int row_index, std::ostream& out);

}  // namespace lrr
