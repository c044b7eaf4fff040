#include "lrr/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "lrr/admm.hpp"
#include "lrr/certificate.hpp"
#include "lrr/factorization.hpp"
#include "lrr/io.hpp"
#include "lrr/varpro.hpp"

namespace lrr {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

double table1_mu(const ExperimentSpec& spec) {
  return spec.mu < 0.0 ? static_cast<double>(std::max(spec.m, spec.n)) : spec.mu;
}

struct RunOutcome {
  bool ok = false;
  double dist = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
  int iters = 0;
  std::string error;
};

// One solver run on a masked instance. mu is the f_mu weight; the nuclear
// baseline uses the protocol weight sqrt(mu) (= lambda in the table1 protocol).
RunOutcome run_masked_solver(const std::string& solver, const ProblemInstance& inst,
                             double mu, int k, std::uint64_t seed,
                             double admm_budget_seconds) {
  RunOutcome out;
  try {
    MaskedOp op(inst.W);
    const Eigen::VectorXd b = op.apply(inst.M);
    const double t0 = now_seconds();
    Eigen::MatrixXd X;
    int iters = 0;
    if (solver == "varpro") {
      SolverConfig cfg{Penalty::fmu(mu)};
      cfg.k = k;
      cfg.seed = seed;
      const SolveReport rep = solve(cfg, op, b);
      X = rep.X;
      iters = rep.iterations;
    } else if (solver == "admm_fmu" || solver == "admm_nuclear") {
      AdmmConfig cfg{solver == "admm_fmu" ? Penalty::fmu(mu)
                                          : Penalty::nuclear(std::sqrt(mu))};
      cfg.seed = seed;
      cfg.budget_seconds = admm_budget_seconds;
      const SolveReport rep = admm_solve(cfg, op, b);
      X = rep.X;
      iters = rep.iterations;
    } else {
      throw std::invalid_argument("unknown solver '" + solver + "'");
    }
    out.seconds = now_seconds() - t0;
    out.dist = normalized_distance(X, inst.M0);
    out.iters = iters;
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

struct Aggregate {
  std::vector<double> dists, iters, seconds;
  int failures = 0;

  double mean(const std::vector<double>& v) const {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double x : v) s += x;
    return s / v.size();
  }
  double std_dist() const {
    if (dists.size() < 2) return 0.0;
    const double mu = mean(dists);
    double s = 0.0;
    for (double x : dists) s += (x - mu) * (x - mu);
    return std::sqrt(s / (dists.size() - 1));
  }
};

// Aggregated metrics for one (pattern, sigma, level, solver) table1 cell.
// All instances derive from combo_seed, so any solver row can be replayed
// independently.
std::map<std::string, Aggregate> table1_combo(
    const ExperimentSpec& spec, const std::string& pattern, double sigma,
    double level_pct, std::uint64_t combo_seed,
    const std::vector<std::string>& solvers) {
  const double mu = table1_mu(spec);
  std::map<std::string, Aggregate> acc;
  for (const std::string& s : solvers) acc[s];

  for (int rep = 0; rep < spec.reps; ++rep) {
    const std::uint64_t rep_seed = derive_seed(combo_seed, rep);
    ProblemInstance inst;
    try {
      inst = make_instance(spec.m, spec.n, spec.rank, pattern, level_pct / 100.0, sigma,
                           rep_seed);
    } catch (const std::exception&) {
      for (const std::string& s : solvers) acc[s].failures++;
      continue;
    }

    double varpro_seconds = -1.0;
    std::vector<std::string> ordered = solvers;
    const auto vp = std::find(ordered.begin(), ordered.end(), "varpro");
    if (vp != ordered.end()) std::rotate(ordered.begin(), vp, vp + 1);

    for (const std::string& solver : ordered) {
      double budget = -1.0;  // uncapped
      if (solver != "varpro") {
        if (spec.budget_seconds > 0.0) budget = spec.budget_seconds;
        else if (spec.budget_seconds < 0.0 && varpro_seconds > 0.0) budget = varpro_seconds;
      }
      const RunOutcome o = run_masked_solver(solver, inst, mu, spec.k,
                                             derive_seed(rep_seed, 0xa11ce), budget);
      Aggregate& a = acc[solver];
      if (!o.ok) { a.failures++; continue; }
      if (solver == "varpro") varpro_seconds = o.seconds;
      a.dists.push_back(o.dist);
      a.iters.push_back(o.iters);
      a.seconds.push_back(o.seconds);
    }
  }
  return acc;
}

struct SweepRun {
  bool ok = false;
  int final_rank = 0;
  double datafit = 0.0;
  double objective = 0.0;
  bool certified = false;
  int iters = 0;
  std::string error;
};

SweepRun sweep_run(const MeasurementOp& op, const Eigen::VectorXd& b,
                   const std::string& solver, double mu, int k, std::uint64_t seed,
                   double delta) {
  SweepRun out;
  try {
    Eigen::MatrixXd X;
    if (solver == "varpro") {
      SolverConfig cfg{Penalty::fmu(mu)};
      cfg.k = k;
      cfg.seed = seed;
      const SolveReport rep = solve(cfg, op, b);
      X = rep.X;
      out.iters = rep.iterations;
      out.objective = rep.final_objective;
      try {
        out.certified = certify(op, b, mu, delta, rep.factors).certified;
      } catch (const std::exception&) {
        out.certified = false;
      }
    } else if (solver == "admm_fmu" || solver == "admm_nuclear") {
      const bool fmu = solver == "admm_fmu";
      AdmmConfig cfg{fmu ? Penalty::fmu(mu) : Penalty::nuclear(std::sqrt(mu))};
      cfg.seed = seed;
      const SolveReport rep = admm_solve(cfg, op, b);
      X = rep.X;
      out.iters = rep.iterations;
      out.objective = rep.final_objective;
      if (fmu) {
        try {
          out.certified = check_optimality(compute_Z(op, b, X), mu, delta, k, X).certified;
        } catch (const std::exception&) {
          out.certified = false;
        }
      }
    } else {
      throw std::invalid_argument("unknown solver '" + solver + "'");
    }
    out.datafit = residual(op, X, b).squaredNorm();
    // a solution that is zero relative to the data scale has rank 0; the
    // relative threshold alone would count its rounding noise
    const double data_scale = std::max(1.0, b.norm());
    out.final_rank = X.norm() <= 1e-9 * data_scale ? 0 : numerical_rank(X, 1e-6);
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

// sqrt(mu) grid spanning "keep everything" to "suppress everything", derived
// from the reference spectrum of the instance.
std::vector<double> default_mu_grid(const Eigen::VectorXd& sigma, int rank,
                                    bool fine) {
  const double sr = sigma[std::min<int>(rank, sigma.size()) - 1];
  const double s1 = sigma[0];
  std::vector<double> grid;
  const std::vector<double> fracs =
      fine ? std::vector<double>{1e-3, 0.25, 0.5, 0.75, 0.9}
           : std::vector<double>{1e-3, 0.25, 0.5, 0.8};
  for (double f : fracs) grid.push_back((f * sr) * (f * sr));
  grid.push_back((2.0 * s1) * (2.0 * s1));
  std::sort(grid.begin(), grid.end());
  return grid;
}

std::string csv_bool(bool b) { return b ? "1" : "0"; }

}  // namespace

int run_table1(const ExperimentSpec& spec, std::ostream& out) {
  out << "# lrr-csv v1 table1\n";
  out << "pattern,sigma,missing_pct,solver,mean_dist,std_dist,mean_iters,mean_seconds,"
         "reps,failures,m,n,rank,k,mu,row_seed\n";
  const double mu = table1_mu(spec);
  int combo_index = 0;
  int total_failures = 0;
  for (const auto& [pattern, sigma] : spec.pattern_blocks) {
    for (double level : spec.missing_levels_pct) {
      const std::uint64_t combo_seed = derive_seed(spec.master_seed, combo_index++);
      auto acc = table1_combo(spec, pattern, sigma, level, combo_seed, spec.solvers);
      for (const std::string& solver : spec.solvers) {
        const Aggregate& a = acc[solver];
        total_failures += a.failures;
        out << pattern << ',' << format_double(sigma) << ',' << format_double(level)
            << ',' << solver << ',' << format_double(a.mean(a.dists)) << ','
            << format_double(a.std_dist()) << ',' << format_double(a.mean(a.iters))
            << ',' << format_double(a.mean(a.seconds)) << ',' << spec.reps << ','
            << a.failures << ',' << spec.m << ',' << spec.n << ',' << spec.rank << ','
            << spec.k << ',' << format_double(mu) << ',' << combo_seed << '\n';
      }
    }
  }
  return total_failures == 0 ? 0 : 2;
}

int run_sweep(const ExperimentSpec& spec, std::ostream& out) {
  out << "# lrr-csv v1 sweep\n";
  out << "solver,mu,final_rank,datafit,objective,certified,iters,run_seed,instance_seed,"
         "m,n,rank,k,pattern,missing_pct,sigma\n";
  const std::uint64_t instance_seed = derive_seed(spec.master_seed, 0x5eed0001ULL);
  const ProblemInstance inst =
      make_instance(spec.m, spec.n, spec.rank, spec.pattern, spec.missing_pct / 100.0,
                    spec.noise, instance_seed);
  MaskedOp op(inst.W);
  const Eigen::VectorXd b = op.apply(inst.M);

  std::vector<double> grid = spec.mu_grid;
  if (grid.empty()) grid = default_mu_grid(thin_svd(inst.M0).sigma, spec.rank, true);

  int failures = 0;
  int row_index = 0;
  std::map<std::string, int> monotonicity_violations;
  for (const std::string& solver : spec.solvers) {
    int prev_rank = -1;
    for (double mu : grid) {
      const std::uint64_t run_seed = derive_seed(spec.master_seed, 1000 + row_index++);
      const SweepRun r = sweep_run(op, b, solver, mu, spec.k, run_seed, spec.delta);
      if (!r.ok) { failures++; continue; }
      if (spec.noise == 0.0 && prev_rank >= 0 && r.final_rank > prev_rank)
        monotonicity_violations[solver]++;
      prev_rank = r.final_rank;
      out << solver << ',' << format_double(mu) << ',' << r.final_rank << ','
          << format_double(r.datafit) << ',' << format_double(r.objective) << ','
          << csv_bool(r.certified) << ',' << r.iters << ',' << run_seed << ','
          << instance_seed << ',' << spec.m << ',' << spec.n << ',' << spec.rank << ','
          << spec.k << ',' << spec.pattern << ',' << format_double(spec.missing_pct)
          << ',' << format_double(spec.noise) << '\n';
    }
  }
  // soft check: rank should not increase with mu on noiseless instances;
  // local minima can break it, so it is reported rather than enforced
  for (const auto& [solver, count] : monotonicity_violations)
    out << "# rank_monotonicity_violations solver=" << solver << " count=" << count
        << '\n';
  return failures == 0 ? 0 : 2;
}

namespace {

Penalty bias_penalty(const std::string& kind, double scale, double gamma) {
  if (kind == "fmu") return Penalty::fmu(scale);
  if (kind == "nuclear") return Penalty::nuclear(scale);
  if (kind == "scad") return Penalty::scad(scale, gamma);
  if (kind == "log") return Penalty::log(scale, gamma);
  if (kind == "mcp") return Penalty::mcp(scale, gamma);
  if (kind == "etp") return Penalty::etp(scale, gamma);
  if (kind == "geman") return Penalty::geman(scale, gamma);
  throw std::invalid_argument("bias: unknown regularizer '" + kind + "'");
}

// The bias study's fixed input spectrum: a clear gap with five singular
// values above the threshold region and five below.
const std::vector<double>& bias_spectrum() {
  static const std::vector<double> sig{8, 7, 6, 5, 4, 1.5, 1.2, 0.9, 0.6, 0.3};
  return sig;
}

Eigen::MatrixXd bias_x0(std::uint64_t run_seed) {
  const std::vector<double>& sig = bias_spectrum();
  Rng rng(run_seed);
  const auto orthonormal = [&](int rows, int cols) {
    Eigen::MatrixXd G(rows, cols);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) G(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
    return Eigen::MatrixXd(qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols));
  };
  const int d = static_cast<int>(sig.size());
  const Eigen::MatrixXd U = orthonormal(16, d);
  const Eigen::MatrixXd V = orthonormal(d, d);
  Eigen::VectorXd s0(d);
  for (int i = 0; i < d; ++i) s0[i] = sig[i];
  return U * s0.asDiagonal() * V.transpose();
}

// Spectrum of sv_prox applied to the bias study's X0; shared by run_bias and
// replay so both go through the identical matrix route.
Eigen::VectorXd bias_prox_spectrum(const std::string& kind, double scale, double gamma,
                                   std::uint64_t run_seed) {
  return thin_svd(sv_prox(bias_penalty(kind, scale, gamma), bias_x0(run_seed))).sigma;
}

// Smallest scale parameter whose prox suppresses every sigma in `tail`;
// log-bisection, taking the feasible endpoint.
double minimal_suppressing_scale(const std::string& kind, double gamma,
                                 const std::vector<double>& tail) {
  const auto suppresses = [&](double scale) {
    const Penalty p = bias_penalty(kind, scale, gamma);
    for (double s : tail)
      if (p.scalar_prox(s) > 1e-12) return false;
    return true;
  };
  double lo = 1e-8, hi = 1e8;
  if (suppresses(lo)) return lo;
  if (!suppresses(hi))
    throw std::runtime_error("bias: regularizer '" + kind +
                             "' cannot suppress the tail spectrum");
  for (int it = 0; it < 120; ++it) {
    const double mid = std::sqrt(lo * hi);
    (suppresses(mid) ? hi : lo) = mid;
  }
  // the non-convex proxes switch basins discontinuously at the critical
  // scale; a hair of margin keeps the suppression robust to the rounding of
  // the singular values it is applied to
  return hi * (1.0 + 1e-6);
}

}  // namespace

int run_bias(const ExperimentSpec& spec, std::ostream& out) {
  out << "# lrr-csv v1 bias\n";
  out << "regularizer,scale_param,gamma,index,sigma_in,sigma_out,run_seed\n";

  const std::uint64_t run_seed = derive_seed(spec.master_seed, 0xb1a5ULL);
  const std::vector<double>& sig = bias_spectrum();
  const int d = static_cast<int>(sig.size());
  const std::vector<double> tail(sig.begin() + 5, sig.end());
  const std::vector<std::pair<std::string, double>> regs{
      {"fmu", 0.0},  {"nuclear", 0.0}, {"scad", 3.7}, {"log", 2.0},
      {"mcp", 2.0},  {"etp", 2.0},     {"geman", 2.0}};

  int failures = 0;
  for (const auto& [kind, gamma] : regs) {
    try {
      const double scale = minimal_suppressing_scale(kind, gamma, tail);
      const Eigen::VectorXd s_out = bias_prox_spectrum(kind, scale, gamma, run_seed);
      for (int i = 0; i < d; ++i)
        out << kind << ',' << format_double(scale) << ',' << format_double(gamma) << ','
            << (i + 1) << ',' << format_double(sig[i]) << ','
            << format_double(i < s_out.size() ? s_out[i] : 0.0) << ',' << run_seed
            << '\n';
    } catch (const std::exception&) {
      failures++;
    }
  }
  return failures == 0 ? 0 : 2;
}

int run_pose(const ExperimentSpec& spec, std::ostream& out) {
  out << "# lrr-csv v1 pose\n";
  out << "solver,eta,mu,final_rank,datafit,objective,certified,rms_residual,iters,"
         "run_seed,scene_seed,num_cams,num_points,k\n";
  const std::uint64_t scene_seed = derive_seed(spec.master_seed, 0x905eULL);
  int failures = 0;
  int row_index = 0;
  for (double eta : spec.eta_grid) {
    // same seed for every eta: the ground truth is shared, eta only
    // reweights the residuals
    const PoseScene scene = gen_pose_scene(spec.num_cams, spec.num_points, eta, scene_seed);
    std::vector<double> grid = spec.mu_grid;
    if (grid.empty()) grid = default_mu_grid(thin_svd(scene.ground_truth).sigma, 4, false);
    for (const std::string& solver : spec.solvers) {
      for (double mu : grid) {
        const std::uint64_t run_seed = derive_seed(spec.master_seed, 2000 + row_index++);
        const SweepRun r = sweep_run(scene.op, scene.b, solver, mu, spec.k, run_seed,
                                     spec.delta);
        if (!r.ok) { failures++; continue; }
        out << solver << ',' << format_double(eta) << ',' << format_double(mu) << ','
            << r.final_rank << ',' << format_double(r.datafit) << ','
            << format_double(r.objective) << ',' << csv_bool(r.certified) << ','
            << format_double(std::sqrt(r.datafit / scene.op.out_dim())) << ','
            << r.iters << ',' << run_seed << ',' << scene_seed << ',' << spec.num_cams
            << ',' << spec.num_points << ',' << spec.k << '\n';
      }
    }
  }
  return failures == 0 ? 0 : 2;
}

int run_nrsfm(const ExperimentSpec& spec, std::ostream& out) {
  out << "# lrr-csv v1 nrsfm\n";
  out << "solver,mu,final_rank,datafit,objective,certified,rms_residual,iters,"
         "run_seed,scene_seed,num_frames,num_points,K,k\n";
  const std::uint64_t scene_seed = derive_seed(spec.master_seed, 0x45f3ULL);
  const NrsfmScene scene =
      gen_nrsfm_scene(spec.num_cams, spec.num_points, spec.K, scene_seed);
  std::vector<double> grid = spec.mu_grid;
  if (grid.empty())
    grid = default_mu_grid(thin_svd(scene.ground_truth).sigma, spec.K, false);
  int failures = 0;
  int row_index = 0;
  for (const std::string& solver : spec.solvers) {
    for (double mu : grid) {
      const std::uint64_t run_seed = derive_seed(spec.master_seed, 3000 + row_index++);
      const SweepRun r =
          sweep_run(scene.op, scene.b, solver, mu, spec.k, run_seed, spec.delta);
      if (!r.ok) { failures++; continue; }
      out << solver << ',' << format_double(mu) << ',' << r.final_rank << ','
          << format_double(r.datafit) << ',' << format_double(r.objective) << ','
          << csv_bool(r.certified) << ','
          << format_double(std::sqrt(r.datafit / scene.op.out_dim())) << ',' << r.iters
          << ',' << run_seed << ',' << scene_seed << ',' << spec.num_cams << ','
          << spec.num_points << ',' << spec.K << ',' << spec.k << '\n';
    }
  }
  return failures == 0 ? 0 : 2;
}

namespace {

struct CsvTable {
  std::string kind;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int col(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw std::runtime_error("replay: CSV has no column '" + name + "'");
  }
};

CsvTable parse_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# lrr-csv", 0) == 0) {
      std::istringstream ls(line);
      std::string hash, tag, version;
      ls >> hash >> tag >> version >> t.kind;
      continue;
    }
    if (line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!have_header) {
      t.header = cells;
      have_header = true;
    } else {
      t.rows.push_back(cells);
    }
  }
  if (t.kind.empty()) throw std::runtime_error("replay: '" + path + "' has no lrr-csv header");
  return t;
}

}  // namespace

int replay(const std::string& csv_path, int row_index, std::ostream& out) {
  const CsvTable t = parse_csv(csv_path);
  if (row_index < 0 || row_index >= static_cast<int>(t.rows.size()))
    throw std::invalid_argument("replay: row index out of range (file has " +
                                std::to_string(t.rows.size()) + " data rows)");
  const std::vector<std::string>& row = t.rows[row_index];
  const auto field = [&](const std::string& name) { return row[t.col(name)]; };
  const auto dfield = [&](const std::string& name) { return std::stod(field(name)); };
  const auto ufield = [&](const std::string& name) { return std::stoull(field(name)); };

  // recomputed (name, value) pairs; timing columns are never compared
  std::vector<std::pair<std::string, std::string>> recomputed;

  if (t.kind == "table1") {
    ExperimentSpec spec;
    spec.m = static_cast<int>(dfield("m"));
    spec.n = static_cast<int>(dfield("n"));
    spec.rank = static_cast<int>(dfield("rank"));
    spec.k = static_cast<int>(dfield("k"));
    spec.mu = dfield("mu");
    spec.reps = static_cast<int>(dfield("reps"));
    spec.budget_seconds = 0.0;  // replay never applies a wall-clock cap
    const std::string solver = field("solver");
    auto acc = table1_combo(spec, field("pattern"), dfield("sigma"),
                            dfield("missing_pct"), ufield("row_seed"), {solver});
    const Aggregate& a = acc[solver];
    recomputed = {{"mean_dist", format_double(a.mean(a.dists))},
                  {"std_dist", format_double(a.std_dist())},
                  {"mean_iters", format_double(a.mean(a.iters))},
                  {"failures", std::to_string(a.failures)}};
  } else if (t.kind == "sweep") {
    const ProblemInstance inst = make_instance(
        static_cast<int>(dfield("m")), static_cast<int>(dfield("n")),
        static_cast<int>(dfield("rank")), field("pattern"), dfield("missing_pct") / 100.0,
        dfield("sigma"), ufield("instance_seed"));
    MaskedOp op(inst.W);
    const SweepRun r = sweep_run(op, op.apply(inst.M), field("solver"), dfield("mu"),
                                 static_cast<int>(dfield("k")), ufield("run_seed"), 0.0);
    recomputed = {{"final_rank", std::to_string(r.final_rank)},
                  {"datafit", format_double(r.datafit)},
                  {"objective", format_double(r.objective)},
                  {"certified", csv_bool(r.certified)},
                  {"iters", std::to_string(r.iters)}};
  } else if (t.kind == "pose") {
    const PoseScene scene =
        gen_pose_scene(static_cast<int>(dfield("num_cams")),
                       static_cast<int>(dfield("num_points")), dfield("eta"),
                       ufield("scene_seed"));
    const SweepRun r = sweep_run(scene.op, scene.b, field("solver"), dfield("mu"),
                                 static_cast<int>(dfield("k")), ufield("run_seed"), 0.0);
    recomputed = {{"final_rank", std::to_string(r.final_rank)},
                  {"datafit", format_double(r.datafit)},
                  {"objective", format_double(r.objective)},
                  {"iters", std::to_string(r.iters)}};
  } else if (t.kind == "nrsfm") {
    const NrsfmScene scene =
        gen_nrsfm_scene(static_cast<int>(dfield("num_frames")),
                        static_cast<int>(dfield("num_points")),
                        static_cast<int>(dfield("K")), ufield("scene_seed"));
    const SweepRun r = sweep_run(scene.op, scene.b, field("solver"), dfield("mu"),
                                 static_cast<int>(dfield("k")), ufield("run_seed"), 0.0);
    recomputed = {{"final_rank", std::to_string(r.final_rank)},
                  {"datafit", format_double(r.datafit)},
                  {"objective", format_double(r.objective)},
                  {"iters", std::to_string(r.iters)}};
  } else if (t.kind == "bias") {
    const Eigen::VectorXd s_out = bias_prox_spectrum(
        field("regularizer"), dfield("scale_param"), dfield("gamma"), ufield("run_seed"));
    const int idx = static_cast<int>(dfield("index")) - 1;
    const double v = idx < s_out.size() ? s_out[idx] : 0.0;
    recomputed = {{"sigma_out", format_double(v)}};
  } else {
    throw std::runtime_error("replay: unsupported experiment kind '" + t.kind + "'");
  }

  bool all_match = true;
  for (const auto& [name, value] : recomputed) {
    const std::string original = field(name);
    const bool match = original == value;
    all_match = all_match && match;
    out << "row " << row_index << " " << name << ": original=" << original
        << " replayed=" << value << (match ? " MATCH" : " MISMATCH") << '\n';
  }
  return all_match ? 0 : 1;
}

}  // namespace lrr
