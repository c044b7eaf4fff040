#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lrr/admm.hpp"
#include "lrr/certificate.hpp"
#include "lrr/datagen.hpp"
#include "lrr/harness.hpp"
#include "lrr/io.hpp"
#include "lrr/varpro.hpp"

namespace {

// exit codes: 0 success, 1 fatal, 2 per-run failures recorded
constexpr int kFatal = 1;

std::ostream& open_out(std::ofstream& file, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") return std::cout;
  file.open(out_path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open '" + out_path + "' for writing");
  return file;
}

struct InstanceArgs {
  std::string instance_dir;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--instance", instance_dir, "problem instance directory")->required();
  }
  lrr::ProblemInstance load() const { return lrr::ProblemInstance::load(instance_dir); }
};

void add_spec_common(CLI::App* cmd, lrr::ExperimentSpec* spec) {
  cmd->add_option("--seed", spec->master_seed, "master seed");
  cmd->add_option("--reps", spec->reps, "instances per configuration");
  cmd->add_option("--k", spec->k, "factor columns");
  cmd->add_option("--mu", spec->mu_grid, "regularization weight(s) mu");
  cmd->add_option("--budget-seconds", spec->budget_seconds,
                  "ADMM wall-clock budget; <0 couples it to the VarPro run time, 0 = no cap");
  cmd->add_option("--solvers", spec->solvers, "subset of {varpro,admm_fmu,admm_nuclear}");
  cmd->add_option("--delta", spec->delta, "RIP constant delta_2k for certificates");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"low-rank recovery via bilinear rank regularization"};
  app.require_subcommand(1);

  // ---- gen ----
  auto* gen = app.add_subcommand("gen", "generate a synthetic problem instance");
  struct {
    int m = 32, n = 512, rank = 4;
    std::string pattern = "uniform";
    double missing = 0.0, noise = 0.0;
    std::uint64_t seed = 1;
    std::string out;
  } gen_args;
  gen->add_option("--m", gen_args.m);
  gen->add_option("--n", gen_args.n);
  gen->add_option("--rank", gen_args.rank);
  gen->add_option("--pattern", gen_args.pattern, "uniform|tracking");
  gen->add_option("--missing", gen_args.missing, "missing fraction in percent");
  gen->add_option("--noise", gen_args.noise, "noise standard deviation");
  gen->add_option("--seed", gen_args.seed);
  gen->add_option("--out", gen_args.out, "output directory")->required();

  // ---- solve ----
  auto* solve_cmd = app.add_subcommand("solve", "run the VarPro solver on an instance");
  InstanceArgs solve_inst;
  solve_inst.add_to(solve_cmd);
  struct {
    std::string config, out;
    double mu = -1.0;
    int k = 8;
    std::uint64_t seed = 0;
    bool certify = false;
    double delta = 0.0;
  } solve_args;
  solve_cmd->add_option("--config", solve_args.config, "solver config file (key=value)");
  solve_cmd->add_option("--mu", solve_args.mu, "f_mu weight; default max(m, n)");
  solve_cmd->add_option("--k", solve_args.k);
  solve_cmd->add_option("--seed", solve_args.seed);
  solve_cmd->add_option("--out", solve_args.out, "report JSON path");
  solve_cmd->add_flag("--certify", solve_args.certify, "append a certificate to the report");
  solve_cmd->add_option("--delta", solve_args.delta, "RIP constant for --certify");

  // ---- admm ----
  auto* admm_cmd = app.add_subcommand("admm", "run the ADMM baseline on an instance");
  InstanceArgs admm_inst;
  admm_inst.add_to(admm_cmd);
  struct {
    std::string config, out, penalty = "fmu";
    double mu = -1.0, rho = 1.0;
    std::uint64_t seed = 0;
  } admm_args;
  admm_cmd->add_option("--config", admm_args.config, "config file with admm_* keys");
  admm_cmd->add_option("--penalty", admm_args.penalty, "fmu|nuclear");
  admm_cmd->add_option("--mu", admm_args.mu, "regularization weight; default max(m, n)");
  admm_cmd->add_option("--rho", admm_args.rho);
  admm_cmd->add_option("--seed", admm_args.seed);
  admm_cmd->add_option("--out", admm_args.out, "report JSON path");

  // ---- certify ----
  auto* cert_cmd = app.add_subcommand("certify", "optimality certificate for a solution");
  InstanceArgs cert_inst;
  cert_inst.add_to(cert_cmd);
  struct {
    std::string solution, out;
    double mu = -1.0, delta = 0.0;
    int k = 8;
  } cert_args;
  cert_cmd->add_option("--solution", cert_args.solution, "solution matrix CSV")->required();
  cert_cmd->add_option("--mu", cert_args.mu)->required();
  cert_cmd->add_option("--delta", cert_args.delta);
  cert_cmd->add_option("--k", cert_args.k);
  cert_cmd->add_option("--out", cert_args.out, "certificate JSON path");

  // ---- experiments ----
  lrr::ExperimentSpec spec;
  std::string exp_out;

  auto* table1 = app.add_subcommand("table1", "synthetic missing-data comparison table");
  add_spec_common(table1, &spec);
  std::string t1_pattern;
  double t1_noise = 0.0;
  std::vector<double> t1_missing;
  table1->add_option("--pattern", t1_pattern, "restrict to one pattern block");
  table1->add_option("--noise", t1_noise, "sigma for the restricted block");
  table1->add_option("--missing", t1_missing, "missing levels in percent");
  table1->add_option("--m", spec.m);
  table1->add_option("--n", spec.n);
  table1->add_option("--rank", spec.rank);
  table1->add_option("--out", exp_out, "output CSV");

  auto* sweep = app.add_subcommand("sweep", "rank vs datafit over a mu grid");
  add_spec_common(sweep, &spec);
  sweep->add_option("--pattern", spec.pattern);
  sweep->add_option("--missing", spec.missing_pct, "missing percent");
  sweep->add_option("--noise", spec.noise);
  sweep->add_option("--m", spec.m);
  sweep->add_option("--n", spec.n);
  sweep->add_option("--rank", spec.rank);
  sweep->add_option("--out", exp_out, "output CSV");

  auto* bias = app.add_subcommand("bias", "shrinking-bias comparison of the penalties");
  add_spec_common(bias, &spec);
  bias->add_option("--out", exp_out, "output CSV");

  auto* pose = app.add_subcommand("pose", "pOSE rank vs datafit on synthetic scenes");
  add_spec_common(pose, &spec);
  pose->add_option("--eta", spec.eta_grid, "pOSE mixing weight(s)");
  pose->add_option("--cams", spec.num_cams);
  pose->add_option("--points", spec.num_points);
  pose->add_option("--out", exp_out, "output CSV");

  auto* nrsfm = app.add_subcommand("nrsfm", "NRSfM rank vs datafit on synthetic scenes");
  add_spec_common(nrsfm, &spec);
  nrsfm->add_option("--frames", spec.num_cams);
  nrsfm->add_option("--points", spec.num_points);
  nrsfm->add_option("--K", spec.K, "shape basis dimension");
  nrsfm->add_option("--out", exp_out, "output CSV");

  auto* replay_cmd = app.add_subcommand("replay", "re-run one CSV row from its seed");
  struct {
    std::string csv;
    int row = 0;
  } replay_args;
  replay_cmd->add_option("--csv", replay_args.csv)->required();
  replay_cmd->add_option("--row", replay_args.row, "0-based data row index")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const lrr::ProblemInstance inst =
          lrr::make_instance(gen_args.m, gen_args.n, gen_args.rank, gen_args.pattern,
                             gen_args.missing / 100.0, gen_args.noise, gen_args.seed);
      inst.save(gen_args.out);
      std::cout << "instance written to " << gen_args.out << " (realized missing "
                << lrr::format_double(100.0 * inst.missing_frac_realized) << "%)\n";
      return 0;
    }

    if (*solve_cmd) {
      const lrr::ProblemInstance inst = solve_inst.load();
      lrr::SolverConfig cfg = [&] {
        if (!solve_args.config.empty()) return lrr::read_solver_config(solve_args.config);
        const double mu = solve_args.mu > 0.0
                              ? solve_args.mu
                              : static_cast<double>(std::max(inst.M.rows(), inst.M.cols()));
        lrr::SolverConfig c{lrr::Penalty::fmu(mu)};
        c.k = solve_args.k;
        c.seed = solve_args.seed;
        return c;
      }();
      lrr::MaskedOp op(inst.W);
      const Eigen::VectorXd b = op.apply(inst.M);
      const lrr::SolveReport rep = lrr::solve(cfg, op, b);
      std::string json = rep.to_json_string();
      if (solve_args.certify && cfg.penalty.kind() == lrr::PenaltyKind::FMu) {
        const lrr::Certificate cert =
            lrr::certify(op, b, cfg.penalty.mu(), solve_args.delta, rep.factors);
        json.pop_back();  // strip the closing brace, splice the certificate in
        json += ",\n\"certificate\": " + cert.to_json_string() + "\n}";
      }
      if (solve_args.out.empty()) std::cout << json << '\n';
      else lrr::write_text_file(solve_args.out, json + "\n");
      std::cerr << "varpro: " << lrr::termination_name(rep.termination) << " after "
                << rep.iterations << " iterations, objective "
                << lrr::format_double(rep.final_objective) << ", dist "
                << lrr::format_double(lrr::normalized_distance(rep.X, inst.M0)) << "\n";
      return 0;
    }

    if (*admm_cmd) {
      const lrr::ProblemInstance inst = admm_inst.load();
      lrr::AdmmConfig cfg = [&] {
        if (!admm_args.config.empty()) return lrr::read_admm_config(admm_args.config);
        const double def = static_cast<double>(std::max(inst.M.rows(), inst.M.cols()));
        const double mu = admm_args.mu > 0.0 ? admm_args.mu : def;
        lrr::AdmmConfig c{admm_args.penalty == "nuclear" ? lrr::Penalty::nuclear(mu)
                                                         : lrr::Penalty::fmu(mu)};
        c.rho = admm_args.rho;
        c.seed = admm_args.seed;
        return c;
      }();
      lrr::MaskedOp op(inst.W);
      const Eigen::VectorXd b = op.apply(inst.M);
      const lrr::SolveReport rep = lrr::admm_solve(cfg, op, b);
      if (admm_args.out.empty()) std::cout << rep.to_json_string() << '\n';
      else lrr::write_text_file(admm_args.out, rep.to_json_string() + "\n");
      std::cerr << "admm: " << lrr::termination_name(rep.termination) << " after "
                << rep.iterations << " iterations, objective "
                << lrr::format_double(rep.final_objective) << ", dist "
                << lrr::format_double(lrr::normalized_distance(rep.X, inst.M0)) << "\n";
      return 0;
    }

    if (*cert_cmd) {
      const lrr::ProblemInstance inst = cert_inst.load();
      const Eigen::MatrixXd X = lrr::read_matrix_csv(cert_args.solution);
      lrr::MaskedOp op(inst.W);
      const Eigen::VectorXd b = op.apply(inst.M);
      const lrr::FactorPair F = lrr::balanced_factorize(X, cert_args.k);
      const lrr::Certificate cert =
          lrr::certify(op, b, cert_args.mu, cert_args.delta, F);
      if (cert_args.out.empty()) std::cout << cert.to_json_string() << '\n';
      else lrr::write_text_file(cert_args.out, cert.to_json_string() + "\n");
      return 0;
    }

    spec.mu = spec.mu_grid.size() == 1 ? spec.mu_grid.front() : spec.mu;
    if (*nrsfm && nrsfm->count("--k") == 0) spec.k = 2 * spec.K;

    std::ofstream file;
    if (*table1) {
      if (!t1_pattern.empty()) spec.pattern_blocks = {{t1_pattern, t1_noise}};
      if (!t1_missing.empty()) spec.missing_levels_pct = t1_missing;
      return lrr::run_table1(spec, open_out(file, exp_out));
    }
    if (*sweep) return lrr::run_sweep(spec, open_out(file, exp_out));
    if (*bias) return lrr::run_bias(spec, open_out(file, exp_out));
    if (*pose) return lrr::run_pose(spec, open_out(file, exp_out));
    if (*nrsfm) return lrr::run_nrsfm(spec, open_out(file, exp_out));
    if (*replay_cmd) return lrr::replay(replay_args.csv, replay_args.row, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFatal;
  }
  return kFatal;
}
