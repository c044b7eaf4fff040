#include "lrr/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lrr {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

namespace {

std::vector<double> parse_csv_line(const std::string& line, const std::string& path) {
  std::vector<double> out;
  std::istringstream is(line);
  std::string cell;
  while (std::getline(is, cell, ',')) {
    try {
      size_t pos = 0;
      out.push_back(std::stod(cell, &pos));
      while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
      if (pos != cell.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw std::runtime_error(path + ": malformed CSV cell '" + cell + "'");
    }
  }
  return out;
}

}  // namespace

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& M) {
  std::ostringstream os;
  for (int i = 0; i < M.rows(); ++i) {
    for (int j = 0; j < M.cols(); ++j) {
      if (j) os << ',';
      os << format_double(M(i, j));
    }
    os << '\n';
  }
  write_text_file(path, os.str());
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(parse_csv_line(line, path));
    if (rows.back().size() != rows.front().size())
      throw std::runtime_error(path + ": ragged CSV rows");
  }
  if (rows.empty()) throw std::runtime_error(path + ": empty matrix file");
  Eigen::MatrixXd M(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) M(i, j) = rows[i][j];
  return M;
}

void write_pose_observations_csv(const std::string& path,
                                 const std::vector<PoseObservation>& obs) {
  std::ostringstream os;
  for (const PoseObservation& o : obs)
    os << o.cam << ',' << o.point << ',' << format_double(o.u) << ','
       << format_double(o.v) << '\n';
  write_text_file(path, os.str());
}

std::vector<PoseObservation> read_pose_observations_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<PoseObservation> obs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<double> cells = parse_csv_line(line, path);
    if (cells.size() != 4)
      throw std::runtime_error(path + ": expected cam_id,point_id,u,v");
    obs.push_back(PoseObservation{static_cast<int>(cells[0]), static_cast<int>(cells[1]),
                                  cells[2], cells[3]});
  }
  return obs;
}

void write_nrsfm_cameras_csv(const std::string& path,
                             const std::vector<Eigen::Matrix<double, 2, 3>>& cams) {
  std::ostringstream os;
  for (const auto& R : cams)
    for (int r = 0; r < 2; ++r)
      os << format_double(R(r, 0)) << ',' << format_double(R(r, 1)) << ','
         << format_double(R(r, 2)) << '\n';
  write_text_file(path, os.str());
}

std::vector<Eigen::Matrix<double, 2, 3>> read_nrsfm_cameras_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(parse_csv_line(line, path));
    if (rows.back().size() != 3) throw std::runtime_error(path + ": expected 3 values per line");
  }
  if (rows.size() % 2 != 0)
    throw std::runtime_error(path + ": expected one camera per two lines");
  std::vector<Eigen::Matrix<double, 2, 3>> cams(rows.size() / 2);
  for (size_t i = 0; i < cams.size(); ++i)
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 3; ++c) cams[i](r, c) = rows[2 * i + r][c];
  return cams;
}

std::map<std::string, std::string> read_kv_file(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ": expected key=value, got '" + line + "'");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

namespace {

template <typename T, typename Parse>
void maybe_set(const std::map<std::string, std::string>& kv, const std::string& key,
               T* dst, Parse parse) {
  const auto it = kv.find(key);
  if (it == kv.end()) return;
  try {
    *dst = parse(it->second);
  } catch (const std::exception&) {
    throw std::runtime_error("config key '" + key + "' has a malformed value '" +
                             it->second + "'");
  }
}

double to_double(const std::string& s) { return std::stod(s); }
int to_int(const std::string& s) { return std::stoi(s); }
std::uint64_t to_u64(const std::string& s) { return std::stoull(s); }

}  // namespace

SolverConfig solver_config_from_kv(const std::map<std::string, std::string>& kv) {
  const auto it = kv.find("penalty");
  if (it == kv.end()) throw std::runtime_error("config: missing key 'penalty'");
  SolverConfig cfg(Penalty::parse(it->second));
  maybe_set(kv, "k", &cfg.k, to_int);
  maybe_set(kv, "lambda0", &cfg.lambda0, to_double);
  maybe_set(kv, "lambda_up", &cfg.lambda_up, to_double);
  maybe_set(kv, "lambda_down", &cfg.lambda_down, to_double);
  maybe_set(kv, "max_iters", &cfg.max_iters, to_int);
  maybe_set(kv, "tol_rel_obj", &cfg.tol_rel_obj, to_double);
  maybe_set(kv, "tol_grad", &cfg.tol_grad, to_double);
  maybe_set(kv, "obj_stall_iters", &cfg.obj_stall_iters, to_int);
  maybe_set(kv, "seed", &cfg.seed, to_u64);
  cfg.validate();
  return cfg;
}

SolverConfig read_solver_config(const std::string& path) {
  return solver_config_from_kv(read_kv_file(path));
}

AdmmConfig admm_config_from_kv(const std::map<std::string, std::string>& kv) {
  const auto it = kv.find("admm_penalty");
  if (it == kv.end()) throw std::runtime_error("config: missing key 'admm_penalty'");
  AdmmConfig cfg(Penalty::parse(it->second));
  maybe_set(kv, "admm_rho", &cfg.rho, to_double);
  maybe_set(kv, "admm_max_iters", &cfg.max_iters, to_int);
  maybe_set(kv, "admm_tol_primal", &cfg.tol_primal, to_double);
  maybe_set(kv, "admm_tol_dual", &cfg.tol_dual, to_double);
  maybe_set(kv, "admm_seed", &cfg.seed, to_u64);
  cfg.validate();
  return cfg;
}

AdmmConfig read_admm_config(const std::string& path) {
  return admm_config_from_kv(read_kv_file(path));
}

}  // namespace lrr
