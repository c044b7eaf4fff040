#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "lrr/admm.hpp"
#include "lrr/operators.hpp"
#include "lrr/varpro.hpp"

namespace lrr {

/// Shortest text form that round-trips a double exactly (17 significant
/// digits); used by every CSV writer.
std::string format_double(double v);

/// Dense matrices: comma-separated values, one matrix row per line.
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& M);
Eigen::MatrixXd read_matrix_csv(const std::string& path);

/// pOSE observations: lines of cam_id,point_id,u,v.
void write_pose_observations_csv(const std::string& path,
                                 const std::vector<PoseObservation>& obs);
std::vector<PoseObservation> read_pose_observations_csv(const std::string& path);

/// NRSfM cameras: each 2x3 block row-major, one camera per two lines.
void write_nrsfm_cameras_csv(const std::string& path,
                             const std::vector<Eigen::Matrix<double, 2, 3>>& cams);
std::vector<Eigen::Matrix<double, 2, 3>> read_nrsfm_cameras_csv(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// key=value files, one pair per line; '#' starts a comment.
std::map<std::string, std::string> read_kv_file(const std::string& path);

/// Solver config keys: penalty, k, lambda0, lambda_up, lambda_down,
/// max_iters, tol_rel_obj, tol_grad, obj_stall_iters, seed.
SolverConfig solver_config_from_kv(const std::map<std::string, std::string>& kv);
SolverConfig read_solver_config(const std::string& path);

/// ADMM config keys carry an admm_ prefix: admm_penalty, admm_rho,
/// admm_max_iters, admm_tol_primal, admm_tol_dual, admm_seed; both sections
/// may share one file.
AdmmConfig admm_config_from_kv(const std::map<std::string, std::string>& kv);
AdmmConfig read_admm_config(const std::string& path);

}  // namespace lrr
