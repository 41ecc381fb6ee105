#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "magsim/plant.hpp"
#include "magsim/sensing.hpp"

namespace magsim {

// Covariance health bounds enforced after every predict and update.
inline constexpr double kCovSymmetryTol = 1e-12;
inline constexpr double kCovEigenFloor = -1e-10;

struct NoiseConfig {
  Eigen::Matrix4d Q =
      Eigen::Vector4d(1e-12, 1e-3, 1e-12, 1e-3).asDiagonal();
  double r_encoder = 1e-8;  // m^2, bottom-position measurement variance
  double r_laser = 1e-6;    // m^2, top-position measurement variance
  Eigen::Matrix4d P0 = Eigen::Matrix4d::Identity() * 1e-6;
  Eigen::Vector4d x0 = Eigen::Vector4d::Zero();

  void validate() const;  // Q, P0 symmetric PSD; R strictly positive definite
  Eigen::MatrixXd measurement_covariance(MeasureMode mode) const;
};

/// Position-row selector H for the given mode: 2x4 (full) or 1x4 (partial).
Eigen::MatrixXd measurement_jacobian(MeasureMode mode);

/// Jacobian of the one-step integrator map by central differences with
/// per-state perturbation max(1e-7, 1e-7*|x_i|).
Eigen::Matrix4d transition_jacobian(const Eigen::Vector4d& x, double motor_force_n,
                                    double dt, const PhysicalParams& params,
                                    double track_length = kDefaultTrackLength);

/// Covariance propagation F*P*F^T + Q of the prediction step.
Eigen::MatrixXd predict_covariance(const Eigen::MatrixXd& P,
                                   const Eigen::MatrixXd& F,
                                   const Eigen::MatrixXd& Q);

/// Gain K = P*H^T*(H*P*H^T + R)^-1. Throws std::runtime_error if the
/// innovation covariance is not positive definite.
Eigen::MatrixXd kalman_gain(const Eigen::MatrixXd& P, const Eigen::MatrixXd& H,
                            const Eigen::MatrixXd& R);

/// Extended Kalman filter over the plant model. Prediction propagates the
/// estimate through the same integrator as the truth model; covariance health
/// (symmetry, eigenvalue floor) is checked after every step and a violation
/// throws rather than being silently repaired.
class Ekf {
 public:
  Ekf(const PhysicalParams& params, const NoiseConfig& noise, MeasureMode mode,
      double track_length = kDefaultTrackLength);

  void predict(double motor_force_n, double dt);
  void update(const Measurement& measurement);

  const Eigen::Vector4d& state() const { return x_; }
  const Eigen::Matrix4d& covariance() const { return P_; }
  double time() const { return t_; }
  MeasureMode mode() const { return mode_; }

  // Worst covariance diagnostics observed over the run so far.
  double max_symmetry_defect() const { return max_sym_defect_; }
  double min_eigenvalue_seen() const { return min_eig_seen_; }

 private:
  void finish_step(const char* phase);

  PhysicalParams params_;
  NoiseConfig noise_;
  MeasureMode mode_;
  double track_length_;
  Eigen::Vector4d x_;
  Eigen::Matrix4d P_;
  double t_ = 0.0;
  double max_sym_defect_ = 0.0;
  double min_eig_seen_ = 0.0;
};

struct ObservabilityReport {
  int rank = 0;
  double min_singular_value = 0.0;
  double condition = 0.0;
};

/// Numerical rank of the observability matrix [H; HF; HF^2; HF^3] at the
/// linearization point, with singular values thresholded at 1e-10 of the
/// largest.
ObservabilityReport observability_rank(const Eigen::Vector4d& x_lin,
                                       double motor_force_n, double dt,
                                       const PhysicalParams& params,
                                       MeasureMode mode,
                                       double track_length = kDefaultTrackLength);

/// Root mean square error between two equally long series.
double rmse(std::span<const double> estimates, std::span<const double> truth);

/// One logged trial with ground truth, used by offline tuning.
struct TrialLog {
  double dt = 1e-3;
  Eigen::Vector4d x0 = Eigen::Vector4d::Zero();
  std::vector<double> motor_force;        // per step
  std::vector<Eigen::Vector4d> truth;     // state after each step
  std::vector<Eigen::Vector2d> z;         // full measurement after each step
};

struct TuneGrid {
  std::vector<double> q_values;  // diagonal process-noise scales
  std::vector<double> r_scales;  // multipliers on the sensor-informed R
};

struct TuneResult {
  NoiseConfig config;   // best grid point, P0 = converged covariance
  double q = 0.0;
  double r_scale = 0.0;
  double rmse_sum_m = 0.0;  // bottom + top position RMSE at the best point
};

/// Grid search over diagonal Q and R scales minimizing the summed position
/// RMSE of a full-mode filter replayed over the logged trials. Ties keep the
/// earliest grid point, so the result is deterministic.
TuneResult tune_offline(std::span<const TrialLog> trials, const TuneGrid& grid,
                        const NoiseConfig& base, const PhysicalParams& params,
                        double track_length = kDefaultTrackLength);

}  // namespace magsim
