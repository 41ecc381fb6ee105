#include "magsim/estimator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace magsim {

namespace {

PlantState to_plant_state(const Eigen::Vector4d& x, double t) {
  return PlantState{x(0), x(1), x(2), x(3), t};
}

Eigen::Vector4d to_vector(const PlantState& s) {
  return Eigen::Vector4d{s.bottom_pos, s.bottom_vel, s.top_pos, s.top_vel};
}

void require_symmetric_psd(const Eigen::Matrix4d& m, const char* name) {
  const double defect = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (defect > kCovSymmetryTol) {
    throw std::invalid_argument(
        fmt::format("{} must be symmetric (defect {:.3g})", name, defect));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(m, Eigen::EigenvaluesOnly);
  if (es.eigenvalues()(0) < kCovEigenFloor) {
    throw std::invalid_argument(fmt::format(
        "{} must be positive semidefinite (min eigenvalue {:.3g})", name,
        es.eigenvalues()(0)));
  }
}

}  // namespace

void NoiseConfig::validate() const {
  require_symmetric_psd(Q, "Q");
  require_symmetric_psd(P0, "P0");
  if (!(r_encoder > 0.0) || !(r_laser > 0.0)) {
    throw std::invalid_argument("measurement variances must be positive");
  }
}

Eigen::MatrixXd NoiseConfig::measurement_covariance(MeasureMode mode) const {
  if (mode == MeasureMode::kFull) {
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(2, 2);
    r(0, 0) = r_encoder;
    r(1, 1) = r_laser;
    return r;
  }
  Eigen::MatrixXd r(1, 1);
  r(0, 0) = r_encoder;
  return r;
}

Eigen::MatrixXd measurement_jacobian(MeasureMode mode) {
  if (mode == MeasureMode::kFull) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, 4);
    h(0, 0) = 1.0;
    h(1, 2) = 1.0;
    return h;
  }
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(1, 4);
  h(0, 0) = 1.0;
  return h;
}

Eigen::Matrix4d transition_jacobian(const Eigen::Vector4d& x, double motor_force_n,
                                    double dt, const PhysicalParams& params,
                                    double track_length) {
  Eigen::Matrix4d f;
  for (int i = 0; i < 4; ++i) {
    const double h = std::max(1e-7, 1e-7 * std::abs(x(i)));
    Eigen::Vector4d plus = x;
    Eigen::Vector4d minus = x;
    plus(i) += h;
    minus(i) -= h;
    const PlantState next_plus = step(to_plant_state(plus, 0.0), motor_force_n,
                                      dt, params, Disturbance{}, track_length);
    const PlantState next_minus = step(to_plant_state(minus, 0.0), motor_force_n,
                                       dt, params, Disturbance{}, track_length);
    f.col(i) = (to_vector(next_plus) - to_vector(next_minus)) / (2.0 * h);
  }
  return f;
}

Eigen::MatrixXd predict_covariance(const Eigen::MatrixXd& P,
                                   const Eigen::MatrixXd& F,
                                   const Eigen::MatrixXd& Q) {
  return F * P * F.transpose() + Q;
}

Eigen::MatrixXd kalman_gain(const Eigen::MatrixXd& P, const Eigen::MatrixXd& H,
                            const Eigen::MatrixXd& R) {
  const Eigen::MatrixXd s = H * P * H.transpose() + R;
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error(fmt::format(
        "singular innovation covariance ({}x{}, diagonal min {:.3g})", s.rows(),
        s.cols(), s.diagonal().minCoeff()));
  }
  // K = P H^T S^-1, solved as (S^-1 (H P))^T since P is symmetric.
  return llt.solve(H * P).transpose();
}

Ekf::Ekf(const PhysicalParams& params, const NoiseConfig& noise, MeasureMode mode,
         double track_length)
    : params_(params),
      noise_(noise),
      mode_(mode),
      track_length_(track_length),
      x_(noise.x0),
      P_(noise.P0) {
  params_.validate();
  noise_.validate();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(P_, Eigen::EigenvaluesOnly);
  min_eig_seen_ = es.eigenvalues()(0);
}

void Ekf::predict(double motor_force_n, double dt) {
  PlantState propagated;
  try {
    propagated = step(to_plant_state(x_, t_), motor_force_n, dt, params_,
                      Disturbance{}, track_length_);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(
        fmt::format("estimator diverged during predict: {}", e.what()));
  }
  const Eigen::Matrix4d f =
      transition_jacobian(x_, motor_force_n, dt, params_, track_length_);
  P_ = predict_covariance(P_, f, noise_.Q);
  x_ = to_vector(propagated);
  t_ = propagated.time;
  finish_step("predict");
}

void Ekf::update(const Measurement& measurement) {
  const int expected = measurement.mode == MeasureMode::kFull ? 2 : 1;
  if (measurement.mode != mode_) {
    throw std::invalid_argument("measurement mode does not match filter mode");
  }
  if (measurement.z.size() != expected || !measurement.z.allFinite()) {
    throw std::invalid_argument(
        fmt::format("bad measurement vector (size {})", measurement.z.size()));
  }
  const Eigen::MatrixXd h = measurement_jacobian(mode_);
  const Eigen::MatrixXd r = noise_.measurement_covariance(mode_);
  const Eigen::MatrixXd k = kalman_gain(P_, h, r);
  const Eigen::VectorXd innovation = measurement.z - h * x_;
  x_ += k * innovation;
  P_ = (Eigen::Matrix4d::Identity() - k * h) * P_;
  finish_step("update");
}

void Ekf::finish_step(const char* phase) {
  const double defect = (P_ - P_.transpose()).cwiseAbs().maxCoeff();
  max_sym_defect_ = std::max(max_sym_defect_, defect);
  P_ = 0.5 * (P_ + P_.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(P_, Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues()(0);
  min_eig_seen_ = std::min(min_eig_seen_, min_eig);
  if (min_eig < kCovEigenFloor) {
    throw std::runtime_error(fmt::format(
        "covariance lost positive semidefiniteness after {} at t={:.6g} "
        "(min eigenvalue {:.3g})",
        phase, t_, min_eig));
  }
  if (!x_.allFinite()) {
    throw std::runtime_error(
        fmt::format("estimator diverged after {} at t={:.6g}", phase, t_));
  }
}

ObservabilityReport observability_rank(const Eigen::Vector4d& x_lin,
                                       double motor_force_n, double dt,
                                       const PhysicalParams& params,
                                       MeasureMode mode, double track_length) {
  const Eigen::Matrix4d f =
      transition_jacobian(x_lin, motor_force_n, dt, params, track_length);
  const Eigen::MatrixXd h = measurement_jacobian(mode);
  const int m = static_cast<int>(h.rows());

  Eigen::MatrixXd obs(4 * m, 4);
  Eigen::MatrixXd block = h;
  for (int i = 0; i < 4; ++i) {
    obs.middleRows(i * m, m) = block;
    block = block * f;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(obs);
  const Eigen::VectorXd sv = svd.singularValues();
  const double threshold = sv(0) * 1e-10;
  ObservabilityReport report;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > threshold) {
      ++report.rank;
    }
  }
  report.min_singular_value = sv(sv.size() - 1);
  report.condition =
      report.min_singular_value > 0.0 ? sv(0) / report.min_singular_value
                                      : std::numeric_limits<double>::infinity();
  return report;
}

double rmse(std::span<const double> estimates, std::span<const double> truth) {
  if (estimates.size() != truth.size()) {
    throw std::invalid_argument(
        fmt::format("rmse: series lengths differ ({} vs {})", estimates.size(),
                    truth.size()));
  }
  if (estimates.empty()) {
    throw std::invalid_argument("rmse: series must be non-empty");
  }
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const double diff = estimates[i] - truth[i];
    sum_sq += diff * diff;
  }
  return std::sqrt(sum_sq / static_cast<double>(estimates.size()));
}

namespace {

struct GridEvaluation {
  double rmse_sum = 0.0;
  Eigen::Matrix4d final_p = Eigen::Matrix4d::Zero();
};

GridEvaluation evaluate_grid_point(std::span<const TrialLog> trials,
                                   const NoiseConfig& candidate,
                                   const PhysicalParams& params,
                                   double track_length) {
  std::vector<double> est_bottom;
  std::vector<double> est_top;
  std::vector<double> truth_bottom;
  std::vector<double> truth_top;
  GridEvaluation eval;

  for (const TrialLog& trial : trials) {
    NoiseConfig cfg = candidate;
    cfg.x0 = trial.x0;
    Ekf filter(params, cfg, MeasureMode::kFull, track_length);
    for (std::size_t k = 0; k < trial.motor_force.size(); ++k) {
      filter.predict(trial.motor_force[k], trial.dt);
      Measurement m;
      m.mode = MeasureMode::kFull;
      m.t = filter.time();
      m.z = trial.z[k];
      filter.update(m);
      est_bottom.push_back(filter.state()(0));
      est_top.push_back(filter.state()(2));
      truth_bottom.push_back(trial.truth[k](0));
      truth_top.push_back(trial.truth[k](2));
    }
    eval.final_p = filter.covariance();
  }
  eval.rmse_sum = rmse(est_bottom, truth_bottom) + rmse(est_top, truth_top);
  return eval;
}

}  // namespace

TuneResult tune_offline(std::span<const TrialLog> trials, const TuneGrid& grid,
                        const NoiseConfig& base, const PhysicalParams& params,
                        double track_length) {
  if (trials.empty()) {
    throw std::invalid_argument("tune_offline: need at least one logged trial");
  }
  if (grid.q_values.empty() || grid.r_scales.empty()) {
    throw std::invalid_argument("tune_offline: search grid is empty");
  }
  for (const TrialLog& trial : trials) {
    if (trial.motor_force.empty() || trial.truth.size() != trial.motor_force.size() ||
        trial.z.size() != trial.motor_force.size()) {
      throw std::invalid_argument("tune_offline: malformed trial log");
    }
  }

  TuneResult best;
  bool have_best = false;
  for (double q : grid.q_values) {
    for (double r_scale : grid.r_scales) {
      NoiseConfig candidate = base;
      // Grid acts on the velocity (force-noise) entries; position rows keep
      // the base's kinematic floor.
      candidate.Q =
          Eigen::Vector4d(base.Q(0, 0), q, base.Q(2, 2), q).asDiagonal();
      candidate.r_encoder = base.r_encoder * r_scale;
      candidate.r_laser = base.r_laser * r_scale;
      const GridEvaluation eval =
          evaluate_grid_point(trials, candidate, params, track_length);
      if (!have_best || eval.rmse_sum < best.rmse_sum_m) {
        have_best = true;
        best.q = q;
        best.r_scale = r_scale;
        best.rmse_sum_m = eval.rmse_sum;
        best.config = candidate;
        best.config.P0 = eval.final_p;
        best.config.x0 = trials[0].x0;
      }
    }
  }
  return best;
}

}  // namespace magsim
