#pragma once

#include <cstdint>
#include <vector>

#include "firecast/wildfire/twopart.hpp"

namespace firecast::sim {

/// Matérn x AR(1) effect parameters on the user scale.
struct SpaceTimeTruth {
  double range = 200.0;
  double sd = 0.7;
  double rho = 0.8;
};

struct PredictorTruth {
  double intercept = 0.0;
  std::vector<double> beta;  ///< coefficients of cov_1, cov_2, ... (rest zero)
  double theta1 = 0.0, theta2 = 0.0, theta3 = 0.0;  ///< W1 parameters
  SpaceTimeTruth w2;
};

struct SimConfig {
  int nx = 12;
  int ny = 10;
  double cell_deg = 0.5;
  double lon0 = -120.0;
  double lat0 = 36.0;
  int first_year = 2001;
  int n_years = 3;
  int n_covariates = 30;
  double holdout = 0.1;  ///< fraction of records whose CNT and BA are hidden
  std::uint64_t seed = 1;

  PredictorTruth z{-0.3, {0.5, -0.4, 0.3}, 0.0, 0.35, 0.5, {200.0, 0.7, 0.8}};
  PredictorTruth cnt{0.5, {0.3, 0.2}, 0.0, 0.5, 0.0, {200.0, 0.4, 0.8}};
  PredictorTruth ba{3.0, {0.4, -0.3}, 0.0, 0.5, 0.0, {150.0, 0.8, 0.5}};
  double alpha = 0.7;
  double ba_noise_precision = 1.0;

  wildfire::TwoPartSettings model{};

  /// Throws a parameter-range error if a parameter leaves the support.
  void validate() const;
  /// True hyperparameters in the internal layouts of the two fitted models.
  Eigen::VectorXd theta_occurrence() const;
  Eigen::VectorXd theta_joint() const;
};

struct SimOutput {
  wildfire::WildfireDataset complete;  ///< all records observed
  wildfire::WildfireDataset observed;  ///< held-out records set to missing
  std::vector<Eigen::Index> holdout;
  Eigen::VectorXd probability;  ///< true occurrence probability per record
};

/// Smooth synthetic sigma-hat in [0, 0.5] at planar points.
Eigen::VectorXd design_sigma_hat(std::span<const Point> points);

SimOutput simulate(const SimConfig& config);

}  // namespace firecast::sim
