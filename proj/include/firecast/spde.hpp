#pragma once

#include <span>

#include "firecast/geometry.hpp"
#include "firecast/sparse.hpp"

namespace firecast {

/// Matérn field with smoothness fixed to one (operator power two).
struct StationaryMatern {
  double kappa = 1.0;
  double tau = 1.0;
};

/// log tau(s) = log tau0 + theta1 + theta2 - sigma_hat(s) theta3,
/// log kappa  = log kappa0 - theta1 + theta2.
struct NonStationaryTheta {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double theta3 = 0.0;
  double tau0 = 1.0;
  double kappa0 = 1.0;
  Eigen::VectorXd sigma_hat;  ///< one value per mesh vertex
};

/// Largest |log tau| or |log kappa| accepted before a parameter-range error.
inline constexpr double kMaxLogScale = 30.0;

double range_to_kappa(double range);
double kappa_to_range(double kappa);

/// Nominal marginal variance 1 / (4 pi kappa^2 tau^2).
double marginal_variance_approx(double kappa, double tau);

/// tau giving marginal standard deviation `sigma` at `kappa`.
double tau_for_sigma(double kappa, double sigma);

/// kappa^4 C + 2 kappa^2 G + G C^{-1} G, the unscaled operator-squared form.
SpMat matern_kernel(double kappa, const FemMatrices<double>& fem);

/// tau^2 (kappa^2 C + G) C^{-1} (kappa^2 C + G).
SpMat precision_stationary(const StationaryMatern& params, const FemMatrices<double>& fem);

/// Per-vertex log tau(s) for the non-stationary parameterization.
Eigen::VectorXd log_tau_field(const NonStationaryTheta& theta);
double log_kappa(const NonStationaryTheta& theta);

/// T (kappa^2 C + G) C^{-1} (kappa^2 C + G) T with T = diag(tau(s_i)).
SpMat precision_nonstationary(const NonStationaryTheta& theta,
                              const FemMatrices<double>& fem);

/// Baselines giving unit nominal variance at range diameter / 5.
struct MaternBaseline {
  double tau0;
  double kappa0;
};
MaternBaseline default_baseline(double domain_diameter);

/// Value at each mesh vertex of the nearest location's value.
Eigen::VectorXd nearest_transfer(const Mesh& mesh, std::span<const Point> locations,
                                 const Eigen::VectorXd& values);

}  // namespace firecast
