#include "firecast/spde.hpp"

#include <numbers>
#include <string>

namespace firecast {

namespace {

void check_log_scale(double value, const char* what) {
  if (!std::isfinite(value) || std::abs(value) > kMaxLogScale) {
    throw Error(ErrorKind::ParameterRange,
                std::string(what) + " = " + std::to_string(value) + " is out of range");
  }
}

}  // namespace

double range_to_kappa(double range) {
  if (!(range > 0.0) || !std::isfinite(range)) {
    throw Error(ErrorKind::ParameterRange, "range must be positive");
  }
  return std::sqrt(8.0) / range;
}

double kappa_to_range(double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw Error(ErrorKind::ParameterRange, "kappa must be positive");
  }
  return std::sqrt(8.0) / kappa;
}

double marginal_variance_approx(double kappa, double tau) {
  return 1.0 / (4.0 * std::numbers::pi * kappa * kappa * tau * tau);
}

double tau_for_sigma(double kappa, double sigma) {
  return 1.0 / (std::sqrt(4.0 * std::numbers::pi) * kappa * sigma);
}

SpMat matern_kernel(double kappa, const FemMatrices<double>& fem) {
  const double k2 = kappa * kappa;
  SpMat k = fem.g2 + (2.0 * k2) * fem.g + (k2 * k2) * fem.c;
  k.makeCompressed();
  return k;
}

SpMat precision_stationary(const StationaryMatern& params, const FemMatrices<double>& fem) {
  if (!(params.kappa > 0.0) || !(params.tau > 0.0)) {
    throw Error(ErrorKind::ParameterRange, "kappa and tau must be positive");
  }
  check_log_scale(std::log(params.kappa), "log kappa");
  check_log_scale(std::log(params.tau), "log tau");
  SpMat q = (params.tau * params.tau) * matern_kernel(params.kappa, fem);
  return q;
}

Eigen::VectorXd log_tau_field(const NonStationaryTheta& theta) {
  return Eigen::VectorXd::Constant(theta.sigma_hat.size(),
                                   std::log(theta.tau0) + theta.theta1 + theta.theta2) -
         theta.theta3 * theta.sigma_hat;
}

double log_kappa(const NonStationaryTheta& theta) {
  return std::log(theta.kappa0) - theta.theta1 + theta.theta2;
}

SpMat precision_nonstationary(const NonStationaryTheta& theta,
                              const FemMatrices<double>& fem) {
  if (theta.sigma_hat.size() != fem.c.rows()) {
    throw Error(ErrorKind::DimensionMismatch,
                "sigma_hat has " + std::to_string(theta.sigma_hat.size()) +
                    " entries for a mesh with " + std::to_string(fem.c.rows()) + " vertices");
  }
  if (!(theta.tau0 > 0.0) || !(theta.kappa0 > 0.0) || !theta.sigma_hat.allFinite()) {
    throw Error(ErrorKind::ParameterRange, "invalid non-stationary baseline");
  }
  const double lk = log_kappa(theta);
  check_log_scale(lk, "log kappa");
  const Eigen::VectorXd log_tau = log_tau_field(theta);
  for (Eigen::Index i = 0; i < log_tau.size(); ++i) check_log_scale(log_tau[i], "log tau");
  const Eigen::VectorXd tau = log_tau.array().exp();
  SpMat q = tau.asDiagonal() * matern_kernel(std::exp(lk), fem) * tau.asDiagonal();
  q.makeCompressed();
  return q;
}

MaternBaseline default_baseline(double domain_diameter) {
  const double kappa0 = range_to_kappa(domain_diameter / 5.0);
  return {tau_for_sigma(kappa0, 1.0), kappa0};
}

Eigen::VectorXd nearest_transfer(const Mesh& mesh, std::span<const Point> locations,
                                 const Eigen::VectorXd& values) {
  if (static_cast<Eigen::Index>(locations.size()) != values.size() || locations.empty()) {
    throw Error(ErrorKind::DimensionMismatch, "one value per location required");
  }
  Eigen::VectorXd out(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < locations.size(); ++i) {
      const double d = distance(mesh.vertices[v], locations[i]);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    out[v] = values[static_cast<Eigen::Index>(best)];
  }
  return out;
}

}  // namespace firecast
