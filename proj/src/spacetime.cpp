#include "firecast/spacetime.hpp"

#include <string>

#include "firecast/spde.hpp"

namespace firecast {

namespace {

void check_rho(double rho) {
  if (!(std::abs(rho) < 1.0)) {
    throw Error(ErrorKind::ParameterRange,
                "AR(1) correlation must lie in (-1, 1), got " + std::to_string(rho));
  }
}

}  // namespace

SpMat ar1_precision(double rho, int n_periods) {
  check_rho(rho);
  if (n_periods < 1) throw Error(ErrorKind::ParameterRange, "n_periods must be >= 1");
  const double scale = 1.0 / (1.0 - rho * rho);
  std::vector<Eigen::Triplet<double>> entries;
  for (int t = 0; t < n_periods; ++t) {
    const bool end = (t == 0 || t == n_periods - 1);
    // A single period has the stationary marginal precision 1.
    const double diag = n_periods == 1 ? 1.0 : (end ? scale : (1.0 + rho * rho) * scale);
    entries.emplace_back(t, t, diag);
    if (t + 1 < n_periods) {
      entries.emplace_back(t, t + 1, -rho * scale);
      entries.emplace_back(t + 1, t, -rho * scale);
    }
  }
  SpMat q(n_periods, n_periods);
  q.setFromTriplets(entries.begin(), entries.end());
  return q;
}

double ar1_log_det(double rho, int n_periods) {
  check_rho(rho);
  return -(n_periods - 1) * std::log1p(-rho * rho);
}

SpMat spacetime_precision(const Ar1Spec& ar1, const SpMat& q_space) {
  if (ar1.n_periods < 1 || ar1.n_replicates < 1) {
    throw Error(ErrorKind::ParameterRange, "n_periods and n_replicates must be >= 1");
  }
  const Eigen::Index total = q_space.rows() * ar1.n_periods * ar1.n_replicates;
  if (total > kMaxLatentSize) {
    throw Error(ErrorKind::Size,
                "space-time effect would have " + std::to_string(total) + " latent variables");
  }
  const SpMat time = ar1_precision(ar1.rho, ar1.n_periods);
  const SpMat years = identity<double>(ar1.n_replicates);
  return kron(years, kron(time, q_space));
}

SpMat unit_variance_spatial(double range, const FemMatrices<double>& fem) {
  const double kappa = range_to_kappa(range);
  return precision_stationary({kappa, tau_for_sigma(kappa, 1.0)}, fem);
}

}  // namespace firecast
