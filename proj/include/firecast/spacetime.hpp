#pragma once

#include "firecast/geometry.hpp"
#include "firecast/sparse.hpp"

namespace firecast {

/// AR(1) over months with unit stationary variance, replicated over years.
struct Ar1Spec {
  double rho = 0.0;
  int n_periods = 7;
  int n_replicates = 1;
};

/// Flat index of (vertex, period, replicate): vertex fastest, then period.
struct SpaceTimeIndex {
  int n_vertices = 0;
  int n_periods = 0;
  int n_replicates = 0;

  Eigen::Index size() const {
    return static_cast<Eigen::Index>(n_vertices) * n_periods * n_replicates;
  }
  Eigen::Index operator()(int vertex, int period, int replicate) const {
    return (static_cast<Eigen::Index>(replicate) * n_periods + period) * n_vertices + vertex;
  }
};

inline constexpr Eigen::Index kMaxLatentSize = 5'000'000;

SpMat ar1_precision(double rho, int n_periods);

/// log |Q_ar1|, closed form: -(T - 1) log(1 - rho^2).
double ar1_log_det(double rho, int n_periods);

/// I_years ⊗ Q_ar1 ⊗ Q_space.
SpMat spacetime_precision(const Ar1Spec& ar1, const SpMat& q_space);

/// Spatial precision with unit nominal marginal variance at `range`.
SpMat unit_variance_spatial(double range, const FemMatrices<double>& fem);

}  // namespace firecast
