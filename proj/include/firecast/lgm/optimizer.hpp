#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "firecast/lgm/engine.hpp"

namespace firecast::lgm {

struct OptimizerSettings {
  int max_evaluations = 500;
  double tolerance = 1e-4;     ///< simplex diameter (max-norm) at termination
  double initial_step = 0.5;   ///< simplex edge on the internal scale
  double hessian_step = 1e-2;  ///< central-difference step
  int polish_steps = 3;        ///< quasi-Newton steps on the numerical Hessian after the simplex
  int threads = 1;
  NewtonSettings newton;
};

struct SimplexResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Adaptive Nelder-Mead minimization. Non-finite values count as +inf.
SimplexResult minimize_simplex(const std::function<double(const Eigen::VectorXd&)>& f,
                               const Eigen::VectorXd& start, const OptimizerSettings& settings);

/// Central-difference gradient and Hessian of f at x; evaluations may run on
/// `threads` threads, the result does not depend on the count.
void numerical_derivatives(const std::function<double(const Eigen::VectorXd&)>& f,
                           const Eigen::VectorXd& x, double h, int threads,
                           Eigen::VectorXd& gradient, Eigen::MatrixXd& hessian);

struct Summary {
  std::string name;
  double estimate = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
};

/// Empirical-Bayes fit: hyperparameters at the posterior mode with a Gaussian
/// approximation from the inverse numerical Hessian, and the latent Gaussian
/// approximation conditional on that mode.
struct FitResult {
  std::vector<std::string> hyper_names;
  std::vector<HyperScale> hyper_scales;
  Eigen::VectorXd theta;      ///< internal scale
  Eigen::MatrixXd theta_cov;  ///< internal scale
  double log_posterior = 0.0;
  int evaluations = 0;
  bool converged = false;
  bool hessian_adjusted = false;  ///< eigenvalues were floored to make it invertible

  Eigen::VectorXd mode;
  std::shared_ptr<const CholeskyFactor<double>> factor;
  Eigen::VectorXd latent_sd;

  std::vector<Summary> hyper;  ///< user scale
  std::vector<Summary> fixed;  ///< fixed-effect coefficients
};

FitResult optimize_hyper(const CompiledModel& model, const Eigen::VectorXd& start,
                         const OptimizerSettings& settings = {});

/// Fills the summaries of `fit` from its mode, factor and theta covariance.
void summarize(const CompiledModel& model, FitResult& fit);

/// k latent draws (columns) from N(mode, Q_post^{-1}).
Eigen::MatrixXd sample_latent_posterior(const FitResult& fit, std::uint64_t seed, int k);

/// `name estimate sd q025 q975`, hyperparameters then fixed effects.
void write_fit_table(std::ostream& os, const FitResult& fit);

/// One `name value` line per internal-scale hyperparameter.
void write_theta(std::ostream& os, const FitResult& fit);
Eigen::VectorXd read_theta(std::istream& is, const std::vector<std::string>& names);

}  // namespace firecast::lgm
