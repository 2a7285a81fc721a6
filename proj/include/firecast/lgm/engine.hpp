#pragma once

#include <memory>
#include <span>
#include <vector>

#include "firecast/lgm/model.hpp"

namespace firecast::lgm {

class SolverPool;

/// Newton settings for the inner latent-mode search.
struct NewtonSettings {
  int max_iterations = 100;
  int max_halvings = 20;
  double tolerance = 1e-8;
  double weight_floor = 1e-10;
};

/// A ModelGraph flattened for repeated evaluation: the stacked observation
/// vector and the predictor map eta = A(theta) x, where
/// A(theta) = A_fixed + sum_k theta[h_k] A_k over shared-copy terms.
class CompiledModel {
 public:
  explicit CompiledModel(ModelGraph model);

  const ModelGraph& graph() const { return model_; }
  Eigen::Index latent_dimension() const { return n_; }
  Eigen::Index num_observations() const { return y_.size(); }
  int num_hyper() const { return model_.hyper.size(); }

  const Eigen::VectorXd& observations() const { return y_; }
  /// First stacked row of each observation group, plus the total at the end.
  const std::vector<Eigen::Index>& group_rows() const { return group_rows_; }
  const std::vector<Eigen::Index>& block_offsets() const { return offsets_; }

  SpMat design(std::span<const double> theta) const;
  /// Gaussian noise precision per group (1 for other families).
  Eigen::VectorXd group_precisions(std::span<const double> theta) const;

  AnalysisCache<double>& posterior_cache() const { return *post_cache_; }
  /// Pool of symbolically analyzed sparse solvers for the Newton iterations.
  SolverPool& solver_pool() const { return *solvers_; }

 private:
  ModelGraph model_;
  Eigen::Index n_ = 0;
  Eigen::VectorXd y_;
  std::vector<Eigen::Index> group_rows_;
  std::vector<Eigen::Index> offsets_;
  SpMat fixed_design_;
  std::vector<std::pair<int, SpMat>> scaled_designs_;
  std::shared_ptr<AnalysisCache<double>> post_cache_;
  std::shared_ptr<SolverPool> solvers_;
};

/// Gaussian approximation of pi(x | y, theta) at its mode.
struct LatentMode {
  Eigen::VectorXd mode;
  SpMat q_post;
  double posterior_log_det = 0.0;
  double log_likelihood = 0.0;
  double prior_quadratic = 0.0;  ///< x^T Q x at the mode
  double prior_log_det = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
};

/// Newton iterations on log pi(x | y, theta) with step halving. `start`
/// (if given and of the right size) seeds the search.
LatentMode latent_mode(const CompiledModel& model, std::span<const double> theta,
                       const Eigen::VectorXd* start = nullptr,
                       const NewtonSettings& settings = {});

/// Our own factor of Q_post, for marginal variances and sampling.
std::shared_ptr<const CholeskyFactor<double>> posterior_factor(const CompiledModel& model,
                                                               const LatentMode& mode);

/// log pi(y | x, theta) + log pi(x | theta) + log pi(theta)
///   + 1/2 log|Q| - 1/2 log|Q_post| at the mode; -inf outside the support or
/// where a precision fails to factorize. `mode_out` receives the inner result.
double laplace_log_posterior(const CompiledModel& model, std::span<const double> theta,
                             const Eigen::VectorXd* start = nullptr,
                             LatentMode* mode_out = nullptr,
                             const NewtonSettings& settings = {});

/// Sum of log-likelihoods of all groups at latent x.
double log_likelihood(const CompiledModel& model, std::span<const double> theta,
                      const Eigen::VectorXd& x);

}  // namespace firecast::lgm
