#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "firecast/lgm/optimizer.hpp"
#include "firecast/priors.hpp"
#include "firecast/wildfire/dataset.hpp"

namespace firecast::wildfire {

struct TwoPartSettings {
  MeshSettings fine{60.0, 150.0, 150.0, 0.0, 200000};
  MeshSettings coarse{120.0, 250.0, 200.0, 100.0, 200000};
  PcMaternPrior matern{};
  PcAr1Prior ar1{0.0, 0.05};
  lgm::OptimizerSettings optimizer{};
};

/// Everything the two parts share: projection, meshes, FEM matrices, the
/// covariate scaling and the sigma-hat covariates on the fine mesh.
struct SpatialSetup {
  double ref_lat = 0.0;
  int first_year = 0;
  int n_years = 0;
  Mesh fine, coarse;
  std::shared_ptr<const FemMatrices<double>> fem_fine, fem_coarse;
  MaternBaseline baseline{1.0, 1.0};
  double diameter = 0.0;
  std::vector<Eigen::Index> training;
  Standardization scaling;
  Eigen::VectorXd sigma_z, sigma_cnt, sigma_ba;  ///< per fine-mesh vertex
};

/// Builds meshes on the cell centres, fits the covariate scaling on the
/// training rows and maps the per-cell sigma-hats to the fine mesh.
SpatialSetup prepare(const WildfireDataset& data, const TwoPartSettings& settings);

/// Design pieces for a set of records: [1, standardized covariates], the
/// fine-mesh projector and the space-time projector on the coarse mesh.
struct RecordDesign {
  SpMat x;
  SpMat a_fine;
  SpMat a_spacetime;
};

RecordDesign record_design(const SpatialSetup& setup, const WildfireDataset& data,
                           const std::vector<Eigen::Index>& rows);

/// Bernoulli occurrence model: intercept + covariates + W1_Z + W2_Z.
lgm::ModelGraph build_occurrence_model(const WildfireDataset& data, const SpatialSetup& setup,
                                       const TwoPartSettings& settings);

/// Gaussian log BA on BA > 0 and Poisson CNT - 1 on CNT > 0, each with its
/// own intercept, covariates, W1 and W2; the CNT predictor also carries
/// alpha * W2_BA.
lgm::ModelGraph build_joint_model(const WildfireDataset& data, const SpatialSetup& setup,
                                  const TwoPartSettings& settings);

Eigen::VectorXd occurrence_start(const SpatialSetup& setup);
Eigen::VectorXd joint_start(const SpatialSetup& setup);

struct TwoPartFit {
  SpatialSetup setup;
  std::shared_ptr<const lgm::CompiledModel> occurrence_model;
  std::shared_ptr<const lgm::CompiledModel> joint_model;
  lgm::FitResult occurrence;
  lgm::FitResult joint;
};

/// Fits the occurrence model, then the joint model.
TwoPartFit fit_two_part(const WildfireDataset& data, const TwoPartSettings& settings);

/// Latent Gaussian approximations at given hyperparameters (no search);
/// used to predict from stored fits.
TwoPartFit condition_two_part(const WildfireDataset& data, const TwoPartSettings& settings,
                              const Eigen::VectorXd& theta_occurrence,
                              const Eigen::VectorXd& theta_joint);

/// Fit conditional on theta: latent mode and factor, zero theta covariance.
lgm::FitResult condition_at(const lgm::CompiledModel& model, const Eigen::VectorXd& theta,
                            const lgm::NewtonSettings& newton = {});

/// 28 count thresholds: 0..10, 12..30 by 2, 40..100 by 10.
Eigen::VectorXd default_thresholds_cnt();
/// 28 burnt-area thresholds from 0 to 1e5.
Eigen::VectorXd default_thresholds_ba();

/// Predictive CDFs: one row per target, one column per threshold.
struct PredictiveDistribution {
  std::vector<Eigen::Index> targets;  ///< record indices
  Eigen::VectorXd thresholds_cnt, thresholds_ba;
  Eigen::MatrixXd cnt, ba;
};

/// Hurdle CDFs of one draw, written to `out` (length = thresholds).
/// CNT: (1-p) + p F_Pois(u - 1; lambda); BA: (1-p) + p Phi((log u - mu) / sd),
/// (1-p) at u = 0.
void hurdle_cdf_cnt(double p, double lambda, const Eigen::VectorXd& thresholds, double* out);
void hurdle_cdf_ba(double p, double mu, double sd, const Eigen::VectorXd& thresholds, double* out);

void check_thresholds(const Eigen::VectorXd& thresholds);

PredictiveDistribution predictive_distribution(const TwoPartFit& fit, const WildfireDataset& data,
                                               const std::vector<Eigen::Index>& targets,
                                               const Eigen::VectorXd& thresholds_cnt,
                                               const Eigen::VectorXd& thresholds_ba,
                                               std::uint64_t seed, int n_samples);

/// CSV: target_id,variable,F1..Fk with a leading `# thresholds` comment per
/// variable.
void write_predictions(std::ostream& os, const PredictiveDistribution& pd);
PredictiveDistribution read_predictions(std::istream& is);

}  // namespace firecast::wildfire
