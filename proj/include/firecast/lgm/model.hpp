#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "firecast/geometry.hpp"
#include "firecast/lgm/likelihood.hpp"
#include "firecast/priors.hpp"
#include "firecast/spde.hpp"
#include "firecast/sparse.hpp"

namespace firecast::lgm {

enum class BlockKind { Fixed, SpdeNonStationary, SpaceTime, SharedCopy };

struct BlockPrecision {
  SpMat q;
  double log_det = 0.0;
};

/// Builds a block's prior precision from the full hyperparameter vector.
using PrecisionBuilder = std::function<BlockPrecision(std::span<const double> theta)>;

struct EffectBlock {
  std::string name;
  BlockKind kind = BlockKind::Fixed;
  Eigen::Index dimension = 0;
  PrecisionBuilder precision;
  int source = -1;       ///< SharedCopy: referenced block
  int scale_hyper = -1;  ///< SharedCopy: index of the scale in theta, used as-is
  std::vector<std::string> labels;  ///< optional per-coefficient names (Fixed)
};

/// Contribution design * x_block to one observation group's predictor.
/// Terms on a SharedCopy block use the source block's columns.
struct PredictorTerm {
  int block = -1;
  SpMat design;
};

struct ObservationGroup {
  std::string name;
  Family family = Family::Gaussian;
  Eigen::VectorXd y;
  std::vector<PredictorTerm> terms;
  int precision_hyper = -1;  ///< Gaussian: index of log(noise precision)
};

/// Declarative latent Gaussian model: blocks of jointly Gaussian latent
/// variables, observation groups with their own likelihood, and the
/// hyperparameter layout with its prior.
struct ModelGraph {
  std::vector<EffectBlock> blocks;
  std::vector<ObservationGroup> groups;
  HyperLayout hyper;

  int add_block(EffectBlock block);
  int block_index(const std::string& name) const;

  Eigen::Index latent_dimension() const;
  Eigen::Index num_observations() const;
  /// Column offset of every block (SharedCopy blocks report their source's).
  std::vector<Eigen::Index> block_offsets() const;

  /// Throws `Error` when the graph is inconsistent.
  void validate() const;
};

inline constexpr double kVaguePrecision = 1e-3;

EffectBlock fixed_block(std::string name, Eigen::Index dimension,
                        double precision = kVaguePrecision,
                        std::vector<std::string> labels = {});

/// Non-stationary SPDE field; reads theta1..theta3 from theta[offset..offset+2].
EffectBlock spde_block(std::string name, std::shared_ptr<const FemMatrices<double>> fem,
                       Eigen::VectorXd sigma_hat, MaternBaseline baseline, int offset);

/// AR(1) x Matérn effect replicated over years; reads log range, log sigma and
/// the correlation link from theta[offset..offset+2].
EffectBlock spacetime_block(std::string name, std::shared_ptr<const FemMatrices<double>> fem,
                            int n_periods, int n_replicates, int offset);

EffectBlock shared_copy_block(std::string name, int source, int scale_hyper);

/// Appends theta1..theta3 with vague priors; returns the first index.
int add_spde_hypers(HyperLayout& layout, const std::string& prefix,
                    const VaguePrior& prior = {});

/// Appends log range, log sigma and rho with PC priors; returns the first index.
int add_spacetime_hypers(HyperLayout& layout, const std::string& prefix,
                         const PcMaternPrior& matern, const PcAr1Prior& ar1);

/// Appends one vague-prior hyperparameter; returns its index.
int add_vague_hyper(HyperLayout& layout, const std::string& name, HyperScale scale,
                    const VaguePrior& prior = {});

/// Block-diagonal prior precision over all latent blocks, optionally with its
/// log-determinant.
SpMat assemble_prior_precision(const ModelGraph& model, std::span<const double> theta,
                               double* log_det = nullptr);

}  // namespace firecast::lgm
