#include "firecast/lgm/model.hpp"

#include <string>

#include "firecast/spacetime.hpp"

namespace firecast::lgm {

int ModelGraph::add_block(EffectBlock block) {
  blocks.push_back(std::move(block));
  return static_cast<int>(blocks.size()) - 1;
}

int ModelGraph::block_index(const std::string& name) const {
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].name == name) return static_cast<int>(b);
  }
  return -1;
}

Eigen::Index ModelGraph::latent_dimension() const {
  Eigen::Index n = 0;
  for (const EffectBlock& b : blocks) {
    if (b.kind != BlockKind::SharedCopy) n += b.dimension;
  }
  return n;
}

Eigen::Index ModelGraph::num_observations() const {
  Eigen::Index m = 0;
  for (const ObservationGroup& g : groups) m += g.y.size();
  return m;
}

std::vector<Eigen::Index> ModelGraph::block_offsets() const {
  std::vector<Eigen::Index> offsets(blocks.size(), 0);
  Eigen::Index next = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].kind == BlockKind::SharedCopy) continue;
    offsets[b] = next;
    next += blocks[b].dimension;
  }
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].kind == BlockKind::SharedCopy) offsets[b] = offsets[blocks[b].source];
  }
  return offsets;
}

void ModelGraph::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::Config, "model graph: " + msg); };
  if (static_cast<int>(hyper.scales.size()) != hyper.size()) fail("hyper layout is inconsistent");
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const EffectBlock& block = blocks[b];
    if (block.kind == BlockKind::SharedCopy) {
      if (block.source < 0 || block.source >= static_cast<int>(blocks.size()) ||
          blocks[block.source].kind == BlockKind::SharedCopy) {
        fail("shared copy '" + block.name + "' has an invalid source");
      }
      if (block.scale_hyper < 0 || block.scale_hyper >= hyper.size()) {
        fail("shared copy '" + block.name + "' has an invalid scale hyperparameter");
      }
      if (block.dimension != 0) fail("shared copy '" + block.name + "' must not add latents");
    } else if (!block.precision) {
      fail("block '" + block.name + "' has no precision builder");
    }
  }
  for (const ObservationGroup& g : groups) {
    if (g.y.size() == 0) {
      throw Error(ErrorKind::EmptyLikelihood, "observation group '" + g.name + "' is empty");
    }
    if (g.family == Family::Gaussian &&
        (g.precision_hyper < 0 || g.precision_hyper >= hyper.size())) {
      fail("gaussian group '" + g.name + "' needs a precision hyperparameter");
    }
    for (const PredictorTerm& t : g.terms) {
      if (t.block < 0 || t.block >= static_cast<int>(blocks.size())) {
        fail("group '" + g.name + "' references a missing block");
      }
      const EffectBlock& block = blocks[t.block];
      const Eigen::Index cols = block.kind == BlockKind::SharedCopy
                                    ? blocks[block.source].dimension
                                    : block.dimension;
      if (t.design.cols() != cols || t.design.rows() != g.y.size()) {
        fail("design of group '" + g.name + "' on block '" + block.name +
             "' has the wrong shape");
      }
    }
  }
}

EffectBlock fixed_block(std::string name, Eigen::Index dimension, double precision,
                        std::vector<std::string> labels) {
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != dimension) {
    throw Error(ErrorKind::DimensionMismatch, "fixed block labels do not match its dimension");
  }
  EffectBlock block;
  block.labels = std::move(labels);
  block.name = std::move(name);
  block.kind = BlockKind::Fixed;
  block.dimension = dimension;
  block.precision = [dimension, precision](std::span<const double>) {
    SpMat q = identity<double>(dimension) * precision;
    return BlockPrecision{q, static_cast<double>(dimension) * std::log(precision)};
  };
  return block;
}

EffectBlock spde_block(std::string name, std::shared_ptr<const FemMatrices<double>> fem,
                       Eigen::VectorXd sigma_hat, MaternBaseline baseline, int offset) {
  EffectBlock block;
  block.name = std::move(name);
  block.kind = BlockKind::SpdeNonStationary;
  block.dimension = fem->c.rows();
  auto cache = std::make_shared<AnalysisCache<double>>();
  block.precision = [fem, sigma_hat = std::move(sigma_hat), baseline, offset,
                     cache](std::span<const double> theta) {
    NonStationaryTheta params{theta[offset],     theta[offset + 1], theta[offset + 2],
                              baseline.tau0,     baseline.kappa0,   sigma_hat};
    SpMat q = precision_nonstationary(params, *fem);
    const double log_det = cache->factorize(q).log_det();
    return BlockPrecision{std::move(q), log_det};
  };
  return block;
}

EffectBlock spacetime_block(std::string name, std::shared_ptr<const FemMatrices<double>> fem,
                            int n_periods, int n_replicates, int offset) {
  EffectBlock block;
  block.name = std::move(name);
  block.kind = BlockKind::SpaceTime;
  block.dimension = fem->c.rows() * n_periods * n_replicates;
  auto cache = std::make_shared<AnalysisCache<double>>();
  block.precision = [fem, n_periods, n_replicates, offset,
                     cache](std::span<const double> theta) {
    const double range = std::exp(theta[offset]);
    const double log_sigma = theta[offset + 1];
    const double rho = rho_from_internal(theta[offset + 2]);
    if (!std::isfinite(log_sigma) || std::abs(log_sigma) > kMaxLogScale) {
      throw Error(ErrorKind::ParameterRange, "log sigma out of range");
    }
    const SpMat unit = unit_variance_spatial(range, *fem);
    const double inv_var = std::exp(-2.0 * log_sigma);
    const SpMat q = spacetime_precision({rho, n_periods, n_replicates}, unit * inv_var);
    const double n = static_cast<double>(unit.rows());
    const double space_log_det = cache->factorize(unit).log_det() + n * std::log(inv_var);
    const double log_det =
        n_replicates * (n * ar1_log_det(rho, n_periods) + n_periods * space_log_det);
    return BlockPrecision{q, log_det};
  };
  return block;
}

EffectBlock shared_copy_block(std::string name, int source, int scale_hyper) {
  EffectBlock block;
  block.name = std::move(name);
  block.kind = BlockKind::SharedCopy;
  block.source = source;
  block.scale_hyper = scale_hyper;
  return block;
}

int add_spde_hypers(HyperLayout& layout, const std::string& prefix, const VaguePrior& prior) {
  const int first = layout.size();
  for (const char* suffix : {"theta1", "theta2", "theta3"}) {
    const int idx = layout.add(prefix + "." + suffix, HyperScale::Identity);
    layout.components.push_back(VagueComponent{idx, prior});
  }
  return first;
}

int add_spacetime_hypers(HyperLayout& layout, const std::string& prefix,
                         const PcMaternPrior& matern, const PcAr1Prior& ar1) {
  const int range = layout.add(prefix + ".range", HyperScale::Log);
  const int sigma = layout.add(prefix + ".sd", HyperScale::Log);
  const int rho = layout.add(prefix + ".rho", HyperScale::Correlation);
  layout.components.push_back(PcMaternComponent{range, sigma, matern});
  layout.components.push_back(PcAr1Component{rho, ar1});
  return range;
}

int add_vague_hyper(HyperLayout& layout, const std::string& name, HyperScale scale,
                    const VaguePrior& prior) {
  const int idx = layout.add(name, scale);
  layout.components.push_back(VagueComponent{idx, prior});
  return idx;
}

SpMat assemble_prior_precision(const ModelGraph& model, std::span<const double> theta,
                               double* log_det) {
  if (static_cast<int>(theta.size()) != model.hyper.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                "theta has length " + std::to_string(theta.size()) + ", layout expects " +
                    std::to_string(model.hyper.size()));
  }
  std::vector<SpMat> parts;
  double total = 0.0;
  for (const EffectBlock& block : model.blocks) {
    if (block.kind == BlockKind::SharedCopy) continue;
    BlockPrecision bp = block.precision(theta);
    if (bp.q.rows() != block.dimension || bp.q.cols() != block.dimension) {
      throw Error(ErrorKind::DimensionMismatch,
                  "precision of block '" + block.name + "' has the wrong size");
    }
    total += bp.log_det;
    parts.push_back(std::move(bp.q));
  }
  if (log_det) *log_det = total;
  SpMat q = block_diagonal(parts);
  q.makeCompressed();
  return q;
}

}  // namespace firecast::lgm
