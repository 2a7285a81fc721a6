#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace firecast {

/// PC prior on (range, sigma) of a two-dimensional Matérn field, calibrated by
/// P(range < range0) = alpha_range and P(sigma > sigma0) = alpha_sigma.
struct PcMaternPrior {
  double range0 = 55.0;
  double alpha_range = 0.1;
  double sigma0 = 0.5;
  double alpha_sigma = 0.1;

  double lambda_range() const;
  double lambda_sigma() const;
};

/// PC prior for an AR(1) correlation with base model rho = 1, distance
/// sqrt(1 - rho), calibrated by P(rho < rho_ref) = alpha_rho. The exponential
/// on the distance is truncated to the support (-1, 1) and renormalised; the
/// rate is solved numerically so the tail statement holds exactly.
class PcAr1Prior {
 public:
  explicit PcAr1Prior(double rho_ref = 0.0, double alpha_rho = 0.05);

  double rho_ref() const { return rho_ref_; }
  double alpha() const { return alpha_; }
  double lambda() const { return lambda_; }
  /// Rate of the untruncated exponential, -log(alpha) / sqrt(1 - rho_ref).
  double untruncated_lambda() const;

 private:
  double rho_ref_;
  double alpha_;
  double lambda_;
};

/// Gaussian prior on an internal-scale hyperparameter.
struct VaguePrior {
  double mean = 0.0;
  double precision = 1e-3;
};

double pc_matern_logdensity(double range, double sigma, const PcMaternPrior& prior);
double pc_ar1_logdensity(double rho, const PcAr1Prior& prior);
double vague_logdensity(double value, const VaguePrior& prior);

/// Maps between internal (optimisation) and user scales.
enum class HyperScale { Identity, Log, Correlation };

double to_user_scale(double internal, HyperScale scale);
double to_internal_scale(double user, HyperScale scale);

/// Correlation link: rho = 2 / (1 + exp(-eta)) - 1.
double rho_from_internal(double eta);
double rho_to_internal(double rho);

struct VagueComponent {
  int index;
  VaguePrior prior;
};
/// Internal values theta[log_range_index] = log range, theta[log_sigma_index]
/// = log sigma; the density includes both log-transform Jacobians.
struct PcMaternComponent {
  int log_range_index;
  int log_sigma_index;
  PcMaternPrior prior;
};
/// theta[index] = rho_to_internal(rho); includes the link Jacobian.
struct PcAr1Component {
  int index;
  PcAr1Prior prior;
};
using PriorComponent = std::variant<VagueComponent, PcMaternComponent, PcAr1Component>;

/// Named hyperparameters and the product-form prior over them.
struct HyperLayout {
  std::vector<std::string> names;
  std::vector<HyperScale> scales;
  std::vector<PriorComponent> components;

  int size() const { return static_cast<int>(names.size()); }
  int add(std::string name, HyperScale scale);
};

double component_logdensity(std::span<const double> theta, const PriorComponent& component);

/// Sum of component log-priors on the internal scale. Throws on a length
/// mismatch; returns -inf outside the support.
double hyper_prior_logdensity(std::span<const double> theta, const HyperLayout& layout);

}  // namespace firecast
