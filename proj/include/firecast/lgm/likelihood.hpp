#pragma once

#include <string_view>

namespace firecast::lgm {

enum class Family { Bernoulli, Poisson, Gaussian };

std::string_view to_string(Family family);

/// Log-density and its first and negated second derivative with respect to
/// the linear predictor.
struct LikelihoodTerms {
  double log_density;
  double gradient;
  double neg_hessian;
};

/// Bernoulli uses the logit link, Poisson the log link; Gaussian has identity
/// link with the given noise precision (ignored by the other families).
LikelihoodTerms evaluate(Family family, double y, double eta, double precision = 1.0);

double log_density(Family family, double y, double eta, double precision = 1.0);

}  // namespace firecast::lgm
