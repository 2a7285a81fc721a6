#include "firecast/priors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "firecast/errors.hpp"

namespace firecast {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_probability(double alpha, const char* what) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorKind::Config, std::string(what) + " must lie in (0, 1)");
  }
}

// Tail mass P(d > d_ref) of an exponential(lambda) truncated to (0, sqrt 2).
double truncated_tail(double lambda, double d_ref) {
  const double dmax = std::numbers::sqrt2;
  return (std::exp(-lambda * d_ref) - std::exp(-lambda * dmax)) /
         -std::expm1(-lambda * dmax);
}

}  // namespace

double PcMaternPrior::lambda_range() const {
  check_probability(alpha_range, "alpha_range");
  if (!(range0 > 0.0)) throw Error(ErrorKind::Config, "range0 must be positive");
  return -std::log(alpha_range) * range0;  // range0^{d/2} with d = 2
}

double PcMaternPrior::lambda_sigma() const {
  check_probability(alpha_sigma, "alpha_sigma");
  if (!(sigma0 > 0.0)) throw Error(ErrorKind::Config, "sigma0 must be positive");
  return -std::log(alpha_sigma) / sigma0;
}

PcAr1Prior::PcAr1Prior(double rho_ref, double alpha_rho) : rho_ref_(rho_ref), alpha_(alpha_rho) {
  check_probability(alpha_rho, "alpha_rho");
  if (!(std::abs(rho_ref) < 1.0)) throw Error(ErrorKind::Config, "rho_ref must lie in (-1, 1)");
  const double d_ref = std::sqrt(1.0 - rho_ref);
  // The tail decreases from (sqrt2 - d_ref) / sqrt2 at lambda -> 0 to 0.
  if (!(alpha_rho < (std::numbers::sqrt2 - d_ref) / std::numbers::sqrt2)) {
    throw Error(ErrorKind::Config, "alpha_rho is not attainable for this rho_ref");
  }
  double lo = 1e-10, hi = 1.0;
  while (truncated_tail(hi, d_ref) > alpha_rho) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (truncated_tail(mid, d_ref) > alpha_rho ? lo : hi) = mid;
  }
  lambda_ = 0.5 * (lo + hi);
}

double PcAr1Prior::untruncated_lambda() const {
  return -std::log(alpha_) / std::sqrt(1.0 - rho_ref_);
}

double pc_matern_logdensity(double range, double sigma, const PcMaternPrior& prior) {
  if (!(range > 0.0)) throw Error(ErrorKind::ParameterRange, "range must be positive");
  if (!(sigma >= 0.0)) return kNegInf;
  const double lr = prior.lambda_range();
  const double ls = prior.lambda_sigma();
  // (d/2) lambda r^{-d/2-1} exp(-lambda r^{-d/2}) with d = 2
  const double log_range = std::log(lr) - 2.0 * std::log(range) - lr / range;
  const double log_sigma = std::log(ls) - ls * sigma;
  return log_range + log_sigma;
}

double pc_ar1_logdensity(double rho, const PcAr1Prior& prior) {
  if (!(std::abs(rho) < 1.0)) {
    throw Error(ErrorKind::ParameterRange, "rho must lie in (-1, 1)");
  }
  const double lambda = prior.lambda();
  const double d = std::sqrt(1.0 - rho);
  return std::log(lambda) - lambda * d - std::log(-std::expm1(-lambda * std::numbers::sqrt2)) -
         std::log(2.0 * d);
}

double vague_logdensity(double value, const VaguePrior& prior) {
  const double z = value - prior.mean;
  return 0.5 * std::log(prior.precision / (2.0 * std::numbers::pi)) -
         0.5 * prior.precision * z * z;
}

double rho_from_internal(double eta) { return 2.0 / (1.0 + std::exp(-eta)) - 1.0; }

double rho_to_internal(double rho) { return std::log((1.0 + rho) / (1.0 - rho)); }

double to_user_scale(double internal, HyperScale scale) {
  switch (scale) {
    case HyperScale::Identity:
      return internal;
    case HyperScale::Log:
      return std::exp(internal);
    case HyperScale::Correlation:
      return rho_from_internal(internal);
  }
  return internal;
}

double to_internal_scale(double user, HyperScale scale) {
  switch (scale) {
    case HyperScale::Identity:
      return user;
    case HyperScale::Log:
      return std::log(user);
    case HyperScale::Correlation:
      return rho_to_internal(user);
  }
  return user;
}

int HyperLayout::add(std::string name, HyperScale scale) {
  names.push_back(std::move(name));
  scales.push_back(scale);
  return size() - 1;
}

double component_logdensity(std::span<const double> theta, const PriorComponent& component) {
  struct Visitor {
    std::span<const double> theta;
    double operator()(const VagueComponent& c) const {
      return vague_logdensity(theta[c.index], c.prior);
    }
    double operator()(const PcMaternComponent& c) const {
      const double log_range = theta[c.log_range_index];
      const double log_sigma = theta[c.log_sigma_index];
      const double range = std::exp(log_range);
      const double sigma = std::exp(log_sigma);
      if (!std::isfinite(log_range) || !(range > 0.0) || !std::isfinite(range) ||
          !std::isfinite(sigma)) {
        return kNegInf;
      }
      return pc_matern_logdensity(range, sigma, c.prior) + log_range + log_sigma;
    }
    double operator()(const PcAr1Component& c) const {
      const double eta = theta[c.index];
      const double rho = rho_from_internal(eta);
      if (!std::isfinite(eta) || !(std::abs(rho) < 1.0)) return kNegInf;
      // d rho / d eta = (1 - rho^2) / 2
      return pc_ar1_logdensity(rho, c.prior) + std::log1p(-rho * rho) - std::log(2.0);
    }
  };
  for (double v : theta) {
    if (std::isnan(v)) return kNegInf;
  }
  return std::visit(Visitor{theta}, component);
}

double hyper_prior_logdensity(std::span<const double> theta, const HyperLayout& layout) {
  if (static_cast<int>(theta.size()) != layout.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                "hyperparameter vector has length " + std::to_string(theta.size()) +
                    ", layout expects " + std::to_string(layout.size()));
  }
  double total = 0.0;
  for (const PriorComponent& c : layout.components) total += component_logdensity(theta, c);
  return total;
}

}  // namespace firecast
