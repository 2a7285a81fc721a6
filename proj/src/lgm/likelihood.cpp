#include "firecast/lgm/likelihood.hpp"

#include <cmath>
#include <numbers>

namespace firecast::lgm {

namespace {

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::Bernoulli:
      return "bernoulli";
    case Family::Poisson:
      return "poisson";
    case Family::Gaussian:
      return "gaussian";
  }
  return "unknown";
}

LikelihoodTerms evaluate(Family family, double y, double eta, double precision) {
  switch (family) {
    case Family::Bernoulli: {
      const double p = logistic(eta);
      return {y * eta - softplus(eta), y - p, p * (1.0 - p)};
    }
    case Family::Poisson: {
      const double mu = std::exp(eta);
      return {y * eta - mu - std::lgamma(y + 1.0), y - mu, mu};
    }
    case Family::Gaussian: {
      const double r = y - eta;
      return {0.5 * std::log(precision / (2.0 * std::numbers::pi)) - 0.5 * precision * r * r,
              precision * r, precision};
    }
  }
  return {0.0, 0.0, 0.0};
}

double log_density(Family family, double y, double eta, double precision) {
  return evaluate(family, y, eta, precision).log_density;
}

}  // namespace firecast::lgm
