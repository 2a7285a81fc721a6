#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "firecast/wildfire/twopart.hpp"

namespace firecast::scoring {

struct ScoreConfig {
  Eigen::VectorXd thresholds;
  Eigen::VectorXd weights;

  /// Throws on unequal lengths, unordered thresholds or invalid weights.
  void validate() const;
};

/// w_k = 1 - (1 - k / n)^2 for ranks k = 1..n: increasing, largest weight on
/// the top threshold.
Eigen::VectorXd default_weights(Eigen::Index n);
ScoreConfig default_config(const Eigen::VectorXd& thresholds);

/// sum_k w_k (F(u_k) - 1{y <= u_k})^2. Throws an invalid-cdf error if `cdf`
/// leaves [0, 1] or decreases.
double weighted_rps(const Eigen::Ref<const Eigen::VectorXd>& cdf, double observed,
                    const ScoreConfig& config);

struct TargetScore {
  Eigen::Index target;
  std::string variable;
  double score;
};

struct Report {
  std::vector<TargetScore> rows;
  double total_cnt = 0.0;
  double total_ba = 0.0;
  double total() const { return total_cnt + total_ba; }
};

/// Observed values by target id.
struct Truth {
  std::map<Eigen::Index, std::pair<double, double>> values;  ///< id -> (CNT, BA)
};

Truth truth_from_dataset(const wildfire::WildfireDataset& data);

/// Scores every target; rows follow ascending target id regardless of the
/// order in `predictions`.
Report evaluate(const wildfire::PredictiveDistribution& predictions, const Truth& truth,
                const ScoreConfig& cnt, const ScoreConfig& ba);

/// CSV `target_id,variable,score` with a `# total` footer.
void write_report(std::ostream& os, const Report& report);

/// Side-by-side totals of two models.
void print_comparison(std::ostream& os, const std::string& name_a, const Report& a,
                      const std::string& name_b, const Report& b);

/// Fixed-effects-only benchmark: Poisson GLM on CNT, Gaussian GLM on log BA.
struct BenchmarkFit {
  wildfire::Standardization scaling;
  std::shared_ptr<const lgm::CompiledModel> cnt_model, ba_model;
  lgm::FitResult cnt, ba;
};

BenchmarkFit benchmark_glm(const wildfire::WildfireDataset& data,
                           const lgm::OptimizerSettings& settings = {});

/// Benchmark CDFs: Poisson directly for CNT; for BA the probability of no
/// fire is exp(-lambda) and positive values follow the lognormal GLM.
wildfire::PredictiveDistribution benchmark_predictive(const BenchmarkFit& fit,
                                                      const wildfire::WildfireDataset& data,
                                                      const std::vector<Eigen::Index>& targets,
                                                      const Eigen::VectorXd& thresholds_cnt,
                                                      const Eigen::VectorXd& thresholds_ba,
                                                      std::uint64_t seed, int n_samples);

}  // namespace firecast::scoring
