#include "firecast/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include <boost/math/special_functions/gamma.hpp>

namespace firecast::scoring {

namespace {

SpMat intercept_design(const wildfire::Standardization& scaling,
                       const wildfire::WildfireDataset& data,
                       const std::vector<Eigen::Index>& rows) {
  const Eigen::MatrixXd raw = wildfire::raw_design(data);
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Eigen::Index i = rows[r];
    if (!data.covariates_complete(i)) {
      throw Error(ErrorKind::Data, "record " + std::to_string(i) + " has missing covariates");
    }
    const Eigen::RowVectorXd z =
        (raw.row(i) - scaling.mean.transpose()).cwiseQuotient(scaling.sd.transpose());
    t.emplace_back(static_cast<int>(r), 0, 1.0);
    for (Eigen::Index k = 0; k < z.size(); ++k) {
      t.emplace_back(static_cast<int>(r), static_cast<int>(k + 1), z[k]);
    }
  }
  SpMat x(static_cast<Eigen::Index>(rows.size()), raw.cols() + 1);
  x.setFromTriplets(t.begin(), t.end());
  return x;
}

std::vector<std::string> labels(const std::string& prefix, const wildfire::Standardization& s) {
  std::vector<std::string> out{prefix + ".intercept"};
  for (const auto& n : s.names) out.push_back(prefix + "." + n);
  return out;
}

}  // namespace

void ScoreConfig::validate() const {
  if (thresholds.size() != weights.size() || thresholds.size() == 0) {
    throw Error(ErrorKind::InvalidThresholds, "thresholds and weights must have equal nonzero length");
  }
  wildfire::check_thresholds(thresholds);
  if (!weights.allFinite() || (weights.array() < 0.0).any() || !(weights.sum() > 0.0)) {
    throw Error(ErrorKind::InvalidThresholds, "weights must be nonnegative and not all zero");
  }
}

Eigen::VectorXd default_weights(Eigen::Index n) {
  Eigen::VectorXd w(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double r = static_cast<double>(k + 1) / static_cast<double>(n);
    w[k] = 1.0 - (1.0 - r) * (1.0 - r);
  }
  return w;
}

ScoreConfig default_config(const Eigen::VectorXd& thresholds) {
  return {thresholds, default_weights(thresholds.size())};
}

double weighted_rps(const Eigen::Ref<const Eigen::VectorXd>& cdf, double observed,
                    const ScoreConfig& config) {
  if (cdf.size() != config.thresholds.size()) {
    throw Error(ErrorKind::InvalidCdf, "CDF length differs from the threshold count");
  }
  double score = 0.0;
  for (Eigen::Index k = 0; k < cdf.size(); ++k) {
    const double f = cdf[k];
    if (!(f >= 0.0 && f <= 1.0) || (k > 0 && f < cdf[k - 1])) {
      throw Error(ErrorKind::InvalidCdf, "CDF values must be nondecreasing within [0, 1]");
    }
    const double step = observed <= config.thresholds[k] ? 1.0 : 0.0;
    score += config.weights[k] * (f - step) * (f - step);
  }
  return score;
}

Truth truth_from_dataset(const wildfire::WildfireDataset& data) {
  Truth t;
  for (Eigen::Index i = 0; i < data.size(); ++i) t.values[i] = {data.cnt[i], data.ba[i]};
  return t;
}

Report evaluate(const wildfire::PredictiveDistribution& predictions, const Truth& truth,
                const ScoreConfig& cnt, const ScoreConfig& ba) {
  cnt.validate();
  ba.validate();
  if (predictions.thresholds_cnt.size() != cnt.thresholds.size() ||
      predictions.thresholds_ba.size() != ba.thresholds.size() ||
      predictions.thresholds_cnt != cnt.thresholds || predictions.thresholds_ba != ba.thresholds) {
    throw Error(ErrorKind::TargetMismatch, "prediction thresholds differ from the score configuration");
  }
  std::vector<std::size_t> order(predictions.targets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return predictions.targets[a] < predictions.targets[b];
  });
  Report report;
  for (std::size_t idx : order) {
    const Eigen::Index id = predictions.targets[idx];
    const auto it = truth.values.find(id);
    if (it == truth.values.end() || std::isnan(it->second.first) || std::isnan(it->second.second)) {
      throw Error(ErrorKind::TargetMismatch, "no observed truth for target " + std::to_string(id));
    }
    const Eigen::Index r = static_cast<Eigen::Index>(idx);
    const double sc = weighted_rps(predictions.cnt.row(r).transpose(), it->second.first, cnt);
    const double sb = weighted_rps(predictions.ba.row(r).transpose(), it->second.second, ba);
    report.rows.push_back({id, "CNT", sc});
    report.rows.push_back({id, "BA", sb});
    report.total_cnt += sc;
    report.total_ba += sb;
  }
  return report;
}

void write_report(std::ostream& os, const Report& report) {
  char buf[64];
  os << "target_id,variable,score\n";
  for (const TargetScore& s : report.rows) {
    std::snprintf(buf, sizeof buf, "%.10g", s.score);
    os << s.target << ',' << s.variable << ',' << buf << '\n';
  }
  std::snprintf(buf, sizeof buf, "%.10g", report.total_cnt);
  os << "# total,CNT," << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.10g", report.total_ba);
  os << "# total,BA," << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.10g", report.total());
  os << "# total,all," << buf << '\n';
}

void print_comparison(std::ostream& os, const std::string& name_a, const Report& a,
                      const std::string& name_b, const Report& b) {
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %16s %16s\n", "variable", name_a.c_str(), name_b.c_str());
  os << line;
  std::snprintf(line, sizeof line, "%-10s %16.4f %16.4f\n", "CNT", a.total_cnt, b.total_cnt);
  os << line;
  std::snprintf(line, sizeof line, "%-10s %16.4f %16.4f\n", "BA", a.total_ba, b.total_ba);
  os << line;
  std::snprintf(line, sizeof line, "%-10s %16.4f %16.4f\n", "total", a.total(), b.total());
  os << line;
}

BenchmarkFit benchmark_glm(const wildfire::WildfireDataset& data,
                           const lgm::OptimizerSettings& settings) {
  BenchmarkFit fit;
  const std::vector<Eigen::Index> train = wildfire::training_rows(data);
  fit.scaling = wildfire::standardize_covariates(data, train);
  std::vector<Eigen::Index> positive;
  for (Eigen::Index i : train) {
    if (data.ba[i] > 0.0) positive.push_back(i);
  }
  if (positive.empty()) throw Error(ErrorKind::EmptyLikelihood, "benchmark needs positive BA records");

  {
    lgm::ModelGraph g;
    const SpMat x = intercept_design(fit.scaling, data, train);
    const int b = g.add_block(lgm::fixed_block("beta_CNT", x.cols(), lgm::kVaguePrecision,
                                               labels("CNT", fit.scaling)));
    lgm::ObservationGroup grp;
    grp.name = "CNT";
    grp.family = lgm::Family::Poisson;
    grp.y.resize(static_cast<Eigen::Index>(train.size()));
    for (std::size_t r = 0; r < train.size(); ++r) grp.y[static_cast<Eigen::Index>(r)] = data.cnt[train[r]];
    grp.terms.push_back({b, x});
    g.groups.push_back(std::move(grp));
    fit.cnt_model = std::make_shared<const lgm::CompiledModel>(std::move(g));
    fit.cnt = lgm::optimize_hyper(*fit.cnt_model, Eigen::VectorXd(0), settings);
  }
  {
    lgm::ModelGraph g;
    lgm::add_vague_hyper(g.hyper, "BA.noise_prec", HyperScale::Log);
    const SpMat x = intercept_design(fit.scaling, data, positive);
    const int b = g.add_block(lgm::fixed_block("beta_BA", x.cols(), lgm::kVaguePrecision,
                                               labels("BA", fit.scaling)));
    lgm::ObservationGroup grp;
    grp.name = "BA";
    grp.family = lgm::Family::Gaussian;
    grp.precision_hyper = 0;
    grp.y.resize(static_cast<Eigen::Index>(positive.size()));
    for (std::size_t r = 0; r < positive.size(); ++r) {
      grp.y[static_cast<Eigen::Index>(r)] = std::log(data.ba[positive[r]]);
    }
    grp.terms.push_back({b, x});
    g.groups.push_back(std::move(grp));
    fit.ba_model = std::make_shared<const lgm::CompiledModel>(std::move(g));
    fit.ba = lgm::optimize_hyper(*fit.ba_model, Eigen::VectorXd::Zero(1), settings);
  }
  return fit;
}

wildfire::PredictiveDistribution benchmark_predictive(const BenchmarkFit& fit,
                                                      const wildfire::WildfireDataset& data,
                                                      const std::vector<Eigen::Index>& targets,
                                                      const Eigen::VectorXd& thresholds_cnt,
                                                      const Eigen::VectorXd& thresholds_ba,
                                                      std::uint64_t seed, int n_samples) {
  wildfire::check_thresholds(thresholds_cnt);
  wildfire::check_thresholds(thresholds_ba);
  if (n_samples < 1) throw Error(ErrorKind::Config, "need at least one predictive draw");
  const SpMat x = intercept_design(fit.scaling, data, targets);
  const Eigen::MatrixXd ecnt = x * lgm::sample_latent_posterior(fit.cnt, derive_seed(seed, 0), n_samples);
  const Eigen::MatrixXd eba = x * lgm::sample_latent_posterior(fit.ba, derive_seed(seed, 1), n_samples);
  const double sd = std::exp(-0.5 * fit.ba.theta[0]);
  const Eigen::Index nt = static_cast<Eigen::Index>(targets.size());
  wildfire::PredictiveDistribution pd;
  pd.targets = targets;
  pd.thresholds_cnt = thresholds_cnt;
  pd.thresholds_ba = thresholds_ba;
  pd.cnt = Eigen::MatrixXd::Zero(nt, thresholds_cnt.size());
  pd.ba = Eigen::MatrixXd::Zero(nt, thresholds_ba.size());
  for (Eigen::Index i = 0; i < nt; ++i) {
    for (int j = 0; j < n_samples; ++j) {
      const double lambda = std::exp(ecnt(i, j));
      const double p0 = std::exp(-lambda);
      double prev = 0.0;
      for (Eigen::Index k = 0; k < thresholds_cnt.size(); ++k) {
        const double v = std::min(1.0, boost::math::gamma_q(std::floor(thresholds_cnt[k]) + 1.0, lambda));
        prev = std::max(prev, v);
        pd.cnt(i, k) += prev;
      }
      // Same composition as the hurdle, with P(fire) = 1 - exp(-lambda).
      Eigen::VectorXd row(thresholds_ba.size());
      wildfire::hurdle_cdf_ba(1.0 - p0, eba(i, j), sd, thresholds_ba, row.data());
      pd.ba.row(i) += row.transpose();
    }
  }
  pd.cnt /= static_cast<double>(n_samples);
  pd.ba /= static_cast<double>(n_samples);
  pd.cnt = pd.cnt.cwiseMin(1.0);
  pd.ba = pd.ba.cwiseMin(1.0);
  return pd;
}

}  // namespace firecast::scoring
