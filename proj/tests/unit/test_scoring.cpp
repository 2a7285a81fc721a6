#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "firecast/scoring.hpp"
#include "firecast/simulate.hpp"

using namespace firecast;
using namespace firecast::scoring;

namespace {

ScoreConfig config(std::initializer_list<double> u, std::initializer_list<double> w) {
  ScoreConfig c;
  c.thresholds = Eigen::VectorXd::Map(u.begin(), static_cast<Eigen::Index>(u.size()));
  c.weights = Eigen::VectorXd::Map(w.begin(), static_cast<Eigen::Index>(w.size()));
  return c;
}

// Random valid predictions for `n` targets on the given grids.
wildfire::PredictiveDistribution random_predictions(int n, const Eigen::VectorXd& uc,
                                                    const Eigen::VectorXd& ub, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  wildfire::PredictiveDistribution pd;
  pd.thresholds_cnt = uc;
  pd.thresholds_ba = ub;
  pd.cnt.resize(n, uc.size());
  pd.ba.resize(n, ub.size());
  for (int i = 0; i < n; ++i) {
    pd.targets.push_back(3 * i + 1);
    const double p0 = unif(rng);
    double c = p0, b = p0;
    for (Eigen::Index k = 0; k < uc.size(); ++k) {
      c += (1.0 - c) * unif(rng) * 0.5;
      pd.cnt(i, k) = k == 0 ? p0 : c;
    }
    for (Eigen::Index k = 0; k < ub.size(); ++k) {
      b += (1.0 - b) * unif(rng) * 0.5;
      pd.ba(i, k) = k == 0 ? p0 : b;
    }
  }
  return pd;
}

}  // namespace

TEST_CASE("weighted RPS by hand") {
  const ScoreConfig one = config({5.0}, {1.0});
  CHECK(weighted_rps(Eigen::VectorXd::Constant(1, 0.7), 9.0, one) == doctest::Approx(0.49));
  CHECK(weighted_rps(Eigen::VectorXd::Constant(1, 0.7), 5.0, one) == doctest::Approx(0.09));

  const ScoreConfig three = config({0.0, 1.0, 4.0}, {0.5, 1.0, 2.0});
  Eigen::Vector3d f(0.2, 0.5, 0.9);
  const double total = weighted_rps(f, 2.0, three);
  double sum = 0.0;
  for (int k = 0; k < 3; ++k) {
    sum += weighted_rps(Eigen::VectorXd::Constant(1, f[k]), 2.0,
                        config({three.thresholds[k]}, {three.weights[k]}));
  }
  CHECK(total == doctest::Approx(sum).epsilon(1e-15));
  CHECK(total == doctest::Approx(0.5 * 0.04 + 0.25 + 2.0 * 0.01));

  // Perfect forecast on the grid.
  CHECK(weighted_rps(Eigen::Vector3d(0.0, 0.0, 1.0), 2.0, three) == 0.0);
  CHECK(weighted_rps(Eigen::Vector3d(1.0, 1.0, 1.0), 0.0, three) == 0.0);
  CHECK(weighted_rps(f, 2.0, three) > 0.0);

  // Weight scaling.
  ScoreConfig scaled = three;
  scaled.weights *= 3.5;
  CHECK(weighted_rps(f, 2.0, scaled) == doctest::Approx(3.5 * total).epsilon(1e-14));

  CHECK_THROWS_AS(weighted_rps(Eigen::Vector3d(0.5, 0.4, 1.0), 2.0, three), Error);
  CHECK_THROWS_AS(weighted_rps(Eigen::Vector3d(0.5, 0.6, 1.1), 2.0, three), Error);
  CHECK_THROWS_AS(weighted_rps(Eigen::Vector2d(0.5, 0.6), 2.0, three), Error);
}

TEST_CASE("score configuration") {
  const Eigen::VectorXd w = default_weights(28);
  CHECK(w[27] == 1.0);
  CHECK(w[0] == doctest::Approx(1.0 - std::pow(27.0 / 28.0, 2)));
  for (int k = 1; k < 28; ++k) CHECK(w[k] > w[k - 1]);
  CHECK_NOTHROW(default_config(wildfire::default_thresholds_cnt()).validate());
  CHECK_THROWS_AS(config({1.0, 2.0}, {1.0}).validate(), Error);
  CHECK_THROWS_AS(config({2.0, 1.0}, {1.0, 1.0}).validate(), Error);
  CHECK_THROWS_AS(config({1.0, 2.0}, {1.0, -1.0}).validate(), Error);
  CHECK_THROWS_AS(config({1.0, 2.0}, {0.0, 0.0}).validate(), Error);
}

TEST_CASE("evaluation over targets") {
  const Eigen::VectorXd uc = wildfire::default_thresholds_cnt();
  const Eigen::VectorXd ub = wildfire::default_thresholds_ba();
  const ScoreConfig sc = default_config(uc), sb = default_config(ub);
  const wildfire::PredictiveDistribution pd = random_predictions(40, uc, ub, 5);
  Truth truth;
  std::mt19937 rng(2);
  std::poisson_distribution<int> pois(3.0);
  std::lognormal_distribution<double> logn(2.0, 2.0);
  for (Eigen::Index id : pd.targets) {
    const int c = pois(rng);
    truth.values[id] = {c, c > 0 ? logn(rng) : 0.0};
  }
  const Report r = evaluate(pd, truth, sc, sb);
  CHECK(r.rows.size() == 80);
  CHECK(r.total() == doctest::Approx(r.total_cnt + r.total_ba));
  CHECK(r.total_cnt > 0.0);

  // Reversed target order: same rows and totals.
  wildfire::PredictiveDistribution rev = pd;
  std::reverse(rev.targets.begin(), rev.targets.end());
  rev.cnt = pd.cnt.colwise().reverse();
  rev.ba = pd.ba.colwise().reverse();
  const Report r2 = evaluate(rev, truth, sc, sb);
  REQUIRE(r2.rows.size() == r.rows.size());
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    CHECK(r2.rows[i].target == r.rows[i].target);
    CHECK(r2.rows[i].score == r.rows[i].score);
  }
  CHECK(r2.total() == r.total());

  // Identical predictions give identical scores; one-hot truth scores zero.
  CHECK(evaluate(pd, truth, sc, sb).total() == r.total());
  wildfire::PredictiveDistribution onehot = pd;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(pd.targets.size()); ++i) {
    const auto [c, b] = truth.values.at(pd.targets[i]);
    for (Eigen::Index k = 0; k < uc.size(); ++k) onehot.cnt(i, k) = c <= uc[k] ? 1.0 : 0.0;
    for (Eigen::Index k = 0; k < ub.size(); ++k) onehot.ba(i, k) = b <= ub[k] ? 1.0 : 0.0;
  }
  CHECK(evaluate(onehot, truth, sc, sb).total() == 0.0);

  Truth partial = truth;
  partial.values.erase(pd.targets[3]);
  CHECK_THROWS_AS(evaluate(pd, partial, sc, sb), Error);

  std::ostringstream os;
  write_report(os, r);
  CHECK(os.str().rfind("target_id,variable,score\n", 0) == 0);
  CHECK(os.str().find("# total,all,") != std::string::npos);
}

TEST_CASE("intercept-only Poisson GLM recovers the sample mean") {
  std::mt19937 rng(8);
  std::poisson_distribution<int> pois(2.3);
  const int n = 5000;
  lgm::ModelGraph g;
  const int b = g.add_block(lgm::fixed_block("b0", 1));
  lgm::ObservationGroup grp;
  grp.name = "y";
  grp.family = lgm::Family::Poisson;
  grp.y.resize(n);
  for (int i = 0; i < n; ++i) grp.y[i] = pois(rng);
  SpMat ones(n, 1);
  for (int i = 0; i < n; ++i) ones.insert(i, 0) = 1.0;
  grp.terms.push_back({b, ones});
  const double mean = grp.y.mean();
  g.groups.push_back(std::move(grp));
  const lgm::CompiledModel model(std::move(g));
  const lgm::FitResult fit = lgm::optimize_hyper(model, Eigen::VectorXd(0));
  CHECK(std::abs(std::exp(fit.mode[0]) - mean) < 1e-6);
}

TEST_CASE("benchmark GLM predictive CDFs") {
  sim::SimConfig cfg;
  cfg.nx = 5;
  cfg.ny = 4;
  cfg.n_years = 2;
  cfg.seed = 4;
  const sim::SimOutput s = sim::simulate(cfg);
  const BenchmarkFit fit = benchmark_glm(s.observed);
  CHECK(fit.cnt.theta.size() == 0);
  CHECK(fit.ba.theta.size() == 1);
  CHECK(fit.cnt.fixed.size() == 33);
  std::vector<Eigen::Index> targets(s.holdout.begin(), s.holdout.end());
  std::sort(targets.begin(), targets.end());
  const auto pd = benchmark_predictive(fit, s.observed, targets, wildfire::default_thresholds_cnt(),
                                       wildfire::default_thresholds_ba(), 3, 200);
  CHECK(pd.cnt.rows() == static_cast<Eigen::Index>(targets.size()));
  CHECK(pd.cnt.minCoeff() >= 0.0);
  CHECK(pd.cnt.maxCoeff() <= 1.0);
  CHECK(pd.ba.minCoeff() >= 0.0);
  CHECK(pd.ba.maxCoeff() <= 1.0);
  for (Eigen::Index i = 0; i < pd.cnt.rows(); ++i) {
    for (Eigen::Index k = 1; k < pd.cnt.cols(); ++k) CHECK(pd.cnt(i, k) >= pd.cnt(i, k - 1));
    for (Eigen::Index k = 1; k < pd.ba.cols(); ++k) CHECK(pd.ba(i, k) >= pd.ba(i, k - 1));
    CHECK(std::abs(pd.cnt(i, 0) - pd.ba(i, 0)) < 1e-12);
  }
  // Deterministic given the seed.
  const auto again = benchmark_predictive(fit, s.observed, targets, wildfire::default_thresholds_cnt(),
                                          wildfire::default_thresholds_ba(), 3, 200);
  CHECK(again.cnt == pd.cnt);
}
