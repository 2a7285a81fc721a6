#include "firecast/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "firecast/spacetime.hpp"

namespace firecast::sim {

namespace {

enum Stream : std::uint64_t {
  kCovariates = 0,
  kW1Z, kW2Z, kW1Cnt, kW2Cnt, kW1Ba, kW2Ba,
  kOccurrence, kCount, kArea, kHoldout,
};

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::ParameterRange, "simulation: " + what);
}

void check_predictor(const PredictorTruth& p, const std::string& name, int n_cov) {
  check(!std::isnan(p.intercept), name + " intercept is NaN");
  check(static_cast<int>(p.beta.size()) <= n_cov, name + " has more coefficients than covariates");
  for (double b : p.beta) check(std::isfinite(b), name + " coefficient is not finite");
  check(std::isfinite(p.theta1) && std::isfinite(p.theta2) && std::isfinite(p.theta3),
        name + " W1 parameters must be finite");
  check(p.w2.range > 0.0 && std::isfinite(p.w2.range), name + " W2 range must be positive");
  check(p.w2.sd > 0.0 && std::isfinite(p.w2.sd), name + " W2 sd must be positive");
  check(std::abs(p.w2.rho) < 1.0, name + " W2 rho must lie in (-1, 1)");
}

Eigen::VectorXd draw_w1(const PredictorTruth& p, const FemMatrices<double>& fem,
                        const Eigen::VectorXd& sigma_hat, const MaternBaseline& base,
                        std::uint64_t seed) {
  const NonStationaryTheta theta{p.theta1, p.theta2, p.theta3, base.tau0, base.kappa0, sigma_hat};
  const CholeskyFactor<double> f(precision_nonstationary(theta, fem));
  return f.sample(Eigen::VectorXd::Zero(f.size()), seed, 1).col(0);
}

Eigen::VectorXd draw_w2(const SpaceTimeTruth& t, const FemMatrices<double>& fem, int n_years,
                        std::uint64_t seed) {
  const SpMat qs = unit_variance_spatial(t.range, fem) / (t.sd * t.sd);
  const CholeskyFactor<double> f(spacetime_precision({t.rho, wildfire::kMonths, n_years}, qs));
  return f.sample(Eigen::VectorXd::Zero(f.size()), seed, 1).col(0);
}

}  // namespace

void SimConfig::validate() const {
  check(nx >= 2 && ny >= 2, "grid needs at least 2 x 2 cells");
  check(cell_deg > 0.0, "cell size must be positive");
  check(n_years >= 2, "need at least two years");
  check(n_covariates >= 3, "need at least three covariates");
  check(holdout >= 0.0 && holdout < 1.0, "holdout fraction must lie in [0, 1)");
  check(std::abs(lat0) < 89.0 && std::abs(lat0 + ny * cell_deg) < 89.0, "latitudes out of range");
  check_predictor(z, "Z", n_covariates);
  check_predictor(cnt, "CNT", n_covariates);
  check_predictor(ba, "BA", n_covariates);
  check(std::isfinite(cnt.intercept) && std::isfinite(ba.intercept),
        "CNT and BA intercepts must be finite");
  check(std::isfinite(alpha), "alpha must be finite");
  check(ba_noise_precision > 0.0 && std::isfinite(ba_noise_precision),
        "BA noise precision must be positive");
}

Eigen::VectorXd SimConfig::theta_occurrence() const {
  Eigen::VectorXd t(6);
  t << z.theta1, z.theta2, z.theta3, std::log(z.w2.range), std::log(z.w2.sd),
      rho_to_internal(z.w2.rho);
  return t;
}

Eigen::VectorXd SimConfig::theta_joint() const {
  Eigen::VectorXd t(14);
  t << std::log(ba_noise_precision), ba.theta1, ba.theta2, ba.theta3, std::log(ba.w2.range),
      std::log(ba.w2.sd), rho_to_internal(ba.w2.rho), cnt.theta1, cnt.theta2, cnt.theta3,
      std::log(cnt.w2.range), std::log(cnt.w2.sd), rho_to_internal(cnt.w2.rho), alpha;
  return t;
}

Eigen::VectorXd design_sigma_hat(std::span<const Point> points) {
  double x0 = 0.0, y0 = 0.0;
  for (const Point& p : points) {
    x0 += p.x;
    y0 += p.y;
  }
  if (!points.empty()) {
    x0 /= static_cast<double>(points.size());
    y0 /= static_cast<double>(points.size());
  }
  Eigen::VectorXd s(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double u = (points[i].x - x0) / 300.0, v = (points[i].y - y0) / 300.0;
    s[static_cast<Eigen::Index>(i)] = 0.25 + 0.25 * std::sin(u + 0.5) * std::cos(v);
  }
  return s;
}

SimOutput simulate(const SimConfig& config) {
  config.validate();
  using wildfire::kFirstMonth;
  using wildfire::kMonths;
  const int n_cells = config.nx * config.ny;
  const int n_records = n_cells * kMonths * config.n_years;

  wildfire::WildfireDataset data;
  data.lon.reserve(n_records);
  for (int y = 0; y < config.n_years; ++y) {
    for (int m = 0; m < kMonths; ++m) {
      for (int j = 0; j < config.ny; ++j) {
        for (int i = 0; i < config.nx; ++i) {
          data.lon.push_back(config.lon0 + (i + 0.5) * config.cell_deg);
          data.lat.push_back(config.lat0 + (j + 0.5) * config.cell_deg);
          data.year.push_back(config.first_year + y);
          data.month.push_back(kFirstMonth + m);
        }
      }
    }
  }
  const Eigen::Index n = n_records;
  for (int k = 0; k < config.n_covariates; ++k) {
    data.covariate_names.push_back("cov_" + std::to_string(k + 1));
  }
  data.covariates.resize(n, config.n_covariates);
  {
    std::mt19937_64 rng(derive_seed(config.seed, kCovariates));
    std::normal_distribution<double> normal(0.0, 1.0);
    const double wx = config.nx * config.cell_deg, wy = config.ny * config.cell_deg;
    for (Eigen::Index r = 0; r < n; ++r) {
      const double u = (data.lon[r] - config.lon0) / wx, v = (data.lat[r] - config.lat0) / wy;
      const double t = (data.month[r] - kFirstMonth) / static_cast<double>(kMonths);
      data.covariates(r, 0) = std::sqrt(2.0) * std::sin(2.0 * std::numbers::pi * u);
      data.covariates(r, 1) = std::sqrt(2.0) * std::cos(2.0 * std::numbers::pi * (v + 0.3 * t));
      for (int k = 2; k < config.n_covariates; ++k) data.covariates(r, k) = normal(rng);
    }
  }
  data.cnt = Eigen::VectorXd::Zero(n);
  data.ba = Eigen::VectorXd::Zero(n);
  data.finalize();

  const double ref_lat = wildfire::reference_latitude(data);
  const std::vector<Point> cells = wildfire::project_cells(data, ref_lat);
  const Mesh fine = build_mesh(cells, config.model.fine);
  const Mesh coarse = build_mesh(cells, config.model.coarse);
  const FemMatrices<double> fem_fine = fem_matrices(fine);
  const FemMatrices<double> fem_coarse = fem_matrices(coarse);
  const MaternBaseline base = default_baseline(diameter(cells));
  const Eigen::VectorXd sigma = design_sigma_hat(fine.vertices);
  const SpMat a_fine(projector(fine, cells));
  const SpMat a_coarse(projector(coarse, cells));

  const Eigen::VectorXd w1z = a_fine * draw_w1(config.z, fem_fine, sigma, base, derive_seed(config.seed, kW1Z));
  const Eigen::VectorXd w1c = a_fine * draw_w1(config.cnt, fem_fine, sigma, base, derive_seed(config.seed, kW1Cnt));
  const Eigen::VectorXd w1b = a_fine * draw_w1(config.ba, fem_fine, sigma, base, derive_seed(config.seed, kW1Ba));
  const Eigen::VectorXd w2z = draw_w2(config.z.w2, fem_coarse, config.n_years, derive_seed(config.seed, kW2Z));
  const Eigen::VectorXd w2c = draw_w2(config.cnt.w2, fem_coarse, config.n_years, derive_seed(config.seed, kW2Cnt));
  const Eigen::VectorXd w2b = draw_w2(config.ba.w2, fem_coarse, config.n_years, derive_seed(config.seed, kW2Ba));
  const Eigen::Index nv = coarse.num_vertices();
  auto w2_at = [&](const Eigen::VectorXd& w2, Eigen::Index r) {
    const SpaceTimeIndex idx{static_cast<int>(nv), kMonths, config.n_years};
    const Eigen::Index off = idx(0, data.month[r] - kFirstMonth, data.year[r] - config.first_year);
    return a_coarse.row(data.cell[r]).dot(w2.segment(off, nv));
  };
  auto linear = [&](const PredictorTruth& p, Eigen::Index r) {
    double eta = p.intercept;
    for (std::size_t k = 0; k < p.beta.size(); ++k) {
      eta += p.beta[k] * data.covariates(r, static_cast<Eigen::Index>(k));
    }
    return eta;
  };

  SimOutput out;
  out.probability.resize(n);
  std::mt19937_64 occ(derive_seed(config.seed, kOccurrence));
  std::mt19937_64 cnt_rng(derive_seed(config.seed, kCount));
  std::mt19937_64 ba_rng(derive_seed(config.seed, kArea));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(config.ba_noise_precision));
  for (Eigen::Index r = 0; r < n; ++r) {
    const int c = data.cell[r];
    const double p = logistic(linear(config.z, r) + w1z[c] + w2_at(w2z, r));
    out.probability[r] = p;
    const bool fire = unif(occ) < p;
    if (!fire) continue;
    const double w2ba = w2_at(w2b, r);
    const double log_lambda = linear(config.cnt, r) + w1c[c] + w2_at(w2c, r) + config.alpha * w2ba;
    std::poisson_distribution<long long> pois(std::exp(log_lambda));
    data.cnt[r] = 1.0 + static_cast<double>(pois(cnt_rng));
    const double mu = linear(config.ba, r) + w1b[c] + w2ba;
    data.ba[r] = std::exp(mu + normal(ba_rng));
  }
  data.finalize();
  out.complete = data;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 hold(derive_seed(config.seed, kHoldout));
  std::shuffle(order.begin(), order.end(), hold);
  const std::size_t n_hold = static_cast<std::size_t>(std::llround(config.holdout * static_cast<double>(n)));
  out.holdout.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_hold));
  std::sort(out.holdout.begin(), out.holdout.end());
  out.observed = data;
  for (Eigen::Index r : out.holdout) {
    out.observed.cnt[r] = std::numeric_limits<double>::quiet_NaN();
    out.observed.ba[r] = std::numeric_limits<double>::quiet_NaN();
  }
  out.observed.finalize();
  return out;
}

}  // namespace firecast::sim
