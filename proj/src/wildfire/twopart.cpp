#include "firecast/wildfire/twopart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "firecast/spacetime.hpp"

namespace firecast::wildfire {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<Eigen::Index> rows_where(const WildfireDataset& data, const Eigen::VectorXd& v) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    if (!std::isnan(v[i]) && v[i] > 0.0 && data.covariates_complete(i)) rows.push_back(i);
  }
  return rows;
}

std::vector<std::string> fixed_labels(const std::string& prefix, const SpatialSetup& setup) {
  std::vector<std::string> labels{prefix + ".intercept"};
  for (const auto& n : setup.scaling.names) labels.push_back(prefix + "." + n);
  return labels;
}

// Stacks [X | A_fine | A_spacetime] terms for one predictor.
std::vector<lgm::PredictorTerm> standard_terms(const RecordDesign& d, int beta, int w1, int w2) {
  return {{beta, d.x}, {w1, d.a_fine}, {w2, d.a_spacetime}};
}

// Target-level linear predictor matrix over the model's full latent vector.
SpMat predictor_matrix(const lgm::CompiledModel& model,
                       const std::vector<std::pair<std::string, const SpMat*>>& parts,
                       const std::vector<double>& scales, Eigen::Index rows) {
  const auto& graph = model.graph();
  const auto& offsets = model.block_offsets();
  Triplets entries;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const int b = graph.block_index(parts[k].first);
    if (b < 0) throw Error(ErrorKind::Config, "model lacks block '" + parts[k].first + "'");
    const SpMat& m = *parts[k].second;
    for (Eigen::Index c = 0; c < m.outerSize(); ++c) {
      for (SpMat::InnerIterator it(m, c); it; ++it) {
        entries.emplace_back(static_cast<int>(it.row()), static_cast<int>(offsets[b] + it.col()),
                             scales[k] * it.value());
      }
    }
  }
  SpMat out(rows, model.latent_dimension());
  out.setFromTriplets(entries.begin(), entries.end());
  return out;
}

int hyper_index(const lgm::CompiledModel& model, const std::string& name) {
  const auto& names = model.graph().hyper.names;
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw Error(ErrorKind::Config, "model lacks hyperparameter '" + name + "'");
  return static_cast<int>(it - names.begin());
}

}  // namespace

SpatialSetup prepare(const WildfireDataset& data, const TwoPartSettings& settings) {
  SpatialSetup s;
  s.training = training_rows(data);
  if (s.training.empty()) {
    throw Error(ErrorKind::EmptyLikelihood, "no records with observed CNT and complete covariates");
  }
  s.ref_lat = reference_latitude(data);
  const std::vector<Point> cells = project_cells(data, s.ref_lat);
  s.fine = build_mesh(cells, settings.fine);
  s.coarse = build_mesh(cells, settings.coarse);
  s.fem_fine = std::make_shared<const FemMatrices<double>>(fem_matrices(s.fine));
  s.fem_coarse = std::make_shared<const FemMatrices<double>>(fem_matrices(s.coarse));
  s.diameter = diameter(cells);
  s.baseline = default_baseline(s.diameter);
  const auto [ymin, ymax] = std::minmax_element(data.year.begin(), data.year.end());
  s.first_year = *ymin;
  s.n_years = *ymax - *ymin + 1;
  s.scaling = standardize_covariates(data, s.training);
  s.sigma_z = nearest_transfer(s.fine, cells, empirical_sigma_hat(data, Target::Z));
  s.sigma_cnt = nearest_transfer(s.fine, cells, empirical_sigma_hat(data, Target::CNT));
  s.sigma_ba = nearest_transfer(s.fine, cells, empirical_sigma_hat(data, Target::BA));
  return s;
}

RecordDesign record_design(const SpatialSetup& setup, const WildfireDataset& data,
                           const std::vector<Eigen::Index>& rows) {
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::MatrixXd raw = raw_design(data);
  Eigen::MatrixXd sub(n, raw.cols());
  std::vector<Point> locs(rows.size());
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::Index i = rows[r];
    if (!data.covariates_complete(i)) {
      throw Error(ErrorKind::Data, "record " + std::to_string(i) + " has missing covariates");
    }
    const int year = data.year[i] - setup.first_year;
    if (year < 0 || year >= setup.n_years) {
      throw Error(ErrorKind::Data, "record " + std::to_string(i) + " lies outside the fitted years");
    }
    sub.row(r) = raw.row(i);
    locs[r] = project_lonlat(data.lon[i], data.lat[i], setup.ref_lat);
  }
  const Eigen::MatrixXd z = setup.scaling.apply(sub);
  RecordDesign d;
  Triplets xt;
  xt.reserve(static_cast<std::size_t>(n * (z.cols() + 1)));
  for (Eigen::Index r = 0; r < n; ++r) {
    xt.emplace_back(static_cast<int>(r), 0, 1.0);
    for (Eigen::Index k = 0; k < z.cols(); ++k) {
      xt.emplace_back(static_cast<int>(r), static_cast<int>(k + 1), z(r, k));
    }
  }
  d.x.resize(n, z.cols() + 1);
  d.x.setFromTriplets(xt.begin(), xt.end());
  d.a_fine = SpMat(projector(setup.fine, locs));
  const auto coarse = projector(setup.coarse, locs);
  const int nv = setup.coarse.num_vertices();
  const SpaceTimeIndex index{nv, kMonths, setup.n_years};
  Triplets st;
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::Index i = rows[r];
    for (decltype(coarse)::InnerIterator it(coarse, r); it; ++it) {
      st.emplace_back(static_cast<int>(r),
                      static_cast<int>(index(static_cast<int>(it.col()), data.month[i] - kFirstMonth,
                                             data.year[i] - setup.first_year)),
                      it.value());
    }
  }
  d.a_spacetime.resize(n, index.size());
  d.a_spacetime.setFromTriplets(st.begin(), st.end());
  return d;
}

lgm::ModelGraph build_occurrence_model(const WildfireDataset& data, const SpatialSetup& setup,
                                       const TwoPartSettings& settings) {
  if (setup.sigma_z.size() != setup.fine.num_vertices()) {
    throw Error(ErrorKind::Config, "occurrence model needs sigma-hat on the fine mesh");
  }
  lgm::ModelGraph g;
  const int w1 = lgm::add_spde_hypers(g.hyper, "W1_Z");
  const int w2 = lgm::add_spacetime_hypers(g.hyper, "W2_Z", settings.matern, settings.ar1);
  const RecordDesign d = record_design(setup, data, setup.training);
  const int beta = g.add_block(lgm::fixed_block("beta_Z", d.x.cols(), lgm::kVaguePrecision,
                                                fixed_labels("Z", setup)));
  const int f1 = g.add_block(lgm::spde_block("W1_Z", setup.fem_fine, setup.sigma_z, setup.baseline, w1));
  const int f2 = g.add_block(
      lgm::spacetime_block("W2_Z", setup.fem_coarse, kMonths, setup.n_years, w2));
  lgm::ObservationGroup z;
  z.name = "Z";
  z.family = lgm::Family::Bernoulli;
  z.y.resize(static_cast<Eigen::Index>(setup.training.size()));
  for (std::size_t r = 0; r < setup.training.size(); ++r) {
    z.y[static_cast<Eigen::Index>(r)] = data.cnt[setup.training[r]] > 0.0 ? 1.0 : 0.0;
  }
  z.terms = standard_terms(d, beta, f1, f2);
  g.groups.push_back(std::move(z));
  g.validate();
  return g;
}

lgm::ModelGraph build_joint_model(const WildfireDataset& data, const SpatialSetup& setup,
                                  const TwoPartSettings& settings) {
  const std::vector<Eigen::Index> rows_ba = rows_where(data, data.ba);
  const std::vector<Eigen::Index> rows_cnt = rows_where(data, data.cnt);
  if (rows_ba.empty() || rows_cnt.empty()) {
    throw Error(ErrorKind::EmptyLikelihood, "joint model needs positive CNT and BA records");
  }
  lgm::ModelGraph g;
  const int prec = lgm::add_vague_hyper(g.hyper, "BA.noise_prec", HyperScale::Log);
  const int w1ba = lgm::add_spde_hypers(g.hyper, "W1_BA");
  const int w2ba = lgm::add_spacetime_hypers(g.hyper, "W2_BA", settings.matern, settings.ar1);
  const int w1cnt = lgm::add_spde_hypers(g.hyper, "W1_CNT");
  const int w2cnt = lgm::add_spacetime_hypers(g.hyper, "W2_CNT", settings.matern, settings.ar1);
  const int alpha = lgm::add_vague_hyper(g.hyper, "alpha", HyperScale::Identity);

  const RecordDesign dba = record_design(setup, data, rows_ba);
  const RecordDesign dcnt = record_design(setup, data, rows_cnt);
  const Eigen::Index p = dba.x.cols();
  const int bba = g.add_block(
      lgm::fixed_block("beta_BA", p, lgm::kVaguePrecision, fixed_labels("BA", setup)));
  const int f1ba =
      g.add_block(lgm::spde_block("W1_BA", setup.fem_fine, setup.sigma_ba, setup.baseline, w1ba));
  const int f2ba = g.add_block(
      lgm::spacetime_block("W2_BA", setup.fem_coarse, kMonths, setup.n_years, w2ba));
  const int bcnt = g.add_block(
      lgm::fixed_block("beta_CNT", p, lgm::kVaguePrecision, fixed_labels("CNT", setup)));
  const int f1cnt = g.add_block(
      lgm::spde_block("W1_CNT", setup.fem_fine, setup.sigma_cnt, setup.baseline, w1cnt));
  const int f2cnt = g.add_block(
      lgm::spacetime_block("W2_CNT", setup.fem_coarse, kMonths, setup.n_years, w2cnt));
  const int shared = g.add_block(lgm::shared_copy_block("alpha.W2_BA", f2ba, alpha));

  lgm::ObservationGroup ba;
  ba.name = "BA";
  ba.family = lgm::Family::Gaussian;
  ba.precision_hyper = prec;
  ba.y.resize(static_cast<Eigen::Index>(rows_ba.size()));
  for (std::size_t r = 0; r < rows_ba.size(); ++r) {
    ba.y[static_cast<Eigen::Index>(r)] = std::log(data.ba[rows_ba[r]]);
  }
  ba.terms = standard_terms(dba, bba, f1ba, f2ba);

  lgm::ObservationGroup cnt;
  cnt.name = "CNT";
  cnt.family = lgm::Family::Poisson;
  cnt.y.resize(static_cast<Eigen::Index>(rows_cnt.size()));
  for (std::size_t r = 0; r < rows_cnt.size(); ++r) {
    cnt.y[static_cast<Eigen::Index>(r)] = data.cnt[rows_cnt[r]] - 1.0;
  }
  cnt.terms = standard_terms(dcnt, bcnt, f1cnt, f2cnt);
  cnt.terms.push_back({shared, dcnt.a_spacetime});

  g.groups.push_back(std::move(ba));
  g.groups.push_back(std::move(cnt));
  g.validate();
  return g;
}

Eigen::VectorXd occurrence_start(const SpatialSetup& setup) {
  Eigen::VectorXd t(6);
  t << 0.0, 0.0, 0.0, std::log(setup.diameter / 5.0), std::log(0.5), rho_to_internal(0.5);
  return t;
}

Eigen::VectorXd joint_start(const SpatialSetup& setup) {
  Eigen::VectorXd t(14);
  const double lr = std::log(setup.diameter / 5.0), ls = std::log(0.5), eta = rho_to_internal(0.5);
  t << 0.0, 0.0, 0.0, 0.0, lr, ls, eta, 0.0, 0.0, 0.0, lr, ls, eta, 0.0;
  return t;
}

lgm::FitResult condition_at(const lgm::CompiledModel& model, const Eigen::VectorXd& theta,
                            const lgm::NewtonSettings& newton) {
  if (theta.size() != model.num_hyper()) {
    throw Error(ErrorKind::DimensionMismatch, "theta length does not match the model");
  }
  lgm::FitResult fit;
  fit.hyper_names = model.graph().hyper.names;
  fit.hyper_scales = model.graph().hyper.scales;
  lgm::LatentMode m;
  fit.log_posterior = lgm::laplace_log_posterior(
      model, {theta.data(), static_cast<std::size_t>(theta.size())}, nullptr, &m, newton);
  if (!std::isfinite(fit.log_posterior)) {
    throw Error(ErrorKind::ParameterRange, "hyperparameters lie outside the model support");
  }
  fit.theta = theta;
  fit.theta_cov = Eigen::MatrixXd::Zero(theta.size(), theta.size());
  fit.evaluations = 1;
  fit.converged = true;
  fit.mode = std::move(m.mode);
  fit.factor = lgm::posterior_factor(model, m);
  fit.latent_sd = fit.factor->marginal_variances().cwiseSqrt();
  lgm::summarize(model, fit);
  return fit;
}

TwoPartFit fit_two_part(const WildfireDataset& data, const TwoPartSettings& settings) {
  TwoPartFit fit;
  fit.setup = prepare(data, settings);
  fit.occurrence_model = std::make_shared<const lgm::CompiledModel>(
      build_occurrence_model(data, fit.setup, settings));
  fit.occurrence =
      lgm::optimize_hyper(*fit.occurrence_model, occurrence_start(fit.setup), settings.optimizer);
  fit.joint_model =
      std::make_shared<const lgm::CompiledModel>(build_joint_model(data, fit.setup, settings));
  fit.joint = lgm::optimize_hyper(*fit.joint_model, joint_start(fit.setup), settings.optimizer);
  return fit;
}

TwoPartFit condition_two_part(const WildfireDataset& data, const TwoPartSettings& settings,
                              const Eigen::VectorXd& theta_occurrence,
                              const Eigen::VectorXd& theta_joint) {
  TwoPartFit fit;
  fit.setup = prepare(data, settings);
  fit.occurrence_model = std::make_shared<const lgm::CompiledModel>(
      build_occurrence_model(data, fit.setup, settings));
  fit.occurrence = condition_at(*fit.occurrence_model, theta_occurrence, settings.optimizer.newton);
  fit.joint_model =
      std::make_shared<const lgm::CompiledModel>(build_joint_model(data, fit.setup, settings));
  fit.joint = condition_at(*fit.joint_model, theta_joint, settings.optimizer.newton);
  return fit;
}

Eigen::VectorXd default_thresholds_cnt() {
  std::vector<double> u;
  for (int k = 0; k <= 10; ++k) u.push_back(k);
  for (int k = 12; k <= 30; k += 2) u.push_back(k);
  for (int k = 40; k <= 100; k += 10) u.push_back(k);
  return Eigen::Map<Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
}

Eigen::VectorXd default_thresholds_ba() {
  std::vector<double> u{0.0, 1.0};
  for (int k = 10; k <= 100; k += 10) u.push_back(k);
  for (double v : {150.0, 200.0, 250.0, 300.0, 400.0, 500.0, 1000.0, 1500.0, 2000.0, 5000.0,
                   1e4, 2e4, 3e4, 4e4, 5e4, 1e5}) {
    u.push_back(v);
  }
  return Eigen::Map<Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
}

void check_thresholds(const Eigen::VectorXd& thresholds) {
  if (thresholds.size() == 0) throw Error(ErrorKind::InvalidThresholds, "no thresholds");
  for (Eigen::Index k = 0; k < thresholds.size(); ++k) {
    if (!std::isfinite(thresholds[k]) || thresholds[k] < 0.0 ||
        (k > 0 && !(thresholds[k] > thresholds[k - 1]))) {
      throw Error(ErrorKind::InvalidThresholds,
                  "thresholds must be finite, nonnegative and strictly ascending");
    }
  }
}

void hurdle_cdf_cnt(double p, double lambda, const Eigen::VectorXd& thresholds, double* out) {
  double prev = 0.0;
  for (Eigen::Index k = 0; k < thresholds.size(); ++k) {
    // CNT - 1 ~ Poisson(lambda) given occurrence, so P(CNT <= u | Z = 1)
    // = P(Poisson <= floor(u) - 1).
    const double m = std::floor(thresholds[k]) - 1.0;
    const double f = m < 0.0 ? 0.0 : boost::math::gamma_q(m + 1.0, lambda);
    const double v = std::min(1.0, (1.0 - p) + p * f);
    prev = std::max(prev, v);
    out[k] = prev;
  }
}

void hurdle_cdf_ba(double p, double mu, double sd, const Eigen::VectorXd& thresholds, double* out) {
  double prev = 0.0;
  for (Eigen::Index k = 0; k < thresholds.size(); ++k) {
    const double u = thresholds[k];
    const double f = u > 0.0 ? 0.5 * std::erfc(-(std::log(u) - mu) / (sd * std::sqrt(2.0))) : 0.0;
    const double v = std::min(1.0, (1.0 - p) + p * f);
    prev = std::max(prev, v);
    out[k] = prev;
  }
}

PredictiveDistribution predictive_distribution(const TwoPartFit& fit, const WildfireDataset& data,
                                               const std::vector<Eigen::Index>& targets,
                                               const Eigen::VectorXd& thresholds_cnt,
                                               const Eigen::VectorXd& thresholds_ba,
                                               std::uint64_t seed, int n_samples) {
  check_thresholds(thresholds_cnt);
  check_thresholds(thresholds_ba);
  if (n_samples < 1) throw Error(ErrorKind::Config, "need at least one predictive draw");
  const Eigen::Index nt = static_cast<Eigen::Index>(targets.size());
  const RecordDesign d = record_design(fit.setup, data, targets);
  const lgm::CompiledModel& om = *fit.occurrence_model;
  const lgm::CompiledModel& jm = *fit.joint_model;
  const double alpha = fit.joint.theta[hyper_index(jm, "alpha")];
  const double noise_sd = std::exp(-0.5 * fit.joint.theta[hyper_index(jm, "BA.noise_prec")]);

  const SpMat dz =
      predictor_matrix(om, {{"beta_Z", &d.x}, {"W1_Z", &d.a_fine}, {"W2_Z", &d.a_spacetime}},
                       {1.0, 1.0, 1.0}, nt);
  const SpMat dba =
      predictor_matrix(jm, {{"beta_BA", &d.x}, {"W1_BA", &d.a_fine}, {"W2_BA", &d.a_spacetime}},
                       {1.0, 1.0, 1.0}, nt);
  const SpMat dcnt = predictor_matrix(jm,
                                      {{"beta_CNT", &d.x},
                                       {"W1_CNT", &d.a_fine},
                                       {"W2_CNT", &d.a_spacetime},
                                       {"W2_BA", &d.a_spacetime}},
                                      {1.0, 1.0, 1.0, alpha}, nt);

  const Eigen::MatrixXd sz = lgm::sample_latent_posterior(fit.occurrence, derive_seed(seed, 0), n_samples);
  const Eigen::MatrixXd sj = lgm::sample_latent_posterior(fit.joint, derive_seed(seed, 1), n_samples);
  const Eigen::MatrixXd ez = dz * sz;
  const Eigen::MatrixXd eba = dba * sj;
  const Eigen::MatrixXd ecnt = dcnt * sj;

  PredictiveDistribution pd;
  pd.targets = targets;
  pd.thresholds_cnt = thresholds_cnt;
  pd.thresholds_ba = thresholds_ba;
  pd.cnt = Eigen::MatrixXd::Zero(nt, thresholds_cnt.size());
  pd.ba = Eigen::MatrixXd::Zero(nt, thresholds_ba.size());
  Eigen::VectorXd row_cnt(thresholds_cnt.size()), row_ba(thresholds_ba.size());
  for (Eigen::Index i = 0; i < nt; ++i) {
    for (int j = 0; j < n_samples; ++j) {
      const double p = logistic(ez(i, j));
      hurdle_cdf_cnt(p, std::exp(ecnt(i, j)), thresholds_cnt, row_cnt.data());
      hurdle_cdf_ba(p, eba(i, j), noise_sd, thresholds_ba, row_ba.data());
      pd.cnt.row(i) += row_cnt.transpose();
      pd.ba.row(i) += row_ba.transpose();
    }
  }
  pd.cnt /= static_cast<double>(n_samples);
  pd.ba /= static_cast<double>(n_samples);
  pd.cnt = pd.cnt.cwiseMin(1.0);
  pd.ba = pd.ba.cwiseMin(1.0);
  return pd;
}

void write_predictions(std::ostream& os, const PredictiveDistribution& pd) {
  char buf[64];
  auto put_list = [&](const char* label, const Eigen::VectorXd& u) {
    os << "# thresholds_" << label;
    for (Eigen::Index k = 0; k < u.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.10g", u[k]);
      os << ',' << buf;
    }
    os << '\n';
  };
  put_list("CNT", pd.thresholds_cnt);
  put_list("BA", pd.thresholds_ba);
  const Eigen::Index width = std::max(pd.thresholds_cnt.size(), pd.thresholds_ba.size());
  os << "target_id,variable";
  for (Eigen::Index k = 0; k < width; ++k) os << ",F" << (k + 1);
  os << '\n';
  for (std::size_t i = 0; i < pd.targets.size(); ++i) {
    for (int v = 0; v < 2; ++v) {
      const Eigen::MatrixXd& m = v == 0 ? pd.cnt : pd.ba;
      os << pd.targets[i] << ',' << (v == 0 ? "CNT" : "BA");
      for (Eigen::Index k = 0; k < m.cols(); ++k) {
        std::snprintf(buf, sizeof buf, "%.12g", m(static_cast<Eigen::Index>(i), k));
        os << ',' << buf;
      }
      os << '\n';
    }
  }
}

PredictiveDistribution read_predictions(std::istream& is) {
  PredictiveDistribution pd;
  std::string line;
  auto parse_list = [](const std::string& s, std::size_t from) {
    std::vector<double> v;
    std::stringstream ss(s.substr(from));
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) v.push_back(std::stod(item));
    }
    return v;
  };
  std::vector<double> ucnt, uba;
  std::vector<std::vector<double>> rows_cnt, rows_ba;
  std::vector<Eigen::Index> targets_ba;
  long long lineno = 0;
  try {
    while (std::getline(is, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (line.rfind("# thresholds_CNT", 0) == 0) {
        ucnt = parse_list(line, 16);
      } else if (line.rfind("# thresholds_BA", 0) == 0) {
        uba = parse_list(line, 15);
      } else if (line[0] == '#' || line.rfind("target_id", 0) == 0) {
        continue;
      } else {
        const std::size_t c1 = line.find(',');
        const std::size_t c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) throw std::invalid_argument("row");
        const Eigen::Index id = std::stoll(line.substr(0, c1));
        const std::string var = line.substr(c1 + 1, c2 - c1 - 1);
        std::vector<double> vals = parse_list(line, c2 + 1);
        if (var == "CNT") {
          pd.targets.push_back(id);
          rows_cnt.push_back(std::move(vals));
        } else if (var == "BA") {
          targets_ba.push_back(id);
          rows_ba.push_back(std::move(vals));
        } else {
          throw std::invalid_argument("variable");
        }
      }
    }
  } catch (const std::exception&) {
    throw Error(ErrorKind::Parse, "prediction file line " + std::to_string(lineno) + ": malformed");
  }
  if (targets_ba != pd.targets) {
    throw Error(ErrorKind::Parse, "prediction file: CNT and BA rows do not pair up");
  }
  pd.thresholds_cnt = Eigen::Map<Eigen::VectorXd>(ucnt.data(), static_cast<Eigen::Index>(ucnt.size()));
  pd.thresholds_ba = Eigen::Map<Eigen::VectorXd>(uba.data(), static_cast<Eigen::Index>(uba.size()));
  auto to_matrix = [&](const std::vector<std::vector<double>>& rows, Eigen::Index width) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), width);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (static_cast<Eigen::Index>(rows[i].size()) != width) {
        throw Error(ErrorKind::Parse, "prediction file: row width differs from the thresholds");
      }
      for (Eigen::Index k = 0; k < width; ++k) m(static_cast<Eigen::Index>(i), k) = rows[i][k];
    }
    return m;
  };
  pd.cnt = to_matrix(rows_cnt, pd.thresholds_cnt.size());
  pd.ba = to_matrix(rows_ba, pd.thresholds_ba.size());
  return pd;
}

}  // namespace firecast::wildfire
