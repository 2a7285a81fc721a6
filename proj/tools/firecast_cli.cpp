// firecast: mesh, simulate, fit, predict, score and benchmark from one
// key = value run configuration.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "firecast/config.hpp"

namespace fs = std::filesystem;
using namespace firecast;

namespace {

void log(const std::string& msg) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  localtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%d %H:%M:%S", &tm);
  std::cerr << '[' << stamp << "] " << msg << std::endl;
}

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
};

RunConfig load(const Flags& flags) {
  RunConfig c = flags.config.empty() ? RunConfig{} : load_config(flags.config);
  if (flags.seed) c.seed = *flags.seed;
  if (flags.out) c.out = *flags.out;
  if (flags.threads) {
    c.threads = *flags.threads;
  } else if (const char* env = std::getenv("FIRECAST_THREADS")) {
    try {
      c.threads = std::stoi(env);
    } catch (const std::exception&) {
      throw Error(ErrorKind::Config, std::string("FIRECAST_THREADS is not a number: ") + env);
    }
  }
  if (c.threads < 1) throw Error(ErrorKind::Config, "thread count must be positive");
  c.model.optimizer.threads = c.threads;
  c.sim.model = c.model;
  c.sim.seed = c.seed;
  if (c.data.empty()) c.data = (fs::path(c.out) / "data.csv").string();
  if (c.truth.empty()) c.truth = (fs::path(c.out) / "truth.csv").string();
  return c;
}

std::string in_out(const RunConfig& c, const std::string& name) {
  return (fs::path(c.out) / name).string();
}

std::ofstream create(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) fs::create_directories(parent, ec);
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path);
  return os;
}

std::ifstream open(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot open " + path);
  return is;
}

void finish(std::ofstream& os, const std::string& path) {
  os.close();
  if (!os) throw Error(ErrorKind::Io, "write failed: " + path);
  log("wrote " + path);
}

wildfire::WildfireDataset read_data(const RunConfig& c) {
  log("reading " + c.data);
  wildfire::WildfireDataset data = wildfire::load_and_validate(c.data);
  const auto& t = data.cross_tab;
  log(std::to_string(data.size()) + " records, " +
      std::to_string(t.row_total(wildfire::Missing)) + " with CNT missing");
  return data;
}

// Prediction targets: records with CNT missing and all covariates present.
std::vector<Eigen::Index> targets_of(const wildfire::WildfireDataset& data) {
  std::vector<Eigen::Index> out;
  long long skipped = 0;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    if (!std::isnan(data.cnt[i])) continue;
    if (data.covariates_complete(i)) {
      out.push_back(i);
    } else {
      ++skipped;
    }
  }
  if (skipped) log("skipping " + std::to_string(skipped) + " targets with missing covariates");
  if (out.empty()) throw Error(ErrorKind::Data, "no prediction targets (no record has CNT missing)");
  return out;
}

void run_mesh(const RunConfig& c) {
  const wildfire::WildfireDataset data = read_data(c);
  const wildfire::SpatialSetup setup = wildfire::prepare(data, c.model);
  log("fine mesh " + std::to_string(setup.fine.num_vertices()) + " vertices, coarse mesh " +
      std::to_string(setup.coarse.num_vertices()));
  for (const auto& [name, mesh] : {std::pair{"mesh_fine.txt", &setup.fine},
                                   std::pair{"mesh_coarse.txt", &setup.coarse}}) {
    const std::string path = in_out(c, name);
    auto os = create(path);
    write_mesh(os, *mesh);
    finish(os, path);
  }
}

void run_simulate(const RunConfig& c) {
  log("simulating " + std::to_string(c.sim.nx) + "x" + std::to_string(c.sim.ny) + " cells, " +
      std::to_string(c.sim.n_years) + " years, seed " + std::to_string(c.seed));
  const sim::SimOutput out = sim::simulate(c.sim);
  const std::string data_path = in_out(c, "data.csv"), truth_path = in_out(c, "truth.csv");
  auto d = create(data_path);
  wildfire::write_dataset(d, out.observed);
  finish(d, data_path);
  auto t = create(truth_path);
  wildfire::write_dataset(t, out.complete);
  finish(t, truth_path);
  const std::string theta_path = in_out(c, "true_theta.txt");
  auto th = create(theta_path);
  th << "# occurrence\n" << c.sim.theta_occurrence().transpose() << "\n# joint\n"
     << c.sim.theta_joint().transpose() << '\n';
  finish(th, theta_path);
  log(std::to_string(out.holdout.size()) + " records held out");
}

void write_fit(const RunConfig& c, const std::string& part, const lgm::FitResult& fit) {
  log(part + ": " + std::to_string(fit.evaluations) + " evaluations, log posterior " +
      std::to_string(fit.log_posterior) + (fit.converged ? "" : " (not converged)"));
  const std::string table = in_out(c, "fit_" + part + ".csv");
  auto os = create(table);
  lgm::write_fit_table(os, fit);
  finish(os, table);
  const std::string theta = in_out(c, "theta_" + part + ".txt");
  auto ts = create(theta);
  lgm::write_theta(ts, fit);
  finish(ts, theta);
}

void run_fit(const RunConfig& c) {
  const wildfire::WildfireDataset data = read_data(c);
  log("fitting occurrence and joint models");
  const wildfire::TwoPartFit fit = wildfire::fit_two_part(data, c.model);
  write_fit(c, "occurrence", fit.occurrence);
  write_fit(c, "joint", fit.joint);
}

void write_pd(const std::string& path, const wildfire::PredictiveDistribution& pd) {
  auto os = create(path);
  wildfire::write_predictions(os, pd);
  finish(os, path);
}

void run_predict(const RunConfig& c) {
  const wildfire::WildfireDataset data = read_data(c);
  const auto targets = targets_of(data);
  wildfire::SpatialSetup setup = wildfire::prepare(data, c.model);
  const auto occ_names = lgm::CompiledModel(wildfire::build_occurrence_model(data, setup, c.model))
                             .graph().hyper.names;
  const auto joint_names = lgm::CompiledModel(wildfire::build_joint_model(data, setup, c.model))
                               .graph().hyper.names;
  auto is_occ = open(in_out(c, "theta_occurrence.txt"));
  auto is_joint = open(in_out(c, "theta_joint.txt"));
  const Eigen::VectorXd theta_occ = lgm::read_theta(is_occ, occ_names);
  const Eigen::VectorXd theta_joint = lgm::read_theta(is_joint, joint_names);
  log("conditioning on the stored hyperparameters");
  const wildfire::TwoPartFit fit =
      wildfire::condition_two_part(data, c.model, theta_occ, theta_joint);
  log("drawing " + std::to_string(c.samples) + " samples for " + std::to_string(targets.size()) +
      " targets");
  const auto pd = wildfire::predictive_distribution(fit, data, targets, c.thresholds_cnt,
                                                    c.thresholds_ba, c.seed, c.samples);
  write_pd(in_out(c, "predictions.csv"), pd);
}

scoring::Report score_file(const RunConfig& c, const std::string& predictions,
                           const scoring::Truth& truth) {
  auto is = open(predictions);
  const auto pd = wildfire::read_predictions(is);
  return scoring::evaluate(pd, truth, c.score_cnt(), c.score_ba());
}

void write_score(const std::string& path, const scoring::Report& r) {
  auto os = create(path);
  scoring::write_report(os, r);
  finish(os, path);
}

scoring::Truth read_truth(const RunConfig& c) {
  log("reading truth " + c.truth);
  return scoring::truth_from_dataset(wildfire::load_and_validate(c.truth));
}

void run_score(const RunConfig& c) {
  const scoring::Truth truth = read_truth(c);
  const scoring::Report r = score_file(c, in_out(c, "predictions.csv"), truth);
  write_score(in_out(c, "report.csv"), r);
  log("total score " + std::to_string(r.total()) + " (CNT " + std::to_string(r.total_cnt) +
      ", BA " + std::to_string(r.total_ba) + ")");
}

void run_benchmark(const RunConfig& c) {
  const wildfire::WildfireDataset data = read_data(c);
  const auto targets = targets_of(data);
  log("fitting the GLM benchmark");
  const scoring::BenchmarkFit fit = scoring::benchmark_glm(data, c.model.optimizer);
  write_fit(c, "benchmark_cnt", fit.cnt);
  write_fit(c, "benchmark_ba", fit.ba);
  const auto pd = scoring::benchmark_predictive(fit, data, targets, c.thresholds_cnt,
                                                c.thresholds_ba, c.seed, c.samples);
  const std::string pred = in_out(c, "benchmark_predictions.csv");
  write_pd(pred, pd);
  if (!fs::exists(c.truth)) {
    log("no truth file at " + c.truth + "; skipping scores");
    return;
  }
  const scoring::Truth truth = read_truth(c);
  const scoring::Report bench = score_file(c, pred, truth);
  write_score(in_out(c, "benchmark_report.csv"), bench);
  const std::string two_part = in_out(c, "predictions.csv");
  if (fs::exists(two_part)) {
    scoring::print_comparison(std::cout, "two-part", score_file(c, two_part, truth), "benchmark",
                              bench);
  } else {
    log("benchmark total score " + std::to_string(bench.total()));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-part wildfire forecasting with latent Gaussian models"};
  app.require_subcommand(1, 1);
  Flags flags;
  app.add_option("--config", flags.config, "run configuration (key = value lines)")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", flags.seed, "random seed");
  app.add_option("--out", flags.out, "output directory");
  app.add_option("--threads", flags.threads, "worker threads (default: FIRECAST_THREADS)");

  struct Command {
    const char* name;
    const char* help;
    void (*run)(const RunConfig&);
  };
  const Command commands[] = {
      {"mesh", "build the fine and coarse meshes for the data and write them", run_mesh},
      {"simulate", "draw a synthetic dataset (data.csv with held-out records, truth.csv)",
       run_simulate},
      {"fit", "fit the occurrence and joint models; write hyperparameter tables", run_fit},
      {"predict", "predictive CDFs for records with CNT missing", run_predict},
      {"score", "weighted RPS of predictions.csv against truth.csv", run_score},
      {"benchmark", "GLM benchmark predictions, scores and comparison", run_benchmark},
  };
  void (*chosen)(const RunConfig&) = nullptr;
  for (const Command& cmd : commands) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->fallthrough();
    sub->callback([&chosen, run = cmd.run] { chosen = run; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const RunConfig config = load(flags);
    chosen(config);
  } catch (const Error& e) {
    log(std::string("error [") + std::string(to_string(e.kind())) + "]: " + e.what());
    return 1;
  } catch (const std::exception& e) {
    log(std::string("error: ") + e.what());
    return 1;
  }
  log("done");
  return 0;
}
