#include "firecast/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace firecast {

namespace {

using Setter = std::function<void(RunConfig&, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Key {
  Setter set;
  Getter get;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw std::invalid_argument(v);
  return out;
}

long long to_integer(const std::string& v) {
  long long out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw std::invalid_argument(v);
  return out;
}

Eigen::VectorXd to_list(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item)));
  return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string list(const Eigen::VectorXd& v) {
  std::string s;
  for (Eigen::Index k = 0; k < v.size(); ++k) s += (k ? "," : "") + num(v[k]);
  return s;
}

template <typename Field>
Key real(Field field) {
  return {[field](RunConfig& c, const std::string& v) { field(c) = to_double(v); },
          [field](const RunConfig& c) { return num(field(const_cast<RunConfig&>(c))); }};
}

template <typename Field>
Key integer(Field field) {
  return {[field](RunConfig& c, const std::string& v) {
            field(c) = static_cast<std::remove_reference_t<decltype(field(c))>>(to_integer(v));
          },
          [field](const RunConfig& c) {
            return std::to_string(field(const_cast<RunConfig&>(c)));
          }};
}

template <typename Field>
Key vector_key(Field field) {
  return {[field](RunConfig& c, const std::string& v) { field(c) = to_list(v); },
          [field](const RunConfig& c) { return list(field(const_cast<RunConfig&>(c))); }};
}

template <typename Field>
Key text(Field field) {
  return {[field](RunConfig& c, const std::string& v) { field(c) = v; },
          [field](const RunConfig& c) { return field(const_cast<RunConfig&>(c)); }};
}

void add_mesh(std::map<std::string, Key>& keys, const std::string& prefix,
              MeshSettings wildfire::TwoPartSettings::*member) {
  keys[prefix + ".max_edge_inner"] = real([member](RunConfig& c) -> double& { return (c.model.*member).max_edge_inner; });
  keys[prefix + ".max_edge_outer"] = real([member](RunConfig& c) -> double& { return (c.model.*member).max_edge_outer; });
  keys[prefix + ".buffer"] = real([member](RunConfig& c) -> double& { return (c.model.*member).buffer; });
  keys[prefix + ".cutoff"] = real([member](RunConfig& c) -> double& { return (c.model.*member).cutoff; });
  keys[prefix + ".max_vertices"] = integer([member](RunConfig& c) -> int& { return (c.model.*member).max_vertices; });
}

void add_predictor(std::map<std::string, Key>& keys, const std::string& prefix,
                   sim::PredictorTruth sim::SimConfig::*member) {
  keys[prefix + ".intercept"] = real([member](RunConfig& c) -> double& { return (c.sim.*member).intercept; });
  keys[prefix + ".theta1"] = real([member](RunConfig& c) -> double& { return (c.sim.*member).theta1; });
  keys[prefix + ".theta2"] = real([member](RunConfig& c) -> double& { return (c.sim.*member).theta2; });
  keys[prefix + ".theta3"] = real([member](RunConfig& c) -> double& { return (c.sim.*member).theta3; });
  keys[prefix + ".range"] = real([member](RunConfig& c) -> double& { return (c.sim.*member).w2.range; });
  keys[prefix + ".sd"] = real([member](RunConfig& c) -> double& { return (c.sim.*member).w2.sd; });
  keys[prefix + ".rho"] = real([member](RunConfig& c) -> double& { return (c.sim.*member).w2.rho; });
  keys[prefix + ".beta"] = {
      [member](RunConfig& c, const std::string& v) {
        const Eigen::VectorXd b = to_list(v);
        (c.sim.*member).beta.assign(b.data(), b.data() + b.size());
      },
      [member](const RunConfig& c) {
        const auto& b = (c.sim.*member).beta;
        return list(Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())));
      }};
}

const std::map<std::string, Key>& key_table() {
  static const std::map<std::string, Key> table = [] {
    std::map<std::string, Key> k;
    add_mesh(k, "mesh.fine", &wildfire::TwoPartSettings::fine);
    add_mesh(k, "mesh.coarse", &wildfire::TwoPartSettings::coarse);
    k["prior.range0"] = real([](RunConfig& c) -> double& { return c.model.matern.range0; });
    k["prior.range_alpha"] = real([](RunConfig& c) -> double& { return c.model.matern.alpha_range; });
    k["prior.variance0"] = {
        [](RunConfig& c, const std::string& v) {
          const double var = to_double(v);
          if (!(var > 0.0)) throw std::invalid_argument(v);
          c.model.matern.sigma0 = std::sqrt(var);
        },
        [](const RunConfig& c) { return num(c.model.matern.sigma0 * c.model.matern.sigma0); }};
    k["prior.variance_alpha"] = real([](RunConfig& c) -> double& { return c.model.matern.alpha_sigma; });
    k["prior.rho_ref"] = {
        [](RunConfig& c, const std::string& v) {
          c.model.ar1 = PcAr1Prior(to_double(v), c.model.ar1.alpha());
        },
        [](const RunConfig& c) { return num(c.model.ar1.rho_ref()); }};
    k["prior.rho_alpha"] = {
        [](RunConfig& c, const std::string& v) {
          c.model.ar1 = PcAr1Prior(c.model.ar1.rho_ref(), to_double(v));
        },
        [](const RunConfig& c) { return num(c.model.ar1.alpha()); }};
    k["optimizer.max_evaluations"] = integer([](RunConfig& c) -> int& { return c.model.optimizer.max_evaluations; });
    k["optimizer.tolerance"] = real([](RunConfig& c) -> double& { return c.model.optimizer.tolerance; });
    k["optimizer.initial_step"] = real([](RunConfig& c) -> double& { return c.model.optimizer.initial_step; });
    k["optimizer.hessian_step"] = real([](RunConfig& c) -> double& { return c.model.optimizer.hessian_step; });
    k["optimizer.polish_steps"] = integer([](RunConfig& c) -> int& { return c.model.optimizer.polish_steps; });
    k["newton.max_iterations"] = integer([](RunConfig& c) -> int& { return c.model.optimizer.newton.max_iterations; });
    k["newton.tolerance"] = real([](RunConfig& c) -> double& { return c.model.optimizer.newton.tolerance; });
    k["thresholds.cnt"] = vector_key([](RunConfig& c) -> Eigen::VectorXd& { return c.thresholds_cnt; });
    k["thresholds.ba"] = vector_key([](RunConfig& c) -> Eigen::VectorXd& { return c.thresholds_ba; });
    k["weights.cnt"] = vector_key([](RunConfig& c) -> Eigen::VectorXd& { return c.weights_cnt; });
    k["weights.ba"] = vector_key([](RunConfig& c) -> Eigen::VectorXd& { return c.weights_ba; });
    k["predict.samples"] = integer([](RunConfig& c) -> int& { return c.samples; });
    k["seed"] = integer([](RunConfig& c) -> std::uint64_t& { return c.seed; });
    k["threads"] = integer([](RunConfig& c) -> int& { return c.threads; });
    k["data"] = text([](RunConfig& c) -> std::string& { return c.data; });
    k["truth"] = text([](RunConfig& c) -> std::string& { return c.truth; });
    k["out"] = text([](RunConfig& c) -> std::string& { return c.out; });
    k["sim.nx"] = integer([](RunConfig& c) -> int& { return c.sim.nx; });
    k["sim.ny"] = integer([](RunConfig& c) -> int& { return c.sim.ny; });
    k["sim.cell_deg"] = real([](RunConfig& c) -> double& { return c.sim.cell_deg; });
    k["sim.lon0"] = real([](RunConfig& c) -> double& { return c.sim.lon0; });
    k["sim.lat0"] = real([](RunConfig& c) -> double& { return c.sim.lat0; });
    k["sim.first_year"] = integer([](RunConfig& c) -> int& { return c.sim.first_year; });
    k["sim.years"] = integer([](RunConfig& c) -> int& { return c.sim.n_years; });
    k["sim.covariates"] = integer([](RunConfig& c) -> int& { return c.sim.n_covariates; });
    k["sim.holdout"] = real([](RunConfig& c) -> double& { return c.sim.holdout; });
    k["sim.alpha"] = real([](RunConfig& c) -> double& { return c.sim.alpha; });
    k["sim.ba_noise_precision"] = real([](RunConfig& c) -> double& { return c.sim.ba_noise_precision; });
    add_predictor(k, "sim.z", &sim::SimConfig::z);
    add_predictor(k, "sim.cnt", &sim::SimConfig::cnt);
    add_predictor(k, "sim.ba", &sim::SimConfig::ba);
    return k;
  }();
  return table;
}

}  // namespace

scoring::ScoreConfig RunConfig::score_cnt() const {
  return weights_cnt.size() ? scoring::ScoreConfig{thresholds_cnt, weights_cnt}
                            : scoring::default_config(thresholds_cnt);
}

scoring::ScoreConfig RunConfig::score_ba() const {
  return weights_ba.size() ? scoring::ScoreConfig{thresholds_ba, weights_ba}
                           : scoring::default_config(thresholds_ba);
}

RunConfig parse_config(std::istream& is) {
  RunConfig c;
  const auto& keys = key_table();
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "config line " + std::to_string(lineno);
    if (eq == std::string::npos) throw Error(ErrorKind::Config, where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = keys.find(key);
    if (it == keys.end()) throw Error(ErrorKind::Config, where + ": unknown key '" + key + "'");
    try {
      it->second.set(c, value);
    } catch (const std::invalid_argument&) {
      throw Error(ErrorKind::Config, where + ": bad value '" + value + "' for " + key);
    } catch (const Error& e) {
      throw Error(ErrorKind::Config, where + ": " + e.what());
    }
  }
  if (c.samples < 1) throw Error(ErrorKind::Config, "predict.samples must be positive");
  if (c.threads < 1) throw Error(ErrorKind::Config, "threads must be positive");
  c.sim.model = c.model;
  c.sim.seed = c.seed;
  c.model.optimizer.threads = c.threads;
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return parse_config(in);
}

void write_config(std::ostream& os, const RunConfig& config) {
  for (const auto& [key, k] : key_table()) os << key << " = " << k.get(config) << '\n';
}

}  // namespace firecast
