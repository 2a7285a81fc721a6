#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "firecast/scoring.hpp"
#include "firecast/simulate.hpp"

namespace firecast {

/// Everything a CLI run reads from its `key = value` file.
struct RunConfig {
  wildfire::TwoPartSettings model{};
  sim::SimConfig sim{};
  Eigen::VectorXd thresholds_cnt = wildfire::default_thresholds_cnt();
  Eigen::VectorXd thresholds_ba = wildfire::default_thresholds_ba();
  Eigen::VectorXd weights_cnt;  ///< empty: default weights
  Eigen::VectorXd weights_ba;
  int samples = 500;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string data;    ///< input CSV
  std::string truth;   ///< CSV with the held-out values
  std::string out = ".";

  scoring::ScoreConfig score_cnt() const;
  scoring::ScoreConfig score_ba() const;
};

/// Parses `key = value` lines (`#` starts a comment). Unknown keys and
/// malformed values raise a config error naming the line.
RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::string& path);

/// Writes every key with its current value, in parseable form.
void write_config(std::ostream& os, const RunConfig& config);

}  // namespace firecast
