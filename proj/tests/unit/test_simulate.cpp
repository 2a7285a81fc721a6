#include "doctest.h"

#include <cmath>
#include <limits>
#include <sstream>

#include "firecast/config.hpp"
#include "firecast/simulate.hpp"

using namespace firecast;

namespace {

sim::SimConfig small() {
  sim::SimConfig c;
  c.nx = 4;
  c.ny = 3;
  c.n_years = 2;
  c.seed = 21;
  return c;
}

std::string csv(const wildfire::WildfireDataset& d) {
  std::ostringstream os;
  wildfire::write_dataset(os, d);
  return os.str();
}

}  // namespace

TEST_CASE("simulation is deterministic in the seed") {
  const sim::SimConfig c = small();
  const sim::SimOutput a = sim::simulate(c);
  const sim::SimOutput b = sim::simulate(c);
  CHECK(csv(a.observed) == csv(b.observed));
  CHECK(csv(a.complete) == csv(b.complete));
  CHECK(a.holdout == b.holdout);
  sim::SimConfig other = c;
  other.seed = 22;
  CHECK(csv(sim::simulate(other).complete) != csv(a.complete));

  const auto& d = a.complete;
  CHECK(d.size() == 4 * 3 * 7 * 2);
  CHECK(d.covariates.cols() == 30);
  CHECK(d.cross_tab.counts[wildfire::Missing][wildfire::Missing] == 0);
  CHECK(a.observed.cross_tab.counts[wildfire::Missing][wildfire::Missing] ==
        static_cast<long long>(a.holdout.size()));
  CHECK(a.holdout.size() == 17);
  for (Eigen::Index i : a.holdout) CHECK(std::isnan(a.observed.cnt[i]));
}

TEST_CASE("degenerate occurrence gives no fires") {
  sim::SimConfig c = small();
  c.z.intercept = -std::numeric_limits<double>::infinity();
  const sim::SimOutput s = sim::simulate(c);
  CHECK(s.complete.cnt.isZero());
  CHECK(s.complete.ba.isZero());
  CHECK(s.probability.isZero());
}

TEST_CASE("zero fraction matches the occurrence probabilities") {
  sim::SimConfig c;
  c.nx = 40;
  c.ny = 36;
  c.cell_deg = 0.25;
  c.n_years = 10;
  c.holdout = 0.0;
  c.seed = 3;
  const sim::SimOutput s = sim::simulate(c);
  const Eigen::Index n = s.complete.size();
  REQUIRE(n >= 100000);
  const double zeros = (s.complete.cnt.array() == 0.0).cast<double>().mean();
  const double expect = 1.0 - s.probability.mean();
  const double se = std::sqrt((s.probability.array() * (1.0 - s.probability.array())).sum()) / n;
  CHECK(std::abs(zeros - expect) < 3.0 * se);
}

TEST_CASE("simulator parameter checks") {
  sim::SimConfig c = small();
  c.cnt.w2.rho = 1.0;
  CHECK_THROWS_AS(sim::simulate(c), Error);
  c = small();
  c.ba_noise_precision = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = small();
  c.z.beta.assign(40, 0.1);
  CHECK_THROWS_AS(c.validate(), Error);
  c = small();
  CHECK(c.theta_occurrence().size() == 6);
  CHECK(c.theta_joint().size() == 14);
  CHECK(c.theta_joint()[13] == 0.7);
}

TEST_CASE("run configuration") {
  std::istringstream in(
      "# comment\n"
      "seed = 7\n"
      "threads = 3   # trailing\n"
      "\n"
      "sim.nx = 6\n"
      "thresholds.cnt = 0, 1, 5\n"
      "weights.cnt = 1,1,2\n"
      "prior.range0 = 80\n"
      "out = /tmp/x\n");
  const RunConfig c = parse_config(in);
  CHECK(c.seed == 7);
  CHECK(c.threads == 3);
  CHECK(c.sim.nx == 6);
  CHECK(c.thresholds_cnt.size() == 3);
  CHECK(c.score_cnt().weights[2] == 2.0);
  CHECK(c.score_ba().weights.size() == 28);
  CHECK(c.model.matern.range0 == 80.0);
  CHECK(c.out == "/tmp/x");

  std::ostringstream os;
  write_config(os, c);
  std::istringstream back(os.str());
  const RunConfig d = parse_config(back);
  std::ostringstream os2;
  write_config(os2, d);
  CHECK(os2.str() == os.str());

  auto error_of = [](const std::string& text) {
    std::istringstream is(text);
    try {
      parse_config(is);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Config);
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(error_of("seed = 1\nbogus = 2\n").find("line 2") != std::string::npos);
  CHECK(error_of("bogus = 2\n").find("bogus") != std::string::npos);
  CHECK(!error_of("seed = abc\n").empty());
  CHECK(!error_of("seed\n").empty());
  CHECK(!error_of("thresholds.cnt = 1,x\n").empty());
  CHECK_THROWS_AS(load_config("/nonexistent/run.cfg"), Error);
}
