#include "doctest.h"

#include <cmath>
#include <set>
#include <sstream>

#include "firecast/sparse.hpp"
#include "helpers.hpp"

using namespace firecast;

namespace {

SpMat from_dense(const Eigen::MatrixXd& d) { return d.sparseView(); }

}  // namespace

TEST_CASE("cholesky of small hand cases") {
  Eigen::Matrix2d d;
  d << 4, 0, 0, 9;
  const CholeskyFactor<double> f(from_dense(d));
  CHECK(test::dense(f.matrix_l()).diagonal().isApprox(Eigen::Vector2d(2, 3)));
  CHECK(f.log_det() == doctest::Approx(std::log(36.0)).epsilon(1e-14));
  CHECK(f.solve(Eigen::VectorXd(Eigen::Vector2d(8, 27))).isApprox(Eigen::Vector2d(2, 3)));
  CHECK(f.marginal_variances().isApprox(Eigen::Vector2d(0.25, 1.0 / 9.0)));

  Eigen::Matrix2d q;
  q << 4, 2, 2, 3;
  const CholeskyFactor<double> g(from_dense(q), Ordering::Natural);
  Eigen::Matrix2d l;
  l << 2, 0, 1, std::sqrt(2.0);
  CHECK((test::dense(g.matrix_l()) - l).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(g.log_det() == doctest::Approx(std::log(8.0)).epsilon(1e-14));

  Eigen::Matrix2d bad;
  bad << 1, 2, 2, 1;
  CHECK_THROWS_AS(CholeskyFactor<double>(from_dense(bad)), NotPositiveDefinite);

  const CholeskyFactor<double> eye(identity<double>(5));
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(5, -1, 3);
  CHECK(eye.solve(b) == b);
  CHECK(eye.log_det() == 0.0);
}

TEST_CASE("random SPD against dense oracles") {
  for (unsigned seed : {1u, 2u, 3u}) {
    const Eigen::MatrixXd d = test::random_spd(10 + 20 * static_cast<int>(seed), seed);
    const SpMat q = from_dense(d);
    const CholeskyFactor<double> amd(q, Ordering::Amd), nat(q, Ordering::Natural);
    const Eigen::MatrixXd inv = d.inverse();
    const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(d.rows(), -2, 5);
    CHECK((amd.solve(b) - inv * b).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((amd.marginal_variances() - inv.diagonal()).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((amd.marginal_variances().array() > 0.0).all());
    const double ld = std::log(d.determinant());
    CHECK(std::abs(amd.log_det() - ld) < 1e-10 * std::max(1.0, std::abs(ld)));
    CHECK(std::abs(amd.log_det() - nat.log_det()) < 1e-10);
    const Eigen::MatrixXd back = test::dense(amd.reconstruct());
    CHECK((back - d).cwiseAbs().maxCoeff() <= 1e-8 * d.cwiseAbs().maxCoeff());
    const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(d.rows(), 1, 2);
    CHECK((amd.solve(Eigen::VectorXd(q * x)) - x).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("analysis reuse across values of one pattern") {
  const Eigen::MatrixXd d = test::random_spd(25, 9);
  AnalysisCache<double> cache;
  const auto f1 = cache.factorize(from_dense(d));
  const auto f2 = cache.factorize(from_dense(2.0 * d));
  CHECK(f1.analysis() == f2.analysis());
  CHECK(f2.log_det() == doctest::Approx(f1.log_det() + 25 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("GMRF sampling") {
  Eigen::Matrix2d q;
  q << 4, 2, 2, 3;
  const CholeskyFactor<double> f(from_dense(q));
  const Eigen::VectorXd mean = Eigen::Vector2d(1.0, -2.0);
  const int k = 100000;
  const Eigen::MatrixXd s = f.sample(mean, 42, k);
  CHECK(s == f.sample(mean, 42, k));
  const Eigen::VectorXd m = s.rowwise().mean();
  const Eigen::MatrixXd c = s.colwise() - m;
  const Eigen::Matrix2d cov = c * c.transpose() / (k - 1);
  Eigen::Matrix2d expect;
  expect << 3, -2, -2, 4;
  expect /= 8.0;
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(m[i] - mean[i]) < 4.0 * std::sqrt(expect(i, i) / k));
    for (int j = 0; j < 2; ++j) CHECK(std::abs(cov(i, j) - expect(i, j)) < 0.05 * std::abs(expect(i, j)));
  }

  SpMat four(1, 1);
  four.insert(0, 0) = 4.0;
  const Eigen::MatrixXd z = CholeskyFactor<double>(four).sample(Eigen::VectorXd::Zero(1), 7, k);
  const double var = z.squaredNorm() / k;
  CHECK(var == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("kronecker products") {
  Eigen::Matrix2d q;
  q << 2, 1, 1, 2;
  const SpMat i2q = kron(identity<double>(2), from_dense(q));
  Eigen::Matrix4d blocks = Eigen::Matrix4d::Zero();
  blocks.topLeftCorner(2, 2) = q;
  blocks.bottomRightCorner(2, 2) = q;
  CHECK(test::dense(i2q) == blocks);

  Eigen::Matrix2d a;
  a << 1, 0, 0, 2;
  SpMat three(1, 1);
  three.insert(0, 0) = 3.0;
  CHECK(test::dense(kron(from_dense(a), three)) == Eigen::Vector2d(3, 6).asDiagonal().toDenseMatrix());

  Eigen::Matrix2d b;
  b << 1, -1, -1, 1;
  Eigen::Matrix4d expect;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) expect.block(2 * i, 2 * j, 2, 2) = b(i, j) * q;
  }
  CHECK(test::dense(kron(from_dense(b), from_dense(q))) == expect);
}

TEST_CASE("block diagonal and triplet round trip") {
  const Eigen::MatrixXd a = test::random_spd(3, 1), b = test::random_spd(2, 2);
  const SpMat bd = block_diagonal<double>({from_dense(a), from_dense(b)});
  CHECK(bd.rows() == 5);
  CHECK(test::dense(bd).topLeftCorner(3, 3) == a);
  CHECK(test::dense(bd).bottomRightCorner(2, 2) == b);
  CHECK(test::dense(bd).topRightCorner(3, 2).isZero());
  std::stringstream ss;
  write_triplets(ss, bd);
  CHECK(test::dense(read_triplets(ss)) == test::dense(bd));
  std::stringstream bad("2 2 1\n5 0 1.0\n");
  CHECK_THROWS_AS(read_triplets(bad), Error);
}

TEST_CASE("derived seeds are distinct per stream") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 1000; ++s) seen.insert(derive_seed(17, s));
  CHECK(seen.size() == 1000);
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}
