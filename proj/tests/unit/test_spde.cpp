#include "doctest.h"

#include <cmath>
#include <numbers>

#include "firecast/spacetime.hpp"
#include "firecast/spde.hpp"
#include "helpers.hpp"

using namespace firecast;

TEST_CASE("range and kappa") {
  CHECK(range_to_kappa(std::sqrt(8.0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(range_to_kappa(429.0) == doctest::Approx(0.006594).epsilon(1e-4));
  for (double r : {0.1, 3.0, 55.0, 1234.5}) {
    CHECK(std::abs(kappa_to_range(range_to_kappa(r)) - r) <= 1e-12 * r);
  }
  CHECK_THROWS_AS(range_to_kappa(0.0), Error);
  CHECK_THROWS_AS(kappa_to_range(-1.0), Error);
}

TEST_CASE("nominal marginal variance") {
  CHECK(marginal_variance_approx(1.0, 1.0) == doctest::Approx(0.07958).epsilon(1e-4));
  CHECK(marginal_variance_approx(1.0, 2.0) ==
        doctest::Approx(marginal_variance_approx(1.0, 1.0) / 4.0));
  const double kappa = 0.006594;
  const double tau = tau_for_sigma(kappa, 1.99);
  CHECK(tau == doctest::Approx(21.49).epsilon(1e-3));
  CHECK(std::abs(std::sqrt(marginal_variance_approx(kappa, tau)) - 1.99) < 1e-10);
  const MaternBaseline b = default_baseline(500.0);
  CHECK(kappa_to_range(b.kappa0) == doctest::Approx(100.0));
  CHECK(marginal_variance_approx(b.kappa0, b.tau0) == doctest::Approx(1.0));
}

TEST_CASE("stationary precision") {
  const Mesh m = test::structured_mesh(8, 6, 0.5);
  const auto fem = fem_matrices(m);
  const SpMat q = precision_stationary({1.3, 0.7}, fem);
  const Eigen::MatrixXd d = test::dense(q);
  CHECK((d - d.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK_NOTHROW(CholeskyFactor<double>{q});
  // (k^2 C + G) C^-1 (k^2 C + G) written out densely.
  const Eigen::MatrixXd c = test::dense(fem.c), g = test::dense(fem.g);
  const Eigen::MatrixXd k = 1.69 * c + g;
  const Eigen::MatrixXd expect = 0.49 * k * c.inverse() * k;
  CHECK((d - expect).cwiseAbs().maxCoeff() < 1e-12 * expect.cwiseAbs().maxCoeff());
  const Eigen::MatrixXd doubled = test::dense(precision_stationary({1.3, 1.4}, fem));
  CHECK(doubled == 4.0 * d);
  for (double kappa : {1e-2, 0.1, 10.0}) {
    CHECK_NOTHROW(CholeskyFactor<double>{precision_stationary({kappa, 1.0}, fem)});
  }
  CHECK_THROWS_AS(precision_stationary({0.0, 1.0}, fem), Error);
}

TEST_CASE("non-stationary precision") {
  const Mesh m = test::structured_mesh(7, 5, 1.0);
  const auto fem = fem_matrices(m);
  Eigen::VectorXd sigma = Eigen::VectorXd::LinSpaced(m.num_vertices(), 0.0, 0.6);

  NonStationaryTheta theta{0.4, -0.2, 0.0, 0.8, 1.1, sigma};
  const double kappa = std::exp(std::log(1.1) - 0.4 - 0.2);
  const double tau = std::exp(std::log(0.8) + 0.4 - 0.2);
  const Eigen::MatrixXd ns = test::dense(precision_nonstationary(theta, fem));
  const Eigen::MatrixXd st = test::dense(precision_stationary({kappa, tau}, fem));
  CHECK((ns - st).cwiseAbs().maxCoeff() <= 1e-12 * st.cwiseAbs().maxCoeff());

  NonStationaryTheta table{2.07, -1.73, 0.073, 0.8, 1.1,
                           Eigen::VectorXd::Ones(m.num_vertices())};
  const Eigen::VectorXd lt = log_tau_field(table);
  CHECK((lt.array() - std::log(0.8) - 0.267).abs().maxCoeff() < 1e-12);

  // Only the values depend on theta.
  theta.theta3 = 0.9;
  const SpMat a = precision_nonstationary(theta, fem);
  theta.theta1 = -1.0;
  const SpMat b = precision_nonstationary(theta, fem);
  CHECK(same_pattern(a, b));

  theta.sigma_hat.resize(3);
  CHECK_THROWS_AS(precision_nonstationary(theta, fem), Error);
  NonStationaryTheta wild{40.0, 0.0, 0.0, 1.0, 1.0, sigma};
  CHECK_THROWS_AS(precision_nonstationary(wild, fem), Error);
}

TEST_CASE("non-stationary variance ratio by sampling") {
  // sigma_hat is 0 on the left and 2 on the right; theta3 = 0.1 gives a
  // nominal variance ratio exp(4 theta3) between the halves.
  const Mesh m = test::structured_mesh(50, 25, 0.2);
  const auto fem = fem_matrices(m);
  Eigen::VectorXd sigma(m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v) sigma[v] = m.vertices[v].x < 5.0 ? 0.0 : 2.0;
  const double kappa = 2.0;
  const NonStationaryTheta theta{0.0, 0.0, 0.1, tau_for_sigma(kappa, 1.0), kappa, sigma};
  const CholeskyFactor<double> f(precision_nonstationary(theta, fem));
  const Eigen::MatrixXd s = f.sample(Eigen::VectorXd::Zero(f.size()), 3, 2000);
  double left = 0.0, right = 0.0;
  int nl = 0, nr = 0;
  for (int v = 0; v < m.num_vertices(); ++v) {
    const Point& p = m.vertices[v];
    if (p.y < 1.5 || p.y > 3.5) continue;
    const double var = s.row(v).squaredNorm() / s.cols();
    if (p.x > 1.5 && p.x < 3.0) {
      left += var;
      ++nl;
    } else if (p.x > 7.0 && p.x < 8.5) {
      right += var;
      ++nr;
    }
  }
  const double ratio = (right / nr) / (left / nl);
  CHECK(ratio == doctest::Approx(std::exp(0.4)).epsilon(0.15));
}

TEST_CASE("nearest-location transfer") {
  const Mesh m = test::structured_mesh(2, 1, 1.0);
  const std::vector<Point> locs{{0.1, 0.1}, {1.9, 0.9}};
  const Eigen::VectorXd v = nearest_transfer(m, locs, Eigen::Vector2d(5.0, 7.0));
  CHECK(v[0] == 5.0);
  CHECK(v[m.num_vertices() - 1] == 7.0);
  CHECK_THROWS_AS(nearest_transfer(m, locs, Eigen::VectorXd::Zero(3)), Error);
}

TEST_CASE("AR(1) precision") {
  CHECK(test::dense(ar1_precision(0.0, 4)) == Eigen::MatrixXd::Identity(4, 4));
  Eigen::Matrix2d expect;
  expect << 4.0 / 3.0, -2.0 / 3.0, -2.0 / 3.0, 4.0 / 3.0;
  CHECK((test::dense(ar1_precision(0.5, 2)) - expect).cwiseAbs().maxCoeff() < 1e-14);

  const Eigen::MatrixXd cov = test::dense(ar1_precision(0.851, 7)).inverse();
  CHECK((cov.diagonal().array() - 1.0).abs().maxCoeff() < 1e-10);
  CHECK(cov(0, 1) == doctest::Approx(0.851).epsilon(1e-10));
  CHECK(cov(0, 6) == doctest::Approx(std::pow(0.851, 6)).epsilon(1e-10));
  for (double rho : {-0.7, 0.0, 0.3, 0.95}) {
    const double ld = std::log(test::dense(ar1_precision(rho, 7)).determinant());
    CHECK(ar1_log_det(rho, 7) == doctest::Approx(ld).epsilon(1e-10));
  }
  CHECK_THROWS_AS(ar1_precision(1.0, 3), Error);
  CHECK_THROWS_AS(ar1_log_det(-1.2, 3), Error);
}

TEST_CASE("space-time precision") {
  const Mesh m = test::structured_mesh(1, 1, 1.0);
  // Three of the four vertices: a single triangle.
  Mesh tri;
  tri.vertices = {m.vertices[0], m.vertices[1], m.vertices[3]};
  tri.triangles = {{0, 1, 2}};
  tri.boundary = {1, 1, 1};
  const auto fem = fem_matrices(tri);
  const SpMat qs = unit_variance_spatial(2.0, fem);
  const Eigen::MatrixXd cs = test::dense(qs).inverse();

  const SpMat q = spacetime_precision({0.851, 2, 1}, qs);
  const Eigen::MatrixXd c = test::dense(q).inverse();
  const SpaceTimeIndex idx{3, 2, 1};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(c(idx(i, 0, 0), idx(j, 1, 0)) == doctest::Approx(0.851 * cs(i, j)).epsilon(1e-10));
      CHECK(c(idx(i, 1, 0), idx(j, 1, 0)) == doctest::Approx(cs(i, j)).epsilon(1e-10));
    }
  }

  const SpMat two = spacetime_precision({0.4, 3, 2}, qs);
  const Eigen::MatrixXd d = test::dense(two);
  CHECK(d.topLeftCorner(9, 9) == d.bottomRightCorner(9, 9));
  CHECK(d.topRightCorner(9, 9).isZero());

  const Eigen::MatrixXd flat = test::dense(spacetime_precision({0.0, 2, 1}, qs));
  CHECK(flat.topRightCorner(3, 3).isZero());
  const Eigen::MatrixXd single = test::dense(spacetime_precision({0.6, 1, 2}, qs));
  CHECK(single == test::dense(block_diagonal<double>({qs, qs})));

  // Month- and year-invariant marginal variances.
  const Eigen::VectorXd var = CholeskyFactor<double>(spacetime_precision({0.7, 7, 2}, qs))
                                  .marginal_variances();
  const SpaceTimeIndex big{3, 7, 2};
  for (int r = 0; r < 2; ++r) {
    for (int t = 0; t < 7; ++t) {
      for (int i = 0; i < 3; ++i) CHECK(std::abs(var[big(i, t, r)] - cs(i, i)) < 1e-8);
    }
  }

  CHECK_THROWS_AS(spacetime_precision({0.5, 0, 1}, qs), Error);
  CHECK_THROWS_AS(spacetime_precision({0.5, 7, 1000000}, qs), Error);
}
