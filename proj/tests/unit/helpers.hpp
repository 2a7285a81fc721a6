#pragma once

#include <random>

#include <Eigen/Dense>

#include "firecast/geometry.hpp"
#include "firecast/sparse.hpp"

namespace firecast::test {

// nx x ny squares of side h, each split along its diagonal.
inline Mesh structured_mesh(int nx, int ny, double h, double x0 = 0.0, double y0 = 0.0) {
  Mesh m;
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      m.vertices.push_back({x0 + i * h, y0 + j * h});
      m.boundary.push_back(i == 0 || j == 0 || i == nx || j == ny);
    }
  }
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return m;
}

// Sparse, diagonally dominant SPD matrix.
inline Eigen::MatrixXd random_spd(int n, unsigned seed, double fill = 0.3) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0), keep(0.0, 1.0);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) {
      if (keep(rng) < fill) d(i, j) = d(j, i) = u(rng);
    }
  }
  for (int i = 0; i < n; ++i) d(i, i) = d.row(i).cwiseAbs().sum() + 0.5;
  return d;
}

inline Eigen::MatrixXd dense(const SpMat& m) { return Eigen::MatrixXd(m); }

}  // namespace firecast::test
