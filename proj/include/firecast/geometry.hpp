#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "firecast/errors.hpp"

namespace firecast {

/// Planar location in km (x east, y north).
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Twice the signed area of (a, b, c); positive when counterclockwise.
inline double orient(const Point& a, const Point& b, const Point& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

constexpr double kKmPerDegree = 111.32;

/// Equirectangular projection to km around `ref_lat`.
Point project_lonlat(double lon, double lat, double ref_lat);

using Triangle = std::array<int, 3>;

struct Mesh {
  std::vector<Point> vertices;
  std::vector<Triangle> triangles;  // counterclockwise
  std::vector<std::uint8_t> boundary;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  double triangle_area(int t) const;
  double area() const;
  double max_edge_length() const;
};

struct MeshSettings {
  double max_edge_inner = 50.0;
  double max_edge_outer = 150.0;
  double buffer = 300.0;
  /// Data locations closer than this to an already accepted seed are not
  /// used as vertices. Convex-hull vertices are always kept.
  double cutoff = 0.0;
  int max_vertices = 200000;
};

/// Delaunay triangulation of the data hull extended by a buffer ring, refined
/// by inserting midpoints of over-long edges. Edges whose midpoint lies inside
/// the convex hull of `locations` must not exceed `max_edge_inner`; all others
/// must not exceed `max_edge_outer`. `buffer == 0` disables the ring.
Mesh build_mesh(std::span<const Point> locations, const MeshSettings& settings);

/// Convex hull in counterclockwise order, collinear points dropped.
std::vector<Point> convex_hull(std::span<const Point> points);

bool inside_convex(std::span<const Point> hull, const Point& p, double tol = 1e-9);

/// Largest pairwise distance.
double diameter(std::span<const Point> points);

/// Checks the structural invariants and throws `Error` on violation.
void validate(const Mesh& mesh);

void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);

/// Index of the triangle containing `p` (lowest index on shared edges), or -1.
int locate(const Mesh& mesh, const Point& p, double tol = 1e-10);

/// Barycentric interpolation matrix: one row per location, columns are mesh
/// vertices. Throws `OutOfDomain` naming the first location outside the mesh.
Eigen::SparseMatrix<double, Eigen::RowMajor> projector(
    const Mesh& mesh, std::span<const Point> locations);

/// Lumped-mass finite element matrices of the piecewise-linear basis.
template <typename Scalar>
struct FemMatrices {
  Eigen::SparseMatrix<Scalar> c;   ///< diagonal lumped mass
  Eigen::SparseMatrix<Scalar> g;   ///< stiffness
  Eigen::SparseMatrix<Scalar> g2;  ///< G C^{-1} G
};

template <typename Scalar = double>
FemMatrices<Scalar> fem_matrices(const Mesh& mesh) {
  const int n = mesh.num_vertices();
  std::vector<Eigen::Triplet<Scalar>> mass;
  std::vector<Eigen::Triplet<Scalar>> stiff;
  mass.reserve(3 * mesh.triangles.size());
  stiff.reserve(9 * mesh.triangles.size());
  for (const Triangle& tri : mesh.triangles) {
    const Point& p0 = mesh.vertices[tri[0]];
    const Point& p1 = mesh.vertices[tri[1]];
    const Point& p2 = mesh.vertices[tri[2]];
    const Scalar area = Scalar(0.5) * Scalar(orient(p0, p1, p2));
    // Edge opposite each vertex; grad(phi_i) = rot90(e_i) / (2 area).
    const std::array<Eigen::Matrix<Scalar, 2, 1>, 3> edges = {
        Eigen::Matrix<Scalar, 2, 1>(p2.x - p1.x, p2.y - p1.y),
        Eigen::Matrix<Scalar, 2, 1>(p0.x - p2.x, p0.y - p2.y),
        Eigen::Matrix<Scalar, 2, 1>(p1.x - p0.x, p1.y - p0.y)};
    for (int i = 0; i < 3; ++i) {
      mass.emplace_back(tri[i], tri[i], area / Scalar(3));
      for (int j = 0; j < 3; ++j) {
        stiff.emplace_back(tri[i], tri[j],
                           edges[i].dot(edges[j]) / (Scalar(4) * area));
      }
    }
  }
  FemMatrices<Scalar> fem;
  fem.c.resize(n, n);
  fem.g.resize(n, n);
  fem.c.setFromTriplets(mass.begin(), mass.end());
  fem.g.setFromTriplets(stiff.begin(), stiff.end());
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> c_inv = fem.c.diagonal().cwiseInverse();
  Eigen::SparseMatrix<Scalar> g2 = fem.g * c_inv.asDiagonal() * fem.g;
  // Exact symmetry so downstream precisions are symmetric bit for bit.
  fem.g2 = Eigen::SparseMatrix<Scalar>(g2.transpose()) + g2;
  fem.g2 *= Scalar(0.5);
  return fem;
}

}  // namespace firecast
