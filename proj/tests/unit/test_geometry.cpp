#include "doctest.h"

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "firecast/geometry.hpp"
#include "helpers.hpp"

using namespace firecast;

TEST_CASE("projection to km") {
  const Point o = project_lonlat(0.0, 0.0, 0.0);
  CHECK(o.x == doctest::Approx(0.0));
  CHECK(o.y == doctest::Approx(0.0));
  const Point e = project_lonlat(1.0, 0.0, 0.0);
  CHECK(e.x == doctest::Approx(111.32).epsilon(1e-12));
  CHECK(e.y == doctest::Approx(0.0));
  const Point us = project_lonlat(-100.0, 40.0, 38.0);
  CHECK(us.x == doctest::Approx(-8772.6).epsilon(1e-4));
  CHECK_THROWS_AS(project_lonlat(0.0, 95.0, 0.0), Error);
}

TEST_CASE("unit square without buffer gives two triangles") {
  const std::vector<Point> corners{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  MeshSettings s;
  s.max_edge_inner = 100.0;
  s.max_edge_outer = 100.0;
  s.buffer = 0.0;
  const Mesh m = build_mesh(corners, s);
  CHECK(m.num_vertices() == 4);
  CHECK(m.num_triangles() == 2);
  CHECK(m.area() == doctest::Approx(1.0));
  validate(m);

  s.buffer = 0.5;
  const Mesh ringed = build_mesh(corners, s);
  CHECK(ringed.num_vertices() > 4);
  const Mesh again = build_mesh(corners, s);
  CHECK(again.vertices == ringed.vertices);
  CHECK(again.triangles == ringed.triangles);
}

TEST_CASE("refinement bounds edge lengths and keeps data covered") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::vector<Point> pts;
  for (int i = 0; i < 60; ++i) pts.push_back({u(rng), 0.6 * u(rng)});
  MeshSettings s{12.0, 30.0, 25.0, 0.0, 100000};
  const Mesh m = build_mesh(pts, s);
  validate(m);
  const auto hull = convex_hull(pts);
  double inner = 0.0;
  for (const Triangle& t : m.triangles) {
    for (int k = 0; k < 3; ++k) {
      const Point& a = m.vertices[t[k]];
      const Point& b = m.vertices[t[(k + 1) % 3]];
      const Point mid{0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
      const double len = distance(a, b);
      CHECK(len <= s.max_edge_outer + 1e-9);
      if (inside_convex(hull, mid)) inner = std::max(inner, len);
    }
  }
  CHECK(inner <= s.max_edge_inner + 1e-9);
  for (const Point& p : pts) CHECK(locate(m, p) >= 0);
}

TEST_CASE("Delaunay: no vertex strictly inside a circumcircle") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::vector<Point> pts;
  for (int i = 0; i < 40; ++i) pts.push_back({u(rng), u(rng)});
  const Mesh m = build_mesh(pts, {100.0, 100.0, 0.0, 0.0, 1000});
  int violations = 0;
  for (const Triangle& t : m.triangles) {
    const Point& a = m.vertices[t[0]];
    const Point& b = m.vertices[t[1]];
    const Point& c = m.vertices[t[2]];
    Eigen::Matrix3d det;
    for (int v = 0; v < m.num_vertices(); ++v) {
      if (v == t[0] || v == t[1] || v == t[2]) continue;
      const Point& p = m.vertices[v];
      det << a.x - p.x, a.y - p.y, std::pow(a.x - p.x, 2) + std::pow(a.y - p.y, 2),
          b.x - p.x, b.y - p.y, std::pow(b.x - p.x, 2) + std::pow(b.y - p.y, 2),
          c.x - p.x, c.y - p.y, std::pow(c.x - p.x, 2) + std::pow(c.y - p.y, 2);
      if (det.determinant() > 1e-8) ++violations;
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("degenerate input is rejected") {
  const std::vector<Point> line{{0, 0}, {1, 1}, {2, 2}};
  CHECK_THROWS_AS(build_mesh(line, {}), Error);
  const std::vector<Point> two{{0, 0}, {1, 0}};
  CHECK_THROWS_AS(build_mesh(two, {}), Error);
  const std::vector<Point> bad{{0, 0}, {1, 0}, {0, std::nan("")}};
  CHECK_THROWS_AS(build_mesh(bad, {}), Error);
  const std::vector<Point> ok{{0, 0}, {1, 0}, {0, 1}};
  CHECK_THROWS_AS(build_mesh(ok, {10.0, 5.0, 1.0, 0.0, 1000}), Error);
}

TEST_CASE("hull and diameter") {
  const std::vector<Point> pts{{0, 0}, {2, 0}, {1, 1}, {2, 2}, {0, 2}, {1, 0}};
  const auto hull = convex_hull(pts);
  CHECK(hull.size() == 4);
  CHECK(diameter(pts) == doctest::Approx(std::sqrt(8.0)));
  CHECK(inside_convex(hull, {1, 1}));
  CHECK_FALSE(inside_convex(hull, {3, 1}));
}

TEST_CASE("reference triangle FEM matrices") {
  Mesh m;
  m.vertices = {{0, 0}, {1, 0}, {0, 1}};
  m.triangles = {{0, 1, 2}};
  m.boundary = {1, 1, 1};
  const auto fem = fem_matrices(m);
  const Eigen::MatrixXd c(fem.c), g(fem.g);
  CHECK((c - Eigen::MatrixXd::Identity(3, 3) / 6.0).cwiseAbs().maxCoeff() < 1e-15);
  Eigen::Matrix3d expect;
  expect << 2, -1, -1, -1, 1, 0, -1, 0, 1;
  CHECK((g - 0.5 * expect).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("FEM identities on a structured mesh") {
  const Mesh m = test::structured_mesh(20, 20, 1.0);
  const auto fem = fem_matrices(m);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.num_vertices());
  CHECK((fem.g * ones).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(fem.c.diagonal().sum() == doctest::Approx(400.0).epsilon(1e-10));
  // Relabeling the vertices permutes C and G the same way.
  std::vector<int> perm(m.num_vertices());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937 rng(2);
  std::shuffle(perm.begin(), perm.end(), rng);
  Mesh p = m;
  for (int v = 0; v < m.num_vertices(); ++v) p.vertices[perm[v]] = m.vertices[v];
  for (Triangle& t : p.triangles) {
    for (int& v : t) v = perm[v];
  }
  const auto fp = fem_matrices(p);
  const Eigen::MatrixXd g(fem.g), gp(fp.g);
  double err = 0.0;
  for (int i = 0; i < m.num_vertices(); ++i) {
    for (int j = 0; j < m.num_vertices(); ++j) {
      err = std::max(err, std::abs(g(i, j) - gp(perm[i], perm[j])));
    }
  }
  CHECK(err < 1e-14);
}

TEST_CASE("projector: vertices, centroids, linear reproduction, out of domain") {
  const Mesh m = test::structured_mesh(6, 5, 2.0);
  std::vector<Point> locs{m.vertices[7]};
  const Triangle& t = m.triangles[3];
  locs.push_back({(m.vertices[t[0]].x + m.vertices[t[1]].x + m.vertices[t[2]].x) / 3.0,
                  (m.vertices[t[0]].y + m.vertices[t[1]].y + m.vertices[t[2]].y) / 3.0});
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> ux(0.0, 12.0), uy(0.0, 10.0);
  for (int i = 0; i < 50; ++i) locs.push_back({ux(rng), uy(rng)});
  const auto a = projector(m, locs);
  CHECK(a.coeff(0, 7) == doctest::Approx(1.0));
  CHECK(a.row(0).sum() == doctest::Approx(1.0));
  for (int k = 0; k < 3; ++k) CHECK(a.coeff(1, t[k]) == doctest::Approx(1.0 / 3.0));
  Eigen::VectorXd f(m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v) f[v] = 1.5 - 0.3 * m.vertices[v].x + 2.0 * m.vertices[v].y;
  const Eigen::VectorXd at = a * f;
  for (std::size_t i = 0; i < locs.size(); ++i) {
    CHECK(std::abs(at[i] - (1.5 - 0.3 * locs[i].x + 2.0 * locs[i].y)) < 1e-10);
  }
  const std::vector<Point> outside{{1, 1}, {50, 50}};
  try {
    projector(m, outside);
    FAIL("expected out-of-domain");
  } catch (const OutOfDomain& e) {
    CHECK(e.index() == 1);
  }
}

TEST_CASE("mesh text round trip") {
  const Mesh m = test::structured_mesh(3, 2, 1.0);
  std::stringstream ss;
  write_mesh(ss, m);
  const Mesh r = read_mesh(ss);
  CHECK(r.vertices == m.vertices);
  CHECK(r.triangles == m.triangles);
  CHECK(r.boundary == m.boundary);
  std::stringstream broken("3 1\n0 0\n1 0\n");
  CHECK_THROWS_AS(read_mesh(broken), Error);
}

namespace {

// Rough continental-US outline (lon, lat), counter-clockwise from the north-west.
const double kUsOutline[][2] = {
    {-124.7, 48.4}, {-124.1, 46.3}, {-124.5, 42.8}, {-123.8, 39.8}, {-122.4, 37.2}, {-120.6, 34.6},
    {-117.1, 32.5}, {-114.7, 32.7}, {-111.0, 31.3}, {-108.2, 31.3}, {-106.5, 31.8}, {-104.0, 29.5},
    {-101.4, 29.8}, {-99.5, 27.5},  {-97.1, 25.9},  {-97.4, 27.8},  {-94.7, 29.4},  {-90.0, 29.2},
    {-85.0, 29.7},  {-83.0, 29.0},  {-82.6, 27.4},  {-81.0, 25.2},  {-80.0, 26.8},  {-81.4, 30.6},
    {-79.0, 33.5},  {-75.5, 35.3},  {-76.0, 37.0},  {-74.0, 40.5},  {-70.0, 41.7},  {-70.6, 43.0},
    {-67.0, 44.8},  {-68.5, 47.3},  {-71.5, 45.0},  {-76.0, 44.2},  {-79.0, 43.3},  {-82.5, 41.7},
    {-83.5, 46.0},  {-88.0, 48.0},  {-95.2, 49.0},  {-123.0, 49.0}};

bool in_outline(double x, double y) {
  const int n = sizeof kUsOutline / sizeof kUsOutline[0];
  bool in = false;
  for (int i = 0, j = n - 1; i < n; j = i++) {
    const double xi = kUsOutline[i][0], yi = kUsOutline[i][1];
    const double xj = kUsOutline[j][0], yj = kUsOutline[j][1];
    if ((yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi) in = !in;
  }
  return in;
}

}  // namespace

TEST_CASE("continental-US mesh sizes") {
  // Half-degree cell centres inside the outline, as on the competition grid.
  std::vector<Point> cells;
  for (double lon = -124.75; lon < -66.5; lon += 0.5) {
    for (double lat = 25.25; lat < 49.5; lat += 0.5) {
      if (in_outline(lon, lat)) cells.push_back(project_lonlat(lon, lat, 37.0));
    }
  }
  CHECK(cells.size() > 3000);
  const MeshSettings fine{80.0, 200.0, 200.0, 60.0, 200000};
  const MeshSettings coarse{185.0, 450.0, 300.0, 150.0, 200000};
  const int nf = build_mesh(cells, fine).num_vertices();
  const int nc = build_mesh(cells, coarse).num_vertices();
  CHECK(std::abs(nf - 3967) <= 0.15 * 3967);
  CHECK(std::abs(nc - 743) <= 0.15 * 743);
}
