#include "firecast/geometry.hpp"

#include <algorithm>
#include <cstdint>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace firecast {

Point project_lonlat(double lon, double lat, double ref_lat) {
  if (!std::isfinite(lon) || !std::isfinite(lat) || !std::isfinite(ref_lat) ||
      std::abs(lat) >= 90.0 || std::abs(ref_lat) >= 90.0) {
    throw Error(ErrorKind::InvalidCoordinate,
                "invalid coordinate (" + std::to_string(lon) + ", " +
                    std::to_string(lat) + ")");
  }
  const double cos_ref = std::cos(ref_lat * std::numbers::pi / 180.0);
  return {kKmPerDegree * cos_ref * lon, kKmPerDegree * lat};
}

double Mesh::triangle_area(int t) const {
  const Triangle& tri = triangles[t];
  return 0.5 * orient(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
}

double Mesh::area() const {
  double total = 0.0;
  for (int t = 0; t < num_triangles(); ++t) total += triangle_area(t);
  return total;
}

double Mesh::max_edge_length() const {
  double longest = 0.0;
  for (const Triangle& tri : triangles) {
    for (int e = 0; e < 3; ++e) {
      longest = std::max(longest,
                         distance(vertices[tri[e]], vertices[tri[(e + 1) % 3]]));
    }
  }
  return longest;
}

std::vector<Point> convex_hull(std::span<const Point> points) {
  std::vector<Point> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(), [](const Point& a, const Point& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.size() < 3) return sorted;

  std::vector<Point> hull(2 * sorted.size());
  std::size_t k = 0;
  for (const Point& p : sorted) {
    while (k >= 2 && orient(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (auto it = sorted.rbegin() + 1; it != sorted.rend(); ++it) {
    while (k >= lower && orient(hull[k - 2], hull[k - 1], *it) <= 0.0) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);
  return hull;
}

bool inside_convex(std::span<const Point> hull, const Point& p, double tol) {
  const std::size_t n = hull.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = hull[i];
    const Point& b = hull[(i + 1) % n];
    const double len = distance(a, b);
    if (orient(a, b, p) < -tol * len * std::max(1.0, len)) return false;
  }
  return true;
}

double diameter(std::span<const Point> points) {
  const std::vector<Point> hull = convex_hull(points);
  double best = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    for (std::size_t j = i + 1; j < hull.size(); ++j) {
      best = std::max(best, distance(hull[i], hull[j]));
    }
  }
  return best;
}

namespace {

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

double in_circle(const Point& a, const Point& b, const Point& c, const Point& p) {
  const double adx = a.x - p.x, ady = a.y - p.y;
  const double bdx = b.x - p.x, bdy = b.y - p.y;
  const double cdx = c.x - p.x, cdy = c.y - p.y;
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return ad * (bdx * cdy - cdx * bdy) - bd * (adx * cdy - cdx * ady) +
         cd * (adx * bdy - bdx * ady);
}

// Incremental Bowyer-Watson triangulation inside a large enclosing triangle
// whose vertices occupy indices 0..2.
class Triangulation {
 public:
  Triangulation(const Point& lo, const Point& hi) {
    const Point center{0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y)};
    const double extent = std::max({hi.x - lo.x, hi.y - lo.y, 1.0});
    const double r = 20.0 * extent;
    points_.push_back({center.x - 2.0 * r, center.y - r});
    points_.push_back({center.x + 2.0 * r, center.y - r});
    points_.push_back({center.x, center.y + 2.0 * r});
    coincide_ = 1e-9 * extent;
    add_face({0, 1, 2});
  }

  const std::vector<Point>& points() const { return points_; }
  int num_points() const { return static_cast<int>(points_.size()); }

  bool has_edge(int a, int b) const {
    return owner_.count(edge_key(a, b)) > 0 || owner_.count(edge_key(b, a)) > 0;
  }

  /// Inserts `p` and returns its vertex index (an existing index when `p`
  /// coincides with a vertex).
  int insert(const Point& p) {
    const int seed = locate(p);
    for (int v : faces_[seed].v) {
      if (distance(points_[v], p) <= coincide_) return v;
    }
    const int pi = num_points();
    points_.push_back(p);

    std::vector<int> cavity{seed};
    std::unordered_set<int> in_cavity{seed};
    for (std::size_t head = 0; head < cavity.size(); ++head) {
      const Triangle& f = faces_[cavity[head]].v;
      for (int e = 0; e < 3; ++e) {
        const int nb = neighbor(f[(e + 1) % 3], f[e]);
        if (nb >= 0 && !in_cavity.count(nb) && circum_contains(nb, p)) {
          in_cavity.insert(nb);
          cavity.push_back(nb);
        }
      }
    }

    // Enlarge the cavity until it is star-shaped with respect to p.
    std::vector<std::array<int, 2>> rim;
    for (bool repaired = true; repaired;) {
      repaired = false;
      rim.clear();
      for (int fi : cavity) {
        const Triangle& f = faces_[fi].v;
        for (int e = 0; e < 3; ++e) {
          const int a = f[e], b = f[(e + 1) % 3];
          const int nb = neighbor(b, a);
          if (nb >= 0 && in_cavity.count(nb)) continue;
          if (orient(points_[a], points_[b], p) <= 0.0 && nb >= 0) {
            in_cavity.insert(nb);
            cavity.push_back(nb);
            repaired = true;
            break;
          }
          rim.push_back({a, b});
        }
        if (repaired) break;
      }
    }

    for (int fi : cavity) remove_face(fi);
    for (const auto& [a, b] : rim) add_face({a, b, pi});
    return pi;
  }

  /// Live triangles with no enclosing-triangle vertex, reindexed from 0.
  std::vector<Triangle> interior_faces() const {
    std::vector<Triangle> out;
    for (const Face& f : faces_) {
      if (!f.alive) continue;
      if (f.v[0] < 3 || f.v[1] < 3 || f.v[2] < 3) continue;
      out.push_back({f.v[0] - 3, f.v[1] - 3, f.v[2] - 3});
    }
    return out;
  }

 private:
  struct Face {
    Triangle v;
    bool alive;
  };

  int neighbor(int a, int b) const {
    auto it = owner_.find(edge_key(a, b));
    return it == owner_.end() ? -1 : it->second;
  }

  bool circum_contains(int fi, const Point& p) const {
    const Triangle& f = faces_[fi].v;
    return in_circle(points_[f[0]], points_[f[1]], points_[f[2]], p) > 0.0;
  }

  bool contains(int fi, const Point& p) const {
    const Triangle& f = faces_[fi].v;
    for (int e = 0; e < 3; ++e) {
      if (orient(points_[f[e]], points_[f[(e + 1) % 3]], p) < 0.0) return false;
    }
    return true;
  }

  int locate(const Point& p) {
    int t = last_;
    if (t < 0 || !faces_[t].alive) {
      for (t = static_cast<int>(faces_.size()) - 1; !faces_[t].alive; --t) {
      }
    }
    const std::size_t max_steps = 4 * faces_.size() + 16;
    for (std::size_t step = 0; step < max_steps; ++step) {
      const Triangle& f = faces_[t].v;
      int next = -1;
      for (int k = 0; k < 3 && next < 0; ++k) {
        const int e = static_cast<int>((step + k) % 3);
        const int a = f[e], b = f[(e + 1) % 3];
        if (orient(points_[a], points_[b], p) < 0.0) next = neighbor(b, a);
      }
      if (next < 0) {
        last_ = t;
        return t;
      }
      t = next;
    }
    for (int fi = 0; fi < static_cast<int>(faces_.size()); ++fi) {
      if (faces_[fi].alive && contains(fi, p)) {
        last_ = fi;
        return fi;
      }
    }
    throw Error(ErrorKind::DegenerateDomain, "point location failed during meshing");
  }

  void add_face(const Triangle& v) {
    const int fi = static_cast<int>(faces_.size());
    faces_.push_back({v, true});
    for (int e = 0; e < 3; ++e) owner_[edge_key(v[e], v[(e + 1) % 3])] = fi;
    last_ = fi;
  }

  void remove_face(int fi) {
    Face& f = faces_[fi];
    f.alive = false;
    for (int e = 0; e < 3; ++e) {
      auto it = owner_.find(edge_key(f.v[e], f.v[(e + 1) % 3]));
      if (it != owner_.end() && it->second == fi) owner_.erase(it);
    }
  }

  std::vector<Point> points_;
  std::vector<Face> faces_;
  std::unordered_map<std::uint64_t, int> owner_;
  int last_ = -1;
  double coincide_ = 0.0;
};

// Greedy thinning: keeps every hull vertex, then each location farther than
// `cutoff` from all previously kept seeds.
std::vector<Point> thin_locations(std::span<const Point> locations,
                                  const std::vector<Point>& hull, double cutoff) {
  std::vector<Point> seeds(hull.begin(), hull.end());
  if (cutoff <= 0.0) {
    seeds.insert(seeds.end(), locations.begin(), locations.end());
    return seeds;
  }
  std::unordered_map<std::uint64_t, std::vector<Point>> grid;
  auto cell_of = [cutoff](const Point& p) {
    return std::array<long long, 2>{static_cast<long long>(std::floor(p.x / cutoff)),
                                    static_cast<long long>(std::floor(p.y / cutoff))};
  };
  auto key = [](long long i, long long j) {
    return (static_cast<std::uint64_t>(i) << 32) ^ static_cast<std::uint32_t>(j);
  };
  auto accept = [&](const Point& p, bool force) {
    const auto c = cell_of(p);
    if (!force) {
      for (long long di = -1; di <= 1; ++di) {
        for (long long dj = -1; dj <= 1; ++dj) {
          auto it = grid.find(key(c[0] + di, c[1] + dj));
          if (it == grid.end()) continue;
          for (const Point& q : it->second) {
            if (distance(p, q) < cutoff) return false;
          }
        }
      }
    }
    grid[key(c[0], c[1])].push_back(p);
    return true;
  };
  for (const Point& p : hull) accept(p, true);
  for (const Point& p : locations) {
    if (accept(p, false)) seeds.push_back(p);
  }
  return seeds;
}

// Outer boundary of hull + disk(buffer), subdivided to at most `max_edge`.
std::vector<Point> buffer_ring(const std::vector<Point>& hull, double buffer,
                               double max_edge) {
  std::vector<Point> ring;
  const std::size_t n = hull.size();
  auto outward = [&](std::size_t i) {
    const Point& a = hull[i];
    const Point& b = hull[(i + 1) % n];
    const double len = distance(a, b);
    return Point{(b.y - a.y) / len, -(b.x - a.x) / len};
  };
  for (std::size_t i = 0; i < n; ++i) {
    const Point& v = hull[i];
    const Point n_in = outward((i + n - 1) % n);
    const Point n_out = outward(i);
    const double a0 = std::atan2(n_in.y, n_in.x);
    double sweep = std::atan2(n_out.y, n_out.x) - a0;
    while (sweep < 0.0) sweep += 2.0 * std::numbers::pi;
    const int arc_steps =
        std::max(1, static_cast<int>(std::ceil(sweep * buffer / max_edge)));
    for (int s = 0; s < arc_steps; ++s) {
      const double ang = a0 + sweep * s / arc_steps;
      ring.push_back({v.x + buffer * std::cos(ang), v.y + buffer * std::sin(ang)});
    }
    const Point start{v.x + buffer * n_out.x, v.y + buffer * n_out.y};
    const Point& w = hull[(i + 1) % n];
    const Point end{w.x + buffer * n_out.x, w.y + buffer * n_out.y};
    const int seg_steps =
        std::max(1, static_cast<int>(std::ceil(distance(start, end) / max_edge)));
    for (int s = 0; s < seg_steps; ++s) {
      const double t = static_cast<double>(s) / seg_steps;
      ring.push_back({start.x + t * (end.x - start.x), start.y + t * (end.y - start.y)});
    }
  }
  return ring;
}

// Closes boundary concavities left where the enclosing triangle cut off thin
// hull triangles, so the mesh covers the convex hull of its vertices.
void fill_pockets(const std::vector<Point>& pts, std::vector<Triangle>& tris,
                  double eps) {
  for (bool changed = true; changed;) {
    changed = false;
    std::unordered_set<std::uint64_t> edges;
    for (const Triangle& t : tris) {
      for (int e = 0; e < 3; ++e) edges.insert(edge_key(t[e], t[(e + 1) % 3]));
    }
    std::unordered_map<int, int> next;
    std::unordered_map<int, int> prev;
    for (const Triangle& t : tris) {
      for (int e = 0; e < 3; ++e) {
        const int a = t[e], b = t[(e + 1) % 3];
        if (!edges.count(edge_key(b, a))) {
          next[a] = b;
          prev[b] = a;
        }
      }
    }
    std::vector<int> boundary;
    for (const auto& [v, w] : next) boundary.push_back(v);
    std::sort(boundary.begin(), boundary.end());
    for (int v : boundary) {
      const int u = prev.at(v);
      const int w = next.at(v);
      if (u == w || orient(pts[u], pts[v], pts[w]) >= -eps) continue;
      bool empty = true;
      for (int q : boundary) {
        if (q == u || q == v || q == w) continue;
        if (orient(pts[u], pts[w], pts[q]) > eps && orient(pts[w], pts[v], pts[q]) > eps &&
            orient(pts[v], pts[u], pts[q]) > eps) {
          empty = false;
          break;
        }
      }
      if (!empty) continue;
      tris.push_back({u, w, v});
      changed = true;
      break;
    }
  }
}

}  // namespace

Mesh build_mesh(std::span<const Point> locations, const MeshSettings& settings) {
  if (!(settings.max_edge_inner > 0.0) ||
      !(settings.max_edge_outer >= settings.max_edge_inner) || settings.buffer < 0.0) {
    throw Error(ErrorKind::Config,
                "mesh settings require 0 < max_edge_inner <= max_edge_outer and buffer >= 0");
  }
  for (std::size_t i = 0; i < locations.size(); ++i) {
    if (!std::isfinite(locations[i].x) || !std::isfinite(locations[i].y)) {
      throw Error(ErrorKind::InvalidCoordinate,
                  "non-finite location at index " + std::to_string(i));
    }
  }
  const std::vector<Point> hull = convex_hull(locations);
  if (hull.size() < 3) {
    throw Error(ErrorKind::DegenerateDomain,
                "mesh requires at least three non-collinear locations");
  }

  std::vector<Point> ring;
  if (settings.buffer > 0.0) {
    ring = buffer_ring(hull, settings.buffer, settings.max_edge_outer);
  }
  const std::vector<Point> seeds = thin_locations(locations, hull, settings.cutoff);

  Point lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  Point hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
  for (const std::vector<Point>* group : std::array<const std::vector<Point>*, 2>{&ring, &seeds}) {
    for (const Point& p : *group) {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
  }
  Triangulation dt(lo, hi);
  for (const Point& p : ring) dt.insert(p);
  for (const Point& p : seeds) dt.insert(p);

  const double slack = 1.0 + 1e-9;
  for (int pass = 0; pass < 200; ++pass) {
    struct LongEdge {
      double length;
      int a, b;
    };
    std::vector<LongEdge> candidates;
    std::unordered_set<std::uint64_t> seen;
    for (const Triangle& t : dt.interior_faces()) {
      for (int e = 0; e < 3; ++e) {
        const int a = std::min(t[e], t[(e + 1) % 3]) + 3;
        const int b = std::max(t[e], t[(e + 1) % 3]) + 3;
        if (!seen.insert(edge_key(a, b)).second) continue;
        const Point& pa = dt.points()[a];
        const Point& pb = dt.points()[b];
        const Point mid{0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)};
        const double limit = inside_convex(hull, mid) ? settings.max_edge_inner
                                                      : settings.max_edge_outer;
        const double len = distance(pa, pb);
        if (len > limit * slack) candidates.push_back({len, a, b});
      }
    }
    if (candidates.empty()) break;
    std::sort(candidates.begin(), candidates.end(), [](const LongEdge& l, const LongEdge& r) {
      if (l.length != r.length) return l.length > r.length;
      return l.a != r.a ? l.a < r.a : l.b < r.b;
    });
    for (const LongEdge& edge : candidates) {
      if (!dt.has_edge(edge.a, edge.b)) continue;
      const Point& pa = dt.points()[edge.a];
      const Point& pb = dt.points()[edge.b];
      dt.insert({0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)});
      if (dt.num_points() - 3 > settings.max_vertices) {
        throw Error(ErrorKind::Size, "mesh exceeds max_vertices = " +
                                         std::to_string(settings.max_vertices));
      }
    }
  }

  Mesh mesh;
  mesh.vertices.assign(dt.points().begin() + 3, dt.points().end());
  mesh.triangles = dt.interior_faces();
  const double extent = std::max(hi.x - lo.x, hi.y - lo.y);
  fill_pockets(mesh.vertices, mesh.triangles, 1e-12 * extent * extent);

  // Drop vertices no triangle references (coincident inserts never add any).
  std::vector<int> remap(mesh.vertices.size(), -1);
  std::vector<Point> used;
  for (Triangle& t : mesh.triangles) {
    for (int& v : t) {
      if (remap[v] < 0) {
        remap[v] = static_cast<int>(used.size());
        used.push_back(mesh.vertices[v]);
      }
    }
  }
  // Keep the original vertex order for reproducible labels.
  std::vector<int> order;
  for (std::size_t v = 0; v < remap.size(); ++v) {
    if (remap[v] >= 0) order.push_back(static_cast<int>(v));
  }
  std::vector<int> relabel(mesh.vertices.size(), -1);
  std::vector<Point> compact;
  for (int v : order) {
    relabel[v] = static_cast<int>(compact.size());
    compact.push_back(mesh.vertices[v]);
  }
  for (Triangle& t : mesh.triangles) {
    for (int& v : t) v = relabel[v];
  }
  mesh.vertices = std::move(compact);

  std::unordered_set<std::uint64_t> edges;
  for (const Triangle& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) edges.insert(edge_key(t[e], t[(e + 1) % 3]));
  }
  mesh.boundary.assign(mesh.vertices.size(), 0);
  for (const Triangle& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      const int a = t[e], b = t[(e + 1) % 3];
      if (!edges.count(edge_key(b, a))) mesh.boundary[a] = mesh.boundary[b] = 1;
    }
  }
  validate(mesh);
  return mesh;
}

void validate(const Mesh& mesh) {
  const int n = mesh.num_vertices();
  if (mesh.boundary.size() != mesh.vertices.size()) {
    throw Error(ErrorKind::DegenerateDomain, "boundary flags do not match vertex count");
  }
  std::unordered_set<std::uint64_t> edges;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (int v : mesh.triangles[t]) {
      if (v < 0 || v >= n) {
        throw Error(ErrorKind::DegenerateDomain,
                    "triangle " + std::to_string(t) + " has an invalid vertex index");
      }
    }
    if (!(mesh.triangle_area(t) > 0.0)) {
      throw Error(ErrorKind::DegenerateDomain,
                  "triangle " + std::to_string(t) + " has non-positive area");
    }
    const Triangle& tri = mesh.triangles[t];
    for (int e = 0; e < 3; ++e) {
      if (!edges.insert(edge_key(tri[e], tri[(e + 1) % 3])).second) {
        throw Error(ErrorKind::DegenerateDomain,
                    "triangles overlap along a duplicated edge at triangle " +
                        std::to_string(t));
      }
    }
  }
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  os << mesh.num_vertices() << ' ' << mesh.num_triangles() << '\n';
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    os << mesh.vertices[v].x << ' ' << mesh.vertices[v].y << ' '
       << static_cast<int>(mesh.boundary[v]) << '\n';
  }
  for (const Triangle& t : mesh.triangles) {
    os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
  os.precision(old);
}

Mesh read_mesh(std::istream& is) {
  long long nv = -1, nt = -1;
  if (!(is >> nv >> nt) || nv < 0 || nt < 0) {
    throw Error(ErrorKind::Parse, "mesh file: bad header");
  }
  Mesh mesh;
  mesh.vertices.resize(nv);
  mesh.boundary.resize(nv);
  for (long long v = 0; v < nv; ++v) {
    int flag = 0;
    if (!(is >> mesh.vertices[v].x >> mesh.vertices[v].y >> flag)) {
      throw Error(ErrorKind::Parse, "mesh file: bad vertex line " + std::to_string(v));
    }
    mesh.boundary[v] = static_cast<std::uint8_t>(flag != 0);
  }
  mesh.triangles.resize(nt);
  for (long long t = 0; t < nt; ++t) {
    Triangle& tri = mesh.triangles[t];
    if (!(is >> tri[0] >> tri[1] >> tri[2])) {
      throw Error(ErrorKind::Parse, "mesh file: bad triangle line " + std::to_string(t));
    }
  }
  validate(mesh);
  return mesh;
}

namespace {

bool barycentric(const Mesh& mesh, int t, const Point& p, double tol,
                 std::array<double, 3>& w) {
  const Triangle& tri = mesh.triangles[t];
  const Point& a = mesh.vertices[tri[0]];
  const Point& b = mesh.vertices[tri[1]];
  const Point& c = mesh.vertices[tri[2]];
  const double total = orient(a, b, c);
  w = {orient(b, c, p) / total, orient(c, a, p) / total, orient(a, b, p) / total};
  return w[0] >= -tol && w[1] >= -tol && w[2] >= -tol;
}

}  // namespace

int locate(const Mesh& mesh, const Point& p, double tol) {
  std::array<double, 3> w;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (barycentric(mesh, t, p, tol, w)) return t;
  }
  return -1;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> projector(const Mesh& mesh,
                                                       std::span<const Point> locations) {
  constexpr double tol = 1e-10;
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(3 * locations.size());
  for (std::size_t i = 0; i < locations.size(); ++i) {
    const int t = locate(mesh, locations[i], tol);
    if (t < 0) throw OutOfDomain(i);
    std::array<double, 3> w;
    barycentric(mesh, t, locations[i], tol, w);
    double sum = 0.0;
    for (double& wk : w) {
      wk = std::clamp(wk, 0.0, 1.0);
      sum += wk;
    }
    for (int k = 0; k < 3; ++k) {
      if (w[k] > 0.0) {
        entries.emplace_back(static_cast<int>(i), mesh.triangles[t][k], w[k] / sum);
      }
    }
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> a(static_cast<int>(locations.size()),
                                                  mesh.num_vertices());
  a.setFromTriplets(entries.begin(), entries.end());
  return a;
}

}  // namespace firecast
