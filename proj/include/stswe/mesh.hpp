#pragma once

// Conforming space-time triangulations of a rectangular domain (x,t) with
// tagged boundary edges and newest-vertex bisection refinement.
//
// Meshes are immutable once built: bisect() and uniform_refine() return a new
// mesh and record, per new triangle, the index of the triangle in the input
// mesh it descends from (parent_element). Read-only queries are safe to run
// concurrently.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace stswe {

struct InvalidMeshError : std::runtime_error {
  explicit InvalidMeshError(const std::string& what) : std::runtime_error(what) {}
};

struct Point {
  double x = 0.0;
  double t = 0.0;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  bool nonempty() const { return hi > lo; }
};

enum class BoundaryTag : std::int8_t {
  InitialTime = 0,   // t = t_lo
  FinalTime = 1,     // t = t_hi
  SpatialInflow = 2, // lateral side designated inflow
  SpatialOutflow = 3 // lateral side designated outflow
};

// Vertex triple is counterclockwise; the refinement (base) edge is (v[0],v[1])
// and v[2] is the peak. Bisection inserts the midpoint of the base edge and
// makes it the peak of both children.
struct Triangle {
  std::array<int, 3> v{-1, -1, -1};
};

struct Edge {
  int a = -1, b = -1;                  // vertex ids, a < b
  std::array<int, 2> tri{-1, -1};      // adjacent triangles (tri[1] = -1 on boundary)
};

namespace detail {
inline std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}
} // namespace detail

class SpaceTimeMesh {
public:
  std::vector<Point> vertices;
  std::vector<Triangle> triangles;

  // Derived connectivity, built by finalize().
  std::vector<Edge> edges;
  std::vector<std::array<int, 3>> triangle_edges; // local edge i = (v[i], v[(i+1)%3])
  std::vector<std::int8_t> edge_tag;              // -1 interior, else BoundaryTag

  // Refinement bookkeeping: parent_element[k] = triangle of the *input* mesh
  // this triangle descends from (identity for freshly built meshes).
  std::vector<int> parent_element;
  std::vector<int> generation;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }

  bool is_boundary_edge(int e) const { return edges[e].tri[1] < 0; }
  BoundaryTag boundary_tag(int e) const {
    if (edge_tag[e] < 0) throw std::invalid_argument("boundary_tag: interior edge");
    return static_cast<BoundaryTag>(edge_tag[e]);
  }

  double signed_area(int k) const {
    const Point& p0 = vertices[triangles[k].v[0]];
    const Point& p1 = vertices[triangles[k].v[1]];
    const Point& p2 = vertices[triangles[k].v[2]];
    return 0.5 * ((p1.x - p0.x) * (p2.t - p0.t) - (p2.x - p0.x) * (p1.t - p0.t));
  }

  double total_area() const {
    double a = 0.0;
    for (int k = 0; k < n_triangles(); ++k) a += signed_area(k);
    return a;
  }

  // Builds edge table, checks orientation/conformity/tag coverage.
  void finalize(const std::unordered_map<std::uint64_t, std::int8_t>& tags);
};

struct ElementGeometry {
  double area = 0.0;
  double diameter = 0.0;                  // h_m: longest edge
  std::array<double, 3> edge_length{};
  std::array<Point, 3> edge_normal{};     // outward unit (n_x, n_t), edge i = (v[i], v[i+1])
};

inline ElementGeometry element_geometry(const SpaceTimeMesh& mesh, int k) {
  if (k < 0 || k >= mesh.n_triangles()) throw std::invalid_argument("element_geometry: bad index");
  ElementGeometry g;
  g.area = mesh.signed_area(k);
  const auto& tv = mesh.triangles[k].v;
  double scale2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Point& a = mesh.vertices[tv[i]];
    const Point& b = mesh.vertices[tv[(i + 1) % 3]];
    const double dx = b.x - a.x, dt = b.t - a.t;
    const double len = std::hypot(dx, dt);
    g.edge_length[i] = len;
    scale2 = std::max(scale2, dx * dx + dt * dt);
    // ccw orientation puts the interior to the left of a->b
    g.edge_normal[i] = Point{dt / len, -dx / len};
    g.diameter = std::max(g.diameter, len);
  }
  if (!(g.area > 1e-14 * scale2))
    throw InvalidMeshError("element_geometry: degenerate triangle " + std::to_string(k));
  return g;
}

inline void SpaceTimeMesh::finalize(const std::unordered_map<std::uint64_t, std::int8_t>& tags) {
  edges.clear();
  triangle_edges.assign(triangles.size(), {-1, -1, -1});
  std::unordered_map<std::uint64_t, int> index;
  index.reserve(3 * triangles.size());
  for (int k = 0; k < n_triangles(); ++k) {
    if (!(signed_area(k) > 0.0))
      throw InvalidMeshError("finalize: non-positive area in triangle " + std::to_string(k));
    for (int i = 0; i < 3; ++i) {
      int a = triangles[k].v[i], b = triangles[k].v[(i + 1) % 3];
      const auto key = detail::edge_key(a, b);
      auto it = index.find(key);
      if (it == index.end()) {
        Edge e;
        e.a = std::min(a, b);
        e.b = std::max(a, b);
        e.tri[0] = k;
        index.emplace(key, static_cast<int>(edges.size()));
        triangle_edges[k][i] = static_cast<int>(edges.size());
        edges.push_back(e);
      } else {
        Edge& e = edges[it->second];
        if (e.tri[1] >= 0)
          throw InvalidMeshError("finalize: edge shared by more than two triangles");
        e.tri[1] = k;
        triangle_edges[k][i] = it->second;
      }
    }
  }
  edge_tag.assign(edges.size(), -1);
  for (int e = 0; e < n_edges(); ++e) {
    auto it = tags.find(detail::edge_key(edges[e].a, edges[e].b));
    if (is_boundary_edge(e)) {
      if (it == tags.end())
        throw InvalidMeshError("finalize: untagged boundary edge");
      edge_tag[e] = it->second;
    } else if (it != tags.end()) {
      throw InvalidMeshError("finalize: tag on interior edge");
    }
  }
  if (parent_element.empty()) {
    parent_element.resize(triangles.size());
    for (int k = 0; k < n_triangles(); ++k) parent_element[k] = k;
  }
  if (generation.empty()) generation.assign(triangles.size(), 0);
}

// Crossed rectangular grid: each cell is cut along the lower-left -> upper-right
// diagonal; the diagonal is the refinement edge of both cell triangles (it is
// the longest edge, which makes the initial assignment mutually compatible for
// newest-vertex bisection).
inline SpaceTimeMesh build_structured(Interval x_range, Interval t_range, int nx, int nt,
                                      BoundaryTag left = BoundaryTag::SpatialInflow,
                                      BoundaryTag right = BoundaryTag::SpatialOutflow) {
  if (nx < 1 || nt < 1) throw std::invalid_argument("build_structured: counts must be >= 1");
  if (!x_range.nonempty() || !t_range.nonempty())
    throw std::invalid_argument("build_structured: empty interval");

  SpaceTimeMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(nx + 1) * (nt + 1));
  for (int j = 0; j <= nt; ++j)
    for (int i = 0; i <= nx; ++i) {
      const double x = x_range.lo + (x_range.hi - x_range.lo) * (static_cast<double>(i) / nx);
      const double t = t_range.lo + (t_range.hi - t_range.lo) * (static_cast<double>(j) / nt);
      mesh.vertices.push_back(Point{x, t});
    }
  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };

  mesh.triangles.reserve(static_cast<std::size_t>(2) * nx * nt);
  for (int j = 0; j < nt; ++j)
    for (int i = 0; i < nx; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j);
      const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      mesh.triangles.push_back(Triangle{{v11, v00, v10}}); // base = diagonal, peak lower-right
      mesh.triangles.push_back(Triangle{{v00, v11, v01}}); // base = diagonal, peak upper-left
    }

  std::unordered_map<std::uint64_t, std::int8_t> tags;
  for (int i = 0; i < nx; ++i) {
    tags[detail::edge_key(vid(i, 0), vid(i + 1, 0))] = static_cast<std::int8_t>(BoundaryTag::InitialTime);
    tags[detail::edge_key(vid(i, nt), vid(i + 1, nt))] = static_cast<std::int8_t>(BoundaryTag::FinalTime);
  }
  for (int j = 0; j < nt; ++j) {
    tags[detail::edge_key(vid(0, j), vid(0, j + 1))] = static_cast<std::int8_t>(left);
    tags[detail::edge_key(vid(nx, j), vid(nx, j + 1))] = static_cast<std::int8_t>(right);
  }
  mesh.finalize(tags);
  return mesh;
}

namespace detail {

// Worklist state for newest-vertex bisection with conforming closure.
class Bisector {
public:
  explicit Bisector(const SpaceTimeMesh& mesh) : mesh_(mesh) {
    verts_ = mesh.vertices;
    for (int k = 0; k < mesh.n_triangles(); ++k) {
      tris_.push_back(mesh.triangles[k]);
      origin_.push_back(k);
      gen_.push_back(mesh.generation.empty() ? 0 : mesh.generation[k]);
      alive_.push_back(1);
    }
    for (int e = 0; e < mesh.n_edges(); ++e)
      if (mesh.edge_tag[e] >= 0)
        tags_[edge_key(mesh.edges[e].a, mesh.edges[e].b)] = mesh.edge_tag[e];
    for (int k = 0; k < mesh.n_triangles(); ++k) link(k);
  }

  bool alive(int k) const { return k < static_cast<int>(alive_.size()) && alive_[k]; }

  void bisect(int k) { bisect_impl(k, 0); }

  SpaceTimeMesh take() {
    SpaceTimeMesh out;
    out.vertices = std::move(verts_);
    for (std::size_t k = 0; k < tris_.size(); ++k) {
      if (!alive_[k]) continue;
      out.triangles.push_back(tris_[k]);
      out.parent_element.push_back(origin_[k]);
      out.generation.push_back(gen_[k]);
    }
    out.finalize(tags_);
    return out;
  }

private:
  const SpaceTimeMesh& mesh_;
  std::vector<Point> verts_;
  std::vector<Triangle> tris_;
  std::vector<int> origin_, gen_;
  std::vector<char> alive_;
  std::unordered_map<std::uint64_t, std::array<int, 2>> adjacency_;
  std::unordered_map<std::uint64_t, std::int8_t> tags_;
  std::unordered_map<std::uint64_t, int> midpoint_;

  void link(int k) {
    for (int i = 0; i < 3; ++i) {
      auto key = edge_key(tris_[k].v[i], tris_[k].v[(i + 1) % 3]);
      auto [it, inserted] = adjacency_.try_emplace(key, std::array<int, 2>{-1, -1});
      (void)inserted;
      if (it->second[0] < 0) it->second[0] = k;
      else if (it->second[1] < 0) it->second[1] = k;
      else throw InvalidMeshError("bisect: edge shared by more than two triangles");
    }
  }

  void unlink(int k) {
    for (int i = 0; i < 3; ++i) {
      auto key = edge_key(tris_[k].v[i], tris_[k].v[(i + 1) % 3]);
      auto it = adjacency_.find(key);
      if (it == adjacency_.end()) continue;
      auto& s = it->second;
      if (s[0] == k) {
        s[0] = s[1];
        s[1] = -1;
      } else if (s[1] == k) {
        s[1] = -1;
      }
      if (s[0] < 0) adjacency_.erase(it);
    }
  }

  int neighbor_across_base(int k) const {
    auto key = edge_key(tris_[k].v[0], tris_[k].v[1]);
    auto it = adjacency_.find(key);
    if (it == adjacency_.end()) return -1;
    return it->second[0] == k ? it->second[1] : it->second[0];
  }

  bool base_is(int k, std::uint64_t key) const {
    return edge_key(tris_[k].v[0], tris_[k].v[1]) == key;
  }

  int midpoint(int a, int b) {
    auto key = edge_key(a, b);
    auto it = midpoint_.find(key);
    if (it != midpoint_.end()) return it->second;
    const Point m{0.5 * (verts_[a].x + verts_[b].x), 0.5 * (verts_[a].t + verts_[b].t)};
    const int id = static_cast<int>(verts_.size());
    verts_.push_back(m);
    midpoint_.emplace(key, id);
    auto tag = tags_.find(key);
    if (tag != tags_.end()) { // boundary children inherit the parent's tag
      tags_[edge_key(a, id)] = tag->second;
      tags_[edge_key(id, b)] = tag->second;
      tags_.erase(tag);
    }
    return id;
  }

  // Splits one triangle whose base edge is already compatible.
  void split(int k, int m) {
    const int v0 = tris_[k].v[0], v1 = tris_[k].v[1], v2 = tris_[k].v[2];
    unlink(k);
    alive_[k] = 0;
    const int a = static_cast<int>(tris_.size());
    tris_.push_back(Triangle{{v2, v0, m}});
    origin_.push_back(origin_[k]);
    gen_.push_back(gen_[k] + 1);
    alive_.push_back(1);
    link(a);
    const int b = static_cast<int>(tris_.size());
    tris_.push_back(Triangle{{v1, v2, m}});
    origin_.push_back(origin_[k]);
    gen_.push_back(gen_[k] + 1);
    alive_.push_back(1);
    link(b);
  }

  void bisect_impl(int k, int depth) {
    if (!alive_[k]) return;
    if (depth > static_cast<int>(tris_.size()) + 8)
      throw InvalidMeshError("bisect: closure recursion did not terminate");
    const auto base = edge_key(tris_[k].v[0], tris_[k].v[1]);
    int nb = neighbor_across_base(k);
    if (nb >= 0 && !base_is(nb, base)) {
      bisect_impl(nb, depth + 1); // make the neighbor compatible first
      nb = neighbor_across_base(k);
      if (nb >= 0 && !base_is(nb, base))
        throw InvalidMeshError("bisect: neighbor still incompatible after closure");
    }
    const int m = midpoint(tris_[k].v[0], tris_[k].v[1]);
    split(k, m);
    if (nb >= 0) split(nb, m); // conforming closure across the shared base edge
  }
};

} // namespace detail

// Bisects every marked triangle at least once; closure refinements keep the
// mesh conforming. Indices refer to the input mesh.
inline SpaceTimeMesh bisect(const SpaceTimeMesh& mesh, const std::vector<int>& marked) {
  for (int k : marked)
    if (k < 0 || k >= mesh.n_triangles())
      throw std::invalid_argument("bisect: marked index out of range");
  detail::Bisector b(mesh);
  for (int k : marked)
    if (b.alive(k)) b.bisect(k); // already split by closure counts as bisected
  return b.take();
}

// Two bisection sweeps: every triangle of the input splits into 4 children.
inline SpaceTimeMesh uniform_refine(const SpaceTimeMesh& mesh) {
  std::vector<int> all(mesh.n_triangles());
  for (int k = 0; k < mesh.n_triangles(); ++k) all[k] = k;
  SpaceTimeMesh half = bisect(mesh, all);
  std::vector<int> all2(half.n_triangles());
  for (int k = 0; k < half.n_triangles(); ++k) all2[k] = k;
  SpaceTimeMesh full = bisect(half, all2);
  // compose provenance so parent_element points into the original mesh
  for (int k = 0; k < full.n_triangles(); ++k)
    full.parent_element[k] = half.parent_element[full.parent_element[k]];
  return full;
}

// Containing triangle and reference coordinates of a point; returns the
// triangle with the best barycentric containment (robust on edges/vertices).
struct PointLocation {
  int triangle = -1;
  double xi = 0.0, eta = 0.0;
};

inline PointLocation locate_point(const SpaceTimeMesh& mesh, double x, double t) {
  PointLocation best;
  double best_min = -std::numeric_limits<double>::max();
  for (int k = 0; k < mesh.n_triangles(); ++k) {
    const Point& p0 = mesh.vertices[mesh.triangles[k].v[0]];
    const Point& p1 = mesh.vertices[mesh.triangles[k].v[1]];
    const Point& p2 = mesh.vertices[mesh.triangles[k].v[2]];
    const double j00 = p1.x - p0.x, j01 = p2.x - p0.x;
    const double j10 = p1.t - p0.t, j11 = p2.t - p0.t;
    const double det = j00 * j11 - j01 * j10;
    const double xi = ((x - p0.x) * j11 - (t - p0.t) * j01) / det;
    const double eta = (-(x - p0.x) * j10 + (t - p0.t) * j00) / det;
    const double m = std::min({xi, eta, 1.0 - xi - eta});
    if (m > best_min) {
      best_min = m;
      best = PointLocation{k, xi, eta};
      if (m >= 0.0) break; // strictly inside (or on edge): done
    }
  }
  if (best_min < -1e-8)
    throw std::invalid_argument("locate_point: point outside mesh");
  return best;
}

// Test-grade conformity audit: every interior edge shared by exactly two
// triangles, boundary edges tagged, and no vertex strictly inside any edge.
inline void audit_conformity(const SpaceTimeMesh& mesh) {
  for (int e = 0; e < mesh.n_edges(); ++e) {
    if (mesh.edges[e].tri[0] < 0) throw InvalidMeshError("audit: orphan edge");
    if (mesh.is_boundary_edge(e) && mesh.edge_tag[e] < 0)
      throw InvalidMeshError("audit: untagged boundary edge");
    if (!mesh.is_boundary_edge(e) && mesh.edge_tag[e] >= 0)
      throw InvalidMeshError("audit: tagged interior edge");
  }
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const Point& a = mesh.vertices[mesh.edges[e].a];
    const Point& b = mesh.vertices[mesh.edges[e].b];
    const double len2 = (b.x - a.x) * (b.x - a.x) + (b.t - a.t) * (b.t - a.t);
    for (int v = 0; v < mesh.n_vertices(); ++v) {
      if (v == mesh.edges[e].a || v == mesh.edges[e].b) continue;
      const Point& p = mesh.vertices[v];
      const double cross = (b.x - a.x) * (p.t - a.t) - (b.t - a.t) * (p.x - a.x);
      if (cross * cross > 1e-24 * len2 * len2) continue;
      const double dot = (p.x - a.x) * (b.x - a.x) + (p.t - a.t) * (b.t - a.t);
      if (dot > 1e-12 * len2 && dot < (1.0 - 1e-12) * len2)
        throw InvalidMeshError("audit: hanging node on edge");
    }
  }
}

} // namespace stswe
