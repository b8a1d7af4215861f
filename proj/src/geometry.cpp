#include "liouville/geometry.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace liouville {

namespace {

constexpr double kPi = std::numbers::pi;

uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<uint64_t>(a) << 32) | static_cast<uint32_t>(b);
}

}  // namespace

double TriangleMesh::total_area() const {
  double s = 0.0;
  for (int t = 0; t < num_triangles(); ++t) s += triangle_area(t);
  return s;
}

double TriangleMesh::loop_length(int loop) const {
  if (loop < 0 || loop >= num_loops()) throw PreconditionError("loop index out of range");
  const auto& cycle = boundary_loops[loop];
  double s = 0.0;
  for (size_t i = 0; i < cycle.size(); ++i) {
    s += dist(vertices[cycle[i]], vertices[cycle[(i + 1) % cycle.size()]]);
  }
  return s;
}

double TriangleMesh::max_edge_length() const {
  double m = 0.0;
  for (const auto& tri : triangles) {
    for (int k = 0; k < 3; ++k) {
      m = std::max(m, dist(vertices[tri[k]], vertices[tri[(k + 1) % 3]]));
    }
  }
  return m;
}

double TriangleMesh::local_edge_length(int v) const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& tri : triangles) {
    for (int k = 0; k < 3; ++k) {
      int a = tri[k], b = tri[(k + 1) % 3];
      if (a == v || b == v) m = std::min(m, dist(vertices[a], vertices[b]));
    }
  }
  return m;
}

int TriangleMesh::nearest_vertex(const Vec2& p, bool boundary_only) const {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int v = 0; v < num_vertices(); ++v) {
    if (boundary_only && !vertex_is_boundary[v]) continue;
    double d = (vertices[v] - p).squared_norm();
    if (d < best_d) {
      best_d = d;
      best = v;
    }
  }
  return best;
}

void TriangleMesh::finalize() {
  const int nv = num_vertices();
  if (nv == 0 || triangles.empty()) throw NumericalError("empty mesh");
  for (int t = 0; t < num_triangles(); ++t) {
    if (!(triangle_area(t) > 0.0)) throw NumericalError("triangle not positively oriented");
  }

  // Edge census; boundary edges keep their in-triangle direction.
  std::unordered_map<uint64_t, int> edge_count;
  std::unordered_map<uint64_t, std::pair<int, int>> edge_dir;
  edge_count.reserve(triangles.size() * 3);
  for (const auto& tri : triangles) {
    for (int k = 0; k < 3; ++k) {
      int a = tri[k], b = tri[(k + 1) % 3];
      if (a == b) throw NumericalError("degenerate triangle (repeated vertex)");
      auto key = edge_key(a, b);
      edge_dir[key] = {a, b};
      if (++edge_count[key] > 2) throw NumericalError("edge shared by more than two triangles");
    }
  }

  vertex_is_boundary.assign(nv, 0);
  std::unordered_map<int, int> next;
  for (const auto& [key, cnt] : edge_count) {
    if (cnt != 1) continue;
    auto [a, b] = edge_dir[key];
    vertex_is_boundary[a] = 1;
    vertex_is_boundary[b] = 1;
    if (!next.emplace(a, b).second) throw NumericalError("non-manifold boundary vertex");
  }
  if (next.empty()) throw NumericalError("mesh has no boundary");

  boundary_loops.clear();
  std::unordered_set<int> seen;
  for (const auto& [start, _] : next) {
    if (seen.count(start)) continue;
    std::vector<int> cycle;
    int v = start;
    do {
      cycle.push_back(v);
      seen.insert(v);
      auto it = next.find(v);
      if (it == next.end()) throw NumericalError("open boundary chain");
      v = it->second;
    } while (v != start);
    boundary_loops.push_back(std::move(cycle));
  }
  // Deterministic loop order: longest first.
  std::vector<double> lengths(boundary_loops.size());
  std::vector<int> order(boundary_loops.size());
  for (size_t l = 0; l < boundary_loops.size(); ++l) {
    order[l] = static_cast<int>(l);
    double s = 0.0;
    const auto& c = boundary_loops[l];
    for (size_t i = 0; i < c.size(); ++i) s += dist(vertices[c[i]], vertices[c[(i + 1) % c.size()]]);
    lengths[l] = s;
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (lengths[a] != lengths[b]) return lengths[a] > lengths[b];
    return boundary_loops[a][0] < boundary_loops[b][0];
  });
  std::vector<std::vector<int>> sorted;
  sorted.reserve(boundary_loops.size());
  for (int l : order) sorted.push_back(std::move(boundary_loops[l]));
  boundary_loops = std::move(sorted);
  // Canonical cycle start: smallest vertex index.
  for (auto& c : boundary_loops) {
    auto it = std::min_element(c.begin(), c.end());
    std::rotate(c.begin(), it, c.end());
  }

  boundary_order.clear();
  vertex_to_boundary.assign(nv, -1);
  for (const auto& c : boundary_loops) {
    for (int v : c) {
      vertex_to_boundary[v] = static_cast<int>(boundary_order.size());
      boundary_order.push_back(v);
    }
  }
}

void TriangleMesh::validate() const {
  for (int t = 0; t < num_triangles(); ++t) {
    const auto& tri = triangles[t];
    for (int k = 0; k < 3; ++k) {
      if (tri[k] < 0 || tri[k] >= num_vertices()) throw NumericalError("triangle index out of range");
    }
    if (!(triangle_area(t) > 0.0)) throw NumericalError("triangle not positively oriented");
  }
  std::unordered_map<uint64_t, int> edge_count;
  for (const auto& tri : triangles) {
    for (int k = 0; k < 3; ++k) ++edge_count[edge_key(tri[k], tri[(k + 1) % 3])];
  }
  std::unordered_set<uint64_t> loop_edges;
  std::unordered_set<int> loop_verts;
  for (const auto& c : boundary_loops) {
    for (size_t i = 0; i < c.size(); ++i) {
      loop_edges.insert(edge_key(c[i], c[(i + 1) % c.size()]));
      if (!loop_verts.insert(c[i]).second) throw NumericalError("boundary loops overlap");
    }
  }
  for (const auto& [key, cnt] : edge_count) {
    if (cnt > 2) throw NumericalError("edge shared by more than two triangles");
    if (cnt == 1 && !loop_edges.count(key)) throw NumericalError("boundary edge missing from loops");
    if (cnt == 2 && loop_edges.count(key)) throw NumericalError("interior edge listed as boundary");
  }
  for (int v = 0; v < num_vertices(); ++v) {
    bool on_loop = loop_verts.count(v) > 0;
    if (on_loop != (vertex_is_boundary[v] != 0)) throw NumericalError("vertex flag inconsistent with loops");
  }
}

int euler_characteristic(const TriangleMesh& mesh) {
  std::unordered_set<uint64_t> edges;
  for (const auto& tri : mesh.triangles) {
    for (int k = 0; k < 3; ++k) edges.insert(edge_key(tri[k], tri[(k + 1) % 3]));
  }
  return mesh.num_vertices() - static_cast<int>(edges.size()) + mesh.num_triangles();
}

double integrate(const VertexField& field, const TriangleMesh& mesh) {
  if (field.size() != mesh.num_vertices()) throw PreconditionError("field size does not match mesh");
  double s = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    s += mesh.triangle_area(t) * (field[tri[0]] + field[tri[1]] + field[tri[2]]) / 3.0;
  }
  return s;
}

double boundary_integrate(const BoundaryField& field, const TriangleMesh& mesh, int loop) {
  if (field.size() != mesh.num_boundary_vertices())
    throw PreconditionError("boundary field size does not match mesh");
  if (loop >= mesh.num_loops()) throw PreconditionError("loop index out of range");
  double s = 0.0;
  for (int l = 0; l < mesh.num_loops(); ++l) {
    if (loop >= 0 && l != loop) continue;
    const auto& c = mesh.boundary_loops[l];
    for (size_t i = 0; i < c.size(); ++i) {
      int a = c[i], b = c[(i + 1) % c.size()];
      double len = dist(mesh.vertices[a], mesh.vertices[b]);
      s += 0.5 * len * (field[mesh.vertex_to_boundary[a]] + field[mesh.vertex_to_boundary[b]]);
    }
  }
  return s;
}

Eigen::VectorXd lumped_vertex_areas(const TriangleMesh& mesh) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(mesh.num_vertices());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    double third = mesh.triangle_area(t) / 3.0;
    for (int k = 0; k < 3; ++k) m[mesh.triangles[t][k]] += third;
  }
  return m;
}

Eigen::VectorXd lumped_boundary_lengths(const TriangleMesh& mesh) {
  Eigen::VectorXd mb = Eigen::VectorXd::Zero(mesh.num_boundary_vertices());
  for (const auto& c : mesh.boundary_loops) {
    for (size_t i = 0; i < c.size(); ++i) {
      int a = c[i], b = c[(i + 1) % c.size()];
      double half = 0.5 * dist(mesh.vertices[a], mesh.vertices[b]);
      mb[mesh.vertex_to_boundary[a]] += half;
      mb[mesh.vertex_to_boundary[b]] += half;
    }
  }
  return mb;
}

VertexField lift_boundary_field(const BoundaryField& field, const TriangleMesh& mesh) {
  if (field.size() != mesh.num_boundary_vertices())
    throw PreconditionError("boundary field size does not match mesh");
  VertexField full = VertexField::Zero(mesh.num_vertices());
  for (int i = 0; i < mesh.num_boundary_vertices(); ++i) full[mesh.boundary_order[i]] = field[i];
  return full;
}

BoundaryField restrict_to_boundary(const VertexField& field, const TriangleMesh& mesh) {
  if (field.size() != mesh.num_vertices()) throw PreconditionError("field size does not match mesh");
  BoundaryField b(mesh.num_boundary_vertices());
  for (int i = 0; i < mesh.num_boundary_vertices(); ++i) b[i] = field[mesh.boundary_order[i]];
  return b;
}

TriangleMesh uniform_refine(const TriangleMesh& mesh,
                            const std::function<Vec2(int, const Vec2&)>& project) {
  // Loop id per boundary vertex of the input mesh.
  std::vector<int> vertex_loop(mesh.num_vertices(), -1);
  for (int l = 0; l < mesh.num_loops(); ++l) {
    for (int v : mesh.boundary_loops[l]) vertex_loop[v] = l;
  }
  std::unordered_set<uint64_t> boundary_edges;
  for (const auto& c : mesh.boundary_loops) {
    for (size_t i = 0; i < c.size(); ++i) boundary_edges.insert(edge_key(c[i], c[(i + 1) % c.size()]));
  }

  TriangleMesh out;
  out.vertices = mesh.vertices;
  std::unordered_map<uint64_t, int> midpoint;
  auto mid_vertex = [&](int a, int b) {
    auto key = edge_key(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    Vec2 m = (mesh.vertices[a] + mesh.vertices[b]) * 0.5;
    if (project && boundary_edges.count(key)) m = project(vertex_loop[a], m);
    int idx = static_cast<int>(out.vertices.size());
    out.vertices.push_back(m);
    midpoint.emplace(key, idx);
    return idx;
  };

  out.triangles.reserve(mesh.triangles.size() * 4);
  for (const auto& tri : mesh.triangles) {
    int m01 = mid_vertex(tri[0], tri[1]);
    int m12 = mid_vertex(tri[1], tri[2]);
    int m20 = mid_vertex(tri[2], tri[0]);
    out.triangles.push_back({tri[0], m01, m20});
    out.triangles.push_back({tri[1], m12, m01});
    out.triangles.push_back({tri[2], m20, m12});
    out.triangles.push_back({m01, m12, m20});
  }
  out.finalize();
  return out;
}

namespace {

// Working structure for conforming longest-edge bisection.
struct Bisector {
  std::vector<Vec2>& vertices;
  std::vector<std::array<int, 3>> tris;
  std::vector<char> alive;
  std::vector<int> vertex_loop;  // -1 interior
  std::unordered_map<uint64_t, std::vector<int>> edge_tris;
  const std::function<Vec2(int, const Vec2&)>& project;
  long splits = 0;

  Bisector(TriangleMesh& mesh, const std::function<Vec2(int, const Vec2&)>& proj)
      : vertices(mesh.vertices), tris(mesh.triangles.begin(), mesh.triangles.end()),
        project(proj) {
    alive.assign(tris.size(), 1);
    vertex_loop.assign(vertices.size(), -1);
    for (int l = 0; l < mesh.num_loops(); ++l) {
      for (int v : mesh.boundary_loops[l]) vertex_loop[v] = l;
    }
    for (size_t t = 0; t < tris.size(); ++t) attach(static_cast<int>(t));
  }

  void attach(int t) {
    for (int k = 0; k < 3; ++k) edge_tris[edge_key(tris[t][k], tris[t][(k + 1) % 3])].push_back(t);
  }
  void detach(int t) {
    for (int k = 0; k < 3; ++k) {
      auto& lst = edge_tris[edge_key(tris[t][k], tris[t][(k + 1) % 3])];
      lst.erase(std::remove(lst.begin(), lst.end(), t), lst.end());
    }
  }

  uint64_t longest_edge(int t) const {
    double best = -1.0;
    uint64_t key = 0;
    for (int k = 0; k < 3; ++k) {
      int a = tris[t][k], b = tris[t][(k + 1) % 3];
      double len = dist(vertices[a], vertices[b]);
      uint64_t cand = edge_key(a, b);
      if (len > best || (len == best && cand < key)) {
        best = len;
        key = cand;
      }
    }
    return key;
  }

  int other_triangle(uint64_t key, int t) const {
    auto it = edge_tris.find(key);
    if (it == edge_tris.end()) return -1;
    for (int u : it->second) {
      if (u != t && alive[u]) return u;
    }
    return -1;
  }

  // Splits edge `key` in every triangle that contains it; `key` must be the
  // longest edge of each of them.
  void split_edge(uint64_t key) {
    int a = static_cast<int>(key >> 32);
    int b = static_cast<int>(key & 0xffffffffu);
    auto holders = edge_tris[key];
    Vec2 m = (vertices[a] + vertices[b]) * 0.5;
    int loop = -1;
    bool is_boundary_edge = 0;
    {
      int live = 0;
      for (int u : holders) live += alive[u];
      is_boundary_edge = (live == 1);
    }
    if (is_boundary_edge && project && vertex_loop[a] >= 0 && vertex_loop[a] == vertex_loop[b]) {
      loop = vertex_loop[a];
      m = project(loop, m);
    }
    int mid = static_cast<int>(vertices.size());
    vertices.push_back(m);
    vertex_loop.push_back(is_boundary_edge ? loop : -1);

    for (int t : holders) {
      if (!alive[t]) continue;
      auto tri = tris[t];
      int c = -1;
      for (int k = 0; k < 3; ++k) {
        if (tri[k] != a && tri[k] != b) c = tri[k];
      }
      // Preserve orientation: emit children in the parent's vertex order.
      int ia = -1;
      for (int k = 0; k < 3; ++k) {
        if (tri[k] == a && tri[(k + 1) % 3] == b) ia = k;
        if (tri[k] == b && tri[(k + 1) % 3] == a) ia = k;
      }
      int va = tris[t][ia], vb = tris[t][(ia + 1) % 3];
      detach(t);
      alive[t] = 0;
      tris.push_back({va, mid, c});
      alive.push_back(1);
      attach(static_cast<int>(tris.size()) - 1);
      tris.push_back({mid, vb, c});
      alive.push_back(1);
      attach(static_cast<int>(tris.size()) - 1);
      ++splits;
    }
  }

  // Rivara propagation: split the longest edge of t, refining neighbors first
  // until the shared edge is the longest on both sides.
  void bisect(int t) {
    std::vector<int> stack{t};
    int guard = 0;
    while (!stack.empty()) {
      if (++guard > 1000000) throw NumericalError("longest-edge bisection did not terminate");
      int cur = stack.back();
      if (!alive[cur]) {
        stack.pop_back();
        continue;
      }
      uint64_t e = longest_edge(cur);
      int nb = other_triangle(e, cur);
      if (nb < 0 || longest_edge(nb) == e) {
        split_edge(e);
        stack.pop_back();
      } else {
        stack.push_back(nb);
      }
    }
  }

  void write_back(TriangleMesh& mesh) {
    mesh.triangles.clear();
    for (size_t t = 0; t < tris.size(); ++t) {
      if (alive[t]) mesh.triangles.push_back(tris[t]);
    }
    mesh.finalize();
  }
};

}  // namespace

void refine_toward(TriangleMesh& mesh, const Vec2& p, double h_min, double ratio, double radius,
                   const std::function<Vec2(int, const Vec2&)>& project) {
  if (!(h_min > 0.0) || !(ratio > 0.0)) throw PreconditionError("refine_toward: positive sizes required");
  Bisector bis(mesh, project);
  for (int pass = 0; pass < 200; ++pass) {
    std::vector<int> marked;
    for (size_t t = 0; t < bis.tris.size(); ++t) {
      if (!bis.alive[t]) continue;
      double d = std::numeric_limits<double>::infinity();
      double longest = 0.0;
      for (int k = 0; k < 3; ++k) {
        d = std::min(d, dist(bis.vertices[bis.tris[t][k]], p));
        longest = std::max(longest,
                           dist(bis.vertices[bis.tris[t][k]], bis.vertices[bis.tris[t][(k + 1) % 3]]));
      }
      if (d > radius) continue;
      double target = std::max(h_min, ratio * d);
      if (longest > target) marked.push_back(static_cast<int>(t));
    }
    if (marked.empty()) break;
    for (int t : marked) {
      if (bis.alive[t]) bis.bisect(t);
    }
  }
  bis.write_back(mesh);
}

namespace {

TriangleMesh build_base_disc(double radius, int sectors) {
  TriangleMesh mesh;
  mesh.vertices.push_back({0.0, 0.0});
  for (int i = 0; i < sectors; ++i) {
    double a = 2.0 * kPi * i / sectors;
    mesh.vertices.push_back({0.5 * radius * std::cos(a), 0.5 * radius * std::sin(a)});
  }
  int outer0 = 1 + sectors;
  for (int i = 0; i < 2 * sectors; ++i) {
    double a = 2.0 * kPi * i / (2 * sectors);
    mesh.vertices.push_back({radius * std::cos(a), radius * std::sin(a)});
  }
  for (int i = 0; i < sectors; ++i) {
    mesh.triangles.push_back({0, 1 + i, 1 + (i + 1) % sectors});
  }
  for (int i = 0; i < sectors; ++i) {
    int a0 = 1 + i, a1 = 1 + (i + 1) % sectors;
    int b0 = outer0 + 2 * i, b1 = outer0 + 2 * i + 1, b2 = outer0 + (2 * i + 2) % (2 * sectors);
    mesh.triangles.push_back({a0, b0, b1});
    mesh.triangles.push_back({a0, b1, a1});
    mesh.triangles.push_back({a1, b1, b2});
  }
  mesh.finalize();
  return mesh;
}

TriangleMesh build_base_annulus(double r_in, double r_out, int ring) {
  TriangleMesh mesh;
  double radii[3] = {r_in, 0.5 * (r_in + r_out), r_out};
  for (double r : radii) {
    for (int i = 0; i < ring; ++i) {
      double a = 2.0 * kPi * i / ring;
      mesh.vertices.push_back({r * std::cos(a), r * std::sin(a)});
    }
  }
  for (int band = 0; band < 2; ++band) {
    int lo = band * ring, hi = (band + 1) * ring;
    for (int i = 0; i < ring; ++i) {
      int a0 = lo + i, a1 = lo + (i + 1) % ring;
      int b0 = hi + i, b1 = hi + (i + 1) % ring;
      mesh.triangles.push_back({a0, b0, b1});
      mesh.triangles.push_back({a0, b1, a1});
    }
  }
  mesh.finalize();
  return mesh;
}

int lcm_int(int a, int b) {
  int g = std::gcd(a, b);
  return a / g * b;
}

void snap_and_grade(TriangleMesh& mesh, const MeshBuildOptions& opts,
                    const std::function<Vec2(int, const Vec2&)>& project,
                    const std::function<bool(const Vec2&, int&)>& on_circle) {
  for (const Vec2& p : opts.include_points) {
    int loop = -1;
    bool boundary = on_circle(p, loop);
    int v = mesh.nearest_vertex(p, boundary);
    if (v < 0) throw PreconditionError("include point has no candidate vertex");
    if (boundary != (mesh.vertex_is_boundary[v] != 0))
      throw PreconditionError("include point snapped to wrong vertex class");
    mesh.vertices[v] = p;
  }
  for (const Vec2& p : opts.include_points) {
    int v = mesh.nearest_vertex(p);
    double h_local = mesh.local_edge_length(v);
    double h_min = opts.grade_h_min > 0.0 ? opts.grade_h_min : h_local / 8.0;
    if (h_min >= h_local) continue;
    double radius = std::min(1.0, 64.0 * h_local);
    refine_toward(mesh, p, h_min, opts.grade_ratio, radius, project);
  }
}

}  // namespace

TriangleMesh build_disc_mesh(double radius, int refinement, const MeshBuildOptions& opts) {
  if (!(radius > 0.0)) throw PreconditionError("disc radius must be positive");
  if (refinement < 0) throw PreconditionError("refinement must be >= 0");
  int sectors = lcm_int(6, std::max(1, opts.symmetry_order));
  auto project = [radius](int, const Vec2& m) {
    double n = m.norm();
    return n > 0 ? m * (radius / n) : m;
  };
  TriangleMesh mesh = build_base_disc(radius, sectors);
  for (int l = 0; l < refinement; ++l) mesh = uniform_refine(mesh, project);
  auto on_circle = [radius](const Vec2& p, int& loop) {
    loop = 0;
    return std::abs(p.norm() - radius) < 1e-9 * radius;
  };
  snap_and_grade(mesh, opts, project, on_circle);
  return mesh;
}

TriangleMesh build_annulus_mesh(double r_in, double r_out, int refinement,
                                const MeshBuildOptions& opts) {
  if (!(r_in > 0.0) || !(r_in < r_out)) throw PreconditionError("annulus radii must satisfy 0 < r_in < r_out");
  if (refinement < 0) throw PreconditionError("refinement must be >= 0");
  int ring = lcm_int(12, std::max(1, opts.symmetry_order));
  // Loop 0 is the outer circle (longest), loop 1 the inner one.
  auto project = [r_in, r_out](int loop, const Vec2& m) {
    double target = loop == 0 ? r_out : r_in;
    double n = m.norm();
    return n > 0 ? m * (target / n) : m;
  };
  TriangleMesh mesh = build_base_annulus(r_in, r_out, ring);
  for (int l = 0; l < refinement; ++l) mesh = uniform_refine(mesh, project);
  auto on_circle = [r_in, r_out](const Vec2& p, int& loop) {
    double n = p.norm();
    if (std::abs(n - r_out) < 1e-9 * r_out) {
      loop = 0;
      return true;
    }
    if (std::abs(n - r_in) < 1e-9 * r_out) {
      loop = 1;
      return true;
    }
    loop = -1;
    return false;
  };
  snap_and_grade(mesh, opts, project, on_circle);
  return mesh;
}

TriangleMesh punch_hole(const TriangleMesh& mesh, const Vec2& center, double radius) {
  TriangleMesh out;
  out.vertices = mesh.vertices;
  for (const auto& tri : mesh.triangles) {
    Vec2 c = (mesh.vertices[tri[0]] + mesh.vertices[tri[1]] + mesh.vertices[tri[2]]) * (1.0 / 3.0);
    if (dist(c, center) >= radius) out.triangles.push_back(tri);
  }
  // Drop unused vertices.
  std::vector<int> remap(out.vertices.size(), -1);
  std::vector<Vec2> kept;
  for (auto& tri : out.triangles) {
    for (int& v : tri) {
      if (remap[v] < 0) {
        remap[v] = static_cast<int>(kept.size());
        kept.push_back(out.vertices[v]);
      }
      v = remap[v];
    }
  }
  out.vertices = std::move(kept);
  out.finalize();
  return out;
}

TriangleMesh relabel_vertices(const TriangleMesh& mesh, const std::vector<int>& perm) {
  if (perm.size() != mesh.vertices.size()) throw PreconditionError("permutation size mismatch");
  TriangleMesh out;
  out.vertices.resize(mesh.vertices.size());
  for (int v = 0; v < mesh.num_vertices(); ++v) out.vertices[perm[v]] = mesh.vertices[v];
  out.triangles = mesh.triangles;
  for (auto& tri : out.triangles) {
    for (int& v : tri) v = perm[v];
  }
  out.finalize();
  return out;
}

}  // namespace liouville
