#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "liouville/geometry.hpp"

namespace liouville {

// MESH2D v1: header line, counts line `nv nt nb`, vertex lines `x y flag`,
// triangle lines `i j k`, boundary loop lines `loop_id v0 v1 ...` (cycle).

void write_mesh2d(const TriangleMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open mesh file for writing: " + path);
  out << "MESH2D v1\n";
  out << mesh.num_vertices() << ' ' << mesh.num_triangles() << ' ' << mesh.num_loops() << '\n';
  char buf[64];
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g", mesh.vertices[v].x, mesh.vertices[v].y);
    out << buf << ' ' << (mesh.vertex_is_boundary[v] ? 1 : 0) << '\n';
  }
  for (const auto& tri : mesh.triangles) out << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
  for (int l = 0; l < mesh.num_loops(); ++l) {
    out << l;
    for (int v : mesh.boundary_loops[l]) out << ' ' << v;
    out << '\n';
  }
  if (!out) throw ConfigError("failed writing mesh file: " + path);
}

TriangleMesh read_mesh2d(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mesh file: " + path);
  std::string header;
  std::getline(in, header);
  if (header != "MESH2D v1") throw ConfigError("not a MESH2D v1 file: " + path);
  int nv = 0, nt = 0, nb = 0;
  in >> nv >> nt >> nb;
  if (!in || nv <= 0 || nt <= 0 || nb < 0) throw ConfigError("bad counts line in " + path);

  TriangleMesh mesh;
  mesh.vertices.resize(nv);
  std::vector<char> flags(nv);
  for (int v = 0; v < nv; ++v) {
    int flag = 0;
    in >> mesh.vertices[v].x >> mesh.vertices[v].y >> flag;
    flags[v] = static_cast<char>(flag != 0);
  }
  mesh.triangles.resize(nt);
  for (int t = 0; t < nt; ++t) {
    in >> mesh.triangles[t][0] >> mesh.triangles[t][1] >> mesh.triangles[t][2];
  }
  if (!in) throw ConfigError("truncated mesh file: " + path);
  for (int l = 0; l < nb; ++l) {
    int id = -1;
    in >> id;
    if (!in || id != l) throw ConfigError("bad boundary loop record in " + path);
    // Consume the rest of the line as the cycle.
    std::string rest;
    std::getline(in, rest);
    std::istringstream ls(rest);
    std::vector<int> cycle;
    int v;
    while (ls >> v) cycle.push_back(v);
    if (cycle.empty()) throw ConfigError("empty boundary loop in " + path);
  }

  mesh.finalize();
  mesh.validate();
  for (int v = 0; v < nv; ++v) {
    if (flags[v] != mesh.vertex_is_boundary[v])
      throw ConfigError("vertex flag inconsistent with triangulation in " + path);
  }
  return mesh;
}

}  // namespace liouville
