#include "liouville/elliptic.hpp"

#include <cmath>

namespace liouville {

FemOperators assemble(const TriangleMesh& mesh) {
  const int nv = mesh.num_vertices();
  FemOperators fem;
  std::vector<Eigen::Triplet<double>> kt, mt, bt;
  kt.reserve(mesh.num_triangles() * 9);
  mt.reserve(mesh.num_triangles() * 9);

  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    double area = mesh.triangle_area(t);
    double longest = 0.0;
    for (int k = 0; k < 3; ++k) {
      longest = std::max(longest,
                         (mesh.vertices[tri[k]] - mesh.vertices[tri[(k + 1) % 3]]).squared_norm());
    }
    // Shape-based degeneracy: slivers have area far below edge^2.
    if (area < 1e-12 * longest) throw NumericalError("degenerate triangle in assembly");
    const Vec2& p0 = mesh.vertices[tri[0]];
    const Vec2& p1 = mesh.vertices[tri[1]];
    const Vec2& p2 = mesh.vertices[tri[2]];
    // P1 basis gradients: grad phi_i = perp(opposite edge) / (2 area).
    Vec2 g[3] = {{p1.y - p2.y, p2.x - p1.x}, {p2.y - p0.y, p0.x - p2.x}, {p0.y - p1.y, p1.x - p0.x}};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        kt.emplace_back(tri[i], tri[j], g[i].dot(g[j]) / (4.0 * area));
        mt.emplace_back(tri[i], tri[j], area / (i == j ? 6.0 : 12.0));
      }
    }
  }
  for (const auto& cycle : mesh.boundary_loops) {
    for (size_t i = 0; i < cycle.size(); ++i) {
      int a = cycle[i], b = cycle[(i + 1) % cycle.size()];
      double len = dist(mesh.vertices[a], mesh.vertices[b]);
      bt.emplace_back(a, a, len / 3.0);
      bt.emplace_back(b, b, len / 3.0);
      bt.emplace_back(a, b, len / 6.0);
      bt.emplace_back(b, a, len / 6.0);
    }
  }

  fem.stiffness.resize(nv, nv);
  fem.stiffness.setFromTriplets(kt.begin(), kt.end());
  fem.mass.resize(nv, nv);
  fem.mass.setFromTriplets(mt.begin(), mt.end());
  fem.boundary_mass.resize(nv, nv);
  fem.boundary_mass.setFromTriplets(bt.begin(), bt.end());
  fem.lumped_area = lumped_vertex_areas(mesh);
  fem.lumped_boundary = lumped_boundary_lengths(mesh);
  fem.area = mesh.total_area();
  return fem;
}

NeumannSolver::NeumannSolver(const TriangleMesh& mesh, const FemOperators& fem,
                             LinearSolverKind kind)
    : mesh_(mesh), fem_(fem), kind_(kind) {
  grounded_ = fem.stiffness;
  // Zero row/column of the ground vertex, unit diagonal. For compatible loads
  // the grounded solve reproduces the exact singular system solution with
  // u[ground] = 0.
  ground_ = 0;
  for (int k = 0; k < grounded_.outerSize(); ++k) {
    for (SparseSym::InnerIterator it(grounded_, k); it; ++it) {
      if (it.row() == ground_ || it.col() == ground_) {
        it.valueRef() = (it.row() == it.col()) ? 1.0 : 0.0;
      }
    }
  }
  if (kind_ == LinearSolverKind::direct) {
    ldlt_.compute(grounded_);
    if (ldlt_.info() != Eigen::Success)
      throw NumericalError("Neumann stiffness factorization failed");
  } else {
    inv_diag_ = grounded_.diagonal().cwiseInverse();
  }
}

VertexField NeumannSolver::solve_load(const Eigen::VectorXd& load) const {
  Eigen::VectorXd b = load;
  b[ground_] = 0.0;
  VertexField u;
  if (kind_ == LinearSolverKind::direct) {
    u = ldlt_.solve(b);
    if (ldlt_.info() != Eigen::Success) throw NumericalError("Neumann solve failed");
  } else {
    // Jacobi-conditioned conjugate gradients on the grounded SPD system.
    u = Eigen::VectorXd::Zero(b.size());
    Eigen::VectorXd r = b;
    Eigen::VectorXd z = inv_diag_.cwiseProduct(r);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    double tol2 = 1e-24 * std::max(1.0, b.squaredNorm());
    int max_iter = 20 * static_cast<int>(std::sqrt(static_cast<double>(b.size()))) + 200;
    for (int it = 0; it < max_iter && r.squaredNorm() > tol2; ++it) {
      Eigen::VectorXd Ap = grounded_ * p;
      double alpha = rz / p.dot(Ap);
      u += alpha * p;
      r -= alpha * Ap;
      z = inv_diag_.cwiseProduct(r);
      double rz_new = r.dot(z);
      p = z + (rz_new / rz) * p;
      rz = rz_new;
    }
    if (r.squaredNorm() > 1e6 * tol2) throw NumericalError("Neumann CG did not converge");
  }
  fem_.project_mean_zero(u);
  return u;
}

VertexField NeumannSolver::solve_neumann(const VertexField& rhs, const BoundaryField& flux,
                                         double tol_compat) const {
  if (rhs.size() != mesh_.num_vertices() || flux.size() != mesh_.num_boundary_vertices())
    throw PreconditionError("solve_neumann: field sizes do not match mesh");
  Eigen::VectorXd load = fem_.mass * rhs + fem_.boundary_mass * lift_boundary_field(flux, mesh_);
  double defect = load.sum();
  double scale = (fem_.mass * rhs.cwiseAbs()).sum() +
                 (fem_.boundary_mass * lift_boundary_field(flux.cwiseAbs(), mesh_)).sum();
  if (std::abs(defect) > tol_compat * (scale + 1.0))
    throw PreconditionError("solve_neumann: incompatible data, |∫rhs + ∮flux| = " +
                            std::to_string(defect));
  return solve_load(load);
}

VertexField NeumannSolver::green_function(int p) const {
  if (p < 0 || p >= mesh_.num_vertices()) throw PreconditionError("green_function: invalid vertex");
  Eigen::VectorXd load = -fem_.lumped_area / fem_.area;
  load[p] += 1.0;
  return solve_load(load);
}

}  // namespace liouville
