#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "liouville/geometry.hpp"

namespace liouville {

using SparseSym = Eigen::SparseMatrix<double>;

/// Piecewise-linear FEM operators on a mesh. stiffness is the Dirichlet form
/// (positive semidefinite, kernel = constants), mass the L2 pairing, and
/// boundary_mass the L2 pairing on the boundary trace (indexed by full vertex
/// ids, nonzero only on boundary rows).
struct FemOperators {
  SparseSym stiffness;
  SparseSym mass;
  SparseSym boundary_mass;
  Eigen::VectorXd lumped_area;       // per vertex
  Eigen::VectorXd lumped_boundary;   // per boundary vertex (boundary_order)
  double area = 0.0;

  double mean(const VertexField& u) const { return lumped_area.dot(u) / area; }
  void project_mean_zero(VertexField& u) const { u.array() -= mean(u); }
};

/// Assembles stiffness, mass and boundary mass. Throws NumericalError on a
/// degenerate triangle (area below 1e-14 of the mean area).
FemOperators assemble(const TriangleMesh& mesh);

enum class LinearSolverKind { direct, cg };

/// Factorized Neumann Laplacian. The singular stiffness matrix is grounded at
/// one vertex; compatible loads are solved exactly on the mean-zero subspace.
/// The default backend is a sparse direct factorization; a Jacobi-conditioned
/// conjugate-gradient backend is available behind the kind flag.
class NeumannSolver {
 public:
  NeumannSolver(const TriangleMesh& mesh, const FemOperators& fem,
                LinearSolverKind kind = LinearSolverKind::direct);

  /// Mean-zero weak solution of -Δu = rhs in Σ, ∂ν u = flux on ∂Σ.
  /// Requires |∫rhs + ∮flux| below tol_compat relative to the data size.
  VertexField solve_neumann(const VertexField& rhs, const BoundaryField& flux,
                            double tol_compat = 1e-10) const;

  /// Solves stiffness * u = load for a compatible load covector (sum zero),
  /// returning the mean-zero representative. No compatibility check.
  VertexField solve_load(const Eigen::VectorXd& load) const;

  /// Mean-zero G_p with -ΔG_p = δ_p - 1/|Σ| (lumped nodal delta), ∂ν G_p = 0.
  VertexField green_function(int p) const;

 private:
  const TriangleMesh& mesh_;
  const FemOperators& fem_;
  LinearSolverKind kind_;
  SparseSym grounded_;
  Eigen::SimplicialLDLT<SparseSym> ldlt_;
  Eigen::VectorXd inv_diag_;
  int ground_ = 0;
};

/// Symmetric operator in the form S + sum_k rho_k w_k w_k^T.
struct SymOperator {
  SparseSym sparse;
  std::vector<std::pair<double, Eigen::VectorXd>> rank_one;

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    Eigen::VectorXd r = sparse * v;
    for (const auto& [rho, w] : rank_one) r += (rho * w.dot(v)) * w;
    return r;
  }
  double bilinear(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    return x.dot(apply(y));
  }
};

enum class EigSubspace { full, mean_zero };

struct EigenPair {
  double value = 0.0;
  VertexField field;
};

struct EigOptions {
  int max_lanczos = 400;
  double tol = 1e-10;
  uint64_t seed = 12345;
  // Optional extra projector applied to every Krylov vector (e.g. group
  // averaging); must commute with the pencil for the result to be exact.
  std::function<void(Eigen::VectorXd&)> projector;
};

/// The `count` smallest generalized eigenvalues of (A, B) with B-orthonormal
/// eigenvectors, ascending. B must be positive definite on the subspace.
/// subspace mean_zero restricts to fields with weights^T v = 0 where weights is
/// the lumped-area vector of B's mesh.
std::vector<EigenPair> smallest_eigenpairs(const SymOperator& A, const SparseSym& B,
                                           const Eigen::VectorXd& weights, int count,
                                           EigSubspace subspace, const EigOptions& opts = {});

/// Number of eigenvalues of the pencil (A, B) strictly below sigma, by LDLT
/// inertia (rank-one corrections folded in analytically).
int eigenvalues_below(const SymOperator& A, const SparseSym& B, double sigma);

}  // namespace liouville
