#pragma once

#include <optional>
#include <string>

#include "liouville/functional.hpp"

namespace liouville {

/// Cyclic symmetry group of a rotationally symmetric mesh. `action` is the
/// vertex permutation of the generator rotation; it must be a mesh
/// automorphism with generator^order = identity and no fixed boundary vertex.
struct SymmetryGroup {
  int order = 1;
  std::vector<int> action;
  std::vector<int> fixed_set;

  void validate(const TriangleMesh& mesh) const;
};

/// Finds the vertex permutation of the rotation by 2 pi / order about the
/// origin. Throws if the mesh is not symmetric to within a small fraction of
/// the local edge length.
SymmetryGroup make_rotation_group(const TriangleMesh& mesh, int order);

/// (1/order) sum over the cyclic group of u composed with the action.
VertexField group_average(const VertexField& u, const SymmetryGroup& G, const TriangleMesh& mesh);

enum class SolveStatus { converged, diverging_energy, left_admissible, iteration_cap };

std::string to_string(SolveStatus s);

struct SolveOptions {
  double tol_grad = 1e-8;
  double tol_pde = 1e-6;
  int max_iter = 5000;
  double step0 = 1.0;
  double armijo_c = 1e-4;
  // Energy floor: J(u0) - divergence_floor flags diverging_energy. Defaults to
  // 50 |lambda| log(lambda_cap) with lambda_cap = 1e6.
  double divergence_floor = -1.0;
  double lambda_cap = 1e6;
  std::optional<VertexField> initial;
  // Optional per-iteration observer: (iteration, energy, gradient_norm).
  std::function<void(int, double, double)> monitor;
};

struct SolveReport {
  EnergyState state;
  double gradient_norm = 0.0;
  double pde_residual_interior = 0.0;
  double pde_residual_boundary = 0.0;
  double C_value = 0.0;
  double energy = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::iteration_cap;
  // Sweep annotations.
  double lambda = 0.0;
  double mu = 1.0;
  double gamma_dist = 0.0;
  double max_u = 0.0;
  double concentration_fraction = 0.0;
  Vec2 concentration_point;
};

/// H1-preconditioned gradient descent of J_{lambda,mu} on the mean-zero space,
/// optionally constrained to the G-symmetric subspace. Starts from u = 0 when
/// admissible (otherwise options.initial, which is then required).
SolveReport minimize(const Problem& prob, const NeumannSolver& lap, const SolveOptions& options,
                     const SymmetryGroup* G = nullptr);

/// Discrete H1-dual norms of the weak residual, split into interior rows and
/// boundary rows, each normalized by (1 + |lambda| + |u|_H1).
std::pair<double, double> pde_residual(const VertexField& u, const Problem& prob);

struct SweepOptions {
  SolveOptions solve;
  bool warm_start = true;
  double concentration_radius = 0.2;
  // Optional hook (fraction, point) evaluating the one-ball concentration of a
  // state; the runner wires it to asymptotics::concentration_points.
  std::function<std::pair<double, Vec2>(const VertexField&)> concentration;
};

/// Solves J_lambda for every lambda in the sorted grid, annotating each report
/// with gamma_distance, max(u) and a one-ball concentration summary.
std::vector<SolveReport> lambda_sweep(const TriangleMesh& mesh, const FemOperators& fem,
                                      const CurvatureData& data, const NeumannSolver& lap,
                                      const std::vector<double>& lambda_grid, double mu,
                                      const SweepOptions& options);

/// Solves J_{lambda,mu} for each mu in mu_list (all within [0.9, 1.1]).
std::vector<SolveReport> solve_perturbed(const TriangleMesh& mesh, const FemOperators& fem,
                                         const CurvatureData& data, const NeumannSolver& lap,
                                         double lambda, const std::vector<double>& mu_list,
                                         const SolveOptions& options);

}  // namespace liouville
