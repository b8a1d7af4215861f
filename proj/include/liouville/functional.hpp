#pragma once

#include <optional>

#include "liouville/singular.hpp"

namespace liouville {

/// Mean-field parameters. The geometric problem sets lambda = 4 pi chi; mu is
/// the auxiliary perturbation weight on the Dirichlet term (1 unperturbed).
struct EnergyParams {
  double lambda = 0.0;
  double mu = 1.0;
};

/// Mean-zero field with its cached masses A = ∫ K~ e^u and B = ∮ h~ e^{u/2}.
struct EnergyState {
  VertexField u;
  double A = 0.0;
  double B = 0.0;
};

/// Assembled quadrature context shared by all energy evaluations: FEM
/// operators plus the nonlinear quadrature weights of the curvature data.
struct Problem {
  const TriangleMesh& mesh;
  const FemOperators& fem;
  const CurvatureData& data;
  EnergyParams params;

  // K~ and h~ premultiplied by the lumped weights, as full vertex vectors.
  Eigen::VectorXd wK;   // m_i K~_i
  Eigen::VectorXd wh;   // mb_i h~_i on boundary rows, 0 inside

  Problem(const TriangleMesh& mesh_, const FemOperators& fem_, const CurvatureData& data_,
          EnergyParams params_);
};

/// A = ∫ K~ e^u, B = ∮ h~ e^{u/2} by lumped mesh quadrature, evaluated with the
/// max(u) shift so that arbitrarily tall fields stay finite.
std::pair<double, double> masses(const VertexField& u, const Problem& prob);

/// Membership in H_chi for the three sign cases of lambda = 4 pi chi, with a
/// strict margin of 1e-10 relative to the data scale.
bool admissible(double A, double B, double lambda);

/// Positive root of C^2 A + C B = lambda / 2, branch continuous across A = 0.
/// Throws PreconditionError outside the admissible set. Also exposes the
/// derivative helpers used by gradients and Hessians.
struct Normalization {
  double C = 0.0;
  double D2 = 0.0;  // 2 C A + B; never zero on the open admissible set
  double C_A() const { return -C * C / D2; }
  double C_B() const { return -C / D2; }
};
Normalization normalization(double A, double B, double lambda);

/// F_{lambda/4pi}(A, B): the three-branch closed form.
double f_lambda(double A, double B, double lambda);

/// In the geometric convention (F_chi, C with 2 pi chi on the right side).
double f_chi(double A, double B, double chi);
double normalization_C(double A, double B, double chi);
bool admissible_chi(double A, double B, double chi);

/// J_{lambda,mu}(u) = (mu/2) ∫ |∇u|^2 - F_{lambda/4pi}(A(u), B(u)).
/// Evaluated with the shift law, so bubble-sized fields do not overflow.
double energy_J(const VertexField& u, const Problem& prob);

/// I_lambda(u) = (1/2) ∫|∇u|^2 + (lambda/|Σ|) ∫u - 2 ∫K~ e^u - 4 ∮h~ e^{u/2}.
double energy_I(const VertexField& u, const Problem& prob);

/// Derivative of J as a covector over vertex hat functions, including the
/// (lambda/|Σ|) ∫ phi term of the full-space extension (which makes it sum to
/// zero at every admissible state).
Eigen::VectorXd derivative_J(const VertexField& u, const Problem& prob);

/// Derivative of I (full space).
Eigen::VectorXd derivative_I(const VertexField& u, const Problem& prob);

/// Riesz representative of derivative_J w.r.t. the L2 mass pairing, projected
/// mean-zero.
VertexField gradient_J(const VertexField& u, const Problem& prob);
VertexField gradient_I(const VertexField& u, const Problem& prob);

/// Second variation of J at u as sparse + rank-one; defined on mean-zero
/// fields (constants are an exact null direction of the returned operator).
SymOperator hessian_J(const VertexField& u, const Problem& prob);

/// Second variation of I at the direct-formulation state u + 2 log C(u)
/// (the geometric representative of a mean-field state); full space.
SymOperator hessian_I_geometric(const VertexField& u, const Problem& prob);

/// Second variation of I at the field u itself.
SymOperator hessian_I_at(const VertexField& u, const Problem& prob);

double hessian_form(const SymOperator& H, const VertexField& phi, const VertexField& psi);

EnergyState make_state(const VertexField& u, const Problem& prob);

}  // namespace liouville
