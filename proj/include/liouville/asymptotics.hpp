#pragma once

#include "liouville/solver.hpp"

namespace liouville {

/// Weighted point set sigma = sum t_i delta_{x_i} with t_i >= 0, sum t_i = 1.
struct Barycenter {
  struct Atom {
    double weight = 1.0;
    Vec2 point;
  };
  std::vector<Atom> atoms;

  void validate() const;
};

/// phi_{Lambda,sigma}(x) = log sum_i t_i Lambda^2 / (1 + Lambda^2 d(x, x_i)^2)^2,
/// mean subtracted (exactly mean-zero in the mesh quadrature).
VertexField bubble(const Barycenter& sigma, double Lambda, const TriangleMesh& mesh,
                   const FemOperators& fem);

/// Conical-profile bubble of order alpha at a single point:
/// 2(1+alpha) log Lambda - 2 log(1 + (Lambda d)^{2(1+alpha)}), mean subtracted.
VertexField singular_bubble(const Vec2& x0, double alpha, double Lambda, const TriangleMesh& mesh,
                            const FemOperators& fem);

struct BubbleSlopes {
  double dirichlet = 0.0;       // slope of (1/2)∫|∇phi|^2 against log Lambda
  double interior_mass = 0.0;   // slope of log ∫ K~ e^{phi - mean}
  double boundary_mass = 0.0;   // slope of log |∮ h~ e^{(phi - mean)/2}|
  std::vector<double> lambdas_used;
  int excluded = 0;             // largest-Lambda entries dropped (mesh too coarse)
};

/// Least-squares slopes over a geometric Lambda family. Every atom needs mesh
/// edges below 0.2 / Lambda nearby; Lambdas violating that are excluded from
/// the fits (largest first) and reported.
BubbleSlopes bubble_slopes(const Barycenter& sigma, const std::vector<double>& Lambda_list,
                           const CurvatureData& data, const TriangleMesh& mesh,
                           const FemOperators& fem);

/// J_lambda at Phi(sigma) = phi_{Lambda,sigma} - mean.
double test_function_energy(const Barycenter& sigma, double Lambda, double lambda,
                            const CurvatureData& data, const TriangleMesh& mesh,
                            const FemOperators& fem);

struct ConcentrationReport {
  std::vector<Vec2> points;
  double captured_fraction = 0.0;
  double radius = 0.0;
  bool captured = false;  // captured_fraction >= 1 - eps
};

/// Greedy ball covering of the K~ e^u measure: repeatedly grabs the vertex-
/// centered ball of radius r with the most not-yet-captured mass.
ConcentrationReport concentration_points(const VertexField& u, const CurvatureData& data,
                                         const TriangleMesh& mesh, const FemOperators& fem,
                                         int k, double r, double eps);

/// (∫_{B_r(p)} 2 K~ e^u, ∮_{B_r(p)} 2 h~ e^{u/2}) by lumped quadrature.
std::pair<double, double> local_mass(const VertexField& u, const CurvatureData& data,
                                     const TriangleMesh& mesh, const FemOperators& fem,
                                     const Vec2& p, double r);

/// Relative defect of the Pohozaev identity on B_r(p) for the mean-field state
/// u (effective curvature 2 C(u)^2 K~ e^u). The ball must avoid the boundary.
double pohozaev_residual(const VertexField& u, const Problem& prob, const Vec2& p, double r);

enum class MorseKind { mean_field, direct };

struct MorseIndexResult {
  int index = 0;
  bool capped = false;  // all examined eigenvalues negative; true index >= cap
};

/// Number of eigenvalues below -tol_eig * scale of the chosen Hessian form;
/// mean_field restricts to the mean-zero space, direct uses the full space at
/// the geometric representative u + 2 log C.
MorseIndexResult morse_index(const VertexField& u, const Problem& prob, MorseKind kind,
                             int cap = 20, double tol_eig = 1e-8, uint64_t seed = 12345);

enum class TmProbeKind { interior, boundary, combined };

struct TmProbeReport {
  double ratio = 0.0;  // sup over the family of log-mass / (TM energy bound)
  bool within_bound = false;
  std::vector<double> per_lambda;
};

struct TmFamilySpec {
  Barycenter sigma;
  std::vector<double> Lambda_list;
  double alpha = 0.0;  // conical order for interior probes at a singular point
};

/// Empirical Trudinger-Moser ratio of a bubble family:
///   interior: c log ∫K~ e^{u} / ∫|∇u|^2 with c = 8 tau pi for regular
///             families and 16 pi min{1,1+alpha} for a conical family
///   boundary: (16 tau pi) log |∮h~ e^{u/2}| / ∫|∇u|^2
///   combined: (16 tau pi) log(sqrt(B^2 + 2 lambda A) + B) / ∫|∇u|^2
/// reported against 1 + eps_probe (0.1).
TmProbeReport tm_probe(const CurvatureData& data, const TriangleMesh& mesh,
                       const FemOperators& fem, const TmFamilySpec& family, TmProbeKind which,
                       double lambda_for_combined = 0.0);

}  // namespace liouville
