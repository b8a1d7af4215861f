#pragma once

#include <string>
#include <vector>

#include "liouville/elliptic.hpp"
#include "liouville/geometry.hpp"

namespace liouville {

/// Marked interior conical points (orders alpha) and boundary corners
/// (orders beta). Orders must exceed -1; marked vertices are distinct and of
/// the right class (interior / boundary).
struct SingularStructure {
  struct Interior {
    int vertex = -1;
    double alpha = 0.0;
  };
  struct Corner {
    int vertex = -1;
    double beta = 0.0;
  };
  std::vector<Interior> interior;
  std::vector<Corner> corners;

  bool empty() const { return interior.empty() && corners.empty(); }
  void validate(const TriangleMesh& mesh) const;
};

enum class SurfaceClass { subcritical, critical, supercritical, nonpositive };

std::string to_string(SurfaceClass c);

/// chi(Σ) + sum alpha_i + (1/2) sum beta_j.
double singular_chi(const TriangleMesh& mesh, const SingularStructure& sing);

/// min{1, 2 + 2 min alpha_i, 1 + min beta_j}; absent families contribute no term.
double trudinger_tau(const SingularStructure& sing);

/// Trichotomy by chi against tau; nonpositive when chi <= 0.
SurfaceClass classify_surface(double chi, double tau);

/// All values 4 pi k + 8 pi sum_{i in I}(1+alpha_i) + 4 pi sum_{j in J}(1+beta_j)
/// up to `cap`, over k >= 0 and all subsets I, J; sorted, deduplicated with
/// absolute tolerance 1e-12 (1 + cap).
std::vector<double> gamma_set(const SingularStructure& sing, double cap);

/// min |lambda - gamma| over gamma_set with cap >= lambda + 4 pi.
double gamma_distance(double lambda, const SingularStructure& sing);

/// Desingularized curvatures together with the raw ones.
struct CurvatureData {
  VertexField K_raw;
  BoundaryField h_raw;
  VertexField K_tilde;
  BoundaryField h_tilde;
  SingularStructure sing;
};

/// K~ = K exp(-4 pi P), h~ = h exp(-2 pi P) with
/// P = sum alpha_i G_{p_i} + (1/2) sum beta_j G_{q_j}, one Green function per
/// marked vertex (zero-mean normalization).
CurvatureData desingularize(const VertexField& K, const BoundaryField& h,
                            const SingularStructure& sing, const TriangleMesh& mesh,
                            const NeumannSolver& solver);

/// Wraps raw fields with no singularities (tilde = raw).
CurvatureData raw_curvature(const VertexField& K, const BoundaryField& h);

/// D = h / sqrt(|K|) per boundary vertex; throws if K vanishes on the boundary.
BoundaryField ratio_D(const VertexField& K, const BoundaryField& h, const TriangleMesh& mesh);

}  // namespace liouville
