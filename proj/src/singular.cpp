#include "liouville/singular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

namespace liouville {

namespace {
constexpr double kPi = std::numbers::pi;
}

void SingularStructure::validate(const TriangleMesh& mesh) const {
  std::set<int> seen;
  for (const auto& s : interior) {
    if (s.vertex < 0 || s.vertex >= mesh.num_vertices())
      throw PreconditionError("singular vertex out of range");
    if (mesh.vertex_is_boundary[s.vertex])
      throw PreconditionError("conical singularity must be an interior vertex");
    if (!(s.alpha > -1.0)) throw PreconditionError("conical order must satisfy alpha > -1");
    if (!seen.insert(s.vertex).second) throw PreconditionError("duplicate singular vertex");
  }
  for (const auto& c : corners) {
    if (c.vertex < 0 || c.vertex >= mesh.num_vertices())
      throw PreconditionError("corner vertex out of range");
    if (!mesh.vertex_is_boundary[c.vertex])
      throw PreconditionError("corner must be a boundary vertex");
    if (!(c.beta > -1.0)) throw PreconditionError("corner order must satisfy beta > -1");
    if (!seen.insert(c.vertex).second) throw PreconditionError("duplicate singular vertex");
  }
}

std::string to_string(SurfaceClass c) {
  switch (c) {
    case SurfaceClass::subcritical: return "subcritical";
    case SurfaceClass::critical: return "critical";
    case SurfaceClass::supercritical: return "supercritical";
    case SurfaceClass::nonpositive: return "nonpositive";
  }
  return "?";
}

double singular_chi(const TriangleMesh& mesh, const SingularStructure& sing) {
  double chi = euler_characteristic(mesh);
  for (const auto& s : sing.interior) chi += s.alpha;
  for (const auto& c : sing.corners) chi += 0.5 * c.beta;
  return chi;
}

double trudinger_tau(const SingularStructure& sing) {
  double tau = 1.0;
  for (const auto& s : sing.interior) tau = std::min(tau, 2.0 + 2.0 * s.alpha);
  for (const auto& c : sing.corners) tau = std::min(tau, 1.0 + c.beta);
  return tau;
}

SurfaceClass classify_surface(double chi, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw PreconditionError("tau must lie in (0, 1]");
  if (chi <= 0.0) return SurfaceClass::nonpositive;
  if (chi < tau) return SurfaceClass::subcritical;
  if (chi == tau) return SurfaceClass::critical;
  return SurfaceClass::supercritical;
}

std::vector<double> gamma_set(const SingularStructure& sing, double cap) {
  if (!(cap > 0.0)) throw PreconditionError("gamma_set cap must be positive");
  // Base masses of the subsets (I, J), enumerated with pruning: partial sums
  // beyond the cap cannot come back down since every term is positive.
  std::vector<double> terms;
  for (const auto& s : sing.interior) terms.push_back(8.0 * kPi * (1.0 + s.alpha));
  for (const auto& c : sing.corners) terms.push_back(4.0 * kPi * (1.0 + c.beta));

  std::vector<double> sums{0.0};
  for (double t : terms) {
    size_t sz = sums.size();
    for (size_t i = 0; i < sz; ++i) {
      double v = sums[i] + t;
      if (v <= cap) sums.push_back(v);
    }
  }

  std::vector<double> values;
  for (double base : sums) {
    for (double v = base; v <= cap; v += 4.0 * kPi) values.push_back(v);
  }
  std::sort(values.begin(), values.end());
  double tol = 1e-12 * (1.0 + cap);
  std::vector<double> out;
  for (double v : values) {
    if (out.empty() || v - out.back() > tol) out.push_back(v);
  }
  return out;
}

double gamma_distance(double lambda, const SingularStructure& sing) {
  double cap = std::max(4.0 * kPi, lambda + 4.0 * kPi);
  double best = std::numeric_limits<double>::infinity();
  for (double g : gamma_set(sing, cap)) best = std::min(best, std::abs(lambda - g));
  return best;
}

CurvatureData desingularize(const VertexField& K, const BoundaryField& h,
                            const SingularStructure& sing, const TriangleMesh& mesh,
                            const NeumannSolver& solver) {
  if (K.size() != mesh.num_vertices() || h.size() != mesh.num_boundary_vertices())
    throw PreconditionError("desingularize: field sizes do not match mesh");
  sing.validate(mesh);

  CurvatureData data;
  data.K_raw = K;
  data.h_raw = h;
  data.sing = sing;
  if (sing.empty()) {
    data.K_tilde = K;
    data.h_tilde = h;
    return data;
  }

  VertexField P = VertexField::Zero(mesh.num_vertices());
  for (const auto& s : sing.interior) P += s.alpha * solver.green_function(s.vertex);
  for (const auto& c : sing.corners) P += 0.5 * c.beta * solver.green_function(c.vertex);

  data.K_tilde = K.array() * (-4.0 * kPi * P.array()).exp();
  BoundaryField Pb = restrict_to_boundary(P, mesh);
  data.h_tilde = h.array() * (-2.0 * kPi * Pb.array()).exp();
  return data;
}

CurvatureData raw_curvature(const VertexField& K, const BoundaryField& h) {
  CurvatureData data;
  data.K_raw = K;
  data.h_raw = h;
  data.K_tilde = K;
  data.h_tilde = h;
  return data;
}

BoundaryField ratio_D(const VertexField& K, const BoundaryField& h, const TriangleMesh& mesh) {
  if (K.size() != mesh.num_vertices() || h.size() != mesh.num_boundary_vertices())
    throw PreconditionError("ratio_D: field sizes do not match mesh");
  BoundaryField Kb = restrict_to_boundary(K, mesh);
  BoundaryField D(h.size());
  for (int i = 0; i < h.size(); ++i) {
    if (Kb[i] == 0.0) throw PreconditionError("ratio_D: K vanishes at a boundary vertex");
    D[i] = h[i] / std::sqrt(std::abs(Kb[i]));
  }
  return D;
}

}  // namespace liouville
