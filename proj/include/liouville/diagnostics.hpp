#pragma once

#include <string>
#include <vector>

#include "liouville/asymptotics.hpp"

namespace liouville {

/// |∫ K~ e^{u+2logC} + ∮ h~ e^{(u+2logC)/2} - 2 pi chi| / (1 + 2 pi |chi|)
/// at the geometric metric reconstructed from a mean-field state. With
/// rescale = false the raw field u is used instead of u + 2 log C.
double gauss_bonnet_residual(const VertexField& u, const Problem& prob, double chi,
                             bool rescale = true);

struct HypothesisReport {
  double chi = 0.0;
  double tau = 0.0;
  SurfaceClass classification = SurfaceClass::nonpositive;
  bool h_chi_nonempty = false;
  std::vector<std::string> satisfied;  // existence theorem bullets that apply
};

/// Evaluates the checkable hypotheses of the three existence theorems
/// (signs of K and h, boundary integral of h, max of D, criticality label,
/// optional symmetry order) and lists which ones hold.
HypothesisReport classify_hypotheses(const CurvatureData& data, const TriangleMesh& mesh,
                                     const FemOperators& fem, int symmetry_order = 0);

}  // namespace liouville
