#include "liouville/diagnostics.hpp"

#include <cmath>
#include <numbers>

namespace liouville {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kStrict = 1e-10;
}  // namespace

double gauss_bonnet_residual(const VertexField& u, const Problem& prob, double chi,
                             bool rescale) {
  auto [A, B] = masses(u, prob);
  double C = rescale ? normalization(A, B, prob.params.lambda).C : 1.0;
  // u_geom = u + 2 log C, so the two masses scale by C^2 and C.
  double defect = C * C * A + C * B - 2.0 * kPi * chi;
  return std::abs(defect) / (1.0 + 2.0 * kPi * std::abs(chi));
}

HypothesisReport classify_hypotheses(const CurvatureData& data, const TriangleMesh& mesh,
                                     const FemOperators&, int symmetry_order) {
  HypothesisReport rep;
  rep.chi = singular_chi(mesh, data.sing);
  rep.tau = trudinger_tau(data.sing);
  rep.classification = classify_surface(rep.chi, rep.tau);

  const VertexField& K = data.K_raw;
  const BoundaryField& h = data.h_raw;
  bool K_nonneg = (K.array() >= -kStrict).all();
  bool K_nonpos = (K.array() <= kStrict).all();
  bool K_pos_somewhere = (K.array() > kStrict).any();
  bool K_neg_somewhere = (K.array() < -kStrict).any();
  bool K_nonzero = K_pos_somewhere || K_neg_somewhere;
  bool h_nonpos = (h.array() <= kStrict).all();
  bool h_nonneg = (h.array() >= -kStrict).all();
  bool h_nonzero = (h.array().abs() > kStrict).any();
  double h_integral = boundary_integrate(h, mesh);

  double D_max = -std::numeric_limits<double>::infinity();
  bool D_defined = !(restrict_to_boundary(K, mesh).array() == 0.0).any();
  if (D_defined) {
    BoundaryField D = ratio_D(K, h, mesh);
    D_max = D.maxCoeff();
  }

  // Non-emptiness of H_chi per the sign lemma.
  bool hb_pos_somewhere = (h.array() > kStrict).any();
  bool hb_neg_somewhere = (h.array() < -kStrict).any();
  if (rep.chi > 0.0) {
    rep.h_chi_nonempty = K_pos_somewhere || hb_pos_somewhere;
  } else if (rep.chi == 0.0) {
    rep.h_chi_nonempty = (K_pos_somewhere && hb_neg_somewhere) ||
                         (K_neg_somewhere && hb_pos_somewhere);
  } else {
    rep.h_chi_nonempty = K_neg_somewhere || hb_neg_somewhere;
  }

  if (rep.chi > 0.0 && K_nonneg && K_nonzero) {
    switch (rep.classification) {
      case SurfaceClass::subcritical:
        rep.satisfied.push_back("Theorem chi>0: subcritical");
        break;
      case SurfaceClass::critical:
        if (symmetry_order >= 2)
          rep.satisfied.push_back("Theorem chi>0: critical with symmetry order " +
                                  std::to_string(symmetry_order));
        break;
      case SurfaceClass::supercritical:
        if (symmetry_order >= 2 && rep.chi < symmetry_order * rep.tau)
          rep.satisfied.push_back("Theorem chi>0: supercritical with symmetry order " +
                                  std::to_string(symmetry_order));
        break;
      default:
        break;
    }
  }
  if (rep.chi == 0.0) {
    if (K_pos_somewhere && h_nonpos && h_nonzero)
      rep.satisfied.push_back("Theorem chi=0: K > 0 somewhere, h <= 0 not identically 0");
    if (K_nonneg && K_nonzero && h_integral < -kStrict)
      rep.satisfied.push_back("Theorem chi=0: K >= 0, boundary integral of h negative");
    if (K_nonpos && K_nonzero && h_nonneg && h_nonzero && D_defined && D_max < 1.0 - kStrict)
      rep.satisfied.push_back("Theorem chi=0: K <= 0, h >= 0, max D < 1");
  }
  if (rep.chi < 0.0) {
    bool logK_integrable = (K.array().abs() > 0.0).all();
    if (K_nonpos && K_nonzero && logK_integrable && D_defined && D_max < 1.0 - kStrict)
      rep.satisfied.push_back("Theorem chi<0: K <= 0, max D < 1");
  }
  return rep;
}

}  // namespace liouville
