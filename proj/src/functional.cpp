#include "liouville/functional.hpp"

#include <cmath>
#include <numbers>

namespace liouville {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kMargin = 1e-10;

// Shifted masses: A = e^s Abar, B = e^{s/2} Bbar with s = max(u).
struct ShiftedMasses {
  double Abar = 0.0;
  double Bbar = 0.0;
  double s = 0.0;
};

ShiftedMasses shifted_masses(const VertexField& u, const Problem& prob) {
  ShiftedMasses m;
  m.s = u.maxCoeff();
  m.Abar = prob.wK.dot((u.array() - m.s).exp().matrix());
  m.Bbar = prob.wh.dot((0.5 * (u.array() - m.s)).exp().matrix());
  return m;
}

double data_scale(double A, double B, double lambda) {
  return std::abs(A) + B * B + std::abs(lambda) + 1.0;
}

}  // namespace

Problem::Problem(const TriangleMesh& mesh_, const FemOperators& fem_, const CurvatureData& data_,
                 EnergyParams params_)
    : mesh(mesh_), fem(fem_), data(data_), params(params_) {
  if (data.K_tilde.size() != mesh.num_vertices() ||
      data.h_tilde.size() != mesh.num_boundary_vertices())
    throw PreconditionError("curvature data does not match mesh");
  wK = fem.lumped_area.cwiseProduct(data.K_tilde);
  wh = lift_boundary_field(fem.lumped_boundary.cwiseProduct(data.h_tilde), mesh);
}

std::pair<double, double> masses(const VertexField& u, const Problem& prob) {
  ShiftedMasses m = shifted_masses(u, prob);
  return {std::exp(m.s) * m.Abar, std::exp(0.5 * m.s) * m.Bbar};
}

bool admissible(double A, double B, double lambda) {
  double margin = kMargin * data_scale(A, B, lambda);
  if (lambda > 0.0) {
    double bp = std::max(B, 0.0);
    return A > -bp * bp / (2.0 * lambda) + margin / (2.0 * lambda);
  }
  if (lambda == 0.0) {
    // Strictly opposite signs, both factors away from zero.
    return A * B < 0.0 && std::abs(A) > margin && std::abs(B) > margin;
  }
  double bm = std::max(-B, 0.0);
  return A < bm * bm / (2.0 * std::abs(lambda)) - margin / (2.0 * std::abs(lambda));
}

Normalization normalization(double A, double B, double lambda) {
  if (!admissible(A, B, lambda))
    throw PreconditionError("state outside the admissible set H_chi");
  Normalization n;
  if (lambda > 0.0) {
    double disc = B * B + 2.0 * lambda * A;
    double S = std::sqrt(disc);
    n.C = B >= 0.0 ? lambda / (S + B) : (S - B) / (2.0 * A);
    n.D2 = S;
  } else if (lambda == 0.0) {
    n.C = -B / A;
    n.D2 = -B;
  } else {
    double disc = B * B - 2.0 * std::abs(lambda) * A;
    double S = std::sqrt(disc);
    n.C = B <= 0.0 ? std::abs(lambda) / (S - B) : (S + B) / (-2.0 * A);
    n.D2 = -S;
  }
  return n;
}

double f_lambda(double A, double B, double lambda) {
  if (!admissible(A, B, lambda))
    throw PreconditionError("state outside the admissible set H_chi");
  if (lambda > 0.0) {
    double S = std::sqrt(B * B + 2.0 * lambda * A);
    // log(S + B) via the product form when B < 0 to avoid cancellation.
    double logSB = B >= 0.0 ? std::log(S + B) : std::log(2.0 * lambda * A) - std::log(S - B);
    double frac = B >= 0.0 ? B / (S + B) : B * (S - B) / (2.0 * lambda * A);
    return 2.0 * lambda * (logSB + frac);
  }
  if (lambda == 0.0) return -2.0 * B * B / A;
  double al = std::abs(lambda);
  double S = std::sqrt(B * B - 2.0 * al * A);
  double logSB = B <= 0.0 ? std::log(S - B) : std::log(2.0 * al * (-A)) - std::log(S + B);
  double frac = B <= 0.0 ? B / (S - B) : B * (S + B) / (2.0 * al * (-A));
  return 2.0 * al * (-logSB + frac);
}

double f_chi(double A, double B, double chi) { return f_lambda(A, B, 4.0 * kPi * chi); }
double normalization_C(double A, double B, double chi) {
  return normalization(A, B, 4.0 * kPi * chi).C;
}
bool admissible_chi(double A, double B, double chi) { return admissible(A, B, 4.0 * kPi * chi); }

double energy_J(const VertexField& u, const Problem& prob) {
  ShiftedMasses m = shifted_masses(u, prob);
  double dirichlet = 0.5 * prob.params.mu * u.dot(prob.fem.stiffness * u);
  // Shift law: F(e^s A, e^{s/2} B) = F(A, B) + lambda s.
  return dirichlet - f_lambda(m.Abar, m.Bbar, prob.params.lambda) - prob.params.lambda * m.s;
}

double energy_I(const VertexField& u, const Problem& prob) {
  auto [A, B] = masses(u, prob);
  double dirichlet = 0.5 * u.dot(prob.fem.stiffness * u);
  double meanterm = prob.params.lambda * prob.fem.lumped_area.dot(u) / prob.fem.area;
  return dirichlet + meanterm - 2.0 * A - 4.0 * B;
}

namespace {

// dA[phi] = a . phi and dB[phi] = b . phi at the state u.
void mass_derivative_vectors(const VertexField& u, const Problem& prob, Eigen::VectorXd& a,
                             Eigen::VectorXd& b) {
  a = prob.wK.cwiseProduct(u.array().exp().matrix());
  b = 0.5 * prob.wh.cwiseProduct((0.5 * u.array()).exp().matrix());
}

}  // namespace

Eigen::VectorXd derivative_J(const VertexField& u, const Problem& prob) {
  ShiftedMasses m = shifted_masses(u, prob);
  Normalization n = normalization(m.Abar, m.Bbar, prob.params.lambda);
  double C = n.C * std::exp(-0.5 * m.s);  // normalization of the unshifted state
  Eigen::VectorXd a, b;
  mass_derivative_vectors(u, prob, a, b);
  Eigen::VectorXd r = prob.params.mu * (prob.fem.stiffness * u);
  r -= 2.0 * C * C * a + 4.0 * C * b;
  r += (prob.params.lambda / prob.fem.area) * prob.fem.lumped_area;
  return r;
}

Eigen::VectorXd derivative_I(const VertexField& u, const Problem& prob) {
  Eigen::VectorXd a, b;
  mass_derivative_vectors(u, prob, a, b);
  Eigen::VectorXd r = prob.fem.stiffness * u;
  r -= 2.0 * a + 4.0 * b;
  r += (prob.params.lambda / prob.fem.area) * prob.fem.lumped_area;
  return r;
}

namespace {

VertexField riesz_mean_zero(const Eigen::VectorXd& r, const Problem& prob) {
  Eigen::SimplicialLDLT<SparseSym> mass(prob.fem.mass);
  if (mass.info() != Eigen::Success) throw NumericalError("mass factorization failed");
  VertexField g = mass.solve(r);
  g.array() -= prob.fem.lumped_area.dot(g) / prob.fem.area;
  return g;
}

}  // namespace

VertexField gradient_J(const VertexField& u, const Problem& prob) {
  return riesz_mean_zero(derivative_J(u, prob), prob);
}

VertexField gradient_I(const VertexField& u, const Problem& prob) {
  return riesz_mean_zero(derivative_I(u, prob), prob);
}

SymOperator hessian_J(const VertexField& u, const Problem& prob) {
  ShiftedMasses m = shifted_masses(u, prob);
  Normalization n = normalization(m.Abar, m.Bbar, prob.params.lambda);
  double C = n.C * std::exp(-0.5 * m.s);
  double D2 = n.D2 * std::exp(0.5 * m.s);  // 2 C A + B of the unshifted state
  Eigen::VectorXd a, b;
  mass_derivative_vectors(u, prob, a, b);

  SymOperator H;
  SparseSym diag(prob.mesh.num_vertices(), prob.mesh.num_vertices());
  std::vector<Eigen::Triplet<double>> dt;
  dt.reserve(prob.mesh.num_vertices());
  for (int i = 0; i < prob.mesh.num_vertices(); ++i) {
    double v = -2.0 * C * C * a[i] - 2.0 * C * b[i];
    if (v != 0.0) dt.emplace_back(i, i, v);
  }
  diag.setFromTriplets(dt.begin(), dt.end());
  H.sparse = prob.params.mu * prob.fem.stiffness + diag;
  // -(F_AA dAdA + 2 F_AB dAdB + F_BB dBdB) = (4C/D2) (C a + b)(C a + b)^T
  H.rank_one.emplace_back(4.0 * C / D2, (C * a + b).eval());
  return H;
}

SymOperator hessian_I_at(const VertexField& u, const Problem& prob) {
  Eigen::VectorXd a, b;
  mass_derivative_vectors(u, prob, a, b);
  SymOperator H;
  SparseSym diag(prob.mesh.num_vertices(), prob.mesh.num_vertices());
  std::vector<Eigen::Triplet<double>> dt;
  for (int i = 0; i < prob.mesh.num_vertices(); ++i) {
    double v = -2.0 * a[i] - 2.0 * b[i];
    if (v != 0.0) dt.emplace_back(i, i, v);
  }
  diag.setFromTriplets(dt.begin(), dt.end());
  H.sparse = prob.fem.stiffness + diag;
  return H;
}

SymOperator hessian_I_geometric(const VertexField& u, const Problem& prob) {
  auto [A, B] = masses(u, prob);
  Normalization n = normalization(A, B, prob.params.lambda);
  VertexField u_geom = u.array() + 2.0 * std::log(n.C);
  return hessian_I_at(u_geom, prob);
}

double hessian_form(const SymOperator& H, const VertexField& phi, const VertexField& psi) {
  return H.bilinear(phi, psi);
}

EnergyState make_state(const VertexField& u, const Problem& prob) {
  EnergyState s;
  s.u = u;
  auto [A, B] = masses(u, prob);
  s.A = A;
  s.B = B;
  return s;
}

}  // namespace liouville
