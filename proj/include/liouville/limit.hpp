#pragma once

#include <functional>

#include "liouville/geometry.hpp"

namespace liouville {

/// Canonical radial solution of -Δv = 2 K0 |x|^{2 alpha} e^v on the plane:
/// v(x) = log(4 b (1+alpha)^2 / K0) - 2 log(1 + b |x|^{2(1+alpha)}).
struct PlaneSolution {
  double K0 = 1.0;
  double alpha = 0.0;
  double b = 1.0;

  double value(double r) const;
  double operator()(const Vec2& x) const { return value(x.norm()); }
};

PlaneSolution plane_solution(double K0, double alpha, double b);

/// max over the radial grid of |Δv + 2 K0 r^{2 alpha} e^v| by sixth-order
/// finite differences with a relative step; the grid must avoid the origin
/// when alpha < 0 (and always must stay positive).
double plane_residual(const PlaneSolution& sol, const std::vector<double>& radii);

/// ∫_{B_R} 2 K0 |x|^{2 alpha} e^v by composite Gauss quadrature on geometric
/// radial panels.
double plane_total_mass(const PlaneSolution& sol, double R);

/// Canonical shifted solution of the half-plane problem with beta = 0:
/// V0(s,t) = log 4 / (1 + K0 (s^2 + (t + h0/K0)^2))^2, which satisfies
/// -ΔV0 = 2 K0 e^{V0} and ∂ν V0 = 2 h0 e^{V0/2} on t = 0.
struct HalfPlaneSolution {
  double K0 = 1.0;
  double h0 = 0.0;

  double value(double s, double t) const;
  double operator()(const Vec2& x) const { return value(x.x, x.y); }
};

HalfPlaneSolution halfplane_solution(double K0, double h0);

/// (interior, neumann) residuals: max |ΔV0 + 2 K0 e^{V0}| over the grid and
/// max |∂ν V0 - 2 h0 e^{V0/2}| over the boundary samples.
std::pair<double, double> halfplane_residual(const HalfPlaneSolution& sol,
                                             const std::vector<Vec2>& grid,
                                             const std::vector<double>& boundary_s);

/// Bounded solution of the linearized half-plane system for h0 < 0:
/// Z0(s,t) = 2t / (1 + K0(s^2 + (t + h0/K0)^2)) - 1/h0, which satisfies
///   -ΔZ0 = 2 K0 e^{V0} (Z0 + h0/K0 + 1/h0),   ∂ν Z0 = h0 e^{V0/2} Z0,
/// with the lower bound 0 < -1/h0 <= Z0.
struct LinearizedWitness {
  double K0 = 1.0;
  double h0 = -1.0;

  double value(double s, double t) const;
};

/// (interior, boundary) residuals of the displayed linear system for Z0.
std::pair<double, double> z0_residual(double K0, double h0, const std::vector<Vec2>& grid,
                                      const std::vector<double>& boundary_s);

/// Test field with an analytic gradient, compactly supported.
struct TestField {
  std::function<double(const Vec2&)> value;
  std::function<Vec2(const Vec2&)> gradient;
  double support_radius = 1.0;
};

/// A limit problem for quadratic-form work: the potential data of Q_v.
struct LimitProblem {
  enum class Domain { plane, halfplane };
  Domain domain = Domain::plane;
  double K0 = 1.0;
  double alpha = 0.0;  // weight |x|^{2 alpha} (plane only)
  double h0 = 0.0;     // boundary coefficient (halfplane only)
  std::function<double(const Vec2&)> v;
};

LimitProblem as_limit_problem(const PlaneSolution& sol);
LimitProblem as_limit_problem(const HalfPlaneSolution& sol);
/// Manufactured infinite-mass field e^v = 1 / (1 + |x|^2) on the plane.
LimitProblem heavy_tail_problem(double K0 = 1.0);

/// Q_v[phi, phi] = ∫ (|∇phi|^2 - 2 K0 |x|^{2 alpha} e^v phi^2), with the
/// boundary term - ∮ h0 e^{v/2} phi^2 in the half-plane case. Composite Gauss
/// quadrature on geometric radial panels over the support.
double quadratic_form_Q(const LimitProblem& prob, const TestField& phi);

enum class WitnessKind { log_cap_R, annulus_M, boundary_hz };

struct WitnessResult {
  TestField field;
  double Q_value = 0.0;
  bool certified = false;
  double parameter = 0.0;  // first R (resp. M) with Q < 0, or the cap
};

struct WitnessParams {
  double R0 = 2.0;        // initial radius for log_cap_R / boundary_hz
  double M0 = 10.0;       // inner radius for annulus_M
  double cap = 1e6;       // doubling stops here
};

/// Builds the named instability witness and doubles its parameter until
/// Q < 0 or the cap is reached (certified = false then, reported not thrown).
WitnessResult instability_witness(const LimitProblem& prob, WitnessKind kind,
                                  const WitnessParams& params = {});

/// The smoothstep cap eta(s) = 3 s^2 - 2 s^3 clamped to [0, 1].
double smoothstep(double s);
double smoothstep_deriv(double s);

}  // namespace liouville
