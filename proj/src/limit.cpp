#include "liouville/limit.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace liouville {

namespace {

constexpr double kPi = std::numbers::pi;

// Sixth-order central first/second derivative stencils.
template <typename F>
double d1_6(const F& f, double x, double h) {
  return (-f(x - 3 * h) + 9 * f(x - 2 * h) - 45 * f(x - h) + 45 * f(x + h) - 9 * f(x + 2 * h) +
          f(x + 3 * h)) /
         (60.0 * h);
}

template <typename F>
double d2_6(const F& f, double x, double h) {
  return (2 * f(x - 3 * h) - 27 * f(x - 2 * h) + 270 * f(x - h) - 490 * f(x) + 270 * f(x + h) -
          27 * f(x + 2 * h) + 2 * f(x + 3 * h)) /
         (180.0 * h * h);
}

// 16-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr std::array<double, 8> kGx = {0.09501250983763744, 0.2816035507792589,
                                       0.45801677765722737, 0.6178762444026438,
                                       0.7554044083550030, 0.8656312023878318,
                                       0.9445750230732326, 0.9894009349916499};
constexpr std::array<double, 8> kGw = {0.1894506104550685, 0.1826034150449236,
                                       0.1691565193950025, 0.1495959888165767,
                                       0.1246289712555339, 0.0951585116824928,
                                       0.0622535239386479, 0.0271524594117541};

template <typename F>
double gauss_1d(const F& f, double a, double b) {
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 8; ++i) {
    s += kGw[i] * (f(mid + half * kGx[i]) + f(mid - half * kGx[i]));
  }
  return s * half;
}

// Composite Gauss over geometric radial panels [r_min, r_max].
template <typename F>
double radial_panels(const F& f, double r_min, double r_max) {
  if (!(r_max > r_min)) return 0.0;
  double s = 0.0;
  double a = r_min;
  const double growth = 1.4;
  while (a < r_max) {
    double b = std::min(r_max, a * growth + 1e-30);
    s += gauss_1d(f, a, b);
    a = b;
  }
  return s;
}

}  // namespace

double smoothstep(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * (3.0 - 2.0 * s);
}

double smoothstep_deriv(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return 6.0 * s * (1.0 - s);
}

PlaneSolution plane_solution(double K0, double alpha, double b) {
  if (!(K0 > 0.0) || !(alpha > -1.0) || !(b > 0.0))
    throw PreconditionError("plane solution needs K0 > 0, alpha > -1, b > 0");
  return PlaneSolution{K0, alpha, b};
}

double PlaneSolution::value(double r) const {
  double p = 2.0 * (1.0 + alpha);
  return std::log(4.0 * b * (1.0 + alpha) * (1.0 + alpha) / K0) -
         2.0 * std::log1p(b * std::pow(r, p));
}

double plane_residual(const PlaneSolution& sol, const std::vector<double>& radii) {
  double worst = 0.0;
  auto f = [&](double r) { return sol.value(r); };
  for (double r : radii) {
    if (!(r > 0.0)) throw PreconditionError("plane residual grid must avoid the origin");
    double h = 0.01 * r;
    double lap = d2_6(f, r, h) + d1_6(f, r, h) / r;
    double defect = lap + 2.0 * sol.K0 * std::pow(r, 2.0 * sol.alpha) * std::exp(sol.value(r));
    worst = std::max(worst, std::abs(defect));
  }
  return worst;
}

double plane_total_mass(const PlaneSolution& sol, double R) {
  if (!(R > 0.0)) throw PreconditionError("truncation radius must be positive");
  auto f = [&](double r) {
    return 2.0 * sol.K0 * std::pow(r, 2.0 * sol.alpha) * std::exp(sol.value(r)) * 2.0 * kPi * r;
  };
  double r_min = 1e-9 * std::min(1.0, R);
  return radial_panels(f, r_min, R);
}

HalfPlaneSolution halfplane_solution(double K0, double h0) {
  if (!(K0 > 0.0)) throw PreconditionError("halfplane solution needs K0 > 0");
  return HalfPlaneSolution{K0, h0};
}

double HalfPlaneSolution::value(double s, double t) const {
  double c = h0 / K0;
  double den = 1.0 + K0 * (s * s + (t + c) * (t + c));
  return std::log(4.0) - 2.0 * std::log(den);
}

std::pair<double, double> halfplane_residual(const HalfPlaneSolution& sol,
                                             const std::vector<Vec2>& grid,
                                             const std::vector<double>& boundary_s) {
  double interior = 0.0;
  const double h = 0.01;
  for (const Vec2& q : grid) {
    auto fs = [&](double x) { return sol.value(x, q.y); };
    auto ft = [&](double y) { return sol.value(q.x, y); };
    double lap = d2_6(fs, q.x, h) + d2_6(ft, q.y, h);
    double defect = lap + 2.0 * sol.K0 * std::exp(sol.value(q.x, q.y));
    interior = std::max(interior, std::abs(defect));
  }
  double neumann = 0.0;
  for (double s : boundary_s) {
    auto ft = [&](double y) { return sol.value(s, y); };
    // Outer normal at t = 0 is -e_t; the formula extends smoothly below.
    double dn = -d1_6(ft, 0.0, h);
    double defect = dn - 2.0 * sol.h0 * std::exp(0.5 * sol.value(s, 0.0));
    neumann = std::max(neumann, std::abs(defect));
  }
  return {interior, neumann};
}

double LinearizedWitness::value(double s, double t) const {
  double c = h0 / K0;
  double den = 1.0 + K0 * (s * s + (t + c) * (t + c));
  return 2.0 * t / den - 1.0 / h0;
}

std::pair<double, double> z0_residual(double K0, double h0, const std::vector<Vec2>& grid,
                                      const std::vector<double>& boundary_s) {
  if (!(h0 < 0.0)) throw PreconditionError("Z0 requires h0 < 0");
  LinearizedWitness Z{K0, h0};
  HalfPlaneSolution V{K0, h0};
  const double h = 0.01;
  double interior = 0.0;
  for (const Vec2& q : grid) {
    auto fs = [&](double x) { return Z.value(x, q.y); };
    auto ft = [&](double y) { return Z.value(q.x, y); };
    double lap = d2_6(fs, q.x, h) + d2_6(ft, q.y, h);
    double rhs = 2.0 * K0 * std::exp(V.value(q.x, q.y)) *
                 (Z.value(q.x, q.y) + h0 / K0 + 1.0 / h0);
    interior = std::max(interior, std::abs(-lap - rhs));
  }
  double boundary = 0.0;
  for (double s : boundary_s) {
    auto ft = [&](double y) { return Z.value(s, y); };
    double dn = -d1_6(ft, 0.0, h);
    double rhs = h0 * std::exp(0.5 * V.value(s, 0.0)) * Z.value(s, 0.0);
    boundary = std::max(boundary, std::abs(dn - rhs));
  }
  return {interior, boundary};
}

LimitProblem as_limit_problem(const PlaneSolution& sol) {
  LimitProblem p;
  p.domain = LimitProblem::Domain::plane;
  p.K0 = sol.K0;
  p.alpha = sol.alpha;
  p.v = [sol](const Vec2& x) { return sol(x); };
  return p;
}

LimitProblem as_limit_problem(const HalfPlaneSolution& sol) {
  LimitProblem p;
  p.domain = LimitProblem::Domain::halfplane;
  p.K0 = sol.K0;
  p.h0 = sol.h0;
  p.v = [sol](const Vec2& x) { return sol(x); };
  return p;
}

LimitProblem heavy_tail_problem(double K0) {
  LimitProblem p;
  p.domain = LimitProblem::Domain::plane;
  p.K0 = K0;
  p.alpha = 0.0;
  p.v = [](const Vec2& x) { return -std::log1p(x.squared_norm()); };
  return p;
}

double quadratic_form_Q(const LimitProblem& prob, const TestField& phi) {
  if (!(phi.support_radius > 0.0)) throw PreconditionError("test field needs a support radius");
  const double R = phi.support_radius;
  const bool half = prob.domain == LimitProblem::Domain::halfplane;
  const int n_theta = 96;
  const double theta_max = half ? kPi : 2.0 * kPi;

  auto ring = [&](double r) {
    double s = 0.0;
    for (int i = 0; i < n_theta; ++i) {
      double th = theta_max * (i + 0.5) / n_theta;
      Vec2 x{r * std::cos(th), r * std::sin(th)};
      double val = phi.value(x);
      Vec2 grad = phi.gradient(x);
      double weight = prob.domain == LimitProblem::Domain::plane && prob.alpha != 0.0
                          ? std::pow(r, 2.0 * prob.alpha)
                          : 1.0;
      s += grad.squared_norm() - 2.0 * prob.K0 * weight * std::exp(prob.v(x)) * val * val;
    }
    return s * (theta_max / n_theta) * r;
  };
  double r_min = std::min(1e-8, 1e-8 * R);
  double Q = radial_panels(ring, r_min, R * 1.0000001);

  if (half) {
    auto edge = [&](double s) {
      double tot = 0.0;
      for (double sgn : {-1.0, 1.0}) {
        Vec2 x{sgn * s, 0.0};
        double val = phi.value(x);
        tot += prob.h0 * std::exp(0.5 * prob.v(x)) * val * val;
      }
      return tot;
    };
    Q -= radial_panels(edge, r_min, R * 1.0000001);
  }
  return Q;
}

namespace {

TestField log_cap_field(double R) {
  TestField f;
  double logR = std::log(R);
  f.support_radius = R;
  f.value = [logR](const Vec2& x) {
    double r = x.norm();
    if (r <= 0.0) return 1.0;
    return smoothstep(1.0 - std::log(r) / logR);
  };
  f.gradient = [logR](const Vec2& x) {
    double r = x.norm();
    if (r <= 1.0 || !(r > 0.0)) return Vec2{0.0, 0.0};
    double s = 1.0 - std::log(r) / logR;
    double dds = smoothstep_deriv(s) * (-1.0 / (logR * r));
    return x * (dds / r);
  };
  return f;
}

TestField annulus_field(double M0, double M) {
  TestField f;
  f.support_radius = 2.0 * M;
  const double log2 = std::log(2.0);
  f.value = [=](const Vec2& x) {
    double r = x.norm();
    if (r <= M0 || r >= 2.0 * M) return 0.0;
    double rise = smoothstep(std::log(r / M0) / log2);
    double fall = smoothstep(std::log(2.0 * M / r) / log2);
    return std::min(rise, fall);
  };
  f.gradient = [=](const Vec2& x) {
    double r = x.norm();
    if (r <= M0 || r >= 2.0 * M || !(r > 0.0)) return Vec2{0.0, 0.0};
    double s_rise = std::log(r / M0) / log2;
    double s_fall = std::log(2.0 * M / r) / log2;
    double d = 0.0;
    if (s_rise < s_fall) {
      d = smoothstep_deriv(s_rise) / (log2 * r);
    } else {
      d = -smoothstep_deriv(s_fall) / (log2 * r);
    }
    return x * (d / r);
  };
  return f;
}

TestField boundary_hz_field(double R, double K0, double h0) {
  TestField phi = log_cap_field(R);
  LinearizedWitness Z{K0, h0};
  TestField f;
  f.support_radius = R;
  double c = h0 / K0;
  f.value = [=](const Vec2& x) { return phi.value(x) * Z.value(x.x, x.y); };
  f.gradient = [=](const Vec2& x) {
    double den = 1.0 + K0 * (x.x * x.x + (x.y + c) * (x.y + c));
    double zx = -2.0 * x.y * K0 * 2.0 * x.x / (den * den);
    double zy = 2.0 / den - 2.0 * x.y * K0 * 2.0 * (x.y + c) / (den * den);
    double z = Z.value(x.x, x.y);
    Vec2 gphi = phi.gradient(x);
    return Vec2{gphi.x * z + phi.value(x) * zx, gphi.y * z + phi.value(x) * zy};
  };
  return f;
}

}  // namespace

WitnessResult instability_witness(const LimitProblem& prob, WitnessKind kind,
                                  const WitnessParams& params) {
  if (!(params.R0 > 1.0) || !(params.M0 > 0.0) || !(params.cap > 0.0))
    throw PreconditionError("witness parameters must be positive (R0 > 1)");
  if (kind == WitnessKind::boundary_hz) {
    if (prob.domain != LimitProblem::Domain::halfplane || !(prob.h0 < 0.0))
      throw PreconditionError("boundary_hz witness needs a half-plane problem with h0 < 0");
  }
  WitnessResult res;
  double param = kind == WitnessKind::annulus_M ? 2.0 * params.M0 : params.R0;
  while (param <= params.cap) {
    TestField f;
    switch (kind) {
      case WitnessKind::log_cap_R: f = log_cap_field(param); break;
      case WitnessKind::annulus_M: f = annulus_field(params.M0, param); break;
      case WitnessKind::boundary_hz: f = boundary_hz_field(param, prob.K0, prob.h0); break;
    }
    double Q = quadratic_form_Q(prob, f);
    res.field = f;
    res.Q_value = Q;
    res.parameter = param;
    if (Q < 0.0) {
      res.certified = true;
      return res;
    }
    param *= 2.0;
  }
  res.certified = false;
  return res;
}

}  // namespace liouville
