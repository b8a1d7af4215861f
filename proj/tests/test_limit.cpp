#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "liouville/limit.hpp"
#include "test_util.hpp"

using namespace liouville;

namespace {
constexpr double kPi = std::numbers::pi;

std::vector<double> radial_grid() {
  std::vector<double> r;
  for (double x = 0.1; x <= 10.0; x *= 1.23) r.push_back(x);
  return r;
}

std::vector<Vec2> halfplane_grid() {
  std::vector<Vec2> g;
  for (double s = -10.0; s <= 10.0; s += 0.8) {
    for (double t : {0.01, 0.05, 0.2, 1.0, 3.0, 10.0}) g.push_back({s, t});
  }
  return g;
}

std::vector<double> boundary_samples() {
  std::vector<double> b;
  for (double s = -10.0; s <= 10.0; s += 0.4) b.push_back(s);
  return b;
}

}  // namespace

TEST_CASE("plane solution: value, residual, truncated mass") {
  PlaneSolution sol = plane_solution(1.0, 0.0, 1.0);
  CHECK(sol.value(0.0) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
  CHECK(plane_residual(sol, radial_grid()) < 1e-8);

  for (double alpha : {0.0, -0.5, 0.25}) {
    PlaneSolution s = plane_solution(1.0, alpha, 1.0);
    CHECK(plane_residual(s, radial_grid()) < 1e-8);
    double m = plane_total_mass(s, 1e4);
    double target = 8.0 * kPi * (1.0 + alpha);
    CHECK(std::abs(m - target) <= 1e-3 * target);
  }

  CHECK_THROWS_AS(plane_residual(plane_solution(1.0, -0.5, 1.0), {0.0, 1.0}), PreconditionError);
  CHECK_THROWS_AS(plane_solution(1.0, -1.5, 1.0), PreconditionError);
}

TEST_CASE("plane mass is monotone in R and settles") {
  PlaneSolution sol = plane_solution(1.0, 0.0, 1.0);
  double prev = 0.0;
  for (double R : {1.0, 10.0, 100.0, 1000.0}) {
    double m = plane_total_mass(sol, R);
    CHECK(m > prev);
    prev = m;
  }
  // Tail between R = 1e3 and 1e4 is the analytic 8 pi (1e-6 - 1e-8) gap.
  double gap = plane_total_mass(sol, 1e4) - plane_total_mass(sol, 1e3);
  CHECK(gap > 0.0);
  CHECK(gap < 1e-4);
}

TEST_CASE("half-plane solution: residuals for all h0 signs, plane case at h0 = 0") {
  for (double h0 : {-1.0, 0.0, 1.0}) {
    HalfPlaneSolution sol = halfplane_solution(1.0, h0);
    auto [ri, rn] = halfplane_residual(sol, halfplane_grid(), boundary_samples());
    CHECK(ri < 1e-8);
    CHECK(rn < 1e-8);
  }
  // h0 = 0 restricts the plane bubble to the half-plane.
  HalfPlaneSolution sym = halfplane_solution(1.0, 0.0);
  PlaneSolution plane = plane_solution(1.0, 0.0, 1.0);
  for (double s : {0.0, 0.5, 2.0}) {
    for (double t : {0.0, 1.0, 3.0}) {
      CHECK(sym.value(s, t) ==
            doctest::Approx(plane.value(std::hypot(s, t))).epsilon(1e-14));
    }
  }
}

TEST_CASE("Z0 witness: residuals of the linear system and lower bound") {
  auto [zi, zb] = z0_residual(1.0, -1.0, halfplane_grid(), boundary_samples());
  CHECK(zi < 1e-8);
  CHECK(zb < 1e-8);

  LinearizedWitness Z{1.0, -1.0};
  for (const Vec2& q : halfplane_grid()) {
    CHECK(Z.value(q.x, q.y) >= 1.0 - 1e-12);  // -1/h0 = 1
  }
  CHECK_THROWS_AS(z0_residual(1.0, 0.5, halfplane_grid(), boundary_samples()),
                  PreconditionError);
}

TEST_CASE("quadratic form: zero field, homogeneity, negative on the cap") {
  PlaneSolution sol = plane_solution(1.0, 0.0, 1.0);
  LimitProblem prob = as_limit_problem(sol);

  TestField zero;
  zero.support_radius = 4.0;
  zero.value = [](const Vec2&) { return 0.0; };
  zero.gradient = [](const Vec2&) { return Vec2{0.0, 0.0}; };
  CHECK(quadratic_form_Q(prob, zero) == 0.0);

  TestField cap;
  cap.support_radius = 3.0;
  cap.value = [](const Vec2& x) { return smoothstep(1.0 - std::log(x.norm()) / std::log(3.0)); };
  cap.gradient = [](const Vec2& x) {
    double r = x.norm();
    if (r <= 1.0 || r >= 3.0) return Vec2{0.0, 0.0};
    double dds = smoothstep_deriv(1.0 - std::log(r) / std::log(3.0)) * (-1.0 / (std::log(3.0) * r));
    return x * (dds / r);
  };
  double q1 = quadratic_form_Q(prob, cap);
  CHECK(q1 < 0.0);  // the smooth cap on B_1 is already unstable for b = 1

  TestField cap2 = cap;
  cap2.value = [&cap](const Vec2& x) { return 2.0 * cap.value(x); };
  cap2.gradient = [&cap](const Vec2& x) { return cap.gradient(x) * 2.0; };
  double q2 = quadratic_form_Q(prob, cap2);
  CHECK(q2 == doctest::Approx(4.0 * q1).epsilon(1e-10));
}

TEST_CASE("instability witnesses: certification pattern of Theorem-level claims") {
  // log_cap certifies every canonical finite-mass solution.
  for (double alpha : {0.0, -0.5, 0.25}) {
    auto w = instability_witness(as_limit_problem(plane_solution(1.0, alpha, 1.0)),
                                 WitnessKind::log_cap_R);
    CHECK(w.certified);
    CHECK(w.Q_value < 0.0);
    CHECK(w.parameter <= 1e6);
  }
  for (double h0 : {-1.0, 0.0, 1.0}) {
    auto w = instability_witness(as_limit_problem(halfplane_solution(1.0, h0)),
                                 WitnessKind::log_cap_R);
    CHECK(w.certified);
    CHECK(w.parameter <= 1e6);
  }

  // The annulus witness cannot certify a finite-mass solution ...
  auto ann = instability_witness(as_limit_problem(plane_solution(1.0, 0.0, 1.0)),
                                 WitnessKind::annulus_M);
  CHECK_FALSE(ann.certified);
  // ... but certifies the manufactured heavy tail.
  auto heavy = instability_witness(heavy_tail_problem(), WitnessKind::annulus_M);
  CHECK(heavy.certified);
  CHECK(heavy.parameter <= 1e6);

  // The boundary witness built from Z0 certifies the h0 < 0 half-plane case.
  auto hz = instability_witness(as_limit_problem(halfplane_solution(1.0, -1.0)),
                                WitnessKind::boundary_hz);
  CHECK(hz.certified);
  CHECK(hz.Q_value < 0.0);

  CHECK_THROWS_AS(instability_witness(as_limit_problem(halfplane_solution(1.0, 1.0)),
                                      WitnessKind::boundary_hz),
                  PreconditionError);
}
