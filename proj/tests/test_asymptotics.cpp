#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "liouville/asymptotics.hpp"
#include "liouville/limit.hpp"
#include "test_util.hpp"

using namespace liouville;

namespace {
constexpr double kPi = std::numbers::pi;

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double n = static_cast<double>(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("bubble: formula values, mean zero, radial symmetry") {
  TriangleMesh mesh = build_disc_mesh(1.0, 4);
  FemOperators fem = assemble(mesh);
  double Lambda = 1e3;
  Barycenter sigma;
  sigma.atoms.push_back({1.0, {0.0, 0.0}});
  VertexField u = bubble(sigma, Lambda, mesh, fem);

  // Exactly mean zero in the mesh quadrature.
  CHECK(std::abs(fem.lumped_area.dot(u)) < 1e-10);

  // Raw value at the atom is 2 log Lambda: add the quadrature mean of the raw
  // formula back.
  VertexField raw(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    double d2 = mesh.vertices[v].squared_norm();
    double den = 1.0 + Lambda * Lambda * d2;
    raw[v] = std::log(Lambda * Lambda / (den * den));
  }
  double mean_raw = fem.lumped_area.dot(raw) / fem.area;
  int atom = mesh.nearest_vertex({0.0, 0.0});
  CHECK(u[atom] + mean_raw == doctest::Approx(2.0 * std::log(Lambda)).epsilon(1e-12));

  // Far field: raw ~ -2 log Lambda - 4 log d within 1% at d = 1.
  double far = std::log(Lambda * Lambda / ((1.0 + Lambda * Lambda) * (1.0 + Lambda * Lambda)));
  CHECK(std::abs(far - (-2.0 * std::log(Lambda))) < 0.01 * 2.0 * std::log(Lambda));

  // Radial: vertices on the same ring carry the same value.
  std::map<long, std::pair<double, double>> rings;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    long key = std::lround(mesh.vertices[v].norm() * 1e9);
    auto it = rings.find(key);
    if (it == rings.end()) {
      rings[key] = {u[v], u[v]};
    } else {
      it->second.first = std::min(it->second.first, u[v]);
      it->second.second = std::max(it->second.second, u[v]);
    }
  }
  double worst = 0.0;
  for (auto& [k, mm] : rings) worst = std::max(worst, mm.second - mm.first);
  CHECK(worst < 1e-10);

  CHECK_THROWS_AS(bubble(Barycenter{}, 10.0, mesh, fem), PreconditionError);
  CHECK_THROWS_AS(bubble(sigma, 0.5, mesh, fem), PreconditionError);
}

TEST_CASE("bubble slopes on a graded annulus") {
  Vec2 atom{1.0, 0.0};
  MeshBuildOptions opts;
  opts.include_points = {atom};
  opts.grade_h_min = 0.15 / 1e3;
  opts.grade_ratio = 0.15;
  TriangleMesh mesh = build_annulus_mesh(0.5, 1.0, 4, opts);
  FemOperators fem = assemble(mesh);
  CurvatureData data = raw_curvature(VertexField::Ones(mesh.num_vertices()),
                                     BoundaryField::Ones(mesh.num_boundary_vertices()));
  Barycenter sigma;
  sigma.atoms.push_back({1.0, atom});
  BubbleSlopes s = bubble_slopes(sigma, {1e2, 3e2, 1e3}, data, mesh, fem);
  CHECK(s.excluded == 0);
  CHECK(std::abs(s.dirichlet - 8.0 * kPi) < 0.05 * 8.0 * kPi);
  CHECK(std::abs(s.interior_mass - 2.0) < 0.05 * 2.0);
  CHECK(std::abs(s.boundary_mass - 1.0) < 0.08);

  // Under-resolved Lambdas are excluded from the fit and reported.
  BubbleSlopes s2 = bubble_slopes(sigma, {1e2, 3e2, 1e3, 1e5}, data, mesh, fem);
  CHECK(s2.excluded == 1);
  CHECK(s2.lambdas_used.size() == 3);

  // Too coarse altogether.
  CHECK_THROWS_AS(bubble_slopes(sigma, {1e5, 3e5, 1e6}, data, mesh, fem), PreconditionError);
}

TEST_CASE("test function energy: direct evaluation and measured slope law") {
  Vec2 atom{1.0, 0.0};
  MeshBuildOptions opts;
  opts.include_points = {atom};
  opts.grade_h_min = 0.15 / 1e3;
  opts.grade_ratio = 0.15;
  TriangleMesh mesh = build_annulus_mesh(0.5, 1.0, 4, opts);
  FemOperators fem = assemble(mesh);
  CurvatureData data = raw_curvature(VertexField::Ones(mesh.num_vertices()),
                                     BoundaryField::Ones(mesh.num_boundary_vertices()));
  Barycenter sigma;
  sigma.atoms.push_back({1.0, atom});

  // Lambda = 1 is finite and equals the direct evaluation of J.
  double lambda = 4.0 * kPi;
  Problem prob(mesh, fem, data, {lambda, 1.0});
  VertexField phi1 = bubble(sigma, 1.0, mesh, fem);
  CHECK(test_function_energy(sigma, 1.0, lambda, data, mesh, fem) ==
        doctest::Approx(energy_J(phi1, prob)).epsilon(1e-14));

  // Slopes against log Lambda follow 8 pi - 2 lambda for one boundary atom
  // (measured; the k = 1 boundary bubble carries mass 4 pi, so the sign flips
  // across lambda = 4 pi).
  for (double lam : {2.0 * kPi, 10.0 * kPi}) {
    std::vector<double> xs, ys;
    for (double L : {1e2, 3e2, 1e3}) {
      xs.push_back(std::log(L));
      ys.push_back(test_function_energy(sigma, L, lam, data, mesh, fem));
    }
    double slope = fit_slope(xs, ys);
    double expected = 8.0 * kPi - 2.0 * lam;
    CHECK(std::abs(slope - expected) < 0.1 * std::abs(expected));
  }
}

TEST_CASE("concentration points: bubbles and flat states") {
  MeshBuildOptions opts;
  opts.include_points = {{0.3, 0.0}, {-0.3, 0.0}};
  opts.grade_h_min = 0.002;
  TriangleMesh mesh = build_disc_mesh(1.0, 4, opts);
  FemOperators fem = assemble(mesh);
  CurvatureData data = raw_curvature(VertexField::Ones(mesh.num_vertices()),
                                     BoundaryField::Zero(mesh.num_boundary_vertices()));

  Barycenter one;
  one.atoms.push_back({1.0, {0.3, 0.0}});
  VertexField u1 = bubble(one, 100.0, mesh, fem);
  auto rep1 = concentration_points(u1, data, mesh, fem, 1, 0.2, 0.05);
  CHECK(rep1.captured_fraction >= 0.95);
  CHECK(dist(rep1.points[0], {0.3, 0.0}) < 0.05);

  // Flat state: the best r-ball of a uniform measure holds ~ r^2 of it.
  VertexField zero = VertexField::Zero(mesh.num_vertices());
  auto rep0 = concentration_points(zero, data, mesh, fem, 1, 0.2, 0.05);
  CHECK(std::abs(rep0.captured_fraction - 0.04) < 0.01);

  // Two far-apart equal bubbles.
  Barycenter two;
  two.atoms.push_back({0.5, {0.3, 0.0}});
  two.atoms.push_back({0.5, {-0.3, 0.0}});
  VertexField u2 = bubble(two, 100.0, mesh, fem);
  auto rep2 = concentration_points(u2, data, mesh, fem, 2, 0.2, 0.1);
  CHECK(rep2.captured_fraction >= 0.9);
  auto rep2a = concentration_points(u2, data, mesh, fem, 1, 0.2, 0.1);
  CHECK(rep2a.captured_fraction <= 0.6);
  // More balls never capture less.
  CHECK(rep2.captured_fraction >= rep2a.captured_fraction);

  CurvatureData neg = raw_curvature(VertexField::Constant(mesh.num_vertices(), -1.0),
                                    BoundaryField::Zero(mesh.num_boundary_vertices()));
  CHECK_THROWS_AS(concentration_points(zero, neg, mesh, fem, 1, 0.2, 0.05), PreconditionError);
}

TEST_CASE("local mass: totals, monotonicity, bubble quantization trend") {
  TriangleMesh mesh = build_disc_mesh(1.0, 4);
  FemOperators fem = assemble(mesh);
  CurvatureData data = raw_curvature(VertexField::Ones(mesh.num_vertices()),
                                     BoundaryField::Constant(mesh.num_boundary_vertices(), 0.3));
  Problem prob(mesh, fem, data, {2.0 * kPi, 1.0});
  VertexField zero = VertexField::Zero(mesh.num_vertices());
  auto [A, B] = masses(zero, prob);
  auto [mi, mb] = local_mass(zero, data, mesh, fem, {0.0, 0.0}, 10.0);
  CHECK(mi == doctest::Approx(2.0 * A).epsilon(1e-12));
  CHECK(mb == doctest::Approx(2.0 * B).epsilon(1e-12));

  double prev = 0.0;
  for (double r : {0.2, 0.4, 0.6, 0.8}) {
    auto [m, b] = local_mass(zero, data, mesh, fem, {0.0, 0.0}, r);
    CHECK(m >= prev);
    prev = m;
  }

  // Quantization trend at the atom of the canonical plane profile.
  MeshBuildOptions opts;
  opts.include_points = {{0.0, 0.0}};
  opts.grade_h_min = 0.2 / 1e4;
  opts.grade_ratio = 0.12;
  TriangleMesh gmesh = build_disc_mesh(1.0, 4, opts);
  FemOperators gfem = assemble(gmesh);
  CurvatureData gdata = raw_curvature(VertexField::Ones(gmesh.num_vertices()),
                                      BoundaryField::Zero(gmesh.num_boundary_vertices()));
  std::vector<double> vals;
  for (double L : {10.0, 1e2, 1e3, 1e4}) {
    PlaneSolution sol = plane_solution(1.0, 0.0, L * L);
    VertexField u(gmesh.num_vertices());
    for (int v = 0; v < gmesh.num_vertices(); ++v) u[v] = sol(gmesh.vertices[v]);
    auto [m, b] = local_mass(u, gdata, gmesh, gfem, {0.0, 0.0}, 0.5);
    vals.push_back(m);
  }
  // Monotone approach to 8 pi up to the quadrature floor, final value within 5%.
  CHECK(vals[1] > vals[0]);
  CHECK(vals[2] > vals[1] - 0.005 * 8.0 * kPi);
  CHECK(vals[3] > vals[2] - 0.005 * 8.0 * kPi);
  CHECK(std::abs(vals[3] - 8.0 * kPi) < 0.05 * 8.0 * kPi);
  // Exact-profile check at Lambda = 1e3: within 2% of 8 pi.
  CHECK(std::abs(vals[2] - 8.0 * kPi) < 0.02 * 8.0 * kPi);
}

TEST_CASE("pohozaev residual: closed form at u = 0 and rotation invariance") {
  TriangleMesh mesh = build_disc_mesh(1.0, 5);
  FemOperators fem = assemble(mesh);
  CurvatureData data = raw_curvature(VertexField::Ones(mesh.num_vertices()),
                                     BoundaryField::Zero(mesh.num_boundary_vertices()));
  Problem prob(mesh, fem, data, {2.0 * kPi, 1.0});
  VertexField zero = VertexField::Zero(mesh.num_vertices());
  Vec2 p{0.1, 0.0};
  double res = pohozaev_residual(zero, prob, p, 0.3);
  CHECK(res < 0.02);

  // Rigid rotation of the mesh about p leaves the residual unchanged.
  double theta = 0.37;
  TriangleMesh rot = mesh;
  for (auto& v : rot.vertices) {
    Vec2 d{v.x - p.x, v.y - p.y};
    v = {p.x + std::cos(theta) * d.x - std::sin(theta) * d.y,
         p.y + std::sin(theta) * d.x + std::cos(theta) * d.y};
  }
  rot.finalize();
  FemOperators rfem = assemble(rot);
  CurvatureData rdata = raw_curvature(VertexField::Ones(rot.num_vertices()),
                                      BoundaryField::Zero(rot.num_boundary_vertices()));
  Problem rprob(rot, rfem, rdata, {2.0 * kPi, 1.0});
  double res_rot = pohozaev_residual(zero, rprob, p, 0.3);
  CHECK(std::abs(res_rot - res) < 1e-6);

  // Ball reaching the boundary is rejected.
  CHECK_THROWS_AS(pohozaev_residual(zero, prob, {0.9, 0.0}, 0.3), PreconditionError);
}

TEST_CASE("pohozaev residual at a converged subcritical solution") {
  MeshBuildOptions opts;
  opts.include_points = {{0.0, 0.0}};
  TriangleMesh mesh = build_disc_mesh(1.0, 5, opts);
  FemOperators fem = assemble(mesh);
  NeumannSolver lap(mesh, fem);
  SingularStructure sing;
  sing.interior.push_back({mesh.nearest_vertex({0, 0}), -0.5});
  CurvatureData data = desingularize(VertexField::Ones(mesh.num_vertices()),
                                     BoundaryField::Zero(mesh.num_boundary_vertices()), sing,
                                     mesh, lap);
  Problem prob(mesh, fem, data, {2.0 * kPi, 1.0});
  SolveOptions opt;
  opt.tol_grad = 1e-10;
  SolveReport rep = minimize(prob, lap, opt);
  REQUIRE(rep.status == SolveStatus::converged);
  CHECK(pohozaev_residual(rep.state.u, prob, {0.0, 0.0}, 0.3) < 0.05);
}

TEST_CASE("morse index: minimizer, automorphism invariance, index gap") {
  MeshBuildOptions opts;
  opts.include_points = {{0.0, 0.0}};
  TriangleMesh mesh = build_disc_mesh(1.0, 4, opts);
  FemOperators fem = assemble(mesh);
  NeumannSolver lap(mesh, fem);
  SingularStructure sing;
  sing.interior.push_back({mesh.nearest_vertex({0, 0}), -0.5});
  CurvatureData data = desingularize(VertexField::Ones(mesh.num_vertices()),
                                     BoundaryField::Zero(mesh.num_boundary_vertices()), sing,
                                     mesh, lap);
  Problem prob(mesh, fem, data, {2.0 * kPi, 1.0});
  SolveOptions opt;
  opt.tol_grad = 1e-9;
  SolveReport rep = minimize(prob, lap, opt);
  REQUIRE(rep.status == SolveStatus::converged);
  MorseIndexResult mean = morse_index(rep.state.u, prob, MorseKind::mean_field);
  MorseIndexResult direct = morse_index(rep.state.u, prob, MorseKind::direct);
  CHECK(mean.index == 0);
  CHECK(std::abs(mean.index - direct.index) <= 1);
}

TEST_CASE("morse index is invariant under a mesh automorphism") {
  TriangleMesh mesh = build_disc_mesh(1.0, 3);
  FemOperators fem = assemble(mesh);
  CurvatureData data = raw_curvature(VertexField::Ones(mesh.num_vertices()),
                                     BoundaryField::Constant(mesh.num_boundary_vertices(), 0.4));
  Problem prob(mesh, fem, data, {2.0 * kPi, 1.0});
  SymmetryGroup G = make_rotation_group(mesh, 6);
  TestRng rng(55);
  VertexField u(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) u[v] = rng.uniform(-0.6, 0.6);
  fem.project_mean_zero(u);
  VertexField moved(u.size());
  for (int v = 0; v < u.size(); ++v) moved[G.action[v]] = u[v];
  fem.project_mean_zero(moved);
  MorseIndexResult a = morse_index(u, prob, MorseKind::mean_field);
  MorseIndexResult b = morse_index(moved, prob, MorseKind::mean_field);
  CHECK(a.index == b.index);
}

TEST_CASE("morse index reports a reached cap") {
  // At lambda = 300 the direct-formulation potential 2 C^2 K~ e^u at u = 0
  // pushes more than ten Neumann modes negative.
  TriangleMesh mesh = build_disc_mesh(1.0, 3);
  FemOperators fem = assemble(mesh);
  CurvatureData data = raw_curvature(VertexField::Ones(mesh.num_vertices()),
                                     BoundaryField::Zero(mesh.num_boundary_vertices()));
  Problem prob(mesh, fem, data, {300.0, 1.0});
  VertexField zero = VertexField::Zero(mesh.num_vertices());
  MorseIndexResult res = morse_index(zero, prob, MorseKind::direct, 10);
  CHECK(res.capped);
  CHECK(res.index == 10);
}

TEST_CASE("tm probe: ratios settle under the sharp constants for tall families") {
  // Boundary probe. The additive constant of the inequality contributes
  // ~ 1.6 / log Lambda to the ratio, so the 1.1 band is reached for Lambda
  // beyond ~1e8 (measured); smaller families sit above it.
  MeshBuildOptions opts;
  opts.include_points = {{1.0, 0.0}};
  opts.grade_h_min = 0.15 / 1e10;
  opts.grade_ratio = 0.15;
  TriangleMesh mesh = build_disc_mesh(1.0, 4, opts);
  FemOperators fem = assemble(mesh);
  CurvatureData data = raw_curvature(VertexField::Ones(mesh.num_vertices()),
                                     BoundaryField::Ones(mesh.num_boundary_vertices()));
  TmFamilySpec fam;
  fam.sigma.atoms.push_back({1.0, {1.0, 0.0}});
  fam.Lambda_list = {1e8, 1e9, 1e10};
  TmProbeReport rb = tm_probe(data, mesh, fem, fam, TmProbeKind::boundary);
  CHECK(rb.within_bound);
  CHECK(rb.ratio <= 1.1);
  for (size_t i = 1; i < rb.per_lambda.size(); ++i) CHECK(rb.per_lambda[i] < rb.per_lambda[i - 1]);

  // The generic interior inequality (8 tau pi) is also saturated by
  // boundary-centered bubbles.
  TmProbeReport rint = tm_probe(data, mesh, fem, fam, TmProbeKind::interior);
  CHECK(rint.ratio <= 1.1);
  CHECK(rint.ratio > 0.9);

  // Degenerate family raises.
  TmFamilySpec flat = fam;
  flat.Lambda_list = {1e3, 1e3};
  CHECK_THROWS_AS(tm_probe(data, mesh, fem, flat, TmProbeKind::boundary), PreconditionError);
}
