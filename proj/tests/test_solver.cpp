#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "liouville/asymptotics.hpp"
#include "liouville/diagnostics.hpp"
#include "test_util.hpp"

using namespace liouville;

namespace {
constexpr double kPi = std::numbers::pi;

struct Scene {
  TriangleMesh mesh;
  FemOperators fem;
  std::unique_ptr<NeumannSolver> lap;
  CurvatureData data;

  Scene(TriangleMesh m, double Kc, double hc, std::vector<std::pair<Vec2, double>> alphas = {})
      : mesh(std::move(m)) {
    fem = assemble(mesh);
    lap = std::make_unique<NeumannSolver>(mesh, fem);
    SingularStructure sing;
    for (auto& [p, a] : alphas) sing.interior.push_back({mesh.nearest_vertex(p), a});
    data = desingularize(VertexField::Constant(mesh.num_vertices(), Kc),
                         BoundaryField::Constant(mesh.num_boundary_vertices(), hc), sing, mesh,
                         *lap);
  }
};

Scene subcritical_disc(int refinement) {
  MeshBuildOptions opts;
  opts.include_points = {{0.0, 0.0}};
  return Scene(build_disc_mesh(1.0, refinement, opts), 1.0, 0.0, {{{0.0, 0.0}, -0.5}});
}

}  // namespace

TEST_CASE("group average: fixed points, idempotence, orbit indicator") {
  TriangleMesh mesh = build_disc_mesh(1.0, 3);
  SymmetryGroup G = make_rotation_group(mesh, 6);
  CHECK(G.fixed_set.size() == 1);  // only the center

  // Symmetric input returned unchanged.
  VertexField radial(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) radial[v] = mesh.vertices[v].squared_norm();
  VertexField avg = group_average(radial, G, mesh);
  CHECK((avg - radial).cwiseAbs().maxCoeff() < 1e-14);

  TestRng rng(9);
  VertexField u(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) u[v] = rng.uniform(-1.0, 1.0);
  VertexField once = group_average(u, G, mesh);
  VertexField twice = group_average(once, G, mesh);
  CHECK((twice - once).cwiseAbs().maxCoeff() < 1e-13);

  // Indicator of a free-orbit vertex averages to 1/k on the orbit.
  int free_vertex = mesh.num_vertices() - 1;
  VertexField ind = VertexField::Zero(mesh.num_vertices());
  ind[free_vertex] = 1.0;
  VertexField spread = group_average(ind, G, mesh);
  int nonzero = 0;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (spread[v] != 0.0) {
      ++nonzero;
      CHECK(spread[v] == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    }
  }
  CHECK(nonzero == 6);

  // Corrupted action is rejected.
  SymmetryGroup bad = G;
  std::swap(bad.action[1], bad.action[2]);
  CHECK_THROWS_AS(group_average(u, bad, mesh), PreconditionError);
}

TEST_CASE("minimize: subcritical disc pipeline") {
  Scene sc = subcritical_disc(4);
  double chi = 0.5;
  Problem prob(sc.mesh, sc.fem, sc.data, {4.0 * kPi * chi, 1.0});
  SolveOptions opt;
  opt.tol_grad = 1e-9;
  SolveReport rep = minimize(prob, *sc.lap, opt);
  REQUIRE(rep.status == SolveStatus::converged);
  CHECK(rep.gradient_norm < 1e-9);
  CHECK(rep.pde_residual_interior < 1e-6);
  CHECK(rep.pde_residual_boundary < 1e-6);
  CHECK(gauss_bonnet_residual(rep.state.u, prob, chi) < 1e-6);
  CHECK(morse_index(rep.state.u, prob, MorseKind::mean_field).index == 0);
  CHECK(std::abs(sc.fem.mean(rep.state.u)) < 1e-12);
}

TEST_CASE("hessian of J is nonnegative on the lowest modes at a minimizer") {
  Scene sc = subcritical_disc(4);
  Problem prob(sc.mesh, sc.fem, sc.data, {2.0 * kPi, 1.0});
  SolveOptions opt;
  opt.tol_grad = 1e-9;
  SolveReport rep = minimize(prob, *sc.lap, opt);
  REQUIRE(rep.status == SolveStatus::converged);
  SymOperator H = hessian_J(rep.state.u, prob);
  auto pairs = smallest_eigenpairs(H, sc.fem.mass, sc.fem.lumped_area, 10, EigSubspace::mean_zero);
  for (const auto& pr : pairs) {
    double norm2 = pr.field.dot(sc.fem.mass * pr.field);
    CHECK(hessian_form(H, pr.field, pr.field) >= -1e-8 * norm2);
  }
}

TEST_CASE("minimize: chi = 0 annulus with D = 1/2") {
  Scene sc(build_annulus_mesh(0.5, 1.0, 4), -1.0, 0.5);
  Problem prob(sc.mesh, sc.fem, sc.data, {0.0, 1.0});
  SolveOptions opt;
  opt.tol_grad = 1e-9;
  SolveReport rep = minimize(prob, *sc.lap, opt);
  REQUIRE(rep.status == SolveStatus::converged);
  CHECK(rep.pde_residual_interior < 1e-6);
  CHECK(gauss_bonnet_residual(rep.state.u, prob, 0.0) < 1e-6);
}

TEST_CASE("minimize: corner singularity pipeline on the annulus") {
  // One corner of order beta = 1 on the outer circle: chi = 0 + 1/2 = 1/2,
  // tau = 1, subcritical with K = 1, h = 0.
  TriangleMesh mesh = build_annulus_mesh(0.5, 1.0, 4);
  FemOperators fem = assemble(mesh);
  NeumannSolver lap(mesh, fem);
  SingularStructure sing;
  sing.corners.push_back({mesh.nearest_vertex({1.0, 0.0}, true), 1.0});
  CurvatureData data = desingularize(VertexField::Ones(mesh.num_vertices()),
                                     BoundaryField::Zero(mesh.num_boundary_vertices()), sing,
                                     mesh, lap);
  double chi = singular_chi(mesh, sing);
  CHECK(chi == doctest::Approx(0.5));
  CHECK(trudinger_tau(sing) == doctest::Approx(1.0));
  Problem prob(mesh, fem, data, {4.0 * kPi * chi, 1.0});
  SolveOptions opt;
  opt.tol_grad = 1e-9;
  SolveReport rep = minimize(prob, lap, opt);
  REQUIRE(rep.status == SolveStatus::converged);
  CHECK(gauss_bonnet_residual(rep.state.u, prob, chi) < 1e-6);
  CHECK(morse_index(rep.state.u, prob, MorseKind::mean_field).index == 0);
}

TEST_CASE("minimize: negative-chi pipeline on a twice-punched disc") {
  TriangleMesh mesh = build_disc_mesh(1.0, 5);
  mesh = punch_hole(mesh, {0.45, 0.0}, 0.18);
  mesh = punch_hole(mesh, {-0.45, 0.0}, 0.18);
  REQUIRE(euler_characteristic(mesh) == -1);
  FemOperators fem = assemble(mesh);
  NeumannSolver lap(mesh, fem);
  CurvatureData data =
      raw_curvature(VertexField::Constant(mesh.num_vertices(), -1.0),
                    BoundaryField::Constant(mesh.num_boundary_vertices(), 0.5));
  double chi = -1.0;
  Problem prob(mesh, fem, data, {4.0 * kPi * chi, 1.0});
  SolveOptions opt;
  opt.tol_grad = 1e-9;
  SolveReport rep = minimize(prob, lap, opt);
  REQUIRE(rep.status == SolveStatus::converged);
  CHECK(rep.pde_residual_interior < 1e-6);
  CHECK(gauss_bonnet_residual(rep.state.u, prob, chi) < 1e-6);
}

TEST_CASE("minimize: descent accepts only energy-decreasing steps") {
  Scene sc = subcritical_disc(3);
  Problem prob(sc.mesh, sc.fem, sc.data, {2.0 * kPi, 1.0});
  SolveOptions opt;
  opt.tol_grad = 1e-9;
  std::vector<double> energies;
  opt.monitor = [&](int, double e, double) { energies.push_back(e); };
  SolveReport rep = minimize(prob, *sc.lap, opt);
  REQUIRE(rep.status == SolveStatus::converged);
  REQUIRE(energies.size() > 3);
  for (size_t i = 1; i < energies.size(); ++i) {
    double slack = 64.0 * std::numeric_limits<double>::epsilon() *
                   (std::abs(energies[i - 1]) + 100.0);
    CHECK(energies[i] <= energies[i - 1] + slack);
  }
}

TEST_CASE("minimize: bubble seed at lambda = 10 pi diverges") {
  MeshBuildOptions opts;
  Vec2 atom{1.0, 0.0};
  opts.include_points = {atom};
  opts.grade_h_min = 1e-5;
  opts.grade_ratio = 0.15;
  Scene sc(build_disc_mesh(1.0, 4, opts), 1.0, 0.0);

  Barycenter sigma;
  sigma.atoms.push_back({1.0, atom});
  SolveOptions opt;
  opt.initial = bubble(sigma, 1e3, sc.mesh, sc.fem);
  opt.divergence_floor = 30.0;
  Problem prob(sc.mesh, sc.fem, sc.data, {10.0 * kPi, 1.0});
  SolveReport rep = minimize(prob, *sc.lap, opt);
  CHECK(rep.status == SolveStatus::diverging_energy);
}

TEST_CASE("pde residual: smallness at critical points and relabeling invariance") {
  Scene sc = subcritical_disc(3);
  Problem prob(sc.mesh, sc.fem, sc.data, {2.0 * kPi, 1.0});
  SolveOptions opt;
  opt.tol_grad = 1e-10;
  SolveReport rep = minimize(prob, *sc.lap, opt);
  REQUIRE(rep.status == SolveStatus::converged);
  auto [ri, rb] = pde_residual(rep.state.u, prob);
  CHECK(ri < 1e-8);
  CHECK(rb < 1e-8);

  // Relabel the mesh and map the state and data along.
  std::vector<int> perm(sc.mesh.num_vertices());
  for (int v = 0; v < sc.mesh.num_vertices(); ++v) perm[v] = (v + 101) % sc.mesh.num_vertices();
  TriangleMesh mesh2 = relabel_vertices(sc.mesh, perm);
  FemOperators fem2 = assemble(mesh2);
  CurvatureData data2;
  data2.K_raw.resize(mesh2.num_vertices());
  data2.K_tilde.resize(mesh2.num_vertices());
  VertexField u2(mesh2.num_vertices());
  for (int v = 0; v < sc.mesh.num_vertices(); ++v) {
    data2.K_raw[perm[v]] = sc.data.K_raw[v];
    data2.K_tilde[perm[v]] = sc.data.K_tilde[v];
    u2[perm[v]] = rep.state.u[v];
  }
  data2.h_raw = BoundaryField::Zero(mesh2.num_boundary_vertices());
  data2.h_tilde = data2.h_raw;
  for (int i = 0; i < sc.mesh.num_boundary_vertices(); ++i) {
    int v2 = perm[sc.mesh.boundary_order[i]];
    data2.h_tilde[mesh2.vertex_to_boundary[v2]] = sc.data.h_tilde[i];
    data2.h_raw[mesh2.vertex_to_boundary[v2]] = sc.data.h_raw[i];
  }
  Problem prob2(mesh2, fem2, data2, {2.0 * kPi, 1.0});
  auto [ri2, rb2] = pde_residual(u2, prob2);
  CHECK(std::abs(ri2 - ri) < 1e-12 + 1e-6 * ri);
  CHECK(std::abs(rb2 - rb) < 1e-12 + 1e-6 * rb);
}

TEST_CASE("pde residual at u = 0 matches a from-scratch assembly") {
  Scene sc(build_disc_mesh(1.0, 3), 1.0, 0.25);
  double lambda = 2.0 * kPi;
  Problem prob(sc.mesh, sc.fem, sc.data, {lambda, 1.0});
  VertexField zero = VertexField::Zero(sc.mesh.num_vertices());
  auto [ri, rb] = pde_residual(zero, prob);

  // Independent evaluation of the same dual norms from the definition.
  auto [A, B] = masses(zero, prob);
  double C = normalization(A, B, lambda).C;
  Eigen::VectorXd m = lumped_vertex_areas(sc.mesh);
  Eigen::VectorXd mb = lumped_boundary_lengths(sc.mesh);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(sc.mesh.num_vertices());
  for (int v = 0; v < sc.mesh.num_vertices(); ++v) {
    r[v] = lambda / sc.fem.area * m[v] - 2.0 * C * C * m[v] * sc.data.K_tilde[v];
  }
  for (int i = 0; i < sc.mesh.num_boundary_vertices(); ++i) {
    r[sc.mesh.boundary_order[i]] -= 2.0 * C * mb[i] * sc.data.h_tilde[i];
  }
  Eigen::VectorXd r_int = Eigen::VectorXd::Zero(r.size()), r_bdy = Eigen::VectorXd::Zero(r.size());
  for (int v = 0; v < sc.mesh.num_vertices(); ++v) {
    (sc.mesh.vertex_is_boundary[v] ? r_bdy[v] : r_int[v]) = r[v];
  }
  SparseSym KM = sc.fem.stiffness + sc.fem.mass;
  Eigen::SimplicialLDLT<SparseSym> ldlt(KM);
  double scale = 1.0 + std::abs(lambda);
  double ri_expect = std::sqrt(r_int.dot(ldlt.solve(r_int))) / scale;
  double rb_expect = std::sqrt(r_bdy.dot(ldlt.solve(r_bdy))) / scale;
  CHECK(ri == doctest::Approx(ri_expect).epsilon(1e-10));
  CHECK(rb == doctest::Approx(rb_expect).epsilon(1e-10));
}

TEST_CASE("lambda sweep: subcritical grid converges, empty grid is empty") {
  Scene sc = subcritical_disc(4);
  SweepOptions sw;
  sw.solve.tol_grad = 1e-8;
  auto empty = lambda_sweep(sc.mesh, sc.fem, sc.data, *sc.lap, {}, 1.0, sw);
  CHECK(empty.empty());

  std::vector<double> grid{kPi, 1.5 * kPi, 2.0 * kPi, 2.5 * kPi, 3.0 * kPi};
  auto reps = lambda_sweep(sc.mesh, sc.fem, sc.data, *sc.lap, grid, 1.0, sw);
  REQUIRE(reps.size() == grid.size());
  for (const auto& rep : reps) {
    CHECK(rep.status == SolveStatus::converged);
    CHECK(rep.gamma_dist >= kPi - 1e-12);
  }

  // Warm-started and cold-started agree where both converge.
  SweepOptions cold = sw;
  cold.warm_start = false;
  auto reps_cold = lambda_sweep(sc.mesh, sc.fem, sc.data, *sc.lap, grid, 1.0, cold);
  for (size_t i = 0; i < reps.size(); ++i) {
    CHECK(std::abs(reps[i].energy - reps_cold[i].energy) < 1e-7 * (1.0 + std::abs(reps[i].energy)));
  }
}

TEST_CASE("perturbed solves: mu = 1 reproduces minimize, energies monotone in mu") {
  Scene sc = subcritical_disc(4);
  double lambda = 2.0 * kPi;
  SolveOptions opt;
  opt.tol_grad = 1e-9;
  Problem prob(sc.mesh, sc.fem, sc.data, {lambda, 1.0});
  SolveReport base = minimize(prob, *sc.lap, opt);
  REQUIRE(base.status == SolveStatus::converged);

  auto reps = solve_perturbed(sc.mesh, sc.fem, sc.data, *sc.lap, lambda, {0.95, 1.0, 1.05}, opt);
  REQUIRE(reps.size() == 3);
  for (const auto& rep : reps) CHECK(rep.status == SolveStatus::converged);
  CHECK(std::abs(reps[1].energy - base.energy) < 1e-10 * (1.0 + std::abs(base.energy)));
  CHECK(reps[0].energy <= reps[1].energy + 1e-10);
  CHECK(reps[1].energy <= reps[2].energy + 1e-10);

  // For fixed u, J_{lambda,mu} is affine in mu with slope (1/2) ∫ |∇u|^2.
  TestRng rng(77);
  VertexField u(sc.mesh.num_vertices());
  for (int v = 0; v < sc.mesh.num_vertices(); ++v) u[v] = rng.uniform(-0.5, 0.5);
  sc.fem.project_mean_zero(u);
  Problem p95(sc.mesh, sc.fem, sc.data, {lambda, 0.95});
  Problem p105(sc.mesh, sc.fem, sc.data, {lambda, 1.05});
  double dirichlet = 0.5 * u.dot(sc.fem.stiffness * u);
  CHECK(energy_J(u, p105) - energy_J(u, p95) ==
        doctest::Approx(0.1 * dirichlet).epsilon(1e-11));

  CHECK_THROWS_AS(
      solve_perturbed(sc.mesh, sc.fem, sc.data, *sc.lap, lambda, {0.5}, opt),
      PreconditionError);
}

TEST_CASE("symmetric minimize on the critical disc") {
  // chi = tau = 1 (no singularities), rotational symmetry of order 2,
  // symmetric constant data.
  MeshBuildOptions opts;
  opts.symmetry_order = 2;
  Scene sc(build_disc_mesh(1.0, 4, opts), 1.0, 0.0);
  SymmetryGroup G = make_rotation_group(sc.mesh, 2);
  double lambda = 4.0 * kPi;  // geometric: chi = 1
  Problem prob(sc.mesh, sc.fem, sc.data, {lambda, 1.0});
  SolveOptions opt;
  opt.tol_grad = 1e-9;
  SolveReport rep = minimize(prob, *sc.lap, opt, &G);
  REQUIRE(rep.status == SolveStatus::converged);
  VertexField avg = group_average(rep.state.u, G, sc.mesh);
  CHECK((rep.state.u - avg).cwiseAbs().maxCoeff() < 1e-12);
}
