#include "liouville/runner.hpp"

#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <numbers>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace liouville {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// chi and tau print with one decimal minimum ("0.5", "1.0").
std::string fmt_short(double v) {
  char buf[40];
  if (v == std::floor(v) && std::abs(v) < 1e6) {
    std::snprintf(buf, sizeof buf, "%.1f", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.6g", v);
  }
  return buf;
}

std::string header_comment(const ScenarioConfig& cfg) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "# liouville %s config=%016" PRIx64, tool_version(),
                cfg.config_hash);
  return buf;
}

void write_json_report(const std::string& path, const ScenarioConfig& cfg,
                       const nlohmann::json& body) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open report file for writing: " + path);
  out << header_comment(cfg) << "\n" << body.dump(2) << "\n";
}

VertexField evaluate_vertex_family(const CurvatureFamily& fam, const TriangleMesh& mesh) {
  VertexField f(mesh.num_vertices());
  if (fam.is_table()) {
    std::ifstream in(fam.table_path());
    if (!in) throw ConfigError("cannot open curvature table: " + fam.table_path());
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      if (!(in >> f[v])) throw ConfigError("curvature table too short: " + fam.table_path());
    }
    return f;
  }
  for (int v = 0; v < mesh.num_vertices(); ++v) f[v] = fam.evaluate(mesh.vertices[v]);
  return f;
}

BoundaryField evaluate_boundary_family(const CurvatureFamily& fam, const TriangleMesh& mesh) {
  BoundaryField f(mesh.num_boundary_vertices());
  if (fam.is_table()) {
    std::ifstream in(fam.table_path());
    if (!in) throw ConfigError("cannot open curvature table: " + fam.table_path());
    for (int i = 0; i < mesh.num_boundary_vertices(); ++i) {
      if (!(in >> f[i])) throw ConfigError("curvature table too short: " + fam.table_path());
    }
    return f;
  }
  for (int i = 0; i < mesh.num_boundary_vertices(); ++i)
    f[i] = fam.evaluate(mesh.vertices[mesh.boundary_order[i]]);
  return f;
}

nlohmann::json report_json(const SolveReport& rep) {
  nlohmann::json j;
  j["status"] = to_string(rep.status);
  j["lambda"] = rep.lambda;
  j["mu"] = rep.mu;
  j["energy"] = rep.energy;
  j["gradient_norm"] = rep.gradient_norm;
  j["pde_residual_interior"] = rep.pde_residual_interior;
  j["pde_residual_boundary"] = rep.pde_residual_boundary;
  j["C_value"] = rep.C_value;
  j["iterations"] = rep.iterations;
  j["max_u"] = rep.max_u;
  j["mass_A"] = rep.state.A;
  j["mass_B"] = rep.state.B;
  j["gamma_distance"] = rep.gamma_dist;
  j["concentration_fraction"] = rep.concentration_fraction;
  return j;
}

}  // namespace

const char* tool_version() { return "0.1.0"; }

SolveOptions Scenario::solve_options() const {
  SolveOptions opt;
  opt.tol_grad = cfg.tol_grad;
  opt.tol_pde = cfg.tol_pde;
  opt.max_iter = cfg.max_iter;
  opt.step0 = cfg.step0;
  opt.armijo_c = cfg.armijo_c;
  if (cfg.divergence_floor > 0.0) opt.divergence_floor = cfg.divergence_floor;
  return opt;
}

Scenario build_scenario(const ScenarioConfig& cfg) {
  Scenario sc;
  sc.cfg = cfg;

  MeshBuildOptions mopt;
  for (const auto& p : cfg.interior) mopt.include_points.push_back(p.point);
  for (const auto& p : cfg.corners) mopt.include_points.push_back(p.point);
  if (!cfg.seed_bubble.empty()) mopt.include_points.push_back({cfg.seed_bubble[1], cfg.seed_bubble[2]});
  for (const auto& p : cfg.extra_include_points) mopt.include_points.push_back(p);
  if (cfg.grade_h_min > 0.0) mopt.grade_h_min = cfg.grade_h_min;
  mopt.grade_ratio = cfg.grade_ratio;
  mopt.symmetry_order = std::max(1, cfg.symmetry_order);

  if (cfg.surface_kind == "disc") {
    sc.mesh = build_disc_mesh(cfg.radius, cfg.refinement, mopt);
  } else if (cfg.surface_kind == "annulus") {
    sc.mesh = build_annulus_mesh(cfg.r_inner, cfg.r_outer, cfg.refinement, mopt);
  } else {
    sc.mesh = read_mesh2d(cfg.mesh_path);
  }
  sc.mesh.validate();

  sc.fem = assemble(sc.mesh);
  sc.lap = std::make_unique<NeumannSolver>(
      sc.mesh, sc.fem,
      cfg.linear_solver == "cg" ? LinearSolverKind::cg : LinearSolverKind::direct);

  for (const auto& p : cfg.interior) {
    int v = sc.mesh.nearest_vertex(p.point);
    if (dist(sc.mesh.vertices[v], p.point) > 1e-9)
      throw ConfigError("conical point was not captured as a mesh vertex");
    sc.sing.interior.push_back({v, p.order});
  }
  for (const auto& p : cfg.corners) {
    int v = sc.mesh.nearest_vertex(p.point, true);
    if (dist(sc.mesh.vertices[v], p.point) > 1e-9)
      throw ConfigError("corner point was not captured as a boundary vertex");
    sc.sing.corners.push_back({v, p.order});
  }
  sc.sing.validate(sc.mesh);

  VertexField K = evaluate_vertex_family(cfg.K, sc.mesh);
  BoundaryField h = evaluate_boundary_family(cfg.h, sc.mesh);
  sc.data = desingularize(K, h, sc.sing, sc.mesh, *sc.lap);

  sc.chi = singular_chi(sc.mesh, sc.sing);
  sc.tau = trudinger_tau(sc.sing);
  sc.classification = classify_surface(sc.chi, sc.tau);
  sc.lambda = cfg.lambda_geometric ? 4.0 * kPi * sc.chi : cfg.lambda;
  return sc;
}

int run_info(const ScenarioConfig& cfg, const std::string& out_dir, std::ostream& out) {
  Scenario sc = build_scenario(cfg);
  out << "classification=" << to_string(sc.classification) << " chi=" << fmt_short(sc.chi)
      << " tau=" << fmt_short(sc.tau) << "\n";
  out << "lambda=" << fmt17(sc.lambda) << " gamma_distance=" << fmt17(gamma_distance(sc.lambda, sc.sing))
      << "\n";
  auto gams = gamma_set(sc.sing, std::max(sc.lambda + 4.0 * kPi, 16.0 * kPi));
  out << "gamma_set:";
  for (double g : gams) out << " " << fmt17(g);
  out << "\n";
  HypothesisReport hyp = classify_hypotheses(sc.data, sc.mesh, sc.fem, cfg.symmetry_order);
  out << "h_chi_nonempty=" << (hyp.h_chi_nonempty ? "true" : "false") << "\n";
  for (const auto& s : hyp.satisfied) out << "hypothesis: " << s << "\n";

  nlohmann::json j;
  j["name"] = cfg.name;
  j["chi"] = sc.chi;
  j["tau"] = sc.tau;
  j["classification"] = to_string(sc.classification);
  j["lambda"] = sc.lambda;
  j["gamma_set"] = gams;
  j["h_chi_nonempty"] = hyp.h_chi_nonempty;
  j["hypotheses"] = hyp.satisfied;
  j["vertices"] = sc.mesh.num_vertices();
  j["triangles"] = sc.mesh.num_triangles();
  j["euler_characteristic"] = euler_characteristic(sc.mesh);
  std::filesystem::create_directories(out_dir);
  write_json_report(out_dir + "/info_" + cfg.name + ".json", cfg, j);
  return 0;
}

namespace {

std::optional<VertexField> bubble_seed(const Scenario& sc) {
  if (sc.cfg.seed_bubble.empty()) return std::nullopt;
  Barycenter sigma;
  sigma.atoms.push_back({1.0, {sc.cfg.seed_bubble[1], sc.cfg.seed_bubble[2]}});
  return bubble(sigma, sc.cfg.seed_bubble[0], sc.mesh, sc.fem);
}

bool interior_mass_positive(const VertexField& u, const Scenario& sc) {
  double s = u.maxCoeff();
  Eigen::VectorXd w = sc.fem.lumped_area.cwiseProduct(sc.data.K_tilde);
  return w.dot((u.array() - s).exp().matrix()) > 0.0;
}

}  // namespace

int run_solve(const ScenarioConfig& cfg, const std::string& out_dir, std::ostream& out,
              uint64_t seed) {
  auto t0 = std::chrono::steady_clock::now();
  Scenario sc = build_scenario(cfg);
  Problem prob(sc.mesh, sc.fem, sc.data, EnergyParams{sc.lambda, cfg.mu});
  SolveOptions opt = sc.solve_options();
  opt.initial = bubble_seed(sc);

  std::unique_ptr<SymmetryGroup> G;
  if (cfg.symmetry_order >= 2) {
    G = std::make_unique<SymmetryGroup>(make_rotation_group(sc.mesh, cfg.symmetry_order));
  }
  SolveReport rep = minimize(prob, *sc.lap, opt, G.get());
  rep.gamma_dist = gamma_distance(sc.lambda, sc.sing);

  nlohmann::json j = report_json(rep);
  if (!cfg.mu_list.empty()) {
    // Perturbed solves expose the monotone structure of mu -> inf J_{lambda,mu}.
    auto mu_reps = solve_perturbed(sc.mesh, sc.fem, sc.data, *sc.lap, sc.lambda, cfg.mu_list, opt);
    nlohmann::json rows = nlohmann::json::array();
    for (size_t i = 0; i < mu_reps.size(); ++i) {
      nlohmann::json row = report_json(mu_reps[i]);
      row["mu"] = cfg.mu_list[i];
      rows.push_back(row);
    }
    j["mu_sweep"] = rows;
  }
  j["name"] = cfg.name;
  j["chi"] = sc.chi;
  j["tau"] = sc.tau;
  j["classification"] = to_string(sc.classification);
  if (rep.status == SolveStatus::converged) {
    j["gauss_bonnet_residual"] = gauss_bonnet_residual(rep.state.u, prob, sc.chi);
    MorseIndexResult mi = morse_index(rep.state.u, prob, MorseKind::mean_field, 20, 1e-8, seed);
    MorseIndexResult md = morse_index(rep.state.u, prob, MorseKind::direct, 20, 1e-8, seed);
    j["morse_index_mean_field"] = mi.index;
    j["morse_index_direct"] = md.index;
    // The blow-up diagnostic applies to states with a positive K~ e^u measure.
    if (interior_mass_positive(rep.state.u, sc)) {
      auto conc = concentration_points(rep.state.u, sc.data, sc.mesh, sc.fem,
                                       cfg.concentration_k, cfg.concentration_r, 0.1);
      j["concentration_fraction"] = conc.captured_fraction;
    }
  }
  j["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::filesystem::create_directories(out_dir);
  write_json_report(out_dir + "/solve_" + cfg.name + ".json", cfg, j);
  out << "status=" << to_string(rep.status) << " energy=" << fmt17(rep.energy)
      << " gradient_norm=" << fmt17(rep.gradient_norm) << "\n";
  return rep.status == SolveStatus::converged ? 0 : 3;
}

int run_sweep(const ScenarioConfig& cfg, const std::string& out_dir, std::ostream& out,
              uint64_t seed, int threads) {
  (void)seed;
  auto t0 = std::chrono::steady_clock::now();
  Scenario sc = build_scenario(cfg);
  if (cfg.lambda_grid.empty()) throw ConfigError("sweep requires lambda_grid");

  SweepOptions sopt;
  sopt.solve = sc.solve_options();
  sopt.warm_start = cfg.warm_start;
  sopt.concentration_radius = cfg.concentration_r;
  sopt.concentration = [&](const VertexField& u) {
    if (!interior_mass_positive(u, sc)) return std::make_pair(0.0, Vec2{0.0, 0.0});
    auto conc = concentration_points(u, sc.data, sc.mesh, sc.fem, 1, cfg.concentration_r, 0.1);
    return std::make_pair(conc.captured_fraction, conc.points.at(0));
  };

  std::vector<SolveReport> reports;
  if (!cfg.warm_start && threads > 1) {
    // Independent cold-started points solve concurrently.
    reports.resize(cfg.lambda_grid.size());
    std::vector<std::future<void>> futs;
    std::atomic<size_t> next{0};
    int nt = std::min<int>(threads, static_cast<int>(cfg.lambda_grid.size()));
    for (int t = 0; t < nt; ++t) {
      futs.push_back(std::async(std::launch::async, [&]() {
        for (size_t i = next.fetch_add(1); i < cfg.lambda_grid.size(); i = next.fetch_add(1)) {
          auto one = lambda_sweep(sc.mesh, sc.fem, sc.data, *sc.lap, {cfg.lambda_grid[i]},
                                  cfg.mu, sopt);
          reports[i] = one.at(0);
        }
      }));
    }
    for (auto& f : futs) f.get();
  } else {
    reports = lambda_sweep(sc.mesh, sc.fem, sc.data, *sc.lap, cfg.lambda_grid, cfg.mu, sopt);
  }

  std::filesystem::create_directories(out_dir);
  std::string csv_path = out_dir + "/sweep_" + cfg.name + ".csv";
  std::ofstream csv(csv_path);
  csv << header_comment(cfg) << "\n";
  csv << "lambda,status,energy,gradient_norm,pde_residual_interior,pde_residual_boundary,"
         "C_value,iterations,max_u,gamma_distance,concentration_fraction,conc_x,conc_y\n";
  int failures = 0;
  for (const auto& rep : reports) {
    if (rep.status != SolveStatus::converged) ++failures;
    csv << fmt17(rep.lambda) << ',' << to_string(rep.status) << ',' << fmt17(rep.energy) << ','
        << fmt17(rep.gradient_norm) << ',' << fmt17(rep.pde_residual_interior) << ','
        << fmt17(rep.pde_residual_boundary) << ',' << fmt17(rep.C_value) << ','
        << rep.iterations << ',' << fmt17(rep.max_u) << ',' << fmt17(rep.gamma_dist) << ','
        << fmt17(rep.concentration_fraction) << ',' << fmt17(rep.concentration_point.x) << ','
        << fmt17(rep.concentration_point.y) << '\n';
  }
  nlohmann::json j;
  j["name"] = cfg.name;
  j["points"] = reports.size();
  j["failures"] = failures;
  j["csv"] = csv_path;
  j["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_json_report(out_dir + "/sweep_" + cfg.name + ".json", cfg, j);
  out << "sweep points=" << reports.size() << " failures=" << failures << "\n";
  return 0;
}

int run_bubbles(const ScenarioConfig& cfg, const std::string& out_dir, std::ostream& out) {
  ScenarioConfig boosted = cfg;
  if (boosted.bubble_lambdas.empty()) throw ConfigError("bubbles requires lambda_list");
  if (boosted.grade_h_min <= 0.0) boosted.grade_h_min = 0.15 / boosted.bubble_lambdas.back();
  boosted.grade_ratio = std::min(boosted.grade_ratio, 0.15);
  boosted.extra_include_points.push_back(boosted.bubble_atom);
  Scenario sc = build_scenario(boosted);

  Barycenter sigma;
  sigma.atoms.push_back({1.0, boosted.bubble_atom});
  BubbleSlopes slopes = bubble_slopes(sigma, boosted.bubble_lambdas, sc.data, sc.mesh, sc.fem);

  nlohmann::json j;
  j["name"] = cfg.name;
  j["dirichlet_slope"] = slopes.dirichlet;
  j["interior_mass_slope"] = slopes.interior_mass;
  j["boundary_mass_slope"] = slopes.boundary_mass;
  j["excluded"] = slopes.excluded;
  j["lambdas_used"] = slopes.lambdas_used;
  if (cfg.bubble_test_lambda != 0.0) {
    std::vector<double> energies;
    for (double L : slopes.lambdas_used) {
      energies.push_back(
          test_function_energy(sigma, L, cfg.bubble_test_lambda, sc.data, sc.mesh, sc.fem));
    }
    j["test_energies"] = energies;
  }
  std::filesystem::create_directories(out_dir);
  write_json_report(out_dir + "/bubbles_" + cfg.name + ".json", cfg, j);
  out << "dirichlet_slope=" << fmt17(slopes.dirichlet)
      << " interior_mass_slope=" << fmt17(slopes.interior_mass)
      << " boundary_mass_slope=" << fmt17(slopes.boundary_mass) << " excluded=" << slopes.excluded
      << "\n";
  return 0;
}

int run_limit(const ScenarioConfig& cfg, const std::string& out_dir, std::ostream& out) {
  nlohmann::json j;
  j["name"] = cfg.name;
  std::vector<double> radii;
  for (double r = 0.1; r <= 10.0; r *= 1.25) radii.push_back(r);
  std::vector<Vec2> grid;
  for (double s = -10.0; s <= 10.0; s += 1.0) {
    for (double t = 0.01; t <= 10.0; t *= 2.5) grid.push_back({s, t});
  }
  std::vector<double> bdry;
  for (double s = -10.0; s <= 10.0; s += 0.5) bdry.push_back(s);

  nlohmann::json planes = nlohmann::json::array();
  for (double alpha : cfg.limit_alpha) {
    PlaneSolution sol = plane_solution(cfg.limit_K0, alpha, cfg.limit_b);
    nlohmann::json row;
    row["alpha"] = alpha;
    row["residual"] = plane_residual(sol, radii);
    row["total_mass"] = plane_total_mass(sol, cfg.limit_R);
    row["mass_target"] = 8.0 * kPi * (1.0 + alpha);
    auto witness = instability_witness(as_limit_problem(sol), WitnessKind::log_cap_R);
    row["log_cap_certified"] = witness.certified;
    row["log_cap_R"] = witness.parameter;
    row["log_cap_Q"] = witness.Q_value;
    auto ann = instability_witness(as_limit_problem(sol), WitnessKind::annulus_M);
    row["annulus_certified"] = ann.certified;
    planes.push_back(row);
  }
  j["plane"] = planes;

  nlohmann::json halves = nlohmann::json::array();
  for (double h0 : cfg.limit_h0) {
    HalfPlaneSolution sol = halfplane_solution(cfg.limit_K0, h0);
    nlohmann::json row;
    row["h0"] = h0;
    auto [ri, rn] = halfplane_residual(sol, grid, bdry);
    row["interior_residual"] = ri;
    row["neumann_residual"] = rn;
    auto witness = instability_witness(
        as_limit_problem(sol),
        h0 < 0.0 ? WitnessKind::boundary_hz : WitnessKind::log_cap_R);
    row["witness_kind"] = h0 < 0.0 ? "boundary_hz" : "log_cap_R";
    row["witness_certified"] = witness.certified;
    row["witness_Q"] = witness.Q_value;
    if (h0 < 0.0) {
      auto [zi, zb] = z0_residual(cfg.limit_K0, h0, grid, bdry);
      row["z0_interior_residual"] = zi;
      row["z0_boundary_residual"] = zb;
    }
    halves.push_back(row);
  }
  j["halfplane"] = halves;

  auto heavy = instability_witness(heavy_tail_problem(cfg.limit_K0), WitnessKind::annulus_M);
  j["heavy_tail_annulus_certified"] = heavy.certified;
  j["heavy_tail_annulus_M"] = heavy.parameter;

  std::filesystem::create_directories(out_dir);
  write_json_report(out_dir + "/limit_" + cfg.name + ".json", cfg, j);
  out << "plane and halfplane residual checks written\n";
  return 0;
}

int run_probe(const ScenarioConfig& cfg, const std::string& out_dir, std::ostream& out) {
  ScenarioConfig boosted = cfg;
  if (boosted.probe_lambdas.empty()) throw ConfigError("probe requires lambda_list");
  if (boosted.grade_h_min <= 0.0) boosted.grade_h_min = 0.15 / boosted.probe_lambdas.back();
  boosted.grade_ratio = std::min(boosted.grade_ratio, 0.15);
  boosted.extra_include_points.push_back(boosted.probe_atom);
  Scenario sc = build_scenario(boosted);
  TmFamilySpec family;
  family.sigma.atoms.push_back({1.0, cfg.probe_atom});
  family.Lambda_list = cfg.probe_lambdas;
  family.alpha = cfg.probe_alpha;
  TmProbeKind kind = TmProbeKind::boundary;
  if (cfg.probe_which == "interior") kind = TmProbeKind::interior;
  else if (cfg.probe_which == "combined") kind = TmProbeKind::combined;
  else if (cfg.probe_which != "boundary") throw ConfigError("probe which must be interior|boundary|combined");

  TmProbeReport rep = tm_probe(sc.data, sc.mesh, sc.fem, family, kind, sc.lambda);
  nlohmann::json j;
  j["name"] = cfg.name;
  j["which"] = cfg.probe_which;
  j["ratio"] = rep.ratio;
  j["within_bound"] = rep.within_bound;
  j["per_lambda"] = rep.per_lambda;
  std::filesystem::create_directories(out_dir);
  write_json_report(out_dir + "/probe_" + cfg.name + ".json", cfg, j);
  out << "ratio=" << fmt17(rep.ratio) << " within_bound=" << (rep.within_bound ? "true" : "false")
      << "\n";
  return 0;
}

}  // namespace liouville
