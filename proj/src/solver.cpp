#include "liouville/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <unordered_map>

namespace liouville {

void SymmetryGroup::validate(const TriangleMesh& mesh) const {
  if (order < 2) throw PreconditionError("symmetry order must be >= 2");
  if (static_cast<int>(action.size()) != mesh.num_vertices())
    throw PreconditionError("symmetry action size mismatch");
  // Permutation, and generator^order = identity.
  std::vector<int> p(action);
  std::vector<char> seen(p.size(), 0);
  for (int v : p) {
    if (v < 0 || v >= static_cast<int>(p.size()) || seen[v]) throw PreconditionError("action is not a permutation");
    seen[v] = 1;
  }
  std::vector<int> pk(p.size());
  for (size_t i = 0; i < p.size(); ++i) pk[i] = static_cast<int>(i);
  for (int k = 0; k < order; ++k) {
    for (size_t i = 0; i < p.size(); ++i) pk[i] = p[pk[i]];
  }
  // pk is now generator^(order), applied pointwise.
  for (size_t i = 0; i < p.size(); ++i) {
    if (pk[i] != static_cast<int>(i)) throw PreconditionError("generator^order is not the identity");
  }
  // Triangles map to triangles.
  std::set<std::array<int, 3>> tris;
  auto canon = [](std::array<int, 3> t) {
    // Rotate the cyclic order so the smallest index comes first.
    int k = 0;
    for (int i = 1; i < 3; ++i) {
      if (t[i] < t[k]) k = i;
    }
    return std::array<int, 3>{t[k], t[(k + 1) % 3], t[(k + 2) % 3]};
  };
  for (const auto& tri : mesh.triangles) tris.insert(canon(tri));
  for (const auto& tri : mesh.triangles) {
    if (!tris.count(canon({action[tri[0]], action[tri[1]], action[tri[2]]})))
      throw PreconditionError("action is not a mesh automorphism");
  }
  for (int v : fixed_set) {
    if (mesh.vertex_is_boundary[v]) throw PreconditionError("fixed set touches the boundary");
  }
}

SymmetryGroup make_rotation_group(const TriangleMesh& mesh, int order) {
  if (order < 2) throw PreconditionError("symmetry order must be >= 2");
  SymmetryGroup G;
  G.order = order;
  G.action.resize(mesh.num_vertices());
  double c = std::cos(2.0 * std::numbers::pi / order);
  double s = std::sin(2.0 * std::numbers::pi / order);

  // Bucket vertices for the nearest-point queries.
  double h = mesh.max_edge_length();
  std::unordered_map<long long, std::vector<int>> grid;
  auto cell = [h](const Vec2& p) {
    long long ix = static_cast<long long>(std::floor(p.x / h));
    long long iy = static_cast<long long>(std::floor(p.y / h));
    return (ix << 32) ^ (iy & 0xffffffffLL);
  };
  for (int v = 0; v < mesh.num_vertices(); ++v) grid[cell(mesh.vertices[v])].push_back(v);

  std::vector<double> local_h(mesh.num_vertices(), std::numeric_limits<double>::infinity());
  for (const auto& tri : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      int a = tri[k], b = tri[(k + 1) % 3];
      double len = dist(mesh.vertices[a], mesh.vertices[b]);
      local_h[a] = std::min(local_h[a], len);
      local_h[b] = std::min(local_h[b], len);
    }
  }

  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Vec2& p = mesh.vertices[v];
    Vec2 q{c * p.x - s * p.y, s * p.x + c * p.y};
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    long long qx = static_cast<long long>(std::floor(q.x / h));
    long long qy = static_cast<long long>(std::floor(q.y / h));
    for (long long dx = -1; dx <= 1; ++dx) {
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = grid.find(((qx + dx) << 32) ^ ((qy + dy) & 0xffffffffLL));
        if (it == grid.end()) continue;
        for (int w : it->second) {
          double d = (mesh.vertices[w] - q).squared_norm();
          if (d < best_d) {
            best_d = d;
            best = w;
          }
        }
      }
    }
    if (best < 0 || std::sqrt(best_d) > 1e-6 * local_h[v])
      throw PreconditionError("mesh is not rotationally symmetric of the requested order");
    G.action[v] = best;
    if (best == v) G.fixed_set.push_back(v);
  }
  G.validate(mesh);
  return G;
}

namespace {

VertexField group_average_unchecked(const VertexField& u, const SymmetryGroup& G) {
  VertexField avg = u;
  VertexField cur = u;
  for (int k = 1; k < G.order; ++k) {
    VertexField next(u.size());
    for (int v = 0; v < u.size(); ++v) next[G.action[v]] = cur[v];
    avg += next;
    cur = next;
  }
  return avg / G.order;
}

}  // namespace

VertexField group_average(const VertexField& u, const SymmetryGroup& G, const TriangleMesh& mesh) {
  G.validate(mesh);
  if (u.size() != mesh.num_vertices()) throw PreconditionError("field size mismatch");
  return group_average_unchecked(u, G);
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::diverging_energy: return "diverging_energy";
    case SolveStatus::left_admissible: return "left_admissible";
    case SolveStatus::iteration_cap: return "iteration_cap";
  }
  return "?";
}

namespace {

bool state_admissible(const VertexField& u, const Problem& prob) {
  double s = u.maxCoeff();
  double Abar = prob.wK.dot((u.array() - s).exp().matrix());
  double Bbar = prob.wh.dot((0.5 * (u.array() - s)).exp().matrix());
  return admissible(Abar, Bbar, prob.params.lambda);
}

}  // namespace

SolveReport minimize(const Problem& prob, const NeumannSolver& lap, const SolveOptions& options,
                     const SymmetryGroup* G) {
  const double lambda = prob.params.lambda;
  if (G) G->validate(prob.mesh);
  VertexField u = VertexField::Zero(prob.mesh.num_vertices());
  if (options.initial) {
    u = *options.initial;
    prob.fem.project_mean_zero(u);
  }
  if (G) u = group_average_unchecked(u, *G);
  if (!state_admissible(u, prob)) {
    if (options.initial) {
      SolveReport rep;
      rep.status = SolveStatus::left_admissible;
      rep.state.u = u;
      return rep;
    }
    throw PreconditionError("initial state u = 0 is not admissible; provide a seed");
  }

  double floor_drop = options.divergence_floor > 0.0
                          ? options.divergence_floor
                          : 50.0 * std::max(1.0, std::abs(lambda)) * std::log(options.lambda_cap);
  double energy = energy_J(u, prob);
  const double energy_floor = energy - floor_drop;

  SolveReport rep;
  rep.lambda = lambda;
  rep.mu = prob.params.mu;
  double step = options.step0;
  int it = 0;
  int stalled = 0;
  double stall_gn = std::numeric_limits<double>::infinity();
  VertexField u_prev;
  Eigen::VectorXd r_prev;
  for (; it < options.max_iter; ++it) {
    Eigen::VectorXd r = derivative_J(u, prob);
    VertexField d = lap.solve_load(r);
    if (G) d = group_average_unchecked(d, *G);
    double slope = r.dot(d);  // |grad|^2 in the H1 metric
    rep.gradient_norm = std::sqrt(std::max(0.0, slope));
    // Barzilai-Borwein trial step for the preconditioned iteration; Armijo
    // still guards it. Helps the nearly neutral concentration modes.
    if (u_prev.size() == u.size()) {
      Eigen::VectorXd s = u - u_prev;
      double sy = s.dot(r - r_prev);
      double sKs = s.dot(prob.fem.stiffness * s) * prob.params.mu;
      if (sy > 0.0 && sKs > 0.0) {
        step = std::min(std::max(sKs / sy, 1e-3 * options.step0), 1e4 * options.step0);
      }
    }
    u_prev = u;
    r_prev = r;
    if (options.monitor) options.monitor(it, energy, rep.gradient_norm);
    if (rep.gradient_norm < options.tol_grad) {
      rep.status = SolveStatus::converged;
      break;
    }

    // Armijo backtracking with a rounding guard: once the predicted decrease
    // falls below the fp resolution of the energy, a step that keeps the
    // energy within that resolution still counts (the gradient contraction of
    // the preconditioned iteration carries the convergence from there).
    double slack = 16.0 * std::numeric_limits<double>::epsilon() *
                   (std::abs(energy) + 0.5 * std::abs(prob.params.mu) * u.dot(prob.fem.stiffness * u) + 1.0);
    double t = step;
    int halvings = 0;
    bool accepted = false;
    bool saw_inadmissible = false;
    while (halvings < 40) {
      VertexField trial = u - t * d;
      prob.fem.project_mean_zero(trial);
      if (state_admissible(trial, prob)) {
        double trial_energy = energy_J(trial, prob);
        if (trial_energy <= energy - options.armijo_c * t * slope + slack) {
          u = trial;
          energy = std::min(energy, trial_energy);
          accepted = true;
          break;
        }
      } else {
        saw_inadmissible = true;
      }
      t *= 0.5;
      ++halvings;
    }
    if (!accepted) {
      rep.status = saw_inadmissible ? SolveStatus::left_admissible : SolveStatus::iteration_cap;
      break;
    }
    if (energy < energy_floor) {
      rep.status = SolveStatus::diverging_energy;
      ++it;
      break;
    }
    // Stall safeguard: stop when the slack-gated phase no longer shrinks the
    // gradient.
    if (halvings >= 40 - 1) {
      ++stalled;
    } else if (options.armijo_c * t * slope > slack) {
      stalled = 0;
      stall_gn = std::numeric_limits<double>::infinity();
    }
    if (stalled == 1) stall_gn = rep.gradient_norm;
    if (stalled >= 60) {
      if (rep.gradient_norm > 0.5 * stall_gn) {
        rep.status = SolveStatus::iteration_cap;
        ++it;
        break;
      }
      stalled = 0;
      stall_gn = rep.gradient_norm;
    }
  }
  if (it >= options.max_iter) rep.status = SolveStatus::iteration_cap;

  rep.iterations = it;
  rep.state = make_state(u, prob);
  rep.energy = energy_J(u, prob);
  rep.max_u = u.maxCoeff();
  if (state_admissible(u, prob)) {
    rep.C_value = normalization(rep.state.A, rep.state.B, lambda).C;
    auto [ri, rb] = pde_residual(u, prob);
    rep.pde_residual_interior = ri;
    rep.pde_residual_boundary = rb;
    if (rep.status == SolveStatus::converged &&
        (ri > options.tol_pde || rb > options.tol_pde)) {
      rep.status = SolveStatus::iteration_cap;
    }
  }
  return rep;
}

std::pair<double, double> pde_residual(const VertexField& u, const Problem& prob) {
  Eigen::VectorXd r = derivative_J(u, prob);
  Eigen::VectorXd r_int = Eigen::VectorXd::Zero(r.size());
  Eigen::VectorXd r_bdy = Eigen::VectorXd::Zero(r.size());
  for (int v = 0; v < prob.mesh.num_vertices(); ++v) {
    (prob.mesh.vertex_is_boundary[v] ? r_bdy[v] : r_int[v]) = r[v];
  }
  SparseSym KM = prob.fem.stiffness + prob.fem.mass;
  Eigen::SimplicialLDLT<SparseSym> ldlt(KM);
  if (ldlt.info() != Eigen::Success) throw NumericalError("residual norm factorization failed");
  double scale = 1.0 + std::abs(prob.params.lambda) +
                 std::sqrt(std::max(0.0, u.dot(prob.fem.stiffness * u)));
  auto dual = [&](const Eigen::VectorXd& f) {
    return std::sqrt(std::max(0.0, f.dot(ldlt.solve(f)))) / scale;
  };
  return {dual(r_int), dual(r_bdy)};
}

std::vector<SolveReport> lambda_sweep(const TriangleMesh& mesh, const FemOperators& fem,
                                      const CurvatureData& data, const NeumannSolver& lap,
                                      const std::vector<double>& lambda_grid, double mu,
                                      const SweepOptions& options) {
  if (!std::is_sorted(lambda_grid.begin(), lambda_grid.end()))
    throw PreconditionError("lambda grid must be sorted");
  std::vector<SolveReport> reports;
  std::optional<VertexField> warm;
  for (double lambda : lambda_grid) {
    Problem prob(mesh, fem, data, EnergyParams{lambda, mu});
    SolveOptions opt = options.solve;
    if (options.warm_start && warm) opt.initial = warm;
    SolveReport rep;
    try {
      rep = minimize(prob, lap, opt);
    } catch (const PreconditionError&) {
      rep.status = SolveStatus::left_admissible;
      rep.state.u = VertexField::Zero(mesh.num_vertices());
    }
    rep.lambda = lambda;
    rep.gamma_dist = gamma_distance(lambda, data.sing);
    if (rep.state.u.size() == mesh.num_vertices()) {
      rep.max_u = rep.state.u.maxCoeff();
      if (options.concentration) {
        auto [frac, pt] = options.concentration(rep.state.u);
        rep.concentration_fraction = frac;
        rep.concentration_point = pt;
      }
      if (options.warm_start && rep.status == SolveStatus::converged) warm = rep.state.u;
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

std::vector<SolveReport> solve_perturbed(const TriangleMesh& mesh, const FemOperators& fem,
                                         const CurvatureData& data, const NeumannSolver& lap,
                                         double lambda, const std::vector<double>& mu_list,
                                         const SolveOptions& options) {
  for (double mu : mu_list) {
    if (mu < 0.9 || mu > 1.1) throw PreconditionError("mu must lie in [0.9, 1.1]");
  }
  std::vector<SolveReport> reports;
  for (double mu : mu_list) {
    Problem prob(mesh, fem, data, EnergyParams{lambda, mu});
    reports.push_back(minimize(prob, lap, options));
  }
  return reports;
}

}  // namespace liouville
