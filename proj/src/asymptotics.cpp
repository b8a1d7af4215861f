#include "liouville/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace liouville {

namespace {
constexpr double kPi = std::numbers::pi;

void subtract_mean(VertexField& u, const FemOperators& fem) {
  u.array() -= fem.lumped_area.dot(u) / fem.area;
}

// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

void Barycenter::validate() const {
  if (atoms.empty()) throw PreconditionError("barycenter has no atoms");
  double total = 0.0;
  for (const auto& a : atoms) {
    if (a.weight < 0.0) throw PreconditionError("barycenter weights must be nonnegative");
    total += a.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw PreconditionError("barycenter weights must sum to 1");
}

VertexField bubble(const Barycenter& sigma, double Lambda, const TriangleMesh& mesh,
                   const FemOperators& fem) {
  sigma.validate();
  if (!(Lambda >= 1.0)) throw PreconditionError("bubble requires Lambda >= 1");
  VertexField u(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    double s = 0.0;
    for (const auto& a : sigma.atoms) {
      double d2 = (mesh.vertices[v] - a.point).squared_norm();
      double den = 1.0 + Lambda * Lambda * d2;
      s += a.weight * Lambda * Lambda / (den * den);
    }
    u[v] = std::log(s);
  }
  subtract_mean(u, fem);
  return u;
}

VertexField singular_bubble(const Vec2& x0, double alpha, double Lambda, const TriangleMesh& mesh,
                            const FemOperators& fem) {
  if (!(Lambda >= 1.0)) throw PreconditionError("bubble requires Lambda >= 1");
  if (!(alpha > -1.0)) throw PreconditionError("order must satisfy alpha > -1");
  double p = 2.0 * (1.0 + alpha);
  VertexField u(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    double d = dist(mesh.vertices[v], x0);
    u[v] = p * std::log(Lambda) - 2.0 * std::log1p(std::pow(Lambda * d, p));
  }
  subtract_mean(u, fem);
  return u;
}

namespace {

// Raw (not mean-subtracted) bubble and the three Lemma-bubble functionals.
struct BubblePoint {
  double half_dirichlet = 0.0;
  double log_interior = 0.0;
  double log_boundary = 0.0;
};

BubblePoint bubble_functionals(const Barycenter& sigma, double Lambda, const CurvatureData& data,
                               const TriangleMesh& mesh, const FemOperators& fem) {
  VertexField phi = bubble(sigma, Lambda, mesh, fem);
  BubblePoint out;
  out.half_dirichlet = 0.5 * phi.dot(fem.stiffness * phi);
  Eigen::VectorXd wK = fem.lumped_area.cwiseProduct(data.K_tilde);
  double s = phi.maxCoeff();
  double Abar = wK.dot((phi.array() - s).exp().matrix());
  if (!(Abar > 0.0)) throw PreconditionError("interior bubble mass is not positive");
  out.log_interior = std::log(Abar) + s;
  Eigen::VectorXd wh = lift_boundary_field(fem.lumped_boundary.cwiseProduct(data.h_tilde), mesh);
  double Bbar = wh.dot((0.5 * (phi.array() - s)).exp().matrix());
  if (Bbar == 0.0) throw PreconditionError("boundary bubble mass vanishes");
  out.log_boundary = std::log(std::abs(Bbar)) + 0.5 * s;
  return out;
}

}  // namespace

BubbleSlopes bubble_slopes(const Barycenter& sigma, const std::vector<double>& Lambda_list,
                           const CurvatureData& data, const TriangleMesh& mesh,
                           const FemOperators& fem) {
  sigma.validate();
  if (Lambda_list.size() < 3) throw PreconditionError("need at least three Lambda values");
  if (!std::is_sorted(Lambda_list.begin(), Lambda_list.end()))
    throw PreconditionError("Lambda list must be ascending");

  // Local resolution at each atom.
  double atom_h = 0.0;
  for (const auto& a : sigma.atoms) {
    int v = mesh.nearest_vertex(a.point);
    atom_h = std::max(atom_h, mesh.local_edge_length(v));
  }

  BubbleSlopes out;
  std::vector<double> logL, e1, e2, e3;
  for (double Lambda : Lambda_list) {
    if (atom_h > 0.2 / Lambda) {
      ++out.excluded;
      continue;
    }
    BubblePoint p = bubble_functionals(sigma, Lambda, data, mesh, fem);
    logL.push_back(std::log(Lambda));
    e1.push_back(p.half_dirichlet);
    e2.push_back(p.log_interior);
    e3.push_back(p.log_boundary);
    out.lambdas_used.push_back(Lambda);
  }
  if (logL.size() < 3)
    throw PreconditionError("mesh too coarse for the requested Lambda family");
  out.dirichlet = fit_slope(logL, e1);
  out.interior_mass = fit_slope(logL, e2);
  out.boundary_mass = fit_slope(logL, e3);
  return out;
}

double test_function_energy(const Barycenter& sigma, double Lambda, double lambda,
                            const CurvatureData& data, const TriangleMesh& mesh,
                            const FemOperators& fem) {
  VertexField phi = bubble(sigma, Lambda, mesh, fem);
  Problem prob(mesh, fem, data, EnergyParams{lambda, 1.0});
  return energy_J(phi, prob);
}

ConcentrationReport concentration_points(const VertexField& u, const CurvatureData& data,
                                         const TriangleMesh& mesh, const FemOperators& fem,
                                         int k, double r, double eps) {
  if (k < 1 || !(r > 0.0)) throw PreconditionError("concentration needs k >= 1 and r > 0");
  // Vertex measure of K~ e^u, with the overflow shift (the fraction is
  // shift-invariant).
  double s = u.maxCoeff();
  Eigen::VectorXd mass =
      fem.lumped_area.cwiseProduct(data.K_tilde).cwiseProduct((u.array() - s).exp().matrix());
  double total = mass.sum();
  if (!(total > 0.0)) throw PreconditionError("concentration requires positive total mass");

  // Bucket vertices on a grid of cell size r.
  std::unordered_map<long long, std::vector<int>> grid;
  auto cell = [r](const Vec2& p) {
    long long ix = static_cast<long long>(std::floor(p.x / r));
    long long iy = static_cast<long long>(std::floor(p.y / r));
    return (ix << 32) ^ (iy & 0xffffffffLL);
  };
  for (int v = 0; v < mesh.num_vertices(); ++v) grid[cell(mesh.vertices[v])].push_back(v);

  auto ball_sum = [&](int center, const Eigen::VectorXd& w) {
    const Vec2& c = mesh.vertices[center];
    double sum = 0.0;
    long long cx = static_cast<long long>(std::floor(c.x / r));
    long long cy = static_cast<long long>(std::floor(c.y / r));
    for (long long dx = -1; dx <= 1; ++dx) {
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = grid.find(((cx + dx) << 32) ^ ((cy + dy) & 0xffffffffLL));
        if (it == grid.end()) continue;
        for (int v : it->second) {
          if (dist(mesh.vertices[v], c) <= r) sum += w[v];
        }
      }
    }
    return sum;
  };

  ConcentrationReport rep;
  rep.radius = r;
  Eigen::VectorXd remaining = mass;
  double captured = 0.0;
  for (int round = 0; round < k; ++round) {
    int best = -1;
    double best_mass = -std::numeric_limits<double>::infinity();
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      double m = ball_sum(v, remaining);
      if (m > best_mass) {
        best_mass = m;
        best = v;
      }
    }
    rep.points.push_back(mesh.vertices[best]);
    const Vec2& c = mesh.vertices[best];
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      if (dist(mesh.vertices[v], c) <= r) remaining[v] = 0.0;
    }
    captured = total - remaining.sum();
  }
  rep.captured_fraction = captured / total;
  rep.captured = rep.captured_fraction >= 1.0 - eps;
  return rep;
}

std::pair<double, double> local_mass(const VertexField& u, const CurvatureData& data,
                                     const TriangleMesh& mesh, const FemOperators& fem,
                                     const Vec2& p, double r) {
  if (!(r > 0.0)) throw PreconditionError("local_mass radius must be positive");
  double interior = 0.0;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (dist(mesh.vertices[v], p) <= r)
      interior += 2.0 * fem.lumped_area[v] * data.K_tilde[v] * std::exp(u[v]);
  }
  double boundary = 0.0;
  for (int i = 0; i < mesh.num_boundary_vertices(); ++i) {
    int v = mesh.boundary_order[i];
    if (dist(mesh.vertices[v], p) <= r)
      boundary += 2.0 * fem.lumped_boundary[i] * data.h_tilde[i] * std::exp(0.5 * u[v]);
  }
  return {interior, boundary};
}

double pohozaev_residual(const VertexField& u, const Problem& prob, const Vec2& p, double r) {
  const TriangleMesh& mesh = prob.mesh;
  for (int i = 0; i < mesh.num_boundary_vertices(); ++i) {
    if (dist(mesh.vertices[mesh.boundary_order[i]], p) <= r + 1e-12)
      throw PreconditionError("pohozaev ball must stay inside the domain");
  }
  auto [A, B] = masses(u, prob);
  double C = normalization(A, B, prob.params.lambda).C;
  double a0 = prob.params.lambda / prob.fem.area;

  // Effective interior curvature of the state's equation: -Δu + lambda/|Σ| =
  // 2 C^2 K~ e^u. Volume terms use triangle midpoint quadrature of the P1
  // interpolants; the circle terms use arc sampling of the piecewise-constant
  // gradient.
  double lhs = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec2& p0 = mesh.vertices[tri[0]];
    const Vec2& p1 = mesh.vertices[tri[1]];
    const Vec2& p2 = mesh.vertices[tri[2]];
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    for (const Vec2& q : {p0, p1, p2}) {
      double d = dist(q, p);
      rmin = std::min(rmin, d);
      rmax = std::max(rmax, d);
    }
    if (rmin > r) continue;
    double area = mesh.triangle_area(t);
    Vec2 g[3] = {{p1.y - p2.y, p2.x - p1.x}, {p2.y - p0.y, p0.x - p2.x}, {p0.y - p1.y, p1.x - p0.x}};
    Vec2 grad{0.0, 0.0}, gradK{0.0, 0.0};
    double Kv[3], uv[3];
    for (int k = 0; k < 3; ++k) {
      Kv[k] = prob.data.K_tilde[tri[k]];
      uv[k] = u[tri[k]];
      grad = grad + g[k] * (u[tri[k]] / (2.0 * area));
      gradK = gradK + g[k] * (Kv[k] / (2.0 * area));
    }
    auto integrand = [&](const Vec2& q, double uq, double Kq) {
      Vec2 x = q - p;
      double Keff = 2.0 * C * C * Kq;
      double gradKeff_dot = 2.0 * C * C * gradK.dot(x);
      return 2.0 * a0 * grad.dot(x) + 2.0 * (2.0 * Keff + gradKeff_dot) * std::exp(uq);
    };
    // Midpoint rule on sub-triangles; triangles crossing the rim are
    // subdivided three levels deep against the ball indicator.
    struct Sub {
      Vec2 q[3];
      double u[3];
      double K[3];
      int depth;
    };
    std::vector<Sub> stack{{{p0, p1, p2}, {uv[0], uv[1], uv[2]}, {Kv[0], Kv[1], Kv[2]}, 0}};
    while (!stack.empty()) {
      Sub s = stack.back();
      stack.pop_back();
      double din = std::numeric_limits<double>::infinity(), dout = 0.0;
      for (const Vec2& q : s.q) {
        double d = dist(q, p);
        din = std::min(din, d);
        dout = std::max(dout, d);
      }
      if (din > r) continue;
      double sub_area = 0.5 * (s.q[1] - s.q[0]).cross(s.q[2] - s.q[0]);
      bool crosses = dout > r;
      if (crosses && s.depth < 3) {
        Vec2 m01 = (s.q[0] + s.q[1]) * 0.5, m12 = (s.q[1] + s.q[2]) * 0.5,
             m20 = (s.q[2] + s.q[0]) * 0.5;
        double u01 = 0.5 * (s.u[0] + s.u[1]), u12 = 0.5 * (s.u[1] + s.u[2]),
               u20 = 0.5 * (s.u[2] + s.u[0]);
        double K01 = 0.5 * (s.K[0] + s.K[1]), K12 = 0.5 * (s.K[1] + s.K[2]),
               K20 = 0.5 * (s.K[2] + s.K[0]);
        stack.push_back({{s.q[0], m01, m20}, {s.u[0], u01, u20}, {s.K[0], K01, K20}, s.depth + 1});
        stack.push_back({{s.q[1], m12, m01}, {s.u[1], u12, u01}, {s.K[1], K12, K01}, s.depth + 1});
        stack.push_back({{s.q[2], m20, m12}, {s.u[2], u20, u12}, {s.K[2], K20, K12}, s.depth + 1});
        stack.push_back({{m01, m12, m20}, {u01, u12, u20}, {K01, K12, K20}, s.depth + 1});
        continue;
      }
      Vec2 c = (s.q[0] + s.q[1] + s.q[2]) * (1.0 / 3.0);
      if (crosses && dist(c, p) > r) continue;
      Vec2 mids[3] = {(s.q[0] + s.q[1]) * 0.5, (s.q[1] + s.q[2]) * 0.5, (s.q[2] + s.q[0]) * 0.5};
      double um[3] = {0.5 * (s.u[0] + s.u[1]), 0.5 * (s.u[1] + s.u[2]), 0.5 * (s.u[2] + s.u[0])};
      double Km[3] = {0.5 * (s.K[0] + s.K[1]), 0.5 * (s.K[1] + s.K[2]), 0.5 * (s.K[2] + s.K[0])};
      for (int k = 0; k < 3; ++k) lhs += (sub_area / 3.0) * integrand(mids[k], um[k], Km[k]);
    }
  }

  // Boundary terms on the circle |x - p| = r, sampled at fixed angular
  // resolution; each sample uses the containing triangle's P1 data.
  int nsamp = 720;
  double rhs = 0.0;
  // Locate triangles by rejection over all triangles once (build a coarse
  // angular index: for each sample find the triangle containing the point).
  std::vector<Vec2> samples(nsamp);
  for (int i = 0; i < nsamp; ++i) {
    double th = 2.0 * kPi * (i + 0.5) / nsamp;
    samples[i] = {p.x + r * std::cos(th), p.y + r * std::sin(th)};
  }
  std::vector<int> tri_of(nsamp, -1);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec2& p0 = mesh.vertices[tri[0]];
    const Vec2& p1 = mesh.vertices[tri[1]];
    const Vec2& p2 = mesh.vertices[tri[2]];
    double cx = std::min({p0.x, p1.x, p2.x}), cX = std::max({p0.x, p1.x, p2.x});
    double cy = std::min({p0.y, p1.y, p2.y}), cY = std::max({p0.y, p1.y, p2.y});
    // Quick reject triangles far from the circle.
    double dmin = std::hypot(std::max({cx - p.x, p.x - cX, 0.0}), std::max({cy - p.y, p.y - cY, 0.0}));
    double dmax = 0.0;
    for (const Vec2& q : {p0, p1, p2}) dmax = std::max(dmax, dist(q, p));
    if (dmax < r || dmin > r) continue;
    double area2 = 2.0 * mesh.triangle_area(t);
    for (int i = 0; i < nsamp; ++i) {
      if (tri_of[i] >= 0) continue;
      const Vec2& q = samples[i];
      double w0 = (p1 - q).cross(p2 - q) / area2;
      double w1 = (p2 - q).cross(p0 - q) / area2;
      double w2 = (p0 - q).cross(p1 - q) / area2;
      if (w0 >= -1e-12 && w1 >= -1e-12 && w2 >= -1e-12) tri_of[i] = t;
    }
  }
  for (int i = 0; i < nsamp; ++i) {
    if (tri_of[i] < 0) throw NumericalError("pohozaev circle sample not located in the mesh");
    int t = tri_of[i];
    const auto& tri = mesh.triangles[t];
    const Vec2& p0 = mesh.vertices[tri[0]];
    const Vec2& p1 = mesh.vertices[tri[1]];
    const Vec2& p2 = mesh.vertices[tri[2]];
    double area = mesh.triangle_area(t);
    double area2 = 2.0 * area;
    const Vec2& q = samples[i];
    double w0 = (p1 - q).cross(p2 - q) / area2;
    double w1 = (p2 - q).cross(p0 - q) / area2;
    double w2 = (p0 - q).cross(p1 - q) / area2;
    Vec2 g[3] = {{p1.y - p2.y, p2.x - p1.x}, {p2.y - p0.y, p0.x - p2.x}, {p0.y - p1.y, p1.x - p0.x}};
    Vec2 grad{0.0, 0.0};
    for (int k = 0; k < 3; ++k) grad = grad + g[k] * (u[tri[k]] / area2);
    double uq = w0 * u[tri[0]] + w1 * u[tri[1]] + w2 * u[tri[2]];
    double Kq = w0 * prob.data.K_tilde[tri[0]] + w1 * prob.data.K_tilde[tri[1]] +
                w2 * prob.data.K_tilde[tri[2]];
    Vec2 x = q - p;
    Vec2 nu = x * (1.0 / r);
    double xdotnu = x.dot(nu);  // = r
    double Keff = 2.0 * C * C * Kq;
    double ds = 2.0 * kPi * r / nsamp;
    rhs += ds * (2.0 * Keff * std::exp(uq) * xdotnu + 2.0 * grad.dot(x) * grad.dot(nu) -
                 grad.squared_norm() * xdotnu);
  }
  double denom = std::abs(rhs) + 1e-300;
  return std::abs(lhs - rhs) / denom;
}

MorseIndexResult morse_index(const VertexField& u, const Problem& prob, MorseKind kind, int cap,
                             double tol_eig, uint64_t seed) {
  SymOperator H =
      kind == MorseKind::mean_field ? hessian_J(u, prob) : hessian_I_geometric(u, prob);
  // Scale from the Dirichlet part diagonal.
  double scale = 0.0;
  for (int i = 0; i < H.sparse.rows(); ++i) scale = std::max(scale, std::abs(H.sparse.coeff(i, i)));
  double cut = -tol_eig * std::max(1.0, scale);

  EigOptions opts;
  opts.seed = seed;
  auto pairs = smallest_eigenpairs(
      H, prob.fem.mass, prob.fem.lumped_area, cap,
      kind == MorseKind::mean_field ? EigSubspace::mean_zero : EigSubspace::full, opts);
  MorseIndexResult res;
  for (const auto& pr : pairs) {
    if (pr.value < cut) ++res.index;
  }
  res.capped = res.index == cap;
  return res;
}

TmProbeReport tm_probe(const CurvatureData& data, const TriangleMesh& mesh,
                       const FemOperators& fem, const TmFamilySpec& family, TmProbeKind which,
                       double lambda_for_combined) {
  if (family.Lambda_list.size() < 2) throw PreconditionError("degenerate probe family");
  double tau = trudinger_tau(data.sing);
  TmProbeReport rep;
  double prev_dirichlet = -1.0;
  for (double Lambda : family.Lambda_list) {
    VertexField u;
    if (which == TmProbeKind::interior && family.alpha != 0.0) {
      if (family.sigma.atoms.size() != 1)
        throw PreconditionError("conical probe needs a single atom");
      u = singular_bubble(family.sigma.atoms[0].point, family.alpha, Lambda, mesh, fem);
    } else {
      u = bubble(family.sigma, Lambda, mesh, fem);
    }
    double dirichlet = u.dot(fem.stiffness * u);
    if (dirichlet <= prev_dirichlet)
      throw PreconditionError("probe family must have growing Dirichlet energy");
    prev_dirichlet = dirichlet;

    Problem prob(mesh, fem, data, EnergyParams{lambda_for_combined, 1.0});
    auto [A, B] = masses(u, prob);
    double num = 0.0;
    switch (which) {
      case TmProbeKind::interior: {
        if (!(A > 0.0)) throw PreconditionError("interior probe needs positive mass");
        // Conical families probe the local bound 16 pi min{1, 1+alpha}; the
        // generic interior inequality carries 8 tau pi.
        double c = family.alpha != 0.0 ? 16.0 * kPi * std::min(1.0, 1.0 + family.alpha)
                                       : 8.0 * tau * kPi;
        num = c * std::log(A);
        break;
      }
      case TmProbeKind::boundary: {
        if (B == 0.0) throw PreconditionError("boundary probe needs nonzero boundary mass");
        num = 16.0 * tau * kPi * std::log(std::abs(B));
        break;
      }
      case TmProbeKind::combined: {
        double arg = std::sqrt(B * B + 2.0 * lambda_for_combined * A) + B;
        if (!(arg > 0.0)) throw PreconditionError("combined probe argument not positive");
        num = 16.0 * tau * kPi * std::log(arg);
        break;
      }
    }
    double ratio = num / dirichlet;
    rep.per_lambda.push_back(ratio);
    rep.ratio = std::max(rep.ratio, ratio);
  }
  rep.within_bound = rep.ratio <= 1.1;
  return rep;
}

}  // namespace liouville
