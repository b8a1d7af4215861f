#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "liouville/geometry.hpp"

namespace liouville {

/// One prescribed-curvature family, parsed from `name:args`.
///   constant:c | radial_poly:c0,c1,... (polynomial in r^2) |
///   angular:a,m,b (a cos(m theta) + b) | radial_power:c,p (c r^p, 0 at r=0
///   for negative p) | table:file (one value per vertex line)
struct CurvatureFamily {
  std::string spec;
  double evaluate(const Vec2& x) const;          // analytic families
  bool is_table() const;
  std::string table_path() const;
};

struct SingularPointSpec {
  Vec2 point;
  double order = 0.0;
};

struct ScenarioConfig {
  // [surface]
  std::string surface_kind = "disc";  // disc | annulus | mesh
  double radius = 1.0;
  double r_inner = 0.5;
  double r_outer = 1.0;
  int refinement = 4;
  std::string mesh_path;
  double grade_h_min = 0.0;  // 0 = builder default
  double grade_ratio = 0.5;

  // [singularities]
  std::vector<SingularPointSpec> interior;
  std::vector<SingularPointSpec> corners;

  // [curvature]
  CurvatureFamily K{"constant:1.0"};
  CurvatureFamily h{"constant:0.0"};

  // [solver]
  bool lambda_geometric = true;  // lambda = 4 pi chi
  double lambda = 0.0;
  std::vector<double> lambda_grid;
  double mu = 1.0;
  std::vector<double> mu_list;
  double tol_grad = 1e-8;
  double tol_pde = 1e-6;
  int max_iter = 5000;
  double step0 = 1.0;
  double armijo_c = 1e-4;
  double divergence_floor = 0.0;  // 0 = default 50 |lambda| log(1e6)
  int symmetry_order = 0;
  bool warm_start = true;
  std::string linear_solver = "direct";  // direct | cg
  std::vector<double> seed_bubble;  // Lambda, x, y

  // [run]
  std::string name = "scenario";
  double concentration_r = 0.2;
  int concentration_k = 1;

  // [bubbles]
  std::vector<double> bubble_lambdas{1e2, 3e2, 1e3, 3e3, 1e4};
  Vec2 bubble_atom{1.0, 0.0};
  double bubble_test_lambda = 0.0;

  // [limit]
  double limit_K0 = 1.0;
  std::vector<double> limit_h0{-1.0, 0.0, 1.0};
  std::vector<double> limit_alpha{0.0, -0.5, 0.25};
  double limit_b = 1.0;
  double limit_R = 1e4;

  // [probe]
  std::string probe_which = "boundary";
  double probe_alpha = 0.0;
  Vec2 probe_atom{1.0, 0.0};
  std::vector<double> probe_lambdas{1e2, 1e3, 1e4};

  uint64_t config_hash = 0;

  // Programmatic extras (not part of the file format): additional points the
  // mesh builders must capture and grade, e.g. bubble atoms.
  std::vector<Vec2> extra_include_points;

  /// Canonical INI emission; parse(emit()) reproduces the config exactly.
  std::string emit() const;
};

/// Parses the INI scenario format. Unknown sections or keys, duplicate keys
/// and malformed values raise ConfigError with a line number; semantic
/// violations (order <= -1, bad radii, ...) raise ConfigError as well.
ScenarioConfig parse_config(const std::string& path);
ScenarioConfig parse_config_text(const std::string& text, const std::string& origin);

/// FNV-1a of the canonical emission (used in output file headers).
uint64_t hash_text(const std::string& text);

}  // namespace liouville
