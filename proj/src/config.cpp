#include "liouville/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace liouville {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad number '" + s + "' " + where);
  }
}

int parse_int(const std::string& s, const std::string& where) {
  try {
    size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad integer '" + s + "' " + where);
  }
}

bool parse_bool(const std::string& s, const std::string& where) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("bad boolean '" + s + "' " + where);
}

std::vector<double> parse_list(const std::string& s, const std::string& where) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(item, where));
  }
  return out;
}

// "(x,y,order); (x,y,order)..."
std::vector<SingularPointSpec> parse_points(const std::string& s, const std::string& where) {
  std::vector<SingularPointSpec> out;
  std::string group;
  std::istringstream in(s);
  while (std::getline(in, group, ';')) {
    group = trim(group);
    if (group.empty()) continue;
    if (group.front() != '(' || group.back() != ')')
      throw ConfigError("expected (x,y,order) tuple " + where);
    auto vals = parse_list(group.substr(1, group.size() - 2), where);
    if (vals.size() != 3) throw ConfigError("expected three numbers in tuple " + where);
    out.push_back({{vals[0], vals[1]}, vals[2]});
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt(v[i]);
  }
  return s;
}

std::string fmt_points(const std::vector<SingularPointSpec>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += "; ";
    s += "(" + fmt(v[i].point.x) + "," + fmt(v[i].point.y) + "," + fmt(v[i].order) + ")";
  }
  return s;
}

}  // namespace

double CurvatureFamily::evaluate(const Vec2& x) const {
  size_t colon = spec.find(':');
  std::string kind = colon == std::string::npos ? spec : spec.substr(0, colon);
  std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "constant") {
    return parse_double(trim(args), "in curvature family");
  }
  if (kind == "radial_poly") {
    auto c = parse_list(args, "in curvature family");
    double r2 = x.squared_norm();
    double acc = 0.0;
    for (size_t i = c.size(); i-- > 0;) acc = acc * r2 + c[i];
    return acc;
  }
  if (kind == "angular") {
    auto c = parse_list(args, "in curvature family");
    if (c.size() != 3) throw ConfigError("angular family needs a,m,b");
    return c[0] * std::cos(c[1] * std::atan2(x.y, x.x)) + c[2];
  }
  if (kind == "radial_power") {
    auto c = parse_list(args, "in curvature family");
    if (c.size() != 2) throw ConfigError("radial_power family needs c,p");
    double r = x.norm();
    if (r == 0.0) return c[1] < 0.0 ? 0.0 : (c[1] == 0.0 ? c[0] : 0.0);
    return c[0] * std::pow(r, c[1]);
  }
  if (kind == "table") throw ConfigError("table curvature family has no pointwise form");
  throw ConfigError("unknown curvature family '" + kind + "'");
}

bool CurvatureFamily::is_table() const { return spec.rfind("table:", 0) == 0; }

std::string CurvatureFamily::table_path() const {
  if (!is_table()) throw ConfigError("not a table curvature family");
  return spec.substr(6);
}

uint64_t hash_text(const std::string& text) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

ScenarioConfig parse_config_text(const std::string& text, const std::string& origin) {
  ScenarioConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::map<std::string, bool> seen;
  int lineno = 0;

  auto fail = [&](const std::string& msg) {
    throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + msg);
  };

  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = line.substr(1, line.size() - 2);
      static const std::vector<std::string> known = {"surface", "singularities", "curvature",
                                                     "solver", "run", "bubbles", "limit", "probe"};
      if (std::find(known.begin(), known.end(), section) == known.end())
        fail("unknown section [" + section + "]");
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (section.empty()) fail("key outside any section");
    std::string qual = section + "." + key;
    if (seen[qual]) fail("duplicate key '" + key + "' in [" + section + "]");
    seen[qual] = true;
    std::string where = "at " + origin + ":" + std::to_string(lineno);

    if (section == "surface") {
      if (key == "kind") {
        if (value != "disc" && value != "annulus" && value != "mesh") fail("kind must be disc|annulus|mesh");
        cfg.surface_kind = value;
      } else if (key == "radius") cfg.radius = parse_double(value, where);
      else if (key == "r_inner") cfg.r_inner = parse_double(value, where);
      else if (key == "r_outer") cfg.r_outer = parse_double(value, where);
      else if (key == "refinement") cfg.refinement = parse_int(value, where);
      else if (key == "path") cfg.mesh_path = value;
      else if (key == "grade_h_min") cfg.grade_h_min = parse_double(value, where);
      else if (key == "grade_ratio") cfg.grade_ratio = parse_double(value, where);
      else fail("unknown key '" + key + "' in [surface]");
    } else if (section == "singularities") {
      if (key == "interior") cfg.interior = parse_points(value, where);
      else if (key == "corners") cfg.corners = parse_points(value, where);
      else fail("unknown key '" + key + "' in [singularities]");
    } else if (section == "curvature") {
      if (key == "K") cfg.K.spec = value;
      else if (key == "h") cfg.h.spec = value;
      else fail("unknown key '" + key + "' in [curvature]");
    } else if (section == "solver") {
      if (key == "lambda") {
        if (value == "geometric") {
          cfg.lambda_geometric = true;
        } else {
          cfg.lambda_geometric = false;
          cfg.lambda = parse_double(value, where);
        }
      } else if (key == "lambda_grid") cfg.lambda_grid = parse_list(value, where);
      else if (key == "mu") cfg.mu = parse_double(value, where);
      else if (key == "mu_list") cfg.mu_list = parse_list(value, where);
      else if (key == "tol_grad") cfg.tol_grad = parse_double(value, where);
      else if (key == "tol_pde") cfg.tol_pde = parse_double(value, where);
      else if (key == "max_iter") cfg.max_iter = parse_int(value, where);
      else if (key == "step0") cfg.step0 = parse_double(value, where);
      else if (key == "armijo_c") cfg.armijo_c = parse_double(value, where);
      else if (key == "divergence_floor") cfg.divergence_floor = parse_double(value, where);
      else if (key == "symmetry_order") cfg.symmetry_order = parse_int(value, where);
      else if (key == "warm_start") cfg.warm_start = parse_bool(value, where);
      else if (key == "linear_solver") {
        if (value != "direct" && value != "cg") fail("linear_solver must be direct|cg");
        cfg.linear_solver = value;
      }
      else if (key == "seed_bubble") cfg.seed_bubble = parse_list(value, where);
      else fail("unknown key '" + key + "' in [solver]");
    } else if (section == "run") {
      if (key == "name") cfg.name = value;
      else if (key == "concentration_r") cfg.concentration_r = parse_double(value, where);
      else if (key == "concentration_k") cfg.concentration_k = parse_int(value, where);
      else fail("unknown key '" + key + "' in [run]");
    } else if (section == "bubbles") {
      if (key == "lambda_list") cfg.bubble_lambdas = parse_list(value, where);
      else if (key == "atom_x") cfg.bubble_atom.x = parse_double(value, where);
      else if (key == "atom_y") cfg.bubble_atom.y = parse_double(value, where);
      else if (key == "test_lambda") cfg.bubble_test_lambda = parse_double(value, where);
      else fail("unknown key '" + key + "' in [bubbles]");
    } else if (section == "limit") {
      if (key == "K0") cfg.limit_K0 = parse_double(value, where);
      else if (key == "h0_list") cfg.limit_h0 = parse_list(value, where);
      else if (key == "alpha_list") cfg.limit_alpha = parse_list(value, where);
      else if (key == "b") cfg.limit_b = parse_double(value, where);
      else if (key == "R") cfg.limit_R = parse_double(value, where);
      else fail("unknown key '" + key + "' in [limit]");
    } else if (section == "probe") {
      if (key == "which") cfg.probe_which = value;
      else if (key == "alpha") cfg.probe_alpha = parse_double(value, where);
      else if (key == "atom_x") cfg.probe_atom.x = parse_double(value, where);
      else if (key == "atom_y") cfg.probe_atom.y = parse_double(value, where);
      else if (key == "lambda_list") cfg.probe_lambdas = parse_list(value, where);
      else fail("unknown key '" + key + "' in [probe]");
    }
  }

  // Semantic checks.
  if (cfg.surface_kind == "disc" && !(cfg.radius > 0.0)) throw ConfigError("radius must be > 0");
  if (cfg.surface_kind == "annulus" && !(cfg.r_inner > 0.0 && cfg.r_inner < cfg.r_outer))
    throw ConfigError("annulus radii must satisfy 0 < r_inner < r_outer");
  if (cfg.surface_kind == "mesh" && cfg.mesh_path.empty())
    throw ConfigError("surface kind mesh requires path");
  if (cfg.refinement < 0) throw ConfigError("refinement must be >= 0");
  for (const auto& p : cfg.interior) {
    if (!(p.order > -1.0)) throw ConfigError("conical order must satisfy alpha > -1");
  }
  for (const auto& p : cfg.corners) {
    if (!(p.order > -1.0)) throw ConfigError("corner order must satisfy beta > -1");
  }
  for (double mu : cfg.mu_list) {
    if (mu < 0.9 || mu > 1.1) throw ConfigError("mu values must lie in [0.9, 1.1]");
  }
  if (!cfg.seed_bubble.empty() && cfg.seed_bubble.size() != 3)
    throw ConfigError("seed_bubble needs Lambda, x, y");
  if (cfg.concentration_k < 1) throw ConfigError("concentration_k must be >= 1");

  cfg.config_hash = hash_text(cfg.emit());
  return cfg;
}

ScenarioConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string ScenarioConfig::emit() const {
  std::ostringstream o;
  o << "[surface]\n";
  o << "kind = " << surface_kind << "\n";
  if (surface_kind == "disc") o << "radius = " << fmt(radius) << "\n";
  if (surface_kind == "annulus") {
    o << "r_inner = " << fmt(r_inner) << "\n";
    o << "r_outer = " << fmt(r_outer) << "\n";
  }
  if (surface_kind == "mesh") o << "path = " << mesh_path << "\n";
  o << "refinement = " << refinement << "\n";
  o << "grade_h_min = " << fmt(grade_h_min) << "\n";
  o << "grade_ratio = " << fmt(grade_ratio) << "\n";
  o << "[singularities]\n";
  if (!interior.empty()) o << "interior = " << fmt_points(interior) << "\n";
  if (!corners.empty()) o << "corners = " << fmt_points(corners) << "\n";
  o << "[curvature]\n";
  o << "K = " << K.spec << "\n";
  o << "h = " << h.spec << "\n";
  o << "[solver]\n";
  o << "lambda = " << (lambda_geometric ? std::string("geometric") : fmt(lambda)) << "\n";
  if (!lambda_grid.empty()) o << "lambda_grid = " << fmt_list(lambda_grid) << "\n";
  o << "mu = " << fmt(mu) << "\n";
  if (!mu_list.empty()) o << "mu_list = " << fmt_list(mu_list) << "\n";
  o << "tol_grad = " << fmt(tol_grad) << "\n";
  o << "tol_pde = " << fmt(tol_pde) << "\n";
  o << "max_iter = " << max_iter << "\n";
  o << "step0 = " << fmt(step0) << "\n";
  o << "armijo_c = " << fmt(armijo_c) << "\n";
  o << "divergence_floor = " << fmt(divergence_floor) << "\n";
  o << "symmetry_order = " << symmetry_order << "\n";
  o << "warm_start = " << (warm_start ? "true" : "false") << "\n";
  o << "linear_solver = " << linear_solver << "\n";
  if (!seed_bubble.empty()) o << "seed_bubble = " << fmt_list(seed_bubble) << "\n";
  o << "[run]\n";
  o << "name = " << name << "\n";
  o << "concentration_r = " << fmt(concentration_r) << "\n";
  o << "concentration_k = " << concentration_k << "\n";
  o << "[bubbles]\n";
  o << "lambda_list = " << fmt_list(bubble_lambdas) << "\n";
  o << "atom_x = " << fmt(bubble_atom.x) << "\n";
  o << "atom_y = " << fmt(bubble_atom.y) << "\n";
  o << "test_lambda = " << fmt(bubble_test_lambda) << "\n";
  o << "[limit]\n";
  o << "K0 = " << fmt(limit_K0) << "\n";
  o << "h0_list = " << fmt_list(limit_h0) << "\n";
  o << "alpha_list = " << fmt_list(limit_alpha) << "\n";
  o << "b = " << fmt(limit_b) << "\n";
  o << "R = " << fmt(limit_R) << "\n";
  o << "[probe]\n";
  o << "which = " << probe_which << "\n";
  o << "alpha = " << fmt(probe_alpha) << "\n";
  o << "atom_x = " << fmt(probe_atom.x) << "\n";
  o << "atom_y = " << fmt(probe_atom.y) << "\n";
  o << "lambda_list = " << fmt_list(probe_lambdas) << "\n";
  return o.str();
}

}  // namespace liouville
