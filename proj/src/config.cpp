#include "rbm/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "rbm/params.hpp"

namespace rbm {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  std::size_t b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key or value");
    if (val.size() >= 2 && val.front() == '"' && val.back() == '"')
      val = val.substr(1, val.size() - 2);
    cfg.kv_[section.empty() ? key : section + "." + key] = val;
  }
  return cfg;
}

Config Config::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

double Config::get_double(const std::string& key, double fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    std::size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (...) {
    throw std::invalid_argument("config key " + key + ": not a number: " + it->second);
  }
}

long Config::get_int(const std::string& key, long fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    std::size_t pos = 0;
    long v = std::stol(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (...) {
    throw std::invalid_argument("config key " + key + ": not an integer: " + it->second);
  }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  if (it->second == "true") return true;
  if (it->second == "false") return false;
  throw std::invalid_argument("config key " + key + ": not a bool: " + it->second);
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

std::string Config::echo() const {
  std::ostringstream os;
  for (const auto& [k, v] : kv_) os << k << " = " << v << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------

std::unique_ptr<Discretization> Scenario::make_discretization() const {
  std::unique_ptr<Discretization> d;
  if (gamma01 == "lateral") {
    d = std::make_unique<Discretization>(grid, params);
  } else {
    BoundaryRegion g0 = make_region(grid, BoundaryRegion::Tag::Gamma0);
    std::vector<bool> mask(g0.size(), false);
    for (std::size_t f = 0; f < g0.size(); ++f) {
      bool is_bottom = g0.faces[f].wall == Wall::Bottom;
      if (gamma01 == "bottom") mask[f] = is_bottom;
      else if (gamma01 == "lateral+bottom") mask[f] = true;
      else throw std::invalid_argument("controls.gamma01: unknown partition " + gamma01);
    }
    d = std::make_unique<Discretization>(grid, params, mask);
  }
  d->set_l2_only(h12_l2_only);
  return d;
}

ControlTriple Scenario::build_controls(const Discretization& d) const {
  ControlTriple c = d.make_controls();
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  auto unif = [&]() { return 2.0 * ((rng() >> 11) * (1.0 / 9007199254740992.0)) - 1.0; };

  for (std::size_t f = 0; f < d.part.gamma01.size(); ++f) {
    const auto& bf = d.part.gamma01.faces[f];
    for (int comp = 0; comp < 3; ++comp) {
      bool pinned = bf.wall != Wall::Bottom &&
                    ((comp == 0 && (bf.wall == Wall::XLo || bf.wall == Wall::XHi)) ||
                     (comp == 1 && (bf.wall == Wall::YLo || bf.wall == Wall::YHi)));
      if (pinned) continue;
      c.g.at(comp, f) = g_init + g_perturb * unif();
    }
  }
  c.g.impose_constraints();
  for (std::size_t f = 0; f < d.lateral.size(); ++f)
    c.phi1.at(0, f) = phi1_init + phi1_perturb * unif();
  for (std::size_t f = 0; f < d.bottom.size(); ++f)
    c.phi2.at(0, f) = phi2_init + phi2_perturb * unif();

  c.set_g = set_g;
  c.set_phi1 = set_phi1;
  c.set_phi2 = set_phi2;
  project(c.set_g, c.g, &d.gram_g());
  project(c.set_phi1, c.phi1, &d.gram_phi1());
  project(c.set_phi2, c.phi2, &d.gram_phi2());
  return c;
}

Targets Scenario::build_targets(const Discretization& d) const {
  if (targets_kind == "zero") return zero_targets(d.grid);
  if (targets_kind == "basic_state") return basic_state_targets(d);
  if (targets_kind != "file")
    throw std::invalid_argument("targets.kind must be zero|basic_state|file");
  std::ifstream in(targets_file, std::ios::binary);
  if (!in) throw std::invalid_argument("targets.file: cannot open " + targets_file);
  // state CSV layout: x,y,z,u1,u2,u3,p,theta, one row per cell in k-j-i order
  Targets t = zero_targets(d.grid);
  ScalarField uc1(d.grid), uc2(d.grid), uc3(d.grid);
  std::string line;
  std::getline(in, line);  // header
  const BoxGrid& g = d.grid;
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        if (!std::getline(in, line))
          throw std::invalid_argument("targets.file: too few rows");
        std::istringstream ls(line);
        std::string tok;
        double vals[8];
        for (int q = 0; q < 8; ++q) {
          if (!std::getline(ls, tok, ','))
            throw std::invalid_argument("targets.file: malformed row");
          vals[q] = std::stod(tok);
        }
        uc1(i, j, k) = vals[3];
        uc2(i, j, k) = vals[4];
        uc3(i, j, k) = vals[5];
        t.theta_d(i, j, k) = vals[7];
      }
  // cell-centered target velocity onto faces (averages, one-sided at walls)
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i <= g.nx; ++i) {
        if (i == 0) t.u_d.U1(i, j, k) = uc1(0, j, k);
        else if (i == g.nx) t.u_d.U1(i, j, k) = uc1(g.nx - 1, j, k);
        else t.u_d.U1(i, j, k) = 0.5 * (uc1(i - 1, j, k) + uc1(i, j, k));
      }
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j <= g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        if (j == 0) t.u_d.U2(i, j, k) = uc2(i, 0, k);
        else if (j == g.ny) t.u_d.U2(i, j, k) = uc2(i, g.ny - 1, k);
        else t.u_d.U2(i, j, k) = 0.5 * (uc2(i, j - 1, k) + uc2(i, j, k));
      }
  for (int k = 0; k <= g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        if (k == 0) t.u_d.U3(i, j, k) = uc3(i, j, 0);
        else if (k == g.nz) t.u_d.U3(i, j, k) = uc3(i, j, g.nz - 1);
        else t.u_d.U3(i, j, k) = 0.5 * (uc3(i, j, k - 1) + uc3(i, j, k));
      }
  return t;
}

Scenario load_scenario(const Config& cfg) {
  Scenario s;
  s.grid = BoxGrid(int(cfg.get_int("grid.nx", 8)), int(cfg.get_int("grid.ny", 8)),
                   int(cfg.get_int("grid.nz", 8)), cfg.get_double("grid.l", 1.0),
                   cfg.get_double("grid.L", 1.0));

  if (cfg.has("physical.rho0") || cfg.has("physical.mu")) {
    PhysicalParams pp;
    pp.rho0 = cfg.get_double("physical.rho0", 1.0);
    pp.mu = cfg.get_double("physical.mu", 1.0);
    pp.K_cond = cfg.get_double("physical.K", 1.0);
    pp.cp = cfg.get_double("physical.cp", 1.0);
    pp.alpha = cfg.get_double("physical.alpha", 1.0);
    pp.gamma_sigma = cfg.get_double("physical.gamma", 1.0);
    pp.g_mag = cfg.get_double("physical.g", 1.0);
    pp.h_exch = cfg.get_double("physical.h", 1.0);
    pp.d = cfg.get_double("physical.d", 1.0);
    pp.l1 = cfg.get_double("physical.l1", 1.0);
    pp.L1 = cfg.get_double("physical.L1", 1.0);
    pp.theta_c = cfg.get_double("physical.theta_c", 1.0);
    pp.theta_a = cfg.get_double("physical.theta_a", 0.0);
    s.params = nondimensionalize(pp);
  } else {
    s.params.Pr = cfg.get_double("params.Pr", 1.0);
    s.params.R = cfg.get_double("params.R", 0.0);
    s.params.b = cfg.get_double("params.b", 0.0);
    s.params.M = cfg.get_double("params.M", 0.0);
    s.params.B = cfg.get_double("params.B", 1.0);
    s.params.l = cfg.get_double("grid.l", 1.0);
    s.params.L = cfg.get_double("grid.L", 1.0);
    s.params.theta_c_nd = cfg.get_double("params.theta_c", 1.0);
    s.params.validate();
  }

  s.weights.gamma1 = cfg.get_double("weights.gamma1", 0.0);
  s.weights.gamma2 = cfg.get_double("weights.gamma2", 1.0);
  s.weights.gamma3 = cfg.get_double("weights.gamma3", 1.0);
  s.weights.gamma4 = cfg.get_double("weights.gamma4", 1e-2);
  s.weights.gamma5 = cfg.get_double("weights.gamma5", 1e-2);
  s.weights.gamma6 = cfg.get_double("weights.gamma6", 1e-2);
  std::string mode = cfg.get_string("weights.mode", "ii");
  if (mode == "i") s.weights.mode = CostWeights::Mode::BoundedSets;
  else if (mode == "ii") s.weights.mode = CostWeights::Mode::CoerciveWeights;
  else throw std::invalid_argument("weights.mode must be \"i\" or \"ii\"");
  s.weights.validate();

  s.g_init = cfg.get_double("controls.g_init", 0.0);
  s.g_perturb = cfg.get_double("controls.g_perturb", 0.0);
  s.phi1_init = cfg.get_double("controls.phi1_init", 0.0);
  s.phi1_perturb = cfg.get_double("controls.phi1_perturb", 0.0);
  s.phi2_init = cfg.get_double("controls.phi2_init", 0.0);
  s.phi2_perturb = cfg.get_double("controls.phi2_perturb", 0.0);
  auto set_from = [&](const char* prefix) {
    ConstraintSet set;
    std::string lo = std::string("controls.") + prefix + "_box_lo";
    std::string hi = std::string("controls.") + prefix + "_box_hi";
    std::string ball = std::string("controls.") + prefix + "_ball";
    if (cfg.has(lo)) set.lo = cfg.get_double(lo, 0.0);
    if (cfg.has(hi)) set.hi = cfg.get_double(hi, 0.0);
    if (cfg.has(ball)) set.radius = cfg.get_double(ball, 0.0);
    set.validate();
    return set;
  };
  s.set_g = set_from("g");
  s.set_phi1 = set_from("phi1");
  s.set_phi2 = set_from("phi2");
  s.gamma01 = cfg.get_string("controls.gamma01", "lateral");

  if (s.weights.mode == CostWeights::Mode::BoundedSets) {
    auto bounded = [](const ConstraintSet& set) {
      return (set.lo && set.hi) || set.radius;
    };
    if (!bounded(s.set_g) || !bounded(s.set_phi1) || !bounded(s.set_phi2))
      throw std::invalid_argument(
          "weights.mode = \"i\" requires bounded control sets");
  }

  s.targets_kind = cfg.get_string("targets.kind", "zero");
  s.targets_file = cfg.get_string("targets.file", "");
  if (s.targets_kind == "file" && !std::filesystem::exists(s.targets_file))
    throw std::invalid_argument("targets.file does not exist: " + s.targets_file);

  s.solver.tol = cfg.get_double("solver.tol", 1e-11);
  s.solver.residual_tol = cfg.get_double("solver.residual_tol", 1e-9);
  s.solver.max_iters = int(cfg.get_int("solver.max_iters", 50));
  s.solver.damping = cfg.get_double("solver.damping", 1.0);
  s.solver.linear_tol = cfg.get_double("solver.linear_tol", 1e-12);
  s.solver.direct_dof_limit = cfg.get_int("solver.direct_dof_limit", 70000);
  s.solver.apriori_C = cfg.get_double("solver.apriori_C", 1.0);

  s.optimizer.tol = cfg.get_double("optimizer.tol", 1e-6);
  s.optimizer.max_iters = int(cfg.get_int("optimizer.max_iters", 200));
  s.optimizer.armijo_c1 = cfg.get_double("optimizer.armijo_c1", 1e-4);
  s.optimizer.max_backtracks = int(cfg.get_int("optimizer.max_backtracks", 30));
  s.optimizer.initial_step = cfg.get_double("optimizer.initial_step", 1.0);
  s.optimizer.seed = std::uint64_t(cfg.get_int("optimizer.seed", 0));
  s.optimizer.state_opts = s.solver;

  s.uniqueness_C_ref = cfg.get_double("diagnostics.uniqueness_C_ref", 1.0);
  s.beta0_C_ref = cfg.get_double("diagnostics.beta0_C_ref", 1.0);
  s.C1_ref = cfg.get_double("diagnostics.C1_ref", 1.0);
  s.second_order_samples = int(cfg.get_int("diagnostics.second_order_samples", 0));
  s.h12_l2_only = cfg.get_bool("diagnostics.h12_l2_only", false);
  s.optimizer.beta0_C_ref = s.beta0_C_ref;
  s.optimizer.C1_ref = s.C1_ref;

  s.out_dir = cfg.get_string("output.dir", "out");
  s.seed = s.optimizer.seed;
  return s;
}

}  // namespace rbm
