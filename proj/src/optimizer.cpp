#include "rbm/optimizer.hpp"

#include <cmath>
#include <random>

#include "rbm/forms.hpp"

namespace rbm {

namespace {

// deterministic standard normal (Box-Muller on the raw engine)
struct Gauss {
  std::mt19937_64 rng;
  bool have = false;
  double spare = 0.0;
  explicit Gauss(std::uint64_t seed) : rng(seed) {}
  double uniform() {
    return (rng() >> 11) * (1.0 / 9007199254740992.0);  // [0,1)
  }
  double operator()() {
    if (have) {
      have = false;
      return spare;
    }
    double u1 = 0.0;
    do { u1 = uniform(); } while (u1 <= 1e-300);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare = r * std::sin(2.0 * M_PI * u2);
    have = true;
    return r * std::cos(2.0 * M_PI * u2);
  }
};

// is this gamma01 face's component the (pinned) normal one away from x3=0?
bool pinned_normal(const BoundaryFace& f, int comp) {
  if (f.wall == Wall::Bottom) return false;
  if ((f.wall == Wall::XLo || f.wall == Wall::XHi) && comp == 0) return true;
  if ((f.wall == Wall::YLo || f.wall == Wall::YHi) && comp == 1) return true;
  return false;
}

}  // namespace

RieszGradient riesz_map(const Discretization& d, const Eigen::VectorXd& dual) {
  RieszGradient out;
  out.dual = dual;
  out.fields = d.make_controls();
  out.packed = Eigen::VectorXd::Zero(dual.size());
  const long n1 = long(d.part.gamma01.size());

  // g block: Riesz on the constrained subspace = restricted-Gram solve per
  // component over the unpinned coordinates, then the flux functional (when
  // bottom faces are controlled) removed by a rank-1 KKT correction.
  {
    const Eigen::MatrixXd& G = d.gram_g().matrix();
    for (int comp = 0; comp < 3; ++comp) {
      std::vector<long> idx;
      for (long f = 0; f < n1; ++f)
        if (!pinned_normal(d.part.gamma01.faces[std::size_t(f)], comp)) idx.push_back(f);
      if (idx.empty()) continue;
      Eigen::MatrixXd Gs(idx.size(), idx.size());
      for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = 0; b < idx.size(); ++b) Gs(a, b) = G(idx[a], idx[b]);
      Eigen::VectorXd rhs(idx.size());
      for (std::size_t a = 0; a < idx.size(); ++a)
        rhs[a] = dual[d.bdata->g_dof(comp, std::size_t(idx[a]))];
      Eigen::LLT<Eigen::MatrixXd> llt(Gs);
      Eigen::VectorXd x = llt.solve(rhs);
      if (comp == 2) {
        // flux functional a(v) = sum_{bottom faces} area * v_z * n_z
        Eigen::VectorXd a = Eigen::VectorXd::Zero(long(idx.size()));
        bool any = false;
        for (std::size_t q = 0; q < idx.size(); ++q) {
          const auto& bf = d.part.gamma01.faces[std::size_t(idx[q])];
          if (bf.wall == Wall::Bottom) {
            a[long(q)] = bf.area * bf.nvz;
            any = true;
          }
        }
        if (any) {
          Eigen::VectorXd Ginv_a = llt.solve(a);
          double denom = a.dot(Ginv_a);
          if (denom > 0.0) x -= (a.dot(x) / denom) * Ginv_a;
        }
      }
      for (std::size_t q = 0; q < idx.size(); ++q) {
        out.fields.g.at(comp, std::size_t(idx[q])) = x[long(q)];
        out.packed[d.bdata->g_dof(comp, std::size_t(idx[q]))] = x[long(q)];
      }
    }
  }
  // phi1, phi2 blocks
  {
    Eigen::VectorXd rhs(d.lateral.size());
    for (long f = 0; f < long(d.lateral.size()); ++f)
      rhs[f] = dual[d.bdata->phi1_dof(std::size_t(f))];
    Eigen::VectorXd x = d.gram_phi1().riesz(rhs);
    for (long f = 0; f < long(d.lateral.size()); ++f) {
      out.fields.phi1.at(0, std::size_t(f)) = x[f];
      out.packed[d.bdata->phi1_dof(std::size_t(f))] = x[f];
    }
  }
  {
    Eigen::VectorXd rhs(d.bottom.size());
    for (long f = 0; f < long(d.bottom.size()); ++f)
      rhs[f] = dual[d.bdata->phi2_dof(std::size_t(f))];
    Eigen::VectorXd x = d.gram_phi2().riesz(rhs);
    for (long f = 0; f < long(d.bottom.size()); ++f) {
      out.fields.phi2.at(0, std::size_t(f)) = x[f];
      out.packed[d.bdata->phi2_dof(std::size_t(f))] = x[f];
    }
  }
  return out;
}

namespace {

ControlTriple step_and_project(const Discretization& d, const ControlTriple& c,
                               const RieszGradient& grad, double alpha) {
  ControlTriple t = c;
  for (std::size_t q = 0; q < t.g.values.size(); ++q)
    t.g.values[q] -= alpha * grad.fields.g.values[q];
  for (std::size_t q = 0; q < t.phi1.values.size(); ++q)
    t.phi1.values[q] -= alpha * grad.fields.phi1.values[q];
  for (std::size_t q = 0; q < t.phi2.values.size(); ++q)
    t.phi2.values[q] -= alpha * grad.fields.phi2.values[q];
  project(t.set_g, t.g, &d.gram_g());
  project(t.set_phi1, t.phi1, &d.gram_phi1());
  project(t.set_phi2, t.phi2, &d.gram_phi2());
  return t;
}

struct PerControlResidual {
  double g, phi1, phi2;
  double total() const { return std::sqrt(g * g + phi1 * phi1 + phi2 * phi2); }
};

PerControlResidual stationarity_parts(const Discretization& d,
                                      const ControlTriple& c,
                                      const RieszGradient& grad) {
  ControlTriple t = step_and_project(d, c, grad, 1.0);
  auto block_norm = [&](const BoundaryField& a, const BoundaryField& b,
                        const H12Gram& gram) {
    BoundaryField e = a;
    for (std::size_t q = 0; q < e.values.size(); ++q) e.values[q] -= b.values[q];
    return std::sqrt(gram.norm_sq(e));
  };
  return {block_norm(c.g, t.g, d.gram_g()),
          block_norm(c.phi1, t.phi1, d.gram_phi1()),
          block_norm(c.phi2, t.phi2, d.gram_phi2())};
}

}  // namespace

double stationarity_residual(const Discretization& d, const ControlTriple& c,
                             const RieszGradient& grad) {
  return stationarity_parts(d, c, grad).total();
}

OptimizeResult projected_gradient(const Discretization& d,
                                  const ControlTriple& initial,
                                  const Targets& targets, const CostWeights& w,
                                  const OptimizerOptions& opts) {
  w.validate();
  OptimizeResult res;
  res.controls = initial;
  project(res.controls.set_g, res.controls.g, &d.gram_g());
  project(res.controls.set_phi1, res.controls.phi1, &d.gram_phi1());
  project(res.controls.set_phi2, res.controls.phi2, &d.gram_phi2());

  auto [state, srep] = picard_solve(d, res.controls, opts.state_opts);
  if (!srep.converged)
    throw std::runtime_error("projected_gradient: state solver failed at start");
  res.state = std::move(state);
  double J = cost(d, res.state, res.controls, targets, w).total;
  res.report.cost_history.push_back(J);

  auto jac = std::make_unique<JacobianSolver>(d, res.state);
  Eigen::VectorXd grad_dual = reduced_gradient_packed(
      d, *jac, res.state, res.controls, targets, w, &res.adjoint);
  RieszGradient grad = riesz_map(d, grad_dual);
  PerControlResidual parts = stationarity_parts(d, res.controls, grad);
  res.report.stationarity = parts.total();

  double alpha = opts.initial_step;
  int consecutive_rejects = 0;
  for (int it = 1; it <= opts.max_iters; ++it) {
    if (res.report.stationarity < opts.tol) {
      res.report.converged = true;
      break;
    }
    res.report.iterations = it;

    bool accepted = false;
    ControlTriple c_trial;
    StateSolution s_trial;
    double J_trial = 0.0;
    for (int bt = 0; bt <= opts.max_backtracks && !accepted; ++bt) {
      c_trial = step_and_project(d, res.controls, grad, alpha);
      Eigen::VectorXd dc =
          d.bdata->pack(c_trial) - d.bdata->pack(res.controls);
      double pred = grad_dual.dot(dc);
      bool solver_ok = true;
      SolveReport trep;
      try {
        auto [st, rp] = picard_solve(d, c_trial, opts.state_opts, &res.state);
        s_trial = std::move(st);
        trep = rp;
      } catch (const std::exception&) {
        solver_ok = false;
      }
      if (!solver_ok || !trep.converged) {
        alpha *= 0.5;
        if (++consecutive_rejects > 30)
          throw std::runtime_error("projected_gradient: 30 consecutive rejected steps");
        continue;
      }
      J_trial = cost(d, s_trial, c_trial, targets, w).total;
      if (J_trial <= J + opts.armijo_c1 * pred) {
        accepted = true;
        consecutive_rejects = 0;
      } else {
        alpha *= 0.5;
      }
    }
    if (!accepted) break;  // line search exhausted: report flagged below

    res.controls = std::move(c_trial);
    res.state = std::move(s_trial);
    J = J_trial;
    res.report.cost_history.push_back(J);
    res.report.step_history.push_back(alpha);
    alpha = std::min(alpha * 2.0, 1e6);

    jac = std::make_unique<JacobianSolver>(d, res.state);
    grad_dual = reduced_gradient_packed(d, *jac, res.state, res.controls,
                                        targets, w, &res.adjoint);
    grad = riesz_map(d, grad_dual);
    parts = stationarity_parts(d, res.controls, grad);
    res.report.stationarity = parts.total();
    if (res.report.stationarity < opts.tol) {
      res.report.converged = true;
      break;
    }
  }

  parts = stationarity_parts(d, res.controls, grad);
  res.report.vi_residual_g = parts.g;
  res.report.vi_residual_phi1 = parts.phi1;
  res.report.vi_residual_phi2 = parts.phi2;
  res.report.stationarity = parts.total();
  if (res.report.stationarity < opts.tol) res.report.converged = true;

  double beta0 = regular_point_beta0(d, res.state, opts.beta0_C_ref);
  auto [lhs, rhs] = multiplier_bound_check(d, res.state, res.adjoint, targets, w,
                                           beta0 > 0.0 ? beta0 : 1.0, opts.C1_ref);
  res.report.multiplier_bound_lhs = lhs;
  res.report.multiplier_bound_rhs = beta0 > 0.0 ? rhs : -1.0;
  return res;
}

double second_order_quotient(const Discretization& d, const StateSolution& s,
                             const AdjointState& adj, const CostWeights& w,
                             int samples, std::uint64_t seed,
                             std::vector<double>* per_sample,
                             std::vector<double>* control_share) {
  if (samples < 1) throw std::invalid_argument("second_order_quotient: samples >= 1");
  JacobianSolver jac(d, s);
  FormWorkspace fw(d.grid);
  Gauss gauss(seed);
  const long n1 = long(d.part.gamma01.size());
  double qmin = std::numeric_limits<double>::infinity();
  if (per_sample) per_sample->clear();
  if (control_share) control_share->clear();

  for (int smp = 0; smp < samples; ++smp) {
    ControlTriple dir = d.make_controls();
    for (int comp = 0; comp < 3; ++comp)
      for (long f = 0; f < n1; ++f)
        if (!pinned_normal(d.part.gamma01.faces[std::size_t(f)], comp))
          dir.g.at(comp, std::size_t(f)) = gauss();
    dir.g.impose_constraints();
    for (double& x : dir.phi1.values) x = gauss();
    for (double& x : dir.phi2.values) x = gauss();

    Eigen::VectorXd dctrl = d.bdata->pack(dir);
    VelocityField h1;
    ScalarField h2;
    linearized_state(d, jac, dctrl, h1, h2);

    double r_sq = d.gram_g().norm_sq(dir.g);
    double rho_sq = d.gram_phi1().norm_sq(dir.phi1);
    double tau_sq = d.gram_phi2().norm_sq(dir.phi2);

    double lzz = 0.0;
    if (w.gamma1 > 0.0) lzz += w.gamma1 * curl_l2_sq(d.grid, curl(d.grid, h1));
    if (w.gamma2 > 0.0) lzz += w.gamma2 * l2_norm_sq(d.grid, h1);
    if (w.gamma3 > 0.0) lzz += w.gamma3 * l2_norm_sq(d.grid, h2);
    lzz += w.gamma4 * r_sq + w.gamma5 * rho_sq + w.gamma6 * tau_sq;
    lzz -= 2.0 * fw.c(h1, h1, adj.lambda1, /*skew=*/true);
    lzz -= 2.0 * fw.c1(h1, h2, adj.lambda2, /*skew=*/true);

    double h1n = h1_norm(d.grid, h1);
    double h2n = h1_norm(d.grid, h2);
    double tnorm = h1n * h1n + h2n * h2n + r_sq + rho_sq + tau_sq;
    double q = lzz / std::max(tnorm, 1e-300);
    if (per_sample) per_sample->push_back(q);
    if (control_share)
      control_share->push_back((r_sq + rho_sq + tau_sq) / std::max(tnorm, 1e-300));
    qmin = std::min(qmin, q);
  }
  return qmin;
}

std::pair<double, double> multiplier_bound_check(const Discretization& d,
                                                 const StateSolution& s,
                                                 const AdjointState& adj,
                                                 const Targets& targets,
                                                 const CostWeights& w,
                                                 double beta0, double C1_ref) {
  if (!(beta0 > 0.0)) throw std::invalid_argument("multiplier_bound_check: beta0 > 0");
  double l1 = h1_norm(d.grid, adj.lambda1);
  double l2 = h1_norm(d.grid, adj.lambda2);
  double lhs = l1 * l1 + l2 * l2;

  VelocityField du = s.u;
  for (std::size_t q = 0; q < du.u1.size(); ++q) du.u1[q] -= targets.u_d.u1[q];
  for (std::size_t q = 0; q < du.u2.size(); ++q) du.u2[q] -= targets.u_d.u2[q];
  for (std::size_t q = 0; q < du.u3.size(); ++q) du.u3[q] -= targets.u_d.u3[q];
  ScalarField dt = s.theta;
  for (std::size_t q = 0; q < dt.v.size(); ++q) dt.v[q] -= targets.theta_d.v[q];
  double un = h1_norm(d.grid, s.u);
  double M = w.gamma1 * w.gamma1 / d.prm.Pr * un * un +
             w.gamma2 * w.gamma2 / d.prm.Pr * l2_norm_sq(d.grid, du) +
             w.gamma3 * w.gamma3 * l2_norm_sq(d.grid, dt);
  return {lhs, C1_ref / beta0 * M};
}

UniquenessDiagnostics uniqueness_diagnostics(const Discretization& d,
                                             const ControlTriple& controls,
                                             const StateSolution& s,
                                             const Targets& targets,
                                             const CostWeights& w,
                                             double beta0, double C_ref) {
  UniquenessDiagnostics out;
  double data = std::sqrt(d.gram_g().norm_sq(controls.g)) +
                std::sqrt(d.gram_phi1().norm_sq(controls.phi1)) +
                std::sqrt(d.gram_phi2().norm_sq(controls.phi2));
  if (!d.part.gamma02.empty())
    data += std::sqrt(d.gram_gamma02().norm_sq(d.u0));
  out.S1 = out.S2 = C_ref * data;
  const NondimParams& p = d.prm;
  out.H0 = C_ref * (p.Pr + out.S1 + out.S2 + p.B + 1.0) *
           (1.0 + p.Pr * (p.R + p.M)) / p.Pr;
  out.H1 = C_ref * (out.S1 + out.S2 + p.B + 1.0 + out.S2 * out.H0);
  VelocityField du = s.u;
  for (std::size_t q = 0; q < du.u1.size(); ++q) du.u1[q] -= targets.u_d.u1[q];
  for (std::size_t q = 0; q < du.u2.size(); ++q) du.u2[q] -= targets.u_d.u2[q];
  for (std::size_t q = 0; q < du.u3.size(); ++q) du.u3[q] -= targets.u_d.u3[q];
  ScalarField dt = s.theta;
  for (std::size_t q = 0; q < dt.v.size(); ++q) dt.v[q] -= targets.theta_d.v[q];
  double un = h1_norm(d.grid, s.u);
  double M = w.gamma1 * w.gamma1 / p.Pr * un * un +
             w.gamma2 * w.gamma2 / p.Pr * l2_norm_sq(d.grid, du) +
             w.gamma3 * w.gamma3 * l2_norm_sq(d.grid, dt);
  double b0 = std::max(beta0, 1e-300);
  out.I = C_ref * std::max((out.H0 + 1.0) * (out.H0 + 1.0),
                           (out.H0 + 1.0) * (out.H1 + 1.0)) /
          std::sqrt(b0) * 2.0 * std::sqrt(M);
  return out;
}

ViSlack vi_certificate(const Discretization& d, const ControlTriple& chat,
                       const Eigen::VectorXd& grad_dual, int n_random,
                       std::uint64_t seed) {
  Gauss gauss(seed);
  ViSlack out;
  const long n1 = long(d.part.gamma01.size());

  auto draw_feasible = [&](const BoundaryField& base, const ConstraintSet& set,
                           const H12Gram& gram, bool is_g) {
    BoundaryField c = base;
    for (std::size_t q = 0; q < c.values.size(); ++q) {
      double lo = set.lo ? *set.lo : base.values[q] - 1.0;
      double hi = set.hi ? *set.hi : base.values[q] + 1.0;
      c.values[q] = lo + (hi - lo) * gauss.uniform();
    }
    if (is_g) {
      for (int comp = 0; comp < 3; ++comp)
        for (long f = 0; f < n1; ++f)
          if (pinned_normal(d.part.gamma01.faces[std::size_t(f)], comp))
            c.at(comp, std::size_t(f)) = 0.0;
    }
    project(set, c, &gram);
    return c;
  };

  auto slack_for = [&](const BoundaryField& base, const ConstraintSet& set,
                       const H12Gram& gram, bool is_g,
                       long (BoundaryAffine::*dof)(std::size_t) const,
                       int gcomp_base) {
    double worst = 0.0;
    for (int t = 0; t < n_random; ++t) {
      BoundaryField c = draw_feasible(base, set, gram, is_g);
      BoundaryField diff = c;
      for (std::size_t q = 0; q < diff.values.size(); ++q)
        diff.values[q] -= base.values[q];
      double nrm = std::sqrt(gram.norm_sq(diff));
      if (nrm < 1e-14) continue;
      double inner = 0.0;
      if (is_g) {
        for (int comp = 0; comp < 3; ++comp)
          for (long f = 0; f < n1; ++f)
            inner += grad_dual[d.bdata->g_dof(comp, std::size_t(f))] *
                     diff.at(comp, std::size_t(f));
      } else {
        for (std::size_t f = 0; f < base.region->size(); ++f)
          inner += grad_dual[(d.bdata.get()->*dof)(f)] * diff.at(0, f);
      }
      (void)gcomp_base;
      worst = std::min(worst, inner / nrm);
    }
    return worst;
  };

  out.g = slack_for(chat.g, chat.set_g, d.gram_g(), true, nullptr, 0);
  out.phi1 = slack_for(chat.phi1, chat.set_phi1, d.gram_phi1(), false,
                       &BoundaryAffine::phi1_dof, 0);
  out.phi2 = slack_for(chat.phi2, chat.set_phi2, d.gram_phi2(), false,
                       &BoundaryAffine::phi2_dof, 0);
  return out;
}

}  // namespace rbm
