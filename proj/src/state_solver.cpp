#include "rbm/state_solver.hpp"

#include <cmath>
#include <limits>

namespace rbm {

namespace {

// diagonally scaled dual norm: sqrt(sum r_i^2 / |diag_i|)
double scaled_dual_norm(const SpMat& A, const Eigen::VectorXd& rblock) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(A.rows());
  for (int kk = 0; kk < A.outerSize(); ++kk)
    for (SpMat::InnerIterator it(A, kk); it; ++it)
      if (it.row() == it.col()) diag[it.row()] += it.value();
  double s = 0.0;
  for (long q = 0; q < rblock.size(); ++q)
    s += rblock[q] * rblock[q] / std::max(std::abs(diag[q]), 1e-30);
  return std::sqrt(s);
}

Eigen::VectorXd solve_saddle(const Discretization& d, const LinearSystem& sys,
                             const Eigen::VectorXd& rhs, const SolveOptions& opts,
                             const VelocityField* ubar_explicit) {
  if (d.dofs.saddle_size() <= opts.direct_dof_limit)
    return sparse_lu_solve(sys.A, rhs, "velocity saddle");
  Eigen::VectorXd rhs_mom = rhs.head(d.dofs.nfree);
  if (ubar_explicit) rhs_mom -= explicit_advection_rhs(d, *ubar_explicit);
  Eigen::VectorXd rhs_div = rhs.segment(d.dofs.nfree, d.dofs.np);
  return d.schur().solve(rhs_mom, rhs_div, opts.linear_tol);
}

void check_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) throw std::runtime_error(std::string(what) + ": non-finite values");
}

double state_norm(const Discretization& d, const VelocityField& u,
                  const ScalarField& theta) {
  return h1_norm(d.grid, u) + h1_norm(d.grid, theta);
}

double boundary_data_norm(const Discretization& d, const ControlTriple& controls) {
  double data = std::sqrt(d.gram_g().norm_sq(controls.g)) +
                std::sqrt(d.gram_phi1().norm_sq(controls.phi1)) +
                std::sqrt(d.gram_phi2().norm_sq(controls.phi2));
  if (!d.part.gamma02.empty()) data += std::sqrt(d.gram_gamma02().norm_sq(d.u0));
  return data;
}

}  // namespace

StateSolution basic_state(const Discretization& d) {
  const BoxGrid& g = d.grid;
  const NondimParams& p = d.prm;
  StateSolution s;
  s.u = VelocityField(g);
  s.theta = ScalarField(g);
  s.p = ScalarField(g);
  const double tc = p.theta_c_nd;
  const double slope = tc * p.B / (1.0 + p.B);
  const double p1 = p.b + p.R * tc;
  const double p2 = -p.R * tc * p.B / (2.0 * (1.0 + p.B));
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        double z = g.zc(k);
        s.theta(i, j, k) = tc - slope * z;
        s.p(i, j, k) = p1 * z + p2 * z * z;
      }
  double mean = 0.0;
  for (double v : s.p.v) mean += v;
  mean /= double(g.ncells());
  for (double& v : s.p.v) v -= mean;
  return s;
}

VelocityField lift_velocity(const Discretization& d, const BoundaryField& g,
                            const BoundaryField& u0, const SolveOptions& opts) {
  if (!g.constraints_satisfied(1e-9) || !u0.constraints_satisfied(1e-9))
    throw std::invalid_argument("lift_velocity: flux compatibility violated");
  if (u0.values != d.u0.values)
    throw std::invalid_argument(
        "lift_velocity: u0 must match the discretization's Gamma0^2 data "
        "(call Discretization::set_u0 first)");
  ControlTriple c = d.make_controls();
  c.g = g;
  Eigen::VectorXd ctrl = d.bdata->pack(c);

  VelocityField uzero(d.grid);
  ScalarField tzero(d.grid);
  LinearSystem sys = assemble_velocity(d, uzero, tzero);
  Eigen::VectorXd rhs = -(sys.B * ctrl + sys.r0);
  // strip the uniform b-buoyancy so the lift is a pure Stokes extension (the
  // term is absorbed by pressure anyway; removing it keeps zero data -> zero)
  const double bterm = d.prm.Pr * d.grid.cell_volume() * d.prm.b;
  for_each_face(d.grid, [&](const FaceRef& f) {
    if (f.m != 2) return;
    long row = d.dofs.face2free[face_dof(d.dofs.vi, f)];
    if (row >= 0) rhs[row] -= bterm;
  });
  Eigen::VectorXd x = solve_saddle(d, sys, rhs, opts, &uzero);
  check_finite(x, "lift_velocity");
  VelocityField out(d.grid);
  scatter_velocity(d, x, ctrl, out);
  return out;
}

ScalarField lift_temperature(const Discretization& d, const BoundaryField& phi1,
                             const BoundaryField& phi2) {
  ControlTriple c = d.make_controls();
  c.phi1 = phi1;
  c.phi2 = phi2;
  Eigen::VectorXd ctrl = d.bdata->pack(c);
  VelocityField uzero(d.grid);
  LinearSystem sys = assemble_temperature(d, uzero);
  Eigen::VectorXd rhs = -(sys.B * ctrl + sys.r0);
  Eigen::VectorXd x = sparse_lu_solve(sys.A, rhs, "temperature lift");
  check_finite(x, "lift_temperature");
  ScalarField out(d.grid);
  for (long q = 0; q < d.dofs.np; ++q) out.v[q] = x[q];
  return out;
}

void solve_linearized(const Discretization& d, const VelocityField& ubar,
                      const ControlTriple& controls, const SolveOptions& opts,
                      VelocityField& u_out, ScalarField& p_out, ScalarField& theta_out) {
  Eigen::VectorXd ctrl = d.bdata->pack(controls);

  // temperature first (advection-diffusion-Robin with frozen ubar) ...
  LinearSystem tsys = assemble_temperature(d, ubar);
  Eigen::VectorXd trhs = -(tsys.B * ctrl + tsys.r0);
  Eigen::VectorXd th = sparse_lu_solve(tsys.A, trhs, "temperature");
  check_finite(th, "temperature solve");
  theta_out = ScalarField(d.grid);
  for (long q = 0; q < d.dofs.np; ++q) theta_out.v[q] = th[q];

  // ... then the Oseen-type saddle with the fresh temperature
  LinearSystem vsys = assemble_velocity(d, ubar, theta_out);
  Eigen::VectorXd vrhs = -(vsys.B * ctrl + vsys.r0);
  Eigen::VectorXd x = solve_saddle(d, vsys, vrhs, opts, &ubar);
  check_finite(x, "velocity solve");
  scatter_velocity(d, x, ctrl, u_out);
  scatter_pressure(d, x, p_out);
}

std::pair<StateSolution, SolveReport> picard_solve(const Discretization& d,
                                                   const ControlTriple& controls,
                                                   const SolveOptions& opts,
                                                   const StateSolution* warm_start) {
  if (!(opts.tol > 0.0) || opts.max_iters < 1)
    throw std::invalid_argument("picard_solve: bad options");
  if (!(opts.damping > 0.0) || opts.damping > 1.0)
    throw std::invalid_argument("picard_solve: damping must be in (0,1]");
  SolveReport rep;
  StateSolution s;
  if (warm_start) {
    s = *warm_start;
  } else {
    s.u = lift_velocity(d, controls.g, d.u0, opts);
    s.theta = lift_temperature(d, controls.phi1, controls.phi2);
    s.p = ScalarField(d.grid);
  }

  double omega = opts.damping;
  double prev_rel = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opts.max_iters; ++it) {
    VelocityField u_new;
    ScalarField p_new, t_new;
    solve_linearized(d, s.u, controls, opts, u_new, p_new, t_new);

    VelocityField du = u_new;
    for (std::size_t q = 0; q < du.u1.size(); ++q) du.u1[q] -= s.u.u1[q];
    for (std::size_t q = 0; q < du.u2.size(); ++q) du.u2[q] -= s.u.u2[q];
    for (std::size_t q = 0; q < du.u3.size(); ++q) du.u3[q] -= s.u.u3[q];
    ScalarField dt = t_new;
    for (std::size_t q = 0; q < dt.v.size(); ++q) dt.v[q] -= s.theta.v[q];
    double rel = state_norm(d, du, dt) / std::max(1.0, state_norm(d, u_new, t_new));
    if (!std::isfinite(rel)) throw std::runtime_error("picard_solve: blow-up");
    rep.residual_history.push_back(rel);
    rep.picard_iters = it;

    if (rel > prev_rel && omega > 0.0625) omega *= 0.5;
    prev_rel = rel;

    if (omega == 1.0) {
      s.u = std::move(u_new);
      s.p = std::move(p_new);
      s.theta = std::move(t_new);
    } else {
      for (std::size_t q = 0; q < s.u.u1.size(); ++q)
        s.u.u1[q] += omega * (u_new.u1[q] - s.u.u1[q]);
      for (std::size_t q = 0; q < s.u.u2.size(); ++q)
        s.u.u2[q] += omega * (u_new.u2[q] - s.u.u2[q]);
      for (std::size_t q = 0; q < s.u.u3.size(); ++q)
        s.u.u3[q] += omega * (u_new.u3[q] - s.u.u3[q]);
      for (std::size_t q = 0; q < s.theta.v.size(); ++q)
        s.theta.v[q] += omega * (t_new.v[q] - s.theta.v[q]);
      s.p = std::move(p_new);
    }
    if (rel < opts.tol) {
      rep.converged = true;
      break;
    }
  }

  rep.apriori_lhs = state_norm(d, s.u, s.theta);
  rep.apriori_rhs = opts.apriori_C * (boundary_data_norm(d, controls) + std::abs(d.prm.b));
  rep.used_schur_path = d.dofs.saddle_size() > opts.direct_dof_limit;
  return {s, rep};
}

std::pair<double, double> weak_residual(const Discretization& d,
                                        const StateSolution& s,
                                        const ControlTriple& controls) {
  Eigen::VectorXd ctrl = d.bdata->pack(controls);
  Eigen::VectorXd r = coupled_residual(d, s.u, s.p, s.theta, ctrl);
  LinearSystem vel = assemble_velocity(d, s.u, s.theta);
  LinearSystem temp = assemble_temperature(d, s.u);
  double rm = scaled_dual_norm(vel.A, r.head(d.dofs.nfree));
  double rt = scaled_dual_norm(temp.A, r.tail(d.dofs.np));
  return {rm, rt};
}

double uniqueness_gap(const Discretization& d, const ControlTriple& controls,
                      double C_ref) {
  const NondimParams& p = d.prm;
  return p.Pr - C_ref * (p.Pr * (p.M + p.R) + 1.0) * boundary_data_norm(d, controls);
}

}  // namespace rbm
