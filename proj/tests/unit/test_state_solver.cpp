#include "doctest.h"

#include <cmath>
#include <random>

#include "rbm/forms.hpp"
#include "rbm/state_solver.hpp"

using namespace rbm;

namespace {

NondimParams params(double Pr, double R, double b, double M, double B,
                    double theta_c = 1.0) {
  NondimParams p;
  p.Pr = Pr; p.R = R; p.b = b; p.M = M; p.B = B;
  p.l = p.L = 1.0;
  p.theta_c_nd = theta_c;
  return p;
}

ControlTriple conduction_controls(const Discretization& d) {
  ControlTriple c = d.make_controls();
  for (std::size_t f = 0; f < d.bottom.size(); ++f)
    c.phi2.at(0, f) = d.prm.theta_c_nd;
  return c;
}

// small tangential velocity control on the x-lo wall with zero net flux
void set_tangential_g(const Discretization& d, ControlTriple& c, double amp) {
  for (std::size_t f = 0; f < d.part.gamma01.size(); ++f) {
    const auto& bf = d.part.gamma01.faces[f];
    if (bf.wall == Wall::XLo)
      c.g.at(2, f) = amp * std::sin(M_PI * bf.cy) * bf.cz * (1.0 - bf.cz);
  }
  c.g.impose_constraints();
}

}  // namespace

TEST_CASE("basic_state: conduction profile and pressure coefficients") {
  BoxGrid g(8, 8, 8, 1.0, 1.0);
  Discretization d(g, params(1.0, 2.0, -1.0, 0.0, 1.0));
  StateSolution s = basic_state(d);
  for (int k = 0; k < g.nz; ++k)
    CHECK(s.theta(3, 4, k) == doctest::Approx(1.0 - 0.5 * g.zc(k)).epsilon(1e-14));
  // p1 = b + R theta_c = 1, p2 = -R theta_c B/(2(1+B)) = -1/2 (up to the mean)
  double z0 = g.zc(2), z1 = g.zc(5);
  double expect = (1.0 * z1 - 0.5 * z1 * z1) - (1.0 * z0 - 0.5 * z0 * z0);
  CHECK(s.p(0, 0, 5) - s.p(0, 0, 2) == doctest::Approx(expect).epsilon(1e-13));
  CHECK(max_abs(s.u.u1) == 0.0);

  Discretization d0(g, params(1.0, 2.0, -1.0, 0.0, 1.0, 0.0));
  StateSolution s0 = basic_state(d0);
  CHECK(max_abs(s0.theta.v) == 0.0);
  double lin = -1.0 * (g.zc(5) - g.zc(2));  // p1 = b, p2 = 0
  CHECK(s0.p(0, 0, 5) - s0.p(0, 0, 2) == doctest::Approx(lin).epsilon(1e-13));
}

TEST_CASE("lift_temperature: conduction data reproduces the basic state") {
  BoxGrid g(8, 8, 8, 1.0, 1.0);
  Discretization d(g, params(1.0, 0.0, 0.0, 0.0, 1.0));
  ControlTriple c = conduction_controls(d);
  ScalarField th = lift_temperature(d, c.phi1, c.phi2);
  StateSolution b = basic_state(d);
  double err = 0.0;
  for (long q = 0; q < g.ncells(); ++q)
    err = std::max(err, std::abs(th.v[q] - b.theta.v[q]));
  CHECK(err < 1e-10);  // exact for the affine profile, up to solver round-off

  ControlTriple z = d.make_controls();
  ScalarField th0 = lift_temperature(d, z.phi1, z.phi2);
  CHECK(max_abs(th0.v) < 1e-13);
}

TEST_CASE("lift_temperature: constant lateral flux balances the Robin drain") {
  BoxGrid g(8, 8, 8, 1.0, 1.0);
  Discretization d(g, params(1.0, 0.0, 0.0, 0.0, 1.0));
  ControlTriple c = d.make_controls();
  const double flux = 0.75;
  for (std::size_t f = 0; f < d.lateral.size(); ++f) c.phi1.at(0, f) = flux;
  ScalarField th = lift_temperature(d, c.phi1, c.phi2);
  const double aR = (2.0 - d.prm.B * g.hz) / (2.0 + d.prm.B * g.hz);
  double robin = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      robin += -d.prm.B * 0.5 * (1.0 + aR) * th(i, j, g.nz - 1) * g.hx * g.hy;
  double lateral_in = flux * d.lateral.total_area();
  double bottom_out = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      bottom_out += 2.0 * th(i, j, 0) / g.hz * g.hx * g.hy;
  CHECK(std::abs(robin + lateral_in - bottom_out) < 1e-8 * lateral_in);
}

TEST_CASE("lift_velocity: zero data, exact traces, solenoidal output") {
  BoxGrid g(6, 6, 6, 1.0, 1.0);
  Discretization d(g, params(1.0, 0.0, -1.0, 0.5, 1.0));
  ControlTriple c = d.make_controls();
  VelocityField zero_lift = lift_velocity(d, c.g, d.u0);
  CHECK(max_abs(zero_lift.u1) < 1e-11);
  CHECK(max_abs(zero_lift.u2) < 1e-11);
  CHECK(max_abs(zero_lift.u3) < 1e-11);

  set_tangential_g(d, c, 0.5);
  VelocityField lift = lift_velocity(d, c.g, d.u0);
  CHECK(max_abs_div(g, lift) < 1e-10);
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j) CHECK(lift.U1(0, j, k) == 0.0);
  // the wall data actually drives the interior
  CHECK(h1_norm(g, lift) > 1e-3);
}

TEST_CASE("solve_linearized: zero data gives the zero solution") {
  BoxGrid g(6, 6, 6, 1.0, 1.0);
  Discretization d(g, params(1.0, 1.0, 0.0, 0.2, 1.0));
  ControlTriple c = d.make_controls();
  VelocityField ubar(g);
  VelocityField u;
  ScalarField p, th;
  solve_linearized(d, ubar, c, SolveOptions{}, u, p, th);
  CHECK(max_abs(u.u1) < 1e-12);
  CHECK(max_abs(u.u3) < 1e-12);
  CHECK(max_abs(th.v) < 1e-12);
}

TEST_CASE("solve_linearized: conduction data leaves velocity at solver zero") {
  BoxGrid g(8, 8, 8, 1.0, 1.0);
  Discretization d(g, params(4.0, 1.0, -2.0, 0.7, 1.0));
  ControlTriple c = conduction_controls(d);
  VelocityField ubar(g);
  VelocityField u;
  ScalarField p, th;
  solve_linearized(d, ubar, c, SolveOptions{}, u, p, th);
  CHECK(max_abs(u.u1) < 1e-10);
  CHECK(max_abs(u.u2) < 1e-10);
  CHECK(max_abs(u.u3) < 1e-10);
  StateSolution b = basic_state(d);
  double err = 0.0;
  for (long q = 0; q < g.ncells(); ++q)
    err = std::max(err, std::abs(th.v[q] - b.theta.v[q]));
  CHECK(err < 1e-10);
}

TEST_CASE("solve_linearized: discrete energy bound with skew forms") {
  BoxGrid g(6, 6, 6, 1.0, 1.0);
  Discretization d(g, params(2.0, 0.5, -1.0, 0.3, 1.0));
  ControlTriple c = conduction_controls(d);
  set_tangential_g(d, c, 0.4);
  // frozen field: the lift itself
  VelocityField ubar = lift_velocity(d, c.g, d.u0);
  VelocityField u;
  ScalarField p, th;
  solve_linearized(d, ubar, c, SolveOptions{}, u, p, th);
  // Pr * a_bc(u,u) = <rhs, u> with the BC-augmented operator, and
  // a_bc(u,u) >= h1_seminorm(u)^2, so Pr h1(u)^2 <= |<rhs,u>|
  Eigen::VectorXd ctrl = d.bdata->pack(c);
  LinearSystem vsys = assemble_velocity(d, ubar, th);
  Eigen::VectorXd rhs = -(vsys.B * ctrl + vsys.r0);
  Eigen::VectorXd ufree(d.dofs.nfree);
  for (long q = 0; q < d.dofs.nfree; ++q)
    ufree[q] = d.dofs.vi.get(u, d.dofs.free2face[q]);
  double energy_rhs = std::abs(rhs.head(d.dofs.nfree).dot(ufree));
  double s = h1_seminorm(g, u);
  CHECK(d.prm.Pr * s * s <= energy_rhs * (1.0 + 1e-9) + 1e-12);
}

TEST_CASE("picard_solve: conduction scenario converges to the basic state") {
  BoxGrid g(8, 8, 8, 1.0, 1.0);
  for (double R : {0.0, 1.0}) {
    Discretization d(g, params(2.0, R, -1.0, 0.5, 1.0));
    ControlTriple c = conduction_controls(d);
    auto [s, rep] = picard_solve(d, c);
    CHECK(rep.converged);
    CHECK(rep.picard_iters <= 2);
    StateSolution b = basic_state(d);
    double err = 0.0;
    for (long q = 0; q < g.ncells(); ++q)
      err = std::max(err, std::abs(s.theta.v[q] - b.theta.v[q]));
    CHECK(err < 1e-9);
    CHECK(max_abs(s.u.u1) < 1e-9);
    CHECK(max_abs(s.u.u2) < 1e-9);
    CHECK(max_abs(s.u.u3) < 1e-9);
    CHECK(max_abs_div(g, s.u) < 1e-8);
    auto [rm, rt] = weak_residual(d, s, c);
    CHECK(rm < 1e-8);
    CHECK(rt < 1e-8);
  }
}

TEST_CASE("picard_solve: zero everything gives the zero state in one pass") {
  BoxGrid g(6, 6, 6, 1.0, 1.0);
  Discretization d(g, params(1.0, 0.0, 0.0, 0.0, 1.0, 0.0));
  ControlTriple c = d.make_controls();
  auto [s, rep] = picard_solve(d, c);
  CHECK(rep.converged);
  CHECK(rep.picard_iters == 1);
  CHECK(max_abs(s.u.u1) < 1e-13);
  CHECK(max_abs(s.theta.v) < 1e-13);
}

TEST_CASE("picard_solve: small tangential control contracts") {
  BoxGrid g(8, 8, 8, 1.0, 1.0);
  Discretization d(g, params(10.0, 1.0, -1.0, 0.1, 1.0));
  ControlTriple c = conduction_controls(d);
  set_tangential_g(d, c, 0.2);
  auto [s, rep] = picard_solve(d, c);
  CHECK(rep.converged);
  REQUIRE(rep.residual_history.size() >= 3);
  for (std::size_t q = 2; q < rep.residual_history.size(); ++q) {
    double K = rep.residual_history[q] / rep.residual_history[q - 1];
    CHECK(K < 1.0);
  }
  CHECK(max_abs_div(g, s.u) < 1e-8);
  CHECK(h1_norm(g, s.u) > 1e-4);
  auto [rm, rt] = weak_residual(d, s, c);
  CHECK(rm < 1e-7);
  CHECK(rt < 1e-7);
  // fixed-point consistency: one more pass reproduces the state
  VelocityField u2;
  ScalarField p2, t2;
  solve_linearized(d, s.u, c, SolveOptions{}, u2, p2, t2);
  double drift = 0.0;
  for (std::size_t q = 0; q < s.u.u1.size(); ++q)
    drift = std::max(drift, std::abs(u2.u1[q] - s.u.u1[q]));
  CHECK(drift < 1e-8);
}

TEST_CASE("weak_residual: perturbed state has strictly larger residual") {
  BoxGrid g(6, 6, 6, 1.0, 1.0);
  Discretization d(g, params(2.0, 0.5, -1.0, 0.2, 1.0));
  ControlTriple c = conduction_controls(d);
  auto [s, rep] = picard_solve(d, c);
  auto [rm0, rt0] = weak_residual(d, s, c);
  StateSolution sp = s;
  sp.theta(3, 3, 3) += 0.01;
  auto [rm1, rt1] = weak_residual(d, sp, c);
  CHECK(rt1 > 100.0 * std::max(rt0, 1e-14));
  StateSolution z;
  z.u = VelocityField(g);
  z.p = ScalarField(g);
  z.theta = ScalarField(g);
  auto [rmz, rtz] = weak_residual(d, z, c);
  CHECK(rtz > 1e-3);
}

TEST_CASE("uniqueness_gap: formula checks") {
  BoxGrid g(6, 6, 6, 1.0, 1.0);
  Discretization d(g, params(3.0, 0.25, -1.0, 0.5, 1.0));
  ControlTriple c = d.make_controls();
  CHECK(uniqueness_gap(d, c, 1.0) == 3.0);  // zero data: gap = Pr exactly
  ControlTriple cc = conduction_controls(d);
  CHECK(uniqueness_gap(d, cc, 0.1) > 0.0);  // Remark 3.1 regime
  ControlTriple c2 = cc;
  for (double& x : c2.phi2.values) x *= 2.0;
  double g1 = uniqueness_gap(d, cc, 1.0);
  double g2 = uniqueness_gap(d, c2, 1.0);
  CHECK(d.prm.Pr - g2 == doctest::Approx(2.0 * (d.prm.Pr - g1)).epsilon(1e-14));
}

TEST_CASE("picard_solve: rejects bad options") {
  BoxGrid g(4, 4, 4, 1.0, 1.0);
  Discretization d(g, params(1.0, 0.0, 0.0, 0.0, 1.0));
  ControlTriple c = d.make_controls();
  SolveOptions bad;
  bad.tol = -1.0;
  CHECK_THROWS_AS(picard_solve(d, c, bad), std::invalid_argument);
  SolveOptions bad2;
  bad2.damping = 1.5;
  CHECK_THROWS_AS(picard_solve(d, c, bad2), std::invalid_argument);
}
