#include "doctest.h"

#include <cmath>
#include <random>

#include "rbm/optimizer.hpp"

using namespace rbm;

namespace {

NondimParams params(double Pr, double R, double b, double M, double B) {
  NondimParams p;
  p.Pr = Pr; p.R = R; p.b = b; p.M = M; p.B = B;
  p.l = p.L = 1.0;
  return p;
}

ControlTriple perturbed_controls(const Discretization& d, std::uint64_t seed,
                                 double amp, double phi2_base) {
  ControlTriple c = d.make_controls();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1, 1);
  for (std::size_t f = 0; f < d.part.gamma01.size(); ++f) {
    const auto& bf = d.part.gamma01.faces[f];
    if (bf.wall == Wall::XLo || bf.wall == Wall::XHi) {
      c.g.at(1, f) = amp * dist(rng);
      c.g.at(2, f) = amp * dist(rng);
    } else {
      c.g.at(0, f) = amp * dist(rng);
      c.g.at(2, f) = amp * dist(rng);
    }
  }
  c.g.impose_constraints();
  for (std::size_t f = 0; f < d.lateral.size(); ++f)
    c.phi1.at(0, f) = amp * dist(rng);
  for (std::size_t f = 0; f < d.bottom.size(); ++f)
    c.phi2.at(0, f) = phi2_base + amp * dist(rng);
  return c;
}

}  // namespace

TEST_CASE("cost: examples") {
  BoxGrid g(6, 6, 6, 1.0, 1.0);
  Discretization d(g, params(1.0, 0.0, 0.0, 0.0, 1.0));
  StateSolution s;
  s.u = VelocityField(g);
  s.p = ScalarField(g);
  s.theta = ScalarField(g);
  ControlTriple c = d.make_controls();
  Targets t = zero_targets(g);
  CostWeights w;
  w.gamma1 = w.gamma2 = w.gamma3 = 1.0;
  w.gamma4 = w.gamma5 = w.gamma6 = 1.0;
  CHECK(cost(d, s, c, t, w).total == 0.0);

  CostWeights w2{};
  w2.gamma2 = 2.0;
  for (double& x : s.u.u1) x = 1.0;
  CostBreakdown cb = cost(d, s, c, t, w2);
  CHECK(cb.velocity_tracking == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(cb.total == cb.velocity_tracking);

  CostWeights w4{};
  w4.gamma2 = 1.0;
  w4.gamma4 = 1.0;
  for (std::size_t f = 0; f < d.part.gamma01.size(); ++f) c.g.at(2, f) = 0.3;
  c.g.impose_constraints();
  double j1 = cost(d, s, c, t, w4).g_norm_term;
  for (double& x : c.g.values) x *= 2.0;
  double j2 = cost(d, s, c, t, w4).g_norm_term;
  CHECK(j2 == doctest::Approx(4.0 * j1).epsilon(1e-13));
}

TEST_CASE("project: box, ball, idempotence, non-expansiveness") {
  BoxGrid g(5, 5, 5, 1.0, 1.0);
  Discretization d(g, params(1.0, 0.0, 0.0, 0.0, 1.0));
  const H12Gram& gram = d.gram_phi2();

  BoundaryField f(d.bottom, 1, false);
  for (std::size_t q = 0; q < f.region->size(); ++q) f.at(0, q) = 3.0;
  ConstraintSet box;
  box.lo = -1.0;
  box.hi = 1.0;
  project(box, f, &gram);
  for (double x : f.values) CHECK(x == 1.0);

  BoundaryField h(d.bottom, 1, false);
  for (std::size_t q = 0; q < h.region->size(); ++q) h.at(0, q) = 0.25;
  BoundaryField h0 = h;
  project(box, h, &gram);
  CHECK(h.values == h0.values);

  ConstraintSet ball;
  ball.radius = 1.0;
  BoundaryField b(d.bottom, 1, false);
  for (std::size_t q = 0; q < b.region->size(); ++q) b.at(0, q) = 2.0;
  double n0 = std::sqrt(gram.norm_sq(b));
  project(ball, b, &gram);
  double n1 = std::sqrt(gram.norm_sq(b));
  CHECK(n1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(n0 > 1.0);
  BoundaryField b2 = b;
  project(ball, b2, &gram);
  for (std::size_t q = 0; q < b.values.size(); ++q)
    CHECK(b2.values[q] == doctest::Approx(b.values[q]).epsilon(1e-14));

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> dist(-2, 2);
  for (int trial = 0; trial < 50; ++trial) {
    BoundaryField x(d.bottom, 1, false), y(d.bottom, 1, false);
    for (std::size_t q = 0; q < x.values.size(); ++q) {
      x.at(0, q) = dist(rng);
      y.at(0, q) = dist(rng);
    }
    BoundaryField px = x, py = y;
    project(box, px, &gram);
    project(box, py, &gram);
    BoundaryField dxy = x, dpq = px;
    for (std::size_t q = 0; q < dxy.values.size(); ++q) {
      dxy.values[q] -= y.values[q];
      dpq.values[q] -= py.values[q];
    }
    CHECK(std::sqrt(gram.norm_sq(dpq)) <=
          std::sqrt(gram.norm_sq(dxy)) * (1.0 + 1e-10));
  }

  ConstraintSet bad;
  bad.lo = 1.0;
  bad.hi = -1.0;
  BoundaryField z(d.bottom, 1, false);
  CHECK_THROWS_AS(project(bad, z, &gram), std::invalid_argument);
}

TEST_CASE("riesz_map: pure-regularization gradient is gamma4 g") {
  BoxGrid g(6, 6, 6, 1.0, 1.0);
  Discretization d(g, params(2.0, 0.1, -1.0, 0.1, 1.0));
  ControlTriple c = perturbed_controls(d, 7, 0.2, 0.5);
  StateSolution s;
  s.u = VelocityField(g);
  s.p = ScalarField(g);
  s.theta = ScalarField(g);
  Eigen::VectorXd Jx, Jc;
  Targets t = zero_targets(g);
  CostWeights wreg{};
  wreg.gamma4 = 0.25;
  wreg.gamma5 = 0.5;
  wreg.gamma6 = 0.125;
  cost_partials(d, s, c, t, wreg, Jx, Jc);
  CHECK(Jx.norm() == 0.0);
  RieszGradient grad = riesz_map(d, Jc);
  for (std::size_t q = 0; q < c.g.values.size(); ++q)
    CHECK(grad.fields.g.values[q] ==
          doctest::Approx(wreg.gamma4 * c.g.values[q]).epsilon(1e-9).scale(1.0));
  for (std::size_t q = 0; q < c.phi1.values.size(); ++q)
    CHECK(grad.fields.phi1.values[q] ==
          doctest::Approx(wreg.gamma5 * c.phi1.values[q]).epsilon(1e-9).scale(1.0));
  for (std::size_t q = 0; q < c.phi2.values.size(); ++q)
    CHECK(grad.fields.phi2.values[q] ==
          doctest::Approx(wreg.gamma6 * c.phi2.values[q]).epsilon(1e-9).scale(1.0));
}

TEST_CASE("projected_gradient: monotone descent to stationarity") {
  BoxGrid g(6, 6, 6, 1.0, 1.0);
  Discretization d(g, params(5.0, 0.1, -1.0, 0.1, 1.0));
  ControlTriple c0 = perturbed_controls(d, 13, 0.1, 1.0);
  CostWeights w;
  w.gamma2 = 1e-2;
  w.gamma3 = 1e-2;
  w.gamma4 = w.gamma5 = w.gamma6 = 1e-2;
  Targets targets = basic_state_targets(d);
  OptimizerOptions opts;
  opts.tol = 1e-6;
  opts.max_iters = 120;
  opts.state_opts.tol = 1e-13;
  opts.state_opts.max_iters = 60;

  OptimizeResult res = projected_gradient(d, c0, targets, w, opts);
  CHECK(res.report.converged);
  CHECK(res.report.stationarity < 1e-6);
  REQUIRE(res.report.cost_history.size() >= 2);
  for (std::size_t q = 1; q < res.report.cost_history.size(); ++q)
    CHECK(res.report.cost_history[q] <= res.report.cost_history[q - 1] + 1e-15);

  JacobianSolver jac(d, res.state);
  Eigen::VectorXd grad = reduced_gradient_packed(d, jac, res.state, res.controls,
                                                 targets, w);
  ViSlack slack = vi_certificate(d, res.controls, grad, 50, 99);
  CHECK(slack.g >= -1e-6);
  CHECK(slack.phi1 >= -1e-6);
  CHECK(slack.phi2 >= -1e-6);
}

TEST_CASE("projected_gradient: box-constrained iterates stay feasible") {
  BoxGrid g(5, 5, 5, 1.0, 1.0);
  Discretization d(g, params(5.0, 0.1, -1.0, 0.0, 1.0));
  ControlTriple c0 = perturbed_controls(d, 17, 0.05, 0.5);
  c0.set_g.lo = -0.02;
  c0.set_g.hi = 0.02;
  c0.set_phi1.lo = -0.02;
  c0.set_phi1.hi = 0.02;
  c0.set_phi2.lo = 0.45;
  c0.set_phi2.hi = 0.55;
  CostWeights w;
  w.mode = CostWeights::Mode::BoundedSets;
  w.gamma2 = 1.0;
  w.gamma3 = 1.0;
  Targets targets = zero_targets(g);
  OptimizerOptions opts;
  opts.tol = 1e-5;
  opts.max_iters = 25;
  OptimizeResult res = projected_gradient(d, c0, targets, w, opts);
  CHECK(is_feasible(res.controls.set_g, res.controls.g, &d.gram_g(), 1e-12));
  CHECK(is_feasible(res.controls.set_phi1, res.controls.phi1, &d.gram_phi1(), 1e-12));
  CHECK(is_feasible(res.controls.set_phi2, res.controls.phi2, &d.gram_phi2(), 1e-12));
  for (std::size_t q = 1; q < res.report.cost_history.size(); ++q)
    CHECK(res.report.cost_history[q] <= res.report.cost_history[q - 1] + 1e-15);
}

TEST_CASE("second_order_quotient: degenerate case bounded by the control share") {
  BoxGrid g(5, 5, 5, 1.0, 1.0);
  Discretization d(g, params(3.0, 0.2, -1.0, 0.1, 1.0));
  ControlTriple c = perturbed_controls(d, 23, 0.05, 1.0);
  auto [s, rep] = picard_solve(d, c);
  REQUIRE(rep.converged);

  CostWeights w{};
  w.gamma4 = 0.4;
  w.gamma5 = 0.2;
  w.gamma6 = 0.8;
  AdjointState adj = solve_adjoint(d, s, zero_targets(g), w);
  CHECK(max_abs(adj.lambda1.u1) < 1e-12);

  std::vector<double> per_sample, share;
  double q = second_order_quotient(d, s, adj, w, 16, 4242, &per_sample, &share);
  CHECK(q > 0.0);
  double wmin = std::min({w.gamma4, w.gamma5, w.gamma6});
  for (std::size_t i = 0; i < per_sample.size(); ++i)
    CHECK(per_sample[i] >= 0.5 * wmin * share[i]);

  AdjointState bad = adj;
  for (double& x : bad.lambda2.v) x = 50.0;
  for (int kk = 0; kk < g.nz; ++kk)
    for (int jj = 0; jj < g.ny; ++jj)
      for (int ii = 1; ii < g.nx; ++ii)
        bad.lambda1.U1(ii, jj, kk) = 30.0 * ((ii + jj) % 2 ? 1 : -1);
  double qbad = second_order_quotient(d, s, bad, w, 16, 4242);
  CHECK(qbad < q);

  double q2 = second_order_quotient(d, s, adj, w, 16, 4242);
  CHECK(q == q2);
}

TEST_CASE("multiplier_bound_check: zero-weight and matched-target cases") {
  BoxGrid g(5, 5, 5, 1.0, 1.0);
  Discretization d(g, params(2.0, 0.1, -1.0, 0.1, 1.0));
  ControlTriple c = perturbed_controls(d, 29, 0.05, 1.0);
  auto [s, rep] = picard_solve(d, c);
  REQUIRE(rep.converged);
  CostWeights w{};
  AdjointState adj = solve_adjoint(d, s, zero_targets(g), w);
  auto [lhs, rhs] = multiplier_bound_check(d, s, adj, zero_targets(g), w, 0.5, 1.0);
  CHECK(lhs == 0.0);
  CHECK(rhs == 0.0);

  CostWeights w2{};
  w2.gamma2 = 1.0;
  w2.gamma3 = 1.0;
  Targets t;
  t.u_d = s.u;
  t.theta_d = s.theta;
  AdjointState adj2 = solve_adjoint(d, s, t, w2);
  auto [lhs2, rhs2] = multiplier_bound_check(d, s, adj2, t, w2, 0.5, 1.0);
  CHECK(lhs2 < 1e-20);
  CHECK(rhs2 < 1e-20);
  CHECK_THROWS_AS(multiplier_bound_check(d, s, adj2, t, w2, 0.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("uniqueness diagnostics are finite and positive on real data") {
  BoxGrid g(5, 5, 5, 1.0, 1.0);
  Discretization d(g, params(4.0, 0.1, -1.0, 0.1, 1.0));
  ControlTriple c = perturbed_controls(d, 31, 0.1, 1.0);
  auto [s, rep] = picard_solve(d, c);
  REQUIRE(rep.converged);
  CostWeights w;
  w.gamma2 = 1.0;
  w.gamma3 = 1.0;
  w.gamma4 = w.gamma5 = w.gamma6 = 1e-2;
  double beta0 = regular_point_beta0(d, s, 0.01);
  REQUIRE(beta0 > 0.0);
  UniquenessDiagnostics diag =
      uniqueness_diagnostics(d, c, s, zero_targets(g), w, beta0, 1.0);
  CHECK(std::isfinite(diag.S1));
  CHECK(diag.S1 > 0.0);
  CHECK(diag.H0 > 0.0);
  CHECK(diag.H1 > 0.0);
  CHECK(diag.I >= 0.0);
}

TEST_CASE("multiplier bound: implied constant is grid-stable under refinement") {
  double implied[2];
  int idx = 0;
  for (int n : {6, 12}) {
    NondimParams p;
    p.Pr = 4.0; p.R = 0.1; p.b = -1.0; p.M = 0.1; p.B = 1.0;
    p.l = p.L = 1.0;
    BoxGrid g(n, n, n, 1.0, 1.0);
    Discretization d(g, p);
    ControlTriple c = d.make_controls();
    for (std::size_t f = 0; f < d.bottom.size(); ++f) {
      const auto& bf = d.bottom.faces[f];
      c.phi2.at(0, f) = 1.0 + 0.2 * std::sin(M_PI * bf.cx) * std::sin(2 * M_PI * bf.cy);
    }
    for (std::size_t f = 0; f < d.part.gamma01.size(); ++f) {
      const auto& bf = d.part.gamma01.faces[f];
      if (bf.wall == Wall::XLo) c.g.at(2, f) = 0.05 * std::sin(M_PI * bf.cy);
    }
    c.g.impose_constraints();
    SolveOptions so;
    so.tol = 1e-13;
    auto [s, rep] = picard_solve(d, c, so);
    REQUIRE(rep.converged);
    CostWeights w;
    w.gamma2 = 1.0;
    w.gamma3 = 1.0;
    Targets t = zero_targets(g);
    AdjointState adj = solve_adjoint(d, s, t, w);
    double beta0 = regular_point_beta0(d, s, 0.01);
    REQUIRE(beta0 > 0.0);
    auto [lhs, rhs] = multiplier_bound_check(d, s, adj, t, w, beta0, 1.0);
    implied[idx++] = lhs / rhs;  // the C1 making the bound tight (C1_ref = 1)
  }
  CHECK(std::isfinite(implied[0]));
  CHECK(implied[0] > 0.0);
  double ratio = implied[0] / implied[1];
  CHECK(ratio > 0.8);
  CHECK(ratio < 1.25);
}
