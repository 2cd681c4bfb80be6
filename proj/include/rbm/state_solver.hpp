#pragma once

#include "rbm/assembly.hpp"
#include "rbm/controls.hpp"

namespace rbm {

/// Velocity / pressure / temperature triple on the MAC grid. Pressure is
/// defined up to a constant; the solver pins its mean to zero.
struct StateSolution {
  VelocityField u;
  ScalarField p;
  ScalarField theta;
};

struct SolveOptions {
  double tol = 1e-11;           // relative H1 change between iterates
  double residual_tol = 1e-9;   // scaled weak-residual stop
  int max_iters = 50;
  double damping = 1.0;         // Picard damping omega in (0,1]
  double linear_tol = 1e-12;    // iterative path tolerance
  long direct_dof_limit = 70000;  // saddle size above which the Schur path runs
  double apriori_C = 1.0;       // reference constant for the monitored estimate
};

struct SolveReport {
  int picard_iters = 0;
  std::vector<double> residual_history;
  double apriori_lhs = 0.0;
  double apriori_rhs = 0.0;
  bool converged = false;
  bool used_schur_path = false;
};

/// Exact conduction solution (u = 0, theta linear in x3, quadratic pressure)
/// sampled on the grid:
///   theta_b = theta_c - theta_c B/(1+B) x3,
///   p_b = p1 x3 + p2 x3^2 with p1 = b + R theta_c, p2 = -R theta_c B/(2(1+B)),
/// mean-pinned to match the solver's pressure normalization.
StateSolution basic_state(const Discretization& d);

/// Divergence-free Stokes extension attaining g on Gamma0^1, u0 on Gamma0^2,
/// u3 = 0 on Gamma1 (Hopf-style lift realized by a Stokes solve).
VelocityField lift_velocity(const Discretization& d, const BoundaryField& g,
                            const BoundaryField& u0, const SolveOptions& opts = {});

/// Harmonic lift attaining phi2 on the bottom, the Robin condition on the top
/// and Neumann data phi1 on the lateral walls.
ScalarField lift_temperature(const Discretization& d, const BoundaryField& phi1,
                             const BoundaryField& phi2);

/// One pass of the fixed-point map: temperature solve with frozen ubar, then
/// the Oseen-type velocity solve with the fresh temperature.
void solve_linearized(const Discretization& d, const VelocityField& ubar,
                      const ControlTriple& controls, const SolveOptions& opts,
                      VelocityField& u_out, ScalarField& p_out, ScalarField& theta_out);

/// Picard iteration on the frozen-advection map, damped on residual increase.
/// Throws on blow-up; flags (not throws) non-convergence.
std::pair<StateSolution, SolveReport> picard_solve(const Discretization& d,
                                                   const ControlTriple& controls,
                                                   const SolveOptions& opts = {},
                                                   const StateSolution* warm_start = nullptr);

/// Scaled dual-norm surrogates of the momentum and temperature weak residuals
/// (diagonally preconditioned l2 norms of the assembled residual rows).
std::pair<double, double> weak_residual(const Discretization& d,
                                        const StateSolution& s,
                                        const ControlTriple& controls);

/// Sufficient-uniqueness margin with reference constant C_ref:
///   Pr - C_ref (Pr(M+R)+1) [||u0|| + ||g|| + ||phi1|| + ||phi2||]_{1/2}.
double uniqueness_gap(const Discretization& d, const ControlTriple& controls,
                      double C_ref);

}  // namespace rbm
