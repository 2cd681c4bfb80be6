#pragma once

#include "rbm/assembly.hpp"
#include "rbm/state_solver.hpp"

namespace rbm {

/// Tracking targets of the cost functional.
struct Targets {
  VelocityField u_d;
  ScalarField theta_d;
};

Targets zero_targets(const BoxGrid& g);
Targets basic_state_targets(const Discretization& d);

/// The six terms of
///   J = g1/2 ||rot u||^2 + g2/2 ||u - u_d||^2 + g3/2 ||theta - theta_d||^2
///     + g4/2 ||g||_{1/2}^2 + g5/2 ||phi1||_{1/2}^2 + g6/2 ||phi2||_{1/2}^2.
struct CostBreakdown {
  double vorticity_term = 0.0;
  double velocity_tracking = 0.0;
  double temperature_tracking = 0.0;
  double g_norm_term = 0.0;
  double phi1_norm_term = 0.0;
  double phi2_norm_term = 0.0;
  double total = 0.0;
};

CostBreakdown cost(const Discretization& d, const StateSolution& s,
                   const ControlTriple& controls, const Targets& targets,
                   const CostWeights& w);

/// Partial derivatives of J: Jx over the coupled state layout [u|p|mu|theta]
/// (free velocity DOFs only) and Jc over the packed control DOFs, including
/// the chain through constrained boundary faces.
void cost_partials(const Discretization& d, const StateSolution& s,
                   const ControlTriple& controls, const Targets& targets,
                   const CostWeights& w, Eigen::VectorXd& Jx, Eigen::VectorXd& Jc);

}  // namespace rbm
