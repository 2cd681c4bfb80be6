#pragma once

#include <optional>

#include "rbm/adjoint.hpp"

namespace rbm {

struct OptimizerOptions {
  double tol = 1e-6;             // stationarity residual target
  int max_iters = 200;
  double armijo_c1 = 1e-4;
  int max_backtracks = 30;
  double initial_step = 1.0;
  std::uint64_t seed = 0;
  SolveOptions state_opts{};
  double beta0_C_ref = 1.0;      // for the multiplier-bound report entries
  double C1_ref = 1.0;
};

struct OptimalityReport {
  double vi_residual_g = 0.0;
  double vi_residual_phi1 = 0.0;
  double vi_residual_phi2 = 0.0;
  std::vector<double> cost_history;
  std::vector<double> step_history;
  std::optional<double> second_order_min_quotient;
  double multiplier_bound_lhs = 0.0;
  double multiplier_bound_rhs = 0.0;
  bool converged = false;
  int iterations = 0;
  double stationarity = 0.0;
};

/// H^{1/2}-Riesz representative of a packed dual vector, with the tangent
/// projection of the g block (zero normal component away from {x3=0}, zero
/// net flux) applied Gram-orthogonally.
struct RieszGradient {
  ControlTriple fields;       // gradient as control-space fields
  Eigen::VectorXd packed;     // same, packed
  Eigen::VectorXd dual;       // the algebraic dual it represents
};
RieszGradient riesz_map(const Discretization& d, const Eigen::VectorXd& dual);

/// Stationarity residual ||c - P(c - G)||_{1/2} summed over the controls.
double stationarity_residual(const Discretization& d, const ControlTriple& c,
                             const RieszGradient& grad);

/// Projected gradient with Armijo backtracking on the reduced cost.
struct OptimizeResult {
  ControlTriple controls;
  StateSolution state;
  AdjointState adjoint;
  OptimalityReport report;
};
OptimizeResult projected_gradient(const Discretization& d,
                                  const ControlTriple& initial,
                                  const Targets& targets, const CostWeights& w,
                                  const OptimizerOptions& opts);

/// Minimum over seeded random control directions of
///   L_zz[t,t] / ||t||_G^2
/// with L_zz the second derivative of the Lagrangian (kernel directions built
/// by the linearized-state solve).
double second_order_quotient(const Discretization& d, const StateSolution& s,
                             const AdjointState& adj, const CostWeights& w,
                             int samples, std::uint64_t seed,
                             std::vector<double>* per_sample = nullptr,
                             std::vector<double>* control_share = nullptr);

/// Multiplier-energy bound: returns (lhs, rhs) with
///   lhs = ||lambda1||_H1^2 + ||lambda2||_H1^2,
///   rhs = (C1_ref / beta0) M[u, theta].
std::pair<double, double> multiplier_bound_check(const Discretization& d,
                                                 const StateSolution& s,
                                                 const AdjointState& adj,
                                                 const Targets& targets,
                                                 const CostWeights& w,
                                                 double beta0, double C1_ref);

/// Uniqueness-of-optimum diagnostic quantities (reported only).
struct UniquenessDiagnostics {
  double S1 = 0.0, S2 = 0.0, H0 = 0.0, H1 = 0.0, I = 0.0;
};
UniquenessDiagnostics uniqueness_diagnostics(const Discretization& d,
                                             const ControlTriple& controls,
                                             const StateSolution& s,
                                             const Targets& targets,
                                             const CostWeights& w,
                                             double beta0, double C_ref);

/// VI certificate: worst slack of <grad, c - chat> >= -tol ||c - chat|| over
/// n random feasible test controls (per control channel).
struct ViSlack {
  double g = 0.0, phi1 = 0.0, phi2 = 0.0;  // most negative normalized slack
};
ViSlack vi_certificate(const Discretization& d, const ControlTriple& chat,
                       const Eigen::VectorXd& grad_dual, int n_random,
                       std::uint64_t seed);

}  // namespace rbm
