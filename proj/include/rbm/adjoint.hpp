#pragma once

#include "rbm/cost.hpp"

namespace rbm {

/// Lagrange multipliers of the optimality system: adjoint velocity lambda1
/// (zero trace on Gamma0, third component zero on Gamma1), adjoint pressure
/// pi (mean-pinned), adjoint temperature lambda2 (zero bottom trace), and the
/// post-processed boundary traces lambda3 (Gamma0) and lambda4 (bottom).
struct AdjointState {
  VelocityField lambda1;
  ScalarField pi;
  ScalarField lambda2;
  BoundaryField lambda3;
  BoundaryField lambda4;
  Eigen::VectorXd raw;  // stacked multiplier vector in the coupled layout
};

/// Factored coupled Jacobian at a state; solves the linearized-state system
/// and its transpose (the adjoint).
class JacobianSolver {
 public:
  JacobianSolver(const Discretization& d, const StateSolution& s);

  const LinearSystem& system() const { return sys_; }
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::VectorXd solve_transpose(const Eigen::VectorXd& rhs) const;

 private:
  LinearSystem sys_;
  Eigen::SparseLU<SpMat> lu_, luT_;
};

/// Solves the adjoint system (exact transpose of the discrete linearized
/// operator) with the cost gradient as right side and extracts the traces.
AdjointState solve_adjoint(const Discretization& d, const StateSolution& s,
                           const Targets& targets, const CostWeights& w);
AdjointState solve_adjoint(const Discretization& d, const JacobianSolver& jac,
                           const StateSolution& s, const Targets& targets,
                           const CostWeights& w);

/// Linearized-state (kernel) solve: direction (r, rho, tau) in the packed
/// control layout; returns the velocity/temperature response.
void linearized_state(const Discretization& d, const JacobianSolver& jac,
                      const Eigen::VectorXd& dctrl, VelocityField& h1,
                      ScalarField& h2);

/// beta0 = min{ Pr - C( Pr(M+R) + ||u||_H1 + ||theta||_H1^2 ),
///              1/2 - C Pr(R+M) } for a reference constant C.
double regular_point_beta0(const Discretization& d, const StateSolution& s,
                           double C_ref);

/// Reduced-cost gradient in the packed control layout: Jc - B^T lambda.
Eigen::VectorXd reduced_gradient_packed(const Discretization& d,
                                        const JacobianSolver& jac,
                                        const StateSolution& s,
                                        const ControlTriple& controls,
                                        const Targets& targets,
                                        const CostWeights& w,
                                        AdjointState* adj_out = nullptr);

}  // namespace rbm
