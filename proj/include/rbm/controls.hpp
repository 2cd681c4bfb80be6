#pragma once

#include <optional>

#include "rbm/grid.hpp"
#include "rbm/h12.hpp"

namespace rbm {

/// Closed convex admissible set for one boundary control: a componentwise box,
/// an H^{1/2} ball, or their intersection (alternating projection).
struct ConstraintSet {
  std::optional<double> lo;      // box lower bound (componentwise)
  std::optional<double> hi;      // box upper bound
  std::optional<double> radius;  // H^{1/2} ball radius

  bool has_box() const { return lo.has_value() || hi.has_value(); }
  bool has_ball() const { return radius.has_value(); }
  void validate() const;
};

/// The three boundary controls of the problem: velocity Dirichlet data g on
/// Gamma0^1, temperature Neumann data phi1 on the lateral walls, temperature
/// Dirichlet data phi2 on the bottom, each with its admissible set.
struct ControlTriple {
  BoundaryField g;      // 3 components, H~^{1/2}_00 constrained
  BoundaryField phi1;   // scalar
  BoundaryField phi2;   // scalar
  ConstraintSet set_g, set_phi1, set_phi2;
};

/// Projection onto a ConstraintSet. Box: componentwise clamp; ball: radial
/// scaling in the Gram norm; intersection: alternating projection (at most 50
/// sweeps). For vector fields the H~^{1/2}_00 linear constraints are
/// re-imposed after each sweep.
void project(const ConstraintSet& set, BoundaryField& f, const H12Gram* gram);

bool is_feasible(const ConstraintSet& set, const BoundaryField& f,
                 const H12Gram* gram, double tol);

}  // namespace rbm
