#include "rbm/controls.hpp"

#include <algorithm>
#include <cmath>

namespace rbm {

void ConstraintSet::validate() const {
  if (lo && hi && *lo > *hi)
    throw std::invalid_argument("ConstraintSet: lo > hi");
  if (radius && !(*radius > 0.0))
    throw std::invalid_argument("ConstraintSet: ball radius must be > 0");
}

namespace {

void clamp_box(const ConstraintSet& set, BoundaryField& f) {
  for (double& x : f.values) {
    if (set.lo) x = std::max(x, *set.lo);
    if (set.hi) x = std::min(x, *set.hi);
  }
}

void scale_ball(const ConstraintSet& set, BoundaryField& f, const H12Gram& gram) {
  double n2 = gram.norm_sq(f);
  double r = *set.radius;
  if (n2 > r * r) {
    double s = r / std::sqrt(n2);
    for (double& x : f.values) x *= s;
  }
}

}  // namespace

void project(const ConstraintSet& set, BoundaryField& f, const H12Gram* gram) {
  set.validate();
  if (set.has_ball() && gram == nullptr)
    throw std::invalid_argument("project: ball constraint needs a Gram matrix");
  if (!set.has_box() && !set.has_ball()) {
    f.impose_constraints();
    return;
  }
  if (set.has_box() && !set.has_ball()) {
    clamp_box(set, f);
    f.impose_constraints();
    return;
  }
  if (!set.has_box() && set.has_ball()) {
    scale_ball(set, f, *gram);
    f.impose_constraints();
    return;
  }
  // intersection: alternating projection, at most 50 sweeps
  for (int sweep = 0; sweep < 50; ++sweep) {
    BoundaryField before = f;
    clamp_box(set, f);
    scale_ball(set, f, *gram);
    f.impose_constraints();
    double delta = 0.0;
    for (std::size_t q = 0; q < f.values.size(); ++q)
      delta = std::max(delta, std::abs(f.values[q] - before.values[q]));
    if (delta < 1e-14) break;
  }
}

bool is_feasible(const ConstraintSet& set, const BoundaryField& f,
                 const H12Gram* gram, double tol) {
  if (set.has_box()) {
    for (double x : f.values) {
      if (set.lo && x < *set.lo - tol) return false;
      if (set.hi && x > *set.hi + tol) return false;
    }
  }
  if (set.has_ball()) {
    if (gram == nullptr) return false;
    if (std::sqrt(gram->norm_sq(f)) > *set.radius + tol) return false;
  }
  return f.constraints_satisfied(std::max(tol, 1e-10));
}

}  // namespace rbm
