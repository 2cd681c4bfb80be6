#pragma once

#include "rbm/grid.hpp"
#include "rbm/params.hpp"
#include "rbm/stencils.hpp"

namespace rbm {

/// Discrete realizations of the bilinear/trilinear forms of the stationary
/// system. The skew variants c_sk, c1_sk vanish exactly on repeated last
/// arguments for arbitrary discrete fields; the solvers use only those.
class FormWorkspace {
 public:
  explicit FormWorkspace(const BoxGrid& g) : g_(g), vi_(g_) {}

  const BoxGrid& grid() const { return g_; }

  /// a(u,v) = int grad u : grad v (forward-difference quadrature);
  /// a(u,u) equals h1_seminorm(u)^2.
  double a(const VelocityField& u, const VelocityField& v) const;

  /// c(u,v,z) = int [(u.grad)v].z, centered advection quadrature.
  /// skew=true gives c_sk(u,v,z) = (c(u,v,z) - c(u,z,v))/2.
  double c(const VelocityField& u, const VelocityField& v,
           const VelocityField& z, bool skew) const;

  /// c1(u,s,w) = int [(u.grad)s] w; skew variant as for c.
  double c1(const VelocityField& u, const ScalarField& s, const ScalarField& w,
            bool skew) const;

  /// a1(s,w) = int grad s . grad w; a1(s,s) = h1_seminorm(s)^2.
  double a1(const ScalarField& s, const ScalarField& w) const;

  /// b1(s,v) = int grad s . dv/dx3.
  double b1(const ScalarField& s, const VelocityField& v) const;

  /// <f(theta),v> = int Pr (b + R theta) e3 . v.
  double buoyancy(const ScalarField& theta, const VelocityField& v,
                  const NondimParams& p) const;

  /// |int_{Gamma1} (ds/dx1 v1 + ds/dx2 v2) dS - int grad s . dv/dx3|
  /// for v in the discrete X0. The boundary constraints of X0 are checked
  /// (throws if violated); the solenoidality constraint is enforced exactly
  /// by a Leray projection of a copy of v.
  double trace_identity_residual(const ScalarField& s, const VelocityField& v) const;

 private:
  double c_plain(const VelocityField& u, const VelocityField& v,
                 const VelocityField& z) const;
  double c1_plain(const VelocityField& u, const ScalarField& s,
                  const ScalarField& w) const;

  const BoxGrid& g_;
  VelIndex vi_;
};

}  // namespace rbm
