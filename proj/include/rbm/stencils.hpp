#pragma once

#include "rbm/grid.hpp"

namespace rbm {

/// Flat indexing of all MAC velocity DOFs: u1 block, then u2, then u3.
struct VelIndex {
  const BoxGrid& g;
  long off1, off2, off3, total;

  explicit VelIndex(const BoxGrid& g_)
      : g(g_), off1(0), off2(g_.nu1()), off3(g_.nu1() + g_.nu2()),
        total(g_.nu1() + g_.nu2() + g_.nu3()) {}

  long u1(int i, int j, int k) const { return off1 + g.fx(i, j, k); }
  long u2(int i, int j, int k) const { return off2 + g.fy(i, j, k); }
  long u3(int i, int j, int k) const { return off3 + g.fz(i, j, k); }

  double get(const VelocityField& v, long id) const {
    if (id < off2) return v.u1[id];
    if (id < off3) return v.u2[id - off2];
    return v.u3[id - off3];
  }
};

struct StencilEntry {
  long dof;
  double w;
};
using Stencil = std::vector<StencilEntry>;

/// Identifies one face of velocity component m by its (i,j,k) in that
/// component's array.
struct FaceRef {
  int m;  // component 0,1,2
  int i, j, k;
};

/// Quadrature weight of a face: cell volume, halved on own-normal boundary
/// faces (trapezoid rule in the normal direction).
double face_weight(const BoxGrid& g, const FaceRef& f);

/// Interpolation of advecting component d onto face f (own component: the
/// value itself; others: 4-point average, 2-point at own-normal boundaries).
Stencil advect_interp(const BoxGrid& g, const VelIndex& vi, const FaceRef& f, int d);

/// Derivative of component f.m in direction d at face f: centered differences
/// in the interior, one-sided at the array ends. Entries index component f.m.
Stencil advect_diff(const BoxGrid& g, const VelIndex& vi, const FaceRef& f, int d);

/// Cell-based stencils for the temperature advection (u.grad theta):
/// interpolation of component d to the cell center (two faces, 1/2 each)...
Stencil cell_interp(const BoxGrid& g, const VelIndex& vi, int i, int j, int k, int d);
/// ...and the cell-centered derivative of a cell scalar in direction d
/// (centered interior, one-sided at wall-adjacent cells). Entries index cells.
Stencil cell_diff(const BoxGrid& g, int i, int j, int k, int d);

/// Visits every face of every velocity component once.
template <typename F>
void for_each_face(const BoxGrid& g, F&& fn) {
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i <= g.nx; ++i) fn(FaceRef{0, i, j, k});
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j <= g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) fn(FaceRef{1, i, j, k});
  for (int k = 0; k <= g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) fn(FaceRef{2, i, j, k});
}

long face_dof(const VelIndex& vi, const FaceRef& f);

}  // namespace rbm
