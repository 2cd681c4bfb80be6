#include "rbm/stencils.hpp"

namespace rbm {

long face_dof(const VelIndex& vi, const FaceRef& f) {
  switch (f.m) {
    case 0: return vi.u1(f.i, f.j, f.k);
    case 1: return vi.u2(f.i, f.j, f.k);
    default: return vi.u3(f.i, f.j, f.k);
  }
}

double face_weight(const BoxGrid& g, const FaceRef& f) {
  double V = g.cell_volume();
  bool on_boundary = (f.m == 0 && (f.i == 0 || f.i == g.nx)) ||
                     (f.m == 1 && (f.j == 0 || f.j == g.ny)) ||
                     (f.m == 2 && (f.k == 0 || f.k == g.nz));
  return on_boundary ? 0.5 * V : V;
}

namespace {

// 4-point average of component d faces around an m-face; collapses to the
// single adjacent cell's 2 faces when the m-face lies on its own boundary.
Stencil cross_interp(const BoxGrid& g, const VelIndex& vi, const FaceRef& f, int d) {
  Stencil s;
  // cells adjacent to the face along axis m
  int clo[3] = {f.i, f.j, f.k};
  int chi[3] = {f.i, f.j, f.k};
  clo[f.m] -= 1;  // lower adjacent cell
  int nmax[3] = {g.nx, g.ny, g.nz};
  bool has_lo = clo[f.m] >= 0;
  bool has_hi = chi[f.m] < nmax[f.m];
  double w = (has_lo && has_hi) ? 0.25 : 0.5;
  auto push_cell = [&](const int c[3]) {
    int lo[3] = {c[0], c[1], c[2]};
    int hi[3] = {c[0], c[1], c[2]};
    hi[d] += 1;
    auto dof = [&](const int p[3]) {
      switch (d) {
        case 0: return vi.u1(p[0], p[1], p[2]);
        case 1: return vi.u2(p[0], p[1], p[2]);
        default: return vi.u3(p[0], p[1], p[2]);
      }
    };
    s.push_back({dof(lo), w});
    s.push_back({dof(hi), w});
  };
  if (has_lo) push_cell(clo);
  if (has_hi) push_cell(chi);
  return s;
}

}  // namespace

Stencil advect_interp(const BoxGrid& g, const VelIndex& vi, const FaceRef& f, int d) {
  if (d == f.m) return {{face_dof(vi, f), 1.0}};
  return cross_interp(g, vi, f, d);
}

Stencil advect_diff(const BoxGrid& g, const VelIndex& vi, const FaceRef& f, int d) {
  // index range of component m along axis d
  int n;  // largest valid index along axis d for this component
  if (d == 0) n = (f.m == 0) ? g.nx : g.nx - 1;
  else if (d == 1) n = (f.m == 1) ? g.ny : g.ny - 1;
  else n = (f.m == 2) ? g.nz : g.nz - 1;
  double h = (d == 0) ? g.hx : (d == 1) ? g.hy : g.hz;
  int pos = (d == 0) ? f.i : (d == 1) ? f.j : f.k;

  auto dof_at = [&](int p) {
    FaceRef q = f;
    if (d == 0) q.i = p;
    else if (d == 1) q.j = p;
    else q.k = p;
    return face_dof(vi, q);
  };

  Stencil s;
  if (pos > 0 && pos < n) {
    s.push_back({dof_at(pos + 1), 0.5 / h});
    s.push_back({dof_at(pos - 1), -0.5 / h});
  } else if (pos == 0) {
    s.push_back({dof_at(1), 1.0 / h});
    s.push_back({dof_at(0), -1.0 / h});
  } else {
    s.push_back({dof_at(n), 1.0 / h});
    s.push_back({dof_at(n - 1), -1.0 / h});
  }
  return s;
}

Stencil cell_interp(const BoxGrid&, const VelIndex& vi, int i, int j, int k, int d) {
  switch (d) {
    case 0: return {{vi.u1(i, j, k), 0.5}, {vi.u1(i + 1, j, k), 0.5}};
    case 1: return {{vi.u2(i, j, k), 0.5}, {vi.u2(i, j + 1, k), 0.5}};
    default: return {{vi.u3(i, j, k), 0.5}, {vi.u3(i, j, k + 1), 0.5}};
  }
}

Stencil cell_diff(const BoxGrid& g, int i, int j, int k, int d) {
  int n = (d == 0) ? g.nx : (d == 1) ? g.ny : g.nz;
  double h = (d == 0) ? g.hx : (d == 1) ? g.hy : g.hz;
  int pos = (d == 0) ? i : (d == 1) ? j : k;
  auto cell_at = [&](int p) {
    int ii = i, jj = j, kk = k;
    if (d == 0) ii = p;
    else if (d == 1) jj = p;
    else kk = p;
    return g.cell(ii, jj, kk);
  };
  Stencil s;
  if (pos > 0 && pos < n - 1) {
    s.push_back({cell_at(pos + 1), 0.5 / h});
    s.push_back({cell_at(pos - 1), -0.5 / h});
  } else if (pos == 0) {
    s.push_back({cell_at(1), 1.0 / h});
    s.push_back({cell_at(0), -1.0 / h});
  } else {
    s.push_back({cell_at(n - 1), 1.0 / h});
    s.push_back({cell_at(n - 2), -1.0 / h});
  }
  return s;
}

}  // namespace rbm
