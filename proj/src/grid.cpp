#include "rbm/grid.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>

namespace rbm {

BoxGrid::BoxGrid(int nx_, int ny_, int nz_, double l_, double L_)
    : nx(nx_), ny(ny_), nz(nz_), l(l_), L(L_) {
  if (nx < 4 || ny < 4 || nz < 4)
    throw std::invalid_argument("BoxGrid: cell counts must be >= 4");
  if (!(l > 0.0) || !(L > 0.0))
    throw std::invalid_argument("BoxGrid: extents must be positive");
  hx = l / nx;
  hy = L / ny;
  hz = 1.0 / nz;
}

BoundaryRegion make_region(const BoxGrid& g, BoundaryRegion::Tag tag) {
  BoundaryRegion r;
  r.tag = tag;
  auto add_bottom_top = [&](bool top) {
    int k = top ? g.nz : 0;
    double z = top ? 1.0 : 0.0;
    double nz_out = top ? 1.0 : -1.0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        r.faces.push_back({top ? Wall::Top : Wall::Bottom, i, j, k,
                           g.xc(i), g.yc(j), z, g.hx * g.hy, 0, 0, nz_out});
  };
  auto add_lateral = [&]() {
    for (int k = 0; k < g.nz; ++k)
      for (int j = 0; j < g.ny; ++j) {
        r.faces.push_back({Wall::XLo, 0, j, k, 0.0, g.yc(j), g.zc(k),
                           g.hy * g.hz, -1, 0, 0});
        r.faces.push_back({Wall::XHi, g.nx, j, k, g.l, g.yc(j), g.zc(k),
                           g.hy * g.hz, 1, 0, 0});
      }
    for (int k = 0; k < g.nz; ++k)
      for (int i = 0; i < g.nx; ++i) {
        r.faces.push_back({Wall::YLo, i, 0, k, g.xc(i), 0.0, g.zc(k),
                           g.hx * g.hz, 0, -1, 0});
        r.faces.push_back({Wall::YHi, i, g.ny, k, g.xc(i), g.L, g.zc(k),
                           g.hx * g.hz, 0, 1, 0});
      }
  };
  switch (tag) {
    case BoundaryRegion::Tag::Top: r.name = "Gamma1"; add_bottom_top(true); break;
    case BoundaryRegion::Tag::Bottom: r.name = "Gamma3"; add_bottom_top(false); break;
    case BoundaryRegion::Tag::Lateral: r.name = "Gamma2"; add_lateral(); break;
    case BoundaryRegion::Tag::Gamma0:
      r.name = "Gamma0";
      add_bottom_top(false);
      add_lateral();
      break;
    case BoundaryRegion::Tag::Custom: r.name = "custom"; break;
  }
  return r;
}

ControlPartition default_partition(const BoxGrid& g) {
  ControlPartition p;
  p.gamma01 = make_region(g, BoundaryRegion::Tag::Lateral);
  p.gamma01.tag = BoundaryRegion::Tag::Custom;
  p.gamma01.name = "Gamma0_1";
  p.gamma02 = make_region(g, BoundaryRegion::Tag::Bottom);
  p.gamma02.tag = BoundaryRegion::Tag::Custom;
  p.gamma02.name = "Gamma0_2";
  return p;
}

ControlPartition partition_from_mask(const BoxGrid& g,
                                     const std::vector<bool>& gamma0_mask) {
  BoundaryRegion g0 = make_region(g, BoundaryRegion::Tag::Gamma0);
  if (gamma0_mask.size() != g0.size())
    throw std::invalid_argument("partition_from_mask: mask size mismatch");
  ControlPartition p;
  p.gamma01.name = "Gamma0_1";
  p.gamma02.name = "Gamma0_2";
  for (std::size_t f = 0; f < g0.size(); ++f)
    (gamma0_mask[f] ? p.gamma01 : p.gamma02).faces.push_back(g0.faces[f]);
  return p;
}

double BoundaryField::normal_flux() const {
  if (ncomp == 1) return 0.0;
  double s = 0.0;
  for (std::size_t f = 0; f < region->size(); ++f) {
    const auto& bf = region->faces[f];
    s += (at(0, f) * bf.nvx + at(1, f) * bf.nvy + at(2, f) * bf.nvz) * bf.area;
  }
  return s;
}

void BoundaryField::impose_constraints() {
  if (ncomp != 3 || !normal_trace_constrained) return;
  // zero normal component away from {x3=0}
  double flux = 0.0, bottom_area = 0.0;
  for (std::size_t f = 0; f < region->size(); ++f) {
    const auto& bf = region->faces[f];
    if (bf.wall != Wall::Bottom) {
      double vn = at(0, f) * bf.nvx + at(1, f) * bf.nvy + at(2, f) * bf.nvz;
      at(0, f) -= vn * bf.nvx;
      at(1, f) -= vn * bf.nvy;
      at(2, f) -= vn * bf.nvz;
    } else {
      flux += at(2, f) * bf.nvz * bf.area;
      bottom_area += bf.area;
    }
  }
  if (bottom_area > 0.0 && flux != 0.0) {
    double shift = flux / bottom_area;  // remove mean normal flux on {x3=0}
    for (std::size_t f = 0; f < region->size(); ++f) {
      const auto& bf = region->faces[f];
      if (bf.wall == Wall::Bottom) at(2, f) -= shift * bf.nvz;
    }
  }
}

bool BoundaryField::constraints_satisfied(double tol) const {
  if (ncomp != 3 || !normal_trace_constrained) return true;
  for (std::size_t f = 0; f < region->size(); ++f) {
    const auto& bf = region->faces[f];
    if (bf.wall == Wall::Bottom) continue;
    double vn = at(0, f) * bf.nvx + at(1, f) * bf.nvy + at(2, f) * bf.nvz;
    if (std::abs(vn) > tol) return false;
  }
  return std::abs(normal_flux()) <= tol;
}

// ---------------------------------------------------------------------------

ScalarField divergence(const BoxGrid& g, const VelocityField& v) {
  if (!v.matches(g)) throw std::invalid_argument("divergence: dimension mismatch");
  ScalarField d(g);
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        d(i, j, k) = (v.U1(i + 1, j, k) - v.U1(i, j, k)) / g.hx +
                     (v.U2(i, j + 1, k) - v.U2(i, j, k)) / g.hy +
                     (v.U3(i, j, k + 1) - v.U3(i, j, k)) / g.hz;
  return d;
}

CurlField curl(const BoxGrid& g, const VelocityField& v) {
  if (!v.matches(g)) throw std::invalid_argument("curl: dimension mismatch");
  CurlField w;
  w.nx = g.nx; w.ny = g.ny; w.nz = g.nz;
  w.wx.assign(std::size_t(g.nx) * (g.ny - 1) * (g.nz - 1), 0.0);
  w.wy.assign(std::size_t(g.nx - 1) * g.ny * (g.nz - 1), 0.0);
  w.wz.assign(std::size_t(g.nx - 1) * (g.ny - 1) * g.nz, 0.0);
  // wx on x-edges: d(u3)/dy - d(u2)/dz
  for (int k = 1; k < g.nz; ++k)
    for (int j = 1; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        w.WX(i, j, k) = (v.U3(i, j, k) - v.U3(i, j - 1, k)) / g.hy -
                        (v.U2(i, j, k) - v.U2(i, j, k - 1)) / g.hz;
  // wy on y-edges: d(u1)/dz - d(u3)/dx
  for (int k = 1; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 1; i < g.nx; ++i)
        w.WY(i, j, k) = (v.U1(i, j, k) - v.U1(i, j, k - 1)) / g.hz -
                        (v.U3(i, j, k) - v.U3(i - 1, j, k)) / g.hx;
  // wz on z-edges: d(u2)/dx - d(u1)/dy
  for (int k = 0; k < g.nz; ++k)
    for (int j = 1; j < g.ny; ++j)
      for (int i = 1; i < g.nx; ++i)
        w.WZ(i, j, k) = (v.U2(i, j, k) - v.U2(i - 1, j, k)) / g.hx -
                        (v.U1(i, j, k) - v.U1(i, j - 1, k)) / g.hy;
  return w;
}

double curl_l2_sq(const BoxGrid& g, const CurlField& w) {
  double V = g.cell_volume(), s = 0.0;
  for (double x : w.wx) s += x * x;
  for (double x : w.wy) s += x * x;
  for (double x : w.wz) s += x * x;
  return s * V;
}

VelocityField grad_c2f(const BoxGrid& g, const ScalarField& q) {
  if (!q.matches(g)) throw std::invalid_argument("grad_c2f: dimension mismatch");
  VelocityField v(g);
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 1; i < g.nx; ++i)
        v.U1(i, j, k) = (q(i, j, k) - q(i - 1, j, k)) / g.hx;
  for (int k = 0; k < g.nz; ++k)
    for (int j = 1; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        v.U2(i, j, k) = (q(i, j, k) - q(i, j - 1, k)) / g.hy;
  for (int k = 1; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        v.U3(i, j, k) = (q(i, j, k) - q(i, j, k - 1)) / g.hz;
  return v;
}

double h1_seminorm(const BoxGrid& g, const ScalarField& f) {
  if (!f.matches(g)) throw std::invalid_argument("h1_seminorm: dimension mismatch");
  const double V = g.cell_volume();
  double s = 0.0;
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i + 1 < g.nx; ++i) {
        double d = (f(i + 1, j, k) - f(i, j, k)) / g.hx;
        s += d * d * V;
      }
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j + 1 < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        double d = (f(i, j + 1, k) - f(i, j, k)) / g.hy;
        s += d * d * V;
      }
  for (int k = 0; k + 1 < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        double d = (f(i, j, k + 1) - f(i, j, k)) / g.hz;
        s += d * d * V;
      }
  return std::sqrt(s);
}

namespace {
// forward differences of one face-component array along each axis
double comp_semi_sq(const std::vector<double>& a, int n0, int n1, int n2,
                    double h0, double h1, double h2, double V) {
  auto at = [&](int i, int j, int k) { return a[(long(k) * n1 + j) * n0 + i]; };
  double s = 0.0;
  for (int k = 0; k < n2; ++k)
    for (int j = 0; j < n1; ++j)
      for (int i = 0; i + 1 < n0; ++i) {
        double d = (at(i + 1, j, k) - at(i, j, k)) / h0;
        s += d * d * V;
      }
  for (int k = 0; k < n2; ++k)
    for (int j = 0; j + 1 < n1; ++j)
      for (int i = 0; i < n0; ++i) {
        double d = (at(i, j + 1, k) - at(i, j, k)) / h1;
        s += d * d * V;
      }
  for (int k = 0; k + 1 < n2; ++k)
    for (int j = 0; j < n1; ++j)
      for (int i = 0; i < n0; ++i) {
        double d = (at(i, j, k + 1) - at(i, j, k)) / h2;
        s += d * d * V;
      }
  return s;
}
}  // namespace

double h1_seminorm(const BoxGrid& g, const VelocityField& f) {
  if (!f.matches(g)) throw std::invalid_argument("h1_seminorm: dimension mismatch");
  const double V = g.cell_volume();
  double s = comp_semi_sq(f.u1, g.nx + 1, g.ny, g.nz, g.hx, g.hy, g.hz, V) +
             comp_semi_sq(f.u2, g.nx, g.ny + 1, g.nz, g.hx, g.hy, g.hz, V) +
             comp_semi_sq(f.u3, g.nx, g.ny, g.nz + 1, g.hx, g.hy, g.hz, V);
  return std::sqrt(s);
}

double l2_norm_sq(const BoxGrid& g, const ScalarField& f) {
  double s = 0.0;
  for (double x : f.v) s += x * x;
  return s * g.cell_volume();
}

double l2_norm_sq(const BoxGrid& g, const VelocityField& f) {
  const double V = g.cell_volume();
  double s = 0.0;
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i <= g.nx; ++i) {
        double w = (i == 0 || i == g.nx) ? 0.5 : 1.0;
        s += w * f.U1(i, j, k) * f.U1(i, j, k) * V;
      }
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j <= g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        double w = (j == 0 || j == g.ny) ? 0.5 : 1.0;
        s += w * f.U2(i, j, k) * f.U2(i, j, k) * V;
      }
  for (int k = 0; k <= g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        double w = (k == 0 || k == g.nz) ? 0.5 : 1.0;
        s += w * f.U3(i, j, k) * f.U3(i, j, k) * V;
      }
  return s;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double max_abs_div(const BoxGrid& g, const VelocityField& v) {
  return max_abs(divergence(g, v).v);
}

void leray_project(const BoxGrid& g, VelocityField& v) {
  // solve div grad phi = div v with homogeneous Neumann (mirror ghosts),
  // mean pinned; the normal boundary faces of v are not modified.
  ScalarField rhs = divergence(g, v);
  const long n = g.ncells();
  using T = Eigen::Triplet<double>;
  std::vector<T> trips;
  trips.reserve(std::size_t(n) * 7);
  const double ax = 1.0 / (g.hx * g.hx), ay = 1.0 / (g.hy * g.hy),
               az = 1.0 / (g.hz * g.hz);
  // -Laplacian with mirror ghosts; kernel removed by pinning cell 0
  // symmetrically (row and column dropped, phi(0) = 0).
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        long c = g.cell(i, j, k);
        double diag = 0.0;
        auto nb = [&](int ii, int jj, int kk, double a) {
          if (ii < 0 || ii >= g.nx || jj < 0 || jj >= g.ny || kk < 0 || kk >= g.nz)
            return;  // mirror ghost: no contribution
          long q = g.cell(ii, jj, kk);
          if (c != 0 && q != 0) trips.emplace_back(c, q, -a);
          diag += a;
        };
        nb(i - 1, j, k, ax); nb(i + 1, j, k, ax);
        nb(i, j - 1, k, ay); nb(i, j + 1, k, ay);
        nb(i, j, k - 1, az); nb(i, j, k + 1, az);
        if (c == 0)
          trips.emplace_back(c, c, 1.0);
        else
          trips.emplace_back(c, c, diag);
      }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::VectorXd b(n);
  double mean = 0.0;
  for (long c = 0; c < n; ++c) mean += rhs.v[c];
  mean /= double(n);
  for (long c = 0; c < n; ++c) b[c] = rhs.v[c] - mean;
  b[0] = 0.0;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("leray_project: factorization failed");
  Eigen::VectorXd phi = ldlt.solve(b);
  ScalarField ph(g);
  for (long c = 0; c < n; ++c) ph.v[c] = phi[c];
  VelocityField gp = grad_c2f(g, ph);
  for (std::size_t q = 0; q < v.u1.size(); ++q) v.u1[q] += gp.u1[q];
  for (std::size_t q = 0; q < v.u2.size(); ++q) v.u2[q] += gp.u2[q];
  for (std::size_t q = 0; q < v.u3.size(); ++q) v.u3[q] += gp.u3[q];
}

}  // namespace rbm
