#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rbm {

/// Uniform staggered (MAC) grid on Omega = (0,l) x (0,L) x (0,1).
/// Pressure/temperature at cell centers, velocity components on faces.
struct BoxGrid {
  int nx = 0, ny = 0, nz = 0;
  double l = 1.0, L = 1.0;
  double hx = 0.0, hy = 0.0, hz = 0.0;

  BoxGrid() = default;
  BoxGrid(int nx_, int ny_, int nz_, double l_, double L_);

  double cell_volume() const { return hx * hy * hz; }
  double domain_volume() const { return l * L * 1.0; }

  long ncells() const { return long(nx) * ny * nz; }
  long nu1() const { return long(nx + 1) * ny * nz; }
  long nu2() const { return long(nx) * (ny + 1) * nz; }
  long nu3() const { return long(nx) * ny * (nz + 1); }

  long cell(int i, int j, int k) const { return (long(k) * ny + j) * nx + i; }
  long fx(int i, int j, int k) const { return (long(k) * ny + j) * (nx + 1) + i; }
  long fy(int i, int j, int k) const { return (long(k) * (ny + 1) + j) * nx + i; }
  long fz(int i, int j, int k) const { return (long(k) * ny + j) * nx + i; }

  double xc(int i) const { return (i + 0.5) * hx; }
  double yc(int j) const { return (j + 0.5) * hy; }
  double zc(int k) const { return (k + 0.5) * hz; }

  bool same_as(const BoxGrid& o) const {
    return nx == o.nx && ny == o.ny && nz == o.nz && l == o.l && L == o.L;
  }
};

/// Cell-centered scalar field (theta, p, adjoint counterparts).
struct ScalarField {
  int nx = 0, ny = 0, nz = 0;
  std::vector<double> v;

  ScalarField() = default;
  explicit ScalarField(const BoxGrid& g)
      : nx(g.nx), ny(g.ny), nz(g.nz), v(g.ncells(), 0.0) {}

  double& operator()(int i, int j, int k) { return v[(long(k) * ny + j) * nx + i]; }
  double operator()(int i, int j, int k) const { return v[(long(k) * ny + j) * nx + i]; }
  bool matches(const BoxGrid& g) const {
    return nx == g.nx && ny == g.ny && nz == g.nz;
  }
};

/// MAC velocity field: u1 on x-faces, u2 on y-faces, u3 on z-faces.
struct VelocityField {
  int nx = 0, ny = 0, nz = 0;
  std::vector<double> u1, u2, u3;

  VelocityField() = default;
  explicit VelocityField(const BoxGrid& g)
      : nx(g.nx), ny(g.ny), nz(g.nz),
        u1(g.nu1(), 0.0), u2(g.nu2(), 0.0), u3(g.nu3(), 0.0) {}

  double& U1(int i, int j, int k) { return u1[(long(k) * ny + j) * (nx + 1) + i]; }
  double U1(int i, int j, int k) const { return u1[(long(k) * ny + j) * (nx + 1) + i]; }
  double& U2(int i, int j, int k) { return u2[(long(k) * (ny + 1) + j) * nx + i]; }
  double U2(int i, int j, int k) const { return u2[(long(k) * (ny + 1) + j) * nx + i]; }
  double& U3(int i, int j, int k) { return u3[(long(k) * ny + j) * nx + i]; }
  double U3(int i, int j, int k) const { return u3[(long(k) * ny + j) * nx + i]; }

  bool matches(const BoxGrid& g) const {
    return nx == g.nx && ny == g.ny && nz == g.nz;
  }
};

/// Edge-based curl of a MAC field, defined on interior edges only.
/// wx: x-edges (i, j=1..ny-1, k=1..nz-1), similarly wy, wz.
struct CurlField {
  int nx = 0, ny = 0, nz = 0;
  std::vector<double> wx, wy, wz;

  double& WX(int i, int j, int k) {
    return wx[(long(k - 1) * (ny - 1) + (j - 1)) * nx + i];
  }
  double WX(int i, int j, int k) const {
    return wx[(long(k - 1) * (ny - 1) + (j - 1)) * nx + i];
  }
  double& WY(int i, int j, int k) {
    return wy[(long(k - 1) * ny + j) * (nx - 1) + (i - 1)];
  }
  double WY(int i, int j, int k) const {
    return wy[(long(k - 1) * ny + j) * (nx - 1) + (i - 1)];
  }
  double& WZ(int i, int j, int k) {
    return wz[(long(k) * (ny - 1) + (j - 1)) * (nx - 1) + (i - 1)];
  }
  double WZ(int i, int j, int k) const {
    return wz[(long(k) * (ny - 1) + (j - 1)) * (nx - 1) + (i - 1)];
  }
};

enum class Wall : std::uint8_t { XLo, XHi, YLo, YHi, Bottom, Top };

/// One boundary face of the box: the MAC normal-velocity DOF that lives on it,
/// its centroid, area, and outward normal.
struct BoundaryFace {
  Wall wall;
  int i = 0, j = 0, k = 0;  // MAC index of the face in its normal-component array
  double cx = 0, cy = 0, cz = 0;
  double area = 0;
  double nvx = 0, nvy = 0, nvz = 0;
};

/// A named piece of the boundary: Gamma1 (top), Gamma3 (bottom), Gamma2
/// (lateral), Gamma0 = bottom u lateral, or the control partition pieces.
struct BoundaryRegion {
  enum class Tag { Top, Bottom, Lateral, Gamma0, Custom };
  Tag tag = Tag::Custom;
  std::string name;
  std::vector<BoundaryFace> faces;

  std::size_t size() const { return faces.size(); }
  bool empty() const { return faces.empty(); }
  double total_area() const {
    double a = 0;
    for (const auto& f : faces) a += f.area;
    return a;
  }
};

BoundaryRegion make_region(const BoxGrid& g, BoundaryRegion::Tag tag);

/// Splits Gamma0 into the control part Gamma0^1 (mask true) and the fixed-data
/// part Gamma0^2. The default partition takes Gamma0^1 = LATERAL.
struct ControlPartition {
  BoundaryRegion gamma01;  // velocity control g lives here
  BoundaryRegion gamma02;  // fixed Dirichlet data u0 lives here
};
ControlPartition default_partition(const BoxGrid& g);
ControlPartition partition_from_mask(const BoxGrid& g,
                                     const std::vector<bool>& gamma0_mask);

/// Scalar- or vector-valued data attached to the faces of one region.
/// Vector fields carry the discrete H~^{1/2}_00 constraints: zero normal
/// component away from {x3=0} and zero net normal flux over the region.
struct BoundaryField {
  const BoundaryRegion* region = nullptr;
  int ncomp = 1;
  bool normal_trace_constrained = false;  // vector fields in H~^{1/2}_00
  std::vector<double> values;             // ncomp * nfaces, component-major

  BoundaryField() = default;
  BoundaryField(const BoundaryRegion& r, int ncomp_, bool constrained = false)
      : region(&r), ncomp(ncomp_), normal_trace_constrained(constrained),
        values(std::size_t(ncomp_) * r.size(), 0.0) {}

  double& at(int comp, std::size_t face) { return values[comp * region->size() + face]; }
  double at(int comp, std::size_t face) const { return values[comp * region->size() + face]; }

  double normal_flux() const;
  /// Re-imposes the H~^{1/2}_00 linear constraints in place: zeroes the normal
  /// component on faces away from {x3=0} and removes the mean normal flux.
  void impose_constraints();
  bool constraints_satisfied(double tol) const;
};

// ---------------------------------------------------------------------------
// Discrete operators
// ---------------------------------------------------------------------------

/// Cell-wise MAC divergence, exact for discretely solenoidal fields.
ScalarField divergence(const BoxGrid& g, const VelocityField& v);

/// Edge-circulation curl on interior edges; curl of a discrete gradient is
/// zero to round-off.
CurlField curl(const BoxGrid& g, const VelocityField& v);

/// L2-type quadrature of |curl|^2 over interior edges (full dual volumes).
double curl_l2_sq(const BoxGrid& g, const CurlField& w);

/// Discrete cell-to-face gradient (interior faces; boundary faces zero).
VelocityField grad_c2f(const BoxGrid& g, const ScalarField& q);

/// Sum of squared forward differences times cell volume, square-rooted.
double h1_seminorm(const BoxGrid& g, const ScalarField& f);
double h1_seminorm(const BoxGrid& g, const VelocityField& f);

/// Cell-volume-weighted L2 norms. Velocity faces lying on their own-normal
/// boundary carry half weights so that constants integrate to |Omega| exactly.
double l2_norm_sq(const BoxGrid& g, const ScalarField& f);
double l2_norm_sq(const BoxGrid& g, const VelocityField& f);

inline double h1_norm(const BoxGrid& g, const ScalarField& f) {
  double s = h1_seminorm(g, f);
  return std::sqrt(l2_norm_sq(g, f) + s * s);
}
inline double h1_norm(const BoxGrid& g, const VelocityField& f) {
  double s = h1_seminorm(g, f);
  return std::sqrt(l2_norm_sq(g, f) + s * s);
}

double max_abs(const std::vector<double>& v);
double max_abs_div(const BoxGrid& g, const VelocityField& v);

/// Removes the discrete divergence of v exactly (cell-Poisson projection with
/// zero-normal-flux boundary); normal boundary faces are left untouched.
void leray_project(const BoxGrid& g, VelocityField& v);

}  // namespace rbm
