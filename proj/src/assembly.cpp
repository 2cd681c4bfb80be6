#include "rbm/assembly.hpp"

#include <cmath>

namespace rbm {

// ---------------------------------------------------------------------------
// DofMap
// ---------------------------------------------------------------------------

DofMap::DofMap(const BoxGrid& g) : vi(g), np(g.ncells()) {
  face2free.assign(vi.total, -1);
  auto constrained = [&](const FaceRef& f) {
    return (f.m == 0 && (f.i == 0 || f.i == g.nx)) ||
           (f.m == 1 && (f.j == 0 || f.j == g.ny)) ||
           (f.m == 2 && (f.k == 0 || f.k == g.nz));
  };
  for_each_face(g, [&](const FaceRef& f) {
    if (!constrained(f)) {
      long gid = face_dof(vi, f);
      face2free[gid] = long(free2face.size());
      free2face.push_back(gid);
    }
  });
  nfree = long(free2face.size());
}

// ---------------------------------------------------------------------------
// BoundaryAffine
// ---------------------------------------------------------------------------

namespace {
int wall_id(Wall w) {
  switch (w) {
    case Wall::XLo: return 0;
    case Wall::XHi: return 1;
    case Wall::YLo: return 2;
    case Wall::YHi: return 3;
    case Wall::Bottom: return 4;
    default: return -1;
  }
}

FaceRef face_from_gid(const BoxGrid& g, const VelIndex& vi, long id) {
  FaceRef fr{};
  if (id < vi.off2) {
    fr.m = 0;
    long rem = id;
    fr.i = int(rem % (g.nx + 1)); rem /= (g.nx + 1);
    fr.j = int(rem % g.ny);
    fr.k = int(rem / g.ny);
  } else if (id < vi.off3) {
    fr.m = 1;
    long rem = id - vi.off2;
    fr.i = int(rem % g.nx); rem /= g.nx;
    fr.j = int(rem % (g.ny + 1));
    fr.k = int(rem / (g.ny + 1));
  } else {
    fr.m = 2;
    long rem = id - vi.off3;
    fr.i = int(rem % g.nx); rem /= g.nx;
    fr.j = int(rem % g.ny);
    fr.k = int(rem / g.ny);
  }
  return fr;
}
}  // namespace

BoundaryAffine::BoundaryAffine(const BoxGrid& g, const ControlPartition& part,
                               const BoundaryRegion& lateral,
                               const BoundaryRegion& bottom,
                               const BoundaryField& u0)
    : g_(g), u0_(&u0) {
  n1_ = long(part.gamma01.size());
  ng_ = 3 * n1_;
  nphi1_ = long(lateral.size());
  nphi2_ = long(bottom.size());

  wall_dims_[0][0] = g.ny; wall_dims_[0][1] = g.nz;
  wall_dims_[1][0] = g.ny; wall_dims_[1][1] = g.nz;
  wall_dims_[2][0] = g.nx; wall_dims_[2][1] = g.nz;
  wall_dims_[3][0] = g.nx; wall_dims_[3][1] = g.nz;
  wall_dims_[4][0] = g.nx; wall_dims_[4][1] = g.ny;
  for (int w = 0; w < 5; ++w)
    wall_lookup_[w].assign(std::size_t(wall_dims_[w][0]) * wall_dims_[w][1], INT32_MIN);
  for (int w = 0; w < 4; ++w)
    lat_lookup_[w].assign(std::size_t(wall_dims_[w][0]) * wall_dims_[w][1], -1);
  bot_lookup_.assign(std::size_t(g.nx) * g.ny, -1);

  auto coords = [&](const BoundaryFace& f, int& w, long& pos) {
    w = wall_id(f.wall);
    switch (f.wall) {
      case Wall::XLo: case Wall::XHi: pos = long(f.k) * g.ny + f.j; break;
      case Wall::YLo: case Wall::YHi: pos = long(f.k) * g.nx + f.i; break;
      default: pos = long(f.j) * g.nx + f.i; break;
    }
  };
  for (std::size_t q = 0; q < part.gamma01.size(); ++q) {
    int w; long pos;
    coords(part.gamma01.faces[q], w, pos);
    wall_lookup_[w][pos] = int(q);
  }
  for (std::size_t q = 0; q < part.gamma02.size(); ++q) {
    int w; long pos;
    coords(part.gamma02.faces[q], w, pos);
    wall_lookup_[w][pos] = -2 - int(q);
  }
  for (std::size_t q = 0; q < lateral.size(); ++q) {
    int w; long pos;
    coords(lateral.faces[q], w, pos);
    lat_lookup_[w][pos] = int(q);
  }
  for (std::size_t q = 0; q < bottom.size(); ++q)
    bot_lookup_[long(bottom.faces[q].j) * g.nx + bottom.faces[q].i] = int(q);
}

AffineDatum BoundaryAffine::wall_vector_value(Wall wall, int comp, int a, int b) const {
  int w = wall_id(wall);
  long pos = long(b) * wall_dims_[w][0] + a;
  int enc = wall_lookup_[w][pos];
  if (enc == INT32_MIN)
    throw std::logic_error("BoundaryAffine: face not in Gamma0 partition");
  AffineDatum d;
  if (enc >= 0)
    d.lin.push_back({g_dof(comp, std::size_t(enc)), 1.0});
  else
    d.c0 = u0_->at(comp, std::size_t(-2 - enc));
  return d;
}

AffineDatum BoundaryAffine::normal_face(int m, int i, int j, int k) const {
  if (m == 2 && k == g_.nz) return {};  // u3 = 0 on Gamma1
  Wall wall;
  int a, b;
  if (m == 0) { wall = (i == 0) ? Wall::XLo : Wall::XHi; a = j; b = k; }
  else if (m == 1) { wall = (j == 0) ? Wall::YLo : Wall::YHi; a = i; b = k; }
  else { wall = Wall::Bottom; a = i; b = j; }
  return wall_vector_value(wall, m, a, b);
}

AffineDatum BoundaryAffine::tangential(Wall wall, int d, int i, int j, int k) const {
  int a0, b0, a1, b1;
  switch (wall) {
    case Wall::YLo: case Wall::YHi:
      if (d == 0) { a0 = i - 1; b0 = k; a1 = i; b1 = k; }
      else { a0 = i; b0 = k - 1; a1 = i; b1 = k; }
      break;
    case Wall::XLo: case Wall::XHi:
      if (d == 1) { a0 = j - 1; b0 = k; a1 = j; b1 = k; }
      else { a0 = j; b0 = k - 1; a1 = j; b1 = k; }
      break;
    default:  // Bottom
      if (d == 0) { a0 = i - 1; b0 = j; a1 = i; b1 = j; }
      else { a0 = i; b0 = j - 1; a1 = i; b1 = j; }
      break;
  }
  AffineDatum lo = wall_vector_value(wall, d, a0, b0);
  AffineDatum hi = wall_vector_value(wall, d, a1, b1);
  AffineDatum out;
  out.c0 = 0.5 * (lo.c0 + hi.c0);
  for (const auto& e : lo.lin) out.lin.push_back({e.dof, 0.5 * e.w});
  for (const auto& e : hi.lin) out.lin.push_back({e.dof, 0.5 * e.w});
  return out;
}

AffineDatum BoundaryAffine::phi1_at(Wall wall, int a, int b) const {
  int w = wall_id(wall);
  int idx = lat_lookup_[w][long(b) * wall_dims_[w][0] + a];
  if (idx < 0) throw std::logic_error("BoundaryAffine: lateral face missing");
  return {{{phi1_dof(std::size_t(idx)), 1.0}}, 0.0};
}

AffineDatum BoundaryAffine::phi2_at(int i, int j) const {
  int idx = bot_lookup_[long(j) * g_.nx + i];
  if (idx < 0) throw std::logic_error("BoundaryAffine: bottom face missing");
  return {{{phi2_dof(std::size_t(idx)), 1.0}}, 0.0};
}

Eigen::VectorXd BoundaryAffine::pack(const ControlTriple& c) const {
  Eigen::VectorXd v(nctrl());
  for (int comp = 0; comp < 3; ++comp)
    for (long f = 0; f < n1_; ++f)
      v[g_dof(comp, std::size_t(f))] = c.g.at(comp, std::size_t(f));
  for (long f = 0; f < nphi1_; ++f) v[phi1_dof(std::size_t(f))] = c.phi1.at(0, std::size_t(f));
  for (long f = 0; f < nphi2_; ++f) v[phi2_dof(std::size_t(f))] = c.phi2.at(0, std::size_t(f));
  return v;
}

void BoundaryAffine::unpack(const Eigen::VectorXd& v, ControlTriple& c) const {
  for (int comp = 0; comp < 3; ++comp)
    for (long f = 0; f < n1_; ++f)
      c.g.at(comp, std::size_t(f)) = v[g_dof(comp, std::size_t(f))];
  for (long f = 0; f < nphi1_; ++f) c.phi1.at(0, std::size_t(f)) = v[phi1_dof(std::size_t(f))];
  for (long f = 0; f < nphi2_; ++f) c.phi2.at(0, std::size_t(f)) = v[phi2_dof(std::size_t(f))];
}

double BoundaryAffine::eval(const AffineDatum& a, const Eigen::VectorXd& ctrl) const {
  double v = a.c0;
  for (const auto& e : a.lin) v += e.w * ctrl[e.dof];
  return v;
}

// ---------------------------------------------------------------------------
// Discretization
// ---------------------------------------------------------------------------

Discretization::Discretization(const BoxGrid& g, const NondimParams& p)
    : grid(g), prm(p), top(make_region(g, BoundaryRegion::Tag::Top)),
      bottom(make_region(g, BoundaryRegion::Tag::Bottom)),
      lateral(make_region(g, BoundaryRegion::Tag::Lateral)),
      gamma0(make_region(g, BoundaryRegion::Tag::Gamma0)),
      part(default_partition(g)), dofs(grid) {
  prm.validate();
  finish_setup();
}

Discretization::Discretization(const BoxGrid& g, const NondimParams& p,
                               const std::vector<bool>& gamma01_mask)
    : grid(g), prm(p), top(make_region(g, BoundaryRegion::Tag::Top)),
      bottom(make_region(g, BoundaryRegion::Tag::Bottom)),
      lateral(make_region(g, BoundaryRegion::Tag::Lateral)),
      gamma0(make_region(g, BoundaryRegion::Tag::Gamma0)),
      part(partition_from_mask(g, gamma01_mask)), dofs(grid) {
  prm.validate();
  if (part.gamma01.empty())
    throw std::invalid_argument("Discretization: Gamma0^1 must be nonempty");
  finish_setup();
}

void Discretization::finish_setup() {
  u0 = BoundaryField(part.gamma02, 3, true);
  bdata = std::make_unique<BoundaryAffine>(grid, part, lateral, bottom, u0);
}

const H12Gram& Discretization::gram_g() const {
  if (!gram_g_) gram_g_ = std::make_unique<H12Gram>(part.gamma01, l2_only_);
  return *gram_g_;
}
const H12Gram& Discretization::gram_phi1() const {
  if (!gram_phi1_) gram_phi1_ = std::make_unique<H12Gram>(lateral, l2_only_);
  return *gram_phi1_;
}
const H12Gram& Discretization::gram_phi2() const {
  if (!gram_phi2_) gram_phi2_ = std::make_unique<H12Gram>(bottom, l2_only_);
  return *gram_phi2_;
}
const H12Gram& Discretization::gram_gamma02() const {
  if (!gram_g02_) gram_g02_ = std::make_unique<H12Gram>(part.gamma02, l2_only_);
  return *gram_g02_;
}

ControlTriple Discretization::make_controls() const {
  ControlTriple c;
  c.g = BoundaryField(part.gamma01, 3, true);
  c.phi1 = BoundaryField(lateral, 1, false);
  c.phi2 = BoundaryField(bottom, 1, false);
  return c;
}

void Discretization::set_u0(const BoundaryField& field) {
  if (field.values.size() != u0.values.size())
    throw std::invalid_argument("set_u0: size mismatch with Gamma0^2");
  if (!field.constraints_satisfied(1e-10))
    throw std::invalid_argument("set_u0: H~00 constraints violated");
  u0.values = field.values;
}

const SchurStokes& Discretization::schur() const {
  if (!schur_) schur_ = std::make_shared<SchurStokes>(*this);
  return *schur_;
}

// ---------------------------------------------------------------------------
// System builder
// ---------------------------------------------------------------------------

namespace {

struct Builder {
  std::vector<Triplet> A, B;
  Eigen::VectorXd r0;

  explicit Builder(long rows) : r0(Eigen::VectorXd::Zero(rows)) {}
  void x(long row, long col, double w) {
    if (w != 0.0) A.emplace_back(int(row), int(col), w);
  }
  void ctrl(long row, const AffineDatum& a, double w) {
    if (w == 0.0) return;
    for (const auto& e : a.lin) B.emplace_back(int(row), int(e.dof), w * e.w);
    r0[row] += w * a.c0;
  }
  void cst(long row, double v) { r0[row] += v; }
};

enum class VelMode { Picard, Jacobian };

double robin_alpha(const BoxGrid& g, double B) {
  return (2.0 - B * g.hz) / (2.0 + B * g.hz);
}

void add_velocity_rows(Builder& bld, const Discretization& d,
                       const ScalarField* theta_num, VelMode mode) {
  const BoxGrid& g = d.grid;
  const DofMap& dm = d.dofs;
  const BoundaryAffine& bd = *d.bdata;
  const double V = g.cell_volume();
  const double Pr = d.prm.Pr;
  const long poff = dm.nfree;
  const long mucol = dm.nfree + dm.np;
  const long toff = dm.nfree + dm.np + 1;
  const double beta = 0.5 * (1.0 + robin_alpha(g, d.prm.B));
  const double hs[3] = {g.hx, g.hy, g.hz};

  for_each_face(g, [&](const FaceRef& f) {
    long gid = face_dof(dm.vi, f);
    long row = dm.face2free[gid];
    if (row < 0) return;
    const int m = f.m;
    const int pos[3] = {f.i, f.j, f.k};
    const int nmax[3] = {m == 0 ? g.nx : g.nx - 1, m == 1 ? g.ny : g.ny - 1,
                         m == 2 ? g.nz : g.nz - 1};

    for (int dd = 0; dd < 3; ++dd) {
      const double coef = Pr * V / (hs[dd] * hs[dd]);
      for (int side = -1; side <= 1; side += 2) {
        bld.x(row, row, coef);
        int q = pos[dd] + side;
        if (q >= 0 && q <= nmax[dd]) {
          FaceRef nb = f;
          if (dd == 0) nb.i = q;
          else if (dd == 1) nb.j = q;
          else nb.k = q;
          long nbrow = dm.face2free[face_dof(dm.vi, nb)];
          if (nbrow >= 0)
            bld.x(row, nbrow, -coef);
          else
            bld.ctrl(row, bd.normal_face(nb.m, nb.i, nb.j, nb.k), -coef);
          continue;
        }
        Wall wall;
        if (dd == 0) wall = (side < 0) ? Wall::XLo : Wall::XHi;
        else if (dd == 1) wall = (side < 0) ? Wall::YLo : Wall::YHi;
        else wall = (side < 0) ? Wall::Bottom : Wall::Top;

        if (wall == Wall::Top) {
          // Marangoni ghost: u_g = u_f - hz M d(theta_s)/dx_m, theta_s the
          // Robin-consistent surface trace; -coef u_g folds into the row
          bld.x(row, row, -coef);
          const double w = coef * g.hz * d.prm.M * beta / hs[m];
          const int kk = g.nz - 1;
          long c_hi, c_lo;
          if (m == 0) { c_hi = g.cell(f.i, f.j, kk); c_lo = g.cell(f.i - 1, f.j, kk); }
          else { c_hi = g.cell(f.i, f.j, kk); c_lo = g.cell(f.i, f.j - 1, kk); }
          if (mode == VelMode::Jacobian) {
            bld.x(row, toff + c_hi, w);
            bld.x(row, toff + c_lo, -w);
          } else {
            bld.cst(row, w * (theta_num->v[c_hi] - theta_num->v[c_lo]));
          }
          continue;
        }
        // tangential Dirichlet ghost: u_g = 2 t - u_f
        bld.x(row, row, coef);
        bld.ctrl(row, bd.tangential(wall, m, f.i, f.j, f.k), -2.0 * coef);
      }
    }

    // pressure gradient
    {
      long c_hi, c_lo;
      if (m == 0) { c_hi = g.cell(f.i, f.j, f.k); c_lo = g.cell(f.i - 1, f.j, f.k); }
      else if (m == 1) { c_hi = g.cell(f.i, f.j, f.k); c_lo = g.cell(f.i, f.j - 1, f.k); }
      else { c_hi = g.cell(f.i, f.j, f.k); c_lo = g.cell(f.i, f.j, f.k - 1); }
      double w = Pr * V / hs[m];
      bld.x(row, poff + c_hi, w);
      bld.x(row, poff + c_lo, -w);
    }

    // buoyancy on u3 rows
    if (m == 2) {
      long c_hi = g.cell(f.i, f.j, f.k);
      long c_lo = g.cell(f.i, f.j, f.k - 1);
      bld.cst(row, -Pr * V * d.prm.b);
      double w = -0.5 * Pr * V * d.prm.R;
      if (mode == VelMode::Jacobian) {
        bld.x(row, toff + c_hi, w);
        bld.x(row, toff + c_lo, w);
      } else {
        bld.cst(row, w * (theta_num->v[c_hi] + theta_num->v[c_lo]));
      }
    }
  });

  // continuity rows G^T u (= -Pr V div u) and the mean-pressure border
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        long c = g.cell(i, j, k);
        long row = poff + c;
        struct Side { FaceRef f; double sgn; double h; };
        const Side sides[6] = {
            {{0, i, j, k}, +1, g.hx},     {{0, i + 1, j, k}, -1, g.hx},
            {{1, i, j, k}, +1, g.hy},     {{1, i, j + 1, k}, -1, g.hy},
            {{2, i, j, k}, +1, g.hz},     {{2, i, j, k + 1}, -1, g.hz}};
        for (const auto& s : sides) {
          double w = s.sgn * Pr * V / s.h;
          long fr = dm.face2free[face_dof(dm.vi, s.f)];
          if (fr >= 0)
            bld.x(row, fr, w);
          else
            bld.ctrl(row, bd.normal_face(s.f.m, s.f.i, s.f.j, s.f.k), w);
        }
        bld.x(row, mucol, V);
        bld.x(mucol, poff + c, V);
      }
}

std::vector<Triplet> advection_triplets(const Discretization& d,
                                        const VelocityField& ubar) {
  const BoxGrid& g = d.grid;
  const VelIndex& vi = d.dofs.vi;
  std::vector<Triplet> trips;
  for_each_face(g, [&](const FaceRef& f) {
    double W = face_weight(g, f);
    long frow = face_dof(vi, f);
    for (int dd = 0; dd < 3; ++dd) {
      double ud = 0.0;
      for (const auto& e : advect_interp(g, vi, f, dd)) ud += e.w * vi.get(ubar, e.dof);
      if (ud == 0.0) continue;
      for (const auto& e : advect_diff(g, vi, f, dd))
        trips.emplace_back(int(frow), int(e.dof), W * ud * e.w);
    }
  });
  return trips;
}

void add_skew_advection(Builder& bld, const Discretization& d,
                        const std::vector<Triplet>& ctrips) {
  const DofMap& dm = d.dofs;
  const BoundaryAffine& bd = *d.bdata;
  auto emit = [&](long rgid, long cgid, double w) {
    long row = dm.face2free[rgid];
    if (row < 0) return;
    long col = dm.face2free[cgid];
    if (col >= 0) {
      bld.x(row, col, w);
    } else {
      FaceRef fr = face_from_gid(d.grid, dm.vi, cgid);
      bld.ctrl(row, bd.normal_face(fr.m, fr.i, fr.j, fr.k), w);
    }
  };
  for (const auto& t : ctrips) {
    emit(t.row(), t.col(), 0.5 * t.value());
    emit(t.col(), t.row(), -0.5 * t.value());
  }
}

Eigen::VectorXd apply_skew_advection(const Discretization& d,
                                     const std::vector<Triplet>& ctrips,
                                     const VelocityField& ubar) {
  const DofMap& dm = d.dofs;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dm.nfree);
  for (const auto& t : ctrips) {
    long r = dm.face2free[t.row()];
    if (r >= 0) out[r] += 0.5 * t.value() * dm.vi.get(ubar, t.col());
    long rc = dm.face2free[t.col()];
    if (rc >= 0) out[rc] -= 0.5 * t.value() * dm.vi.get(ubar, t.row());
  }
  return out;
}

void add_temperature_rows(Builder& bld, const Discretization& d,
                          const VelocityField& ubar, long row_off, long col_off) {
  const BoxGrid& g = d.grid;
  const BoundaryAffine& bd = *d.bdata;
  const double V = g.cell_volume();
  const double aR = robin_alpha(g, d.prm.B);
  const double cx = V / (g.hx * g.hx), cy = V / (g.hy * g.hy), cz = V / (g.hz * g.hz);

  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        long c = g.cell(i, j, k);
        long row = row_off + c;
        if (i > 0) { bld.x(row, col_off + g.cell(i - 1, j, k), -cx); bld.x(row, col_off + c, cx); }
        else { bld.ctrl(row, bd.phi1_at(Wall::XLo, j, k), -V / g.hx); }
        if (i + 1 < g.nx) { bld.x(row, col_off + g.cell(i + 1, j, k), -cx); bld.x(row, col_off + c, cx); }
        else { bld.ctrl(row, bd.phi1_at(Wall::XHi, j, k), -V / g.hx); }
        if (j > 0) { bld.x(row, col_off + g.cell(i, j - 1, k), -cy); bld.x(row, col_off + c, cy); }
        else { bld.ctrl(row, bd.phi1_at(Wall::YLo, i, k), -V / g.hy); }
        if (j + 1 < g.ny) { bld.x(row, col_off + g.cell(i, j + 1, k), -cy); bld.x(row, col_off + c, cy); }
        else { bld.ctrl(row, bd.phi1_at(Wall::YHi, i, k), -V / g.hy); }
        if (k > 0) { bld.x(row, col_off + g.cell(i, j, k - 1), -cz); bld.x(row, col_off + c, cz); }
        else { bld.x(row, col_off + c, 2.0 * cz); bld.ctrl(row, bd.phi2_at(i, j), -2.0 * cz); }
        if (k + 1 < g.nz) { bld.x(row, col_off + g.cell(i, j, k + 1), -cz); bld.x(row, col_off + c, cz); }
        else { bld.x(row, col_off + c, (1.0 - aR) * cz); }
      }

  // skew advection (ubar . grad theta)
  const VelIndex& vi = d.dofs.vi;
  std::vector<Triplet> c1;
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        long c = g.cell(i, j, k);
        for (int dd = 0; dd < 3; ++dd) {
          double ud = 0.0;
          for (const auto& e : cell_interp(g, vi, i, j, k, dd))
            ud += e.w * vi.get(ubar, e.dof);
          if (ud == 0.0) continue;
          for (const auto& e : cell_diff(g, i, j, k, dd))
            c1.emplace_back(int(c), int(e.dof), V * ud * e.w);
        }
      }
  for (const auto& t : c1) {
    bld.x(row_off + t.row(), col_off + t.col(), 0.5 * t.value());
    bld.x(row_off + t.col(), col_off + t.row(), -0.5 * t.value());
  }
}

// d/du of N_sk(u)u at u*
void add_advection_jacobian_u(Builder& bld, const Discretization& d,
                              const VelocityField& ustar) {
  const BoxGrid& g = d.grid;
  const DofMap& dm = d.dofs;
  const VelIndex& vi = dm.vi;
  const BoundaryAffine& bd = *d.bdata;

  auto emit = [&](long rgid, long cgid, double w) {
    if (w == 0.0) return;
    long row = dm.face2free[rgid];
    if (row < 0) return;
    long col = dm.face2free[cgid];
    if (col >= 0) { bld.x(row, col, w); return; }
    FaceRef fr = face_from_gid(g, vi, cgid);
    bld.ctrl(row, bd.normal_face(fr.m, fr.i, fr.j, fr.k), w);
  };

  for_each_face(g, [&](const FaceRef& f) {
    double W = face_weight(g, f);
    long fgid = face_dof(vi, f);
    double uf = vi.get(ustar, fgid);
    for (int dd = 0; dd < 3; ++dd) {
      const Stencil diff = advect_diff(g, vi, f, dd);
      double du = 0.0;
      for (const auto& e : diff) du += e.w * vi.get(ustar, e.dof);
      const Stencil interp = advect_interp(g, vi, f, dd);
      for (const auto& p : interp) emit(fgid, p.dof, 0.5 * W * du * p.w);
      if (uf != 0.0)
        for (const auto& p : interp)
          for (const auto& dfe : diff)
            emit(dfe.dof, p.dof, -0.5 * W * uf * p.w * dfe.w);
    }
  });
}

// d/du of C1_sk(u)theta* at theta* (temperature rows)
void add_advection_jacobian_theta(Builder& bld, const Discretization& d,
                                  const ScalarField& tstar, long row_off) {
  const BoxGrid& g = d.grid;
  const DofMap& dm = d.dofs;
  const VelIndex& vi = dm.vi;
  const BoundaryAffine& bd = *d.bdata;
  const double V = g.cell_volume();

  auto emit = [&](long rowcell, long cgid, double w) {
    if (w == 0.0) return;
    long col = dm.face2free[cgid];
    if (col >= 0) { bld.x(row_off + rowcell, col, w); return; }
    FaceRef fr = face_from_gid(g, vi, cgid);
    bld.ctrl(row_off + rowcell, bd.normal_face(fr.m, fr.i, fr.j, fr.k), w);
  };

  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        long c = g.cell(i, j, k);
        double tc = tstar.v[c];
        for (int dd = 0; dd < 3; ++dd) {
          const Stencil diff = cell_diff(g, i, j, k, dd);
          double dt = 0.0;
          for (const auto& e : diff) dt += e.w * tstar.v[e.dof];
          const Stencil interp = cell_interp(g, vi, i, j, k, dd);
          for (const auto& p : interp) emit(c, p.dof, 0.5 * V * dt * p.w);
          if (tc != 0.0)
            for (const auto& p : interp)
              for (const auto& dfe : diff)
                emit(dfe.dof, p.dof, -0.5 * V * tc * p.w * dfe.w);
        }
      }
}

LinearSystem finish(Builder& bld, long rows, long cols, long nctrl) {
  LinearSystem s;
  s.A.resize(rows, cols);
  s.A.setFromTriplets(bld.A.begin(), bld.A.end());
  s.B.resize(rows, nctrl);
  s.B.setFromTriplets(bld.B.begin(), bld.B.end());
  s.r0 = bld.r0;
  return s;
}

}  // namespace

LinearSystem assemble_temperature(const Discretization& d, const VelocityField& ubar) {
  Builder bld(d.dofs.np);
  add_temperature_rows(bld, d, ubar, 0, 0);
  return finish(bld, d.dofs.np, d.dofs.np, d.bdata->nctrl());
}

LinearSystem assemble_velocity(const Discretization& d, const VelocityField& ubar,
                               const ScalarField& theta) {
  Builder bld(d.dofs.saddle_size());
  add_velocity_rows(bld, d, &theta, VelMode::Picard);
  add_skew_advection(bld, d, advection_triplets(d, ubar));
  return finish(bld, d.dofs.saddle_size(), d.dofs.saddle_size(), d.bdata->nctrl());
}

LinearSystem assemble_jacobian(const Discretization& d, const VelocityField& u,
                               const ScalarField& theta) {
  const long n = d.dofs.coupled_size();
  Builder bld(n);
  add_velocity_rows(bld, d, nullptr, VelMode::Jacobian);
  add_skew_advection(bld, d, advection_triplets(d, u));
  add_advection_jacobian_u(bld, d, u);
  long toff = d.dofs.nfree + d.dofs.np + 1;
  add_temperature_rows(bld, d, u, toff, toff);
  add_advection_jacobian_theta(bld, d, theta, toff);
  return finish(bld, n, n, d.bdata->nctrl());
}

Eigen::VectorXd gather_state(const Discretization& d, const VelocityField& u,
                             const ScalarField& p, const ScalarField& theta) {
  const DofMap& dm = d.dofs;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dm.coupled_size());
  for (long q = 0; q < dm.nfree; ++q) x[q] = dm.vi.get(u, dm.free2face[q]);
  for (long c = 0; c < dm.np; ++c) x[dm.nfree + c] = p.v[c];
  for (long c = 0; c < dm.np; ++c) x[dm.nfree + dm.np + 1 + c] = theta.v[c];
  return x;
}

Eigen::VectorXd coupled_residual(const Discretization& d, const VelocityField& u,
                                 const ScalarField& p, const ScalarField& theta,
                                 const Eigen::VectorXd& ctrl) {
  LinearSystem vel = assemble_velocity(d, u, theta);
  LinearSystem temp = assemble_temperature(d, u);
  Eigen::VectorXd xs = Eigen::VectorXd::Zero(d.dofs.saddle_size());
  for (long q = 0; q < d.dofs.nfree; ++q) xs[q] = d.dofs.vi.get(u, d.dofs.free2face[q]);
  for (long c = 0; c < d.dofs.np; ++c) xs[d.dofs.nfree + c] = p.v[c];
  Eigen::Map<const Eigen::VectorXd> th(theta.v.data(), d.dofs.np);
  Eigen::VectorXd r(d.dofs.coupled_size());
  r.head(d.dofs.saddle_size()) = vel.A * xs + vel.B * ctrl + vel.r0;
  r.tail(d.dofs.np) = temp.A * th + temp.B * ctrl + temp.r0;
  return r;
}

void scatter_velocity(const Discretization& d, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& ctrl, VelocityField& u,
                      bool include_const) {
  const DofMap& dm = d.dofs;
  const BoxGrid& g = d.grid;
  u = VelocityField(g);
  for (long q = 0; q < dm.nfree; ++q) {
    long gid = dm.free2face[q];
    if (gid < dm.vi.off2) u.u1[gid] = x[q];
    else if (gid < dm.vi.off3) u.u2[gid - dm.vi.off2] = x[q];
    else u.u3[gid - dm.vi.off3] = x[q];
  }
  for_each_face(g, [&](const FaceRef& f) {
    long gid = face_dof(dm.vi, f);
    if (dm.face2free[gid] >= 0) return;
    AffineDatum a = d.bdata->normal_face(f.m, f.i, f.j, f.k);
    double v = include_const ? d.bdata->eval(a, ctrl) : 0.0;
    if (!include_const)
      for (const auto& e : a.lin) v += e.w * ctrl[e.dof];
    if (f.m == 0) u.u1[gid] = v;
    else if (f.m == 1) u.u2[gid - dm.vi.off2] = v;
    else u.u3[gid - dm.vi.off3] = v;
  });
}

void scatter_pressure(const Discretization& d, const Eigen::VectorXd& x, ScalarField& p) {
  p = ScalarField(d.grid);
  for (long c = 0; c < d.dofs.np; ++c) p.v[c] = x[d.dofs.nfree + c];
  double mean = 0.0;
  for (double v : p.v) mean += v;
  mean /= double(d.dofs.np);
  for (double& v : p.v) v -= mean;
}

void scatter_theta_from_coupled(const Discretization& d, const Eigen::VectorXd& x,
                                ScalarField& theta) {
  theta = ScalarField(d.grid);
  long toff = d.dofs.nfree + d.dofs.np + 1;
  for (long c = 0; c < d.dofs.np; ++c) theta.v[c] = x[toff + c];
}

Eigen::VectorXd sparse_lu_solve(const SpMat& A, const Eigen::VectorXd& b,
                                const char* what) {
  Eigen::SparseLU<SpMat> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error(std::string(what) + ": sparse LU factorization failed");
  Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error(std::string(what) + ": sparse LU solve failed");
  return x;
}

// ---------------------------------------------------------------------------
// Pressure-Schur CG for the symmetric Stokes saddle
// ---------------------------------------------------------------------------

SchurStokes::SchurStokes(const Discretization& d) : d_(d) {
  const BoxGrid& g = d.grid;
  const DofMap& dm = d.dofs;
  const double V = g.cell_volume();
  const double Pr = d.prm.Pr;
  const double hs[3] = {g.hx, g.hy, g.hz};

  long lo = 0;
  for (int m = 0; m < 3; ++m) {
    long hi = lo;
    while (hi < dm.nfree) {
      long gid = dm.free2face[hi];
      int comp = gid < dm.vi.off2 ? 0 : (gid < dm.vi.off3 ? 1 : 2);
      if (comp != m) break;
      ++hi;
    }
    comp_range_[m] = {lo, hi};
    lo = hi;
  }

  for (int m = 0; m < 3; ++m) {
    std::vector<Triplet> trips;
    const long base = comp_range_[m].first;
    for_each_face(g, [&](const FaceRef& f) {
      if (f.m != m) return;
      long row = dm.face2free[face_dof(dm.vi, f)];
      if (row < 0) return;
      const int pos[3] = {f.i, f.j, f.k};
      const int nmax[3] = {m == 0 ? g.nx : g.nx - 1, m == 1 ? g.ny : g.ny - 1,
                           m == 2 ? g.nz : g.nz - 1};
      double diag = 0.0;
      for (int dd = 0; dd < 3; ++dd) {
        const double coef = Pr * V / (hs[dd] * hs[dd]);
        for (int side = -1; side <= 1; side += 2) {
          diag += coef;
          int q = pos[dd] + side;
          if (q >= 0 && q <= nmax[dd]) {
            FaceRef nb = f;
            if (dd == 0) nb.i = q;
            else if (dd == 1) nb.j = q;
            else nb.k = q;
            long nbrow = dm.face2free[face_dof(dm.vi, nb)];
            if (nbrow >= 0) trips.emplace_back(int(row - base), int(nbrow - base), -coef);
            continue;
          }
          bool top = (dd == 2 && side > 0);
          if (top) diag -= coef;  // Marangoni ghost is Neumann-type in u
          else diag += coef;      // Dirichlet ghost doubles the pull
        }
      }
      trips.emplace_back(int(row - base), int(row - base), diag);
    });
    long n = comp_range_[m].second - comp_range_[m].first;
    lapA_[m].resize(n, n);
    lapA_[m].setFromTriplets(trips.begin(), trips.end());
    lap_[m] = std::make_unique<Eigen::SimplicialLDLT<SpMat>>(lapA_[m]);
    if (lap_[m]->info() != Eigen::Success)
      throw std::runtime_error("SchurStokes: component Laplacian factorization failed");
  }

  std::vector<Triplet> gt;
  for_each_face(g, [&](const FaceRef& f) {
    long row = dm.face2free[face_dof(dm.vi, f)];
    if (row < 0) return;
    long c_hi, c_lo;
    if (f.m == 0) { c_hi = g.cell(f.i, f.j, f.k); c_lo = g.cell(f.i - 1, f.j, f.k); }
    else if (f.m == 1) { c_hi = g.cell(f.i, f.j, f.k); c_lo = g.cell(f.i, f.j - 1, f.k); }
    else { c_hi = g.cell(f.i, f.j, f.k); c_lo = g.cell(f.i, f.j, f.k - 1); }
    double w = Pr * V / hs[f.m];
    gt.emplace_back(int(row), int(c_hi), w);
    gt.emplace_back(int(row), int(c_lo), -w);
  });
  G_.resize(dm.nfree, dm.np);
  G_.setFromTriplets(gt.begin(), gt.end());
}

Eigen::VectorXd SchurStokes::apply_ainv(const Eigen::VectorXd& f) const {
  Eigen::VectorXd out(f.size());
  for (int m = 0; m < 3; ++m) {
    auto [lo, hi] = comp_range_[m];
    out.segment(lo, hi - lo) = lap_[m]->solve(f.segment(lo, hi - lo));
  }
  return out;
}

Eigen::VectorXd SchurStokes::solve(const Eigen::VectorXd& rhs_mom,
                                   const Eigen::VectorXd& rhs_div, double tol) const {
  const DofMap& dm = d_.dofs;
  auto demean = [](Eigen::VectorXd& v) { v.array() -= v.mean(); };
  auto apply_s = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd w = apply_ainv(G_ * p);
    Eigen::VectorXd out = G_.transpose() * w;
    demean(out);
    return out;
  };
  Eigen::VectorXd b = G_.transpose() * apply_ainv(rhs_mom) - rhs_div;
  demean(b);

  Eigen::VectorXd p = Eigen::VectorXd::Zero(dm.np);
  Eigen::VectorXd r = b, z = r;
  double rr = r.dot(r);
  double b2 = std::max(b.dot(b), 1e-300);
  for (int it = 0; it < 2000 && rr > tol * tol * b2; ++it) {
    Eigen::VectorXd q = apply_s(z);
    double alpha = rr / z.dot(q);
    p += alpha * z;
    r -= alpha * q;
    double rr_new = r.dot(r);
    z = r + (rr_new / rr) * z;
    rr = rr_new;
  }
  Eigen::VectorXd u = apply_ainv(rhs_mom - G_ * p);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dm.saddle_size());
  x.head(dm.nfree) = u;
  demean(p);
  x.segment(dm.nfree, dm.np) = p;
  return x;
}

Eigen::VectorXd explicit_advection_rhs(const Discretization& d,
                                       const VelocityField& ubar) {
  return apply_skew_advection(d, advection_triplets(d, ubar), ubar);
}

}  // namespace rbm
