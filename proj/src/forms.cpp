#include "rbm/forms.hpp"

#include <cmath>

namespace rbm {

namespace {

double pair_sum(const std::vector<double>& a, const std::vector<double>& b,
                int n0, int n1, int n2, double h0, double h1, double h2, double V) {
  auto at = [&](const std::vector<double>& f, int i, int j, int k) {
    return f[(long(k) * n1 + j) * n0 + i];
  };
  double s = 0.0;
  for (int k = 0; k < n2; ++k)
    for (int j = 0; j < n1; ++j)
      for (int i = 0; i + 1 < n0; ++i)
        s += (at(a, i + 1, j, k) - at(a, i, j, k)) *
             (at(b, i + 1, j, k) - at(b, i, j, k)) / (h0 * h0) * V;
  for (int k = 0; k < n2; ++k)
    for (int j = 0; j + 1 < n1; ++j)
      for (int i = 0; i < n0; ++i)
        s += (at(a, i, j + 1, k) - at(a, i, j, k)) *
             (at(b, i, j + 1, k) - at(b, i, j, k)) / (h1 * h1) * V;
  for (int k = 0; k + 1 < n2; ++k)
    for (int j = 0; j < n1; ++j)
      for (int i = 0; i < n0; ++i)
        s += (at(a, i, j, k + 1) - at(a, i, j, k)) *
             (at(b, i, j, k + 1) - at(b, i, j, k)) / (h2 * h2) * V;
  return s;
}

void check_match(const BoxGrid& g, const VelocityField& f, const char* who) {
  if (!f.matches(g)) throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}
void check_match(const BoxGrid& g, const ScalarField& f, const char* who) {
  if (!f.matches(g)) throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

}  // namespace

double FormWorkspace::a(const VelocityField& u, const VelocityField& v) const {
  check_match(g_, u, "form a");
  check_match(g_, v, "form a");
  const double V = g_.cell_volume();
  return pair_sum(u.u1, v.u1, g_.nx + 1, g_.ny, g_.nz, g_.hx, g_.hy, g_.hz, V) +
         pair_sum(u.u2, v.u2, g_.nx, g_.ny + 1, g_.nz, g_.hx, g_.hy, g_.hz, V) +
         pair_sum(u.u3, v.u3, g_.nx, g_.ny, g_.nz + 1, g_.hx, g_.hy, g_.hz, V);
}

double FormWorkspace::c_plain(const VelocityField& u, const VelocityField& v,
                              const VelocityField& z) const {
  double total = 0.0;
  for_each_face(g_, [&](const FaceRef& f) {
    double zf = vi_.get(z, face_dof(vi_, f));
    if (zf == 0.0) return;
    double W = face_weight(g_, f);
    double adv = 0.0;
    for (int d = 0; d < 3; ++d) {
      double ud = 0.0;
      for (const auto& e : advect_interp(g_, vi_, f, d)) ud += e.w * vi_.get(u, e.dof);
      if (ud == 0.0) continue;
      double dv = 0.0;
      for (const auto& e : advect_diff(g_, vi_, f, d)) dv += e.w * vi_.get(v, e.dof);
      adv += ud * dv;
    }
    total += W * adv * zf;
  });
  return total;
}

double FormWorkspace::c(const VelocityField& u, const VelocityField& v,
                        const VelocityField& z, bool skew) const {
  check_match(g_, u, "form c");
  check_match(g_, v, "form c");
  check_match(g_, z, "form c");
  if (!skew) return c_plain(u, v, z);
  return 0.5 * (c_plain(u, v, z) - c_plain(u, z, v));
}

double FormWorkspace::c1_plain(const VelocityField& u, const ScalarField& s,
                               const ScalarField& w) const {
  const double V = g_.cell_volume();
  double total = 0.0;
  for (int k = 0; k < g_.nz; ++k)
    for (int j = 0; j < g_.ny; ++j)
      for (int i = 0; i < g_.nx; ++i) {
        double wc = w(i, j, k);
        if (wc == 0.0) continue;
        double adv = 0.0;
        for (int d = 0; d < 3; ++d) {
          double ud = 0.0;
          for (const auto& e : cell_interp(g_, vi_, i, j, k, d))
            ud += e.w * vi_.get(u, e.dof);
          if (ud == 0.0) continue;
          double ds = 0.0;
          for (const auto& e : cell_diff(g_, i, j, k, d)) ds += e.w * s.v[e.dof];
          adv += ud * ds;
        }
        total += V * adv * wc;
      }
  return total;
}

double FormWorkspace::c1(const VelocityField& u, const ScalarField& s,
                         const ScalarField& w, bool skew) const {
  check_match(g_, u, "form c1");
  check_match(g_, s, "form c1");
  check_match(g_, w, "form c1");
  if (!skew) return c1_plain(u, s, w);
  return 0.5 * (c1_plain(u, s, w) - c1_plain(u, w, s));
}

double FormWorkspace::a1(const ScalarField& s, const ScalarField& w) const {
  check_match(g_, s, "form a1");
  check_match(g_, w, "form a1");
  return pair_sum(s.v, w.v, g_.nx, g_.ny, g_.nz, g_.hx, g_.hy, g_.hz,
                  g_.cell_volume());
}

double FormWorkspace::b1(const ScalarField& s, const VelocityField& v) const {
  check_match(g_, s, "form b1");
  check_match(g_, v, "form b1");
  const double V = g_.cell_volume();
  // dv/dx3 of the cell-averaged components, centered in z (one-sided at ends)
  double total = 0.0;
  auto vbar = [&](int i, int j, int k, int d) {
    switch (d) {
      case 0: return 0.5 * (v.U1(i, j, k) + v.U1(i + 1, j, k));
      case 1: return 0.5 * (v.U2(i, j, k) + v.U2(i, j + 1, k));
      default: return 0.5 * (v.U3(i, j, k) + v.U3(i, j, k + 1));
    }
  };
  for (int k = 0; k < g_.nz; ++k)
    for (int j = 0; j < g_.ny; ++j)
      for (int i = 0; i < g_.nx; ++i) {
        for (int d = 0; d < 3; ++d) {
          double ds = 0.0;
          for (const auto& e : cell_diff(g_, i, j, k, d)) ds += e.w * s.v[e.dof];
          if (ds == 0.0) continue;
          double dvz;
          if (k > 0 && k < g_.nz - 1)
            dvz = (vbar(i, j, k + 1, d) - vbar(i, j, k - 1, d)) / (2.0 * g_.hz);
          else if (k == 0)
            dvz = (vbar(i, j, 1, d) - vbar(i, j, 0, d)) / g_.hz;
          else
            dvz = (vbar(i, j, g_.nz - 1, d) - vbar(i, j, g_.nz - 2, d)) / g_.hz;
          total += V * ds * dvz;
        }
      }
  return total;
}

double FormWorkspace::buoyancy(const ScalarField& theta, const VelocityField& v,
                               const NondimParams& p) const {
  check_match(g_, theta, "buoyancy");
  check_match(g_, v, "buoyancy");
  const double V = g_.cell_volume();
  double total = 0.0;
  for (int k = 0; k < g_.nz; ++k)
    for (int j = 0; j < g_.ny; ++j)
      for (int i = 0; i < g_.nx; ++i) {
        double v3 = 0.5 * (v.U3(i, j, k) + v.U3(i, j, k + 1));
        total += V * p.Pr * (p.b + p.R * theta(i, j, k)) * v3;
      }
  return total;
}

double FormWorkspace::trace_identity_residual(const ScalarField& s,
                                              const VelocityField& v) const {
  check_match(g_, s, "trace identity");
  check_match(g_, v, "trace identity");
  // X0 boundary constraints: normal faces on Gamma0 vanish, v3 = 0 on Gamma1.
  double scale = 0.0;
  for (double x : v.u1) scale = std::max(scale, std::abs(x));
  for (double x : v.u2) scale = std::max(scale, std::abs(x));
  for (double x : v.u3) scale = std::max(scale, std::abs(x));
  const double tol = 1e-12 * std::max(1.0, scale);
  for (int k = 0; k < g_.nz; ++k)
    for (int j = 0; j < g_.ny; ++j)
      if (std::abs(v.U1(0, j, k)) > tol || std::abs(v.U1(g_.nx, j, k)) > tol)
        throw std::invalid_argument("trace identity: v violates X0 on x-walls");
  for (int k = 0; k < g_.nz; ++k)
    for (int i = 0; i < g_.nx; ++i)
      if (std::abs(v.U2(i, 0, k)) > tol || std::abs(v.U2(i, g_.ny, k)) > tol)
        throw std::invalid_argument("trace identity: v violates X0 on y-walls");
  for (int j = 0; j < g_.ny; ++j)
    for (int i = 0; i < g_.nx; ++i)
      if (std::abs(v.U3(i, j, 0)) > tol || std::abs(v.U3(i, j, g_.nz)) > tol)
        throw std::invalid_argument("trace identity: v violates X0 on bottom/top");

  VelocityField w = v;
  leray_project(g_, w);

  // LHS: surface quadrature on Gamma1 with quadratic extrapolation of s and
  // of the cell-averaged tangential velocity to the top surface.
  const int nzm = g_.nz - 1;
  auto top_s = [&](int i, int j) {
    return 1.5 * s(i, j, nzm) - 0.5 * s(i, j, nzm - 1);
  };
  auto top_v = [&](int i, int j, int d) {
    auto cavg = [&](int k) {
      return d == 0 ? 0.5 * (w.U1(i, j, k) + w.U1(i + 1, j, k))
                    : 0.5 * (w.U2(i, j, k) + w.U2(i, j + 1, k));
    };
    return 1.5 * cavg(nzm) - 0.5 * cavg(nzm - 1);
  };
  double lhs = 0.0;
  const double dA = g_.hx * g_.hy;
  for (int j = 0; j < g_.ny; ++j)
    for (int i = 0; i < g_.nx; ++i) {
      double dsx, dsy;
      if (i > 0 && i < g_.nx - 1)
        dsx = (top_s(i + 1, j) - top_s(i - 1, j)) / (2.0 * g_.hx);
      else if (i == 0)
        dsx = (top_s(1, j) - top_s(0, j)) / g_.hx;
      else
        dsx = (top_s(i, j) - top_s(i - 1, j)) / g_.hx;
      if (j > 0 && j < g_.ny - 1)
        dsy = (top_s(i, j + 1) - top_s(i, j - 1)) / (2.0 * g_.hy);
      else if (j == 0)
        dsy = (top_s(i, 1) - top_s(i, 0)) / g_.hy;
      else
        dsy = (top_s(i, j) - top_s(i, j - 1)) / g_.hy;
      lhs += (dsx * top_v(i, j, 0) + dsy * top_v(i, j, 1)) * dA;
    }

  double rhs = b1(s, w);
  return std::abs(lhs - rhs);
}

}  // namespace rbm
