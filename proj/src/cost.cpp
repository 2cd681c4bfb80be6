#include "rbm/cost.hpp"

namespace rbm {

Targets zero_targets(const BoxGrid& g) {
  Targets t;
  t.u_d = VelocityField(g);
  t.theta_d = ScalarField(g);
  return t;
}

Targets basic_state_targets(const Discretization& d) {
  StateSolution b = basic_state(d);
  Targets t;
  t.u_d = std::move(b.u);
  t.theta_d = std::move(b.theta);
  return t;
}

namespace {

VelocityField vel_diff(const VelocityField& a, const VelocityField& b) {
  VelocityField d = a;
  for (std::size_t q = 0; q < d.u1.size(); ++q) d.u1[q] -= b.u1[q];
  for (std::size_t q = 0; q < d.u2.size(); ++q) d.u2[q] -= b.u2[q];
  for (std::size_t q = 0; q < d.u3.size(); ++q) d.u3[q] -= b.u3[q];
  return d;
}

}  // namespace

CostBreakdown cost(const Discretization& d, const StateSolution& s,
                   const ControlTriple& controls, const Targets& targets,
                   const CostWeights& w) {
  if (!s.u.matches(d.grid) || !s.theta.matches(d.grid))
    throw std::invalid_argument("cost: state/grid mismatch");
  CostBreakdown cb;
  if (w.gamma1 > 0.0)
    cb.vorticity_term = 0.5 * w.gamma1 * curl_l2_sq(d.grid, curl(d.grid, s.u));
  if (w.gamma2 > 0.0)
    cb.velocity_tracking =
        0.5 * w.gamma2 * l2_norm_sq(d.grid, vel_diff(s.u, targets.u_d));
  if (w.gamma3 > 0.0) {
    ScalarField dt = s.theta;
    for (std::size_t q = 0; q < dt.v.size(); ++q) dt.v[q] -= targets.theta_d.v[q];
    cb.temperature_tracking = 0.5 * w.gamma3 * l2_norm_sq(d.grid, dt);
  }
  if (w.gamma4 > 0.0) cb.g_norm_term = 0.5 * w.gamma4 * d.gram_g().norm_sq(controls.g);
  if (w.gamma5 > 0.0)
    cb.phi1_norm_term = 0.5 * w.gamma5 * d.gram_phi1().norm_sq(controls.phi1);
  if (w.gamma6 > 0.0)
    cb.phi2_norm_term = 0.5 * w.gamma6 * d.gram_phi2().norm_sq(controls.phi2);
  cb.total = cb.vorticity_term + cb.velocity_tracking + cb.temperature_tracking +
             cb.g_norm_term + cb.phi1_norm_term + cb.phi2_norm_term;
  return cb;
}

void cost_partials(const Discretization& d, const StateSolution& s,
                   const ControlTriple& controls, const Targets& targets,
                   const CostWeights& w, Eigen::VectorXd& Jx, Eigen::VectorXd& Jc) {
  const BoxGrid& g = d.grid;
  const DofMap& dm = d.dofs;
  const double V = g.cell_volume();
  Jx = Eigen::VectorXd::Zero(dm.coupled_size());
  Jc = Eigen::VectorXd::Zero(d.bdata->nctrl());

  // velocity DOF gradient accumulated over all faces, then split
  Eigen::VectorXd gu = Eigen::VectorXd::Zero(dm.vi.total);

  if (w.gamma1 > 0.0) {
    // transpose of the interior-edge curl quadrature
    CurlField cw = curl(g, s.u);
    const double s1 = w.gamma1 * V;
    for (int k = 1; k < g.nz; ++k)
      for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
          double wv = s1 * cw.WX(i, j, k);
          gu[dm.vi.u3(i, j, k)] += wv / g.hy;
          gu[dm.vi.u3(i, j - 1, k)] -= wv / g.hy;
          gu[dm.vi.u2(i, j, k)] -= wv / g.hz;
          gu[dm.vi.u2(i, j, k - 1)] += wv / g.hz;
        }
    for (int k = 1; k < g.nz; ++k)
      for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
          double wv = s1 * cw.WY(i, j, k);
          gu[dm.vi.u1(i, j, k)] += wv / g.hz;
          gu[dm.vi.u1(i, j, k - 1)] -= wv / g.hz;
          gu[dm.vi.u3(i, j, k)] -= wv / g.hx;
          gu[dm.vi.u3(i - 1, j, k)] += wv / g.hx;
        }
    for (int k = 0; k < g.nz; ++k)
      for (int j = 1; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
          double wv = s1 * cw.WZ(i, j, k);
          gu[dm.vi.u2(i, j, k)] += wv / g.hx;
          gu[dm.vi.u2(i - 1, j, k)] -= wv / g.hx;
          gu[dm.vi.u1(i, j, k)] -= wv / g.hy;
          gu[dm.vi.u1(i, j - 1, k)] += wv / g.hy;
        }
  }

  if (w.gamma2 > 0.0) {
    for_each_face(g, [&](const FaceRef& f) {
      long gid = face_dof(dm.vi, f);
      double wgt = face_weight(g, f);  // half on own-normal boundary faces
      double diff = dm.vi.get(s.u, gid) - dm.vi.get(targets.u_d, gid);
      gu[gid] += w.gamma2 * wgt * diff;
    });
  }

  // split gu into free rows and the control chain over constrained faces
  for_each_face(g, [&](const FaceRef& f) {
    long gid = face_dof(dm.vi, f);
    double val = gu[gid];
    if (val == 0.0) return;
    long row = dm.face2free[gid];
    if (row >= 0) {
      Jx[row] += val;
    } else {
      AffineDatum a = d.bdata->normal_face(f.m, f.i, f.j, f.k);
      for (const auto& e : a.lin) Jc[e.dof] += val * e.w;
    }
  });

  if (w.gamma3 > 0.0) {
    const long toff = dm.nfree + dm.np + 1;
    for (long c = 0; c < dm.np; ++c)
      Jx[toff + c] += w.gamma3 * V * (s.theta.v[c] - targets.theta_d.v[c]);
  }

  // direct control regularization terms
  if (w.gamma4 > 0.0) {
    const auto& G = d.gram_g().matrix();
    long n1 = long(d.part.gamma01.size());
    for (int comp = 0; comp < 3; ++comp) {
      Eigen::Map<const Eigen::VectorXd> gc(controls.g.values.data() + comp * n1, n1);
      Eigen::VectorXd dual = w.gamma4 * (G * gc);
      for (long f = 0; f < n1; ++f) Jc[d.bdata->g_dof(comp, std::size_t(f))] += dual[f];
    }
  }
  if (w.gamma5 > 0.0) {
    const auto& G = d.gram_phi1().matrix();
    long n = long(d.lateral.size());
    Eigen::Map<const Eigen::VectorXd> pc(controls.phi1.values.data(), n);
    Eigen::VectorXd dual = w.gamma5 * (G * pc);
    for (long f = 0; f < n; ++f) Jc[d.bdata->phi1_dof(std::size_t(f))] += dual[f];
  }
  if (w.gamma6 > 0.0) {
    const auto& G = d.gram_phi2().matrix();
    long n = long(d.bottom.size());
    Eigen::Map<const Eigen::VectorXd> pc(controls.phi2.values.data(), n);
    Eigen::VectorXd dual = w.gamma6 * (G * pc);
    for (long f = 0; f < n; ++f) Jc[d.bdata->phi2_dof(std::size_t(f))] += dual[f];
  }
}

}  // namespace rbm
