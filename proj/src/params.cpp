#include "rbm/params.hpp"

#include <cmath>

namespace rbm {

void PhysicalParams::validate() const {
  auto pos = [](double x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x))
      throw std::invalid_argument(std::string("PhysicalParams: ") + name +
                                  " must be strictly positive");
  };
  pos(rho0, "rho0");
  pos(mu, "mu");
  pos(K_cond, "K_cond");
  pos(cp, "cp");
  pos(alpha, "alpha");
  pos(gamma_sigma, "gamma_sigma");
  pos(g_mag, "g_mag");
  pos(h_exch, "h_exch");
  pos(d, "d");
  pos(l1, "l1");
  pos(L1, "L1");
  if (!std::isfinite(theta_c) || !std::isfinite(theta_a))
    throw std::invalid_argument("PhysicalParams: temperatures must be finite");
  if (theta_c < theta_a)
    throw std::invalid_argument(
        "PhysicalParams: theta_c < theta_a is outside the heating-from-below "
        "regime");
}

void NondimParams::validate() const {
  if (!(Pr > 0.0)) throw std::invalid_argument("NondimParams: Pr must be > 0");
  if (!(B > 0.0)) throw std::invalid_argument("NondimParams: B must be > 0");
  if (!(l > 0.0) || !(L > 0.0))
    throw std::invalid_argument("NondimParams: extents must be > 0");
  if (R < 0.0) throw std::invalid_argument("NondimParams: R must be >= 0");
  if (M < 0.0) throw std::invalid_argument("NondimParams: M must be >= 0");
  if (!std::isfinite(b) || !std::isfinite(theta_c_nd))
    throw std::invalid_argument("NondimParams: entries must be finite");
}

void CostWeights::validate() const {
  const double g[6] = {gamma1, gamma2, gamma3, gamma4, gamma5, gamma6};
  for (double w : g)
    if (w < 0.0 || !std::isfinite(w))
      throw std::invalid_argument("CostWeights: weights must be >= 0");
  if (gamma1 == 0.0 && gamma2 == 0.0 && gamma3 == 0.0)
    throw std::invalid_argument(
        "CostWeights: gamma1, gamma2, gamma3 must not all vanish");
  if (mode == Mode::CoerciveWeights &&
      !(gamma4 > 0.0 && gamma5 > 0.0 && gamma6 > 0.0))
    throw std::invalid_argument(
        "CostWeights: mode (ii) requires gamma4, gamma5, gamma6 > 0");
}

NondimParams nondimensionalize(const PhysicalParams& p) {
  p.validate();
  const double kappa = p.K_cond / (p.rho0 * p.cp);
  const double nu = p.mu / p.rho0;
  if (!(kappa > 0.0) || !(nu > 0.0))
    throw std::invalid_argument("nondimensionalize: kappa and nu must be > 0");
  const double theta_u = p.theta_c - p.theta_a;
  const double d3 = p.d * p.d * p.d;

  NondimParams q;
  q.Pr = nu / kappa;
  q.R = p.g_mag * p.alpha * theta_u * d3 / (kappa * nu);
  q.b = -p.g_mag * d3 / (kappa * nu);
  q.M = p.gamma_sigma * theta_u * p.d / (p.rho0 * nu * kappa);
  q.B = p.h_exch * p.d / p.K_cond;
  q.l = p.l1 / p.d;
  q.L = p.L1 / p.d;
  // theta' = (theta - theta_a)/theta_u maps theta_c to 1; for theta_u = 0 the
  // conduction state is trivial and the scale is conventional.
  q.theta_c_nd = theta_u > 0.0 ? 1.0 : 0.0;
  q.validate();
  return q;
}

}  // namespace rbm
