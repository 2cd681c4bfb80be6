#include "doctest.h"

#include "rbm/params.hpp"

using namespace rbm;

namespace {
PhysicalParams unit_params() {
  PhysicalParams p;
  p.rho0 = p.mu = p.K_cond = p.cp = 1.0;
  p.alpha = p.gamma_sigma = p.g_mag = p.h_exch = 1.0;
  p.d = p.l1 = p.L1 = 1.0;
  p.theta_c = 2.0;
  p.theta_a = 1.0;
  return p;
}
}  // namespace

TEST_CASE("nondimensionalize: unit data gives unit numbers") {
  NondimParams q = nondimensionalize(unit_params());
  CHECK(q.Pr == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(q.R == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(q.b == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(q.M == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(q.B == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(q.l == 1.0);
  CHECK(q.L == 1.0);
  CHECK(q.theta_c_nd == 1.0);
}

TEST_CASE("nondimensionalize: zero temperature difference kills R and M") {
  PhysicalParams p = unit_params();
  p.theta_a = p.theta_c;
  NondimParams q = nondimensionalize(p);
  CHECK(q.R == 0.0);
  CHECK(q.M == 0.0);
}

TEST_CASE("nondimensionalize: Biot number is h d / K") {
  PhysicalParams p = unit_params();
  p.h_exch = 2.0;
  p.d = 1.0;
  p.K_cond = 1.0;
  CHECK(nondimensionalize(p).B == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("nondimensionalize: scaling consistency in mu") {
  PhysicalParams p = unit_params();
  NondimParams q0 = nondimensionalize(p);
  p.mu *= 2.0;
  NondimParams q1 = nondimensionalize(p);
  CHECK(q1.Pr == 2.0 * q0.Pr);
  CHECK(q1.R == 0.5 * q0.R);
  CHECK(q1.M == 0.5 * q0.M);
  CHECK(q1.b == 0.5 * q0.b);
}

TEST_CASE("nondimensionalize: sign contract") {
  PhysicalParams p = unit_params();
  p.alpha = 3.7;
  p.g_mag = 9.81;
  p.d = 0.01;
  p.theta_c = 5.0;
  NondimParams q = nondimensionalize(p);
  CHECK(q.b <= 0.0);
  CHECK(q.R >= 0.0);
  CHECK(q.M >= 0.0);
  CHECK(q.B >= 0.0);
}

TEST_CASE("nondimensionalize: rejects heating from above and bad geometry") {
  PhysicalParams p = unit_params();
  p.theta_c = 0.0;  // below theta_a = 1
  CHECK_THROWS_AS(nondimensionalize(p), std::invalid_argument);
  p = unit_params();
  p.d = -1.0;
  CHECK_THROWS_AS(nondimensionalize(p), std::invalid_argument);
  p = unit_params();
  p.K_cond = 0.0;  // kappa would vanish
  CHECK_THROWS_AS(nondimensionalize(p), std::invalid_argument);
}

TEST_CASE("NondimParams/CostWeights validation") {
  NondimParams q;
  q.Pr = 0.0;
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
  q = NondimParams{};
  q.b = 5.0;  // free sign when constructed directly
  CHECK_NOTHROW(q.validate());

  CostWeights w;
  w.gamma2 = 1.0;
  w.mode = CostWeights::Mode::CoerciveWeights;
  CHECK_THROWS_AS(w.validate(), std::invalid_argument);  // gamma4..6 zero
  w.gamma4 = w.gamma5 = w.gamma6 = 1e-2;
  CHECK_NOTHROW(w.validate());
  w.gamma1 = w.gamma2 = w.gamma3 = 0.0;
  CHECK_THROWS_AS(w.validate(), std::invalid_argument);
  w.mode = CostWeights::Mode::BoundedSets;
  w.gamma2 = 1.0;
  w.gamma4 = w.gamma5 = w.gamma6 = 0.0;
  CHECK_NOTHROW(w.validate());
}
