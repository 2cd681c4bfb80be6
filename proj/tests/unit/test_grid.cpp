#include "doctest.h"

#include <cmath>
#include <random>

#include "rbm/grid.hpp"

using namespace rbm;

namespace {

VelocityField sample_velocity(const BoxGrid& g, double (*f1)(double, double, double),
                              double (*f2)(double, double, double),
                              double (*f3)(double, double, double)) {
  VelocityField v(g);
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i <= g.nx; ++i)
        v.U1(i, j, k) = f1(i * g.hx, g.yc(j), g.zc(k));
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j <= g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        v.U2(i, j, k) = f2(g.xc(i), j * g.hy, g.zc(k));
  for (int k = 0; k <= g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        v.U3(i, j, k) = f3(g.xc(i), g.yc(j), k * g.hz);
  return v;
}

}  // namespace

TEST_CASE("grid: constructor validates") {
  CHECK_THROWS_AS(BoxGrid(3, 8, 8, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(BoxGrid(8, 8, 8, -1.0, 1.0), std::invalid_argument);
  BoxGrid g(8, 4, 6, 2.0, 3.0);
  CHECK(g.hx == doctest::Approx(0.25));
  CHECK(g.hy == doctest::Approx(0.75));
  CHECK(g.hz == doctest::Approx(1.0 / 6));
}

TEST_CASE("divergence: constant field is solenoidal") {
  BoxGrid g(6, 5, 4, 1.0, 1.0);
  VelocityField v = sample_velocity(
      g, [](double, double, double) { return 1.0; },
      [](double, double, double) { return 0.0; },
      [](double, double, double) { return 0.0; });
  CHECK(max_abs_div(g, v) == 0.0);
}

TEST_CASE("divergence: v=(x,0,0) has unit divergence everywhere") {
  BoxGrid g(6, 5, 4, 1.0, 1.0);
  VelocityField v = sample_velocity(
      g, [](double x, double, double) { return x; },
      [](double, double, double) { return 0.0; },
      [](double, double, double) { return 0.0; });
  ScalarField d = divergence(g, v);
  for (double x : d.v) CHECK(x == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("divergence: v=(x,-y,0) is divergence free") {
  BoxGrid g(6, 5, 4, 1.5, 0.8);
  VelocityField v = sample_velocity(
      g, [](double x, double, double) { return x; },
      [](double, double y, double) { return -y; },
      [](double, double, double) { return 0.0; });
  CHECK(max_abs_div(g, v) < 1e-13);
}

TEST_CASE("curl: discrete gradient has zero curl") {
  BoxGrid g(6, 5, 4, 1.0, 2.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1, 1);
  ScalarField q(g);
  for (double& x : q.v) x = dist(rng);
  VelocityField v = grad_c2f(g, q);
  CurlField w = curl(g, v);
  CHECK(max_abs(w.wx) < 1e-12);
  CHECK(max_abs(w.wy) < 1e-12);
  CHECK(max_abs(w.wz) < 1e-12);
}

TEST_CASE("curl: rigid rotation has curl (0,0,2)") {
  BoxGrid g(6, 6, 4, 1.0, 1.0);
  VelocityField v = sample_velocity(
      g, [](double, double y, double) { return -y; },
      [](double x, double, double) { return x; },
      [](double, double, double) { return 0.0; });
  CurlField w = curl(g, v);
  for (double x : w.wz) CHECK(x == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(max_abs(w.wx) < 1e-13);
  CHECK(max_abs(w.wy) < 1e-13);
}

TEST_CASE("curl: zero field") {
  BoxGrid g(4, 4, 4, 1.0, 1.0);
  VelocityField v(g);
  CurlField w = curl(g, v);
  CHECK(max_abs(w.wz) == 0.0);
}

TEST_CASE("h1_seminorm: constants vanish, theta=x3 approaches |Omega|") {
  BoxGrid g(8, 8, 8, 1.0, 1.0);
  ScalarField c(g);
  for (double& x : c.v) x = 3.14;
  CHECK(h1_seminorm(g, c) == 0.0);

  ScalarField t(g);
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) t(i, j, k) = g.zc(k);
  // forward differences: (nz-1) interior pairs per column
  double expect = std::sqrt(double(g.nz - 1) / g.nz);
  CHECK(h1_seminorm(g, t) == doctest::Approx(expect).epsilon(1e-13));

  BoxGrid g2(8, 8, 8, 2.0, 2.0);
  ScalarField t2(g2);
  for (int k = 0; k < g2.nz; ++k)
    for (int j = 0; j < g2.ny; ++j)
      for (int i = 0; i < g2.nx; ++i) t2(i, j, k) = g2.zc(k);
  double s2 = h1_seminorm(g2, t2);
  // |Omega| = 4; discrete value 4*(nz-1)/nz
  CHECK(s2 * s2 == doctest::Approx(4.0 * (g2.nz - 1) / g2.nz).epsilon(1e-13));
}

TEST_CASE("summation by parts: <q, div v> = -<grad q, v> for interior fields") {
  BoxGrid g(6, 5, 7, 1.3, 0.9);
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> dist(-1, 1);
  ScalarField q(g);
  for (double& x : q.v) x = dist(rng);
  VelocityField v(g);
  // random v with zero normal boundary faces
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 1; i < g.nx; ++i) v.U1(i, j, k) = dist(rng);
  for (int k = 0; k < g.nz; ++k)
    for (int j = 1; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) v.U2(i, j, k) = dist(rng);
  for (int k = 1; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) v.U3(i, j, k) = dist(rng);

  ScalarField dv = divergence(g, v);
  VelocityField gq = grad_c2f(g, q);
  double V = g.cell_volume();
  double a = 0.0;
  for (long c = 0; c < g.ncells(); ++c) a += q.v[c] * dv.v[c] * V;
  double b = 0.0;
  for (std::size_t m = 0; m < v.u1.size(); ++m) b += gq.u1[m] * v.u1[m] * V;
  for (std::size_t m = 0; m < v.u2.size(); ++m) b += gq.u2[m] * v.u2[m] * V;
  for (std::size_t m = 0; m < v.u3.size(); ++m) b += gq.u3[m] * v.u3[m] * V;
  CHECK(std::abs(a + b) < 1e-13 * (std::abs(a) + 1.0));
}

TEST_CASE("leray_project: output is cell-exactly solenoidal") {
  BoxGrid g(6, 6, 6, 1.0, 1.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-1, 1);
  VelocityField v(g);
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 1; i < g.nx; ++i) v.U1(i, j, k) = dist(rng);
  for (int k = 0; k < g.nz; ++k)
    for (int j = 1; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) v.U2(i, j, k) = dist(rng);
  for (int k = 1; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) v.U3(i, j, k) = dist(rng);
  leray_project(g, v);
  CHECK(max_abs_div(g, v) < 1e-10);
  // normal faces untouched (still zero)
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j) {
      CHECK(v.U1(0, j, k) == 0.0);
      CHECK(v.U1(g.nx, j, k) == 0.0);
    }
}

TEST_CASE("boundary regions: areas and partition") {
  BoxGrid g(4, 6, 5, 2.0, 3.0);
  auto top = make_region(g, BoundaryRegion::Tag::Top);
  auto bottom = make_region(g, BoundaryRegion::Tag::Bottom);
  auto lateral = make_region(g, BoundaryRegion::Tag::Lateral);
  auto gamma0 = make_region(g, BoundaryRegion::Tag::Gamma0);
  CHECK(top.total_area() == doctest::Approx(6.0));
  CHECK(bottom.total_area() == doctest::Approx(6.0));
  CHECK(lateral.total_area() == doctest::Approx(2.0 * (2.0 + 3.0)));
  CHECK(gamma0.size() == bottom.size() + lateral.size());

  auto part = default_partition(g);
  CHECK(part.gamma01.size() == lateral.size());
  CHECK(part.gamma02.size() == bottom.size());
}

TEST_CASE("BoundaryField: H~00 constraints") {
  BoxGrid g(4, 4, 4, 1.0, 1.0);
  auto part = default_partition(g);
  BoundaryField gfield(part.gamma01, 3, true);
  for (std::size_t f = 0; f < part.gamma01.size(); ++f) {
    gfield.at(0, f) = 1.0;  // includes normal parts on x-walls
    gfield.at(1, f) = 0.5;
    gfield.at(2, f) = -0.25;
  }
  CHECK_FALSE(gfield.constraints_satisfied(1e-12));
  gfield.impose_constraints();
  CHECK(gfield.constraints_satisfied(1e-12));
  CHECK(std::abs(gfield.normal_flux()) < 1e-13);
}
