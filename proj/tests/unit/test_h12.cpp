#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <random>

#include "rbm/h12.hpp"

using namespace rbm;

TEST_CASE("h12: constant field reduces to the L2 part") {
  BoxGrid g(4, 4, 4, 1.0, 1.0);
  auto bottom = make_region(g, BoundaryRegion::Tag::Bottom);
  H12Gram gram(bottom);
  Eigen::VectorXd v = Eigen::VectorXd::Constant(bottom.size(), 2.0);
  CHECK(gram.norm_sq(v) ==
        doctest::Approx(bottom.total_area() * 4.0).epsilon(1e-12));
}

TEST_CASE("h12: two-face toy seminorm") {
  // two unit-area faces at distance 1: seminorm part of (0,1) is 2*1/1 = 2
  BoundaryRegion r;
  r.name = "toy";
  r.faces.push_back({Wall::Bottom, 0, 0, 0, 0.0, 0.0, 0.0, 1.0, 0, 0, -1});
  r.faces.push_back({Wall::Bottom, 1, 0, 0, 1.0, 0.0, 0.0, 1.0, 0, 0, -1});
  H12Gram gram(r);
  Eigen::VectorXd v(2);
  v << 0.0, 1.0;
  // total = L2 part (1*1^2) + seminorm 2
  CHECK(gram.norm_sq(v) == doctest::Approx(3.0).epsilon(1e-14));
  Eigen::VectorXd z = Eigen::VectorXd::Zero(2);
  CHECK(gram.norm_sq(z) == 0.0);
}

TEST_CASE("h12: symmetric, positive definite, eigenvalues >= min area") {
  BoxGrid g(4, 5, 4, 1.0, 2.0);
  auto lat = make_region(g, BoundaryRegion::Tag::Lateral);
  H12Gram gram(lat);
  const auto& G = gram.matrix();
  CHECK((G - G.transpose()).cwiseAbs().maxCoeff() == 0.0);
  double min_area = 1e300;
  for (const auto& f : lat.faces) min_area = std::min(min_area, f.area);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  CHECK(es.eigenvalues().minCoeff() >= min_area * (1.0 - 1e-12));
}

TEST_CASE("h12: riesz inverts the Gram") {
  BoxGrid g(4, 4, 5, 1.0, 1.0);
  auto bottom = make_region(g, BoundaryRegion::Tag::Bottom);
  H12Gram gram(bottom);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-1, 1);
  Eigen::VectorXd d(bottom.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = dist(rng);
  Eigen::VectorXd x = gram.riesz(d);
  CHECK((gram.apply(x) - d).norm() < 1e-10 * d.norm());
}

TEST_CASE("h12: l2-only fallback drops the double sum") {
  BoxGrid g(4, 4, 4, 1.0, 1.0);
  auto bottom = make_region(g, BoundaryRegion::Tag::Bottom);
  H12Gram gram(bottom, /*l2_only=*/true);
  Eigen::VectorXd v(bottom.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = double(i % 3) - 1.0;
  double expect = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    expect += bottom.faces[i].area * v[i] * v[i];
  CHECK(gram.norm_sq(v) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("h12: empty region rejected") {
  BoundaryRegion r;
  CHECK_THROWS_AS(H12Gram{r}, std::invalid_argument);
}

TEST_CASE("h12: exact homogeneity under doubling") {
  BoxGrid g(4, 4, 4, 1.0, 1.0);
  auto bottom = make_region(g, BoundaryRegion::Tag::Bottom);
  H12Gram gram(bottom);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-1, 1);
  Eigen::VectorXd v(bottom.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = dist(rng);
  CHECK(gram.norm_sq(Eigen::VectorXd(2.0 * v)) == 4.0 * gram.norm_sq(v));
}
