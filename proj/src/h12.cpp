#include "rbm/h12.hpp"

#include <cmath>

namespace rbm {

H12Gram::H12Gram(const BoundaryRegion& region, bool l2_only)
    : l2_only_(l2_only) {
  const Eigen::Index n = Eigen::Index(region.size());
  if (n == 0) throw std::invalid_argument("H12Gram: empty region");
  G_ = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) G_(i, i) = region.faces[i].area;
  if (!l2_only_) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& fi = region.faces[i];
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const auto& fj = region.faces[j];
        double dx = fi.cx - fj.cx, dy = fi.cy - fj.cy, dz = fi.cz - fj.cz;
        double d = std::sqrt(dx * dx + dy * dy + dz * dz);
        // ordered pairs: (v_i - v_j)^2 appears twice in the double sum
        double w = 2.0 * fi.area * fj.area / (d * d * d);
        G_(i, i) += w;
        G_(j, j) += w;
        G_(i, j) -= w;
        G_(j, i) -= w;
      }
    }
  }
  llt_.compute(G_);
  if (llt_.info() != Eigen::Success)
    throw std::runtime_error("H12Gram: Cholesky failed (matrix not SPD?)");
}

double H12Gram::norm_sq(const Eigen::VectorXd& v) const {
  return v.dot(G_ * v);
}

double H12Gram::norm_sq(const BoundaryField& f) const {
  const Eigen::Index n = size();
  if (Eigen::Index(f.region->size()) != n)
    throw std::invalid_argument("H12Gram: field/region mismatch");
  double s = 0.0;
  for (int c = 0; c < f.ncomp; ++c) {
    Eigen::Map<const Eigen::VectorXd> v(f.values.data() + std::size_t(c) * n, n);
    s += v.dot(G_ * v);
  }
  return s;
}

Eigen::VectorXd H12Gram::riesz(const Eigen::VectorXd& dual) const {
  return llt_.solve(dual);
}

}  // namespace rbm
