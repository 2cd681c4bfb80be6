#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "rbm/grid.hpp"

namespace rbm {

/// Dense SPD Gram matrix of the discrete H^{1/2} norm on a boundary region:
///   ||v||^2 = sum_f w_f v_f^2
///           + sum_{f != f'} w_f w_f' (v_f - v_f')^2 / |x_f - x_f'|^3
/// (Gagliardo double sum with s = 1/2 on a 2d surface, diagonal excluded; the
/// sum runs over ordered pairs). An L2-only fallback keeps just the first sum.
class H12Gram {
 public:
  H12Gram() = default;
  H12Gram(const BoundaryRegion& region, bool l2_only = false);

  const Eigen::MatrixXd& matrix() const { return G_; }
  bool l2_only() const { return l2_only_; }
  Eigen::Index size() const { return G_.rows(); }

  /// v' G v for one scalar component.
  double norm_sq(const Eigen::VectorXd& v) const;
  /// Sum over the components of a BoundaryField on the same region.
  double norm_sq(const BoundaryField& f) const;
  double norm(const BoundaryField& f) const { return std::sqrt(norm_sq(f)); }

  /// Riesz map: solves G x = dual (per component).
  Eigen::VectorXd riesz(const Eigen::VectorXd& dual) const;

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const { return G_ * v; }

 private:
  Eigen::MatrixXd G_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  bool l2_only_ = false;
};

}  // namespace rbm
