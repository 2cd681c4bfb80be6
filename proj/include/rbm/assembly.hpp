#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <memory>

#include "rbm/controls.hpp"
#include "rbm/grid.hpp"
#include "rbm/params.hpp"
#include "rbm/stencils.hpp"

namespace rbm {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Free/constrained split of the MAC velocity DOFs. Normal faces on the
/// boundary are constrained (Dirichlet data from g/u0, u3 = 0 on the top);
/// everything else is free. Tangential wall conditions act through ghosts.
struct DofMap {
  explicit DofMap(const BoxGrid& g);

  VelIndex vi;
  std::vector<long> face2free;  // -1 if constrained
  std::vector<long> free2face;
  long nfree = 0;
  long np = 0;

  long saddle_size() const { return nfree + np + 1; }   // [u | p | mu]
  long coupled_size() const { return nfree + np + 1 + np; }  // + theta
  bool is_free(long face) const { return face2free[face] >= 0; }
};

/// Affine dependence of one boundary datum on the packed control vector
/// [g (component-major) | phi1 | phi2]; the constant part carries u0.
struct AffineDatum {
  Stencil lin;
  double c0 = 0.0;
};

/// Resolves boundary data requests to control DOFs: constrained normal faces
/// and tangential wall values (interpolated between the two adjacent boundary
/// face centroids).
class BoundaryAffine {
 public:
  BoundaryAffine(const BoxGrid& g, const ControlPartition& part,
                 const BoundaryRegion& lateral, const BoundaryRegion& bottom,
                 const BoundaryField& u0);

  long nctrl() const { return ng_ + nphi1_ + nphi2_; }
  long ng() const { return ng_; }
  long nphi1() const { return nphi1_; }
  long nphi2() const { return nphi2_; }
  long g_dof(int comp, std::size_t face) const { return comp * long(n1_) + long(face); }
  long phi1_dof(std::size_t face) const { return ng_ + long(face); }
  long phi2_dof(std::size_t face) const { return ng_ + nphi1_ + long(face); }

  /// Value of the constrained normal MAC face (m,i,j,k).
  AffineDatum normal_face(int m, int i, int j, int k) const;
  /// Tangential velocity component d of the wall datum used by the ghost of
  /// the MAC face (d,i,j,k) adjacent to `wall`.
  AffineDatum tangential(Wall wall, int d, int i, int j, int k) const;
  /// phi1 value aligned with the lateral-wall cell (wall, a, b).
  AffineDatum phi1_at(Wall wall, int a, int b) const;
  /// phi2 value aligned with the bottom cell (i, j).
  AffineDatum phi2_at(int i, int j) const;

  Eigen::VectorXd pack(const ControlTriple& c) const;
  void unpack(const Eigen::VectorXd& v, ControlTriple& c) const;
  double eval(const AffineDatum& a, const Eigen::VectorXd& ctrl) const;

 private:
  AffineDatum wall_vector_value(Wall wall, int comp, int a, int b) const;

  const BoxGrid& g_;
  long n1_ = 0, ng_ = 0, nphi1_ = 0, nphi2_ = 0;
  // per wall: face index into gamma01 (>=0) or gamma02 (encoded negative-2-off)
  std::vector<int> wall_lookup_[5];  // XLo,XHi,YLo,YHi,Bottom
  std::vector<int> lat_lookup_[4];   // lateral region index per wall
  std::vector<int> bot_lookup_;      // bottom region index
  const BoundaryField* u0_ = nullptr;
  int wall_dims_[5][2];
};

class SchurStokes;

/// Grid + parameters + control partition + DOF bookkeeping; owns the boundary
/// regions so BoundaryFields can point at them for the lifetime of a run.
struct Discretization {
  BoxGrid grid;
  NondimParams prm;
  BoundaryRegion top, bottom, lateral, gamma0;
  ControlPartition part;
  DofMap dofs;
  BoundaryField u0;  // fixed data on gamma02
  std::unique_ptr<BoundaryAffine> bdata;

  Discretization(const BoxGrid& g, const NondimParams& p);
  Discretization(const BoxGrid& g, const NondimParams& p,
                 const std::vector<bool>& gamma01_mask);
  Discretization(const Discretization&) = delete;
  Discretization& operator=(const Discretization&) = delete;

  /// Grams are built lazily and cached.
  const H12Gram& gram_g() const;
  const H12Gram& gram_phi1() const;
  const H12Gram& gram_phi2() const;
  const H12Gram& gram_gamma02() const;
  void set_l2_only(bool v) { l2_only_ = v; }
  bool l2_only() const { return l2_only_; }

  ControlTriple make_controls() const;

  /// Replaces the fixed Gamma0^2 data (values only; the region is fixed).
  void set_u0(const BoundaryField& field);

  /// Cached Stokes-Schur solver for the large-grid path.
  const SchurStokes& schur() const;

 private:
  void finish_setup();
  mutable std::unique_ptr<H12Gram> gram_g_, gram_phi1_, gram_phi2_, gram_g02_;
  mutable std::shared_ptr<SchurStokes> schur_;
  bool l2_only_ = false;
};

/// Linear system in residual form R(x,c) = A x + B c + r0.
struct LinearSystem {
  SpMat A;
  SpMat B;
  Eigen::VectorXd r0;
};

/// Temperature system (rows/cols = cells) at frozen advecting field.
LinearSystem assemble_temperature(const Discretization& d, const VelocityField& ubar);

/// Velocity saddle system (rows/cols = [u|p|mu]) at frozen advecting field and
/// known temperature. Advection of the unknown is implicit (Oseen form).
LinearSystem assemble_velocity(const Discretization& d, const VelocityField& ubar,
                               const ScalarField& theta);

/// Exact Jacobian of the coupled residual at a state, rows/cols =
/// [u|p|mu|theta]; B carries d(residual)/d(controls).
LinearSystem assemble_jacobian(const Discretization& d, const VelocityField& u,
                               const ScalarField& theta);

/// Evaluates the full nonlinear residual at (u, p, theta) with data c.
Eigen::VectorXd coupled_residual(const Discretization& d, const VelocityField& u,
                                 const ScalarField& p, const ScalarField& theta,
                                 const Eigen::VectorXd& ctrl);

/// Scatter/gather between MAC fields and the stacked vectors. Constrained
/// faces take their boundary data; directions and multipliers use only the
/// linear part (include_const = false).
Eigen::VectorXd gather_state(const Discretization& d, const VelocityField& u,
                             const ScalarField& p, const ScalarField& theta);
void scatter_velocity(const Discretization& d, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& ctrl, VelocityField& u,
                      bool include_const = true);
void scatter_pressure(const Discretization& d, const Eigen::VectorXd& x, ScalarField& p);
void scatter_theta_from_coupled(const Discretization& d, const Eigen::VectorXd& x,
                                ScalarField& theta);

/// Solves A x = b with SparseLU; throws on failure.
Eigen::VectorXd sparse_lu_solve(const SpMat& A, const Eigen::VectorXd& b,
                                const char* what);

/// N_sk(ubar) ubar on the free velocity rows (explicit-advection right side
/// for the large-grid Stokes path).
Eigen::VectorXd explicit_advection_rhs(const Discretization& d,
                                       const VelocityField& ubar);

/// Pressure-Schur CG solve of the symmetric Stokes saddle (advection must be
/// on the right-hand side). Used above the direct-solver size threshold.
struct SchurStokes {
  SchurStokes(const Discretization& d);
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs_mom,
                        const Eigen::VectorXd& rhs_div, double tol) const;

 private:
  const Discretization& d_;
  std::array<std::unique_ptr<Eigen::SimplicialLDLT<SpMat>>, 3> lap_;
  std::array<SpMat, 3> lapA_;
  SpMat G_;  // nfree x np pressure gradient (momentum scaling)
  std::array<std::pair<long, long>, 3> comp_range_;
  Eigen::VectorXd apply_ainv(const Eigen::VectorXd& f) const;
};

}  // namespace rbm
