#pragma once

#include <stdexcept>

namespace rbm {

/// Dimensional material / geometry data for a fluid layer heated from below.
/// All entries SI-consistent; validate() enforces the sign contract.
struct PhysicalParams {
  double rho0 = 1.0;         // mean density
  double mu = 1.0;           // dynamic viscosity
  double K_cond = 1.0;       // thermal conductivity
  double cp = 1.0;           // heat capacity per unit mass
  double alpha = 1.0;        // thermal expansion coefficient [1/K]
  double gamma_sigma = 1.0;  // surface-tension temperature coefficient
  double g_mag = 1.0;        // gravity magnitude
  double h_exch = 1.0;       // surface heat-exchange coefficient
  double d = 1.0;            // layer height
  double l1 = 1.0;           // horizontal extent, x1
  double L1 = 1.0;           // horizontal extent, x2
  double theta_c = 1.0;      // bottom plate temperature
  double theta_a = 0.0;      // ambient temperature

  void validate() const;
};

/// Dimensionless coefficients of the stationary system on (0,l)x(0,L)x(0,1).
/// May be constructed directly for pure-nondimensional experiments; every
/// downstream module consumes only this type.
struct NondimParams {
  double Pr = 1.0;          // Prandtl number
  double R = 0.0;           // Rayleigh number
  double b = 0.0;           // gravity constant (<= 0 when derived)
  double M = 0.0;           // Marangoni number
  double B = 1.0;           // Biot number
  double l = 1.0;           // nondimensional extent, x1
  double L = 1.0;           // nondimensional extent, x2
  double theta_c_nd = 1.0;  // nondimensional bottom temperature

  void validate() const;
};

/// Weights gamma1..gamma6 of the cost functional plus the admissible-set mode:
/// mode (i) requires bounded control sets, mode (ii) requires gamma4..6 > 0.
struct CostWeights {
  double gamma1 = 0.0;  // vorticity
  double gamma2 = 0.0;  // velocity tracking
  double gamma3 = 0.0;  // temperature tracking
  double gamma4 = 0.0;  // ||g||_{1/2}
  double gamma5 = 0.0;  // ||phi1||_{1/2}
  double gamma6 = 0.0;  // ||phi2||_{1/2}

  enum class Mode { BoundedSets, CoerciveWeights };  // (i) / (ii)
  Mode mode = Mode::CoerciveWeights;

  void validate() const;
};

/// Change of variables from the dimensional layer to the unit-height box:
///   kappa = K/(rho0*cp), nu = mu/rho0, theta_u = theta_c - theta_a,
///   Pr = nu/kappa, R = |g| alpha theta_u d^3/(kappa nu),
///   b = -|g| d^3/(kappa nu), M = gamma theta_u d/(rho0 nu kappa),
///   B = h d / K, l = l1/d, L = L1/d.
/// Rejects theta_c < theta_a (outside the heating-from-below regime).
NondimParams nondimensionalize(const PhysicalParams& p);

}  // namespace rbm
