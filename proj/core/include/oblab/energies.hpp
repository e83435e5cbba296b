#pragma once

#include "oblab/geometry.hpp"

namespace oblab {

/// Weiss balanced energy of a rescaled sample at scale 1:
///   phi = integral_B1 (|grad u|^2 + 2 u) - 2 integral_dB1 u^2.
struct WeissValue {
  double phi = 0.0;
  double bulk = 0.0;      // integral_B1 (|grad u|^2 + 2 u)
  double boundary = 0.0;  // integral_dB1 u^2
};

WeissValue weiss_energy(const BlowUpSample& s);

/// Dimensional constant theta = |B1| / (2 (n + 2)), the Weiss energy of every
/// singular quadratic profile; theta / 2 is the half-space value. Computed
/// from the closed form and cross-checked against ball quadrature of two
/// independent quadratic profiles; disagreement beyond 1e-9 throws (it would
/// mean the quadrature itself is broken). Supported dims: 2 and 3.
double theta_constant(int dim);

/// Geometric radius schedule. Radii run from rmax_factor * dist(x0, domain
/// boundary) / |L|_2 down to rmin_factor * h / sigma_min(L) with ratio q;
/// every radius in that window is flagged trusted.
struct RadiiSpec {
  double q = 0.70710678118654752;  // 2^(-1/2)
  double rmin_factor = 8.0;
  double rmax_factor = 0.4;
  int max_count = 64;
};

struct RadiiSchedule {
  std::vector<double> radii;  // decreasing
  std::vector<uint8_t> trusted;
  double r_min = 0.0;
  double r_max = 0.0;
};

RadiiSchedule radii_schedule(const RadiiSpec& spec, double h, double boundary_dist,
                             const NormalizationMap* map);

/// Weiss energy along a decreasing radius schedule, with the Dini correction
/// that restores monotonicity under coefficient roughness:
///   correction(r) = c_corr * integral_0^r (omega_A(t) + omega_f(t)) / t dt
/// computed from the transformed moduli of the field.
struct EnergyTrace {
  std::vector<double> radii;  // decreasing
  std::vector<double> phi;
  std::vector<double> bulk;
  std::vector<double> boundary;
  std::vector<double> correction;
  std::vector<uint8_t> trusted;
  double c_corr = 0.0;
  bool correction_divergent = false;
};

EnergyTrace weiss_trace(const GridSolution& sol, const Vec& x0, const RadiiSchedule& radii,
                        const QuadSpec& quad, const NormalizationMap* map, double c_corr);

/// Finite-difference check of the Weiss derivative identity at radius r:
///   d/dr Phi(r) = (n+2)/r (Phi_w(1) - Phi_ur(1))
///               + 1/r integral_dB1 (<grad u_r, nu> - 2 u_r)^2,
/// where w is the two-homogeneous extension of the sphere trace. Phi_w(1) is
/// evaluated both by ball quadrature of the extension and by the sphere-only
/// reduction (1/(n+2)) integral_dB1 (|grad_tau u|^2 - 2 n u^2 + 2 u); the two
/// routes must agree to 1e-8 or this throws. Returns |lhs - rhs|.
double weiss_derivative_residual(const AnalyticField& u, int dim, const Vec& x0, double r,
                                 double dr, const QuadSpec& quad);

/// Coefficient-freezing gaps of a normalized sample at scale r: how far the
/// frozen Dirichlet energy and unit forcing are from their variable
/// counterparts, against the transformed-modulus bounds that control them.
struct FreezingGap {
  double dirichlet_gap = 0.0;    // |int |grad u|^2 - int <C(r x) grad u, grad u>|
  double dirichlet_bound = 0.0;  // omega_A(r) * int |grad u|^2
  double forcing_gap = 0.0;      // |int (1 - f_norm(r x)) u|
  double forcing_bound = 0.0;    // omega_f(r) * int u
};

FreezingGap freezing_gap(const BlowUpSample& s, const CoefficientField& field,
                         const NormalizationMap& map);

/// Monneau monitor for a singular point with fitted quadratic profile
/// v = <Q x, x>: sphere deviation integral_dB1 (u_r - v)^2 plus the
/// double-Dini correction c_corr * integral_0^r omega(s) log(r/s) / s ds.
/// Q must be symmetric PSD with trace 1/2 (the Delta v = 1 convention).
struct MonneauTrace {
  std::vector<double> radii;  // decreasing
  std::vector<double> deviation;
  std::vector<double> correction;
  std::vector<double> monitor;
  std::vector<uint8_t> trusted;
  double c_corr = 0.0;
  bool correction_divergent = false;
};

MonneauTrace monneau_trace(const GridSolution& sol, const Vec& x0, const Mat& Q,
                           const RadiiSchedule& radii, const QuadSpec& quad,
                           const NormalizationMap* map, double c_corr);

/// Double-Dini weight integral_0^r omega(s) log(r/s) / s ds (requires r <= 1),
/// evaluated as dini_integral(omega, r, 1) - |log r| dini_integral(omega, r, 0).
DiniResult double_dini_log(const Modulus& omega, double r);

}  // namespace oblab
