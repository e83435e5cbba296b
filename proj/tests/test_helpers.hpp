#pragma once

// Shared fixtures for the unit tests: small boxes, the constant-coefficient
// field, and the closed-form radial benchmark
//   u(x) = |x|^2/4 - (1/8) log(|x|/rho) - rho^2/4,  |x| >= rho = 1/2,
// which satisfies Delta u = 1 outside the contact disk |x| <= rho and
// vanishes together with its gradient on |x| = rho (u'(rho) = rho/2 -
// 1/(8 rho) = 0 at rho = 1/2). Used as Dirichlet data it makes the discrete
// solver reproduce a circular free boundary of known radius.

#include <cmath>
#include <functional>

#include <Eigen/Dense>

#include "oblab/coeffs.hpp"
#include "oblab/geometry.hpp"
#include "oblab/grid.hpp"
#include "oblab/solver.hpp"

namespace oblab::testing {

inline Vec vec2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

inline Box box2(double lo, double hi) {
  Box b;
  b.lo = vec2(lo, lo);
  b.hi = vec2(hi, hi);
  return b;
}

inline CoefficientField identity_field(const Box& domain) {
  return make_family(FamilyKind::identity, FamilyParams{}, domain);
}

// Constant coefficients A, f on a box, with tight declared bounds.
inline CoefficientField constant_field(const Box& domain, const Mat& A, double f) {
  CoefficientField field;
  field.dim = domain.dim();
  field.domain = domain;
  field.matrix_fn = [A](const Vec&) { return A; };
  field.scalar_fn = [f](const Vec&) { return f; };
  Eigen::SelfAdjointEigenSolver<Mat> es(A);
  field.lambda = std::max(es.eigenvalues().maxCoeff(), 1.0 / es.eigenvalues().minCoeff());
  field.f_min = field.f_max = f;
  field.name = "constant";
  return field;
}

constexpr double kContactRadius = 0.5;

inline double radial_value(double rho) {
  if (rho <= kContactRadius) return 0.0;
  return rho * rho / 4.0 - 0.125 * std::log(rho / kContactRadius) -
         kContactRadius * kContactRadius / 4.0;
}

inline double radial_exact(const Vec& x) { return radial_value(x.norm()); }

inline Vec radial_gradient(const Vec& x) {
  double rho = x.norm();
  if (rho <= kContactRadius) return Vec::Zero(x.size());
  return (0.5 - 0.125 / (rho * rho)) * x;
}

inline AnalyticField radial_field() {
  AnalyticField f;
  f.value = radial_exact;
  f.gradient = radial_gradient;
  return f;
}

// Solves the constant-coefficient benchmark with f = 1 and the given
// Dirichlet data on [lo, hi]^2.
inline GridSolution solve_identity(double lo, double hi, double h,
                                   const std::function<double(const Vec&)>& boundary) {
  Box domain = box2(lo, hi);
  CoefficientField field = identity_field(domain);
  Grid grid = Grid::make(domain, h);
  GridField f = GridField::sample(grid, [](const Vec&) { return 1.0; });
  return solve_obstacle(field, grid, f, boundary);
}

inline double halfspace_boundary(const Vec& x) {
  double t = std::max(x[0], 0.0);
  return 0.5 * t * t;
}

inline double singular_line_boundary(const Vec& x) { return 0.5 * x[0] * x[0]; }

}  // namespace oblab::testing
