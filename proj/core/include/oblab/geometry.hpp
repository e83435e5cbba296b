#pragma once

#include <optional>
#include <vector>

#include "oblab/quadrature.hpp"
#include "oblab/solver.hpp"

namespace oblab {

/// Node ids of the contact set {u <= eps_c} (interior nodes only).
std::vector<std::size_t> contact_set(const GridSolution& sol);

/// Free boundary sampled on grid edges. Each point lies on an edge joining a
/// contact node to a strictly positive node; `anchors` holds the contact
/// node's id, `edge_dirs` the edge axis (0 or 1). Points are refined along
/// the edge by extrapolating sqrt(u) through the two positive nodes beyond
/// the interface (quadratic detachment makes sqrt(u) locally linear), which
/// keeps the anchor error at O(h^2) in the benign case and never moves the
/// point off its edge.
struct FreeBoundary {
  std::vector<Vec> points;
  std::vector<std::size_t> anchors;
  std::vector<int> edge_dirs;

  std::size_t count() const { return points.size(); }
};

FreeBoundary free_boundary(const GridSolution& sol);

/// Symmetric positive definite square root. Throws ValidationError when the
/// input is not symmetric (1e-12 relative) or has a non-positive eigenvalue.
Mat matrix_sqrt_spd(const Mat& M);

/// Pointwise affine change of variables x = x0 + L y with
/// L = f(x0)^(-1/2) A(x0)^(1/2), which turns the operator at x0 into the
/// Laplacian with unit forcing. Carries the pieces needed to transform
/// fields and gradients.
struct NormalizationMap {
  Vec x0;
  Mat L;
  Mat L_inv;
  Mat A0;
  Mat A0_sqrt;
  Mat A0_isqrt;
  double f0 = 1.0;
  double op_norm = 1.0;    // largest singular value of L
  double sigma_min = 1.0;  // smallest singular value of L
};

NormalizationMap normalization_map(const CoefficientField& field, const Vec& x0);

/// Normalized coefficients seen through the map:
/// C(y) = A0^(-1/2) A(x0 + L y) A0^(-1/2) and f(x0 + L y)/f(x0).
/// C(0) = Id and f_norm(0) = 1 by construction.
Mat normalized_matrix(const NormalizationMap& map, const CoefficientField& field, const Vec& y);
double normalized_scalar(const NormalizationMap& map, const CoefficientField& field, const Vec& y);

/// Scalar field with an analytic gradient, for quadrature-exact sampling in
/// oracles and derivative checks.
struct AnalyticField {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
};

/// Parabolically rescaled field sampled on ball and sphere quadrature nodes:
/// values u(x0 + r L x) / r^2 and gradients L^T grad u(x0 + r L x) / r.
/// With L = Id this is the plain blow-up family.
struct BlowUpSample {
  Vec x0;
  double r = 1.0;
  Mat L;            // identity when sampled without a map
  bool normalized = false;
  BallQuad ball;
  Vec ball_vals;
  Mat ball_grads;   // one gradient per row, ball node order
  Vec sph_vals;
  Mat sph_grads;

  int dim() const { return static_cast<int>(x0.size()); }
};

/// Largest radius r such that x0 + r L B1 stays one cell inside the grid.
double max_admissible_radius(const Grid& grid, const Vec& x0, const NormalizationMap* map);

/// Samples the rescaled solution on quadrature nodes (multilinear in u and in
/// each precomputed gradient component). Throws DomainError when the mapped
/// ball leaves the grid interior, naming the largest admissible radius.
BlowUpSample rescale(const GridSolution& sol, const Vec& x0, double r, const QuadSpec& quad,
                     const NormalizationMap* map = nullptr);

/// Same sampling for an analytic field (no grid, no interpolation error).
BlowUpSample rescale(const AnalyticField& u, int dim, const Vec& x0, double r,
                     const QuadSpec& quad, const NormalizationMap* map = nullptr);

/// Two-homogeneous extension of the sphere trace: w(x) = |x|^2 u(x/|x|).
/// Ball values and gradients are rebuilt from the sphere data; the sphere
/// trace is unchanged.
BlowUpSample two_hom_extension(const BlowUpSample& s);

}  // namespace oblab
