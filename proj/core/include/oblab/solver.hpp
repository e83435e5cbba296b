#pragma once

#include <memory>
#include <optional>

#include <Eigen/SparseCore>

#include "oblab/coeffs.hpp"
#include "oblab/grid.hpp"

namespace oblab {

using SparseMat = Eigen::SparseMatrix<double>;

/// Symmetric flux-form discretization of v -> -div(A grad v) on a grid.
/// K is the stiffness part of the discrete energy
///   E_h(v) = v^T K v + 2 h^2 sum_i f_i v_i,
/// assembled from face-averaged diagonal coefficients and corner-averaged
/// mixed terms, over all nodes (boundary columns included so Dirichlet data
/// enters residuals naturally). (K v)_i / h^2 is the discrete -div(A grad v)
/// at interior node i; the stencil is exact on quadratics for constant A.
struct DiscreteOperator {
  Grid grid;
  SparseMat K;
  /// False when anisotropy pushed some off-diagonal entry positive, so the
  /// discrete comparison principle is no longer guaranteed.
  bool m_matrix = true;
};

DiscreteOperator discretize_operator(const CoefficientField& field, const Grid& grid);

/// Applies the discrete -div(A grad .) to a node field (interior nodes only;
/// boundary entries of the result are zero).
GridField apply_operator(const DiscreteOperator& op, const GridField& v);

/// Rewrites an obstacle problem (energy density <A grad w, grad w> + 2 h w,
/// constraint w >= psi) in zero-obstacle form: u = w - psi with forcing
/// f = h - div_h(A grad psi) sampled on nodes. Warns (returns flag) when the
/// reduced forcing is not strictly positive, since degenerate contact sets
/// are outside the supported regime.
struct ReducedProblem {
  GridField f;
  double f_min = 0.0;
  bool positive = true;
};
ReducedProblem reduce_obstacle(const CoefficientField& field, const Grid& grid,
                               const std::function<double(const Vec&)>& psi,
                               const std::function<double(const Vec&)>& h_term);

struct SolverOptions {
  double tol_factor = 1e-8;   // stop at max |min(u, f - div_h(A grad u))| <= tol_factor * max f
  int max_sweeps = 100000;    // projected relaxation sweep cap
  double relax = 1.5;         // over-relaxation factor, in (0, 2)
  int max_active_set_iters = 60;
  bool polish = true;         // direct re-solves on the inactive set after relaxation
};

struct KktReport {
  bool converged = false;
  int sweeps = 0;
  int active_set_iters = 0;
  double complementarity = 0.0;  // max |min(u, f - div_h(A grad u))|
  double min_u = 0.0;
  double zeta_min = 0.0;         // min over active nodes (should be >= -tol)
  double zeta_excess = 0.0;      // max over active nodes of zeta - f (should be <= tol)
  double zeta_inactive = 0.0;    // max |zeta| over inactive interior nodes
  double energy = 0.0;           // discrete energy of the returned iterate
};

/// Solution of the discrete zero-obstacle problem.
struct GridSolution {
  Grid grid;
  GridField u;
  GridField zeta;            // f - div_h(A grad u), the constraint multiplier
  std::vector<uint8_t> active;  // 1 on nodes where u <= eps_c = h^2
  KktReport kkt;
  std::shared_ptr<const CoefficientField> field;
  double contact_tol = 0.0;  // eps_c used for `active`
};

/// Solves min E_h(v) over v >= 0 with Dirichlet data g on the box boundary
/// (g must be >= 0). Projected SOR with lexicographic sweeps brings the
/// iterate near the solution, then an active-set polish solves the reduced
/// linear systems exactly. The discrete energy is nonincreasing across
/// relaxation sweeps; this is asserted.
GridSolution solve_obstacle(const CoefficientField& field, const Grid& grid,
                            const GridField& f,
                            const std::function<double(const Vec&)>& boundary,
                            const SolverOptions& opts = {});

/// Multiplier field zeta = f - div_h(A grad u) on interior nodes (zero on the
/// boundary ring). For a converged solution: |zeta| small off the contact
/// set, 0 <= zeta <= f on it.
GridField compute_zeta(const DiscreteOperator& op, const GridField& u, const GridField& f);

/// Energy bound check: integral_{B_r(x0)} |grad u|^2 against
/// C ( r^-2 integral_{B_2r(x0)} u^2 + sup_{B_2r} f^2 * r^(n+2) ).
/// Both sides are returned so callers can assert with their own constant.
struct CaccioppoliSides {
  double lhs = 0.0;
  double rhs_u2 = 0.0;   // r^-2 integral_{B_2r} u^2
  double rhs_f2 = 0.0;   // sup_{B_2r} f^2 * r^(n+2)
};
CaccioppoliSides caccioppoli_check(const GridSolution& sol, const Vec& x0, double r);

}  // namespace oblab
