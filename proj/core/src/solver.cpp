#include "oblab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "oblab/geometry.hpp"

namespace oblab {

namespace {

using RowSparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

// Discrete energy E_h(v) = v^T K v + 2 b^T v with b = h^2 f on interior nodes.
double discrete_energy(const RowSparse& K, const Vec& v, const Vec& b) {
  return v.dot(K * v) + 2.0 * b.dot(v);
}

}  // namespace

DiscreteOperator discretize_operator(const CoefficientField& field, const Grid& grid) {
  if (field.dim != 2) throw ValidationError("discretize_operator: 2D fields only");
  const int nx = grid.nx(), ny = grid.ny();
  const double h = grid.h;
  std::vector<Triplet> trip;
  trip.reserve(12 * grid.size());

  Vec p(2);
  auto A_at = [&](double x, double y) {
    p[0] = x;
    p[1] = y;
    return field.matrix_fn(p);
  };

  // Diagonal coefficients on face midpoints: each face contributes the
  // rank-one energy a (v_a - v_b)^2.
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      Vec n0 = grid.node(i, j);
      double a11 = A_at(n0[0] + 0.5 * h, n0[1])(0, 0);
      auto a = grid.id(i, j), b = grid.id(i + 1, j);
      trip.emplace_back(a, a, a11);
      trip.emplace_back(b, b, a11);
      trip.emplace_back(a, b, -a11);
      trip.emplace_back(b, a, -a11);
    }
  }
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      Vec n0 = grid.node(i, j);
      double a22 = A_at(n0[0], n0[1] + 0.5 * h)(1, 1);
      auto a = grid.id(i, j), b = grid.id(i, j + 1);
      trip.emplace_back(a, a, a22);
      trip.emplace_back(b, b, a22);
      trip.emplace_back(a, b, -a22);
      trip.emplace_back(b, a, -a22);
    }
  }
  // Mixed coefficient on cell centers: 2 a12 Dx Dy with the corner-averaged
  // differences, i.e. the symmetric 4x4 block (a12/4)(gx gy^T + gy gx^T).
  const double gx[4] = {-1, 1, -1, 1};
  const double gy[4] = {-1, -1, 1, 1};
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      Vec n0 = grid.node(i, j);
      double a12 = A_at(n0[0] + 0.5 * h, n0[1] + 0.5 * h)(0, 1);
      if (a12 == 0.0) continue;
      std::size_t c[4] = {grid.id(i, j), grid.id(i + 1, j), grid.id(i, j + 1),
                          grid.id(i + 1, j + 1)};
      for (int p_ = 0; p_ < 4; ++p_)
        for (int q_ = 0; q_ < 4; ++q_) {
          double w = 0.25 * a12 * (gx[p_] * gy[q_] + gy[p_] * gx[q_]);
          if (w != 0.0) trip.emplace_back(c[p_], c[q_], w);
        }
    }
  }

  DiscreteOperator op;
  op.grid = grid;
  op.K.resize(grid.size(), grid.size());
  op.K.setFromTriplets(trip.begin(), trip.end());
  op.K.makeCompressed();

  // Comparison-principle check: positive off-diagonal entries break the
  // M-matrix structure (strong anisotropy); permitted, but callers should
  // know.
  double max_diag = 0.0;
  for (int k = 0; k < op.K.outerSize(); ++k)
    for (SparseMat::InnerIterator it(op.K, k); it; ++it)
      if (it.row() == it.col()) max_diag = std::max(max_diag, it.value());
  for (int k = 0; k < op.K.outerSize() && op.m_matrix; ++k)
    for (SparseMat::InnerIterator it(op.K, k); it; ++it)
      if (it.row() != it.col() && it.value() > 1e-12 * max_diag) {
        op.m_matrix = false;
        break;
      }
  return op;
}

GridField apply_operator(const DiscreteOperator& op, const GridField& v) {
  const Grid& g = op.grid;
  Eigen::Map<const Vec> vv(v.v.data(), v.v.size());
  Vec Kv = op.K * vv;
  GridField out = GridField::zeros(g);
  const double h2 = g.h * g.h;
  for (int j = 1; j + 1 < g.ny(); ++j)
    for (int i = 1; i + 1 < g.nx(); ++i) {
      auto id = g.id(i, j);
      out.v[id] = Kv[id] / h2;  // discrete -div(A grad v)
    }
  return out;
}

ReducedProblem reduce_obstacle(const CoefficientField& field, const Grid& grid,
                               const std::function<double(const Vec&)>& psi,
                               const std::function<double(const Vec&)>& h_term) {
  DiscreteOperator op = discretize_operator(field, grid);
  GridField psi_f = GridField::sample(grid, psi);
  GridField lpsi = apply_operator(op, psi_f);  // -div_h(A grad psi), interior
  ReducedProblem red;
  red.f = GridField::zeros(grid);
  red.f_min = std::numeric_limits<double>::infinity();
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) {
      double val = h_term(grid.node(i, j)) + lpsi.at(i, j);
      red.f.at(i, j) = val;
      if (!grid.is_boundary(i, j)) red.f_min = std::min(red.f_min, val);
    }
  red.positive = red.f_min > 0;
  return red;
}

GridField compute_zeta(const DiscreteOperator& op, const GridField& u, const GridField& f) {
  GridField lu = apply_operator(op, u);
  GridField zeta = GridField::zeros(op.grid);
  for (int j = 1; j + 1 < op.grid.ny(); ++j)
    for (int i = 1; i + 1 < op.grid.nx(); ++i)
      zeta.at(i, j) = f.at(i, j) + lu.at(i, j);  // f - div_h(A grad u)
  return zeta;
}

namespace {

struct LcpState {
  const RowSparse& K;
  const Vec& b;       // h^2 f on interior nodes, 0 elsewhere
  const Vec& f_vals;  // f on interior nodes
  const std::vector<std::size_t>& interior;
  double h2;
};

// max_i |min(u_i, zeta_i)| over interior nodes, the LCP stationarity measure.
double complementarity(const LcpState& st, const Vec& u) {
  Vec Ku = st.K * u;
  double worst = 0.0;
  for (std::size_t id : st.interior) {
    double zeta = st.f_vals[id] + Ku[id] / st.h2;
    worst = std::max(worst, std::abs(std::min(u[id], zeta)));
  }
  return worst;
}

}  // namespace

GridSolution solve_obstacle(const CoefficientField& field, const Grid& grid, const GridField& f,
                            const std::function<double(const Vec&)>& boundary,
                            const SolverOptions& opts) {
  if (!(opts.relax > 0 && opts.relax < 2))
    throw ValidationError("solve_obstacle: relaxation factor must be in (0,2)");
  DiscreteOperator op = discretize_operator(field, grid);
  RowSparse K = op.K;  // row access for the sweeps
  const int nx = grid.nx(), ny = grid.ny();
  const double h2 = grid.h * grid.h;
  const std::size_t N = grid.size();

  Vec u = Vec::Zero(N), b = Vec::Zero(N), f_vals = Vec::Zero(N);
  std::vector<std::size_t> interior;
  interior.reserve(N);
  double f_sup = 0.0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      auto id = grid.id(i, j);
      if (grid.is_boundary(i, j)) {
        double g = boundary(grid.node(i, j));
        if (g < -1e-12)
          throw ValidationError("solve_obstacle: boundary data must be nonnegative");
        u[id] = std::max(g, 0.0);
      } else {
        interior.push_back(id);
        f_vals[id] = f.v[id];
        b[id] = h2 * f.v[id];
        f_sup = std::max(f_sup, std::abs(f.v[id]));
      }
    }
  if (f_sup == 0.0) f_sup = 1.0;

  Vec diag(N);
  for (std::size_t id = 0; id < N; ++id) diag[id] = K.coeff(id, id);

  LcpState st{K, b, f_vals, interior, h2};
  const double tol = opts.tol_factor * f_sup;
  // With a polish phase the relaxation only needs a good active-set estimate;
  // without one it must reach the full tolerance itself.
  const double coarse_tol = opts.polish ? std::max(tol, 1e-3 * f_sup) : tol;

  // Warm start: one unconstrained solve over the full interior, clamped at
  // the obstacle. Away from the contact region the clamp is inactive and the
  // result is already the answer, so the sweeps below mostly repair the
  // neighborhood of the interface instead of diffusing boundary data inward.
  if (opts.polish && !interior.empty()) {
    std::vector<int> pos(N, -1);
    for (std::size_t k = 0; k < interior.size(); ++k) pos[interior[k]] = static_cast<int>(k);
    Vec rhs_full = -(K * u) - b;  // u holds boundary data, zero inside
    std::vector<Triplet> trip;
    for (std::size_t id : interior)
      for (RowSparse::InnerIterator it(K, id); it; ++it)
        if (pos[it.col()] >= 0) trip.emplace_back(pos[id], pos[it.col()], it.value());
    SparseMat Kii(interior.size(), interior.size());
    Kii.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<SparseMat> ldlt(Kii);
    if (ldlt.info() == Eigen::Success) {
      Vec rhs(interior.size());
      for (std::size_t k = 0; k < interior.size(); ++k) rhs[k] = rhs_full[interior[k]];
      Vec x = ldlt.solve(rhs);
      for (std::size_t k = 0; k < interior.size(); ++k) u[interior[k]] = std::max(x[k], 0.0);
    }  // on factorization failure fall through to a cold start
  }

  KktReport rep;
  double energy_prev = discrete_energy(K, u, b);
  double comp = complementarity(st, u);
  const int coarse_cap = opts.polish ? std::min(opts.max_sweeps, 2000) : opts.max_sweeps;

  // Phase 1: projected over-relaxation, lexicographic sweeps. Monotone in the
  // discrete energy; cheap way to get a good active-set estimate.
  while (comp > coarse_tol && rep.sweeps < coarse_cap) {
    for (std::size_t id : interior) {
      double Ku_i = 0.0;
      for (RowSparse::InnerIterator it(K, id); it; ++it) Ku_i += it.value() * u[it.col()];
      double delta = -(Ku_i + b[id]) / diag[id];
      u[id] = std::max(0.0, u[id] + opts.relax * delta);
    }
    ++rep.sweeps;
    double energy = discrete_energy(K, u, b);
    if (energy > energy_prev + 1e-10 * (1.0 + std::abs(energy_prev)))
      throw std::logic_error("solve_obstacle: relaxation sweep increased the energy");
    energy_prev = energy;
    comp = complementarity(st, u);
  }

  // Phase 2: active-set polish. Direct solves on the inactive set; nodes are
  // exchanged by primal (u < 0) and dual (zeta < 0) violations until clean.
  bool polished = false;
  if (opts.polish && rep.sweeps < opts.max_sweeps) {
    std::vector<uint8_t> act(N, 0);
    for (std::size_t id : interior) act[id] = u[id] <= 0.0;

    std::vector<int> pos(N);
    for (int it_as = 0; it_as < opts.max_active_set_iters; ++it_as) {
      ++rep.active_set_iters;
      std::vector<std::size_t> free_ids;
      free_ids.reserve(interior.size());
      std::fill(pos.begin(), pos.end(), -1);
      for (std::size_t id : interior)
        if (!act[id]) {
          pos[id] = static_cast<int>(free_ids.size());
          free_ids.push_back(id);
        }

      Vec u_fix = u;
      for (std::size_t id : interior) u_fix[id] = 0.0;  // keep only boundary data
      if (!free_ids.empty()) {
        Vec rhs_full = -(K * u_fix) - b;
        std::vector<Triplet> trip;
        for (std::size_t id : free_ids)
          for (RowSparse::InnerIterator it(K, id); it; ++it)
            if (pos[it.col()] >= 0) trip.emplace_back(pos[id], pos[it.col()], it.value());
        SparseMat Kff(free_ids.size(), free_ids.size());
        Kff.setFromTriplets(trip.begin(), trip.end());
        Eigen::SimplicialLDLT<SparseMat> ldlt(Kff);
        if (ldlt.info() != Eigen::Success)
          throw std::runtime_error("solve_obstacle: inactive-set factorization failed");
        Vec rhs(free_ids.size());
        for (std::size_t k = 0; k < free_ids.size(); ++k) rhs[k] = rhs_full[free_ids[k]];
        Vec x = ldlt.solve(rhs);
        u = u_fix;
        for (std::size_t k = 0; k < free_ids.size(); ++k) u[free_ids[k]] = x[k];
      } else {
        u = u_fix;
      }

      Vec Ku = K * u;
      bool dirty = false;
      for (std::size_t id : interior) {
        if (!act[id] && u[id] < -1e-14) {
          act[id] = 1;
          dirty = true;
        } else if (act[id]) {
          double zeta = f_vals[id] + Ku[id] / h2;
          if (zeta < -1e-12 * f_sup) {
            act[id] = 0;
            dirty = true;
          }
        }
      }
      if (!dirty) {
        polished = true;
        break;
      }
    }
    for (std::size_t id : interior) u[id] = std::max(u[id], 0.0);
    comp = complementarity(st, u);
    // Polished iterates may sit a hair above the last relaxation energy;
    // only the relaxation phase carries the monotonicity guarantee.
    energy_prev = discrete_energy(K, u, b);
  }
  (void)polished;

  rep.converged = comp <= tol;
  rep.complementarity = comp;
  rep.energy = energy_prev;

  GridSolution sol;
  sol.grid = grid;
  sol.u = GridField::zeros(grid);
  Eigen::Map<Vec>(sol.u.v.data(), N) = u;
  sol.zeta = compute_zeta(op, sol.u, f);
  sol.contact_tol = h2;
  sol.active.assign(N, 0);
  double min_u = 0.0, zeta_min = 0.0, zeta_excess = 0.0, zeta_inactive = 0.0;
  for (std::size_t id = 0; id < N; ++id) sol.active[id] = sol.u.v[id] <= sol.contact_tol;
  for (std::size_t id : interior) {
    min_u = std::min(min_u, u[id]);
    if (sol.active[id]) {
      zeta_min = std::min(zeta_min, sol.zeta.v[id]);
      zeta_excess = std::max(zeta_excess, sol.zeta.v[id] - f_vals[id]);
    } else {
      zeta_inactive = std::max(zeta_inactive, std::abs(sol.zeta.v[id]));
    }
  }
  rep.min_u = min_u;
  rep.zeta_min = zeta_min;
  rep.zeta_excess = zeta_excess;
  rep.zeta_inactive = zeta_inactive;
  sol.kkt = rep;
  sol.field = std::make_shared<CoefficientField>(field);
  return sol;
}

CaccioppoliSides caccioppoli_check(const GridSolution& sol, const Vec& x0, double r) {
  if (!(r > 0)) throw ValidationError("caccioppoli_check: radius must be positive");
  QuadSpec quad;
  BlowUpSample inner = rescale(sol, x0, r, quad, nullptr);
  BlowUpSample outer = rescale(sol, x0, 2 * r, quad, nullptr);
  const int n = inner.dim();

  // integral_{B_r} |grad u|^2 = r^(n+2) integral_B1 |grad u_r|^2
  double grad2 = 0.0;
  int idx = 0;
  for (int a = 0; a < inner.ball.rho.size(); ++a)
    for (int b = 0; b < inner.ball.sphere.count(); ++b, ++idx)
      grad2 += inner.ball.weight(a, b) * inner.ball_grads.row(idx).squaredNorm();
  // integral_{B_2r} u^2 = (2r)^(n+4) integral_B1 u_{2r}^2
  double u2 = 0.0;
  idx = 0;
  for (int a = 0; a < outer.ball.rho.size(); ++a)
    for (int b = 0; b < outer.ball.sphere.count(); ++b, ++idx)
      u2 += outer.ball.weight(a, b) * outer.ball_vals[idx] * outer.ball_vals[idx];

  double f_sup = 0.0;
  idx = 0;
  for (int a = 0; a < outer.ball.rho.size(); ++a)
    for (int b = 0; b < outer.ball.sphere.count(); ++b, ++idx) {
      Vec x = x0 + 2 * r * outer.ball.node(a, b);
      f_sup = std::max(f_sup, std::abs(sol.field->scalar_fn(x)));
    }

  CaccioppoliSides sides;
  sides.lhs = std::pow(r, n + 2) * grad2;
  sides.rhs_u2 = std::pow(2 * r, n + 4) / (r * r) * u2;
  sides.rhs_f2 = f_sup * f_sup * std::pow(r, n + 2);
  return sides;
}

}  // namespace oblab
