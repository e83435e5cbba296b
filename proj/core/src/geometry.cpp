#include "oblab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

namespace oblab {

namespace {

// Strict contact test for interface extraction. Active nodes carry exact
// zeros from the projection / active-set solve, so this is far below any
// genuinely detached value (which is >= O(h^2) by quadratic detachment).
double strict_tol(const Grid& g) { return 1e-9 * g.h * g.h; }

}  // namespace

std::vector<std::size_t> contact_set(const GridSolution& sol) {
  std::vector<std::size_t> ids;
  const Grid& g = sol.grid;
  for (int j = 1; j + 1 < g.ny(); ++j)
    for (int i = 1; i + 1 < g.nx(); ++i)
      if (sol.active[g.id(i, j)]) ids.push_back(g.id(i, j));
  return ids;
}

FreeBoundary free_boundary(const GridSolution& sol) {
  const Grid& g = sol.grid;
  const double tol = strict_tol(g);
  auto contact = [&](int i, int j) { return sol.u.at(i, j) <= tol; };

  FreeBoundary fb;
  // Interface edges in both axis directions. The point on each edge is
  // placed by extrapolating sqrt(u) linearly through the two positive nodes
  // beyond the interface: detachment is quadratic, so sqrt(u) is locally
  // linear and the root lands within O(h^2) of the true boundary. The point
  // is clamped to its edge, and falls back to the contact node when the
  // second positive node is unusable.
  for (int dir = 0; dir < 2; ++dir) {
    int di = dir == 0 ? 1 : 0, dj = dir == 0 ? 0 : 1;
    for (int j = 0; j + dj < g.ny(); ++j) {
      for (int i = 0; i + di < g.nx(); ++i) {
        bool c0 = contact(i, j), c1 = contact(i + di, j + dj);
        if (c0 == c1) continue;
        int pi = c0 ? i + di : i, pj = c0 ? j + dj : j;  // positive node
        int zi = c0 ? i : i + di, zj = c0 ? j : j + dj;  // contact node
        int sgn = pi + pj > zi + zj ? 1 : -1;            // contact -> positive along axis
        Vec pt = g.node(zi, zj);
        int qi = pi + sgn * di, qj = pj + sgn * dj;  // second node past the interface
        double u1 = sol.u.at(pi, pj);
        if (qi >= 0 && qi < g.nx() && qj >= 0 && qj < g.ny() && u1 > 0) {
          double u2 = sol.u.at(qi, qj);
          double s1 = std::sqrt(u1), s2 = u2 > 0 ? std::sqrt(u2) : 0.0;
          if (s2 > s1) {
            double back = s1 / (s2 - s1) * g.h;  // distance from the positive node to the root
            double off = std::clamp(g.h - back, 0.0, g.h);
            pt[dir] += sgn * off;
          }
        }
        fb.points.push_back(pt);
        fb.anchors.push_back(g.id(zi, zj));
        fb.edge_dirs.push_back(dir);
      }
    }
  }
  return fb;
}

Mat matrix_sqrt_spd(const Mat& M) {
  if (M.rows() != M.cols()) throw ValidationError("matrix_sqrt_spd: matrix must be square");
  double scale = std::max(M.cwiseAbs().maxCoeff(), 1e-300);
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ValidationError("matrix_sqrt_spd: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(M);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("matrix_sqrt_spd: eigendecomposition failed");
  const Vec& ev = es.eigenvalues();
  if (ev.minCoeff() <= 1e-14 * std::abs(ev.maxCoeff()))
    throw ValidationError("matrix_sqrt_spd: matrix is not positive definite");
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

NormalizationMap normalization_map(const CoefficientField& field, const Vec& x0) {
  NormalizationMap map;
  map.x0 = x0;
  map.A0 = eval_matrix(field, x0);
  map.f0 = eval_scalar(field, x0);
  if (!(map.f0 > 0)) throw ValidationError("normalization_map: f(x0) must be positive");
  map.A0_sqrt = matrix_sqrt_spd(map.A0);
  Eigen::SelfAdjointEigenSolver<Mat> es(map.A0_sqrt);
  map.A0_isqrt = es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
                 es.eigenvectors().transpose();
  double root_f = std::sqrt(map.f0);
  map.L = map.A0_sqrt / root_f;
  map.L_inv = map.A0_isqrt * root_f;
  // L is symmetric positive definite, so its singular values are its
  // eigenvalues: those of A0_sqrt scaled by f0^{-1/2}.
  map.op_norm = es.eigenvalues().maxCoeff() / root_f;
  map.sigma_min = es.eigenvalues().minCoeff() / root_f;
  return map;
}

Mat normalized_matrix(const NormalizationMap& map, const CoefficientField& field, const Vec& y) {
  return map.A0_isqrt * eval_matrix(field, map.x0 + map.L * y) * map.A0_isqrt;
}

double normalized_scalar(const NormalizationMap& map, const CoefficientField& field, const Vec& y) {
  return eval_scalar(field, map.x0 + map.L * y) / map.f0;
}

double max_admissible_radius(const Grid& grid, const Vec& x0, const NormalizationMap* map) {
  double r_adm = std::numeric_limits<double>::infinity();
  for (int d = 0; d < 2; ++d) {
    double reach = map ? map->L.row(d).norm() : 1.0;  // max |e_d . L x| over |x| <= 1
    double room = std::min(x0[d] - (grid.box.lo[d] + grid.h), (grid.box.hi[d] - grid.h) - x0[d]);
    r_adm = std::min(r_adm, room / reach);
  }
  return std::max(r_adm, 0.0);
}

namespace {

Mat map_or_identity(const NormalizationMap* map, int dim) {
  return map ? map->L : Mat::Identity(dim, dim);
}

void check_radius(const Grid& grid, const Vec& x0, double r, const NormalizationMap* map) {
  double r_adm = max_admissible_radius(grid, x0, map);
  if (r > r_adm) {
    std::ostringstream os;
    os << "rescale: ball of radius " << r << " leaves the grid; largest admissible radius at ("
       << x0[0] << ", " << x0[1] << ") is " << r_adm;
    throw DomainError(os.str());
  }
}

template <class Value, class Gradient>
BlowUpSample sample_common(int dim, const Vec& x0, double r, const QuadSpec& quad,
                           const NormalizationMap* map, Value&& value, Gradient&& gradient) {
  BlowUpSample s;
  s.x0 = x0;
  s.r = r;
  s.L = map_or_identity(map, dim);
  s.normalized = map != nullptr;
  s.ball = ball_quadrature(dim, quad.n_rho, quad.n_theta);
  const Mat Lt = s.L.transpose();
  const int nb = s.ball.count(), ns = s.ball.sphere.count();
  s.ball_vals.resize(nb);
  s.ball_grads.resize(nb, dim);
  s.sph_vals.resize(ns);
  s.sph_grads.resize(ns, dim);
  const double r2 = r * r;
  int idx = 0;
  for (int a = 0; a < s.ball.rho.size(); ++a)
    for (int b = 0; b < ns; ++b, ++idx) {
      Vec y = x0 + r * (s.L * s.ball.node(a, b));
      s.ball_vals[idx] = value(y) / r2;
      s.ball_grads.row(idx) = (Lt * gradient(y)).transpose() / r;
    }
  for (int b = 0; b < ns; ++b) {
    Vec y = x0 + r * (s.L * s.ball.sphere.nodes.row(b).transpose());
    s.sph_vals[b] = value(y) / r2;
    s.sph_grads.row(b) = (Lt * gradient(y)).transpose() / r;
  }
  return s;
}

}  // namespace

BlowUpSample rescale(const GridSolution& sol, const Vec& x0, double r, const QuadSpec& quad,
                     const NormalizationMap* map) {
  if (!(r > 0)) throw ValidationError("rescale: radius must be positive");
  check_radius(sol.grid, x0, r, map);
  auto grads = gradient_fields(sol.u);
  Vec gbuf(2);
  return sample_common(
      2, x0, r, quad, map, [&](const Vec& y) { return interp_bilinear(sol.u, y); },
      [&](const Vec& y) -> const Vec& {
        gbuf[0] = interp_bilinear(grads[0], y);
        gbuf[1] = interp_bilinear(grads[1], y);
        return gbuf;
      });
}

BlowUpSample rescale(const AnalyticField& u, int dim, const Vec& x0, double r,
                     const QuadSpec& quad, const NormalizationMap* map) {
  if (!(r > 0)) throw ValidationError("rescale: radius must be positive");
  return sample_common(dim, x0, r, quad, map, u.value, u.gradient);
}

BlowUpSample two_hom_extension(const BlowUpSample& s) {
  BlowUpSample w = s;
  const int dim = s.dim();
  const int ns = s.ball.sphere.count();
  int idx = 0;
  for (int a = 0; a < s.ball.rho.size(); ++a) {
    double rho = s.ball.rho[a];
    for (int b = 0; b < ns; ++b, ++idx) {
      Vec nu = s.ball.sphere.nodes.row(b).transpose();
      double uv = s.sph_vals[b];
      Vec gs = s.sph_grads.row(b).transpose();
      Vec g_tan = gs - nu.dot(gs) * nu;
      w.ball_vals[idx] = rho * rho * uv;
      w.ball_grads.row(idx) = (rho * (2.0 * uv * nu + g_tan)).transpose();
    }
  }
  for (int b = 0; b < ns; ++b) {
    Vec nu = s.ball.sphere.nodes.row(b).transpose();
    double uv = s.sph_vals[b];
    Vec gs = s.sph_grads.row(b).transpose();
    Vec g_tan = gs - nu.dot(gs) * nu;
    w.sph_grads.row(b) = (2.0 * uv * nu + g_tan).transpose();
  }
  (void)dim;
  return w;
}

}  // namespace oblab
