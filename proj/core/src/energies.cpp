#include "oblab/energies.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

namespace oblab {

WeissValue weiss_energy(const BlowUpSample& s) {
  WeissValue w;
  int idx = 0;
  for (int a = 0; a < s.ball.rho.size(); ++a)
    for (int b = 0; b < s.ball.sphere.count(); ++b, ++idx)
      w.bulk += s.ball.weight(a, b) *
                (s.ball_grads.row(idx).squaredNorm() + 2.0 * s.ball_vals[idx]);
  for (int b = 0; b < s.ball.sphere.count(); ++b)
    w.boundary += s.ball.sphere.weights[b] * s.sph_vals[b] * s.sph_vals[b];
  w.phi = w.bulk - 2.0 * w.boundary;
  return w;
}

double theta_constant(int dim) {
  if (dim != 2 && dim != 3) throw ValidationError("theta_constant: dim must be 2 or 3");
  double volume = dim == 2 ? M_PI : 4.0 * M_PI / 3.0;
  double closed = volume / (2.0 * (dim + 2));

  // Cross-check against ball quadrature of two independent quadratic
  // profiles with trace 1/2; a mismatch means the quadrature is broken.
  static double checked[4] = {0, 0, 0, 0};
  if (checked[dim] == 0.0) {
    BallQuad q = ball_quadrature(dim, 64, dim == 2 ? 512 : 128);
    double i1 = 0.0, i2 = 0.0;
    for (int a = 0; a < q.rho.size(); ++a)
      for (int b = 0; b < q.sphere.count(); ++b) {
        Vec x = q.node(a, b);
        double w = q.weight(a, b);
        i1 += w * 0.5 * x[0] * x[0];
        i2 += w * x.squaredNorm() / (2.0 * dim);
      }
    if (std::abs(i1 - closed) > 1e-9 || std::abs(i2 - closed) > 1e-9) {
      std::ostringstream os;
      os << "theta_constant: quadrature cross-check failed (closed form " << closed
         << ", profiles " << i1 << ", " << i2 << ")";
      throw std::runtime_error(os.str());
    }
    checked[dim] = closed;
  }
  return closed;
}

RadiiSchedule radii_schedule(const RadiiSpec& spec, double h, double boundary_dist,
                             const NormalizationMap* map) {
  if (!(spec.q > 0 && spec.q < 1)) throw ValidationError("radii_schedule: ratio q must be in (0,1)");
  RadiiSchedule out;
  double op_norm = map ? map->op_norm : 1.0;
  double sigma_min = map ? map->sigma_min : 1.0;
  out.r_max = spec.rmax_factor * boundary_dist / op_norm;
  out.r_min = spec.rmin_factor * h / sigma_min;
  double r = out.r_max;
  while (r >= out.r_min * (1.0 - 1e-12) && static_cast<int>(out.radii.size()) < spec.max_count) {
    out.radii.push_back(r);
    out.trusted.push_back(1);
    r *= spec.q;
  }
  return out;
}

namespace {

struct CorrectionIntegrals {
  std::vector<double> values;
  bool divergent = false;
};

// c_corr * integral_0^r (omega_A + omega_f)(t)/t dt per radius (log weight a).
CorrectionIntegrals corrections(const CoefficientField& field, const std::vector<double>& radii,
                                double c_corr, bool double_dini) {
  CorrectionIntegrals out;
  out.values.assign(radii.size(), 0.0);
  Modulus wa = transformed_matrix_modulus(field);
  Modulus wf = transformed_scalar_modulus(field);
  if (c_corr == 0.0 || (wa.is_zero() && wf.is_zero())) return out;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    double total = 0.0;
    for (const Modulus* m : {&wa, &wf}) {
      if (m->is_zero()) continue;
      DiniResult d = double_dini ? double_dini_log(*m, radii[k]) : dini_integral(*m, radii[k], 0);
      out.divergent = out.divergent || d.divergent;
      total += d.value;
    }
    out.values[k] = c_corr * total;
  }
  return out;
}

}  // namespace

EnergyTrace weiss_trace(const GridSolution& sol, const Vec& x0, const RadiiSchedule& radii,
                        const QuadSpec& quad, const NormalizationMap* map, double c_corr) {
  EnergyTrace t;
  t.c_corr = c_corr;
  t.radii = radii.radii;
  t.trusted = radii.trusted;
  for (double r : t.radii) {
    BlowUpSample s = rescale(sol, x0, r, quad, map);
    WeissValue w = weiss_energy(s);
    t.phi.push_back(w.phi);
    t.bulk.push_back(w.bulk);
    t.boundary.push_back(w.boundary);
  }
  CorrectionIntegrals corr = corrections(*sol.field, t.radii, c_corr, false);
  t.correction = std::move(corr.values);
  t.correction_divergent = corr.divergent;
  return t;
}

double weiss_derivative_residual(const AnalyticField& u, int dim, const Vec& x0, double r,
                                 double dr, const QuadSpec& quad) {
  if (!(r > 0) || !(dr > 0) || dr >= r)
    throw ValidationError("weiss_derivative_residual: need 0 < dr < r");

  auto phi_at = [&](double s) { return weiss_energy(rescale(u, dim, x0, s, quad)).phi; };
  double lhs = (phi_at(r + dr) - phi_at(r - dr)) / (2.0 * dr);

  BlowUpSample s = rescale(u, dim, x0, r, quad);
  double phi_ur = weiss_energy(s).phi;

  // Phi of the two-homogeneous extension, by ball quadrature and by the
  // sphere-only reduction; they must agree to quadrature accuracy.
  double phi_w_ball = weiss_energy(two_hom_extension(s)).phi;
  double phi_w_sph = 0.0;
  for (int b = 0; b < s.ball.sphere.count(); ++b) {
    Vec nu = s.ball.sphere.nodes.row(b).transpose();
    Vec g = s.sph_grads.row(b).transpose();
    Vec g_tan = g - nu.dot(g) * nu;
    double uv = s.sph_vals[b];
    phi_w_sph += s.ball.sphere.weights[b] *
                 (g_tan.squaredNorm() - 2.0 * dim * uv * uv + 2.0 * uv);
  }
  phi_w_sph /= dim + 2;
  if (std::abs(phi_w_ball - phi_w_sph) > 1e-8 * (1.0 + std::abs(phi_w_sph)))
    throw std::runtime_error("weiss_derivative_residual: extension energy routes disagree");

  double flux = 0.0;
  for (int b = 0; b < s.ball.sphere.count(); ++b) {
    Vec nu = s.ball.sphere.nodes.row(b).transpose();
    double dn = s.sph_grads.row(b).dot(nu);
    double dev = dn - 2.0 * s.sph_vals[b];
    flux += s.ball.sphere.weights[b] * dev * dev;
  }

  double rhs = (dim + 2) / r * (phi_w_sph - phi_ur) + flux / r;
  return std::abs(lhs - rhs);
}

FreezingGap freezing_gap(const BlowUpSample& s, const CoefficientField& field,
                         const NormalizationMap& map) {
  FreezingGap g;
  double dir_frozen = 0.0, dir_var = 0.0, u_int = 0.0, forcing = 0.0;
  int idx = 0;
  for (int a = 0; a < s.ball.rho.size(); ++a)
    for (int b = 0; b < s.ball.sphere.count(); ++b, ++idx) {
      double w = s.ball.weight(a, b);
      Vec y = s.r * s.ball.node(a, b);
      Vec grad = s.ball_grads.row(idx).transpose();
      Mat C = normalized_matrix(map, field, y);
      double fn = normalized_scalar(map, field, y);
      dir_frozen += w * grad.squaredNorm();
      dir_var += w * grad.dot(C * grad);
      u_int += w * s.ball_vals[idx];
      forcing += w * (1.0 - fn) * s.ball_vals[idx];
    }
  Modulus wa = transformed_matrix_modulus(field);
  Modulus wf = transformed_scalar_modulus(field);
  g.dirichlet_gap = std::abs(dir_frozen - dir_var);
  g.dirichlet_bound = wa(s.r) * dir_frozen;
  g.forcing_gap = std::abs(forcing);
  g.forcing_bound = wf(s.r) * u_int;
  return g;
}

DiniResult double_dini_log(const Modulus& omega, double r) {
  if (!(r > 0 && r <= 1)) throw ValidationError("double_dini_log: radius must lie in (0,1]");
  DiniResult d1 = dini_integral(omega, r, 1);
  DiniResult d0 = dini_integral(omega, r, 0);
  DiniResult out;
  out.divergent = d1.divergent || d0.divergent;
  out.value = std::max(0.0, d1.value - std::abs(std::log(r)) * d0.value);
  return out;
}

MonneauTrace monneau_trace(const GridSolution& sol, const Vec& x0, const Mat& Q,
                           const RadiiSchedule& radii, const QuadSpec& quad,
                           const NormalizationMap* map, double c_corr) {
  const int dim = static_cast<int>(x0.size());
  if (Q.rows() != dim || Q.cols() != dim)
    throw ValidationError("monneau_trace: profile matrix has the wrong size");
  double scale = std::max(Q.cwiseAbs().maxCoeff(), 1e-300);
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ValidationError("monneau_trace: profile matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(Q);
  if (es.eigenvalues().minCoeff() < -1e-12)
    throw ValidationError("monneau_trace: profile matrix must be positive semidefinite");
  if (std::abs(Q.trace() - 0.5) > 1e-9)
    throw ValidationError("monneau_trace: profile matrix must have trace 1/2");

  MonneauTrace t;
  t.c_corr = c_corr;
  t.radii = radii.radii;
  t.trusted = radii.trusted;
  for (double r : t.radii) {
    BlowUpSample s = rescale(sol, x0, r, quad, map);
    double dev = 0.0;
    for (int b = 0; b < s.ball.sphere.count(); ++b) {
      Vec nu = s.ball.sphere.nodes.row(b).transpose();
      double diff = s.sph_vals[b] - nu.dot(Q * nu);
      dev += s.ball.sphere.weights[b] * diff * diff;
    }
    t.deviation.push_back(dev);
  }
  CorrectionIntegrals corr = corrections(*sol.field, t.radii, c_corr, true);
  t.correction = std::move(corr.values);
  t.correction_divergent = corr.divergent;
  for (std::size_t k = 0; k < t.radii.size(); ++k)
    t.monitor.push_back(t.deviation[k] + t.correction[k]);
  return t;
}

}  // namespace oblab
