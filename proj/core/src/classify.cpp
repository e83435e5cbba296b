#include "oblab/classify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/Dense>

namespace oblab {

namespace {

constexpr double kGolden = 0.6180339887498949;

// Golden-section minimum of fn on [a, b].
double golden_min(const std::function<double(double)>& fn, double a, double b, int iters) {
  double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
  double f1 = fn(x1), f2 = fn(x2);
  for (int it = 0; it < iters; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = fn(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = fn(x2);
    }
  }
  return f1 < f2 ? x1 : x2;
}

}  // namespace

HalfspaceFit fit_halfspace(const BlowUpSample& s) {
  if (s.dim() != 2) throw ValidationError("fit_halfspace: 2D samples only");
  const SphereQuad& sq = s.ball.sphere;
  double wsum = sq.weights.sum();

  auto misfit2 = [&](double phi) {
    double c = std::cos(phi), sn = std::sin(phi);
    double acc = 0.0;
    for (int b = 0; b < sq.count(); ++b) {
      double dot = c * sq.nodes(b, 0) + sn * sq.nodes(b, 1);
      double he = dot > 0 ? 0.5 * dot * dot : 0.0;
      double d = s.sph_vals[b] - he;
      acc += sq.weights[b] * d * d;
    }
    return acc / wsum;
  };

  const int n_scan = 720;
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_scan; ++k) {
    double v = misfit2(2.0 * M_PI * k / n_scan);
    if (v < best_val) {
      best_val = v;
      best = k;
    }
  }
  double step = 2.0 * M_PI / n_scan;
  double center = step * best;
  double phi = golden_min(misfit2, center - step, center + step, 40);

  HalfspaceFit fit;
  fit.e = Vec(2);
  fit.e << std::cos(phi), std::sin(phi);
  fit.residual = std::sqrt(misfit2(phi));
  return fit;
}

PolynomialFit fit_polynomial_blowup(const BlowUpSample& s, double eigen_rel_threshold) {
  const int n = s.dim();
  const SphereQuad& sq = s.ball.sphere;
  // Weighted least squares for the distinct entries of Q against the sphere
  // trace; basis <Q nu, nu> is linear in those entries.
  const int m = n * (n + 1) / 2;
  Mat G = Mat::Zero(m, m);
  Vec rhs = Vec::Zero(m);
  Vec basis(m);
  for (int b = 0; b < sq.count(); ++b) {
    Vec nu = sq.nodes.row(b).transpose();
    int c = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j, ++c) basis[c] = (i == j ? 1.0 : 2.0) * nu[i] * nu[j];
    G.noalias() += sq.weights[b] * basis * basis.transpose();
    rhs.noalias() += sq.weights[b] * s.sph_vals[b] * basis;
  }
  Vec q = G.ldlt().solve(rhs);
  Mat Q = Mat::Zero(n, n);
  {
    int c = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j, ++c) Q(i, j) = Q(j, i) = q[c];
  }

  // Project onto the admissible profiles: eigenvalues >= 0, trace 1/2.
  Eigen::SelfAdjointEigenSolver<Mat> es(Q);
  Vec ev = es.eigenvalues().cwiseMax(0.0);
  double tr = ev.sum();
  if (!(tr > 1e-12))
    throw ValidationError("fit_polynomial_blowup: fitted profile has no positive part");
  ev *= 0.5 / tr;
  Q = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();

  PolynomialFit fit;
  fit.Q = Q;
  fit.k = 0;
  for (int i = 0; i < n; ++i)
    if (ev[i] < eigen_rel_threshold * 0.5) ++fit.k;
  double acc = 0.0, wsum = sq.weights.sum();
  for (int b = 0; b < sq.count(); ++b) {
    Vec nu = sq.nodes.row(b).transpose();
    double d = s.sph_vals[b] - nu.dot(Q * nu);
    acc += sq.weights[b] * d * d;
  }
  fit.residual = std::sqrt(acc / wsum);
  return fit;
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::regular: return "regular";
    case Verdict::singular: return "singular";
    case Verdict::undetermined: return "undetermined";
  }
  return "?";
}

namespace {

struct PowerFit {
  double phi0 = 0.0;
  double max_residual = 0.0;
};

// Least squares of phi ~ phi0 + c r^beta over the trace, with beta scanned
// on a grid and refined by golden section.
PowerFit fit_phi_limit(const std::vector<double>& radii, const std::vector<double>& phi) {
  const std::size_t n = radii.size();
  auto ssr_for = [&](double beta, double* phi0_out) {
    // Linear LS in (phi0, c) for fixed beta.
    double s1 = static_cast<double>(n), sx = 0, sxx = 0, sy = 0, sxy = 0;
    for (std::size_t k = 0; k < n; ++k) {
      double x = std::pow(radii[k], beta);
      sx += x;
      sxx += x * x;
      sy += phi[k];
      sxy += x * phi[k];
    }
    double det = s1 * sxx - sx * sx;
    double phi0 = (sxx * sy - sx * sxy) / det;
    double c = (s1 * sxy - sx * sy) / det;
    double ssr = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      double res = phi[k] - phi0 - c * std::pow(radii[k], beta);
      ssr += res * res;
    }
    if (phi0_out) *phi0_out = phi0;
    return ssr;
  };

  double best_beta = 0.2, best_ssr = std::numeric_limits<double>::infinity();
  for (double beta = 0.2; beta <= 2.0 + 1e-9; beta += 0.05) {
    double ssr = ssr_for(beta, nullptr);
    if (ssr < best_ssr) {
      best_ssr = ssr;
      best_beta = beta;
    }
  }
  double lo = std::max(0.2, best_beta - 0.05), hi = std::min(2.0, best_beta + 0.05);
  double beta = golden_min([&](double b) { return ssr_for(b, nullptr); }, lo, hi, 48);

  PowerFit out;
  double phi0 = 0.0;
  ssr_for(beta, &phi0);
  out.phi0 = phi0;
  // Max pointwise residual of the final fit, as the fit part of the
  // uncertainty.
  double s1 = static_cast<double>(n), sx = 0, sxx = 0, sy = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    double x = std::pow(radii[k], beta);
    sx += x;
    sxx += x * x;
    sy += phi[k];
    sxy += x * phi[k];
  }
  double det = s1 * sxx - sx * sx;
  double c = (s1 * sxy - sx * sy) / det;
  for (std::size_t k = 0; k < n; ++k)
    out.max_residual = std::max(
        out.max_residual, std::abs(phi[k] - phi0 - c * std::pow(radii[k], beta)));
  return out;
}

// One-time consistency check: the Weiss energy of an exactly sampled
// half-space profile must match theta/2.
void check_halfspace_reference(int dim, double theta) {
  static bool done[4] = {false, false, false, false};
  if (done[dim]) return;
  AnalyticField half;
  half.value = [](const Vec& x) {
    double t = std::max(x[0], 0.0);
    return 0.5 * t * t;
  };
  half.gradient = [](const Vec& x) {
    Vec g = Vec::Zero(x.size());
    g[0] = std::max(x[0], 0.0);
    return g;
  };
  Vec x0 = Vec::Zero(dim);
  QuadSpec quad;
  double phi = weiss_energy(rescale(half, dim, x0, 0.5, quad)).phi;
  if (std::abs(phi - 0.5 * theta) > 1e-6)
    throw std::runtime_error("classify: half-space reference energy check failed");
  done[dim] = true;
}

}  // namespace

Classification classify_point(const GridSolution& sol, const Vec& x0,
                              const ClassifyOptions& opts) {
  Classification out;
  out.x0 = x0;
  const int dim = 2;
  out.theta_ref = theta_constant(dim);
  check_halfspace_reference(dim, out.theta_ref);

  NormalizationMap map;
  const NormalizationMap* map_ptr = nullptr;
  if (opts.use_map) {
    map = normalization_map(*sol.field, x0);
    map_ptr = &map;
  }

  double dist = sol.grid.box.boundary_distance(x0);
  RadiiSchedule sched = radii_schedule(opts.radii, sol.grid.h, dist, map_ptr);
  if (sched.r_max < 4.0 * sched.r_min) {
    out.verdict = Verdict::undetermined;
    out.reason = "too close to the domain boundary (r_max < 4 r_min)";
    return out;
  }
  std::vector<double> r_tr;
  for (std::size_t k = 0; k < sched.radii.size(); ++k)
    if (sched.trusted[k]) r_tr.push_back(sched.radii[k]);
  if (r_tr.size() < 4) {
    out.verdict = Verdict::undetermined;
    out.reason = "fewer than 4 trusted radii";
    return out;
  }

  out.trace = weiss_trace(sol, x0, sched, opts.quad, map_ptr, opts.c_corr);

  std::vector<double> phi_tr;
  for (std::size_t k = 0; k < sched.radii.size(); ++k)
    if (sched.trusted[k]) phi_tr.push_back(out.trace.phi[k]);

  PowerFit fit = fit_phi_limit(r_tr, phi_tr);
  out.phi0 = fit.phi0;
  out.uncertainty = fit.max_residual + out.trace.correction.back();

  double theta = out.theta_ref;
  double midpoint = 0.75 * theta;
  if (std::abs(out.phi0 - midpoint) <= out.uncertainty) {
    out.verdict = Verdict::undetermined;
    out.reason = "uncertainty interval contains the decision midpoint";
    return out;
  }

  BlowUpSample finest = rescale(sol, x0, r_tr.back(), opts.quad, map_ptr);
  if (std::abs(out.phi0 - 0.5 * theta) < std::abs(out.phi0 - theta)) {
    out.verdict = Verdict::regular;
    out.halfspace = fit_halfspace(finest);
    out.fit_residual = out.halfspace.residual;
  } else {
    out.verdict = Verdict::singular;
    out.poly = fit_polynomial_blowup(finest, opts.eigen_rel_threshold);
    out.k = out.poly.k;
    out.fit_residual = out.poly.residual;
  }
  return out;
}

Nondegeneracy nondegeneracy_check(const GridSolution& sol, const std::vector<Vec>& points,
                                  const std::vector<double>& radii, const QuadSpec& quad) {
  if (points.empty() || radii.empty())
    throw ValidationError("nondegeneracy_check: need points and radii");
  Nondegeneracy nd;
  nd.theta_hat = std::numeric_limits<double>::infinity();
  for (const Vec& x0 : points) {
    for (double r : radii) {
      BlowUpSample s = rescale(sol, x0, r, quad, nullptr);
      nd.theta_hat = std::min(nd.theta_hat, s.sph_vals.maxCoeff());
      // sup over B2 of |u_{x0,r}| from the sample at radius 2r.
      BlowUpSample s2 = rescale(sol, x0, 2.0 * r, quad, nullptr);
      double m = std::max(s2.sph_vals.cwiseAbs().maxCoeff(), s2.ball_vals.cwiseAbs().maxCoeff());
      nd.gamma_hat = std::max(nd.gamma_hat, 4.0 * m);
    }
  }
  return nd;
}

Stratification stratify(const FreeBoundary& fb, const std::vector<Classification>& cls,
                        const Grid& grid) {
  if (fb.count() != cls.size())
    throw ValidationError("stratify: one classification per free-boundary point required");
  Stratification st;
  st.singular_by_k.assign(2, 0);
  for (const auto& c : cls) {
    switch (c.verdict) {
      case Verdict::regular: ++st.n_regular; break;
      case Verdict::singular:
        ++st.n_singular;
        if (c.k >= 0 && c.k < static_cast<int>(st.singular_by_k.size())) ++st.singular_by_k[c.k];
        break;
      case Verdict::undetermined: ++st.n_undetermined; break;
    }
  }

  // Union-find over points; two points are neighbors when their anchor nodes
  // are within one cell of each other.
  std::vector<int> parent(fb.count());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  auto unite = [&](int a, int b) { parent[find(a)] = find(b); };

  std::map<std::pair<int, int>, std::vector<int>> by_anchor;
  for (std::size_t p = 0; p < fb.count(); ++p) {
    auto [i, j] = grid.ij(fb.anchors[p]);
    by_anchor[{i, j}].push_back(static_cast<int>(p));
  }
  for (const auto& [ij, pts] : by_anchor) {
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj) {
        auto it = by_anchor.find({ij.first + di, ij.second + dj});
        if (it == by_anchor.end()) continue;
        for (int p : pts)
          for (int q : it->second) unite(p, q);
      }
  }

  std::map<int, std::array<int, 3>> comp_counts;  // regular, singular, undetermined
  for (std::size_t p = 0; p < fb.count(); ++p) {
    auto& cc = comp_counts[find(static_cast<int>(p))];
    switch (cls[p].verdict) {
      case Verdict::regular: ++cc[0]; break;
      case Verdict::singular: ++cc[1]; break;
      case Verdict::undetermined: ++cc[2]; break;
    }
  }
  st.components = static_cast<int>(comp_counts.size());
  for (const auto& [root, cc] : comp_counts)
    if (cc[0] > 0 && cc[1] > 0) ++st.mixed_components;
  return st;
}

}  // namespace oblab
