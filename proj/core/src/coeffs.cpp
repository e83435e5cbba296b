#include "oblab/coeffs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <Eigen/Dense>

namespace oblab {

namespace {

double holder_shape(double t, double alpha, double amplitude) {
  return t <= 0 ? 0.0 : amplitude * std::pow(t, alpha);
}

double power_log_shape(double t, double p, double cap) {
  if (t <= 0) return 0.0;
  if (t >= 1) return cap;
  double L = -std::log(t);
  return std::min(cap, std::pow(L, -p));
}

double tabulated_shape(const std::vector<double>& ts, const std::vector<double>& vals, double t) {
  if (t <= 0) return 0.0;
  if (t <= ts.front()) return vals.front() * (t / ts.front());
  if (t >= ts.back()) return vals.back();
  auto it = std::upper_bound(ts.begin(), ts.end(), t);
  std::size_t k = static_cast<std::size_t>(it - ts.begin());
  double w = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
  return vals[k - 1] + w * (vals[k] - vals[k - 1]);
}

}  // namespace

double Modulus::operator()(double t) const {
  if (t <= 0) return 0.0;
  double s = arg_scale * t;
  double base = 0.0;
  switch (kind) {
    case Kind::zero: return 0.0;
    case Kind::holder: base = holder_shape(s, alpha, amplitude); break;
    case Kind::power_log: base = power_log_shape(s, p, cap); break;
    case Kind::tabulated: base = tabulated_shape(ts, vals, s); break;
  }
  return val_scale * base;
}

Modulus Modulus::zero() { return Modulus{}; }

Modulus Modulus::holder(double alpha, double amplitude) {
  if (!(alpha > 0 && alpha <= 1)) throw ValidationError("modulus: holder exponent must be in (0,1]");
  if (amplitude < 0) throw ValidationError("modulus: amplitude must be nonnegative");
  Modulus m;
  m.kind = Kind::holder;
  m.alpha = alpha;
  m.amplitude = amplitude;
  return m;
}

Modulus Modulus::power_log(double p, double cap) {
  if (!(p > 0)) throw ValidationError("modulus: power_log exponent must be positive");
  if (!(cap > 0)) throw ValidationError("modulus: power_log cap must be positive");
  Modulus m;
  m.kind = Kind::power_log;
  m.p = p;
  m.cap = cap;
  return m;
}

Modulus Modulus::tabulated(std::vector<double> ts, std::vector<double> vals) {
  if (ts.size() != vals.size() || ts.size() < 2)
    throw ValidationError("modulus: tabulated data needs at least two matching knots");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!(ts[i] > 0)) throw ValidationError("modulus: tabulated knots must be positive");
    if (vals[i] < 0) throw ValidationError("modulus: tabulated values must be nonnegative");
    if (i > 0 && !(ts[i] > ts[i - 1]))
      throw ValidationError("modulus: tabulated knots must be strictly increasing");
    if (i > 0 && vals[i] < vals[i - 1] - 1e-15)
      throw ValidationError("modulus: tabulated values must be nondecreasing");
  }
  Modulus m;
  m.kind = Kind::tabulated;
  m.ts = std::move(ts);
  m.vals = std::move(vals);
  return m;
}

Modulus load_modulus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("modulus: cannot open " + path);
  std::vector<double> ts, vals;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double t, v;
    if (!(ls >> t)) continue;  // blank or comment line
    if (!(ls >> v))
      throw ValidationError("modulus: " + path + ":" + std::to_string(lineno) +
                            ": expected two columns");
    ts.push_back(t);
    vals.push_back(v);
  }
  return Modulus::tabulated(std::move(ts), std::move(vals));
}

void save_modulus(const Modulus& m, const std::string& path) {
  if (m.kind != Modulus::Kind::tabulated)
    throw ValidationError("modulus: only tabulated moduli have a two-column form");
  std::ofstream out(path);
  if (!out) throw ValidationError("modulus: cannot write " + path);
  for (std::size_t i = 0; i < m.ts.size(); ++i)
    out << fmt_double(m.ts[i] / m.arg_scale) << " " << fmt_double(m.val_scale * m.vals[i]) << "\n";
}

namespace {

// Adaptive Simpson with absolute tolerance, depth-capped.
double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6 * (fa + 4 * flm + fm);
  double right = (b - m) / 6 * (fm + 4 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15 * tol) return left + right + delta / 15;
  return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  if (!(b > a)) return 0.0;
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6 * (fa + 4 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 28);
}

}  // namespace

DiniResult dini_integral(const Modulus& omega, double T, double a) {
  if (!(T > 0)) throw ValidationError("dini_integral: T must be positive");
  if (a < 0) throw ValidationError("dini_integral: log power must be nonnegative");
  if (omega.is_zero()) return {0.0, false};

  auto weight = [a](double t) {
    if (a == 0) return 1.0;
    double l = std::abs(std::log(t));
    return a == 1 ? l : std::pow(l, a);
  };
  auto integrand = [&](double t) { return omega(t) * weight(t) / t; };

  // Smooth outer part, integrated directly in t.
  const double t_split = std::min(T, 0.1);
  double outer = 0.0;
  if (T > t_split) outer = adaptive_simpson(integrand, t_split, T, 1e-12 * omega(T));

  // Singular part in s = log(1/t): fixed blocks marching toward t = 0.
  // g(s) = omega(e^-s) s^a is the block integrand.
  auto g = [&](double s) {
    double w = omega(std::exp(-s));
    if (a == 0) return w;
    return a == 1 ? w * s : w * std::pow(s, a);
  };
  const double ds = 2.0;
  const double s_end = 690.0;  // t ~ 1e-300, the useful range of double
  double s = std::log(1.0 / t_split);
  double inner = 0.0;
  std::vector<double> block_s, block_m;  // midpoints and block means
  int tiny_streak = 0;
  while (s < s_end) {
    double s1 = std::min(s + ds, s_end);
    double blk = adaptive_simpson(g, s, s1, 1e-16 * (1.0 + inner + outer));
    inner += blk;
    block_s.push_back(0.5 * (s + s1));
    block_m.push_back(blk / (s1 - s));
    s = s1;
    double scale = 1.0 + std::abs(outer) + std::abs(inner);
    tiny_streak = blk <= 1e-16 * scale ? tiny_streak + 1 : 0;
    if (tiny_streak >= 3) return {outer + inner, false};  // tail already negligible
  }

  // The ladder ran out of range with live blocks: decide between a divergent
  // sum and a convergent power tail by fitting the decay of the block means
  // g_k ~ c s_k^-p over the last stretch. (Means, not integrals: the final
  // block is clipped at s_end and its smaller integral would fake decay.)
  const int fit = 12;
  int nb = static_cast<int>(block_m.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int used = 0;
  for (int k = nb - fit; k < nb; ++k) {
    if (block_m[k] <= 0) continue;
    double lx = std::log(block_s[k]), ly = std::log(block_m[k]);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    ++used;
  }
  if (used < 3) return {outer + inner, false};
  double denom = used * sxx - sx * sx;
  double p_hat = denom > 0 ? -(used * sxy - sx * sy) / denom : 0.0;
  if (p_hat <= 1.25) return {outer + inner, true};
  // Tail of c s^-p beyond s_end, with c read off the last block mean.
  double c = block_m.back() * std::pow(block_s.back(), p_hat);
  double tail = c * std::pow(s_end, 1.0 - p_hat) / (p_hat - 1.0);
  return {outer + inner + tail, false};
}

Mat eval_matrix(const CoefficientField& field, const Vec& x) {
  if (x.size() != field.dim) throw ValidationError("eval_matrix: wrong point dimension");
  if (!field.domain.contains(x, 1e-12))
    throw DomainError("eval_matrix: point outside the coefficient domain");
  return field.matrix_fn(x);
}

double eval_scalar(const CoefficientField& field, const Vec& x) {
  if (x.size() != field.dim) throw ValidationError("eval_scalar: wrong point dimension");
  if (!field.domain.contains(x, 1e-12))
    throw DomainError("eval_scalar: point outside the coefficient domain");
  return field.scalar_fn(x);
}

FamilyKind family_kind_from_name(const std::string& name) {
  if (name == "identity") return FamilyKind::identity;
  if (name == "holder") return FamilyKind::holder;
  if (name == "power_log") return FamilyKind::power_log;
  if (name == "rotating") return FamilyKind::rotating;
  throw ValidationError("unknown coefficient family '" + name + "'");
}

CoefficientField make_family(FamilyKind kind, const FamilyParams& params, const Box& domain) {
  int dim = domain.dim();
  if (dim != 2 && dim != 3) throw ValidationError("coefficient family: dim must be 2 or 3");
  Vec center = params.center.size() == dim ? params.center
                                           : Vec(0.5 * (domain.lo + domain.hi));
  if (!domain.contains(center))
    throw ValidationError("coefficient family: center lies outside the domain");

  double diam = (domain.hi - domain.lo).norm();
  CoefficientField f;
  f.dim = dim;
  f.domain = domain;
  Mat id = Mat::Identity(dim, dim);

  switch (kind) {
    case FamilyKind::identity: {
      f.matrix_fn = [id](const Vec&) { return id; };
      f.scalar_fn = [](const Vec&) { return 1.0; };
      f.name = "identity";
      break;
    }
    case FamilyKind::holder: {
      double alpha = params.alpha, amp = params.amplitude;
      if (!(alpha > 0 && alpha <= 1)) throw ValidationError("holder family: alpha in (0,1]");
      if (!(amp >= 0)) throw ValidationError("holder family: amplitude must be >= 0");
      f.matrix_fn = [id, center, alpha, amp](const Vec& x) -> Mat {
        return (1.0 + amp * std::pow((x - center).norm(), alpha)) * id;
      };
      f.scalar_fn = [](const Vec&) { return 1.0; };
      f.lambda = 1.0 + amp * std::pow(diam, alpha);
      f.omega_A = Modulus::holder(alpha, amp);
      f.name = "holder";
      break;
    }
    case FamilyKind::power_log: {
      // Scalar roughness with a log-power modulus. The radial profile
      // m(s) = min(cap, |log s|^-p) is convex in a middle range, so its
      // worst oscillation over a gap t is max(m(t), cap - m(s_cap - t)),
      // not m(t) alone. The amplitude is capped so the undamped modulus
      // still dominates that oscillation.
      double p = params.p;
      if (!(p > 1)) throw ValidationError("power_log family: p must exceed 1");
      const double cap = 0.5;
      double s_cap = std::exp(-std::pow(2.0, 1.0 / p));  // where |log s|^-p hits the cap
      double worst_ratio = 1.0;
      for (int k = 0; k <= 200; ++k) {
        double t = s_cap * std::pow(10.0, -4.0 * (1.0 - k / 200.0));
        double g = (cap - power_log_shape(s_cap - t, p, cap)) / power_log_shape(t, p, cap);
        worst_ratio = std::max(worst_ratio, g);
      }
      double amp = std::min(params.amplitude, 0.9 / worst_ratio);
      f.matrix_fn = [id](const Vec&) { return id; };
      f.scalar_fn = [center, p, amp](const Vec& x) {
        return 1.0 + amp * power_log_shape((x - center).norm(), p, 0.5);
      };
      f.f_min = 1.0;
      f.f_max = 1.0 + amp * 0.5;
      // Tightest declared bound from the oscillation analysis above:
      // osc(t) <= amp * worst_ratio * m(t), and the class is unchanged by
      // the constant factor.
      f.omega_f = Modulus::power_log(p, 0.5);
      f.omega_f.val_scale = amp * worst_ratio;
      f.name = "power_log";
      break;
    }
    case FamilyKind::rotating: {
      // Eigenframe rotates by amp * sqrt(distance); eigenvalues stay (2, 1/2),
      // so the anisotropy is fixed and only the orientation oscillates.
      double amp = params.amplitude;
      if (!(amp >= 0)) throw ValidationError("rotating family: amplitude must be >= 0");
      if (dim != 2) throw ValidationError("rotating family: 2D only");
      const double kappa = 2.0;
      f.matrix_fn = [center, amp, kappa](const Vec& x) -> Mat {
        double th = amp * std::sqrt((x - center).norm());
        double c = std::cos(th), s = std::sin(th);
        Mat R(2, 2);
        R << c, -s, s, c;
        Mat D = Mat::Zero(2, 2);
        D(0, 0) = kappa;
        D(1, 1) = 1.0 / kappa;
        return R * D * R.transpose();
      };
      f.scalar_fn = [](const Vec&) { return 1.0; };
      f.lambda = kappa;
      f.omega_A = Modulus::holder(0.5, (kappa - 1.0 / kappa) * amp);
      f.name = "rotating";
      break;
    }
  }
  return f;
}

Modulus transformed_matrix_modulus(const CoefficientField& field) {
  Modulus m = field.omega_A;
  double nl = field.dim * field.lambda;
  m.arg_scale *= std::sqrt(nl / field.f_min);
  m.val_scale *= nl * nl;
  return m;
}

Modulus transformed_scalar_modulus(const CoefficientField& field) {
  Modulus m = field.omega_f;
  double nl = field.dim * field.lambda;
  m.arg_scale *= std::sqrt(nl / field.f_min);
  m.val_scale *= 1.0 / field.f_min;
  return m;
}

EstimatedModuli modulus_estimate(const CoefficientField& field, const std::vector<double>& ts,
                                 int budget, std::uint64_t seed) {
  if (ts.empty()) throw ValidationError("modulus_estimate: no scales requested");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!(ts[i] > 0)) throw ValidationError("modulus_estimate: scales must be positive");
    if (i > 0 && !(ts[i] > ts[i - 1]))
      throw ValidationError("modulus_estimate: scales must be strictly increasing");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int dim = field.dim;
  const Box& box = field.domain;

  auto draw_point = [&]() {
    Vec x(dim);
    for (int d = 0; d < dim; ++d) x[d] = box.lo[d] + unit(rng) * (box.hi[d] - box.lo[d]);
    return x;
  };

  double t_max = ts.back();
  std::vector<double> dist;
  std::vector<double> osc_A, osc_f;
  dist.reserve(budget);
  long attempts = 0;
  const long attempt_cap = 50L * budget + 1000;
  for (int b = 0; b < budget && attempts < attempt_cap; ++b) {
    ++attempts;
    Vec x = draw_point();
    double s = t_max * unit(rng);
    double ang = 2 * M_PI * unit(rng);
    Vec dir(dim);
    if (dim == 2) {
      dir << std::cos(ang), std::sin(ang);
    } else {
      double z = 2 * unit(rng) - 1, r = std::sqrt(std::max(0.0, 1 - z * z));
      dir << r * std::cos(ang), r * std::sin(ang), z;
    }
    Vec y = x + s * dir;
    if (!box.contains(y)) {
      --b;  // resample; keeps the pair distance honest instead of clipping it
      continue;
    }
    double d = (y - x).norm();
    Mat dA = field.matrix_fn(x) - field.matrix_fn(y);
    Eigen::SelfAdjointEigenSolver<Mat> es(dA, Eigen::EigenvaluesOnly);
    dist.push_back(d);
    osc_A.push_back(es.eigenvalues().cwiseAbs().maxCoeff());
    osc_f.push_back(std::abs(field.scalar_fn(x) - field.scalar_fn(y)));
  }

  std::vector<double> est_A(ts.size(), 0.0), est_f(ts.size(), 0.0);
  for (std::size_t i = 0; i < dist.size(); ++i) {
    auto it = std::lower_bound(ts.begin(), ts.end(), dist[i]);
    if (it == ts.end()) continue;
    std::size_t k = static_cast<std::size_t>(it - ts.begin());
    est_A[k] = std::max(est_A[k], osc_A[i]);
    est_f[k] = std::max(est_f[k], osc_f[i]);
  }
  // The sup over pairs at distance <= t is cumulative in t.
  for (std::size_t k = 1; k < ts.size(); ++k) {
    est_A[k] = std::max(est_A[k], est_A[k - 1]);
    est_f[k] = std::max(est_f[k], est_f[k - 1]);
  }
  return {Modulus::tabulated(std::vector<double>(ts), std::move(est_A)),
          Modulus::tabulated(std::vector<double>(ts), std::move(est_f))};
}

}  // namespace oblab
