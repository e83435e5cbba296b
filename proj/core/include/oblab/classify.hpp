#pragma once

#include "oblab/energies.hpp"

namespace oblab {

/// Best half-space profile (<x,e>^+)^2 / 2 on the sphere trace: coarse
/// angular scan (720 directions in 2D) refined by golden section. residual
/// is the weighted RMS misfit over sphere nodes.
struct HalfspaceFit {
  Vec e;
  double residual = 0.0;
};

HalfspaceFit fit_halfspace(const BlowUpSample& s);

/// Best quadratic profile <Q x, x> on the sphere trace, least squares in the
/// entries of Q, then projected onto the admissible cone: negative
/// eigenvalues clipped, trace rescaled to 1/2. k counts eigenvalues below
/// eigen_rel_threshold * (1/2), the dimension of the fitted degeneracy.
struct PolynomialFit {
  Mat Q;
  double residual = 0.0;
  int k = 0;
};

PolynomialFit fit_polynomial_blowup(const BlowUpSample& s, double eigen_rel_threshold = 1e-2);

enum class Verdict { regular, singular, undetermined };

std::string verdict_name(Verdict v);

struct Classification {
  Vec x0;
  Verdict verdict = Verdict::undetermined;
  int k = -1;                 // kernel dimension for singular points
  double phi0 = 0.0;          // extrapolated Weiss density at r -> 0
  double uncertainty = 0.0;   // fit residual + correction at the smallest trusted radius
  double fit_residual = 0.0;  // profile misfit at the smallest trusted radius
  HalfspaceFit halfspace;     // filled for regular verdicts
  PolynomialFit poly;         // filled for singular verdicts
  std::string reason;         // filled for undetermined verdicts
  double theta_ref = 0.0;
  EnergyTrace trace;
};

struct ClassifyOptions {
  RadiiSpec radii;
  QuadSpec quad;
  double c_corr = 0.0;
  double eigen_rel_threshold = 1e-2;
  bool use_map = true;  // normalize through L(x0); off only for diagnostics
};

/// Classifies one free-boundary point by the limiting Weiss density:
/// phi0 near theta/2 is a regular point, near theta a singular one. phi0 is
/// extrapolated from the trusted trace radii by a power-law fit
/// phi0 + c r^beta; the verdict is withheld (undetermined) when fewer than 4
/// trusted radii exist or the uncertainty interval straddles the decision
/// midpoint 3 theta / 4.
Classification classify_point(const GridSolution& sol, const Vec& x0, const ClassifyOptions& opts);

/// Detachment and growth bounds over sampled points and radii (plain
/// rescaling, no map): theta_hat = min over (x0, r) of sup_dB1 u_{x0,r},
/// gamma_hat = max over (x0, r) of sup_B2 |u_{x0,r}|.
struct Nondegeneracy {
  double theta_hat = 0.0;
  double gamma_hat = 0.0;
};

Nondegeneracy nondegeneracy_check(const GridSolution& sol, const std::vector<Vec>& points,
                                  const std::vector<double>& radii, const QuadSpec& quad);

/// Bookkeeping over a classified free boundary: verdict counts, singular
/// stratum sizes by k, and connectivity coherence (components of the
/// interface edge graph whose points mix regular and singular verdicts).
struct Stratification {
  int n_regular = 0;
  int n_singular = 0;
  int n_undetermined = 0;
  std::vector<int> singular_by_k;  // index k = 0 .. dim-1
  int components = 0;
  int mixed_components = 0;
};

Stratification stratify(const FreeBoundary& fb, const std::vector<Classification>& cls,
                        const Grid& grid);

}  // namespace oblab
