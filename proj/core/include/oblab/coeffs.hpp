#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "oblab/util.hpp"

namespace oblab {

/// Modulus of continuity: nonnegative, nondecreasing, omega(0+) = 0.
/// Evaluation composes the base shape with an argument/value rescaling
/// (omega_bar(t) = val_scale * omega(arg_scale * t)), which is how the
/// moduli transform under the pointwise coefficient normalization.
struct Modulus {
  enum class Kind { zero, holder, power_log, tabulated };

  Kind kind = Kind::zero;
  double amplitude = 1.0;  // holder: amplitude * t^alpha
  double alpha = 1.0;
  double p = 2.0;          // power_log: min(cap, |log t|^-p), constant past the cap point
  double cap = 0.5;
  std::vector<double> ts;    // tabulated knots, strictly increasing, positive
  std::vector<double> vals;  // tabulated values, nonnegative, nondecreasing
  double arg_scale = 1.0;
  double val_scale = 1.0;

  double operator()(double t) const;
  bool is_zero() const { return kind == Kind::zero || val_scale == 0.0; }

  static Modulus zero();
  static Modulus holder(double alpha, double amplitude);
  static Modulus power_log(double p, double cap = 0.5);
  static Modulus tabulated(std::vector<double> ts, std::vector<double> vals);
};

/// Reads/writes the two-column "t value" text format for tabulated moduli.
Modulus load_modulus(const std::string& path);
void save_modulus(const Modulus& m, const std::string& path);

/// Result of a weighted Dini integral. `divergent` is set when the tail
/// refinement ladder keeps contributing (fitted block decay too slow for a
/// convergent sum); `value` then holds the truncated partial integral.
struct DiniResult {
  double value = 0.0;
  bool divergent = false;
};

/// Computes integral_0^T omega(t) |log t|^a / t dt.
///
/// The integrable singularity at t = 0 is handled in log coordinates with a
/// geometric block ladder; the remaining tail is extrapolated from the fitted
/// power decay of the last blocks, and flagged divergent when that power
/// cannot give a convergent sum.
DiniResult dini_integral(const Modulus& omega, double T, double a = 0.0);

/// Variable coefficient pair (A, f) on a box domain, with declared
/// ellipticity and oscillation bounds. matrix_fn must return a symmetric
/// matrix with spectrum in [1/lambda, lambda]; scalar_fn values lie in
/// [f_min, f_max] with f_min > 0.
struct CoefficientField {
  int dim = 2;
  Box domain;
  std::function<Mat(const Vec&)> matrix_fn;
  std::function<double(const Vec&)> scalar_fn;
  double lambda = 1.0;
  double f_min = 1.0;
  double f_max = 1.0;
  Modulus omega_A;
  Modulus omega_f;
  std::string name;
};

/// Domain-checked evaluation of A(x) (resp. f(x)). Throws DomainError for x
/// outside the field's box.
Mat eval_matrix(const CoefficientField& field, const Vec& x);
double eval_scalar(const CoefficientField& field, const Vec& x);

/// Built-in coefficient families for benchmarks and roughness studies.
/// All are centered at a configurable point so the oscillation can be
/// steered onto the region of interest.
enum class FamilyKind { identity, holder, power_log, rotating };

struct FamilyParams {
  double alpha = 0.5;      // holder exponent
  double amplitude = 0.25; // holder/rotating strength, power_log profile scale
  double p = 3.0;          // power_log decay
  Vec center;              // defaults to the box center when empty
};

CoefficientField make_family(FamilyKind kind, const FamilyParams& params, const Box& domain);
FamilyKind family_kind_from_name(const std::string& name);

/// Moduli of the normalized coefficients seen through the pointwise map
/// L(x0) = f(x0)^{-1/2} A(x0)^{1/2}: the argument dilates by
/// sqrt(n*lambda/f_min) and the values pick up (n*lambda)^2 (matrix) and
/// 1/f_min (scalar).
Modulus transformed_matrix_modulus(const CoefficientField& field);
Modulus transformed_scalar_modulus(const CoefficientField& field);

/// Empirical moduli from sampled coefficient oscillation: for each requested
/// t, the max oscillation over `budget` random pairs at distance <= t
/// (cumulative in t). Deterministic for a fixed seed.
struct EstimatedModuli {
  Modulus for_A;
  Modulus for_f;
};
EstimatedModuli modulus_estimate(const CoefficientField& field, const std::vector<double>& ts,
                                 int budget = 1000, std::uint64_t seed = 0x5eed);

}  // namespace oblab
