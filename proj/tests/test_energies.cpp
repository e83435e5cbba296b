#include <cmath>

#include <Eigen/Dense>

#include "doctest.h"
#include "oblab/energies.hpp"
#include "test_helpers.hpp"

using namespace oblab;
using namespace oblab::testing;

namespace {

const double kPi = std::acos(-1.0);

AnalyticField halfspace_profile() {
  AnalyticField f;
  f.value = [](const Vec& x) {
    double t = std::max(x[0], 0.0);
    return 0.5 * t * t;
  };
  f.gradient = [](const Vec& x) { return vec2(std::max(x[0], 0.0), 0.0); };
  return f;
}

AnalyticField quadratic_profile() {
  AnalyticField f;
  f.value = [](const Vec& x) { return 0.25 * x.squaredNorm(); };
  f.gradient = [](const Vec& x) { return Vec(0.5 * x); };
  return f;
}

AnalyticField quartic_radial() {
  AnalyticField f;
  f.value = [](const Vec& x) { return std::pow(x.squaredNorm(), 2.0); };
  f.gradient = [](const Vec& x) { return Vec(4.0 * x.squaredNorm() * x); };
  return f;
}

AnalyticField quartic_mixed() {
  AnalyticField f;
  f.value = [](const Vec& x) {
    return x[0] * x[0] * x[1] * x[1] + 0.25 * x.squaredNorm();
  };
  f.gradient = [](const Vec& x) {
    return vec2(2.0 * x[0] * x[1] * x[1] + 0.5 * x[0],
                2.0 * x[0] * x[0] * x[1] + 0.5 * x[1]);
  };
  return f;
}

}  // namespace

TEST_CASE("dimensional energy constant") {
  CHECK(std::abs(theta_constant(2) - kPi / 8.0) < 1e-12);
  CHECK(std::abs(theta_constant(3) - 2.0 * kPi / 15.0) < 1e-12);
  CHECK_THROWS_AS(theta_constant(4), ValidationError);
}

TEST_CASE("balanced energy of the model profiles") {
  QuadSpec quad;

  // Half-space profile: theta/2 = pi/16, independent of the sampling radius
  // because the profile is exactly 2-homogeneous.
  for (double r : {0.1, 0.4}) {
    BlowUpSample s = rescale(halfspace_profile(), 2, vec2(0.0, 0.0), r, quad);
    WeissValue w = weiss_energy(s);
    CHECK(std::abs(w.phi - kPi / 16.0) < 1e-6);
    CHECK(w.phi == doctest::Approx(w.bulk - 2.0 * w.boundary).epsilon(1e-14));
  }

  // Radial quadratic |x|^2/4: the singular value theta = pi/8, and the
  // integrands are polynomial so the quadrature is exact to round-off.
  BlowUpSample s = rescale(quadratic_profile(), 2, vec2(0.0, 0.0), 0.3, quad);
  WeissValue w = weiss_energy(s);
  CHECK(std::abs(w.phi - kPi / 8.0) < 1e-9);
}

TEST_CASE("scale-derivative identity for analytic fields") {
  QuadSpec quad;
  Vec origin = vec2(0.0, 0.0);

  // |x|^4 rescales to r^2 |x|^4, so Phi(r) is quadratic in r and the central
  // difference is exact: the residual probes only the identity itself.
  CHECK(weiss_derivative_residual(quartic_radial(), 2, origin, 0.5, 1e-3, quad) < 1e-8);

  // Mixed quartic: finite-difference error only.
  double res_1 = weiss_derivative_residual(quartic_mixed(), 2, origin, 0.5, 1e-3, quad);
  double res_2 = weiss_derivative_residual(quartic_mixed(), 2, origin, 0.5, 5e-4, quad);
  CHECK(res_1 < 1e-3);
  // Halving dr should quarter the O(dr^2) difference error, unless the
  // residual already sits at the quadrature floor.
  CHECK((res_2 <= 0.6 * res_1 + 1e-12 || res_2 <= 1e-8));

  CHECK_THROWS_AS(weiss_derivative_residual(quartic_radial(), 2, origin, 0.01, 0.02, quad),
                  ValidationError);
}

TEST_CASE("radius schedule covers the trusted window") {
  RadiiSpec spec;
  RadiiSchedule sched = radii_schedule(spec, 1.0 / 128, 0.5, nullptr);
  CHECK(sched.r_max == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(sched.r_min == doctest::Approx(0.0625).epsilon(1e-12));
  REQUIRE(sched.radii.size() == 4);
  CHECK(sched.radii[0] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(sched.radii[1] == doctest::Approx(0.2 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(sched.radii[2] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(sched.radii[3] == doctest::Approx(0.1 / std::sqrt(2.0)).epsilon(1e-12));
  for (std::size_t k = 0; k + 1 < sched.radii.size(); ++k)
    CHECK(sched.radii[k + 1] < sched.radii[k]);
  for (uint8_t t : sched.trusted) CHECK(t == 1);

  // A contracting map (L = Id/2) admits twice the radius and needs twice the
  // resolution floor.
  Box domain = box2(-1.0, 1.0);
  CoefficientField shrunk = constant_field(domain, Mat::Identity(2, 2), 4.0);
  NormalizationMap map = normalization_map(shrunk, vec2(0.0, 0.0));
  RadiiSchedule mapped = radii_schedule(spec, 1.0 / 128, 0.5, &map);
  CHECK(mapped.r_max == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(mapped.r_min == doctest::Approx(0.125).epsilon(1e-12));

  RadiiSpec bad = spec;
  bad.q = 1.2;
  CHECK_THROWS_AS(radii_schedule(bad, 1.0 / 128, 0.5, nullptr), ValidationError);
}

TEST_CASE("coefficient freezing gaps respect the modulus bounds") {
  Box domain = box2(-1.0, 1.0);
  QuadSpec quad{256, 32};
  Vec x0 = vec2(0.5, 0.0);

  // Rough matrix, constant forcing.
  FamilyParams hp;
  hp.alpha = 0.5;
  hp.amplitude = 0.25;
  CoefficientField holder = make_family(FamilyKind::holder, hp, domain);
  NormalizationMap hmap = normalization_map(holder, x0);
  BlowUpSample hs = rescale(radial_field(), 2, x0, 0.1, quad, &hmap);
  FreezingGap hg = freezing_gap(hs, holder, hmap);
  CHECK(hg.dirichlet_bound > 0.0);
  CHECK(hg.dirichlet_gap <= hg.dirichlet_bound * (1.0 + 1e-9));
  CHECK(hg.forcing_gap <= hg.forcing_bound + 1e-15);

  // Constant matrix, rough forcing.
  FamilyParams pp;
  pp.p = 3.0;
  pp.amplitude = 1e-3;
  CoefficientField plog = make_family(FamilyKind::power_log, pp, domain);
  NormalizationMap pmap = normalization_map(plog, x0);
  BlowUpSample ps = rescale(radial_field(), 2, x0, 0.1, quad, &pmap);
  FreezingGap pg = freezing_gap(ps, plog, pmap);
  CHECK(pg.forcing_bound > 0.0);
  CHECK(pg.forcing_gap <= pg.forcing_bound * (1.0 + 1e-9));
  CHECK(pg.dirichlet_gap <= pg.dirichlet_bound + 1e-15);
}

TEST_CASE("balanced-energy trace at a flat free boundary point") {
  GridSolution sol = solve_identity(-1.0, 1.0, 1.0 / 64, radial_exact);
  RadiiSpec spec;
  Vec x0 = vec2(kContactRadius, 0.0);
  RadiiSchedule sched = radii_schedule(spec, sol.grid.h, 0.5, nullptr);
  QuadSpec quad{256, 32};
  EnergyTrace trace = weiss_trace(sol, x0, sched, quad, nullptr, 0.0);

  REQUIRE(trace.radii.size() == sched.radii.size());
  CHECK(trace.c_corr == 0.0);
  CHECK_FALSE(trace.correction_divergent);
  for (double c : trace.correction) CHECK(c == 0.0);

  // Scale monotonicity (decreasing radii, so phi should not increase along
  // the vector) up to grid noise, with values near the half-space constant.
  for (std::size_t k = 0; k + 1 < trace.phi.size(); ++k)
    CHECK(trace.phi[k + 1] <= trace.phi[k] + 1e-3);
  for (double phi : trace.phi) CHECK(std::abs(phi - kPi / 16.0) < 0.05);
}

TEST_CASE("quadratic-profile monitor via a solved quadratic") {
  // Boundary data |x|^2/4 with unit forcing makes u = |x|^2/4 the discrete
  // solution; its contact set is the single node at the origin.
  GridSolution sol = solve_identity(-1.0, 1.0, 1.0 / 64,
                                    [](const Vec& x) { return 0.25 * x.squaredNorm(); });
  Vec origin = vec2(0.0, 0.0);
  RadiiSpec spec;
  RadiiSchedule sched = radii_schedule(spec, sol.grid.h, 1.0, nullptr);
  QuadSpec quad{256, 32};

  // Deviation against the wrong singular profile x1^2/2 has the closed form
  // integral (1/4 - cos^2/2)^2 = pi/16, at every radius.
  Mat q = Mat::Zero(2, 2);
  q(0, 0) = 0.5;
  MonneauTrace trace = monneau_trace(sol, origin, q, sched, quad, nullptr, 0.0);
  REQUIRE(trace.radii.size() == sched.radii.size());
  for (std::size_t k = 0; k < trace.deviation.size(); ++k) {
    CHECK(std::abs(trace.deviation[k] - kPi / 16.0) < 5e-3);
    CHECK(trace.monitor[k] == trace.deviation[k]);  // c_corr = 0
  }

  // Against the true profile Id/4 the deviation is interpolation noise,
  // orders of magnitude below the closed-form gap above.
  Mat qt = 0.25 * Mat::Identity(2, 2);
  MonneauTrace good = monneau_trace(sol, origin, qt, sched, quad, nullptr, 0.0);
  for (double d : good.deviation) CHECK(d < 1e-4);

  // Profile validation.
  CHECK_THROWS_AS(monneau_trace(sol, origin, Mat::Zero(3, 3), sched, quad, nullptr, 0.0),
                  ValidationError);
  Mat asym = Mat::Zero(2, 2);
  asym(0, 0) = 0.5;
  asym(0, 1) = 0.3;
  CHECK_THROWS_AS(monneau_trace(sol, origin, asym, sched, quad, nullptr, 0.0), ValidationError);
  Mat indef = Mat::Zero(2, 2);
  indef(0, 0) = 0.75;
  indef(1, 1) = -0.25;
  CHECK_THROWS_AS(monneau_trace(sol, origin, indef, sched, quad, nullptr, 0.0), ValidationError);
  CHECK_THROWS_AS(monneau_trace(sol, origin, 0.5 * Mat::Identity(2, 2), sched, quad, nullptr, 0.0),
                  ValidationError);
}

TEST_CASE("double-log Dini weight closed form") {
  Modulus root = Modulus::holder(0.5, 1.0);
  // integral_0^r sqrt(s) log(r/s) / s ds = 4 sqrt(r).
  DiniResult quarter = double_dini_log(root, 0.25);
  CHECK_FALSE(quarter.divergent);
  CHECK(quarter.value == doctest::Approx(2.0).epsilon(5e-3));
  DiniResult unit = double_dini_log(root, 1.0);
  CHECK_FALSE(unit.divergent);
  CHECK(unit.value == doctest::Approx(4.0).epsilon(5e-3));

  CHECK_THROWS_AS(double_dini_log(root, 1.5), ValidationError);
  CHECK_THROWS_AS(double_dini_log(root, 0.0), ValidationError);
}
