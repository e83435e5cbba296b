// Microbenchmarks for the hot paths: assembly, the constrained solve, the
// rescale + Weiss evaluation that dominates trace building, Dini integrals,
// and a full point classification.

#include <cmath>
#include <map>

#include <benchmark/benchmark.h>

#include "oblab/classify.hpp"

namespace {

using namespace oblab;

CoefficientField radial_field() {
  Box box{Vec(2), Vec(2)};
  box.lo << -1.0, -1.0;
  box.hi << 1.0, 1.0;
  return make_family(FamilyKind::identity, {}, box);
}

double radial_exact(double s) {
  const double rho = 0.5;
  if (s <= rho) return 0.0;
  return s * s / 4 - rho * rho / 2 * std::log(s / rho) - rho * rho / 4;
}

const GridSolution& solved_radial(double h) {
  static std::map<double, GridSolution> cache;
  auto it = cache.find(h);
  if (it == cache.end()) {
    CoefficientField field = radial_field();
    Grid grid = Grid::make(field.domain, h);
    GridField f = GridField::sample(grid, [](const Vec&) { return 1.0; });
    GridSolution sol = solve_obstacle(field, grid, f,
                                      [](const Vec& x) { return radial_exact(x.norm()); });
    it = cache.emplace(h, std::move(sol)).first;
  }
  return it->second;
}

void BM_Discretize(benchmark::State& state) {
  CoefficientField field = radial_field();
  Grid grid = Grid::make(field.domain, 1.0 / 128);
  for (auto _ : state) {
    DiscreteOperator op = discretize_operator(field, grid);
    benchmark::DoNotOptimize(op.K);
  }
}
BENCHMARK(BM_Discretize);

void BM_SolveObstacle(benchmark::State& state) {
  CoefficientField field = radial_field();
  Grid grid = Grid::make(field.domain, 1.0 / state.range(0));
  GridField f = GridField::sample(grid, [](const Vec&) { return 1.0; });
  for (auto _ : state) {
    GridSolution sol = solve_obstacle(field, grid, f,
                                      [](const Vec& x) { return radial_exact(x.norm()); });
    benchmark::DoNotOptimize(sol.u.v);
  }
}
BENCHMARK(BM_SolveObstacle)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_RescaleWeiss(benchmark::State& state) {
  const GridSolution& sol = solved_radial(1.0 / 64);
  Vec x0(2);
  x0 << 0.5, 0.0;
  QuadSpec quad;
  for (auto _ : state) {
    BlowUpSample s = rescale(sol, x0, 0.2, quad);
    WeissValue w = weiss_energy(s);
    benchmark::DoNotOptimize(w.phi);
  }
}
BENCHMARK(BM_RescaleWeiss)->Unit(benchmark::kMillisecond);

void BM_DiniIntegral(benchmark::State& state) {
  Modulus m = Modulus::power_log(3.0);
  for (auto _ : state) {
    DiniResult d = dini_integral(m, 0.5, 1.0);
    benchmark::DoNotOptimize(d.value);
  }
}
BENCHMARK(BM_DiniIntegral);

void BM_ClassifyPoint(benchmark::State& state) {
  // h = 1/128 so the radius schedule clears the proximity gate and the
  // benchmark measures a full trace-and-fit classification, not the early
  // exit. The deepest interface point has the most radii to process.
  const GridSolution& sol = solved_radial(1.0 / 128);
  FreeBoundary fb = free_boundary(sol);
  Vec x0 = fb.points.front();
  for (const Vec& p : fb.points)
    if (sol.grid.box.boundary_distance(p) > sol.grid.box.boundary_distance(x0)) x0 = p;
  ClassifyOptions opts;
  for (auto _ : state) {
    Classification c = classify_point(sol, x0, opts);
    benchmark::DoNotOptimize(c.phi0);
  }
}
BENCHMARK(BM_ClassifyPoint)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
