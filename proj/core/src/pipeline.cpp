#include "oblab/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "oblab/artifacts.hpp"
#include "oblab/classify.hpp"
#include "oblab/svg.hpp"

namespace oblab {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void dump_json(const ordered_json& doc, const std::string& path) {
  write_text_atomic(path, doc.dump(2) + "\n");
}

// Everything the analysis commands share: the stored solution re-attached to
// its coefficient field, the extracted free boundary, and the selected
// point indices (into the free-boundary list).
struct Prepared {
  GridSolution sol;
  FreeBoundary fb;
  std::vector<std::size_t> selected;
};

Prepared prepare(const RunConfig& cfg, const std::string& artifact, const PointSelector& sel) {
  Prepared p;
  p.sol = read_solution(artifact, cfg.hash);
  p.sol.field = std::make_shared<CoefficientField>(field_from_config(cfg));
  if (!p.sol.kkt.converged)
    std::cerr << "warning: stored solution did not meet the solver tolerance; "
                 "downstream quantities inherit that error\n";
  p.fb = free_boundary(p.sol);
  if (sel.mode == PointSelector::Mode::all) {
    p.selected.resize(p.fb.count());
    std::iota(p.selected.begin(), p.selected.end(), std::size_t{0});
  } else if (p.fb.count() > 0) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < p.fb.count(); ++k) {
      double d = (p.fb.points[k] - sel.target).norm();
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    p.selected.push_back(best);
  }
  return p;
}

// Even-indexed points, thinned to at most 64: the calibration half of the
// even/odd split. Odd-indexed points stay untouched as a holdout. The cap
// keeps calibration cheap while sampling enough of the interface that the
// worst interpolation noise seen on the holdout is also seen here.
std::vector<std::size_t> calibration_indices(std::size_t n) {
  std::vector<std::size_t> even;
  for (std::size_t i = 0; i < n; i += 2) even.push_back(i);
  if (even.size() <= 64) return even;
  std::vector<std::size_t> out;
  double stride = static_cast<double>(even.size()) / 64.0;
  for (int k = 0; k < 64; ++k) out.push_back(even[static_cast<std::size_t>(k * stride)]);
  return out;
}

// Smallest constant C such that value + C * correction1 is nondecreasing in r
// across consecutive trusted radii (radii listed decreasing; correction1 is
// the correction evaluated with unit constant).
double needed_constant(const std::vector<double>& radii, const std::vector<uint8_t>& trusted,
                       const std::vector<double>& value, const std::vector<double>& correction1) {
  double needed = 0.0;
  for (std::size_t k = 0; k + 1 < radii.size(); ++k) {
    if (!trusted[k] || !trusted[k + 1]) continue;
    double viol = value[k + 1] - value[k];  // positive: smaller radius came out larger
    double gap = correction1[k] - correction1[k + 1];
    double tol = 1e-12 * (1.0 + std::abs(value[k]));
    if (viol > tol && gap > 0) needed = std::max(needed, viol / gap);
  }
  return needed;
}

// Largest monotonicity violation of the corrected monitor over consecutive
// trusted radii; 0 when the monitor is already nondecreasing in r.
double max_violation(const std::vector<double>& radii, const std::vector<uint8_t>& trusted,
                     const std::vector<double>& monitor) {
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < radii.size(); ++k) {
    if (!trusted[k] || !trusted[k + 1]) continue;
    worst = std::max(worst, monitor[k + 1] - monitor[k]);
  }
  return worst;
}

// Calibrates the Weiss correction constant on even-indexed free-boundary
// points: twice the smallest constant that restores monotonicity there.
double calibrate_weiss(const GridSolution& sol, const FreeBoundary& fb, const RunConfig& cfg) {
  if (!cfg.calibrate_c_corr) return cfg.c_corr;
  auto idx = calibration_indices(fb.count());
  std::vector<double> needed(idx.size(), 0.0);
  parallel_for_index(idx.size(), [&](std::size_t t) {
    const Vec& x0 = fb.points[idx[t]];
    NormalizationMap map = normalization_map(*sol.field, x0);
    RadiiSchedule sched =
        radii_schedule(cfg.radii, sol.grid.h, sol.grid.box.boundary_distance(x0), &map);
    if (sched.radii.size() < 2) return;
    EnergyTrace tr = weiss_trace(sol, x0, sched, cfg.quad, &map, 1.0);
    if (tr.correction_divergent) return;  // no finite constant is claimed
    needed[t] = needed_constant(tr.radii, tr.trusted, tr.phi, tr.correction);
  });
  double worst = 0.0;
  for (double v : needed) worst = std::max(worst, v);
  return 2.0 * worst;
}

void plot_trace(const std::string& path, const std::string& title,
                const std::vector<double>& r, const std::vector<double>& raw,
                const std::vector<double>& corrected, const std::string& raw_name,
                const std::string& corr_name) {
  if (r.size() < 2) return;
  SvgPlot plot(title, "r", "energy", /*log_x=*/true);
  plot.add_series(raw_name, r, raw);
  plot.add_series(corr_name, r, corrected);
  plot.write(path);
}

int count_trusted(const std::vector<uint8_t>& trusted) {
  return static_cast<int>(std::count(trusted.begin(), trusted.end(), uint8_t{1}));
}

}  // namespace

PointSelector PointSelector::all() { return {}; }

PointSelector PointSelector::nearest(const Vec& x) {
  PointSelector s;
  s.mode = Mode::nearest;
  s.target = x;
  return s;
}

PointSelector PointSelector::parse(const std::string& text, int dim) {
  if (text == "all") return all();
  const std::string prefix = "nearest:";
  if (text.rfind(prefix, 0) == 0) {
    std::string rest = text.substr(prefix.size());
    std::replace(rest.begin(), rest.end(), ',', ' ');
    std::istringstream in(rest);
    Vec x(dim);
    for (int d = 0; d < dim; ++d)
      if (!(in >> x[d]))
        throw ValidationError("selector '" + text + "': expected " + std::to_string(dim) +
                              " comma-separated coordinates");
    std::string tail;
    if (in >> tail) throw ValidationError("selector '" + text + "': trailing input");
    return nearest(x);
  }
  throw ValidationError("selector must be 'all' or 'nearest:x,y', got '" + text + "'");
}

int cmd_solve(const RunConfig& cfg) {
  CoefficientField field = field_from_config(cfg);
  Grid grid = grid_from_config(cfg);

  auto psi = [&](const Vec& x) { return cfg.psi.eval(x); };
  // Default linear term: the family's own f, so the solved problem is the
  // one the analysis field describes.
  auto h_term = [&](const Vec& x) {
    return cfg.h_term_given ? cfg.h_term.eval(x) : eval_scalar(field, x);
  };
  auto boundary = [&](const Vec& x) { return cfg.boundary.eval(x); };

  ReducedProblem red = reduce_obstacle(field, grid, psi, h_term);
  if (!red.positive)
    std::cerr << "warning: reduced forcing has min " << fmt_double(red.f_min)
              << " <= 0; the free-boundary analysis assumes a strictly positive forcing\n";

  GridSolution sol = solve_obstacle(field, grid, red.f, boundary, cfg.solver);

  fs::create_directories(cfg.out_dir);
  write_solution(sol, join(cfg.out_dir, "solution.bin"), cfg.hash);
  write_kkt_json(sol, join(cfg.out_dir, "kkt.json"), cfg.hash);

  FreeBoundary fb = free_boundary(sol);
  if (cfg.dumps) {
    write_field_csv(sol.u, join(cfg.out_dir, "u.csv"));
    write_field_csv(sol.zeta, join(cfg.out_dir, "zeta.csv"));
    write_fb_csv(fb, join(cfg.out_dir, "free_boundary.csv"));
  }
  if (cfg.plots && fb.count() > 0) {
    std::vector<double> xs, ys;
    for (const Vec& p : fb.points) {
      xs.push_back(p[0]);
      ys.push_back(p[1]);
    }
    SvgPlot plot("free boundary (" + field.name + ")", "x", "y");
    plot.add_points("interface", xs, ys);
    plot.write(join(cfg.out_dir, "contact.svg"));
  }

  std::cout << "grid " << grid.nx() << " x " << grid.ny() << " (h = " << fmt_double(grid.h)
            << "), field " << field.name << "\n";
  std::cout << "sweeps " << sol.kkt.sweeps << ", active-set iterations "
            << sol.kkt.active_set_iters << ", complementarity "
            << fmt_double(sol.kkt.complementarity) << (sol.kkt.converged ? "" : " (not converged)")
            << "\n";
  std::cout << "contact nodes " << contact_set(sol).size() << ", free-boundary points "
            << fb.count() << "\n";
  std::cout << "wrote " << join(cfg.out_dir, "solution.bin") << ", "
            << join(cfg.out_dir, "kkt.json") << "\n";
  return sol.kkt.converged ? kExitOk : kExitNotConverged;
}

int cmd_weiss(const RunConfig& cfg, const std::string& artifact, const PointSelector& sel) {
  Prepared p = prepare(cfg, artifact, sel);
  if (p.selected.empty()) {
    std::cerr << "no free-boundary points selected\n";
    return kExitNoSelection;
  }
  double c_corr = calibrate_weiss(p.sol, p.fb, cfg);

  std::vector<EnergyTrace> traces(p.selected.size());
  parallel_for_index(p.selected.size(), [&](std::size_t i) {
    const Vec& x0 = p.fb.points[p.selected[i]];
    NormalizationMap map = normalization_map(*p.sol.field, x0);
    RadiiSchedule sched =
        radii_schedule(cfg.radii, p.sol.grid.h, p.sol.grid.box.boundary_distance(x0), &map);
    traces[i] = weiss_trace(p.sol, x0, sched, cfg.quad, &map, c_corr);
  });

  fs::create_directories(cfg.out_dir);
  ordered_json points = ordered_json::array();
  bool any_divergent = false;
  for (std::size_t i = 0; i < p.selected.size(); ++i) {
    const EnergyTrace& t = traces[i];
    std::size_t k = p.selected[i];
    std::string csv = "weiss_point_" + std::to_string(k) + ".csv";
    write_weiss_csv(t, join(cfg.out_dir, csv));

    std::vector<double> monitor(t.phi.size());
    for (std::size_t j = 0; j < t.phi.size(); ++j) monitor[j] = t.phi[j] + t.correction[j];
    if (cfg.plots)
      plot_trace(join(cfg.out_dir, "weiss_point_" + std::to_string(k) + ".svg"),
                 "Weiss energy, point " + std::to_string(k), t.radii, t.phi, monitor, "phi",
                 "phi + correction");

    ordered_json rec;
    rec["index"] = k;
    rec["x"] = p.fb.points[k][0];
    rec["y"] = p.fb.points[k][1];
    rec["n_radii"] = t.radii.size();
    rec["n_trusted"] = count_trusted(t.trusted);
    if (!t.radii.empty()) {
      rec["phi_largest_r"] = t.phi.front();
      rec["phi_smallest_r"] = t.phi.back();
    }
    rec["violation_raw"] = max_violation(t.radii, t.trusted, t.phi);
    rec["violation_corrected"] = max_violation(t.radii, t.trusted, monitor);
    rec["correction_divergent"] = t.correction_divergent;
    rec["csv"] = csv;
    points.push_back(rec);
    any_divergent = any_divergent || t.correction_divergent;
  }

  ordered_json doc;
  doc["config_hash"] = hash_hex(cfg.hash);
  doc["c_corr"] = c_corr;
  doc["calibrated"] = cfg.calibrate_c_corr;
  doc["correction_divergent"] = any_divergent;
  doc["points"] = points;
  dump_json(doc, join(cfg.out_dir, "weiss_summary.json"));

  std::cout << "weiss traces at " << p.selected.size() << " of " << p.fb.count()
            << " free-boundary points, c_corr = " << fmt_double(c_corr) << "\n";
  std::cout << "wrote " << join(cfg.out_dir, "weiss_summary.json") << "\n";
  return kExitOk;
}

int cmd_monneau(const RunConfig& cfg, const std::string& artifact, const PointSelector& sel) {
  Prepared p = prepare(cfg, artifact, sel);
  if (p.selected.empty()) {
    std::cerr << "no free-boundary points selected\n";
    return kExitNoSelection;
  }
  double weiss_c = calibrate_weiss(p.sol, p.fb, cfg);

  ClassifyOptions copts;
  copts.radii = cfg.radii;
  copts.quad = cfg.quad;
  copts.c_corr = weiss_c;
  copts.eigen_rel_threshold = cfg.eigen_rel_threshold;

  std::vector<Classification> cls(p.selected.size());
  parallel_for_index(p.selected.size(), [&](std::size_t i) {
    cls[i] = classify_point(p.sol, p.fb.points[p.selected[i]], copts);
  });

  std::vector<std::size_t> singular;  // positions in `selected`
  for (std::size_t i = 0; i < cls.size(); ++i)
    if (cls[i].verdict == Verdict::singular) singular.push_back(i);

  // Monitor traces with unit constant first; the constant is calibrated on
  // the even-indexed singular points, then applied everywhere.
  std::vector<MonneauTrace> traces(singular.size());
  parallel_for_index(singular.size(), [&](std::size_t t) {
    std::size_t i = singular[t];
    const Vec& x0 = p.fb.points[p.selected[i]];
    NormalizationMap map = normalization_map(*p.sol.field, x0);
    RadiiSchedule sched =
        radii_schedule(cfg.radii, p.sol.grid.h, p.sol.grid.box.boundary_distance(x0), &map);
    traces[t] = monneau_trace(p.sol, x0, cls[i].poly.Q, sched, cfg.quad, &map, 1.0);
  });

  double c_mon = cfg.c_corr;
  if (cfg.calibrate_c_corr) {
    double worst = 0.0;
    for (std::size_t t = 0; t < traces.size(); ++t) {
      if (t % 2 != 0 || traces[t].correction_divergent) continue;
      worst = std::max(worst, needed_constant(traces[t].radii, traces[t].trusted,
                                              traces[t].deviation, traces[t].correction));
    }
    c_mon = 2.0 * worst;
  }
  for (MonneauTrace& t : traces) {
    for (std::size_t j = 0; j < t.radii.size(); ++j) {
      t.correction[j] *= c_mon;
      t.monitor[j] = t.deviation[j] + t.correction[j];
    }
    t.c_corr = c_mon;
  }

  fs::create_directories(cfg.out_dir);
  ordered_json points = ordered_json::array();
  std::size_t next_singular = 0;
  for (std::size_t i = 0; i < p.selected.size(); ++i) {
    std::size_t k = p.selected[i];
    ordered_json rec;
    rec["index"] = k;
    rec["x"] = p.fb.points[k][0];
    rec["y"] = p.fb.points[k][1];
    rec["verdict"] = verdict_name(cls[i].verdict);
    if (cls[i].verdict != Verdict::singular) {
      std::cout << "point " << k << " is " << verdict_name(cls[i].verdict)
                << "; the quadratic monitor does not apply, skipping\n";
      points.push_back(rec);
      continue;
    }
    const MonneauTrace& t = traces[next_singular++];
    std::string csv = "monneau_point_" + std::to_string(k) + ".csv";
    write_monneau_csv(t, join(cfg.out_dir, csv));
    if (cfg.plots)
      plot_trace(join(cfg.out_dir, "monneau_point_" + std::to_string(k) + ".svg"),
                 "Monneau monitor, point " + std::to_string(k), t.radii, t.deviation, t.monitor,
                 "deviation", "monitor");
    rec["k"] = cls[i].k;
    rec["Q"] = {cls[i].poly.Q(0, 0), cls[i].poly.Q(0, 1), cls[i].poly.Q(1, 1)};
    rec["n_radii"] = t.radii.size();
    rec["n_trusted"] = count_trusted(t.trusted);
    if (!t.radii.empty()) rec["deviation_smallest_r"] = t.deviation.back();
    rec["violation_raw"] = max_violation(t.radii, t.trusted, t.deviation);
    rec["violation_corrected"] = max_violation(t.radii, t.trusted, t.monitor);
    rec["correction_divergent"] = t.correction_divergent;
    rec["csv"] = csv;
    points.push_back(rec);
  }

  ordered_json doc;
  doc["config_hash"] = hash_hex(cfg.hash);
  doc["c_corr"] = c_mon;
  doc["calibrated"] = cfg.calibrate_c_corr;
  doc["n_singular"] = singular.size();
  doc["points"] = points;
  dump_json(doc, join(cfg.out_dir, "monneau_summary.json"));

  std::cout << "monneau monitors at " << singular.size() << " singular of " << p.selected.size()
            << " selected points, c_corr = " << fmt_double(c_mon) << "\n";
  std::cout << "wrote " << join(cfg.out_dir, "monneau_summary.json") << "\n";
  return kExitOk;
}

int cmd_classify(const RunConfig& cfg, const std::string& artifact, const PointSelector& sel) {
  Prepared p = prepare(cfg, artifact, sel);
  if (p.selected.empty()) {
    std::cerr << "no free-boundary points selected\n";
    return kExitNoSelection;
  }
  double c_corr = calibrate_weiss(p.sol, p.fb, cfg);

  ClassifyOptions copts;
  copts.radii = cfg.radii;
  copts.quad = cfg.quad;
  copts.c_corr = c_corr;
  copts.eigen_rel_threshold = cfg.eigen_rel_threshold;

  std::vector<Classification> cls(p.selected.size());
  parallel_for_index(p.selected.size(), [&](std::size_t i) {
    cls[i] = classify_point(p.sol, p.fb.points[p.selected[i]], copts);
  });

  FreeBoundary sub;
  for (std::size_t i : p.selected) {
    sub.points.push_back(p.fb.points[i]);
    sub.anchors.push_back(p.fb.anchors[i]);
    sub.edge_dirs.push_back(p.fb.edge_dirs[i]);
  }
  Stratification st = stratify(sub, cls, p.sol.grid);

  // Detachment / growth diagnostics on a thinned subset, plain rescaling.
  Nondegeneracy nd;
  {
    auto idx = calibration_indices(sub.count());
    std::vector<Vec> pts;
    double r_top = std::numeric_limits<double>::infinity();
    for (std::size_t i : idx) {
      double adm = max_admissible_radius(p.sol.grid, sub.points[i], nullptr);
      if (adm <= 4 * p.sol.grid.h) continue;  // hugging the domain boundary
      pts.push_back(sub.points[i]);
      r_top = std::min(r_top, 0.45 * adm);
    }
    if (!pts.empty()) {
      std::vector<double> radii{r_top};
      if (r_top / 2 >= 4 * p.sol.grid.h) radii.push_back(r_top / 2);
      if (r_top / 4 >= 4 * p.sol.grid.h) radii.push_back(r_top / 4);
      nd = nondegeneracy_check(p.sol, pts, radii, cfg.quad);
    }
  }

  fs::create_directories(cfg.out_dir);
  write_classification_csv(cls, join(cfg.out_dir, "classification.csv"));
  write_classification_json(cls, st, nd, c_corr, join(cfg.out_dir, "classification.json"),
                            cfg.hash);

  if (cfg.plots) {
    SvgPlot plot("free boundary by verdict", "x", "y");
    const char* names[] = {"regular", "singular", "undetermined"};
    for (int v = 0; v < 3; ++v) {
      std::vector<double> xs, ys;
      for (const auto& c : cls)
        if (static_cast<int>(c.verdict) == v) {
          xs.push_back(c.x0[0]);
          ys.push_back(c.x0[1]);
        }
      if (!xs.empty()) plot.add_points(names[v], xs, ys);
    }
    plot.write(join(cfg.out_dir, "free_boundary.svg"));
  }

  std::cout << "classified " << p.selected.size() << " of " << p.fb.count()
            << " free-boundary points: " << st.n_regular << " regular, " << st.n_singular
            << " singular, " << st.n_undetermined << " undetermined (c_corr = "
            << fmt_double(c_corr) << ")\n";
  std::cout << "components " << st.components << ", mixed " << st.mixed_components
            << "; detachment min " << fmt_double(nd.theta_hat) << ", growth max "
            << fmt_double(nd.gamma_hat) << "\n";
  std::cout << "wrote " << join(cfg.out_dir, "classification.json") << "\n";
  return kExitOk;
}

}  // namespace oblab
