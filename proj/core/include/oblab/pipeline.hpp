#pragma once

#include <optional>
#include <string>

#include "oblab/config.hpp"

namespace oblab {

/// Which free-boundary points a command operates on: all of them, or the one
/// nearest a target location.
struct PointSelector {
  enum class Mode { all, nearest };
  Mode mode = Mode::all;
  Vec target;

  static PointSelector all();
  static PointSelector nearest(const Vec& x);
  /// Parses "all" or "nearest:x,y". Throws ValidationError otherwise.
  static PointSelector parse(const std::string& text, int dim);
};

/// Exit codes shared by the pipeline commands and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;       // config/validation/stale-artifact errors
inline constexpr int kExitNotConverged = 2;  // solver hit its iteration cap
inline constexpr int kExitNoSelection = 3;   // selector matched no points

/// Solves the configured problem, writes <out>/solution.bin and
/// <out>/kkt.json (plus optional dumps/plots). The artifact is written even
/// when the solver stops at its iteration cap; the exit code says so.
int cmd_solve(const RunConfig& cfg);

/// Weiss traces at selected free-boundary points of a stored solution:
/// <out>/weiss_point_<k>.csv per point plus <out>/weiss_summary.json.
int cmd_weiss(const RunConfig& cfg, const std::string& artifact, const PointSelector& sel);

/// Monneau monitors at selected singular points (regular points are skipped
/// with a notice): <out>/monneau_point_<k>.csv plus <out>/monneau_summary.json.
int cmd_monneau(const RunConfig& cfg, const std::string& artifact, const PointSelector& sel);

/// Classifies selected free-boundary points: <out>/classification.csv,
/// <out>/classification.json, optional <out>/free_boundary.svg.
int cmd_classify(const RunConfig& cfg, const std::string& artifact, const PointSelector& sel);

}  // namespace oblab
