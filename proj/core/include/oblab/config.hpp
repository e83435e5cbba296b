#pragma once

#include <cstdint>
#include <string>

#include "oblab/energies.hpp"
#include "oblab/expr.hpp"
#include "oblab/solver.hpp"

namespace oblab {

/// One fully specified run: domain, coefficient family, problem data, solver
/// and analysis knobs, output location. Parsed from an INI-style file of
/// [section] blocks with key = value lines; every validation failure reports
/// the offending line.
struct RunConfig {
  Box domain;
  double h = 1.0 / 64;

  FamilyKind family = FamilyKind::identity;
  FamilyParams fparams;

  Expression psi;       // obstacle, default 0
  Expression h_term;    // linear-term density; defaults to the family's f
  Expression boundary;  // Dirichlet data for the reduced unknown u >= 0
  // When h_term is absent from the config, the solve uses the coefficient
  // family's scalar f directly, keeping the solved forcing and the analysis
  // field consistent by construction. An explicit h_term overrides it (the
  // user then owns that consistency, see the config reference).
  bool h_term_given = false;

  SolverOptions solver;

  RadiiSpec radii;
  QuadSpec quad;
  bool calibrate_c_corr = true;
  double c_corr = 0.0;  // used when calibrate_c_corr is false
  double eigen_rel_threshold = 1e-2;
  std::uint64_t seed = 42;

  std::string out_dir = "out";
  bool plots = false;
  bool dumps = false;

  std::uint64_t hash = 0;  // FNV-1a of the raw config bytes
};

RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& name = "<config>");

CoefficientField field_from_config(const RunConfig& cfg);
Grid grid_from_config(const RunConfig& cfg);

}  // namespace oblab
