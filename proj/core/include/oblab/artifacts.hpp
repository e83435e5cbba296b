#pragma once

#include <cstdint>
#include <string>

#include "oblab/classify.hpp"
#include "oblab/geometry.hpp"
#include "oblab/solver.hpp"

namespace oblab {

/// Solution artifact: small text header (version, config hash, grid) followed
/// by row-major 8-byte little-endian doubles for u, zeta and the active mask.
/// Writers go through a temp file + rename so readers never see a torn file.
void write_solution(const GridSolution& sol, const std::string& path, std::uint64_t config_hash);

/// Loads a solution artifact. The stored config hash must match expect_hash,
/// otherwise ValidationError: artifacts never cross between configs.
GridSolution read_solution(const std::string& path, std::uint64_t expect_hash);

void write_kkt_json(const GridSolution& sol, const std::string& path, std::uint64_t config_hash);

void write_fb_csv(const FreeBoundary& fb, const std::string& path);

void write_weiss_csv(const EnergyTrace& t, const std::string& path);

void write_monneau_csv(const MonneauTrace& t, const std::string& path);

void write_classification_csv(const std::vector<Classification>& cls, const std::string& path);

void write_classification_json(const std::vector<Classification>& cls, const Stratification& st,
                               const Nondegeneracy& nd, double c_corr, const std::string& path,
                               std::uint64_t config_hash);

/// Plain CSV dump of a grid field (x, y, value), for small-grid inspection.
void write_field_csv(const GridField& f, const std::string& path);

/// Writes text through the same temp-file + rename dance the binary writers
/// use. The pipeline summaries go through this.
void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace oblab
