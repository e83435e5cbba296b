#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace oblab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Raised when inputs violate a documented precondition (bad bounds,
/// malformed config, non-SPD matrix where SPD is required, ...).
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when a geometric request leaves the computational domain
/// (e.g. a rescaling ball that pokes out of the grid).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Axis-aligned box, the computational domain.
struct Box {
  Vec lo;
  Vec hi;

  int dim() const { return static_cast<int>(lo.size()); }

  bool contains(const Vec& x, double slack = 0.0) const {
    for (int d = 0; d < dim(); ++d)
      if (x[d] < lo[d] - slack || x[d] > hi[d] + slack) return false;
    return true;
  }

  /// Distance from x to the boundary of the box (positive inside).
  double boundary_distance(const Vec& x) const {
    double m = std::numeric_limits<double>::infinity();
    for (int d = 0; d < dim(); ++d) {
      m = std::min(m, x[d] - lo[d]);
      m = std::min(m, hi[d] - x[d]);
    }
    return m;
  }
};

/// FNV-1a over raw bytes; used to fingerprint run configurations so that
/// artifacts from one config are never mixed into another run.
std::uint64_t fnv1a(std::string_view bytes);

/// 16-digit lowercase hex form of a hash, as stored in artifact headers.
std::string hash_hex(std::uint64_t h);

/// Fixed shortest-roundtrip formatting for doubles. All CSV/JSON artifacts
/// go through this so reruns are byte-identical.
std::string fmt_double(double v);

/// Thread count for embarrassingly parallel per-point loops. Reads
/// OBLAB_THREADS, defaults to 1. Results are merged in index order, so the
/// outputs do not depend on this value.
int thread_count();

/// Runs fn(i) for i in [0, n) on thread_count() threads, chunked by index.
void parallel_for_index(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace oblab
