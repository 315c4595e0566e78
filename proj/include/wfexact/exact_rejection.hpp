#pragma once

#include <cstdint>
#include <vector>

#include "wfexact/bridge.hpp"
#include "wfexact/drift.hpp"
#include "wfexact/random.hpp"

namespace wfexact {

/// Work counters per accepted path, totalled over all attempts.
struct PathDiagnostics {
  std::uint64_t attempts = 0;
  std::uint64_t poisson_points = 0;
  std::uint64_t coefficients = 0;
  std::uint64_t rng_draws = 0;
  std::uint64_t approx_fallbacks = 0;
  double wall_time = 0.0;  ///< seconds

  PathDiagnostics& operator+=(const PathDiagnostics& o) {
    attempts += o.attempts;
    poisson_points += o.poisson_points;
    coefficients += o.coefficients;
    rng_draws += o.rng_draws;
    approx_fallbacks += o.approx_fallbacks;
    wall_time += o.wall_time;
    return *this;
  }
};

struct SkeletonPath {
  std::vector<Knot> knots;
  PathDiagnostics diagnostics;

  /// True when some knot came from a Gaussian lineage draw.
  bool approximate() const;
};

struct RejectionOptions {
  ApproxPolicy policy;
  BridgeOptions bridge;
  std::uint64_t max_attempts = 100'000'000;
};

/// One path of the diffusion with drift `drift` on [0, T] from x0, revealed
/// at the Poisson times of the accepted attempt and at T. Candidates are
/// neutral transitions drawn at the Poisson times in order; an attempt stops
/// at the first point that rejects.
SkeletonPath sample_path_exact(double x0, double T, const DriftSpec& drift, Rng& rng,
                               const RejectionOptions& options = {});

/// Same law over [0, T], run as ceil(T / segment_cap) equal segments chained
/// through their endpoints. Keeps the per-segment acceptance rate bounded for
/// long horizons.
SkeletonPath sample_path_segmented(double x0, double T, const DriftSpec& drift, Rng& rng,
                                   double segment_cap = 0.5, const RejectionOptions& options = {});

/// Path conditioned on X_T = y: candidates are neutral bridge points and the
/// endpoint test drops out.
SkeletonPath sample_bridge_path_exact(double x0, double y, double T, const DriftSpec& drift, Rng& rng,
                                      const RejectionOptions& options = {});

/// (phi+ - phi-) T exp((phi+ - phi-) T + A+), a bound on the mean number of
/// Poisson points generated until the first accepted path.
double expected_points_bound(double T, const DriftSpec& drift);

}  // namespace wfexact
