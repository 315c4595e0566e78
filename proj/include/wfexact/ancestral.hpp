#pragma once

#include <cstdint>
#include <memory>

#include "wfexact/params.hpp"
#include "wfexact/random.hpp"
#include "wfexact/refinable_sampler.hpp"
#include "wfexact/series.hpp"

namespace wfexact {

/// Mean and variance of the small-t Gaussian limit of the lineage count,
/// mu = 2 eta / t with eta = beta / (e^beta - 1), beta = (theta - 1) t / 2.
struct LineageMoments {
  double mean = 0.0;
  double variance = 0.0;
};

LineageMoments gaussian_lineage_moments(double theta, double t);
inline LineageMoments gaussian_lineage_moments(const MutationParams& params, double t) {
  return gaussian_lineage_moments(params.theta(), t);
}

struct LineageDraw {
  std::int64_t count = 0;
  bool used_approximation = false;
};

/// Work counters accumulated by the samplers. Merge with += when reducing
/// across threads.
struct SampleStats {
  std::uint64_t coefficients = 0;      ///< series coefficients used
  std::uint64_t approx_fallbacks = 0;  ///< Gaussian lineage draws
  std::uint64_t uniform_retries = 0;   ///< boundary ties resolved by resampling u

  SampleStats& operator+=(const SampleStats& o) {
    coefficients += o.coefficients;
    approx_fallbacks += o.approx_fallbacks;
    uniform_retries += o.uniform_retries;
    return *this;
  }
};

enum class InspectionOrder { mode_radiating, ascending };

/// Draws of the ancestral lineage count A(t) for fixed (theta, t). Keeps the
/// partial sums it has computed, so repeated draws get cheaper.
class LineageSampler {
 public:
  LineageSampler(double theta, double t, ApproxPolicy policy = {},
                 InspectionOrder order = InspectionOrder::mode_radiating);
  LineageSampler(const MutationParams& params, double t, ApproxPolicy policy = {},
                 InspectionOrder order = InspectionOrder::mode_radiating)
      : LineageSampler(params.theta(), t, policy, order) {}

  /// Dispatch per policy. In automatic mode an exact-mode failure falls back
  /// to the approximation; in exact_only mode it propagates.
  LineageDraw sample(Rng& rng, SampleStats* stats = nullptr);

  /// Exact draw; throws ExactModeFailure when the series cannot be resolved.
  std::int64_t sample_exact(Rng& rng, SampleStats* stats = nullptr);

  /// Exact inversion of a given uniform (no retry on ties).
  RefinedDraw<std::int64_t> invert(double u, SampleStats* stats = nullptr);

  /// Gaussian draw rounded to the nearest integer and clamped at zero.
  std::int64_t sample_approx(Rng& rng, SampleStats* stats = nullptr) const;

  LineageSeries& series() { return series_; }
  double t() const { return t_; }
  double theta() const { return theta_; }

  int max_uniform_retries = 16;
  RefinementOptions refinement;

 private:
  double theta_;
  double t_;
  ApproxPolicy policy_;
  InspectionOrder order_;
  LineageMoments moments_;
  LineageSeries series_;
};

std::int64_t sample_lineage_count_exact(const MutationParams& params, double t, Rng& rng,
                                        SampleStats* stats = nullptr);
std::int64_t sample_lineage_count_approx(const MutationParams& params, double t, Rng& rng);
LineageDraw sample_lineage_count(const MutationParams& params, double t, const ApproxPolicy& policy,
                                 Rng& rng, SampleStats* stats = nullptr);

}  // namespace wfexact
