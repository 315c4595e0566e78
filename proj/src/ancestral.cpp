#include "wfexact/ancestral.hpp"

#include <cmath>
#include <string>

#include "wfexact/log.hpp"

namespace wfexact {

LineageMoments gaussian_lineage_moments(double theta, double t) {
  detail::require(theta > 0.0, "theta must be > 0");
  require_time(t);
  const double beta = 0.5 * (theta - 1.0) * t;
  if (std::abs(beta) < 1e-8) return {2.0 / t, 2.0 / (3.0 * t)};

  const double eta = beta / std::expm1(beta);
  // (eta+beta)^2 (1 + eta/(eta+beta) - 2 eta) / beta^2 cancels badly near
  // beta = 0; switch to its Taylor series there.
  double factor;
  if (std::abs(beta) < 1e-2) {
    const double b = beta;
    factor = 1.0 / 3.0 +
             b * (1.0 / 6.0 + b * (1.0 / 60.0 + b * (-1.0 / 180.0 + b * (-1.0 / 1008.0 +
                                                                          b * (1.0 / 5040.0)))));
  } else {
    factor = (eta + beta) * (eta + beta) * (1.0 + eta / (eta + beta) - 2.0 * eta) / (beta * beta);
  }
  const double mean = 2.0 * eta / t;
  return {mean, mean * factor};
}

LineageSampler::LineageSampler(double theta, double t, ApproxPolicy policy, InspectionOrder order)
    : theta_(theta),
      t_(t),
      policy_(policy),
      order_(order),
      moments_(gaussian_lineage_moments(theta, t)),
      series_(theta, t) {
  policy_.validate();
}

RefinedDraw<std::int64_t> LineageSampler::invert(double u, SampleStats* stats) {
  auto bounds = [this](std::int64_t m, int depth) {
    return series_.bracket(static_cast<int>(m), depth);
  };
  auto burn_in = [this](std::int64_t m) { return series_.burn_in(static_cast<int>(m)); };

  RefinedDraw<std::int64_t> draw;
  if (order_ == InspectionOrder::mode_radiating) {
    RadiatingOrder next(std::llround(moments_.mean));
    draw = sample_by_refinable_bounds<std::int64_t>(u, next, bounds, burn_in, refinement);
  } else {
    AscendingOrder next;
    draw = sample_by_refinable_bounds<std::int64_t>(u, next, bounds, burn_in, refinement);
  }
  // Each visited column used terms 0..2*depth+1.
  if (stats) stats->coefficients += static_cast<std::uint64_t>(2 * draw.depth_sum + 2 * draw.visited);
  return draw;
}

std::int64_t LineageSampler::sample_exact(Rng& rng, SampleStats* stats) {
  for (int attempt = 0;; ++attempt) {
    const double u = rng.uniform();
    try {
      return invert(u, stats).index;
    } catch (const RefinementCapExceeded& e) {
      if (stats) ++stats->uniform_retries;
      if (attempt + 1 >= max_uniform_retries)
        throw ExactModeFailure(std::string("lineage sampler kept failing to resolve u: ") + e.what());
      log_warning(std::string("resampling u after unresolved boundary tie (t=") + std::to_string(t_) +
                  "): " + e.what());
    }
  }
}

std::int64_t LineageSampler::sample_approx(Rng& rng, SampleStats* stats) const {
  if (stats) ++stats->approx_fallbacks;
  const double draw = rng.normal(moments_.mean, std::sqrt(moments_.variance));
  const double rounded = std::nearbyint(draw);
  return rounded < 0.0 ? 0 : static_cast<std::int64_t>(rounded);
}

LineageDraw LineageSampler::sample(Rng& rng, SampleStats* stats) {
  if (!policy_.use_exact(t_)) return {sample_approx(rng, stats), true};
  if (policy_.mode == ApproxPolicy::Mode::exact_only) return {sample_exact(rng, stats), false};
  try {
    return {sample_exact(rng, stats), false};
  } catch (const ExactModeFailure& e) {
    log_warning(std::string("exact lineage sampler failed, using the Gaussian approximation: ") +
                e.what());
    return {sample_approx(rng, stats), true};
  }
}

std::int64_t sample_lineage_count_exact(const MutationParams& params, double t, Rng& rng,
                                        SampleStats* stats) {
  LineageSampler sampler(params, t, {.t_min = t, .mode = ApproxPolicy::Mode::exact_only});
  return sampler.sample_exact(rng, stats);
}

std::int64_t sample_lineage_count_approx(const MutationParams& params, double t, Rng& rng) {
  LineageSampler sampler(params, t, {.t_min = t, .mode = ApproxPolicy::Mode::approx_only});
  return sampler.sample_approx(rng);
}

LineageDraw sample_lineage_count(const MutationParams& params, double t, const ApproxPolicy& policy,
                                 Rng& rng, SampleStats* stats) {
  LineageSampler sampler(params, t, policy);
  return sampler.sample(rng, stats);
}

}  // namespace wfexact
