#include "wfexact/exact_rejection.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>

#include "wfexact/neutral.hpp"

namespace wfexact {
namespace {

struct PoissonMarks {
  std::vector<double> times;
  std::vector<double> marks;
};

PoissonMarks draw_poisson(double T, double rate, Rng& rng) {
  PoissonMarks out;
  if (rate <= 0.0) return out;
  const long n = rng.poisson(rate * T);
  std::vector<std::pair<double, double>> points;
  points.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    const double t = T * rng.uniform();
    points.emplace_back(t, rate * rng.uniform());
  }
  std::sort(points.begin(), points.end());
  for (const auto& [t, psi] : points) {
    out.times.push_back(t);
    out.marks.push_back(psi);
  }
  return out;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace

bool SkeletonPath::approximate() const {
  return std::any_of(knots.begin(), knots.end(), [](const Knot& k) { return k.approximate; });
}

SkeletonPath sample_path_exact(double x0, double T, const DriftSpec& drift, Rng& rng,
                               const RejectionOptions& options) {
  require_frequency(x0, "x0");
  require_time(T, "T");
  options.policy.validate();
  const Stopwatch clock;
  const std::uint64_t draws_before = rng.draws();
  const PhiBounds& b = drift.bounds();
  const double rate = b.phi_plus - b.phi_minus;
  const MutationParams& params = drift.params();

  SampleStats stats;
  SkeletonPath path;
  // The last increment spans all of [0, T] whenever no point is drawn, which
  // is the common case; keep its sampler (and cached partial sums) around.
  TransitionSampler full(params, T, options.policy);

  for (;;) {
    if (path.diagnostics.attempts >= options.max_attempts)
      throw ExactModeFailure("rejection sampler exceeded its attempt cap");
    ++path.diagnostics.attempts;
    const PoissonMarks phi = draw_poisson(T, rate, rng);
    path.diagnostics.poisson_points += phi.times.size();

    path.knots.assign(1, Knot{0.0, x0, false});
    double x = x0;
    double prev = 0.0;
    bool rejected = false;
    for (std::size_t i = 0; i < phi.times.size(); ++i) {
      const double dt = phi.times[i] - prev;
      bool approx = false;
      if (dt > 0.0) {
        TransitionSampler step(params, dt, options.policy);
        x = step.sample(x, rng, &stats, approx);
      }
      prev = phi.times[i];
      path.knots.push_back({prev, x, approx});
      if (drift.phi_tilde(x) - b.phi_minus > phi.marks[i]) {
        rejected = true;
        break;
      }
    }
    if (rejected) continue;

    bool approx = false;
    const double dt = T - prev;
    if (prev == 0.0) {
      x = full.sample(x, rng, &stats, approx);
    } else if (dt > 0.0) {
      TransitionSampler step(params, dt, options.policy);
      x = step.sample(x, rng, &stats, approx);
    }
    if (dt <= 0.0) path.knots.pop_back();
    path.knots.push_back({T, x, approx});
    if (rng.uniform() <= std::exp(drift.a_tilde(x) - b.a_plus)) break;
  }

  path.diagnostics.coefficients = stats.coefficients;
  path.diagnostics.approx_fallbacks = stats.approx_fallbacks;
  path.diagnostics.rng_draws = rng.draws() - draws_before;
  path.diagnostics.wall_time = clock.seconds();
  return path;
}

SkeletonPath sample_path_segmented(double x0, double T, const DriftSpec& drift, Rng& rng, double segment_cap,
                                   const RejectionOptions& options) {
  require_time(T, "T");
  require_time(segment_cap, "segment_cap");
  const auto segments = static_cast<std::int64_t>(std::ceil(T / segment_cap - 1e-12));
  const double length = T / static_cast<double>(std::max<std::int64_t>(segments, 1));
  SkeletonPath out;
  out.knots.push_back({0.0, x0, false});
  double x = x0;
  for (std::int64_t s = 0; s < std::max<std::int64_t>(segments, 1); ++s) {
    const double offset = length * static_cast<double>(s);
    SkeletonPath seg = sample_path_exact(x, length, drift, rng, options);
    for (std::size_t i = 1; i < seg.knots.size(); ++i) {
      Knot k = seg.knots[i];
      k.time = (i + 1 == seg.knots.size() && s + 1 == std::max<std::int64_t>(segments, 1)) ? T : offset + k.time;
      out.knots.push_back(k);
    }
    x = seg.knots.back().value;
    out.diagnostics += seg.diagnostics;
  }
  return out;
}

SkeletonPath sample_bridge_path_exact(double x0, double y, double T, const DriftSpec& drift, Rng& rng,
                                      const RejectionOptions& options) {
  require_interior(x0, "x0");
  require_interior(y, "y");
  require_time(T, "T");
  options.policy.validate();
  const Stopwatch clock;
  const std::uint64_t draws_before = rng.draws();
  const PhiBounds& b = drift.bounds();
  const double rate = b.phi_plus - b.phi_minus;
  BridgeOptions bridge = options.bridge;
  bridge.policy = options.policy;

  SampleStats stats;
  SkeletonPath path;
  for (;;) {
    if (path.diagnostics.attempts >= options.max_attempts)
      throw ExactModeFailure("rejection sampler exceeded its attempt cap");
    ++path.diagnostics.attempts;
    const PoissonMarks phi = draw_poisson(T, rate, rng);
    path.diagnostics.poisson_points += phi.times.size();

    path.knots.assign(1, Knot{0.0, x0, false});
    double x = x0;
    double prev = 0.0;
    bool rejected = false;
    for (std::size_t i = 0; i < phi.times.size(); ++i) {
      if (phi.times[i] <= prev) continue;
      BridgeSampler sampler(drift.params(), x, y, phi.times[i] - prev, T - prev, bridge);
      const BridgeDraw draw = sampler.sample(rng, &stats);
      x = draw.value;
      prev = phi.times[i];
      path.knots.push_back({prev, x, draw.used_approximation});
      if (drift.phi_tilde(x) - b.phi_minus > phi.marks[i]) {
        rejected = true;
        break;
      }
    }
    if (!rejected) break;
  }
  path.knots.push_back({T, y, false});
  path.diagnostics.coefficients = stats.coefficients;
  path.diagnostics.approx_fallbacks = stats.approx_fallbacks;
  path.diagnostics.rng_draws = rng.draws() - draws_before;
  path.diagnostics.wall_time = clock.seconds();
  return path;
}

double expected_points_bound(double T, const DriftSpec& drift) {
  require_time(T, "T");
  const PhiBounds& b = drift.bounds();
  const double spread = (b.phi_plus - b.phi_minus) * T;
  return spread * std::exp(spread + b.a_plus);
}

}  // namespace wfexact
