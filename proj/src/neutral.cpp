#include "wfexact/neutral.hpp"

#include <cmath>
#include <numeric>

namespace wfexact {

SimplexPoint::SimplexPoint(std::vector<double> weights) : weights_(std::move(weights)) {
  detail::require(!weights_.empty(), "simplex point needs at least one coordinate");
  double total = 0.0;
  for (double w : weights_) {
    detail::require(std::isfinite(w) && w >= 0.0, "simplex weights must be >= 0");
    total += w;
  }
  detail::require(std::abs(total - 1.0) <= tolerance, "simplex weights must sum to 1");
}

MultiAlleleMutation::MultiAlleleMutation(std::vector<double> theta_p0) : weights_(std::move(theta_p0)) {
  detail::require(weights_.size() >= 2, "need at least two types");
  for (double w : weights_) detail::require(std::isfinite(w) && w > 0.0, "mutation weights must be > 0");
  theta_ = std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

MultiAlleleMutation MultiAlleleMutation::from_theta_and_base(double theta, const SimplexPoint& base) {
  detail::require(theta > 0.0, "theta must be > 0");
  std::vector<double> w(base.weights().begin(), base.weights().end());
  for (double& v : w) v *= theta;
  return MultiAlleleMutation(std::move(w));
}

TransitionSampler::TransitionSampler(const MutationParams& params, double t, ApproxPolicy policy)
    : params_(params), lineages_(params, t, policy) {}

double TransitionSampler::sample(double x, Rng& rng, SampleStats* stats, bool& used_approximation) {
  require_frequency(x);
  const LineageDraw lineages = lineages_.sample(rng, stats);
  used_approximation = lineages.used_approximation;
  const std::int64_t m = lineages.count;
  const std::int64_t l = rng.binomial(m, x);
  return rng.beta(params_.theta1() + static_cast<double>(l), params_.theta2() + static_cast<double>(m - l));
}

double TransitionSampler::sample(double x, Rng& rng, SampleStats* stats) {
  bool ignored = false;
  return sample(x, rng, stats, ignored);
}

double sample_transition(const MutationParams& params, double x, double t, const ApproxPolicy& policy,
                         Rng& rng, SampleStats* stats) {
  TransitionSampler sampler(params, t, policy);
  return sampler.sample(x, rng, stats);
}

double sample_stationary(const MutationParams& params, Rng& rng) {
  return rng.beta(params.theta1(), params.theta2());
}

SimplexPoint sample_transition_multiallele(const MultiAlleleMutation& mutation, const SimplexPoint& mu,
                                           double t, const ApproxPolicy& policy, Rng& rng,
                                           SampleStats* stats) {
  detail::require(mu.size() == mutation.types(), "mu and mutation weights differ in dimension");
  LineageSampler lineages(mutation.theta(), t, policy);
  const std::int64_t m = lineages.sample(rng, stats).count;
  const std::vector<long> counts = rng.multinomial(m, mu.weights());
  std::vector<double> alpha(mutation.weights().begin(), mutation.weights().end());
  for (std::size_t i = 0; i < alpha.size(); ++i) alpha[i] += static_cast<double>(counts[i]);
  return SimplexPoint(rng.dirichlet(alpha));
}

}  // namespace wfexact
