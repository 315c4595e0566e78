#pragma once

#include <span>
#include <vector>

#include "wfexact/ancestral.hpp"
#include "wfexact/params.hpp"
#include "wfexact/random.hpp"

namespace wfexact {

/// Point of the probability simplex: nonnegative weights summing to one.
class SimplexPoint {
 public:
  explicit SimplexPoint(std::vector<double> weights);

  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const { return weights_; }

  static constexpr double tolerance = 1e-12;

 private:
  std::vector<double> weights_;
};

/// Parent-independent mutation on d types, given as the weight vector
/// theta * P0 (so theta is the sum of the weights).
class MultiAlleleMutation {
 public:
  explicit MultiAlleleMutation(std::vector<double> theta_p0);
  static MultiAlleleMutation from_theta_and_base(double theta, const SimplexPoint& base);

  double theta() const { return theta_; }
  std::size_t types() const { return weights_.size(); }
  std::span<const double> weights() const { return weights_; }

 private:
  std::vector<double> weights_;
  double theta_;
};

/// Exact draws from the neutral transition law f(x, . ; t) for fixed t:
/// A(t) = m lineages, L ~ Binomial(m, x), Y ~ Beta(theta1 + L, theta2 + m - L).
class TransitionSampler {
 public:
  TransitionSampler(const MutationParams& params, double t, ApproxPolicy policy = {});

  double sample(double x, Rng& rng, SampleStats* stats = nullptr);
  /// Same draw, also reporting whether the Gaussian lineage count was used.
  double sample(double x, Rng& rng, SampleStats* stats, bool& used_approximation);

  const MutationParams& params() const { return params_; }
  LineageSampler& lineages() { return lineages_; }

 private:
  MutationParams params_;
  LineageSampler lineages_;
};

double sample_transition(const MutationParams& params, double x, double t,
                         const ApproxPolicy& policy, Rng& rng, SampleStats* stats = nullptr);

/// Beta(theta1, theta2), the stationary law.
double sample_stationary(const MutationParams& params, Rng& rng);

/// Finite-type Fleming-Viot transition: m lineages, type counts
/// n ~ Multinomial(m, mu), result ~ Dirichlet(theta P0 + n).
SimplexPoint sample_transition_multiallele(const MultiAlleleMutation& mutation,
                                           const SimplexPoint& mu, double t,
                                           const ApproxPolicy& policy, Rng& rng,
                                           SampleStats* stats = nullptr);

}  // namespace wfexact
