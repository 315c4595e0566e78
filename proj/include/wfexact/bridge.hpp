#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "wfexact/ancestral.hpp"
#include "wfexact/params.hpp"
#include "wfexact/random.hpp"
#include "wfexact/refinable_sampler.hpp"
#include "wfexact/series.hpp"

namespace wfexact {

/// Mixture index (m, k, l, j) of the bridge law: m lineages back from the
/// bridge point to the start, k forward to the end, l of the m carry allele 1,
/// j of the k carry allele 1.
struct BridgeIndex {
  std::int64_t m = 0;
  std::int64_t k = 0;
  std::int64_t l = 0;
  std::int64_t j = 0;

  bool valid() const { return m >= 0 && k >= 0 && l >= 0 && j >= 0 && l <= m && j <= k; }
  friend auto operator<=>(const BridgeIndex&, const BridgeIndex&) = default;
};

struct DensityBracket {
  double lower = 0.0;
  double upper = 0.0;
  int depth = 0;
};

/// x/z + (1-x)/(1-z); bounds the growth of the binomial-beta expectation
/// from m to m+1 lineages.
double K_factor(double x, double z);

/// Pointwise neutral transition density f(x, z; t) as the alternating series
/// of antidiagonal sums d_0 - d_1 + d_2 - ..., where
///   d_i = sum_{m <= i/2} b_{i-m}(m) E[D_{theta1+L_m, theta2+m-L_m}(z)],
/// L_m ~ Binomial(m, x) and D the beta density.
class TransitionDensity {
 public:
  TransitionDensity(const MutationParams& params, double x, double z, double t);

  const MutationParams& params() const { return params_; }
  double x() const { return x_; }
  double z() const { return z_; }
  double t() const { return t_; }

  /// log E[D_{theta1+L_m, theta2+m-L_m}(z)]
  long double log_binomial_beta(int m);
  long double log_c(int k, int m);
  long double log_d(int i);
  double d(int i) { return static_cast<double>(std::exp(log_d(i))); }
  /// sum_{i=0}^{n} (-1)^i d_i
  long double partial_sum(int n);

  /// inf{ n >= 0 : 2j >= C_{n-j} for j = 0..n } at time t.
  int D_threshold();
  /// Bound K_m with E_{m+1} <= K_m E_m (E_m as in log_binomial_beta); tends
  /// to K(x,z) as m grows. Infinite while theta1 + m z <= 1.
  double ratio_bound(int m) const;
  /// Smallest M >= D v C_eps v ceil(2K/eps) with 2 K_m/(m+1) < eps for all
  /// m >= M: antidiagonals decrease from index 2*this on.
  int decay_threshold(double eps);

  /// Bounds (S_{2w+1}, S_{2w}) at depth w; certified once 2w+1 >= 2*decay_threshold(eps).
  DensityBracket bracket(int depth);
  /// Refine until the relative gap is below rel_tol; returns the midpoint.
  double evaluate(double eps, double rel_tol = 1e-13);

  LineageSeries& series() { return series_; }

 private:
  MutationParams params_;
  double x_;
  double z_;
  double t_;
  LineageSeries series_;
  std::vector<long double> log_e_;
  std::vector<long double> log_d_;
  std::vector<long double> partial_;
  KahanSum<long double> running_;
  std::optional<int> d_threshold_;
};

/// Threshold E for index (m, k): C_m(s) v C_k(t-s) v the antidiagonal decay
/// threshold of f(x,z;t) at eps.
int E_threshold(const MutationParams& params, double x, double z, double s, double t, double eps,
                std::int64_t m, std::int64_t k);

/// Order in which the alternating-series inversion walks the bridge mixture.
enum class BridgeOrder {
  /// Blocks (m, k) in square rings around the predicted mode; (l, j) drawn
  /// exactly from the finite conditional once the block is resolved.
  block_radiating,
  /// Every 4-tuple individually, by increasing m+k+l+j, lexicographic within
  /// a shell.
  shell,
};

struct BridgeOptions {
  /// Epsilon of the antidiagonal decay threshold. Empty picks the value on a
  /// 1/200 grid in (0,1) that minimises the threshold.
  std::optional<double> eps;
  ApproxPolicy policy;
  BridgeOrder order = BridgeOrder::block_radiating;
  RefinementOptions refinement;
  int max_uniform_retries = 16;
  /// Proposal cap for the approximate (short-gap) bridge.
  std::int64_t max_approx_proposals = 10'000'000;
};

struct BridgeDraw {
  double value = 0.0;
  bool used_approximation = false;
  std::optional<BridgeIndex> index;  ///< set on the exact path
};

/// Exact sampler for the neutral bridge point X_s given X_0 = x, X_t = z,
/// 0 < s < t, interior x and z.
class BridgeSampler {
 public:
  BridgeSampler(const MutationParams& params, double x, double z, double s, double t,
                BridgeOptions options = {});

  double eps() const { return eps_; }
  bool exact() const { return exact_; }

  /// Log of B_{m,x}(l) D_{theta1+j,theta2+k-j}(z) DM_{theta1+l,theta2+m-l;k}(j),
  /// the closed-form part of the mixture weight.
  double log_closed_form(const BridgeIndex& idx);
  /// Sum of the closed-form part over l <= m, j <= k.
  double block_closed_form(std::int64_t m, std::int64_t k);

  /// Certification threshold E for (m, k) with this sampler's eps.
  int E_threshold(std::int64_t m, std::int64_t k);
  /// Depth from which weight_bounds is certified for (m, k).
  int burn_in(std::int64_t m, std::int64_t k);

  /// Closed-form factor times [partial q_m(s)][partial q_k(t-s)] /
  /// [partial f(x,z;t)], numerators summed to index v and the denominator to
  /// v+1. Unclamped, so only a bound once every factor is on its certified
  /// side; weight_bounds is the certified form.
  double weight_estimate(const BridgeIndex& idx, int v);
  /// Certified (lower, upper) bracket on the mixture weight at depth w:
  /// lower from v = 2w+1, upper from v = 2w; lower numerators clamped at 0.
  DensityBracket weight_bounds(const BridgeIndex& idx, int depth);

  BridgeIndex sample_index(Rng& rng, SampleStats* stats = nullptr);
  BridgeDraw sample(Rng& rng, SampleStats* stats = nullptr);
  double sample_point(Rng& rng, SampleStats* stats = nullptr) { return sample(rng, stats).value; }

  /// Inversion of one uniform in shell order (exact sampler over N^4).
  RefinedDraw<BridgeIndex> invert_shell(double u);
  /// Inversion of one uniform over (m, k) blocks.
  RefinedDraw<std::pair<std::int64_t, std::int64_t>> invert_blocks(double u);

  TransitionDensity& denominator() { return density_; }

 private:
  Bracket numerator_bracket(LineageSeries& series, std::int64_t index, int lower_terms, int upper_terms);
  DensityBracket block_bounds(std::int64_t m, std::int64_t k, int depth);
  const std::vector<double>& block_cells(std::int64_t m, std::int64_t k);
  BridgeIndex draw_within_block(std::int64_t m, std::int64_t k, Rng& rng);
  double sample_approximate(Rng& rng, SampleStats* stats);
  void ensure_tables(std::int64_t n);

  MutationParams params_;
  double x_, z_, s_, t_;
  BridgeOptions options_;
  bool exact_;
  double eps_ = 0.5;
  LineageSeries qs_;
  LineageSeries qts_;
  TransitionDensity density_;
  int denominator_threshold_ = -1;
  LineageMoments mode_s_;
  LineageMoments mode_ts_;
  // lgamma(theta1+n), lgamma(theta2+n), lgamma(theta+n), lgamma(n+1)
  std::vector<double> lg1_, lg2_, lgt_, lfact_;
  std::map<std::pair<std::int64_t, std::int64_t>, double> block_cache_;
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<double>> cell_cache_;
};

BridgeIndex sample_bridge_index(const MutationParams& params, double x, double z, double s, double t,
                                Rng& rng, const BridgeOptions& options = {});
double sample_bridge_point(const MutationParams& params, double x, double z, double s, double t,
                           Rng& rng, const BridgeOptions& options = {}, SampleStats* stats = nullptr);

struct Knot {
  double time = 0.0;
  double value = 0.0;
  bool approximate = false;
};

/// Insert exact bridge draws at `new_times` (in the order given), each
/// conditioned on its two neighbouring knots. Existing knots are unchanged;
/// the result is sorted by time.
std::vector<Knot> fill_bridge(std::vector<Knot> skeleton, const std::vector<double>& new_times,
                              const MutationParams& params, Rng& rng,
                              const BridgeOptions& options = {}, SampleStats* stats = nullptr);

}  // namespace wfexact
