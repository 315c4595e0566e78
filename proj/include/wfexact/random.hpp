#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace wfexact {

/// Seedable generator with cheap, reproducible substreams.
///
/// Substreams are keyed by (seed, stream) through std::seed_seq, so output for
/// a given (seed, index) pair does not depend on how work is split across
/// threads. Every variate drawn through the member samplers is counted, which
/// is what the diagnostics report as "random variables generated".
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Independent generator for substream `index` of this one.
  Rng substream(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t draws() const { return draws_; }

  /// Uniform on the open interval (0,1).
  double uniform();
  double normal(double mean = 0.0, double sd = 1.0);
  /// log of a Gamma(shape, 1) variate; stays finite for tiny shapes where the
  /// variate itself underflows.
  double log_gamma_variate(double shape);
  double gamma(double shape);
  /// Beta(a, b), computed from log-gamma variates and kept representable
  /// inside the open interval (0,1).
  double beta(double a, double b);
  long binomial(long n, double p);
  long poisson(double mean);
  std::vector<long> multinomial(long n, std::span<const double> probs);
  std::vector<double> dirichlet(std::span<const double> alpha);

 private:
  double raw_uniform();
  double raw_log_gamma(double shape);

  std::mt19937_64 engine_;
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t draws_ = 0;
};

}  // namespace wfexact
