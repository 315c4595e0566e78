#include "wfexact/random.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "wfexact/error.hpp"

namespace wfexact {
namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32), 0x5772u};
  return std::mt19937_64(seq);
}

// splitmix64 finalizer; keeps nested substreams apart from sibling indices.
std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : engine_(make_engine(seed, stream)), seed_(seed), stream_(stream) {}

Rng Rng::substream(std::uint64_t index) const { return Rng(seed_, mix(stream_, index)); }

double Rng::raw_uniform() {
  for (;;) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

double Rng::uniform() {
  ++draws_;
  return raw_uniform();
}

double Rng::normal(double mean, double sd) {
  ++draws_;
  return std::normal_distribution<double>(mean, sd)(engine_);
}

double Rng::raw_log_gamma(double shape) {
  detail::require(shape > 0.0 && std::isfinite(shape), "gamma shape must be > 0");
  if (shape >= 1.0) return std::log(std::gamma_distribution<double>(shape, 1.0)(engine_));
  // G(a) = G(a+1) U^{1/a}
  const double g = std::gamma_distribution<double>(shape + 1.0, 1.0)(engine_);
  return std::log(g) + std::log(raw_uniform()) / shape;
}

double Rng::log_gamma_variate(double shape) {
  ++draws_;
  return raw_log_gamma(shape);
}

double Rng::gamma(double shape) { return std::exp(log_gamma_variate(shape)); }

double Rng::beta(double a, double b) {
  ++draws_;
  const double la = raw_log_gamma(a);
  const double lb = raw_log_gamma(b);
  const double y = 1.0 / (1.0 + std::exp(lb - la));
  constexpr double lo = std::numeric_limits<double>::denorm_min();
  constexpr double hi = 1.0 - 0x1.0p-53;
  return y < lo ? lo : (y > hi ? hi : y);
}

long Rng::binomial(long n, double p) {
  detail::require(n >= 0 && p >= 0.0 && p <= 1.0, "binomial needs n >= 0, p in [0,1]");
  ++draws_;
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  return std::binomial_distribution<long>(n, p)(engine_);
}

long Rng::poisson(double mean) {
  detail::require(mean >= 0.0 && std::isfinite(mean), "poisson mean must be >= 0");
  ++draws_;
  if (mean == 0.0) return 0;
  return std::poisson_distribution<long>(mean)(engine_);
}

std::vector<long> Rng::multinomial(long n, std::span<const double> probs) {
  std::vector<long> counts(probs.size(), 0);
  double remaining_mass = std::accumulate(probs.begin(), probs.end(), 0.0);
  long remaining = n;
  for (std::size_t i = 0; i + 1 < probs.size() && remaining > 0; ++i) {
    double p = remaining_mass > 0.0 ? probs[i] / remaining_mass : 0.0;
    p = std::min(1.0, std::max(0.0, p));
    counts[i] = binomial(remaining, p);
    remaining -= counts[i];
    remaining_mass -= probs[i];
  }
  if (!probs.empty()) counts.back() += remaining;
  return counts;
}

std::vector<double> Rng::dirichlet(std::span<const double> alpha) {
  std::vector<double> logs(alpha.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    logs[i] = log_gamma_variate(alpha[i]);
    top = std::max(top, logs[i]);
  }
  double total = 0.0;
  for (double& l : logs) {
    l = std::exp(l - top);
    total += l;
  }
  for (double& l : logs) l /= total;
  return logs;
}

}  // namespace wfexact
