#pragma once

#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <vector>

#include "wfexact/params.hpp"

namespace wfexact {

// Coefficients of the lineage-count series
//
//   q_m(t) = sum_{k>=m} (-1)^{k-m} a_{km} exp(-k(k+theta-1)t/2),
//   a_{km} = (theta+2k-1) (theta+m)_{(k-1)} / (m! (k-m)!),
//
// with (a)_{(x)} = Gamma(a+x)/Gamma(a). Everything is evaluated in log space;
// a_{km} leaves double range near k = 150.

/// log a_{km}; requires k >= m >= 0.
double log_a_km(const MutationParams& params, int k, int m);

/// b_k(m) = a_{km} exp(-k(k+theta-1)t/2), formed as one exponential.
double b_coeff(const MutationParams& params, double t, int k, int m);

/// Smallest i >= 0 with b_{m+i+1}(m) < b_{m+i}(m). From that index on the
/// terms of column m decrease monotonically to zero.
int decay_start_C(const MutationParams& params, double t, int m,
                  std::int64_t max_iterations = 100'000'000);

/// Smallest integer k >= max(1/t - (theta+1)/2, 0) with
/// (theta+2k+1) exp(-(2k+theta)t/2) < 1 - eps. Every column beyond the eps=0
/// threshold decays from its first term.
int uniform_decay_threshold_C_eps(const MutationParams& params, double t, double eps);

namespace detail {
long double log_a_km(double theta, int k, int m);
/// log of b_{k+1}(m) / b_k(m)
long double log_b_ratio(double theta, double t, int k, int m);
int decay_start(double theta, double t, int m, std::int64_t max_iterations);
int c_eps(double theta, double t, double eps);
long double log_gamma(long double x);
}  // namespace detail

/// Neumaier-compensated running sum.
template <typename Real>
class KahanSum {
 public:
  KahanSum& operator+=(Real x) {
    const Real t = sum_ + x;
    if ((sum_ >= 0 ? sum_ : -sum_) >= (x >= 0 ? x : -x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
    return *this;
  }
  Real value() const { return sum_ + comp_; }

 private:
  Real sum_ = 0;
  Real comp_ = 0;
};

/// Append-only cache of log a_{km} for one theta. Concurrent readers take a
/// shared lock; insertion is serialized.
class CoefficientTable {
 public:
  explicit CoefficientTable(double theta);

  /// Process-wide table for `theta`, created on first use.
  static std::shared_ptr<CoefficientTable> shared(double theta);

  double theta() const { return theta_; }
  long double log_a(int k, int m);
  std::size_t size() const;

 private:
  double theta_;
  mutable std::shared_mutex mutex_;
  std::vector<std::vector<long double>> columns_;  // columns_[m][k - m]
};

struct Bracket {
  double lower = 0.0;
  double upper = 0.0;
};

/// Partial sums of the alternating series for q_m(t), one column per m,
/// extended on demand and kept for reuse. Not thread-safe; give each thread
/// its own instance (they can share the CoefficientTable).
class LineageSeries {
 public:
  LineageSeries(double theta, double t, std::shared_ptr<CoefficientTable> table = nullptr);
  LineageSeries(const MutationParams& params, double t,
                std::shared_ptr<CoefficientTable> table = nullptr)
      : LineageSeries(params.theta(), t, std::move(table)) {}

  double theta() const { return theta_; }
  double t() const { return t_; }

  int decay_start(int m);
  /// Refinement depth from which bracket(m, depth) is certified.
  int burn_in(int m) { return (decay_start(m) + 1) / 2; }

  long double log_term(int m, int i);
  long double term(int m, int i);
  /// sum_{i=0}^{n} (-1)^i b_{m+i}(m)
  long double partial_sum(int m, int n);
  /// (S_{2d+1}, S_{2d}); requires 2 * depth >= decay_start(m).
  Bracket bracket(int m, int depth);

  /// Distinct coefficients evaluated so far by this instance.
  std::uint64_t terms_computed() const { return terms_computed_; }

  std::int64_t max_decay_iterations = 100'000'000;

 private:
  struct Column {
    std::vector<long double> log_terms;
    std::vector<long double> partial;
    KahanSum<long double> running;
    int decay = -1;
  };

  Column& column(int m);
  void extend(int m, int n);

  double theta_;
  double t_;
  std::shared_ptr<CoefficientTable> table_;
  std::vector<Column> columns_;
  std::uint64_t terms_computed_ = 0;
};

}  // namespace wfexact
