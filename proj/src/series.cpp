#include "wfexact/series.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace wfexact {
namespace detail {

long double log_gamma(long double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgammal_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

long double log_a_km(double theta, int k, int m) {
  require(k >= m && m >= 0, "log_a_km needs k >= m >= 0");
  if (k == 0) return 0.0L;  // (theta-1) Gamma(theta-1)/Gamma(theta) = 1
  const long double th = theta;
  return std::log(th + 2 * k - 1) + log_gamma(th + m + k - 1) - log_gamma(th + m) -
         log_gamma(static_cast<long double>(m) + 1) -
         log_gamma(static_cast<long double>(k - m) + 1);
}

long double log_b_ratio(double theta, double t, int k, int m) {
  const long double th = theta;
  const long double decay = (2.0L * k + th) * t / 2.0L;
  if (k == 0) return std::log(th + 1) - decay;
  return std::log(th + m + k - 1) - std::log(static_cast<long double>(k - m + 1)) +
         std::log(th + 2 * k + 1) - std::log(th + 2 * k - 1) - decay;
}

int decay_start(double theta, double t, int m, std::int64_t max_iterations) {
  require(m >= 0, "m must be >= 0");
  require_time(t);
  for (std::int64_t i = 0; i < max_iterations; ++i) {
    if (log_b_ratio(theta, t, m + static_cast<int>(i), m) < 0.0L) return static_cast<int>(i);
  }
  throw ExactModeFailure("decay of series coefficients not reached within the iteration cap; "
                         "t is too small for exact mode");
}

int c_eps(double theta, double t, double eps) {
  require_time(t);
  require(eps >= 0.0 && eps < 1.0, "eps must lie in [0,1)");
  const double lower = std::max(1.0 / t - (theta + 1.0) / 2.0, 0.0);
  auto k = static_cast<long>(std::ceil(lower));
  const double target = std::log1p(-eps);
  while (std::log(theta + 2.0 * k + 1.0) - (2.0 * k + theta) * t / 2.0 >= target) ++k;
  return static_cast<int>(k);
}

}  // namespace detail

double log_a_km(const MutationParams& params, int k, int m) {
  return static_cast<double>(detail::log_a_km(params.theta(), k, m));
}

double b_coeff(const MutationParams& params, double t, int k, int m) {
  require_time(t);
  const long double th = params.theta();
  const long double exponent = detail::log_a_km(params.theta(), k, m) -
                               static_cast<long double>(k) * (k + th - 1) * t / 2.0L;
  return static_cast<double>(std::exp(exponent));
}

int decay_start_C(const MutationParams& params, double t, int m, std::int64_t max_iterations) {
  return detail::decay_start(params.theta(), t, m, max_iterations);
}

int uniform_decay_threshold_C_eps(const MutationParams& params, double t, double eps) {
  return detail::c_eps(params.theta(), t, eps);
}

CoefficientTable::CoefficientTable(double theta) : theta_(theta) {
  detail::require(theta > 0.0, "theta must be > 0");
}

std::shared_ptr<CoefficientTable> CoefficientTable::shared(double theta) {
  static std::mutex registry_mutex;
  static std::map<double, std::shared_ptr<CoefficientTable>> registry;
  std::lock_guard lock(registry_mutex);
  auto& slot = registry[theta];
  if (!slot) slot = std::make_shared<CoefficientTable>(theta);
  return slot;
}

long double CoefficientTable::log_a(int k, int m) {
  detail::require(k >= m && m >= 0, "log_a needs k >= m >= 0");
  const auto mi = static_cast<std::size_t>(m);
  const auto offset = static_cast<std::size_t>(k - m);
  {
    std::shared_lock lock(mutex_);
    if (mi < columns_.size() && offset < columns_[mi].size()) return columns_[mi][offset];
  }
  std::unique_lock lock(mutex_);
  if (columns_.size() <= mi) columns_.resize(mi + 1);
  auto& col = columns_[mi];
  while (col.size() <= offset)
    col.push_back(detail::log_a_km(theta_, m + static_cast<int>(col.size()), m));
  return col[offset];
}

std::size_t CoefficientTable::size() const {
  std::shared_lock lock(mutex_);
  std::size_t n = 0;
  for (const auto& col : columns_) n += col.size();
  return n;
}

LineageSeries::LineageSeries(double theta, double t, std::shared_ptr<CoefficientTable> table)
    : theta_(theta), t_(t), table_(std::move(table)) {
  detail::require(theta > 0.0, "theta must be > 0");
  require_time(t);
  if (!table_) table_ = CoefficientTable::shared(theta);
  detail::require(table_->theta() == theta, "coefficient table built for a different theta");
}

LineageSeries::Column& LineageSeries::column(int m) {
  detail::require(m >= 0, "m must be >= 0");
  if (columns_.size() <= static_cast<std::size_t>(m)) columns_.resize(static_cast<std::size_t>(m) + 1);
  return columns_[static_cast<std::size_t>(m)];
}

void LineageSeries::extend(int m, int n) {
  Column& col = column(m);
  const long double th = theta_;
  while (static_cast<int>(col.log_terms.size()) <= n) {
    const int i = static_cast<int>(col.log_terms.size());
    const int k = m + i;
    const long double lt = table_->log_a(k, m) - static_cast<long double>(k) * (k + th - 1) * t_ / 2.0L;
    if (std::isnan(lt)) throw ExactModeFailure("non-finite series coefficient");
    col.log_terms.push_back(lt);
    const long double b = std::exp(lt);
    col.running += (i % 2 == 0) ? b : -b;
    col.partial.push_back(col.running.value());
    ++terms_computed_;
  }
}

int LineageSeries::decay_start(int m) {
  Column& col = column(m);
  if (col.decay < 0) col.decay = detail::decay_start(theta_, t_, m, max_decay_iterations);
  return col.decay;
}

long double LineageSeries::log_term(int m, int i) {
  extend(m, i);
  return columns_[static_cast<std::size_t>(m)].log_terms[static_cast<std::size_t>(i)];
}

long double LineageSeries::term(int m, int i) { return std::exp(log_term(m, i)); }

long double LineageSeries::partial_sum(int m, int n) {
  detail::require(n >= 0, "partial sum length must be >= 0");
  extend(m, n);
  return columns_[static_cast<std::size_t>(m)].partial[static_cast<std::size_t>(n)];
}

Bracket LineageSeries::bracket(int m, int depth) {
  detail::require(2 * depth >= decay_start(m), "bracket depth below the certified threshold");
  return {static_cast<double>(partial_sum(m, 2 * depth + 1)),
          static_cast<double>(partial_sum(m, 2 * depth))};
}

}  // namespace wfexact
