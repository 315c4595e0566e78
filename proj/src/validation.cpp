#include "wfexact/validation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "wfexact/error.hpp"
#include "wfexact/params.hpp"

namespace wfexact {

double reflected_bm_cdf(double a, double b, double t, int n_terms) {
  using std::numbers::pi;
  detail::require(a >= 0.0 && a <= pi, "start must lie in [0, pi]");
  detail::require(b >= 0.0 && b <= pi, "evaluation point must lie in [0, pi]");
  require_time(t);
  detail::require(n_terms >= 1, "n_terms must be >= 1");
  if (b == 0.0) return 0.0;
  if (b == pi) return 1.0;
  double acc = 0.0;
  for (int n = 1; n <= n_terms; ++n) {
    const double damp = std::exp(-0.5 * n * n * t);
    if (damp == 0.0) break;
    acc += damp * std::cos(n * a) * std::sin(n * b) / n;
  }
  return std::clamp(b / pi + 2.0 / pi * acc, 0.0, 1.0);
}

double reflected_wf_cdf(double x, double y, double t, int n_terms) {
  require_frequency(x);
  require_frequency(y, "y");
  return reflected_bm_cdf(std::acos(1.0 - 2.0 * x), std::acos(1.0 - 2.0 * y), t, n_terms);
}

double beta_cdf(double a, double b, double y) {
  if (y <= 0.0) return 0.0;
  if (y >= 1.0) return 1.0;
  return boost::math::ibeta(a, b, y);
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double acc = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    acc += (k % 2 == 1 ? term : -term);
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * acc, 0.0, 1.0);
}

std::string to_string(Reference r) {
  switch (r) {
    case Reference::reflected_bm: return "reflected_bm";
    case Reference::beta_stationary: return "beta_stationary";
    case Reference::brute_force_pmf: return "brute_force_pmf";
  }
  return "unknown";
}

double ks_statistic(std::span<const double> sorted, const std::function<double(double)>& cdf) {
  detail::require(!sorted.empty(), "K-S test needs a sample");
  detail::require(std::is_sorted(sorted.begin(), sorted.end()), "K-S sample must be sorted");
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

ValidationReport ks_validate(std::span<const double> sorted, const std::function<double(double)>& cdf,
                             Reference reference, std::size_t min_n) {
  detail::require(sorted.size() >= min_n, "K-S validation needs at least " + std::to_string(min_n) + " samples");
  ValidationReport r;
  r.n = sorted.size();
  r.reference = reference;
  r.ks_statistic = ks_statistic(sorted, cdf);
  r.p_value = kolmogorov_survival(std::sqrt(static_cast<double>(r.n)) * r.ks_statistic);
  return r;
}

TwoSampleKs ks_two_sample(std::vector<double> a, std::vector<double> b) {
  detail::require(!a.empty() && !b.empty(), "two-sample K-S needs two non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  return {d, kolmogorov_survival(std::sqrt(ne) * d)};
}

ChiSquareResult chi_square_test(std::span<const double> observed, std::span<const double> probabilities,
                                double min_expected) {
  detail::require(observed.size() == probabilities.size() && !observed.empty(),
                  "observed counts and probabilities must align");
  double n = 0.0;
  for (double o : observed) n += o;
  detail::require(n > 0.0, "chi-square test needs observations");

  std::vector<double> obs;
  std::vector<double> exp;
  double o_acc = 0.0;
  double e_acc = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    o_acc += observed[i];
    e_acc += n * probabilities[i];
    if (e_acc >= min_expected) {
      obs.push_back(o_acc);
      exp.push_back(e_acc);
      o_acc = e_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (exp.empty()) {
      obs.push_back(o_acc);
      exp.push_back(e_acc);
    } else {
      obs.back() += o_acc;
      exp.back() += e_acc;
    }
  }

  ChiSquareResult r;
  r.cells = obs.size();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double diff = obs[i] - exp[i];
    r.statistic += exp[i] > 0.0 ? diff * diff / exp[i] : (obs[i] > 0.0 ? HUGE_VAL : 0.0);
  }
  r.dof = static_cast<int>(obs.size()) - 1;
  if (r.dof < 1) {
    r.p_value = 1.0;
  } else if (!std::isfinite(r.statistic)) {
    r.p_value = 0.0;
  } else {
    r.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(r.dof), r.statistic));
  }
  return r;
}

double euler_baseline(double x0, double T, const DriftSpec& drift, double delta, Rng& rng) {
  require_frequency(x0, "x0");
  require_time(T, "T");
  detail::require(std::isfinite(delta) && delta > 0.0, "delta must be > 0");
  if (T < delta) return x0;
  const auto steps = static_cast<long>(std::llround(T / delta));
  const double dt = T / static_cast<double>(steps);
  const double lo = delta / 4.0;
  const double hi = 1.0 - delta / 4.0;
  const double sqdt = std::sqrt(dt);
  double x = x0;
  for (long i = 0; i < steps; ++i) {
    x += drift.gamma(x) * dt + std::sqrt(std::max(x * (1.0 - x), 0.0)) * sqdt * rng.normal();
    x = std::clamp(x, lo, hi);
  }
  return x;
}

}  // namespace wfexact
