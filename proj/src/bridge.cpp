#include "wfexact/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wfexact/log.hpp"
#include "wfexact/neutral.hpp"

namespace wfexact {
namespace {

using detail::log_gamma;

long double log_sum_exp(const std::vector<long double>& v) {
  long double hi = -std::numeric_limits<long double>::infinity();
  for (long double x : v) hi = std::max(hi, x);
  if (!std::isfinite(hi)) return hi;
  KahanSum<long double> acc;
  for (long double x : v) acc += std::exp(x - hi);
  return hi + std::log(acc.value());
}

// log Beta(a, b)
long double log_beta_fn(long double a, long double b) {
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

// l log p with 0 log 0 = 0
long double xlogy(long double l, long double p) { return l == 0 ? 0.0L : l * std::log(p); }

constexpr double kInfiniteUpper = 1e300;

double choose_eps(TransitionDensity& density) {
  double best = 0.5;
  int best_cost = std::numeric_limits<int>::max();
  for (int i = 1; i < 200; ++i) {
    const double eps = i / 200.0;
    const int cost = density.decay_threshold(eps);
    if (cost < best_cost) {
      best_cost = cost;
      best = eps;
    }
  }
  return best;
}

// (m, k) in square rings of growing Chebyshev radius around a center.
class RingOrder {
 public:
  RingOrder(std::int64_t cm, std::int64_t ck) : cm_(std::max<std::int64_t>(cm, 0)), ck_(std::max<std::int64_t>(ck, 0)) {}

  std::pair<std::int64_t, std::int64_t> operator()() {
    while (pos_ >= ring_.size()) fill_next_ring();
    return ring_[pos_++];
  }

 private:
  void fill_next_ring() {
    ring_.clear();
    pos_ = 0;
    const std::int64_t r = radius_++;
    for (std::int64_t dm = -r; dm <= r; ++dm) {
      const std::int64_t m = cm_ + dm;
      if (m < 0) continue;
      const bool edge = dm == -r || dm == r;
      for (std::int64_t dk = -r; dk <= r; dk += (edge || r == 0) ? 1 : 2 * r) {
        const std::int64_t k = ck_ + dk;
        if (k >= 0) ring_.emplace_back(m, k);
      }
    }
  }

  std::int64_t cm_, ck_;
  std::int64_t radius_ = 0;
  std::vector<std::pair<std::int64_t, std::int64_t>> ring_;
  std::size_t pos_ = 0;
};

// 4-tuples by increasing m+k+l+j, lexicographic within a shell.
class ShellOrder {
 public:
  BridgeIndex operator()() {
    while (pos_ >= shell_.size()) fill_next_shell();
    return shell_[pos_++];
  }

 private:
  void fill_next_shell() {
    shell_.clear();
    pos_ = 0;
    const std::int64_t total = total_++;
    for (std::int64_t m = 0; m <= total; ++m)
      for (std::int64_t k = 0; m + k <= total; ++k)
        for (std::int64_t l = 0; l <= m && m + k + l <= total; ++l) {
          const std::int64_t j = total - m - k - l;
          if (j <= k) shell_.push_back({m, k, l, j});
        }
  }

  std::int64_t total_ = 0;
  std::vector<BridgeIndex> shell_;
  std::size_t pos_ = 0;
};

}  // namespace

double K_factor(double x, double z) {
  require_frequency(x);
  require_interior(z, "z");
  return x / z + (1.0 - x) / (1.0 - z);
}

TransitionDensity::TransitionDensity(const MutationParams& params, double x, double z, double t)
    : params_(params), x_(x), z_(z), t_(t), series_(params, t) {
  require_frequency(x);
  require_interior(z, "z");
  require_time(t);
}

long double TransitionDensity::log_binomial_beta(int m) {
  detail::require(m >= 0, "m must be >= 0");
  const long double th1 = params_.theta1();
  const long double th2 = params_.theta2();
  const long double lz = std::log(static_cast<long double>(z_));
  const long double l1z = std::log1p(-static_cast<long double>(z_));
  while (static_cast<int>(log_e_.size()) <= m) {
    const int n = static_cast<int>(log_e_.size());
    std::vector<long double> terms;
    terms.reserve(static_cast<std::size_t>(n) + 1);
    const long double lfn = log_gamma(n + 1.0L);
    for (int l = 0; l <= n; ++l) {
      if ((x_ == 0.0 && l > 0) || (x_ == 1.0 && l < n)) continue;
      const long double log_binom = lfn - log_gamma(l + 1.0L) - log_gamma(n - l + 1.0L) +
                                    xlogy(l, x_) + xlogy(n - l, 1.0L - x_);
      const long double a = th1 + l;
      const long double b = th2 + n - l;
      const long double log_dens = (a - 1) * lz + (b - 1) * l1z - log_beta_fn(a, b);
      terms.push_back(log_binom + log_dens);
    }
    log_e_.push_back(log_sum_exp(terms));
  }
  return log_e_[static_cast<std::size_t>(m)];
}

long double TransitionDensity::log_c(int k, int m) {
  detail::require(k >= m && m >= 0, "log_c needs k >= m >= 0");
  return series_.log_term(m, k - m) + log_binomial_beta(m);
}

long double TransitionDensity::log_d(int i) {
  detail::require(i >= 0, "antidiagonal index must be >= 0");
  while (static_cast<int>(log_d_.size()) <= i) {
    const int n = static_cast<int>(log_d_.size());
    std::vector<long double> terms;
    for (int m = 0; m <= n / 2; ++m) terms.push_back(log_c(n - m, m));
    log_d_.push_back(log_sum_exp(terms));
  }
  return log_d_[static_cast<std::size_t>(i)];
}

long double TransitionDensity::partial_sum(int n) {
  detail::require(n >= 0, "partial sum length must be >= 0");
  while (static_cast<int>(partial_.size()) <= n) {
    const int i = static_cast<int>(partial_.size());
    const long double d = std::exp(log_d(i));
    running_ += (i % 2 == 0) ? d : -d;
    partial_.push_back(running_.value());
  }
  return partial_[static_cast<std::size_t>(n)];
}

int TransitionDensity::D_threshold() {
  if (d_threshold_) return *d_threshold_;
  for (int n = 0;; ++n) {
    bool ok = true;
    for (int j = 0; j <= n && ok; ++j) ok = 2 * j >= series_.decay_start(n - j);
    if (ok) {
      d_threshold_ = n;
      return n;
    }
    if (n > 10'000'000) throw ExactModeFailure("antidiagonal decay threshold not found");
  }
}

double TransitionDensity::ratio_bound(int m) const {
  // Split L_{m+1} at floor(mz): below it compare with L_m = l, above it with
  // L_m = l - 1. The per-l ratios are bounded by the two terms below; both
  // tend to the K(x,z) pieces, but for small m they can exceed them.
  const double th = params_.theta();
  const double mm = static_cast<double>(m);
  const double low = (1.0 - x_) * (th + mm) / (params_.theta2() + mm * (1.0 - z_));
  if (x_ == 0.0) return low;
  const double denom = params_.theta1() + mm * z_ - 1.0;
  if (m == 0 || denom <= 0.0) return std::numeric_limits<double>::infinity();
  return low + x_ * (mm + 1.0) * (th + mm) / (mm * denom);
}

int TransitionDensity::decay_threshold(double eps) {
  detail::require(eps > 0.0 && eps < 1.0, "eps must lie in (0,1)");
  const double k_term = std::ceil(2.0 * K_factor(x_, z_) / eps);
  detail::require(k_term < 1e8, "x/z too extreme for the antidiagonal threshold");
  int m = std::max({D_threshold(), detail::c_eps(params_.theta(), t_, eps), static_cast<int>(k_term)});
  // 2 K_m/(m+1) decreases in m once theta1 + m z > 1 and m >= theta2/(1-z);
  // from there the first m meeting the bound is good for all larger m.
  const double monotone_from =
      std::max({1.0, params_.theta2() / (1.0 - z_), (1.0 - params_.theta1()) / z_ + 1.0});
  m = std::max(m, static_cast<int>(std::ceil(monotone_from)));
  while (!(2.0 * ratio_bound(m) / (m + 1.0) < eps)) {
    ++m;
    detail::require(m < 100'000'000, "antidiagonal threshold out of range");
  }
  return m;
}

DensityBracket TransitionDensity::bracket(int depth) {
  detail::require(depth >= 0, "depth must be >= 0");
  return {static_cast<double>(partial_sum(2 * depth + 1)), static_cast<double>(partial_sum(2 * depth)),
          depth};
}

double TransitionDensity::evaluate(double eps, double rel_tol) {
  const int start = decay_threshold(eps);
  double last_gap = std::numeric_limits<double>::infinity();
  int stagnant = 0;
  for (int w = start;; ++w) {
    const DensityBracket br = bracket(w);
    const double mid = 0.5 * (br.lower + br.upper);
    const double gap = br.upper - br.lower;
    if (gap <= rel_tol * std::abs(mid)) return mid;
    if (gap >= last_gap && ++stagnant > 8) return mid;
    last_gap = gap;
    if (w > start + 100'000) throw ExactModeFailure("transition density series did not converge");
  }
}

int E_threshold(const MutationParams& params, double x, double z, double s, double t, double eps,
                std::int64_t m, std::int64_t k) {
  require_interior(x);
  require_interior(z, "z");
  detail::require(s > 0.0 && s < t, "need 0 < s < t");
  TransitionDensity density(params, x, z, t);
  const int cm = detail::decay_start(params.theta(), s, static_cast<int>(m), 100'000'000);
  const int ck = detail::decay_start(params.theta(), t - s, static_cast<int>(k), 100'000'000);
  return std::max({cm, ck, density.decay_threshold(eps)});
}

BridgeSampler::BridgeSampler(const MutationParams& params, double x, double z, double s, double t,
                             BridgeOptions options)
    : params_(params),
      x_(x),
      z_(z),
      s_(s),
      t_(t),
      options_(std::move(options)),
      exact_(false),
      qs_(params, s > 0.0 ? s : 1.0),
      qts_(params, (t > s && s > 0.0) ? t - s : 1.0),
      density_(params, x, z, t) {
  require_interior(x);
  require_interior(z, "z");
  require_time(s, "s");
  detail::require(std::isfinite(t) && s < t, "need 0 < s < t");
  options_.policy.validate();
  exact_ = options_.policy.use_exact(std::min(s, t - s));
  if (options_.eps) {
    detail::require(*options_.eps > 0.0 && *options_.eps < 1.0, "eps must lie in (0,1)");
    eps_ = *options_.eps;
  } else {
    eps_ = choose_eps(density_);
  }
  mode_s_ = gaussian_lineage_moments(params_, s_);
  mode_ts_ = gaussian_lineage_moments(params_, t_ - s_);
}

void BridgeSampler::ensure_tables(std::int64_t n) {
  const double th1 = params_.theta1();
  const double th2 = params_.theta2();
  const double th = params_.theta();
  while (static_cast<std::int64_t>(lfact_.size()) <= n) {
    const double i = static_cast<double>(lfact_.size());
    lg1_.push_back(std::lgamma(th1 + i));
    lg2_.push_back(std::lgamma(th2 + i));
    lgt_.push_back(std::lgamma(th + i));
    lfact_.push_back(std::lgamma(i + 1.0));
  }
}

double BridgeSampler::log_closed_form(const BridgeIndex& idx) {
  detail::require(idx.valid(), "invalid bridge index");
  const auto [m, k, l, j] = idx;
  ensure_tables(m + k);
  const double th1 = params_.theta1();
  const double th2 = params_.theta2();
  auto lf = [this](std::int64_t n) { return lfact_[static_cast<std::size_t>(n)]; };
  auto g1 = [this](std::int64_t n) { return lg1_[static_cast<std::size_t>(n)]; };
  auto g2 = [this](std::int64_t n) { return lg2_[static_cast<std::size_t>(n)]; };
  auto gt = [this](std::int64_t n) { return lgt_[static_cast<std::size_t>(n)]; };

  const double log_binom = lf(m) - lf(l) - lf(m - l) + l * std::log(x_) + (m - l) * std::log1p(-x_);
  const double log_beta_dens = (th1 + j - 1) * std::log(z_) + (th2 + k - j - 1) * std::log1p(-z_) -
                               (g1(j) + g2(k - j) - gt(k));
  const double log_dirichlet_mult = lf(k) - lf(j) - lf(k - j) + (g1(l + j) + g2(m - l + k - j) - gt(m + k)) -
                                    (g1(l) + g2(m - l) - gt(m));
  return log_binom + log_beta_dens + log_dirichlet_mult;
}

const std::vector<double>& BridgeSampler::block_cells(std::int64_t m, std::int64_t k) {
  const auto key = std::make_pair(m, k);
  auto it = cell_cache_.find(key);
  if (it != cell_cache_.end()) return it->second;
  std::vector<double> cells;
  cells.reserve(static_cast<std::size_t>((m + 1) * (k + 1)));
  for (std::int64_t l = 0; l <= m; ++l)
    for (std::int64_t j = 0; j <= k; ++j) cells.push_back(std::exp(log_closed_form({m, k, l, j})));
  return cell_cache_.emplace(key, std::move(cells)).first->second;
}

double BridgeSampler::block_closed_form(std::int64_t m, std::int64_t k) {
  const auto key = std::make_pair(m, k);
  auto it = block_cache_.find(key);
  if (it != block_cache_.end()) return it->second;
  KahanSum<double> acc;
  for (double c : block_cells(m, k)) acc += c;
  return block_cache_.emplace(key, acc.value()).first->second;
}

int BridgeSampler::E_threshold(std::int64_t m, std::int64_t k) {
  return std::max({qs_.decay_start(static_cast<int>(m)), qts_.decay_start(static_cast<int>(k)),
                   density_.decay_threshold(eps_)});
}

int BridgeSampler::burn_in(std::int64_t m, std::int64_t k) {
  if (denominator_threshold_ < 0) denominator_threshold_ = density_.decay_threshold(eps_);
  return std::max({qs_.burn_in(static_cast<int>(m)), qts_.burn_in(static_cast<int>(k)),
                   std::max(denominator_threshold_ - 1, 0)});
}

double BridgeSampler::weight_estimate(const BridgeIndex& idx, int v) {
  detail::require(v >= 0, "v must be >= 0");
  const long double num = qs_.partial_sum(static_cast<int>(idx.m), v) *
                          qts_.partial_sum(static_cast<int>(idx.k), v);
  const long double den = density_.partial_sum(v + 1);
  return static_cast<double>(std::exp(static_cast<long double>(log_closed_form(idx))) * num / den);
}

Bracket BridgeSampler::numerator_bracket(LineageSeries& series, std::int64_t index, int lower_terms,
                                         int upper_terms) {
  const int m = static_cast<int>(index);
  const double lower = static_cast<double>(series.partial_sum(m, lower_terms));
  const double upper = static_cast<double>(series.partial_sum(m, upper_terms));
  return {std::max(lower, 0.0), upper};
}

DensityBracket BridgeSampler::block_bounds(std::int64_t m, std::int64_t k, int depth) {
  const Bracket ns = numerator_bracket(qs_, m, 2 * depth + 1, 2 * depth);
  const Bracket nt = numerator_bracket(qts_, k, 2 * depth + 1, 2 * depth);
  const double den_lower = static_cast<double>(density_.partial_sum(2 * depth + 1));
  const double den_upper = static_cast<double>(density_.partial_sum(2 * depth + 2));
  const double g = block_closed_form(m, k);
  DensityBracket out;
  out.depth = depth;
  out.lower = g * ns.lower * nt.lower / den_upper;
  out.upper = den_lower > 0.0 ? std::min(g * ns.upper * nt.upper / den_lower, kInfiniteUpper) : kInfiniteUpper;
  return out;
}

DensityBracket BridgeSampler::weight_bounds(const BridgeIndex& idx, int depth) {
  detail::require(depth >= burn_in(idx.m, idx.k), "bridge weight depth below the certified threshold");
  const Bracket ns = numerator_bracket(qs_, idx.m, 2 * depth + 1, 2 * depth);
  const Bracket nt = numerator_bracket(qts_, idx.k, 2 * depth + 1, 2 * depth);
  const double den_lower = static_cast<double>(density_.partial_sum(2 * depth + 1));
  const double den_upper = static_cast<double>(density_.partial_sum(2 * depth + 2));
  const double f = std::exp(log_closed_form(idx));
  DensityBracket out;
  out.depth = depth;
  out.lower = f * ns.lower * nt.lower / den_upper;
  out.upper = den_lower > 0.0 ? std::min(f * ns.upper * nt.upper / den_lower, kInfiniteUpper) : kInfiniteUpper;
  return out;
}

RefinedDraw<BridgeIndex> BridgeSampler::invert_shell(double u) {
  ShellOrder next;
  auto bounds = [this](const BridgeIndex& idx, int depth) {
    const DensityBracket b = weight_bounds(idx, depth);
    return Bracket{b.lower, b.upper};
  };
  auto start = [this](const BridgeIndex& idx) { return burn_in(idx.m, idx.k); };
  return sample_by_refinable_bounds<BridgeIndex>(u, next, bounds, start, options_.refinement);
}

RefinedDraw<std::pair<std::int64_t, std::int64_t>> BridgeSampler::invert_blocks(double u) {
  RingOrder next(std::llround(mode_s_.mean), std::llround(mode_ts_.mean));
  using Block = std::pair<std::int64_t, std::int64_t>;
  auto bounds = [this](const Block& b, int depth) {
    const DensityBracket br = block_bounds(b.first, b.second, depth);
    return Bracket{br.lower, br.upper};
  };
  auto start = [this](const Block& b) { return burn_in(b.first, b.second); };
  return sample_by_refinable_bounds<Block>(u, next, bounds, start, options_.refinement);
}

BridgeIndex BridgeSampler::draw_within_block(std::int64_t m, std::int64_t k, Rng& rng) {
  const std::vector<double>& cells = block_cells(m, k);
  const double target = rng.uniform() * block_closed_form(m, k);
  KahanSum<double> acc;
  std::size_t pick = cells.size() - 1;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    acc += cells[i];
    if (acc.value() > target) {
      pick = i;
      break;
    }
  }
  const auto width = static_cast<std::size_t>(k + 1);
  return {m, k, static_cast<std::int64_t>(pick / width), static_cast<std::int64_t>(pick % width)};
}

BridgeIndex BridgeSampler::sample_index(Rng& rng, SampleStats* stats) {
  const std::uint64_t before = qs_.terms_computed() + qts_.terms_computed() + density_.series().terms_computed();
  auto record = [&] {
    if (stats)
      stats->coefficients +=
          qs_.terms_computed() + qts_.terms_computed() + density_.series().terms_computed() - before;
  };
  for (int attempt = 0;; ++attempt) {
    const double u = rng.uniform();
    try {
      BridgeIndex idx;
      if (options_.order == BridgeOrder::shell) {
        idx = invert_shell(u).index;
      } else {
        const auto block = invert_blocks(u).index;
        idx = draw_within_block(block.first, block.second, rng);
      }
      record();
      return idx;
    } catch (const RefinementCapExceeded& e) {
      if (stats) ++stats->uniform_retries;
      if (attempt + 1 >= options_.max_uniform_retries) {
        record();
        throw ExactModeFailure(std::string("bridge sampler kept failing to resolve u: ") + e.what());
      }
      log_warning(std::string("bridge sampler resampling u: ") + e.what());
    }
  }
}

BridgeDraw BridgeSampler::sample(Rng& rng, SampleStats* stats) {
  if (exact_) {
    try {
      const BridgeIndex idx = sample_index(rng, stats);
      const double y = rng.beta(params_.theta1() + static_cast<double>(idx.l + idx.j),
                                params_.theta2() + static_cast<double>(idx.m + idx.k - idx.l - idx.j));
      return {y, false, idx};
    } catch (const ExactModeFailure& e) {
      if (options_.policy.mode == ApproxPolicy::Mode::exact_only) throw;
      log_warning(std::string("exact bridge sampler failed, using the approximate bridge: ") + e.what());
    }
  }
  return {sample_approximate(rng, stats), true, std::nullopt};
}

// Short gaps: propose Y from the forward law over s, accept with probability
// proportional to the forward density from Y to z over t-s. The lineage
// weights over t-s are exact when t-s allows it and Gaussian otherwise; with
// any Gaussian ingredient the draw is approximate.
double BridgeSampler::sample_approximate(Rng& rng, SampleStats* stats) {
  if (stats) ++stats->approx_fallbacks;
  const double tau = t_ - s_;
  std::vector<std::pair<std::int64_t, double>> weights;
  if (options_.policy.use_exact(tau)) {
    KahanSum<double> mass;
    for (int k = 0;; ++k) {
      const int start = qts_.burn_in(k);
      double value = 0.0;
      for (int d = start; d < start + 200; ++d) {
        const Bracket br = qts_.bracket(k, d);
        value = 0.5 * (br.lower + br.upper);
        if (br.upper - br.lower <= 1e-15 * std::max(value, 1e-300)) break;
      }
      weights.emplace_back(k, std::max(value, 0.0));
      mass += value;
      if (mass.value() > 1.0 - 1e-14 && k > mode_ts_.mean) break;
      if (k > 1'000'000) throw ExactModeFailure("lineage pmf did not accumulate");
    }
  } else {
    const double mu = mode_ts_.mean;
    const double sd = std::sqrt(mode_ts_.variance);
    auto cdf = [&](double v) { return 0.5 * std::erfc(-(v - mu) / (sd * std::sqrt(2.0))); };
    const auto lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(mu - 12 * sd)));
    const auto hi = static_cast<std::int64_t>(std::ceil(mu + 12 * sd));
    for (std::int64_t k = lo; k <= hi; ++k) {
      const double w = (k == 0 ? cdf(0.5) : cdf(k + 0.5) - cdf(k - 0.5));
      if (w > 0.0) weights.emplace_back(k, w);
    }
  }

  std::int64_t kmax = 0;
  for (const auto& [k, w] : weights) kmax = std::max(kmax, k);
  ensure_tables(kmax + 1);
  const double th1 = params_.theta1();
  const double th2 = params_.theta2();
  const double lz = std::log(z_);
  const double l1z = std::log1p(-z_);
  auto log_beta_dens = [&](std::int64_t k, std::int64_t j) {
    return (th1 + j - 1) * lz + (th2 + k - j - 1) * l1z -
           (lg1_[static_cast<std::size_t>(j)] + lg2_[static_cast<std::size_t>(k - j)] -
            lgt_[static_cast<std::size_t>(k)]);
  };
  double bound = 0.0;
  for (const auto& [k, w] : weights) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::int64_t j = 0; j <= k; ++j) best = std::max(best, log_beta_dens(k, j));
    bound += w * std::exp(best);
  }

  TransitionSampler forward(params_, s_, options_.policy);
  for (std::int64_t attempt = 0; attempt < options_.max_approx_proposals; ++attempt) {
    const double y = forward.sample(x_, rng, stats);
    const double ly = std::log(y);
    const double l1y = std::log1p(-y);
    double h = 0.0;
    for (const auto& [k, w] : weights) {
      KahanSum<double> inner;
      for (std::int64_t j = 0; j <= k; ++j) {
        const double log_binom = lfact_[static_cast<std::size_t>(k)] - lfact_[static_cast<std::size_t>(j)] -
                                 lfact_[static_cast<std::size_t>(k - j)] + j * ly + (k - j) * l1y;
        inner += std::exp(log_binom + log_beta_dens(k, j));
      }
      h += w * inner.value();
    }
    if (rng.uniform() * bound <= h) return y;
  }
  throw ExactModeFailure("approximate bridge exceeded its proposal cap");
}

BridgeIndex sample_bridge_index(const MutationParams& params, double x, double z, double s, double t,
                                Rng& rng, const BridgeOptions& options) {
  BridgeSampler sampler(params, x, z, s, t, options);
  return sampler.sample_index(rng);
}

double sample_bridge_point(const MutationParams& params, double x, double z, double s, double t,
                           Rng& rng, const BridgeOptions& options, SampleStats* stats) {
  BridgeSampler sampler(params, x, z, s, t, options);
  return sampler.sample(rng, stats).value;
}

std::vector<Knot> fill_bridge(std::vector<Knot> skeleton, const std::vector<double>& new_times,
                              const MutationParams& params, Rng& rng, const BridgeOptions& options,
                              SampleStats* stats) {
  detail::require(skeleton.size() >= 2, "skeleton needs at least two knots");
  auto by_time = [](const Knot& a, const Knot& b) { return a.time < b.time; };
  std::sort(skeleton.begin(), skeleton.end(), by_time);
  for (std::size_t i = 1; i < skeleton.size(); ++i)
    detail::require(skeleton[i].time > skeleton[i - 1].time, "skeleton times must be distinct");

  for (double tau : new_times) {
    auto upper = std::upper_bound(skeleton.begin(), skeleton.end(), Knot{tau, 0.0, false}, by_time);
    detail::require(upper != skeleton.begin() && upper != skeleton.end(),
                    "bridge time outside the skeleton's time range");
    const Knot& left = *(upper - 1);
    const Knot& right = *upper;
    detail::require(tau > left.time, "bridge time coincides with an existing knot");
    BridgeSampler sampler(params, left.value, right.value, tau - left.time, right.time - left.time, options);
    const BridgeDraw draw = sampler.sample(rng, stats);
    skeleton.insert(upper, Knot{tau, draw.value, draw.used_approximation});
  }
  return skeleton;
}

}  // namespace wfexact
