#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "oracles.hpp"
#include "properties.hpp"
#include "wfexact/ancestral.hpp"
#include "wfexact/refinable_sampler.hpp"
#include "wfexact/series.hpp"

using namespace wfexact;

TEST_CASE("log a_km small cases") {
  const MutationParams p = MutationParams::symmetric(1.0);
  CHECK(log_a_km(p, 0, 0) == doctest::Approx(0.0));
  CHECK(log_a_km(p, 1, 0) == doctest::Approx(std::log(2.0)));
  CHECK(log_a_km(p, 2, 0) == doctest::Approx(std::log(2.0)));
  CHECK_THROWS_AS(log_a_km(p, 1, 2), InvalidArgument);
}

TEST_CASE("log a_km agrees with the multiplied-out rising factorial") {
  for (double theta : {0.02, 1.0, 3.7, 12.5}) {
    oracle::LogPrefix pre(theta);
    const MutationParams p = MutationParams::symmetric(theta);
    for (int k = 0; k <= 50; ++k)
      for (int m = 0; m <= k; ++m) {
        const long double want = oracle::log_a(pre, theta, k, m);
        const double got = log_a_km(p, k, m);
        // relative error on a_km is the absolute error on its log
        CHECK(std::abs(got - static_cast<double>(want)) <= 1e-12 * std::max(1.0, std::abs(got)));
      }
  }
}

TEST_CASE("log a_km stays finite where a_km overflows") {
  const MutationParams p = MutationParams::symmetric(1.0);
  const double v = log_a_km(p, 1000, 500);
  CHECK(std::isfinite(v));
  CHECK(v > std::log(1e308));
  oracle::LogPrefix pre(1.0);
  CHECK(v == doctest::Approx(static_cast<double>(oracle::log_a(pre, 1.0, 1000, 500))).epsilon(1e-12));
}

TEST_CASE("b coefficients") {
  const MutationParams p = MutationParams::symmetric(1.0);
  CHECK(b_coeff(p, 1.0, 0, 0) == doctest::Approx(1.0));
  CHECK(b_coeff(p, 1.0, 1, 0) == doctest::Approx(2.0 * std::exp(-0.5)).epsilon(1e-14));
  CHECK(b_coeff(p, 1.0, 2, 0) == doctest::Approx(2.0 * std::exp(-2.0)).epsilon(1e-14));
}

TEST_CASE("decay start C_m") {
  CHECK(decay_start_C(MutationParams::symmetric(1.0), 1.0, 0) == 1);
  CHECK(decay_start_C(MutationParams::symmetric(2.0), 10.0, 0) == 0);

  // beyond the eps = 0 uniform threshold every column decays from its first term
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> th(0.05, 5.0), tt(0.05, 3.0);
  for (int rep = 0; rep < 50; ++rep) {
    const MutationParams p = MutationParams::symmetric(th(gen));
    const double t = tt(gen);
    const int c0 = uniform_decay_threshold_C_eps(p, t, 0.0);
    for (int m = c0 + 1; m <= c0 + 30; ++m) CHECK(decay_start_C(p, t, m) == 0);
  }
}

TEST_CASE("decay start hits the iteration cap for tiny t") {
  CHECK_THROWS_AS(decay_start_C(MutationParams::symmetric(1.0), 1e-7, 50, 1000), ExactModeFailure);
}

TEST_CASE("uniform decay threshold C_eps") {
  const MutationParams p1 = MutationParams::symmetric(1.0);
  CHECK(uniform_decay_threshold_C_eps(p1, 1.0, 0.0) == 1);
  CHECK(uniform_decay_threshold_C_eps(p1, 1.0, 0.5) == 2);
  CHECK(uniform_decay_threshold_C_eps(MutationParams::symmetric(2.0), 10.0, 0.0) == 0);
  CHECK_THROWS_AS(uniform_decay_threshold_C_eps(p1, 1.0, 1.0), InvalidArgument);
}

TEST_CASE("coefficient decay after C_m on random configurations") {
  CHECK(props::coefficient_decay_violations(2026) == 0);
}

TEST_CASE("coefficient table") {
  CoefficientTable table(1.0);
  CHECK(table.log_a(0, 0) == 0.0L);
  const long double first = table.log_a(37, 5);
  CHECK(table.log_a(37, 5) == first);

  auto shared = CoefficientTable::shared(2.5);
  CHECK(CoefficientTable::shared(2.5) == shared);

  // concurrent readers and writers see one set of values
  std::vector<std::thread> threads;
  std::vector<long double> seen(8);
  for (int i = 0; i < 8; ++i)
    threads.emplace_back([&, i] {
      for (int k = i; k < 300; ++k) (void)shared->log_a(k, i);
      seen[static_cast<std::size_t>(i)] = shared->log_a(250, 3);
    });
  for (auto& th : threads) th.join();
  for (long double v : seen) CHECK(v == seen[0]);
  CHECK(seen[0] == detail::log_a_km(2.5, 250, 3));
}

TEST_CASE("partial sums bracket q_m once 2v >= C_m") {
  for (double theta : {0.3, 1.0, 3.0})
    for (double t : {0.05, 0.2, 1.0, 4.0}) {
      oracle::LogPrefix pre(theta);
      LineageSeries series(theta, t);
      for (int m = 0; m <= 60; m += 3) {
        const auto truth = oracle::q(pre, theta, t, m);
        const int start = series.burn_in(m);
        // skip columns whose terms are so large that cancellation swamps
        // double precision, for the oracle as much as for the library
        long double biggest = -HUGE_VALL;
        for (int k = m; k <= m + 2 * start + 40; ++k) biggest = std::max(biggest, oracle::log_b(pre, theta, t, k, m));
        if (biggest > std::log(1e3L)) continue;
        double prev_lo = -HUGE_VAL;
        double prev_hi = HUGE_VAL;
        for (int v = start; v < start + 15; ++v) {
          const Bracket b = series.bracket(m, v);
          const double slack = 1e-12 + static_cast<double>(truth.residual);
          CHECK(b.lower <= static_cast<double>(truth.value) + slack);
          CHECK(b.upper >= static_cast<double>(truth.value) - slack);
          CHECK(b.lower >= prev_lo);
          CHECK(b.upper <= prev_hi);
          prev_lo = b.lower;
          prev_hi = b.upper;
        }
        if (series.decay_start(m) > 0) CHECK_THROWS_AS(series.bracket(m, 0), InvalidArgument);
      }
    }
}

TEST_CASE("bracketed q_m sum to one") {
  // below t ~ 0.1 the largest terms reach e^27 and log-domain rounding alone
  // moves the sum by ~1e-5
  for (double theta : {0.02, 1.0, 3.0})
    for (double t : {0.1, 0.3, 2.0}) {
      LineageSeries series(theta, t);
      double lower = 0.0;
      double upper = 0.0;
      for (int m = 0;; ++m) {
        int v = series.burn_in(m);
        Bracket b = series.bracket(m, v);
        while (b.upper - b.lower > 1e-14) b = series.bracket(m, ++v);
        lower += b.lower;
        upper += b.upper;
        if (m > 2.0 / t + 10 && b.upper < 1e-16) break;
      }
      CHECK(std::abs(lower - 1.0) < 1e-10);
      CHECK(std::abs(upper - 1.0) < 1e-10);
    }
}

TEST_CASE("refinable-bounds inversion on toy pmfs") {
  auto no_burn = [](std::int64_t) { return 0; };
  {
    AscendingOrder next;
    auto bounds = [](std::int64_t i, int) { return i == 0 ? Bracket{1.0, 1.0} : Bracket{0.0, 0.0}; };
    CHECK(sample_by_refinable_bounds<std::int64_t>(0.3, next, bounds, no_burn).index == 0);
  }
  {
    AscendingOrder next;
    auto bounds = [](std::int64_t i, int) { return i < 2 ? Bracket{0.5, 0.5} : Bracket{0.0, 0.0}; };
    CHECK(sample_by_refinable_bounds<std::int64_t>(0.75, next, bounds, no_burn).index == 1);
  }
  {
    // geometric pmf seen through shrinking brackets
    AscendingOrder next;
    auto bounds = [](std::int64_t i, int d) {
      const double p = std::pow(0.5, static_cast<double>(i + 1));
      const double slack = std::pow(0.5, d + 1);
      return Bracket{p * (1.0 - slack), p * (1.0 + slack)};
    };
    for (double u : {0.1, 0.49, 0.51, 0.74, 0.76, 0.9}) {
      const auto draw = sample_by_refinable_bounds<std::int64_t>(u, next, bounds, no_burn);
      const std::int64_t want = static_cast<std::int64_t>(std::floor(-std::log2(1.0 - u)));
      CHECK(draw.index == want);
      next = AscendingOrder{};
    }
  }
  {
    AscendingOrder next;
    auto bounds = [](std::int64_t, int) { return Bracket{0.0, 1.0}; };
    RefinementOptions opts;
    opts.max_refinements = 10;
    CHECK_THROWS_AS(sample_by_refinable_bounds<std::int64_t>(0.5, next, bounds, no_burn, opts),
                    RefinementCapExceeded);
  }
}

TEST_CASE("inversion of q_m(t) matches the oracle cdf to 1e-10") {
  const double theta = 2.0;
  const double t = 5.0;
  const std::vector<double> pmf = oracle::lineage_pmf(theta, t);
  LineageSampler sampler(theta, t, {}, InspectionOrder::ascending);
  double cdf = 0.0;
  for (std::size_t m = 0; m + 1 < pmf.size() && m < 4; ++m) {
    const double lo = cdf;
    cdf += pmf[m];
    if (pmf[m] < 1e-9) break;
    CHECK(sampler.invert(lo + 1e-10).index == static_cast<std::int64_t>(m));
    CHECK(sampler.invert(cdf - 1e-10).index == static_cast<std::int64_t>(m));
  }
  // and the refinement invariant at the returned index
  for (double u : {0.01, 0.5, 0.999, 0.99999}) {
    const auto d = sampler.invert(u);
    CHECK(d.lower_cdf > u);
    CHECK(d.lower_cdf_before <= u);
  }
}
