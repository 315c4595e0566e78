#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wfexact/drift.hpp"
#include "wfexact/random.hpp"

namespace wfexact {

/// CDF at b of Brownian motion on [0, pi], reflected at both ends, started at
/// a and run for time t (cosine expansion truncated after n_terms).
double reflected_bm_cdf(double a, double b, double t, int n_terms = 1000);

/// Transition CDF of the neutral diffusion with theta1 = theta2 = 1/2, which
/// is (1 - cos B_t)/2 for reflected Brownian motion B.
double reflected_wf_cdf(double x, double y, double t, int n_terms = 1000);

double beta_cdf(double a, double b, double y);

/// Survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_survival(double lambda);

enum class Reference { reflected_bm, beta_stationary, brute_force_pmf };
std::string to_string(Reference r);

struct ValidationReport {
  double ks_statistic = 0.0;
  double p_value = 0.0;
  std::size_t n = 0;
  Reference reference = Reference::reflected_bm;
};

/// sup_y |F_n(y) - F(y)| over a sorted sample.
double ks_statistic(std::span<const double> sorted, const std::function<double(double)>& cdf);
ValidationReport ks_validate(std::span<const double> sorted, const std::function<double(double)>& cdf,
                             Reference reference = Reference::reflected_bm, std::size_t min_n = 100);

struct TwoSampleKs {
  double statistic = 0.0;
  double p_value = 0.0;
};
TwoSampleKs ks_two_sample(std::vector<double> a, std::vector<double> b);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 0.0;
  std::size_t cells = 0;
};

/// Pearson goodness of fit of `observed` counts to cell probabilities.
/// Adjacent cells are pooled left to right until each expected count reaches
/// min_expected.
ChiSquareResult chi_square_test(std::span<const double> observed, std::span<const double> probabilities,
                                double min_expected = 5.0);

/// APPROXIMATE: Euler-Maruyama for dX = gamma(X) dt + sqrt(X(1-X)) dW with
/// roughly T/delta equal steps, each result clamped to [delta/4, 1-delta/4].
/// Returns x0 when T < delta.
double euler_baseline(double x0, double T, const DriftSpec& drift, double delta, Rng& rng);

}  // namespace wfexact
