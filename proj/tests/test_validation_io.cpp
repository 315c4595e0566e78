#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "wfexact/io.hpp"
#include "wfexact/validation.hpp"

using namespace wfexact;
using std::numbers::pi;

TEST_CASE("reflected Brownian motion CDF") {
  // at large t the law is uniform on [0, pi]
  for (double b : {0.3, 1.0, 2.5}) CHECK(reflected_bm_cdf(1.0, b, 50.0) == doctest::Approx(b / pi));
  // monotone in b, with the right endpoints
  double prev = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double v = reflected_bm_cdf(0.7, pi * i / 100.0, 0.3);
    CHECK(v >= prev - 1e-12);
    prev = v;
  }
  CHECK(reflected_bm_cdf(0.7, 0.0, 0.3) == 0.0);
  CHECK(reflected_bm_cdf(0.7, pi, 0.3) == 1.0);
  // symmetry about pi/2
  CHECK(reflected_bm_cdf(0.4, 1.1, 0.2) == doctest::Approx(1.0 - reflected_bm_cdf(pi - 0.4, pi - 1.1, 0.2)));
  // short times concentrate at the start, far from the walls
  CHECK(reflected_bm_cdf(1.5, 1.5 + 0.2, 1e-3) > 0.99);
  CHECK(reflected_bm_cdf(1.5, 1.5 - 0.2, 1e-3) < 0.01);
  // compare with the method of images away from the walls for small t
  const double a = 1.3, b = 1.6, t = 0.01;
  double images = 0.0;
  for (int k = -5; k <= 5; ++k) {
    const double shift = 2.0 * pi * k;
    auto phi = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
    images += phi((b - a + shift) / std::sqrt(t)) - phi((-a + shift) / std::sqrt(t));
    images += phi((b + a + shift) / std::sqrt(t)) - phi((a + shift) / std::sqrt(t));
  }
  CHECK(reflected_bm_cdf(a, b, t) == doctest::Approx(images).epsilon(1e-9));
  CHECK_THROWS_AS(reflected_bm_cdf(-0.1, 1.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(reflected_bm_cdf(1.0, 1.0, 0.0), InvalidArgument);
}

TEST_CASE("reflected Wright-Fisher CDF") {
  CHECK(reflected_wf_cdf(0.5, 0.5, 0.5) == doctest::Approx(0.5));
  // t large: arcsine law, the Beta(1/2, 1/2) stationary distribution
  for (double y : {0.1, 0.3, 0.8}) CHECK(reflected_wf_cdf(0.2, y, 40.0) == doctest::Approx(beta_cdf(0.5, 0.5, y)));
  CHECK(reflected_wf_cdf(0.3, 0.0, 1.0) == 0.0);
  CHECK(reflected_wf_cdf(0.3, 1.0, 1.0) == 1.0);
}

TEST_CASE("Kolmogorov distribution") {
  CHECK(kolmogorov_survival(0.0) == 1.0);
  CHECK(kolmogorov_survival(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(kolmogorov_survival(1.6276) == doctest::Approx(0.01).epsilon(1e-3));
  CHECK(kolmogorov_survival(1.9495) == doctest::Approx(0.001).epsilon(2e-3));
  CHECK(kolmogorov_survival(10.0) < 1e-80);
}

TEST_CASE("one-sample K-S") {
  Rng rng(1);
  std::vector<double> xs;
  for (int i = 0; i < 10000; ++i) xs.push_back(rng.uniform());
  std::sort(xs.begin(), xs.end());
  const ValidationReport ok = ks_validate(xs, [](double y) { return y; }, Reference::beta_stationary);
  CHECK(ok.n == 10000);
  CHECK(ok.reference == Reference::beta_stationary);
  CHECK(ok.p_value > 1e-3);
  CHECK(ks_validate(xs, [](double y) { return y * y; }).p_value < 1e-10);
  CHECK(ks_statistic(std::vector<double>{0.5}, [](double y) { return y; }) == doctest::Approx(0.5));
  const std::vector<double> few(10, 0.5);
  CHECK_THROWS_AS(ks_validate(few, [](double y) { return y; }), InvalidArgument);
  const std::vector<double> unsorted{0.5, 0.1};
  CHECK_THROWS_AS(ks_statistic(unsorted, [](double y) { return y; }), InvalidArgument);
  CHECK(to_string(Reference::reflected_bm) == "reflected_bm");
  CHECK(to_string(Reference::brute_force_pmf) == "brute_force_pmf");
}

TEST_CASE("two-sample K-S") {
  const TwoSampleKs same = ks_two_sample({1, 2, 3, 4}, {1, 2, 3, 4});
  CHECK(same.statistic == 0.0);
  CHECK(same.p_value == 1.0);
  const TwoSampleKs apart = ks_two_sample({1, 2, 3}, {4, 5, 6});
  CHECK(apart.statistic == 1.0);
  Rng rng(2);
  std::vector<double> a, b;
  for (int i = 0; i < 5000; ++i) {
    a.push_back(rng.normal());
    b.push_back(rng.normal() + 0.2);
  }
  CHECK(ks_two_sample(a, b).p_value < 1e-6);
}

TEST_CASE("chi-square") {
  const std::vector<double> probs{0.25, 0.25, 0.25, 0.25};
  const std::vector<double> even{250, 250, 250, 250};
  const ChiSquareResult r = chi_square_test(even, probs);
  CHECK(r.statistic == 0.0);
  CHECK(r.dof == 3);
  CHECK(r.p_value == doctest::Approx(1.0));
  const std::vector<double> skew{400, 200, 200, 200};
  // 150^2/250 + 3 * 50^2/250 = 120 on 3 dof
  CHECK(chi_square_test(skew, probs).statistic == doctest::Approx(120.0));
  CHECK(chi_square_test(skew, probs).p_value < 1e-11);
  // tiny cells are pooled
  const std::vector<double> tail_probs{0.5, 0.49, 0.005, 0.005};
  const std::vector<double> tail_obs{50, 49, 1, 0};
  CHECK(chi_square_test(tail_obs, tail_probs).cells < 4);
}

TEST_CASE("Euler baseline") {
  const DriftSpec none = DriftSpec::neutral(MutationParams(0.5, 0.5));
  Rng rng(3);
  CHECK(euler_baseline(0.3, 1e-4, none, 1e-3, rng) == 0.3);
  double sum = 0.0;
  for (int i = 0; i < 4000; ++i) {
    const double y = euler_baseline(0.5, 0.5, none, 1e-2, rng);
    CHECK(y >= 0.25e-2);
    CHECK(y <= 1.0 - 0.25e-2);
    sum += y;
  }
  CHECK(sum / 4000 == doctest::Approx(0.5).epsilon(0.05));
  // the mean of the neutral diffusion relaxes to theta1/theta
  const DriftSpec pull = DriftSpec::neutral(MutationParams(2.0, 2.0));
  sum = 0.0;
  for (int i = 0; i < 4000; ++i) sum += euler_baseline(0.1, 1.0, pull, 1e-2, rng);
  CHECK(sum / 4000 == doctest::Approx(0.5 + (0.1 - 0.5) * std::exp(-2.0)).epsilon(0.05));
}

TEST_CASE("real formatting") {
  CHECK(format_real(0.5) == "0.5");
  CHECK(format_real(0.1) == "0.1");
  CHECK(format_real(1e-300) == "1e-300");
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform();
    const std::string s = format_real(v);
    CHECK(std::stod(s) == v);
    std::string mantissa;
    for (char c : s.substr(0, s.find('e')))
      if (c >= '0' && c <= '9') mantissa += c;
    mantissa.erase(0, mantissa.find_first_not_of('0'));
    CHECK(mantissa.size() <= 17);
  }
}

TEST_CASE("CSV") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  std::ostringstream out;
  CsvWriter w(out, {"index", "value"});
  w.row({"0", format_real(0.25)});
  CHECK(out.str() == "index,value\r\n0,0.25\r\n");
  CHECK_THROWS_AS(w.row({"1"}), InvalidArgument);
}

TEST_CASE("JSON lines") {
  SkeletonPath path;
  path.knots = {{0.0, 0.5, false}, {0.3, 0.25, true}, {1.0, 0.75, false}};
  path.diagnostics.attempts = 3;
  std::ostringstream out;
  write_path_jsonl(out, path, 7);
  write_diagnostics_jsonl(out, path.diagnostics, 2);
  std::istringstream in(out.str());
  std::string line;
  std::vector<nlohmann::json> recs;
  while (std::getline(in, line)) recs.push_back(nlohmann::json::parse(line));
  REQUIRE(recs.size() == 4);
  for (const auto& r : recs) CHECK(r.at("schema_version") == kSchemaVersion);
  CHECK(recs[0].at("path") == 7);
  CHECK(recs[1].at("t") == 0.3);
  CHECK(recs[1].at("approximate") == true);
  CHECK_FALSE(recs[2].contains("approximate"));
  CHECK(recs[3].at("record") == "diagnostics");
  CHECK(recs[3].at("attempts") == 1.5);
  CHECK(diagnostics_summary(path.diagnostics, 2).find("attempts=1.5") != std::string::npos);
}
