#include "wfexact/drift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace wfexact {
namespace {

double poly_eval(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

std::vector<double> poly_derivative(const std::vector<double>& c) {
  std::vector<double> d;
  for (std::size_t i = 1; i < c.size(); ++i) d.push_back(static_cast<double>(i) * c[i]);
  return d;
}

void trim(std::vector<double>& c) {
  double scale = 0.0;
  for (double v : c) scale = std::max(scale, std::abs(v));
  while (!c.empty() && std::abs(c.back()) <= 1e-15 * scale) c.pop_back();
}

// phi_tilde for eta(x) = a + b x as a quartic.
std::vector<double> phi_polynomial(double a, double b, double theta1, double theta) {
  const double c0 = a * a + b;
  const double c1 = 2.0 * a * b;
  const double c2 = b * b;
  std::vector<double> p{a * theta1, c0 + b * theta1 - a * theta, c1 - c0 - b * theta, c2 - c1, -c2};
  for (double& v : p) v *= 0.5;
  return p;
}

void check_derivative(const std::function<double(double)>& f, const std::function<double(double)>& df,
                      const char* what) {
  for (int i = 1; i <= 10; ++i) {
    const double x = i / 11.0;
    const double step = 1e-5;
    const double fd = (f(x + step) - f(x - step)) / (2.0 * step);
    const double exact = df(x);
    const double scale = std::max({std::abs(exact), std::abs(f(x)), 1.0});
    detail::require(std::isfinite(fd) && std::isfinite(exact) && std::abs(fd - exact) <= 1e-6 * scale,
                    std::string(what) + " is inconsistent with its finite-difference derivative");
  }
}

}  // namespace

std::vector<double> polynomial_roots_unit(std::vector<double> coeffs) {
  trim(coeffs);
  std::vector<double> roots;
  if (coeffs.size() <= 1) return roots;
  if (coeffs.size() == 2) {
    const double r = -coeffs[0] / coeffs[1];
    if (r >= 0.0 && r <= 1.0) roots.push_back(r);
    return roots;
  }
  // Between consecutive critical points the polynomial is monotone.
  std::vector<double> knots{0.0};
  for (double c : polynomial_roots_unit(poly_derivative(coeffs))) knots.push_back(c);
  knots.push_back(1.0);
  std::sort(knots.begin(), knots.end());
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    double lo = knots[i];
    double hi = knots[i + 1];
    double flo = poly_eval(coeffs, lo);
    const double fhi = poly_eval(coeffs, hi);
    if (flo == 0.0) {
      roots.push_back(lo);
      continue;
    }
    if ((flo < 0.0) == (fhi < 0.0)) continue;
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      const double fm = poly_eval(coeffs, mid);
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    roots.push_back(0.5 * (lo + hi));
  }
  if (poly_eval(coeffs, 1.0) == 0.0) roots.push_back(1.0);
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  return roots;
}

DriftSpec::DriftSpec(const MutationParams& params, Kind kind, double sigma, double h, Custom custom)
    : params_(params), kind_(kind), sigma_(sigma), h_(h), custom_(std::move(custom)) {
  detail::require(std::isfinite(sigma), "sigma must be finite");
  detail::require(std::isfinite(h), "h must be finite");
  if (kind_ == Kind::custom) {
    detail::require(static_cast<bool>(custom_.eta), "custom drift needs eta");
    detail::require(static_cast<bool>(custom_.eta_prime), "custom drift needs eta_prime");
    detail::require(static_cast<bool>(custom_.antiderivative), "custom drift needs the antiderivative of eta");
    detail::require(custom_.unsafe_bounds || (custom_.phi_derivative_bound && custom_.eta_bound),
                    "custom drift needs derivative bounds for phi_tilde and eta, or unsafe_bounds");
    check_derivative(custom_.eta, custom_.eta_prime, "eta_prime");
    check_derivative(custom_.antiderivative, custom_.eta, "antiderivative");
    detail::require(std::abs(custom_.antiderivative(0.0)) <= 1e-12, "antiderivative must vanish at 0");
  } else {
    check_derivative([this](double x) { return eta(x); }, [this](double x) { return eta_prime(x); },
                     "eta_prime");
  }
  bounds_ = compute_phi_bounds(*this);
}

DriftSpec DriftSpec::genic(const MutationParams& params, double sigma) {
  return DriftSpec(params, Kind::genic, sigma, 0.5, {});
}

DriftSpec DriftSpec::diploid(const MutationParams& params, double sigma, double h) {
  return DriftSpec(params, Kind::diploid, sigma, h, {});
}

DriftSpec DriftSpec::custom(const MutationParams& params, Custom pieces) {
  return DriftSpec(params, Kind::custom, 0.0, 0.5, std::move(pieces));
}

double DriftSpec::eta(double x) const {
  if (kind_ == Kind::custom) return custom_.eta(x);
  return sigma_ * (x + h_ * (1.0 - 2.0 * x));
}

double DriftSpec::eta_prime(double x) const {
  if (kind_ == Kind::custom) return custom_.eta_prime(x);
  return sigma_ * (1.0 - 2.0 * h_);
}

double DriftSpec::phi_tilde(double x) const {
  const double e = eta(x);
  return 0.5 * (x * (1.0 - x) * (e * e + eta_prime(x)) + 2.0 * e * params_.drift(x));
}

double DriftSpec::a_tilde(double x) const {
  if (kind_ == Kind::custom) return custom_.antiderivative(x);
  return sigma_ * (h_ * x + (1.0 - 2.0 * h_) * x * x / 2.0);
}

double phi_tilde(double x, const DriftSpec& drift) { return drift.phi_tilde(x); }
double a_tilde(double x, const DriftSpec& drift) { return drift.a_tilde(x); }

PhiBounds compute_phi_bounds(const DriftSpec& drift) {
  PhiBounds out;
  if (drift.kind() != DriftSpec::Kind::custom) {
    const double a = drift.sigma() * drift.h();
    const double b = drift.sigma() * (1.0 - 2.0 * drift.h());
    const auto& p = drift.params();
    const std::vector<double> phi = phi_polynomial(a, b, p.theta1(), p.theta());
    std::vector<double> candidates{0.0, 1.0};
    for (double r : polynomial_roots_unit(poly_derivative(phi))) candidates.push_back(r);
    out.phi_minus = std::numeric_limits<double>::infinity();
    out.phi_plus = -std::numeric_limits<double>::infinity();
    for (double x : candidates) {
      const double v = poly_eval(phi, x);
      out.phi_minus = std::min(out.phi_minus, v);
      out.phi_plus = std::max(out.phi_plus, v);
    }
    std::vector<double> a_candidates{0.0, 1.0};
    for (double r : polynomial_roots_unit({a, b})) a_candidates.push_back(r);
    out.a_plus = -std::numeric_limits<double>::infinity();
    for (double x : a_candidates) out.a_plus = std::max(out.a_plus, drift.a_tilde(x));
    return out;
  }

  constexpr int n = 1 << 12;
  const double spacing = 1.0 / n;
  auto at = [](const std::function<double(double)>& f, double x) {
    double v = f(x);
    if (!std::isfinite(v) && x == 0.0) v = f(1e-12);
    if (!std::isfinite(v) && x == 1.0) v = f(1.0 - 1e-12);
    return v;
  };
  const std::function<double(double)> phi = [&drift](double x) { return drift.phi_tilde(x); };
  const std::function<double(double)> anti = [&drift](double x) { return drift.a_tilde(x); };
  out.phi_minus = std::numeric_limits<double>::infinity();
  out.phi_plus = -std::numeric_limits<double>::infinity();
  out.a_plus = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    const double x = i * spacing;
    const double v = at(phi, x);
    detail::require(std::isfinite(v), "phi_tilde is unbounded on (0,1); drift is outside the supported class");
    out.phi_minus = std::min(out.phi_minus, v);
    out.phi_plus = std::max(out.phi_plus, v);
    const double av = at(anti, x);
    detail::require(std::isfinite(av), "antiderivative of eta is not finite on [0,1]");
    out.a_plus = std::max(out.a_plus, av);
  }
  // Between grid points a function with |f'| <= L deviates by at most L h / 2.
  const auto& pieces = drift.custom_pieces();
  const double phi_margin = pieces.phi_derivative_bound.value_or(0.0) * spacing / 2.0;
  out.phi_minus -= phi_margin;
  out.phi_plus += phi_margin;
  out.a_plus += pieces.eta_bound.value_or(0.0) * spacing / 2.0;
  return out;
}

}  // namespace wfexact
