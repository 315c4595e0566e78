#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "wfexact/params.hpp"

namespace wfexact {

struct PhiBounds {
  double phi_minus = 0.0;
  double phi_plus = 0.0;
  double a_plus = 0.0;
};

/// Drift gamma(x) = alpha(x) + x(1-x) eta(x): neutral mutation drift plus a
/// selection term.
class DriftSpec {
 public:
  enum class Kind { genic, diploid, custom };

  /// Caller-supplied pieces of a custom selection factor.
  struct Custom {
    std::function<double(double)> eta;
    std::function<double(double)> eta_prime;
    /// integral of eta from 0 to x
    std::function<double(double)> antiderivative;
    /// Bounds on |phi_tilde'| and |eta| over (0,1), used as the safety margin
    /// of the grid search. Without them the drift needs unsafe_bounds.
    std::optional<double> phi_derivative_bound;
    std::optional<double> eta_bound;
    bool unsafe_bounds = false;
  };

  /// eta = sigma/2 (diploid with h = 1/2).
  static DriftSpec genic(const MutationParams& params, double sigma);
  /// eta(x) = sigma [x + h(1 - 2x)]
  static DriftSpec diploid(const MutationParams& params, double sigma, double h);
  static DriftSpec custom(const MutationParams& params, Custom pieces);
  static DriftSpec neutral(const MutationParams& params) { return genic(params, 0.0); }

  Kind kind() const { return kind_; }
  const MutationParams& params() const { return params_; }
  double sigma() const { return sigma_; }
  double h() const { return h_; }

  double eta(double x) const;
  double eta_prime(double x) const;
  double gamma(double x) const { return params_.drift(x) + x * (1.0 - x) * eta(x); }
  /// (1/2)[x(1-x)(eta^2 + eta') + 2 eta alpha]
  double phi_tilde(double x) const;
  double a_tilde(double x) const;

  const PhiBounds& bounds() const { return bounds_; }
  bool unsafe_bounds() const { return custom_.unsafe_bounds; }
  const Custom& custom_pieces() const { return custom_; }

 private:
  DriftSpec(const MutationParams& params, Kind kind, double sigma, double h, Custom custom);

  MutationParams params_;
  Kind kind_;
  double sigma_ = 0.0;
  double h_ = 0.5;
  Custom custom_;
  PhiBounds bounds_;
};

double phi_tilde(double x, const DriftSpec& drift);
double a_tilde(double x, const DriftSpec& drift);
PhiBounds compute_phi_bounds(const DriftSpec& drift);

/// Real roots in [0,1] of sum_i c[i] x^i.
std::vector<double> polynomial_roots_unit(std::vector<double> coeffs);

}  // namespace wfexact
