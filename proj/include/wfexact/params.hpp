#pragma once

#include <cmath>
#include <string>

#include "wfexact/error.hpp"

namespace wfexact {

/// Mutation rates of the two-allele Wright-Fisher diffusion. Both must be
/// strictly positive; the boundaries are then non-absorbing.
class MutationParams {
 public:
  MutationParams(double theta1, double theta2) : theta1_(theta1), theta2_(theta2) {
    detail::require(std::isfinite(theta1) && theta1 > 0.0, "theta1 must be > 0");
    detail::require(std::isfinite(theta2) && theta2 > 0.0, "theta2 must be > 0");
    theta_ = theta1_ + theta2_;
  }

  double theta1() const { return theta1_; }
  double theta2() const { return theta2_; }
  double theta() const { return theta_; }

  /// Neutral drift alpha(x) = (theta1 (1-x) - theta2 x) / 2.
  double drift(double x) const { return 0.5 * (theta1_ * (1.0 - x) - theta2_ * x); }

  /// Only theta enters the lineage-count law; handy when a caller has the
  /// total rate but no split.
  static MutationParams symmetric(double theta) { return {0.5 * theta, 0.5 * theta}; }

  friend bool operator==(const MutationParams&, const MutationParams&) = default;

 private:
  double theta1_;
  double theta2_;
  double theta_;
};

/// When the exact lineage sampler is used versus the Gaussian approximation
/// of the lineage count.
struct ApproxPolicy {
  enum class Mode { exact_only, approx_only, automatic };

  double t_min = 0.05;
  Mode mode = Mode::automatic;

  bool use_exact(double t) const {
    switch (mode) {
      case Mode::exact_only: return true;
      case Mode::approx_only: return false;
      case Mode::automatic: return t >= t_min;
    }
    return true;
  }

  void validate() const { detail::require(t_min > 0.0, "t_min must be > 0"); }
};

inline void require_time(double t, const char* name = "t") {
  detail::require(std::isfinite(t) && t > 0.0, std::string(name) + " must be > 0");
}

inline void require_frequency(double x, const char* name = "x") {
  detail::require(x >= 0.0 && x <= 1.0, std::string(name) + " must lie in [0,1]");
}

inline void require_interior(double x, const char* name = "x") {
  detail::require(x > 0.0 && x < 1.0, std::string(name) + " must lie in (0,1)");
}

}  // namespace wfexact
