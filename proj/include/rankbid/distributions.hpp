#pragma once

#include <span>
#include <vector>

#include "rankbid/numerics.hpp"

namespace rankbid {

/// Continuous type distribution on a bounded support [x0, xk] whose density is
/// constant on each segment (xi-1, xi]. The CDF is piecewise linear, so cdf and
/// quantile are exact.
///
/// Densities must be strictly positive. Construction accepts densities whose
/// total mass is within 1e-6 of one and rescales them to unit mass; anything
/// further off is rejected with std::invalid_argument.
class PiecewiseDensity {
 public:
  PiecewiseDensity(std::vector<double> breakpoints, std::vector<double> densities);

  static PiecewiseDensity uniform(double lo, double hi);

  double lower() const noexcept { return breakpoints_.front(); }
  double upper() const noexcept { return breakpoints_.back(); }
  std::span<const double> breakpoints() const noexcept { return breakpoints_; }
  std::span<const double> densities() const noexcept { return densities_; }
  bool is_uniform() const noexcept { return densities_.size() == 1; }

  /// Density at x; 0 outside the support. At an interior breakpoint the density
  /// of the segment to the right is returned; at the upper end, the last one.
  double pdf(double x) const noexcept;

  /// Density of the segment to the left of x (first segment at the lower end).
  double pdf_left(double x) const noexcept;

  /// Clamped CDF: 0 below the support, 1 above.
  double cdf(double x) const noexcept;

  /// Inverse CDF; throws std::domain_error for q outside [0, 1].
  double quantile(double q) const;

  /// Largest density over the support.
  double max_density() const noexcept;

  /// True when densities never decrease from one segment to the next.
  bool density_nondecreasing() const noexcept;

  /// Integral of w(t) * pdf(t) over [lo, hi] ⊆ support. Density breakpoints
  /// are added to `w_splits` automatically.
  double integrate_weighted(const ScalarFn& w, double lo, double hi, const Tolerance& tol = {},
                            std::span<const double> w_splits = {}) const;

 private:
  std::size_t segment_of(double x) const noexcept;

  std::vector<double> breakpoints_;
  std::vector<double> densities_;
  std::vector<double> cumulative_;  // CDF at each breakpoint
};

}  // namespace rankbid
