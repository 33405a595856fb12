#pragma once

#include <span>
#include <string>
#include <vector>

#include "rankbid/distributions.hpp"

namespace rankbid {

/// Weakly increasing function on [lo, hi], stored as knots with linear
/// interpolation between them. Two consecutive knots may share an abscissa,
/// which encodes a jump at that point. With left_continuous_steps the value at
/// a jump is the left limit (the equal-bid function g uses this); otherwise it
/// is the right limit.
class MonotoneCurve {
 public:
  MonotoneCurve() = default;

  /// Throws std::invalid_argument if abscissae decrease or values decrease by
  /// more than 1e-9 relative; smaller decreases are rounding noise and get
  /// flattened.
  MonotoneCurve(std::vector<double> x, std::vector<double> values, bool left_continuous_steps = false);

  static MonotoneCurve constant(double lo, double hi, double value, bool left_continuous_steps = false);

  double lower() const { return x_.front(); }
  double upper() const { return x_.back(); }
  std::span<const double> x() const noexcept { return x_; }
  std::span<const double> values() const noexcept { return v_; }
  std::size_t size() const noexcept { return x_.size(); }
  bool left_continuous_steps() const noexcept { return left_continuous_; }
  bool empty() const noexcept { return x_.empty(); }

  /// Value at x; std::domain_error when x is outside [lower, upper] by more
  /// than 1e-12 relative.
  double eval(double x) const;
  double operator()(double x) const { return eval(x); }

  /// Left limit at x (equals eval for left-continuous curves).
  double left_limit(double x) const;

  /// sup{x in domain : c(x) <= t}; the lower endpoint if c exceeds t everywhere.
  double upper_inverse(double t) const;

  /// inf{x in domain : c(x) >= t}; the upper endpoint if c is below t everywhere.
  double lower_inverse(double t) const;

  /// Abscissae of encoded jumps.
  std::vector<double> jumps() const;

  double min_value() const { return v_.front(); }
  double max_value() const { return v_.back(); }

 private:
  std::vector<double> x_;
  std::vector<double> v_;
  bool left_continuous_ = false;
};

/// Deterministic type -> bid samples over the leader support, not necessarily
/// monotone. Evaluated by linear interpolation.
struct RawStrategy {
  std::vector<double> x;
  std::vector<double> bids;

  /// Throws std::invalid_argument on mismatched sizes, unsorted grid or
  /// negative bids.
  void validate() const;
  double eval(double t) const;
};

/// Quantile rearrangement: the weakly increasing strategy whose bid
/// distribution under F1 equals that of `raw`. The bid at type x is the
/// F1[x]-quantile of raw's bid distribution, computed exactly for the
/// piecewise-linear interpolant of `raw`. Output knots are raw's grid plus
/// the density breakpoints of F1.
MonotoneCurve sort_strategy(const RawStrategy& raw, const PiecewiseDensity& f1);

/// F1-measure of {x : raw(x) <= b} for the piecewise-linear interpolant.
double bid_distribution(const RawStrategy& raw, const PiecewiseDensity& f1, double b);

/// F1-measure of {x : c(x) <= b}.
double bid_distribution(const MonotoneCurve& c, const PiecewiseDensity& f1, double b);

}  // namespace rankbid
