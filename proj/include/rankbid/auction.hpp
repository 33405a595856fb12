#pragma once

#include <span>
#include <string>
#include <vector>

namespace rankbid {

/// Continuous piecewise-linear function on [0, inf): value at the origin plus
/// a slope per segment [breakpoint_i, breakpoint_{i+1}); the last slope extends
/// to infinity. Negative arguments evaluate to 0.
class PiecewiseLinear {
 public:
  PiecewiseLinear(double value_at_zero, std::vector<double> breakpoints, std::vector<double> slopes);

  static PiecewiseLinear zero();
  static PiecewiseLinear identity();

  double operator()(double t) const noexcept;

  /// Same as operator() for t >= 0; continues the first segment linearly for
  /// t < 0 so that equations in t stay solvable on the whole real line.
  double extended(double t) const noexcept;

  double slope_right(double t) const noexcept;
  double slope_left(double t) const noexcept;

  double value_at_zero() const noexcept { return value_at_zero_; }
  std::span<const double> breakpoints() const noexcept { return breakpoints_; }
  std::span<const double> slopes() const noexcept { return slopes_; }

  bool is_zero() const noexcept;
  bool is_identity() const noexcept;

 private:
  std::size_t segment_of(double t) const noexcept;

  double value_at_zero_;
  std::vector<double> breakpoints_;  // starts at 0
  std::vector<double> slopes_;
  std::vector<double> values_;  // value at each breakpoint
};

enum class RuleKind { first_price, all_pay, custom };

std::string to_string(RuleKind kind);

/// Rank-and-bid payment rule: a bidder pays participation(b) always and
/// winning(b) in addition when it wins.
class PaymentRule {
 public:
  PaymentRule(RuleKind kind, PiecewiseLinear participation, PiecewiseLinear winning);

  static PaymentRule first_price();
  static PaymentRule all_pay();
  static PaymentRule custom(PiecewiseLinear participation, PiecewiseLinear winning);

  RuleKind kind() const noexcept { return kind_; }
  const PiecewiseLinear& participation_fn() const noexcept { return participation_; }
  const PiecewiseLinear& winning_fn() const noexcept { return winning_; }

  double participation(double t) const noexcept { return participation_(t); }
  double winning(double t) const noexcept { return winning_(t); }
  double total(double t) const noexcept { return participation_(t) + winning_(t); }

  /// Right derivatives; the *_left variants give the left one-sided slope.
  double participation_slope(double t) const noexcept { return participation_.slope_right(t); }
  double winning_slope(double t) const noexcept { return winning_.slope_right(t); }
  double participation_slope_left(double t) const noexcept { return participation_.slope_left(t); }
  double winning_slope_left(double t) const noexcept { return winning_.slope_left(t); }

  /// True when the payments coincide with first-price (resp. all-pay)
  /// regardless of the declared kind.
  bool behaves_as_first_price() const noexcept;
  bool behaves_as_all_pay() const noexcept;

  /// Union of both functions' interior breakpoints (where derivatives jump).
  std::vector<double> kinks() const;

 private:
  RuleKind kind_;
  PiecewiseLinear participation_;
  PiecewiseLinear winning_;
};

struct RuleViolation {
  std::string message;
  double from = 0.0;  // offending bid interval
  double to = 0.0;
};

/// Every violated invariant of the rule; empty when the rule is valid.
std::vector<RuleViolation> validate(const PaymentRule& rule);

}  // namespace rankbid
