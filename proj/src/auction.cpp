#include "rankbid/auction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rankbid {

PiecewiseLinear::PiecewiseLinear(double value_at_zero, std::vector<double> breakpoints,
                                 std::vector<double> slopes)
    : value_at_zero_(value_at_zero), breakpoints_(std::move(breakpoints)), slopes_(std::move(slopes)) {
  if (breakpoints_.empty() || breakpoints_.front() != 0.0)
    throw std::invalid_argument("PiecewiseLinear: breakpoints must start at 0");
  if (slopes_.size() != breakpoints_.size())
    throw std::invalid_argument("PiecewiseLinear: expected one slope per breakpoint");
  for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i)
    if (!(breakpoints_[i + 1] > breakpoints_[i]))
      throw std::invalid_argument("PiecewiseLinear: breakpoints must be strictly increasing");
  for (double s : slopes_)
    if (!std::isfinite(s)) throw std::invalid_argument("PiecewiseLinear: slopes must be finite");
  values_.resize(breakpoints_.size());
  values_[0] = value_at_zero_;
  for (std::size_t i = 1; i < breakpoints_.size(); ++i)
    values_[i] = values_[i - 1] + slopes_[i - 1] * (breakpoints_[i] - breakpoints_[i - 1]);
}

PiecewiseLinear PiecewiseLinear::zero() { return PiecewiseLinear(0.0, {0.0}, {0.0}); }
PiecewiseLinear PiecewiseLinear::identity() { return PiecewiseLinear(0.0, {0.0}, {1.0}); }

std::size_t PiecewiseLinear::segment_of(double t) const noexcept {
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  return it == breakpoints_.begin() ? 0 : static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
}

double PiecewiseLinear::operator()(double t) const noexcept {
  if (t < 0.0) return 0.0;
  const std::size_t i = segment_of(t);
  return values_[i] + slopes_[i] * (t - breakpoints_[i]);
}

double PiecewiseLinear::extended(double t) const noexcept {
  if (t < 0.0) return value_at_zero_ + slopes_[0] * t;
  return (*this)(t);
}

double PiecewiseLinear::slope_right(double t) const noexcept {
  if (t < 0.0) return 0.0;
  return slopes_[segment_of(t)];
}

double PiecewiseLinear::slope_left(double t) const noexcept {
  if (t <= 0.0) return t < 0.0 ? 0.0 : slopes_[0];
  auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
  return slopes_[i];
}

bool PiecewiseLinear::is_zero() const noexcept {
  return value_at_zero_ == 0.0 &&
         std::all_of(slopes_.begin(), slopes_.end(), [](double s) { return s == 0.0; });
}

bool PiecewiseLinear::is_identity() const noexcept {
  return value_at_zero_ == 0.0 &&
         std::all_of(slopes_.begin(), slopes_.end(), [](double s) { return s == 1.0; });
}

std::string to_string(RuleKind kind) {
  switch (kind) {
    case RuleKind::first_price: return "first_price";
    case RuleKind::all_pay: return "all_pay";
    case RuleKind::custom: return "custom";
  }
  return "custom";
}

PaymentRule::PaymentRule(RuleKind kind, PiecewiseLinear participation, PiecewiseLinear winning)
    : kind_(kind), participation_(std::move(participation)), winning_(std::move(winning)) {}

PaymentRule PaymentRule::first_price() {
  return PaymentRule(RuleKind::first_price, PiecewiseLinear::zero(), PiecewiseLinear::identity());
}

PaymentRule PaymentRule::all_pay() {
  return PaymentRule(RuleKind::all_pay, PiecewiseLinear::identity(), PiecewiseLinear::zero());
}

PaymentRule PaymentRule::custom(PiecewiseLinear participation, PiecewiseLinear winning) {
  return PaymentRule(RuleKind::custom, std::move(participation), std::move(winning));
}

bool PaymentRule::behaves_as_first_price() const noexcept {
  return participation_.is_zero() && winning_.is_identity();
}

bool PaymentRule::behaves_as_all_pay() const noexcept {
  return participation_.is_identity() && winning_.is_zero();
}

std::vector<double> PaymentRule::kinks() const {
  std::vector<double> out;
  for (const auto* fn : {&participation_, &winning_}) {
    auto bp = fn->breakpoints();
    auto sl = fn->slopes();
    for (std::size_t i = 1; i < bp.size(); ++i)
      if (sl[i] != sl[i - 1]) out.push_back(bp[i]);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<RuleViolation> validate(const PaymentRule& rule) {
  std::vector<RuleViolation> out;
  const auto& pp = rule.participation_fn();
  const auto& pw = rule.winning_fn();
  if (pp.value_at_zero() != 0.0)
    out.push_back({"participation payment nonzero at origin", 0.0, 0.0});
  if (pw.value_at_zero() != 0.0)
    out.push_back({"winning payment nonzero at origin", 0.0, 0.0});

  constexpr double inf = std::numeric_limits<double>::infinity();
  auto segment_end = [](std::span<const double> bp, std::size_t i) {
    return i + 1 < bp.size() ? bp[i + 1] : inf;
  };
  for (auto [fn, name] : {std::pair{&pp, "participation"}, std::pair{&pw, "winning"}}) {
    auto bp = fn->breakpoints();
    auto sl = fn->slopes();
    for (std::size_t i = 0; i < bp.size(); ++i)
      if (sl[i] < 0.0)
        out.push_back({std::string(name) + " payment decreasing", bp[i], segment_end(bp, i)});
  }

  // Strict monotonicity of the sum: its slope is positive on every segment of
  // the merged breakpoint set.
  std::vector<double> merged(pp.breakpoints().begin(), pp.breakpoints().end());
  merged.insert(merged.end(), pw.breakpoints().begin(), pw.breakpoints().end());
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  for (std::size_t i = 0; i < merged.size(); ++i) {
    const double t = merged[i];
    if (pp.slope_right(t) + pw.slope_right(t) <= 0.0) {
      const double end = i + 1 < merged.size() ? merged[i + 1] : inf;
      out.push_back({"sum not strictly increasing", t, end});
    }
  }
  return out;
}

}  // namespace rankbid
