#pragma once

#include <cstddef>

#include "rankbid/auction.hpp"
#include "rankbid/distributions.hpp"
#include "rankbid/numerics.hpp"

namespace rankbid {

/// Tie conventions. The defaults are the ones every solver assumes: ties go
/// to the follower, and an indifferent follower submits her lowest best bid.
/// The brute-force oracle and the follower win probability honour both flags.
struct TieBreaking {
  bool ties_to_follower = true;
  bool lowest_best_response = true;
};

/// Leader types ~ leader on [a1, a2], follower types ~ follower on [b1, b2].
struct CommitmentProblem {
  PiecewiseDensity leader;
  PiecewiseDensity follower;
  PaymentRule rule;
  Tolerance tol{};
  TieBreaking ties{};
  std::size_t curve_samples = 2001;  // grid size for sampled curves

  CommitmentProblem(PiecewiseDensity f1, PiecewiseDensity f2, PaymentRule r)
      : leader(std::move(f1)), follower(std::move(f2)), rule(std::move(r)) {}

  double a1() const noexcept { return leader.lower(); }
  double a2() const noexcept { return leader.upper(); }
  double b1() const noexcept { return follower.lower(); }
  double b2() const noexcept { return follower.upper(); }

  /// Follower CDF extended by 0 below b1.
  double follower_cdf(double y) const noexcept { return follower.cdf(y); }

  /// Throws std::invalid_argument when the rule or tolerances are invalid or
  /// a support is negative.
  void validate() const;
};

}  // namespace rankbid
