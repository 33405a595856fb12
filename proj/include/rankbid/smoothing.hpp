#pragma once

#include <vector>

#include "rankbid/follower.hpp"
#include "rankbid/problem.hpp"
#include "rankbid/strategy.hpp"

namespace rankbid {

/// Unique t with b + a * p^w(t) + p^p(t) = 0 for a > 0. The payment functions
/// are continued linearly below zero, so t may be negative.
double solve_q(const PaymentRule& rule, double a, double b);

/// Point of the equal-utility curve of follower type y (utility u_b) at leader
/// type x > a1: the bid t solving u_b = F1[x] y - p^w(t) F1[x] - p^p(t).
double eu_point(const CommitmentProblem& p, double u_b, double y, double x);

struct EqualUtilityCurve {
  double follower_type = 0.0;
  double utility = 0.0;
  std::vector<double> x;
  std::vector<double> t;
};

/// Samples eu(y, .) on the given leader types (each > a1).
EqualUtilityCurve equal_utility_curve(const CommitmentProblem& p, const ResponseModel& model,
                                      double y, const std::vector<double>& xs);

/// Left-continuous, weakly increasing equal-bid function on [a1, a2].
struct EqualBid {
  MonotoneCurve curve;

  EqualBid() = default;
  explicit EqualBid(MonotoneCurve c);

  /// Step function: levels[k] on (cuts[k-1], cuts[k]] with cuts strictly
  /// inside (a1, a2) and levels weakly increasing.
  static EqualBid step(double a1, double a2, const std::vector<double>& cuts,
                       const std::vector<double>& levels);

  double operator()(double x) const { return curve.eval(x); }
  std::vector<double> cut_points() const { return curve.jumps(); }
};

/// s*(x) = sup over follower types of eu(y, x): the lowest bids that keep
/// every follower's utility unchanged. A follower grid of `samples` points
/// locates the supremum, which is then refined by golden section.
MonotoneCurve smooth(const CommitmentProblem& p, const MonotoneCurve& s, std::size_t samples = 0);

/// Equal-bid function of a smoothed strategy from
///   f1(x) g(x) = d-/dx [p^w(s*(x)) F1[x] + p^p(s*(x))].
/// Each grid cell gives the exact f1-weighted average of g; cell averages are
/// extrapolated to the right cell edge (left limits) where g is smooth. Jumps
/// are cells whose averages differ by more than ten times the neighbouring
/// secant; their abscissa is recovered from the mass balance of the mixed cells.
EqualBid equal_bid(const CommitmentProblem& p, const MonotoneCurve& s_star);

/// s* implied by an equal-bid function, with s*(a1) = 0:
///   p^w(s*(x)) F1[x] + p^p(s*(x)) = integral_{a1}^{x} f1(t) g(t) dt.
/// The integral is exact for piecewise-linear g.
class Reconstruction {
 public:
  Reconstruction(const CommitmentProblem& p, const EqualBid& g);

  double mass_integral(double x) const;
  double bid(double x) const;

  /// s* sampled on an even grid (samples = 0 -> p.curve_samples) merged with
  /// g's knots and the leader density breakpoints.
  MonotoneCurve sample(std::size_t samples = 0) const;

 private:
  const CommitmentProblem* p_;
  std::vector<double> pts_;
  std::vector<double> cum_;
  std::vector<double> start_;  // right limit of g at pts_[k]
  std::vector<double> slope_;  // slope of g on (pts_[k], pts_[k+1])
  std::vector<double> dens_;   // leader density on the piece
};

MonotoneCurve reconstruct(const CommitmentProblem& p, const EqualBid& g, std::size_t samples = 0);

}  // namespace rankbid
