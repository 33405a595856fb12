#pragma once

#include <vector>

#include "rankbid/problem.hpp"
#include "rankbid/strategy.hpp"

namespace rankbid {

struct ResponsePoint {
  double utility = 0.0;
  double bid = 0.0;     // smallest best response (largest if configured)
  double cutoff = 0.0;  // leader type x with follower win probability F1[x]
};

/// Follower best responses against one committed, weakly increasing leader
/// strategy.
///
/// For such a strategy any bid strictly between two leader bid levels is
/// dominated by the lower level, so the follower optimises over the leader's
/// own bid levels plus bid 0. At a knot the exact win probability is used;
/// inside a segment the reparametrised utility
///   (y - p^w(s(x))) F1[x] - p^p(s(x))
/// is piecewise quadratic in x and is maximised exactly on each piece. Knot
/// lines form an upper hull in y; open segments are only refined where a
/// bound says they can beat it.
class ResponseModel {
 public:
  ResponseModel(const CommitmentProblem& problem, MonotoneCurve strategy);

  ResponsePoint at(double y) const;
  double utility(double y) const { return at(y).utility; }

  /// Follower win probability when bidding t.
  double win_prob(double t) const;

  const MonotoneCurve& strategy() const noexcept { return s_; }

 private:
  double interior_utility(double y, double x) const;
  // Best interior point of the open segment between knots lo and lo + 1.
  ResponsePoint segment_best(double y, std::size_t lo) const;

  const CommitmentProblem* p_;
  MonotoneCurve s_;
  // Candidate bids: bid 0 followed by the knot values. Follower utility at
  // bid j is y * win_[j] - cost_[j].
  std::vector<double> bid_;
  std::vector<double> win_;
  std::vector<double> cost_;
  std::vector<std::size_t> hull_;  // upper envelope of those lines
  std::vector<double> breaks_;     // y where hull_[k + 1] overtakes hull_[k]
  std::vector<double> x_splits_;   // leader density breakpoints
  std::vector<double> kinks_;      // payment rule kinks
  std::vector<std::size_t> run_lo_, run_hi_;  // knots sharing a bid value
  // Open segment i (knots i, i+1) has utility at most
  // y * seg_win_[i] - seg_cost_[i]; flat or vertical segments get -inf.
  std::vector<double> seg_win_;
  std::vector<double> seg_cost_;
};

double win_prob_follower(const CommitmentProblem& p, const MonotoneCurve& s, double t);
double follower_utility(const CommitmentProblem& p, const MonotoneCurve& s, double y);
double best_response(const CommitmentProblem& p, const MonotoneCurve& s, double y);

struct ResponseProfile {
  std::vector<double> y;
  MonotoneCurve utility;
  std::vector<double> best_bid;
  std::vector<double> win_cutoff;
};

/// Best responses on an evenly spaced follower grid over [0, b2];
/// samples = 0 uses p.curve_samples.
ResponseProfile response_profile(const CommitmentProblem& p, const MonotoneCurve& s,
                                 std::size_t samples = 0);

}  // namespace rankbid
