#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rankbid/optimizer.hpp"
#include "rankbid/problem.hpp"
#include "rankbid/strategy.hpp"

namespace rankbid {

struct GridSpec {
  std::size_t leader_types = 2000;    // n
  std::size_t follower_types = 2000;  // k
  std::size_t bids = 2000;            // m
  std::optional<double> bid_ceiling;  // default: max(b2, highest leader bid)

  void validate() const;
};

using BidFunction = std::function<double(double)>;

/// Discretised game: n leader types and k follower types at the midpoints of
/// equal-probability cells, bids restricted to an m-point grid on
/// [0, ceiling]. Every follower type picks a utility-maximising grid bid by
/// exhaustive search, so there is no reliance on the structure the solvers
/// exploit.
class BruteForce {
 public:
  BruteForce(const CommitmentProblem& p, const BidFunction& leader_bid, const GridSpec& grid = {});

  double leader_utility() const { return leader_utility_; }

  /// Probability that a leader of type x (bidding the snapped leader_bid(x))
  /// beats the best-responding follower population.
  double win_probability(double x) const;

  double ceiling() const noexcept { return ceiling_; }
  double bid_step() const noexcept { return step_; }

 private:
  std::size_t snap(double bid) const;

  const CommitmentProblem* p_;
  BidFunction bid_;
  double ceiling_ = 0.0;
  double step_ = 0.0;
  std::vector<std::size_t> follower_count_le_;  // follower bids with index <= l
  std::size_t k_ = 0;
  std::size_t m_ = 0;
  double leader_utility_ = 0.0;
};

double brute_force_leader_utility(const CommitmentProblem& p, const BidFunction& s, const GridSpec& grid = {});
double brute_force_leader_utility(const CommitmentProblem& p, const MonotoneCurve& s, const GridSpec& grid = {});
double brute_force_leader_utility(const CommitmentProblem& p, const RawStrategy& s, const GridSpec& grid = {});

/// Leader utility when both sides play fixed strategies (no best response).
double brute_force_fixed_profile(const CommitmentProblem& p, const BidFunction& leader_bid,
                                 const BidFunction& follower_bid, const GridSpec& grid = {});

/// Exhaustive follower search against a continuous monotone leader strategy:
/// each follower type (midpoint quantiles of F2) picks the best of bid 0 and
/// the leader bids s(x_i) on an even x grid, with win probabilities taken
/// exactly from F1. Unlike BruteForce no leader type grid is involved, so
/// near-indifferent followers are not pushed around by counting noise.
class ExhaustiveFollower {
 public:
  ExhaustiveFollower(const CommitmentProblem& p, const MonotoneCurve& s, std::size_t candidates = 4000,
                     std::size_t follower_types = 2000);

  /// Fraction of follower types the leader of type x beats.
  double win_probability(double x) const;

  /// Spacing of the candidate x grid.
  double spacing() const noexcept { return spacing_; }
  std::size_t follower_types() const noexcept { return bids_.size(); }

 private:
  const CommitmentProblem* p_;
  const MonotoneCurve* s_;
  std::vector<double> bids_;  // sorted chosen bids
  double spacing_ = 0.0;
};

/// Discretisation error scale of the brute-force oracle: type-grid spacing in
/// value units plus the bid-grid step.
double grid_resolution(const CommitmentProblem& p, const GridSpec& grid, double ceiling);

struct SweepResult {
  double argmax = 0.0;       // parabolic refinement around the best grid point
  double grid_argmax = 0.0;  // best grid point
  double max_utility = 0.0;
  std::vector<std::pair<double, double>> curve;  // (t, utility)
};

/// Evenly spaced cut candidates strictly inside (a1, a2).
std::vector<double> default_cut_grid(const CommitmentProblem& p, std::size_t n = 500);

/// Leader utility of the two-piece g (0 up to t, b2 above) for every t.
SweepResult sweep_cut_point(const CommitmentProblem& p, const std::vector<double>& t_grid);

/// Number of separated local maxima of the sweep curve that rise more than
/// `tol` above the valleys separating them.
std::size_t sweep_peak_count(const SweepResult& sweep, double tol);

struct AuditReport {
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  double base_utility = 0.0;
  double max_gain = 0.0;
  std::string worst_kind;
  std::vector<std::pair<std::string, double>> gains;  // (kind, gain) per trial
};

/// Seeded random weakly increasing perturbations of sol.g: level shifts on
/// random intervals, moved jumps, inserted steps up or down and tilts, all of
/// size up to 0.05 b2 (or 0.05 (a2 - a1) for abscissae).
AuditReport perturbation_audit(const CommitmentProblem& p, const Solution& sol, std::size_t trials,
                               std::uint64_t seed);

}  // namespace rankbid
