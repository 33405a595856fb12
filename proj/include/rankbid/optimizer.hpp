#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rankbid/problem.hpp"
#include "rankbid/smoothing.hpp"

namespace rankbid {

enum class Method { first_price_uniform, all_pay, general_search };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

/// Thrown when a closed-form solver's preconditions do not hold.
class UnsupportedProblem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Solution {
  EqualBid g;
  MonotoneCurve s_star;
  std::vector<double> cut_points;
  double leader_utility = 0.0;
  Method method = Method::general_search;
  double stationarity_residual = 0.0;
  std::vector<std::string> notes;
};

/// integral_{a1}^{a2} {[x - p^w(s*(x))] F2[g(x)] - p^p(s*(x))} f1(x) dx with
/// s* = reconstruct(g).
double leader_utility(const CommitmentProblem& p, const EqualBid& g);

/// Lagrangian derivative dL/dg at x in (a1, a2]:
///   h(x) = f1(x) { [x - p^w(s*(x))] f2(g(x)) + integral_x^{a2} R(t) dt },
///   R = -f1 [(p^w)' F2[g] + (p^p)'] / [(p^w)' F1 + (p^p)'],
/// with one-sided (right) derivatives of the payments at s*. For first price
/// this is f1(x) (x f2(g) - integral_x^{a2} f1 F2[g] / F1), for all-pay
/// f1(x) (x f2(g) - 1 + F1[x]).
double stationarity_h(const CommitmentProblem& p, const EqualBid& g, double x);

/// h on a sorted grid inside (a1, a2], sharing the tail integrals.
std::vector<double> stationarity_profile(const CommitmentProblem& p, const EqualBid& g,
                                         const std::vector<double>& xs);

/// Largest violation of the sign conditions on a 401-point grid: h > 0 where
/// g = 0, h < 0 where g = b2, |mean h| on interior constant levels and |h| on
/// strictly increasing pieces.
double stationarity_residual(const CommitmentProblem& p, const EqualBid& g);

/// Two-piece solution for first price with F2 uniform on [0, b2]: the cut t0
/// solves t = b2 integral_t^{a2} f1 / F1; without a root g = b2 everywhere.
Solution solve_first_price_uniform_f2(const CommitmentProblem& p);

/// Two-piece solution for all-pay with weakly increasing f2: t0 solves
/// b2 - t - b2 F1[t] = 0.
Solution solve_all_pay(const CommitmentProblem& p);

struct SearchOptions {
  std::size_t restarts = 16;
  std::uint64_t seed = 0;
  int sweeps = 30;
};

/// Best weakly increasing step function with at most max_steps levels in
/// {0} u [b1, b2], by coordinate ascent over cuts and levels from seeded
/// random restarts. Heuristic: returns the best found.
Solution solve_general(const CommitmentProblem& p, std::size_t max_steps,
                       const SearchOptions& options = {});

/// Closed form whose preconditions hold, else general search with
/// `max_steps` levels. The chosen route is recorded in the notes.
Solution solve_auto(const CommitmentProblem& p, std::size_t max_steps = 3,
                    const SearchOptions& options = {});

/// Assembles a Solution for a given g (s*, utility, cuts, residual).
Solution make_solution(const CommitmentProblem& p, EqualBid g, Method method);

}  // namespace rankbid
