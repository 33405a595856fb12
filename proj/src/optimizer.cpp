#include "rankbid/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "rankbid/numerics.hpp"

namespace rankbid {

std::string to_string(Method m) {
  switch (m) {
    case Method::first_price_uniform: return "first_price_uniform";
    case Method::all_pay: return "all_pay";
    case Method::general_search: return "general_search";
  }
  return "general_search";
}

Method method_from_string(const std::string& s) {
  if (s == "first_price_uniform") return Method::first_price_uniform;
  if (s == "all_pay") return Method::all_pay;
  if (s == "general_search" || s == "general") return Method::general_search;
  throw std::invalid_argument("unknown method '" + s + "'");
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

// Abscissae where the integrand of the objective is not smooth: knots of g,
// density breakpoints and the points where g crosses a follower breakpoint.
std::vector<double> objective_splits(const CommitmentProblem& p, const EqualBid& g) {
  std::vector<double> out(g.curve.x().begin(), g.curve.x().end());
  for (double b : p.leader.breakpoints()) out.push_back(b);
  for (double b : p.follower.breakpoints())
    if (b > g.curve.min_value() && b < g.curve.max_value()) out.push_back(g.curve.lower_inverse(b));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

double leader_utility(const CommitmentProblem& p, const EqualBid& g) {
  const Reconstruction r(p, g);
  const std::vector<double> splits = objective_splits(p, g);
  auto integrand = [&](double x) {
    const double s = r.bid(x);
    const double win = p.follower_cdf(g(x));
    return ((x - p.rule.winning(s)) * win - p.rule.participation(s)) * p.leader.pdf(x);
  };
  return integrate(integrand, p.a1(), p.a2(), p.tol, splits);
}

std::vector<double> stationarity_profile(const CommitmentProblem& p, const EqualBid& g,
                                         const std::vector<double>& xs) {
  const Reconstruction r(p, g);
  const std::vector<double> splits = objective_splits(p, g);
  auto R = [&](double t) {
    const double s = r.bid(t);
    const double dw = p.rule.winning_slope(s);
    const double dp = p.rule.participation_slope(s);
    const double den = dw * p.leader.cdf(t) + dp;
    return -p.leader.pdf(t) * (dw * p.follower_cdf(g(t)) + dp) / den;
  };
  std::vector<double> tail(xs.size(), 0.0);
  double acc = 0.0;
  double right = p.a2();
  for (std::size_t i = xs.size(); i-- > 0;) {
    if (!(xs[i] > p.a1())) throw std::domain_error("stationarity_h: x must exceed a1");
    if (xs[i] < right) acc += integrate(R, xs[i], right, p.tol, splits);
    tail[i] = acc;
    right = xs[i];
  }
  std::vector<double> h(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    const double s = r.bid(x);
    h[i] = p.leader.pdf(x) * ((x - p.rule.winning(s)) * p.follower.pdf(g(x)) + tail[i]);
  }
  return h;
}

double stationarity_h(const CommitmentProblem& p, const EqualBid& g, double x) {
  return stationarity_profile(p, g, {x}).front();
}

double stationarity_residual(const CommitmentProblem& p, const EqualBid& g) {
  const std::size_t n = 401;
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = p.a1() + (p.a2() - p.a1()) * double(i + 1) / double(n);
  const std::vector<double> h = stationarity_profile(p, g, xs);
  const double vtol = 1e-12 * std::max(1.0, p.b2());
  double worst = 0.0;
  std::size_t i = 0;
  while (i < n) {
    const double v = g(xs[i]);
    if (v <= vtol) {
      worst = std::max(worst, h[i]);
      ++i;
      continue;
    }
    if (v >= p.b2() - vtol) {
      worst = std::max(worst, -h[i]);
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < n && std::abs(g(xs[j]) - v) <= vtol) ++j;
    if (j - i >= 2) {
      double mean = 0.0;
      for (std::size_t k = i; k < j; ++k) mean += h[k];
      worst = std::max(worst, std::abs(mean / double(j - i)));
    } else {
      worst = std::max(worst, std::abs(h[i]));
    }
    i = j;
  }
  return worst;
}

Solution make_solution(const CommitmentProblem& p, EqualBid g, Method method) {
  Solution sol;
  sol.s_star = reconstruct(p, g);
  sol.leader_utility = leader_utility(p, g);
  sol.cut_points = g.cut_points();
  sol.stationarity_residual = stationarity_residual(p, g);
  sol.method = method;
  sol.g = std::move(g);
  const auto kinks = p.rule.kinks();
  if (!kinks.empty()) {
    std::string k;
    for (double v : kinks) k += (k.empty() ? "" : ", ") + fmt(v);
    sol.notes.push_back("payment rule has kinks at " + k + "; one-sided derivatives used in h");
  }
  return sol;
}

namespace {

EqualBid two_piece(const CommitmentProblem& p, double t0) {
  if (t0 <= p.a1()) return EqualBid(MonotoneCurve::constant(p.a1(), p.a2(), p.b2(), true));
  if (t0 >= p.a2()) return EqualBid(MonotoneCurve::constant(p.a1(), p.a2(), 0.0, true));
  return EqualBid::step(p.a1(), p.a2(), {t0}, {0.0, p.b2()});
}

// All roots of f on (lo, hi) found by scanning for sign changes.
std::vector<double> scan_roots(const ScalarFn& f, double lo, double hi, const Tolerance& tol) {
  std::vector<double> grid;
  const std::size_t n = 400;
  // geometric points near lo catch roots of functions that blow up there
  for (int k = 12; k >= 1; --k) grid.push_back(lo + (hi - lo) * std::pow(10.0, -k) / 4.0);
  for (std::size_t i = 1; i <= n; ++i) grid.push_back(lo + (hi - lo) * double(i) / double(n));
  std::vector<double> roots;
  double prev_x = grid[0];
  double prev_f = f(prev_x);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double x = grid[i];
    const double fx = f(x);
    if (fx == 0.0) {
      roots.push_back(x);
    } else if (prev_f != 0.0 && std::signbit(prev_f) != std::signbit(fx)) {
      roots.push_back(find_root(f, prev_x, x, tol));
    }
    prev_x = x;
    prev_f = fx;
  }
  return roots;
}

}  // namespace

Solution solve_first_price_uniform_f2(const CommitmentProblem& p) {
  if (!p.rule.behaves_as_first_price())
    throw UnsupportedProblem("first-price closed form needs p^p = 0 and p^w(t) = t");
  if (!p.follower.is_uniform() || p.b1() != 0.0)
    throw UnsupportedProblem("first-price closed form needs a uniform follower type on [0, b2]");
  const double a1 = p.a1();
  const double a2 = p.a2();
  const double b2 = p.b2();
  // integral_t^{a2} f1 / F1 = -ln F1[t]
  auto phi_with = [&](double coef) {
    return [&, coef](double t) { return t + coef * std::log(p.leader.cdf(t)); };
  };
  const std::vector<double> roots = scan_roots(phi_with(b2), a1, a2, p.tol);
  const std::vector<double> a2_roots = scan_roots(phi_with(a2), a1, a2, p.tol);

  Solution best = make_solution(p, two_piece(p, a1), Method::first_price_uniform);
  bool have_root = false;
  for (double t : roots) {
    Solution s = make_solution(p, two_piece(p, t), Method::first_price_uniform);
    if (!have_root || s.leader_utility > best.leader_utility) {
      best = std::move(s);
      have_root = true;
    }
  }
  if (!have_root) {
    best.notes.push_back("cut-point equation has no root; g = b2 everywhere");
  } else {
    const Solution all_top = make_solution(p, two_piece(p, a1), Method::first_price_uniform);
    if (all_top.leader_utility > best.leader_utility) {
      best = all_top;
      best.notes.push_back("g = b2 everywhere beats every root of the cut-point equation");
    }
  }
  std::string r;
  for (double t : roots) r += (r.empty() ? "" : ", ") + fmt(t);
  best.notes.push_back("cut-point roots (b2 coefficient): " + (r.empty() ? std::string("none") : r));
  r.clear();
  for (double t : a2_roots) r += (r.empty() ? "" : ", ") + fmt(t);
  best.notes.push_back("cut-point roots (a2 coefficient): " + (r.empty() ? std::string("none") : r));
  return best;
}

Solution solve_all_pay(const CommitmentProblem& p) {
  if (!p.rule.behaves_as_all_pay())
    throw UnsupportedProblem("all-pay closed form needs p^p(t) = t and p^w = 0");
  if (!p.follower.density_nondecreasing())
    throw UnsupportedProblem("all-pay closed form needs a weakly increasing follower density");
  const double b2 = p.b2();
  auto psi = [&](double t) { return b2 - t - b2 * p.leader.cdf(t); };
  Solution sol;
  if (psi(p.a1()) <= 0.0) {
    sol = make_solution(p, two_piece(p, p.a1()), Method::all_pay);
    sol.notes.push_back("b2 - t - b2 F1[t] <= 0 on the whole support; g = b2 everywhere");
    return sol;
  }
  const double t0 = find_root(psi, p.a1(), p.a2(), p.tol);
  sol = make_solution(p, two_piece(p, t0), Method::all_pay);
  sol.notes.push_back("cut point from b2 - t - b2 F1[t] = 0: " + fmt(t0));
  return sol;
}

namespace {

struct StepParams {
  std::vector<double> cuts;    // size K - 1, weakly increasing in (a1, a2)
  std::vector<double> levels;  // size K, weakly increasing
};

EqualBid build_step(const CommitmentProblem& p, const StepParams& sp) {
  std::vector<double> cuts;
  std::vector<double> levels{sp.levels[0]};
  for (std::size_t k = 0; k < sp.cuts.size(); ++k) {
    const double c = sp.cuts[k];
    const double v = sp.levels[k + 1];
    if (v == levels.back()) continue;
    if (c <= p.a1()) {
      levels.back() = v;
      continue;
    }
    if (c >= p.a2()) break;
    if (!cuts.empty() && c <= cuts.back()) {
      levels.back() = v;
      continue;
    }
    cuts.push_back(c);
    levels.push_back(v);
  }
  if (cuts.empty()) return EqualBid(MonotoneCurve::constant(p.a1(), p.a2(), levels.back(), true));
  return EqualBid::step(p.a1(), p.a2(), cuts, levels);
}

class StepSearch {
 public:
  StepSearch(const CommitmentProblem& p, std::size_t k) : p_(p), k_(k) {}

  double value(const StepParams& sp) const { return leader_utility(p_, build_step(p_, sp)); }

  // One coordinate over [lo, hi]: coarse scan then golden refinement.
  double line_search(StepParams& sp, double* coord, double lo, double hi, double current) const {
    if (!(hi > lo)) {
      *coord = lo;
      return value(sp);
    }
    const double keep = *coord;
    double best_x = keep;
    double best_u = current;
    const int scan = 16;
    std::size_t best_i = 0;
    bool improved = false;
    for (int i = 0; i <= scan; ++i) {
      *coord = lo + (hi - lo) * i / scan;
      const double u = value(sp);
      if (u > best_u) {
        best_u = u;
        best_x = *coord;
        best_i = static_cast<std::size_t>(i);
        improved = true;
      }
    }
    double a = improved ? lo + (hi - lo) * (double(best_i) - 1.0) / scan : keep - (hi - lo) / scan;
    double b = improved ? lo + (hi - lo) * (double(best_i) + 1.0) / scan : keep + (hi - lo) / scan;
    a = std::max(a, lo);
    b = std::min(b, hi);
    const LineMax m = golden_section_max(
        [&](double x) {
          *coord = x;
          return value(sp);
        },
        a, b, 1e-9 * std::max(1.0, hi - lo), 200);
    if (m.value > best_u) {
      best_u = m.value;
      best_x = m.x;
    }
    *coord = best_x;
    return best_u;
  }

  double level_search(StepParams& sp, std::size_t k, double current) const {
    const double lower = k == 0 ? 0.0 : sp.levels[k - 1];
    const double upper = k + 1 < k_ ? sp.levels[k + 1] : p_.b2();
    double best_u = current;
    double best_v = sp.levels[k];
    if (lower == 0.0) {
      sp.levels[k] = 0.0;
      const double u = value(sp);
      if (u > best_u) {
        best_u = u;
        best_v = 0.0;
      }
      sp.levels[k] = best_v;
    }
    const double lo = std::max(lower, p_.b1());
    if (upper >= lo) {
      const double u = line_search(sp, &sp.levels[k], lo, upper, best_u);
      if (u > best_u) {
        best_u = u;
        best_v = sp.levels[k];
      }
    }
    sp.levels[k] = best_v;
    return best_u;
  }

  double ascend(StepParams& sp, int sweeps) const {
    double u = value(sp);
    for (int s = 0; s < sweeps; ++s) {
      const double start = u;
      for (std::size_t c = 0; c < sp.cuts.size(); ++c) {
        const double lo = c == 0 ? p_.a1() : sp.cuts[c - 1];
        const double hi = c + 1 < sp.cuts.size() ? sp.cuts[c + 1] : p_.a2();
        u = std::max(u, line_search(sp, &sp.cuts[c], lo, hi, u));
      }
      for (std::size_t k = 0; k < k_; ++k) u = std::max(u, level_search(sp, k, u));
      if (u - start <= 1e-12 * std::max(1.0, std::abs(u))) break;
    }
    return u;
  }

 private:
  const CommitmentProblem& p_;
  std::size_t k_;
};

}  // namespace

Solution solve_general(const CommitmentProblem& p, std::size_t max_steps, const SearchOptions& options) {
  if (max_steps == 0) throw std::invalid_argument("solve_general: max_steps must be positive");
  const std::size_t k = max_steps;
  const double a1 = p.a1();
  const double a2 = p.a2();
  const double b1 = p.b1();
  const double b2 = p.b2();
  const std::size_t restarts = std::max<std::size_t>(1, options.restarts);

  std::vector<StepParams> starts(restarts);
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t r = 0; r < restarts; ++r) {
    StepParams& sp = starts[r];
    sp.cuts.resize(k - 1);
    sp.levels.resize(k);
    if (r == 0) {
      for (std::size_t c = 0; c + 1 < k; ++c) sp.cuts[c] = a1 + (a2 - a1) * double(c + 1) / double(k);
      for (std::size_t j = 0; j < k; ++j)
        sp.levels[j] = k == 1 ? 0.5 * (b1 + b2) : (j == 0 ? 0.0 : b1 + (b2 - b1) * double(j) / double(k - 1));
    } else {
      for (double& c : sp.cuts) c = a1 + (a2 - a1) * unit(rng);
      for (double& v : sp.levels) v = b1 + (b2 - b1) * unit(rng);
      std::sort(sp.cuts.begin(), sp.cuts.end());
      std::sort(sp.levels.begin(), sp.levels.end());
      if (unit(rng) < 0.5) sp.levels[0] = 0.0;
    }
  }

  const StepSearch search(p, k);
  std::vector<double> values(restarts);
  parallel_for(restarts, [&](std::size_t r) { values[r] = search.ascend(starts[r], options.sweeps); });
  const std::size_t best =
      static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());

  Solution sol = make_solution(p, build_step(p, starts[best]), Method::general_search);
  sol.notes.push_back("general search: " + std::to_string(k) + " levels, " + std::to_string(restarts) +
                      " restarts, seed " + std::to_string(options.seed));
  if (sol.stationarity_residual > 1e-3)
    sol.notes.push_back("stationarity residual " + fmt(sol.stationarity_residual) + " exceeds 1e-3");
  return sol;
}

Solution solve_auto(const CommitmentProblem& p, std::size_t max_steps, const SearchOptions& options) {
  try {
    return solve_first_price_uniform_f2(p);
  } catch (const UnsupportedProblem&) {
  }
  try {
    return solve_all_pay(p);
  } catch (const UnsupportedProblem&) {
  }
  Solution sol = solve_general(p, max_steps, options);
  sol.notes.push_back("no closed form applies; fell back to general search");
  return sol;
}

}  // namespace rankbid
