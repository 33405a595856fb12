#include "rankbid/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "rankbid/numerics.hpp"

namespace rankbid {

void GridSpec::validate() const {
  if (leader_types < 2 || follower_types < 2 || bids < 2)
    throw std::invalid_argument("grid sizes must be at least 2");
  if (bid_ceiling && !(*bid_ceiling > 0.0)) throw std::invalid_argument("bid ceiling must be positive");
}

namespace {

std::vector<double> type_midpoints(const PiecewiseDensity& d, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = d.quantile((double(i) + 0.5) / double(n));
  return out;
}

}  // namespace

BruteForce::BruteForce(const CommitmentProblem& p, const BidFunction& leader_bid, const GridSpec& grid)
    : p_(&p), bid_(leader_bid) {
  grid.validate();
  const std::size_t n = grid.leader_types;
  const std::size_t m = grid.bids;
  m_ = m;
  k_ = grid.follower_types;

  const std::vector<double> xs = type_midpoints(p.leader, n);
  std::vector<double> bids(n);
  double top = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    bids[i] = leader_bid(xs[i]);
    if (!(bids[i] >= 0.0)) throw std::invalid_argument("leader bids must be nonnegative");
    top = std::max(top, bids[i]);
  }
  ceiling_ = grid.bid_ceiling ? *grid.bid_ceiling : std::max(p.b2(), top);
  step_ = ceiling_ / double(m - 1);

  std::vector<std::size_t> leader_idx(n);
  std::vector<std::size_t> leader_hist(m, 0);
  for (std::size_t i = 0; i < n; ++i) {
    leader_idx[i] = snap(bids[i]);
    ++leader_hist[leader_idx[i]];
  }
  // Follower win probability at grid bid l: leaders strictly below l, plus
  // those at l when ties go to the follower.
  std::vector<double> pb(m), pay_p(m), pay_w(m);
  std::size_t below = 0;
  for (std::size_t l = 0; l < m; ++l) {
    const std::size_t wins = p.ties.ties_to_follower ? below + leader_hist[l] : below;
    pb[l] = double(wins) / double(n);
    below += leader_hist[l];
    const double b = double(l) * step_;
    pay_p[l] = p.rule.participation(b);
    pay_w[l] = p.rule.winning(b);
  }

  const std::vector<double> ys = type_midpoints(p.follower, k_);
  std::vector<std::size_t> follower_hist(m, 0);
  const bool lowest = p.ties.lowest_best_response;
  for (std::size_t j = 0; j < k_; ++j) {
    const double y = ys[j];
    std::size_t best = 0;
    double best_u = -std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < m; ++l) {
      const double u = (y - pay_w[l]) * pb[l] - pay_p[l];
      if (u > best_u || (!lowest && u == best_u)) {
        best_u = u;
        best = l;
      }
    }
    ++follower_hist[best];
  }
  follower_count_le_.resize(m);
  std::size_t acc = 0;
  for (std::size_t l = 0; l < m; ++l) {
    acc += follower_hist[l];
    follower_count_le_[l] = acc;
  }

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t L = leader_idx[i];
    std::size_t beaten = 0;
    if (p.ties.ties_to_follower) {
      beaten = L == 0 ? 0 : follower_count_le_[L - 1];
    } else {
      beaten = follower_count_le_[L];
    }
    const double win = double(beaten) / double(k_);
    const double b = double(L) * step_;
    total += (xs[i] - p.rule.winning(b)) * win - p.rule.participation(b);
  }
  leader_utility_ = total / double(n);
}

std::size_t BruteForce::snap(double bid) const {
  const double r = std::round(bid / step_);
  if (r <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(r), m_ - 1);
}

double BruteForce::win_probability(double x) const {
  const std::size_t L = snap(bid_(x));
  std::size_t beaten = 0;
  if (p_->ties.ties_to_follower) {
    beaten = L == 0 ? 0 : follower_count_le_[L - 1];
  } else {
    beaten = follower_count_le_[L];
  }
  return double(beaten) / double(k_);
}

ExhaustiveFollower::ExhaustiveFollower(const CommitmentProblem& p, const MonotoneCurve& s, std::size_t candidates,
                                       std::size_t follower_types)
    : p_(&p), s_(&s) {
  if (candidates < 2 || follower_types < 1) throw std::invalid_argument("exhaustive search needs a grid");
  spacing_ = (p.a2() - p.a1()) / double(candidates - 1);
  std::vector<double> cand{0.0};
  for (std::size_t i = 0; i < candidates; ++i) cand.push_back(s.eval(p.a1() + spacing_ * double(i)));
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  std::vector<double> win(cand.size()), pay_w(cand.size()), pay_p(cand.size());
  for (std::size_t c = 0; c < cand.size(); ++c) {
    const double b = cand[c];
    if (p.ties.ties_to_follower) {
      win[c] = b < s.min_value() ? 0.0 : p.leader.cdf(s.upper_inverse(b));
    } else {
      win[c] = b <= s.min_value() ? 0.0 : p.leader.cdf(s.lower_inverse(b));
    }
    pay_w[c] = p.rule.winning(b);
    pay_p[c] = p.rule.participation(b);
  }

  const bool lowest = p.ties.lowest_best_response;
  bids_.resize(follower_types);
  for (std::size_t j = 0; j < follower_types; ++j) {
    const double y = p.follower.quantile((double(j) + 0.5) / double(follower_types));
    double best_u = -std::numeric_limits<double>::infinity();
    std::size_t best = 0;
    for (std::size_t c = 0; c < cand.size(); ++c) {
      const double u = (y - pay_w[c]) * win[c] - pay_p[c];
      if (u > best_u || (!lowest && u == best_u)) {
        best_u = u;
        best = c;
      }
    }
    bids_[j] = cand[best];
  }
  std::sort(bids_.begin(), bids_.end());
}

double ExhaustiveFollower::win_probability(double x) const {
  const double b = s_->eval(x);
  const auto it = p_->ties.ties_to_follower ? std::lower_bound(bids_.begin(), bids_.end(), b)
                                            : std::upper_bound(bids_.begin(), bids_.end(), b);
  return double(it - bids_.begin()) / double(bids_.size());
}

double brute_force_leader_utility(const CommitmentProblem& p, const BidFunction& s, const GridSpec& grid) {
  return BruteForce(p, s, grid).leader_utility();
}

double brute_force_leader_utility(const CommitmentProblem& p, const MonotoneCurve& s, const GridSpec& grid) {
  return BruteForce(p, [&](double x) { return s.eval(x); }, grid).leader_utility();
}

double brute_force_leader_utility(const CommitmentProblem& p, const RawStrategy& s, const GridSpec& grid) {
  s.validate();
  return BruteForce(p, [&](double x) { return s.eval(x); }, grid).leader_utility();
}

double brute_force_fixed_profile(const CommitmentProblem& p, const BidFunction& leader_bid,
                                 const BidFunction& follower_bid, const GridSpec& grid) {
  grid.validate();
  const std::vector<double> xs = type_midpoints(p.leader, grid.leader_types);
  const std::vector<double> ys = type_midpoints(p.follower, grid.follower_types);
  std::vector<double> lb(xs.size()), fb(ys.size());
  double top = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) top = std::max(top, lb[i] = leader_bid(xs[i]));
  for (std::size_t j = 0; j < ys.size(); ++j) top = std::max(top, fb[j] = follower_bid(ys[j]));
  const double ceiling = grid.bid_ceiling ? *grid.bid_ceiling : std::max(p.b2(), top);
  const double step = ceiling / double(grid.bids - 1);
  auto snap = [&](double b) {
    return std::min<long>(std::max<long>(std::lround(b / step), 0), long(grid.bids) - 1);
  };
  std::vector<std::size_t> hist(grid.bids, 0);
  for (double b : fb) ++hist[std::size_t(snap(b))];
  std::vector<std::size_t> le(grid.bids);
  std::size_t acc = 0;
  for (std::size_t l = 0; l < grid.bids; ++l) le[l] = acc += hist[l];
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const long L = snap(lb[i]);
    std::size_t beaten = 0;
    if (p.ties.ties_to_follower) {
      beaten = L == 0 ? 0 : le[std::size_t(L - 1)];
    } else {
      beaten = le[std::size_t(L)];
    }
    const double win = double(beaten) / double(ys.size());
    const double b = double(L) * step;
    total += (xs[i] - p.rule.winning(b)) * win - p.rule.participation(b);
  }
  return total / double(xs.size());
}

double grid_resolution(const CommitmentProblem& p, const GridSpec& grid, double ceiling) {
  const double scale = std::max(p.a2(), p.b2());
  return scale * (1.0 / double(grid.leader_types) + 1.0 / double(grid.follower_types)) +
         ceiling / double(grid.bids - 1);
}

std::vector<double> default_cut_grid(const CommitmentProblem& p, std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = p.a1() + (p.a2() - p.a1()) * double(i + 1) / double(n + 1);
  return t;
}

SweepResult sweep_cut_point(const CommitmentProblem& p, const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw std::invalid_argument("sweep_cut_point: empty grid");
  for (double t : t_grid)
    if (!(t > p.a1() && t < p.a2())) throw std::invalid_argument("sweep_cut_point: cut outside (a1, a2)");
  SweepResult out;
  out.curve.resize(t_grid.size());
  parallel_for(t_grid.size(), [&](std::size_t i) {
    const double t = t_grid[i];
    out.curve[i] = {t, leader_utility(p, EqualBid::step(p.a1(), p.a2(), {t}, {0.0, p.b2()}))};
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < out.curve.size(); ++i)
    if (out.curve[i].second > out.curve[best].second) best = i;
  out.grid_argmax = out.curve[best].first;
  out.max_utility = out.curve[best].second;
  out.argmax = out.grid_argmax;
  if (best > 0 && best + 1 < out.curve.size()) {
    const auto [x0, y0] = out.curve[best - 1];
    const auto [x1, y1] = out.curve[best];
    const auto [x2, y2] = out.curve[best + 1];
    const double num = (x1 - x0) * (x1 - x0) * (y1 - y2) - (x1 - x2) * (x1 - x2) * (y1 - y0);
    const double den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if (den != 0.0) {
      const double v = x1 - 0.5 * num / den;
      if (v > x0 && v < x2) out.argmax = v;
    }
  }
  return out;
}

std::size_t sweep_peak_count(const SweepResult& sweep, double tol) {
  // walk the curve; a peak counts once the curve falls more than tol below it
  std::size_t peaks = 0;
  const auto& c = sweep.curve;
  if (c.empty()) return 0;
  double high = c[0].second;
  double low = c[0].second;
  bool rising = true;
  for (std::size_t i = 1; i < c.size(); ++i) {
    const double v = c[i].second;
    if (rising) {
      high = std::max(high, v);
      if (v < high - tol) {
        ++peaks;
        rising = false;
        low = v;
      }
    } else {
      low = std::min(low, v);
      if (v > low + tol) {
        rising = true;
        high = v;
      }
    }
  }
  if (rising) ++peaks;
  return peaks;
}

namespace {

double right_limit(const MonotoneCurve& c, double z) {
  const auto x = c.x();
  const auto v = c.values();
  auto it = std::upper_bound(x.begin(), x.end(), z);
  if (it != x.begin() && *(it - 1) == z) return v[static_cast<std::size_t>(it - x.begin()) - 1];
  return c.eval(std::clamp(z, c.lower(), c.upper()));
}

// Piecewise-linear left-continuous curve through the left/right limits of a
// perturbed function at the given abscissae, clamped to [0, b2] and made
// monotone.
EqualBid assemble(std::vector<double> xs, double a1, double a2, double b2, const ScalarFn& left,
                  const ScalarFn& right) {
  xs.push_back(a1);
  xs.push_back(a2);
  xs = merge_grid(std::move(xs), {}, a1, a2, 0.0);
  std::vector<double> ox, ov;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double z = xs[i];
    const double l = std::clamp(left(z), 0.0, b2);
    const double r = std::clamp(right(z), 0.0, b2);
    if (i == 0) {
      ox.push_back(z);
      ov.push_back(r);
      continue;
    }
    ox.push_back(z);
    ov.push_back(l);
    if (i + 1 < xs.size() && r > l) {
      ox.push_back(z);
      ov.push_back(r);
    }
  }
  double run = 0.0;
  for (double& v : ov) v = run = std::max(run, v);
  return EqualBid(MonotoneCurve(std::move(ox), std::move(ov), true));
}

}  // namespace

AuditReport perturbation_audit(const CommitmentProblem& p, const Solution& sol, std::size_t trials,
                               std::uint64_t seed) {
  AuditReport rep;
  rep.trials = trials;
  rep.seed = seed;
  rep.base_utility = leader_utility(p, sol.g);
  rep.max_gain = -std::numeric_limits<double>::infinity();

  const double a1 = p.a1();
  const double a2 = p.a2();
  const double b2 = p.b2();
  const double width = a2 - a1;
  const MonotoneCurve& g = sol.g.curve;
  const std::vector<double> knots(g.x().begin(), g.x().end());
  const std::vector<double> even = linspace(a1, a2, 65);
  auto gl = [&](double z) { return g.eval(std::clamp(z, a1, a2)); };
  auto gr = [&](double z) { return right_limit(g, z); };

  // Draw all perturbations up front so the stream does not depend on
  // evaluation order.
  struct Draw {
    int kind;
    double u, w, z, delta;
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Draw> draws(trials);
  for (auto& d : draws) {
    d.kind = static_cast<int>(rng() % 5);
    d.u = unit(rng);
    d.w = unit(rng);
    d.z = unit(rng);
    d.delta = 2.0 * unit(rng) - 1.0;
  }
  const std::vector<double> jumps = sol.g.cut_points();
  static const char* names[] = {"level shift", "cut shift", "step up", "step down", "tilt"};

  rep.gains.resize(trials);
  parallel_for(trials, [&](std::size_t t) {
    const Draw& d = draws[t];
    std::vector<double> xs = knots;
    xs.insert(xs.end(), even.begin(), even.end());
    EqualBid h;
    switch (d.kind) {
      case 0: {
        const double u = a1 + width * std::min(d.u, d.w);
        const double w = a1 + width * std::max(d.u, d.w);
        const double delta = 0.05 * b2 * d.delta;
        xs.push_back(u);
        xs.push_back(w);
        auto f = [&, u, w, delta](double x, bool right_side) {
          const double gx = right_side ? gr(x) : gl(x);
          const bool inside = right_side ? (x >= u && x < w) : (x > u && x <= w);
          if (delta >= 0.0) {
            if (inside) return gx + delta;
            if ((right_side && x >= w) || (!right_side && x > w)) return std::max(gx, gl(w) + delta);
            return gx;
          }
          if (inside) return gx + delta;
          if ((right_side && x < u) || (!right_side && x <= u)) return std::min(gx, gr(u) + delta);
          return gx;
        };
        h = assemble(xs, a1, a2, b2, [&](double x) { return f(x, false); }, [&](double x) { return f(x, true); });
        break;
      }
      case 1: {
        // move one jump (or a random point) by composing g with a two-piece
        // linear change of variable
        const double c = jumps.empty() ? a1 + width * (0.05 + 0.9 * d.z)
                                       : jumps[std::min(jumps.size() - 1, std::size_t(d.z * double(jumps.size())))];
        const double target = std::clamp(c + 0.05 * width * d.delta, a1 + 1e-9 * width, a2 - 1e-9 * width);
        auto sigma = [&, c, target](double x) {
          if (x <= target) return a1 + (x - a1) * (c - a1) / (target - a1);
          return c + (x - target) * (a2 - c) / (a2 - target);
        };
        auto sigma_inv = [&, c, target](double v) {
          if (v <= c) return a1 + (v - a1) * (target - a1) / (c - a1);
          return target + (v - c) * (a2 - target) / (a2 - c);
        };
        std::vector<double> ys;
        for (double x : xs) ys.push_back(std::clamp(sigma_inv(x), a1, a2));
        h = assemble(ys, a1, a2, b2, [&](double x) { return gl(sigma(x)); }, [&](double x) { return gr(sigma(x)); });
        break;
      }
      case 2: {
        const double z = a1 + width * d.z;
        const double level = std::min(b2, gr(z) + 0.05 * b2 * std::abs(d.delta));
        xs.push_back(z);
        h = assemble(
            xs, a1, a2, b2, [&](double x) { return x > z ? std::max(gl(x), level) : gl(x); },
            [&](double x) { return x >= z ? std::max(gr(x), level) : gr(x); });
        break;
      }
      case 3: {
        const double z = a1 + width * d.z;
        const double level = std::max(0.0, gl(z) - 0.05 * b2 * std::abs(d.delta));
        xs.push_back(z);
        h = assemble(
            xs, a1, a2, b2, [&](double x) { return x <= z ? std::min(gl(x), level) : gl(x); },
            [&](double x) { return x < z ? std::min(gr(x), level) : gr(x); });
        break;
      }
      default: {
        const double delta = 0.05 * b2 * d.delta;
        auto tilt = [&, delta](double x) { return delta * (x - a1) / width; };
        h = assemble(
            xs, a1, a2, b2, [&](double x) { return gl(x) + tilt(x); }, [&](double x) { return gr(x) + tilt(x); });
        break;
      }
    }
    rep.gains[t] = {names[d.kind], leader_utility(p, h) - rep.base_utility};
  });
  for (const auto& [kind, gain] : rep.gains) {
    if (gain > rep.max_gain) {
      rep.max_gain = gain;
      rep.worst_kind = kind;
    }
  }
  if (trials == 0) rep.max_gain = 0.0;
  return rep;
}

}  // namespace rankbid
