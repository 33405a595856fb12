#include "rankbid/follower.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "rankbid/numerics.hpp"

namespace rankbid {

ResponseModel::ResponseModel(const CommitmentProblem& problem, MonotoneCurve strategy)
    : p_(&problem), s_(std::move(strategy)) {
  const auto v = s_.values();
  bid_.reserve(v.size() + 1);
  bid_.push_back(0.0);
  bid_.insert(bid_.end(), v.begin(), v.end());
  win_.resize(bid_.size());
  cost_.resize(bid_.size());
  for (std::size_t j = 0; j < bid_.size(); ++j) {
    win_[j] = win_prob(bid_[j]);
    cost_[j] = p_->rule.winning(bid_[j]) * win_[j] + p_->rule.participation(bid_[j]);
  }

  // Slopes win_[j] are nondecreasing in j, so a monotone chain builds the
  // upper envelope.
  const bool lowest = p_->ties.lowest_best_response;
  auto crossing = [&](std::size_t a, std::size_t b) { return (cost_[b] - cost_[a]) / (win_[b] - win_[a]); };
  for (std::size_t j = 0; j < bid_.size(); ++j) {
    if (!hull_.empty() && win_[j] == win_[hull_.back()]) {
      const std::size_t last = hull_.back();
      if (cost_[j] < cost_[last] || (cost_[j] == cost_[last] && !lowest)) {
        hull_.pop_back();
      } else {
        continue;
      }
    }
    while (hull_.size() >= 2) {
      const std::size_t a = hull_[hull_.size() - 2];
      const std::size_t b = hull_.back();
      if (crossing(a, j) <= crossing(a, b)) {
        hull_.pop_back();
      } else {
        break;
      }
    }
    hull_.push_back(j);
  }
  breaks_.resize(hull_.size() - 1);
  for (std::size_t k = 0; k + 1 < hull_.size(); ++k) breaks_[k] = crossing(hull_[k], hull_[k + 1]);

  for (double b : p_->leader.breakpoints()) x_splits_.push_back(b);
  kinks_ = p_->rule.kinks();

  const std::size_t n = v.size();
  run_lo_.resize(n);
  run_hi_.resize(n);
  for (std::size_t i = 0; i < n; ++i) run_lo_[i] = (i > 0 && v[i] == v[i - 1]) ? run_lo_[i - 1] : i;
  for (std::size_t i = n; i-- > 0;) run_hi_[i] = (i + 1 < n && v[i] == v[i + 1]) ? run_hi_[i + 1] : i;

  const auto xs = s_.x();
  seg_win_.assign(n > 0 ? n - 1 : 0, 0.0);
  seg_cost_.assign(seg_win_.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!(xs[i + 1] > xs[i]) || !(v[i + 1] > v[i])) continue;
    seg_win_[i] = p_->leader.cdf(xs[i + 1]);
    seg_cost_[i] = p_->rule.winning(v[i]) * seg_win_[i] + p_->rule.participation(v[i]);
  }
}

double ResponseModel::win_prob(double t) const {
  const auto& f1 = p_->leader;
  if (p_->ties.ties_to_follower) {
    if (s_.min_value() > t) return 0.0;
    return f1.cdf(s_.upper_inverse(t));
  }
  if (s_.min_value() >= t) return 0.0;
  return f1.cdf(s_.lower_inverse(t));
}

double ResponseModel::interior_utility(double y, double x) const {
  const double bid = s_.eval(x);
  const double win = p_->leader.cdf(x);
  return (y - p_->rule.winning(bid)) * win - p_->rule.participation(bid);
}

ResponsePoint ResponseModel::segment_best(double y, std::size_t lo) const {
  ResponsePoint best{-std::numeric_limits<double>::infinity(), 0.0, 0.0};
  const auto xs = s_.x();
  const auto vs = s_.values();
  const double xa = xs[lo];
  const double xb = xs[lo + 1];
  const double va = vs[lo];
  const double vb = vs[lo + 1];
  if (!(xb > xa) || !(vb > va)) return best;

  // Inside the segment the bid is linear in x and wins exactly the types
  // below x, so the utility is quadratic between density breakpoints and
  // the preimages of payment kinks.
  std::vector<double> cuts{xa, xb};
  for (double b : x_splits_)
    if (b > xa && b < xb) cuts.push_back(b);
  for (double k : kinks_)
    if (k > va && k < vb) cuts.push_back(xa + (k - va) / (vb - va) * (xb - xa));
  std::sort(cuts.begin(), cuts.end());

  auto u = [&](double x) {
    const double bid = va + (vb - va) * (x - xa) / (xb - xa);
    return (y - p_->rule.winning(bid)) * p_->leader.cdf(x) - p_->rule.participation(bid);
  };
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k];
    const double b = cuts[k + 1];
    if (!(b > a)) continue;
    const double m = 0.5 * (a + b);
    const double fa = u(a);
    const double fm = u(m);
    const double fb = u(b);
    const double curv = 0.5 * (fa + fb) - fm;
    const double lin = 0.5 * (fb - fa);
    std::array<double, 3> cand{a, b, m};
    std::size_t nc = 2;
    if (curv < 0.0) {
      const double s = -lin / (2.0 * curv);
      if (std::abs(s) < 1.0) {
        cand[2] = m + s * 0.5 * (b - a);
        nc = 3;
      }
    }
    for (std::size_t c = 0; c < nc; ++c) {
      const double x = cand[c];
      if (x <= xa || x >= xb) continue;  // knots are scored exactly elsewhere
      const double val = u(x);
      if (val > best.utility) best = {val, va + (vb - va) * (x - xa) / (xb - xa), x};
    }
  }
  return best;
}

ResponsePoint ResponseModel::at(double y) const {
  const std::size_t h =
      static_cast<std::size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), y) - breaks_.begin());
  const std::size_t j = hull_[h];
  auto line = [&](std::size_t k) { return y * win_[k] - cost_[k]; };
  double best_u = line(j);

  ResponsePoint interior{-std::numeric_limits<double>::infinity(), 0.0, 0.0};
  {
    // knot run of the winning line; bid 0 maps to the first knot
    const std::size_t i = j == 0 ? 0 : j - 1;
    const std::size_t lo = run_lo_[i];
    const std::size_t hi = run_hi_[i];
    if (lo > 0) interior = segment_best(y, lo - 1);
    if (hi + 1 < s_.size()) {
      const ResponsePoint r = segment_best(y, hi);
      if (r.utility > interior.utility) interior = r;
    }
  }
  best_u = std::max(best_u, interior.utility);
  // Any other segment that could still beat the incumbent. Utilities below
  // zero never matter since bid 0 earns at least 0.
  for (std::size_t i = 0; i < seg_win_.size(); ++i) {
    if (y * seg_win_[i] - seg_cost_[i] <= best_u) continue;
    const ResponsePoint r = segment_best(y, i);
    if (r.utility > interior.utility) interior = r;
    best_u = std::max(best_u, interior.utility);
  }

  // Among (near) ties pick the lowest bid, or the highest if configured.
  const double cutoff_u = best_u - p_->tol.abs_tol;
  const bool lowest = p_->ties.lowest_best_response;
  auto knot_point = [&](std::size_t k) {
    return ResponsePoint{best_u, bid_[k], s_.upper_inverse(bid_[k])};
  };
  bool have = false;
  ResponsePoint chosen{};
  auto consider = [&](const ResponsePoint& r) {
    if (!have || (lowest ? r.bid < chosen.bid : r.bid > chosen.bid)) {
      chosen = r;
      have = true;
    }
  };
  if (lowest) {
    std::size_t k = h;
    while (true) {
      if (line(hull_[k]) >= cutoff_u) consider(knot_point(hull_[k]));
      else if (k < h) break;
      if (k == 0) break;
      --k;
    }
  } else {
    for (std::size_t k = h; k < hull_.size(); ++k) {
      if (line(hull_[k]) >= cutoff_u) consider(knot_point(hull_[k]));
      else if (k > h) break;
    }
  }
  if (interior.utility >= cutoff_u) consider({best_u, interior.bid, interior.cutoff});
  chosen.utility = best_u;
  return chosen;
}

double win_prob_follower(const CommitmentProblem& p, const MonotoneCurve& s, double t) {
  return ResponseModel(p, s).win_prob(t);
}

double follower_utility(const CommitmentProblem& p, const MonotoneCurve& s, double y) {
  return ResponseModel(p, s).at(y).utility;
}

double best_response(const CommitmentProblem& p, const MonotoneCurve& s, double y) {
  return ResponseModel(p, s).at(y).bid;
}

ResponseProfile response_profile(const CommitmentProblem& p, const MonotoneCurve& s,
                                 std::size_t samples) {
  if (samples == 0) samples = p.curve_samples;
  const ResponseModel model(p, s);
  ResponseProfile out;
  out.y = linspace(0.0, p.b2(), samples);
  std::vector<double> u(samples);
  out.best_bid.resize(samples);
  out.win_cutoff.resize(samples);
  parallel_for(samples, [&](std::size_t i) {
    const ResponsePoint r = model.at(out.y[i]);
    u[i] = r.utility;
    out.best_bid[i] = r.bid;
    out.win_cutoff[i] = r.cutoff;
  });
  out.utility = MonotoneCurve(out.y, std::move(u));
  return out;
}

}  // namespace rankbid
