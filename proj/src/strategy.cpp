#include "rankbid/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace rankbid {

MonotoneCurve::MonotoneCurve(std::vector<double> x, std::vector<double> values, bool left_continuous_steps)
    : left_continuous_(left_continuous_steps) {
  if (x.size() != values.size()) throw std::invalid_argument("MonotoneCurve: size mismatch");
  if (x.size() < 2) throw std::invalid_argument("MonotoneCurve: need at least two knots");
  if (!(x.back() > x.front())) throw std::invalid_argument("MonotoneCurve: empty domain");
  x_.reserve(x.size());
  v_.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(values[i]))
      throw std::invalid_argument("MonotoneCurve: non-finite knot");
    if (!x_.empty()) {
      if (x[i] < x_.back()) throw std::invalid_argument("MonotoneCurve: abscissae must not decrease");
      const double drop = v_.back() - values[i];
      if (drop > 1e-9 * std::max(1.0, std::abs(v_.back())))
        throw std::invalid_argument("MonotoneCurve: values must be weakly increasing");
      values[i] = std::max(values[i], v_.back());
      // A run of three or more knots at one abscissa keeps only its ends.
      const std::size_t n = x_.size();
      if (n >= 2 && x_[n - 1] == x[i] && x_[n - 2] == x[i]) {
        v_.back() = values[i];
        continue;
      }
    }
    x_.push_back(x[i]);
    v_.push_back(values[i]);
  }
}

MonotoneCurve MonotoneCurve::constant(double lo, double hi, double value, bool left_continuous_steps) {
  return MonotoneCurve({lo, hi}, {value, value}, left_continuous_steps);
}

double MonotoneCurve::eval(double x) const {
  const double slack = 1e-12 * std::max(1.0, std::abs(upper()) + std::abs(lower()));
  if (x < lower() - slack || x > upper() + slack)
    throw std::domain_error("MonotoneCurve::eval: argument outside the domain");
  x = std::clamp(x, lower(), upper());
  auto hi_it = std::upper_bound(x_.begin(), x_.end(), x);
  if (hi_it == x_.end()) return v_.back();
  std::size_t j = static_cast<std::size_t>(hi_it - x_.begin());  // first knot with x_j > x
  std::size_t i = j - 1;
  if (x_[i] == x) {
    if (left_continuous_) {
      auto lo_it = std::lower_bound(x_.begin(), x_.end(), x);
      return v_[static_cast<std::size_t>(lo_it - x_.begin())];
    }
    return v_[i];
  }
  const double w = (x - x_[i]) / (x_[j] - x_[i]);
  return v_[i] + w * (v_[j] - v_[i]);
}

double MonotoneCurve::left_limit(double x) const {
  x = std::clamp(x, lower(), upper());
  auto lo_it = std::lower_bound(x_.begin(), x_.end(), x);
  std::size_t j = static_cast<std::size_t>(lo_it - x_.begin());
  if (x_[j] == x) return v_[j];
  const std::size_t i = j - 1;
  const double w = (x - x_[i]) / (x_[j] - x_[i]);
  return v_[i] + w * (v_[j] - v_[i]);
}

double MonotoneCurve::upper_inverse(double t) const {
  if (v_.back() <= t) return upper();
  if (v_.front() > t) return lower();
  auto it = std::upper_bound(v_.begin(), v_.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - v_.begin());  // first with v_j > t
  const std::size_t i = j - 1;
  if (x_[j] == x_[i]) return x_[i];
  const double w = (t - v_[i]) / (v_[j] - v_[i]);
  return x_[i] + w * (x_[j] - x_[i]);
}

double MonotoneCurve::lower_inverse(double t) const {
  if (v_.front() >= t) return lower();
  if (v_.back() < t) return upper();
  auto it = std::lower_bound(v_.begin(), v_.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - v_.begin());  // first with v_j >= t
  const std::size_t i = j - 1;
  if (x_[j] == x_[i]) return x_[j];
  const double w = (t - v_[i]) / (v_[j] - v_[i]);
  return x_[i] + w * (x_[j] - x_[i]);
}

std::vector<double> MonotoneCurve::jumps() const {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < x_.size(); ++i)
    if (x_[i] == x_[i + 1] && v_[i + 1] > v_[i]) out.push_back(x_[i]);
  return out;
}

void RawStrategy::validate() const {
  if (x.size() != bids.size()) throw std::invalid_argument("RawStrategy: size mismatch");
  if (x.size() < 2) throw std::invalid_argument("RawStrategy: need at least two samples");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(bids[i]))
      throw std::invalid_argument("RawStrategy: non-finite sample");
    if (bids[i] < 0.0) throw std::invalid_argument("RawStrategy: negative bid");
    if (i > 0 && !(x[i] > x[i - 1]))
      throw std::invalid_argument("RawStrategy: grid must be strictly increasing");
  }
}

double RawStrategy::eval(double t) const {
  if (t <= x.front()) return bids.front();
  if (t >= x.back()) return bids.back();
  auto it = std::upper_bound(x.begin(), x.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - x.begin());
  const std::size_t i = j - 1;
  const double w = (t - x[i]) / (x[j] - x[i]);
  return bids[i] + w * (bids[j] - bids[i]);
}

namespace {

// Mass of {x in [xa, xb] : bid(x) <= b} for a linear bid from ba to bb.
double segment_mass_below(const PiecewiseDensity& f1, double xa, double xb, double ba, double bb,
                          double b) {
  if (ba <= b && bb <= b) return f1.cdf(xb) - f1.cdf(xa);
  if (ba > b && bb > b) return 0.0;
  const double xc = xa + (b - ba) / (bb - ba) * (xb - xa);
  if (ba <= b) return f1.cdf(xc) - f1.cdf(xa);
  return f1.cdf(xb) - f1.cdf(xc);
}

}  // namespace

double bid_distribution(const RawStrategy& raw, const PiecewiseDensity& f1, double b) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < raw.x.size(); ++i) {
    const double xa = std::max(raw.x[i], f1.lower());
    const double xb = std::min(raw.x[i + 1], f1.upper());
    if (!(xb > xa)) continue;
    total += segment_mass_below(f1, xa, xb, raw.eval(xa), raw.eval(xb), b);
  }
  return total;
}

double bid_distribution(const MonotoneCurve& c, const PiecewiseDensity& f1, double b) {
  if (c.min_value() > b) return 0.0;
  return f1.cdf(c.upper_inverse(b)) - f1.cdf(c.lower());
}

MonotoneCurve sort_strategy(const RawStrategy& raw, const PiecewiseDensity& f1) {
  raw.validate();
  const double lo = f1.lower();
  const double hi = f1.upper();
  const double slack = 1e-9 * std::max(1.0, hi - lo);
  if (raw.x.front() > lo + slack || raw.x.back() < hi - slack)
    throw std::invalid_argument("sort_strategy: raw strategy does not cover the leader support");

  // Knots: raw grid clipped to the support, plus density breakpoints so that
  // F1 is linear on every segment.
  std::vector<double> grid = merge_grid(raw.x, f1.breakpoints(), lo, hi);
  if (grid.front() > lo) grid.insert(grid.begin(), lo);
  if (grid.back() < hi) grid.push_back(hi);
  std::vector<double> bids(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) bids[i] = raw.eval(grid[i]);

  // The bid CDF G(b) is a sum of linear ramps (one per segment, from its
  // lowest to highest bid) plus point masses from flat segments.
  struct Event {
    double slope_change = 0.0;
    double jump = 0.0;
  };
  std::map<double, Event> events;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double mass = f1.cdf(grid[i + 1]) - f1.cdf(grid[i]);
    if (mass <= 0.0) continue;
    const double b0 = std::min(bids[i], bids[i + 1]);
    const double b1 = std::max(bids[i], bids[i + 1]);
    if (b1 == b0) {
      events[b0].jump += mass;
    } else {
      events[b0].slope_change += mass / (b1 - b0);
      events[b1].slope_change -= mass / (b1 - b0);
    }
  }
  std::vector<double> level;     // event bid values
  std::vector<double> g_at;      // G at level (right-continuous)
  std::vector<double> slope_after;
  double g = 0.0;
  double slope = 0.0;
  double prev = events.begin()->first;
  for (const auto& [b, ev] : events) {
    g += slope * (b - prev) + ev.jump;
    slope += ev.slope_change;
    level.push_back(b);
    g_at.push_back(g);
    slope_after.push_back(slope);
    prev = b;
  }

  // G^{-1} is linear in q only between event levels, so their quantile
  // positions (both ends of any point mass) become knots too.
  {
    std::vector<double> extra;
    std::size_t e = 0;
    for (const auto& [b, ev] : events) {
      for (double q : {g_at[e] - ev.jump, g_at[e]})
        if (q > 0.0 && q < 1.0) extra.push_back(f1.quantile(q));
      ++e;
    }
    grid = merge_grid(grid, extra, lo, hi);
  }

  std::vector<double> sorted(grid.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double q = f1.cdf(grid[i]);
    if (q <= 0.0) {
      sorted[i] = level.front();
      continue;
    }
    while (k + 1 < level.size() && g_at[k] < q) ++k;
    if (g_at[k] < q) {
      sorted[i] = level.back();
      continue;
    }
    // level[k] is the first level with G >= q. Either q is reached on the ramp
    // before it or inside its point mass.
    if (k > 0 && slope_after[k - 1] > 0.0) {
      const double ramp_top = g_at[k - 1] + slope_after[k - 1] * (level[k] - level[k - 1]);
      if (ramp_top >= q) {
        sorted[i] = std::min(level[k], level[k - 1] + (q - g_at[k - 1]) / slope_after[k - 1]);
        continue;
      }
    }
    sorted[i] = level[k];
  }
  for (std::size_t i = 1; i < sorted.size(); ++i) sorted[i] = std::max(sorted[i], sorted[i - 1]);
  return MonotoneCurve(std::move(grid), std::move(sorted));
}

}  // namespace rankbid
