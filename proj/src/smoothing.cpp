#include "rankbid/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rankbid/numerics.hpp"

namespace rankbid {

double solve_q(const PaymentRule& rule, double a, double b) {
  if (!(a > 0.0)) throw std::domain_error("solve_q: coefficient must be positive");
  const PiecewiseLinear& pw = rule.winning_fn();
  const PiecewiseLinear& pp = rule.participation_fn();
  const auto bw = pw.breakpoints();
  const auto sw = pw.slopes();
  const auto bp = pp.breakpoints();
  const auto sp = pp.slopes();
  const double target = -b;
  const double inf = std::numeric_limits<double>::infinity();

  double t = 0.0;
  double q = a * pw.value_at_zero() + pp.value_at_zero();
  std::size_t iw = 0;
  std::size_t ip = 0;
  double slope = a * sw[0] + sp[0];
  if (target <= q) return slope > 0.0 ? (target - q) / slope : 0.0;
  for (;;) {
    slope = a * sw[iw] + sp[ip];
    const double next_w = iw + 1 < bw.size() ? bw[iw + 1] : inf;
    const double next_p = ip + 1 < bp.size() ? bp[ip + 1] : inf;
    const double next = std::min(next_w, next_p);
    if (next == inf) {
      if (!(slope > 0.0)) throw std::domain_error("solve_q: payment sum not increasing");
      return t + (target - q) / slope;
    }
    const double q_next = q + slope * (next - t);
    if (q_next >= target && slope > 0.0) return t + (target - q) / slope;
    t = next;
    q = q_next;
    if (next_w == next) ++iw;
    if (next_p == next) ++ip;
  }
}

double eu_point(const CommitmentProblem& p, double u_b, double y, double x) {
  if (!(x > p.a1())) throw std::domain_error("eu_point: leader type must exceed a1");
  const double F = p.leader.cdf(x);
  return solve_q(p.rule, F, u_b - y * F);
}

EqualUtilityCurve equal_utility_curve(const CommitmentProblem& p, const ResponseModel& model,
                                      double y, const std::vector<double>& xs) {
  EqualUtilityCurve c;
  c.follower_type = y;
  c.utility = model.utility(y);
  c.x = xs;
  c.t.reserve(xs.size());
  for (double x : xs) c.t.push_back(eu_point(p, c.utility, y, x));
  return c;
}

EqualBid::EqualBid(MonotoneCurve c) : curve(std::move(c)) {
  if (!curve.empty() && !curve.left_continuous_steps())
    throw std::invalid_argument("equal-bid function must be left-continuous");
}

EqualBid EqualBid::step(double a1, double a2, const std::vector<double>& cuts,
                        const std::vector<double>& levels) {
  if (levels.size() != cuts.size() + 1)
    throw std::invalid_argument("step: need one more level than cut points");
  std::vector<double> x{a1};
  std::vector<double> v{levels[0]};
  double prev = a1;
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    if (!(cuts[k] > prev) || !(cuts[k] < a2))
      throw std::invalid_argument("step: cut points must increase strictly inside the support");
    if (levels[k + 1] < levels[k]) throw std::invalid_argument("step: levels must be weakly increasing");
    x.push_back(cuts[k]);
    v.push_back(levels[k]);
    x.push_back(cuts[k]);
    v.push_back(levels[k + 1]);
    prev = cuts[k];
  }
  x.push_back(a2);
  v.push_back(levels.back());
  return EqualBid(MonotoneCurve(std::move(x), std::move(v), true));
}

MonotoneCurve smooth(const CommitmentProblem& p, const MonotoneCurve& s, std::size_t samples) {
  const std::size_t n = samples ? samples : p.curve_samples;
  const double a1 = p.a1();
  const double a2 = p.a2();
  const double b2 = p.b2();
  // s* touches s where s kinks, so its knots go into the grid as well.
  const std::vector<double> xs =
      merge_grid(merge_grid(linspace(a1, a2, n), p.leader.breakpoints(), a1, a2), s.x(), a1, a2);
  const std::vector<double> ys = linspace(0.0, b2, n);

  ResponseModel model(p, s);
  std::vector<double> us(ys.size());
  for (std::size_t j = 0; j < ys.size(); ++j) us[j] = model.utility(ys[j]);

  auto sup_at = [&](double x) {
    const double F = p.leader.cdf(x);
    std::size_t best_j = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < ys.size(); ++j) {
      const double t = solve_q(p.rule, F, us[j] - ys[j] * F);
      if (t > best) {
        best = t;
        best_j = j;
      }
    }
    const double lo = ys[best_j == 0 ? 0 : best_j - 1];
    const double hi = ys[std::min(best_j + 1, ys.size() - 1)];
    auto eu = [&](double y) { return solve_q(p.rule, F, model.utility(y) - y * F); };
    const LineMax m = golden_section_max(eu, lo, hi, 1e-10 * std::max(1.0, b2), 100);
    return std::max(best, m.value);
  };

  std::vector<double> out(xs.size());
  for (std::size_t i = 1; i < xs.size(); ++i) out[i] = sup_at(xs[i]);
  // s*(a1) as a limit from the right: every follower type keeps utility
  // y F1[a1] = 0 with the zero bid, so only rounding separates it from 0.
  // Linear extrapolation from two tiny offsets removes the O(eps) bias.
  const double eps = 1e-9 * (a2 - a1);
  double v0 = 2.0 * sup_at(a1 + eps) - sup_at(a1 + 2.0 * eps);
  if (v0 < 1e-12 * std::max(1.0, b2)) v0 = 0.0;
  out[0] = std::min(v0, out.size() > 1 ? out[1] : 0.0);
  for (std::size_t i = 1; i < out.size(); ++i) out[i] = std::max(out[i], out[i - 1]);
  return MonotoneCurve(xs, std::move(out));
}

namespace {

// Knots of s* with repeated abscissae dropped.
void unique_knots(const MonotoneCurve& c, std::vector<double>& x, std::vector<double>& v) {
  const auto cx = c.x();
  const auto cv = c.values();
  for (std::size_t i = 0; i < cx.size(); ++i) {
    if (!x.empty() && cx[i] <= x.back()) {
      v.back() = cv[i];
      continue;
    }
    x.push_back(cx[i]);
    v.push_back(cv[i]);
  }
}

}  // namespace

EqualBid equal_bid(const CommitmentProblem& p, const MonotoneCurve& s_star) {
  std::vector<double> x;
  std::vector<double> sv;
  unique_knots(s_star, x, sv);
  const std::size_t n = x.size();
  if (n < 3) throw std::invalid_argument("equal_bid: need at least three knots");
  const double b2 = p.b2();

  std::vector<double> F(n), H(n);
  for (std::size_t i = 0; i < n; ++i) {
    F[i] = p.leader.cdf(x[i]);
    H[i] = p.rule.winning(sv[i]) * F[i] + p.rule.participation(sv[i]);
  }
  // Cells 1..n-1 span [x_{i-1}, x_i]; index 0 unused.
  std::vector<double> A(n, 0.0), m(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const double mass = F[i] - F[i - 1];
    A[i] = mass > 0.0 ? (H[i] - H[i - 1]) / mass : 0.0;
    m[i] = 0.5 * (x[i - 1] + x[i]);
  }
  const std::size_t cells = n - 1;

  // pair i compares cells i-1 and i (2 <= i <= cells)
  std::vector<double> D(n + 1, 0.0);
  for (std::size_t i = 2; i <= cells; ++i) D[i] = std::abs(A[i] - A[i - 1]);
  const double floor_eps = 1e-7 * std::max(1.0, b2);
  std::vector<char> flagged(n + 1, 0);
  for (std::size_t i = 2; i <= cells; ++i) {
    double sigma = 0.0;
    if (i >= 4) sigma = std::max(sigma, D[i - 2]);
    if (i + 2 <= cells) sigma = std::max(sigma, D[i + 2]);
    if (D[i] > 10.0 * sigma + floor_eps && A[i] > A[i - 1]) flagged[i] = 1;
  }
  // A jump inside a cell splits across the two differences on either side of
  // it; the smaller part can miss the test above and would then leak into the
  // edge extrapolation. Grow each cluster while neighbours stand out from the
  // smooth differences just outside it.
  for (std::size_t i = 2; i <= cells;) {
    if (!flagged[i]) {
      ++i;
      continue;
    }
    std::size_t lo = i, hi = i;
    while (hi + 1 <= cells && flagged[hi + 1]) ++hi;
    bool grew = true;
    while (grew) {
      grew = false;
      // compare with the smooth difference further out on the same side
      const double ref_lo = lo >= 4 ? D[lo - 2] : 0.0;
      const double ref_hi = hi + 2 <= cells ? D[hi + 2] : 0.0;
      if (lo >= 3 && !flagged[lo - 1] && D[lo - 1] > 3.0 * ref_lo + floor_eps && A[lo - 1] > A[lo - 2]) {
        flagged[--lo] = 1;
        grew = true;
      }
      if (hi + 1 <= cells && !flagged[hi + 1] && D[hi + 1] > 3.0 * ref_hi + floor_eps && A[hi + 1] > A[hi]) {
        flagged[++hi] = 1;
        grew = true;
      }
    }
    i = hi + 1;
  }

  auto unflagged = [&](std::size_t i) { return i >= 2 && i <= cells && !flagged[i]; };
  // Left limit of g at the right edge of cell i.
  auto edge = [&](std::size_t i) {
    if (unflagged(i)) return A[i] + (A[i] - A[i - 1]) * (x[i] - m[i]) / (m[i] - m[i - 1]);
    if (unflagged(i + 1)) return A[i] + (A[i + 1] - A[i]) * (x[i] - m[i]) / (m[i + 1] - m[i]);
    return A[i];
  };
  // Right limit of g at the left edge of cell i.
  auto left_edge = [&](std::size_t i) {
    if (unflagged(i + 1)) return A[i] - (A[i + 1] - A[i]) * (m[i] - x[i - 1]) / (m[i + 1] - m[i]);
    if (unflagged(i)) return A[i] - (A[i] - A[i - 1]) * (m[i] - x[i - 1]) / (m[i] - m[i - 1]);
    return A[i];
  };

  std::vector<double> gx{x[0]};
  std::vector<double> gv{left_edge(1)};
  std::size_t i = 1;
  while (i <= cells) {
    if (i + 1 <= cells && flagged[i + 1]) {
      // cluster of flagged pairs i+1 .. e; clean cells l = i and r = e
      std::size_t e = i + 1;
      while (e + 1 <= cells && flagged[e + 1]) ++e;
      const std::size_t l = i;
      const std::size_t r = e;
      const double gl = edge(l);
      const double gr = left_edge(r);
      gx.push_back(x[l]);
      gv.push_back(gl);
      if (gr > gl + floor_eps) {
        const double dh = H[r - 1] - H[l];
        double Fc = (gr * F[r - 1] - gl * F[l] - dh) / (gr - gl);
        Fc = std::clamp(Fc, F[l], F[r - 1]);
        double c = p.leader.quantile(Fc);
        c = std::clamp(c, x[l], x[r - 1]);
        if (c > x[l]) {
          gx.push_back(c);
          gv.push_back(gl);
        }
        gx.push_back(c);
        gv.push_back(gr);
        if (x[r - 1] > c) {
          gx.push_back(x[r - 1]);
          gv.push_back(gr);
        }
      } else {
        for (std::size_t k = l + 1; k < r; ++k) {
          gx.push_back(x[k]);
          gv.push_back(A[k]);
        }
      }
      i = r;
      continue;
    }
    gx.push_back(x[i]);
    gv.push_back(edge(i));
    ++i;
  }

  // drop consecutive duplicates and clean up values
  double run = 0.0;
  for (double& v : gv) {
    v = std::clamp(v, 0.0, b2);
    if (v < 1e-12 * std::max(1.0, b2)) v = 0.0;
    run = std::max(run, v);
    v = run;
  }
  std::vector<double> ox, ov;
  for (std::size_t k = 0; k < gx.size(); ++k) {
    const std::size_t sz = ox.size();
    if (sz >= 1 && gx[k] == ox[sz - 1] && gv[k] == ov[sz - 1]) continue;
    if (sz >= 2 && gx[k] == ox[sz - 1] && ox[sz - 1] == ox[sz - 2]) {
      ov[sz - 1] = gv[k];
      continue;
    }
    ox.push_back(gx[k]);
    ov.push_back(gv[k]);
  }
  return EqualBid(MonotoneCurve(std::move(ox), std::move(ov), true));
}

Reconstruction::Reconstruction(const CommitmentProblem& p, const EqualBid& g) : p_(&p) {
  const double a1 = p.a1();
  const double a2 = p.a2();
  const MonotoneCurve& c = g.curve;
  const double span_tol = 1e-9 * std::max(1.0, a2 - a1);
  if (c.empty() || std::abs(c.lower() - a1) > span_tol || std::abs(c.upper() - a2) > span_tol)
    throw std::invalid_argument("equal-bid function must cover the leader support");

  std::vector<double> knots(c.x().begin(), c.x().end());
  pts_ = merge_grid(std::vector<double>{a1, a2}, knots, a1, a2, 0.0);
  {
    std::vector<double> bp(p.leader.breakpoints().begin(), p.leader.breakpoints().end());
    pts_ = merge_grid(pts_, bp, a1, a2, 0.0);
  }
  const std::size_t k = pts_.size() - 1;
  start_.resize(k);
  slope_.resize(k);
  dens_.resize(k);
  cum_.assign(k + 1, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    const double lo = pts_[j];
    const double w = pts_[j + 1] - lo;
    const double g25 = c.eval(lo + 0.25 * w);
    const double g75 = c.eval(lo + 0.75 * w);
    slope_[j] = (g75 - g25) / (0.5 * w);
    start_[j] = g25 - slope_[j] * 0.25 * w;
    dens_[j] = p.leader.pdf(lo + 0.5 * w);
    cum_[j + 1] = cum_[j] + dens_[j] * (start_[j] * w + 0.5 * slope_[j] * w * w);
  }
}

double Reconstruction::mass_integral(double x) const {
  if (x <= pts_.front()) return 0.0;
  if (x >= pts_.back()) return cum_.back();
  const auto it = std::upper_bound(pts_.begin(), pts_.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - pts_.begin()) - 1;
  const double d = x - pts_[j];
  return cum_[j] + dens_[j] * (start_[j] * d + 0.5 * slope_[j] * d * d);
}

double Reconstruction::bid(double x) const {
  if (x <= p_->a1()) return 0.0;
  const double F = p_->leader.cdf(x);
  if (!(F > 0.0)) return 0.0;
  return std::max(0.0, solve_q(p_->rule, F, -mass_integral(x)));
}

MonotoneCurve Reconstruction::sample(std::size_t samples) const {
  const std::size_t n = samples ? samples : p_->curve_samples;
  const std::vector<double> xs = merge_grid(linspace(p_->a1(), p_->a2(), n), pts_, p_->a1(), p_->a2());
  std::vector<double> v(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) v[i] = bid(xs[i]);
  return MonotoneCurve(xs, std::move(v));
}

MonotoneCurve reconstruct(const CommitmentProblem& p, const EqualBid& g, std::size_t samples) {
  return Reconstruction(p, g).sample(samples);
}

}  // namespace rankbid
