#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "random_problems.hpp"
#include "rankbid/follower.hpp"
#include "rankbid/numerics.hpp"
#include "rankbid/optimizer.hpp"
#include "rankbid/oracle.hpp"
#include "rankbid/smoothing.hpp"
#include "win_probability.hpp"

using namespace rankbid;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

CommitmentProblem uniform_problem(PaymentRule rule) {
  return {PiecewiseDensity::uniform(0.0, 1.0), PiecewiseDensity::uniform(0.0, 1.0), std::move(rule)};
}

CommitmentProblem two_level_problem() {
  return {PiecewiseDensity({0.0, 1.0, 2.0}, {2.0 / 3.0, 1.0 / 3.0}), PiecewiseDensity::uniform(0.0, 10.0),
          PaymentRule::first_price()};
}

// plain bisection, kept separate from the library's root finders
double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Outcome quadratic_commitment() {
  const CommitmentProblem p = uniform_problem(PaymentRule::first_price());
  const double u = brute_force_leader_utility(p, BidFunction([](double x) { return 0.5 * x * x; }));
  // Against x^2/2 the follower bids y/3 and wins when x < sqrt(2y/3); the
  // leader's value has a closed form in q = sqrt(2/3).
  const double q = std::sqrt(2.0 / 3.0);
  const double exact = 1.5 * (std::pow(q, 4) / 4.0 - std::pow(q, 5) / 10.0) + (1.0 - q * q) / 2.0 -
                       (1.0 - q * q * q) / 6.0;
  Outcome o;
  o.pass = std::abs(u - 0.2029) <= 0.002;
  o.detail = "brute force " + fmt(u) + ", closed form " + fmt(exact) + ", target 0.2029 +- 0.002";
  return o;
}

Outcome equilibrium_baseline() {
  const CommitmentProblem p = uniform_problem(PaymentRule::first_price());
  const double u = brute_force_fixed_profile(p, [](double x) { return 0.5 * x; }, [](double y) { return 0.5 * y; });
  Outcome o;
  o.pass = std::abs(u - 1.0 / 6.0) <= 0.002;
  o.detail = "fixed profile x/2 vs y/2: " + fmt(u) + ", target 1/6 +- 0.002";
  return o;
}

Outcome first_price_cut() {
  const CommitmentProblem p = uniform_problem(PaymentRule::first_price());
  const Solution sol = solve_first_price_uniform_f2(p);
  if (sol.cut_points.size() != 1) return {false, "expected one cut, got " + std::to_string(sol.cut_points.size())};
  const double t0 = sol.cut_points[0];
  // t = integral_t^1 dx / x  <=>  t + ln t = 0
  const double root = bisect([](double t) { return t + std::log(t); }, 0.1, 1.0);
  const double closed = root + root * root / 2.0 - 0.5;
  const double bf = brute_force_leader_utility(p, sol.s_star);
  const double res = grid_resolution(p, GridSpec{}, std::max(p.b2(), sol.s_star.max_value()));
  Outcome o;
  o.pass = std::abs(t0 - 0.5671) <= 5e-4 && std::abs(t0 - root) <= 1e-6 &&
           std::abs(sol.leader_utility - 0.2279) <= 1e-3 && std::abs(sol.leader_utility - closed) <= 1e-6 &&
           sol.leader_utility > 1.0 / 6.0 && std::abs(bf - sol.leader_utility) <= 3.0 * res;
  o.detail = "t0 " + fmt(t0, 10) + " (t + ln t = 0 at " + fmt(root, 10) + "), utility " +
             fmt(sol.leader_utility) + " (closed form " + fmt(closed) + ", brute force " + fmt(bf) + ")";
  return o;
}

double kinked_smoothed(double x) {
  if (x <= 0.4) return x / 4.0;
  if (x <= 0.65) return x - 0.3;
  return 1.0 - 0.4225 / x;
}

Outcome kinked_smoothing() {
  const CommitmentProblem p = uniform_problem(PaymentRule::first_price());
  const MonotoneCurve s({0.0, 0.4, 1.0}, {0.0, 0.1, 0.7});
  const MonotoneCurve ss = smooth(p, s);
  double err = 0.0;
  for (int i = 1; i <= 100; ++i) {
    const double x = double(i) / 100.0;
    err = std::max(err, std::abs(ss.eval(x) - kinked_smoothed(x)));
  }
  const EqualBid g = equal_bid(p, ss);
  const double g45 = g(0.45);
  Outcome o;
  o.pass = err <= 1e-4 && std::abs(g45 - 0.6) <= 1e-3;
  o.detail = "max |s* - reference| over 100 points " + fmt(err, 3) + ", g(0.45) = " + fmt(g45);
  return o;
}

Outcome all_pay_closed_form() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double root_err = 0.0, sweep_err = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double a1 = u(rng);
    const double a2 = a1 + 0.5 + 1.5 * u(rng);
    const double b2 = a1 + 0.1 + 2.0 * u(rng);
    const CommitmentProblem p(PiecewiseDensity::uniform(a1, a2), PiecewiseDensity::uniform(0.0, b2),
                              PaymentRule::all_pay());
    const Solution sol = solve_all_pay(p);
    if (sol.cut_points.size() != 1) return {false, "instance " + std::to_string(i) + ": no interior cut"};
    const double t0 = sol.cut_points[0];
    const double formula = b2 * a2 / (b2 + a2 - a1);
    const SweepResult sweep = sweep_cut_point(p, default_cut_grid(p, 1000));
    root_err = std::max(root_err, std::abs(t0 - formula));
    sweep_err = std::max(sweep_err, std::abs(sweep.argmax - t0));
  }
  Outcome o;
  o.pass = root_err <= 1e-6 && sweep_err <= 3e-3;
  o.detail = "10 instances: max |root - b2 a2/(b2 + a2 - a1)| " + fmt(root_err, 3) + ", max |sweep - root| " +
             fmt(sweep_err, 3);
  return o;
}

Outcome two_level_overbidding() {
  const CommitmentProblem p = two_level_problem();
  // (a) the quoted cut and its consequences
  const double tq = 1.3386;
  const EqualBid gq = EqualBid::step(p.a1(), p.a2(), {tq}, {0.0, p.b2()});
  const MonotoneCurve sq = reconstruct(p, gq, 8001);
  const double s2 = sq.eval(2.0);
  const double f_tq = p.leader.cdf(tq);
  double over_mass = 0.0;
  {
    const std::vector<double> xs = linspace(p.a1(), p.a2(), 20001);
    for (std::size_t i = 1; i < xs.size(); ++i) {
      const double mid = 0.5 * (xs[i - 1] + xs[i]);
      if (sq.eval(mid) > mid) over_mass += p.leader.cdf(xs[i]) - p.leader.cdf(xs[i - 1]);
    }
  }
  const bool part_a = std::abs(s2 - 2.2048) <= 1e-3 && std::abs(f_tq - 0.7795) <= 1e-3 &&
                      std::abs(over_mass - 0.04) <= 0.005;

  // (b) the true optimum of the two-piece family
  const Solution sol = solve_first_price_uniform_f2(p);
  const SweepResult sweep = sweep_cut_point(p, default_cut_grid(p, 1000));
  double overbid = -std::numeric_limits<double>::infinity();
  {
    const std::vector<double> xs = linspace(p.a1(), p.a2(), 4001);
    for (std::size_t i = 1; i < xs.size(); ++i) overbid = std::max(overbid, sol.s_star.eval(xs[i]) - xs[i]);
  }
  const bool have_cut = sol.cut_points.size() == 1;
  const double root = have_cut ? sol.cut_points[0] : std::nan("");
  const bool part_b = have_cut && std::abs(root - sweep.argmax) <= 3e-3;

  std::string roots;
  for (const std::string& n : sol.notes)
    if (n.rfind("cut-point roots", 0) == 0) roots += "; " + n;
  Outcome o;
  o.pass = part_a && part_b;
  o.detail = "at t=1.3386: s*(2) " + fmt(s2) + ", F1 " + fmt(f_tq) + ", overbidding mass " + fmt(over_mass, 3) +
             "; sweep argmax " + fmt(sweep.argmax) + ", solver root " + fmt(root) + ", max(s* - x) at optimum " +
             fmt(overbid, 4) + (overbid > 0.0 ? " (overbids)" : " (no overbidding)") + roots;
  return o;
}

double widest_cell(const MonotoneCurve& c) { return acceptance::widest_cell(c); }

Outcome bijection() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  double worst_cut = 0.0;
  int failures = 0;
  for (int t = 0; t < 50; ++t) {
    const CommitmentProblem p = acceptance::random_problem(rng, t % 2 == 0);
    const EqualBid g = acceptance::random_step(rng, p);
    const MonotoneCurve s = reconstruct(p, g);
    const EqualBid back = equal_bid(p, s);
    const double cell = widest_cell(s);
    const double tol = 1e-6 * std::max(1.0, p.b2());
    const std::vector<double> cuts = g.cut_points();
    const std::vector<double> got = back.cut_points();
    bool ok = got.size() == cuts.size();
    for (std::size_t k = 0; ok && k < cuts.size(); ++k) {
      worst_cut = std::max(worst_cut, std::abs(got[k] - cuts[k]) / cell);
      ok = std::abs(got[k] - cuts[k]) <= cell;
    }
    for (int i = 0; i < 1000; ++i) {
      const double x = p.a1() + (p.a2() - p.a1()) * u(rng);
      bool near_jump = false;
      for (double c : cuts) near_jump = near_jump || std::abs(x - c) <= cell;
      if (near_jump) continue;
      const double e = std::abs(back(x) - g(x)) / std::max(1.0, p.b2());
      worst = std::max(worst, e);
      ok = ok && e * std::max(1.0, p.b2()) <= tol;
    }
    if (!ok) ++failures;
  }
  Outcome o;
  o.pass = failures == 0;
  o.detail = "50 steps, " + std::to_string(failures) + " failed; max relative error at continuity points " +
             fmt(worst, 3) + ", max jump offset " + fmt(worst_cut, 3) + " knot cells";
  return o;
}

// Largest deviation of the piecewise-linear s* from its own envelope: a slope
// change d inside a cell of width h moves the chord by at most h d / 4.
double interpolation_bound(const MonotoneCurve& s) {
  const auto x = s.x();
  const auto v = s.values();
  std::vector<double> sl;
  for (std::size_t i = 1; i < x.size(); ++i) sl.push_back(x[i] > x[i - 1] ? (v[i] - v[i - 1]) / (x[i] - x[i - 1]) : 0.0);
  double eps = 0.0;
  for (std::size_t i = 0; i < sl.size(); ++i) {
    const double lo = sl[i > 0 ? i - 1 : i];
    const double hi = sl[i + 1 < sl.size() ? i + 1 : i];
    const double d = std::max({std::abs(hi - lo), std::abs(sl[i] - lo), std::abs(hi - sl[i])});
    eps = std::max(eps, (x[i + 1] - x[i]) * d / 4.0);
  }
  return eps;
}

double payment_slope_bound(const CommitmentProblem& p) {
  double L = p.rule.participation_slope(0.0) + p.rule.winning_slope(0.0);
  for (double k : p.rule.kinks()) L = std::max(L, p.rule.participation_slope(k) + p.rule.winning_slope(k));
  return L;
}

Outcome structural_properties() {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int lipschitz_bad = 0, below_bad = 0, preserve_bad = 0, oracle_bad = 0, win_bad = 0;
  double worst_preserve_ratio = 0.0, worst_oracle_margin = std::numeric_limits<double>::infinity();
  long win_outside = 0, near_jumps = 0;
  for (int t = 0; t < 20; ++t) {
    const CommitmentProblem p = acceptance::random_problem(rng, t % 2 == 0);
    const MonotoneCurve s = acceptance::random_strategy(rng, p);
    const MonotoneCurve ss = smooth(p, s);
    const ResponseModel ms(p, s);
    const ResponseModel mss(p, ss);

    // u_B weakly increasing and 1-Lipschitz, against s and against s*
    const std::vector<double> ys = linspace(0.0, p.b2(), 801);
    bool lip = true;
    double du = 0.0;
    std::vector<double> us(ys.size()), uss(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) {
      us[i] = ms.utility(ys[i]);
      uss[i] = mss.utility(ys[i]);
      du = std::max(du, std::abs(us[i] - uss[i]));
    }
    const double slack = 1e-12 * std::max(1.0, p.b2());
    for (std::size_t i = 1; i < ys.size(); ++i) {
      const double dy = ys[i] - ys[i - 1];
      for (const auto* c : {&us, &uss}) {
        const double d = (*c)[i] - (*c)[i - 1];
        lip = lip && d >= -slack && d <= dy + slack;
      }
    }
    if (!lip) ++lipschitz_bad;

    // s* <= s
    double above = 0.0;
    for (double x : linspace(p.a1(), p.a2(), 2001)) above = std::max(above, ss.eval(x) - s.eval(x));
    for (double x : s.x()) above = std::max(above, ss.eval(x) - s.eval(x));
    if (above > 1e-9 * std::max(1.0, p.b2())) ++below_bad;

    // follower utilities unchanged up to the interpolation error of s*
    const double bound = payment_slope_bound(p) * interpolation_bound(ss) + 1e-9 * std::max(1.0, p.b2());
    worst_preserve_ratio = std::max(worst_preserve_ratio, du / bound);
    if (du > bound) ++preserve_bad;

    // the leader does not lose from smoothing
    const GridSpec grid;
    const double u_s = brute_force_leader_utility(p, s, grid);
    const double u_ss = brute_force_leader_utility(p, ss, grid);
    const double res = grid_resolution(p, grid, std::max({p.b2(), s.max_value(), ss.max_value()}));
    worst_oracle_margin = std::min(worst_oracle_margin, (u_ss - u_s + 3.0 * res) / res);
    if (u_ss < u_s - 3.0 * res) ++oracle_bad;

    // win probability of type x is F2[g(x)]
    const EqualBid g = equal_bid(p, ss);
    const ExhaustiveFollower census(p, ss);
    const std::vector<double> jumps = g.cut_points();
    const double reach = census.spacing() + acceptance::widest_cell(ss);
    long outside = 0;
    for (int i = 0; i < 1000; ++i) {
      const double x = p.a1() + (p.a2() - p.a1()) * u(rng);
      bool near = false;
      for (double c : jumps) near = near || std::abs(x - c) <= reach;
      if (near) {
        ++near_jumps;
        continue;
      }
      const acceptance::WinInterval iv = acceptance::win_interval(p, ss, g, census, x);
      const double pa = census.win_probability(x);
      if (pa < iv.lo || pa > iv.hi) ++outside;
    }
    win_outside += outside;
    if (outside > 0) ++win_bad;
  }
  Outcome o;
  o.pass = lipschitz_bad + below_bad + preserve_bad + oracle_bad + win_bad == 0;
  std::ostringstream d;
  d << "20 problems; failing: lipschitz " << lipschitz_bad << ", s*<=s " << below_bad << ", u_B preserved "
    << preserve_bad << " (worst error/bound " << fmt(worst_preserve_ratio, 3) << "), oracle dominance "
    << oracle_bad << " (min margin " << fmt(worst_oracle_margin, 3) << " resolutions), win probability "
    << win_bad << " (" << win_outside << " of " << 20000 - near_jumps << " points outside, " << near_jumps
    << " skipped next to jumps)";
  o.detail = d.str();
  return o;
}

Outcome perturbation_audits() {
  struct Case {
    std::string name;
    CommitmentProblem p;
    std::function<Solution(const CommitmentProblem&)> solve;
  };
  std::vector<Case> cases;
  cases.push_back({"uniform first price, closed form", uniform_problem(PaymentRule::first_price()),
                   solve_first_price_uniform_f2});
  cases.push_back({"uniform first price, search", uniform_problem(PaymentRule::first_price()),
                   [](const CommitmentProblem& p) { return solve_general(p, 3); }});
  cases.push_back({"uniform all-pay, closed form", uniform_problem(PaymentRule::all_pay()), solve_all_pay});
  cases.push_back({"uniform all-pay, search", uniform_problem(PaymentRule::all_pay()),
                   [](const CommitmentProblem& p) { return solve_general(p, 3); }});
  cases.push_back({"two-level first price, closed form", two_level_problem(), solve_first_price_uniform_f2});
  cases.push_back({"two-level first price, search", two_level_problem(),
                   [](const CommitmentProblem& p) { return solve_general(p, 3); }});
  bool pass = true;
  std::string detail;
  for (const Case& c : cases) {
    const Solution sol = c.solve(c.p);
    const AuditReport rep = perturbation_audit(c.p, sol, 200, 0);
    pass = pass && rep.max_gain <= 1e-4;
    if (!detail.empty()) detail += "; ";
    detail += c.name + " gain " + fmt(rep.max_gain, 3);
  }
  return {pass, detail};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"quadratic commitment value", quadratic_commitment},
      {"equilibrium baseline", equilibrium_baseline},
      {"first-price uniform cut", first_price_cut},
      {"kinked strategy smoothing", kinked_smoothing},
      {"all-pay closed form", all_pay_closed_form},
      {"two-level overbidding", two_level_overbidding},
      {"step bijection", bijection},
      {"structural properties", structural_properties},
      {"perturbation audits", perturbation_audits},
  };
  int failed = 0;
  int index = 0;
  for (const Criterion& c : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failed;
    std::printf("%s %d %s | %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", index, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
