#include <cmath>
#include <vector>

#include "doctest.h"
#include "rankbid/optimizer.hpp"
#include "test_support.hpp"

using namespace rankbid;

namespace {

const double t_star = 0.5671432904097838;  // t = -ln t

// t - b2 * integral_t^{a2} f1 / F1 by plain quadrature, independent of the
// solver's closed form for the integral
double phi_quadrature(const CommitmentProblem& p, double t) {
  return t - p.b2() * integrate([&](double x) { return p.leader.pdf(x) / p.leader.cdf(x); }, t, p.a2(), {},
                                p.leader.breakpoints());
}

}  // namespace

TEST_CASE("leader utility closed forms") {
  const CommitmentProblem fp = test::uniform_first_price();
  const double u = leader_utility(fp, EqualBid::step(0.0, 1.0, {t_star}, {0.0, 1.0}));
  CHECK(u == doctest::Approx(t_star + t_star * t_star / 2.0 - 0.5).epsilon(1e-9));
  CHECK(leader_utility(fp, EqualBid(MonotoneCurve::constant(0.0, 1.0, 0.0, true))) == doctest::Approx(0.0));
  // single level v: s* = v and the utility is v (1/2 - v)
  CHECK(leader_utility(fp, EqualBid(MonotoneCurve::constant(0.0, 1.0, 0.3, true))) ==
        doctest::Approx(0.3 * 0.2).epsilon(1e-9));
  const CommitmentProblem ap = test::uniform_all_pay();
  CHECK(leader_utility(ap, EqualBid::step(0.0, 1.0, {0.5}, {0.0, 1.0})) == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("stationarity function at the closed-form optima") {
  const CommitmentProblem fp = test::uniform_first_price();
  const EqualBid g = EqualBid::step(0.0, 1.0, {t_star}, {0.0, 1.0});
  CHECK(std::abs(stationarity_h(fp, g, t_star)) <= 1e-8);
  // h / f1 = x - t0 below the cut
  CHECK(stationarity_h(fp, g, 0.3) == doctest::Approx(0.3 - t_star).epsilon(1e-8));
  CHECK(stationarity_h(fp, g, 0.9) > 0.0);

  const CommitmentProblem ap = test::uniform_all_pay();
  const EqualBid ga = EqualBid::step(0.0, 1.0, {0.5}, {0.0, 1.0});
  for (double x : {0.3, 0.6, 0.75, 1.0})
    CHECK(stationarity_h(ap, ga, x) == doctest::Approx(2.0 * x - 1.0).epsilon(1e-9));
  CHECK(stationarity_residual(ap, ga) <= 1e-8);
}

TEST_CASE("integral of h over a free level is the derivative of the objective") {
  // interior level v on (c, a2]; dU/dv by central differences
  const PaymentRule kinked =
      PaymentRule::custom(PiecewiseLinear(0.0, {0.0, 0.3}, {0.2, 0.5}), PiecewiseLinear(0.0, {0.0}, {0.6}));
  for (const PaymentRule& rule : {PaymentRule::first_price(), PaymentRule::all_pay(), kinked}) {
    const CommitmentProblem p(PiecewiseDensity({0.0, 0.5, 1.0}, {1.4, 0.6}), PiecewiseDensity::uniform(0.0, 1.0),
                              rule);
    const double c = 0.45;
    const double v = 0.6;
    const double dv = 1e-5;
    auto U = [&](double level) { return leader_utility(p, EqualBid::step(0.0, 1.0, {c}, {0.0, level})); };
    const double fd = (U(v + dv) - U(v - dv)) / (2.0 * dv);
    const EqualBid g = EqualBid::step(0.0, 1.0, {c}, {0.0, v});
    const double ih = integrate([&](double x) { return stationarity_h(p, g, x); }, c, 1.0,
                                Tolerance{1e-8, 1e-8, 40}, std::vector<double>{0.5});
    CHECK(ih == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("first-price cut point") {
  const CommitmentProblem fp = test::uniform_first_price();
  const Solution s = solve_first_price_uniform_f2(fp);
  REQUIRE(s.cut_points.size() == 1);
  CHECK(s.cut_points[0] == doctest::Approx(t_star).epsilon(1e-9));
  CHECK(s.leader_utility == doctest::Approx(0.2279).epsilon(1e-3));
  CHECK(s.leader_utility > 1.0 / 6.0);
  CHECK(s.method == Method::first_price_uniform);
  CHECK(s.s_star.eval(0.8) == doctest::Approx(1.0 - t_star / 0.8).epsilon(1e-9));
  CHECK(s.stationarity_residual <= 1e-6);

  const CommitmentProblem cor = test::two_level_first_price();
  const Solution c = solve_first_price_uniform_f2(cor);
  REQUIRE(c.cut_points.size() == 1);
  CHECK(std::abs(phi_quadrature(cor, c.cut_points[0])) <= 1e-7);

  const CommitmentProblem ap = test::uniform_all_pay();
  CHECK_THROWS_AS(solve_first_price_uniform_f2(ap), UnsupportedProblem);
  const CommitmentProblem shifted(PiecewiseDensity::uniform(0.0, 1.0), PiecewiseDensity::uniform(0.2, 1.0),
                                  PaymentRule::first_price());
  CHECK_THROWS_AS(solve_first_price_uniform_f2(shifted), UnsupportedProblem);
}

TEST_CASE("all-pay cut point") {
  const Solution s = solve_all_pay(test::uniform_all_pay());
  REQUIRE(s.cut_points.size() == 1);
  CHECK(s.cut_points[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(s.leader_utility == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(s.s_star.eval(0.75) == doctest::Approx(0.25).epsilon(1e-9));

  const CommitmentProblem wide(PiecewiseDensity::uniform(0.0, 2.0), PiecewiseDensity::uniform(0.0, 10.0),
                               PaymentRule::all_pay());
  CHECK(solve_all_pay(wide).cut_points.at(0) == doctest::Approx(5.0 / 3.0).epsilon(1e-9));

  const CommitmentProblem falling(PiecewiseDensity::uniform(0.0, 1.0), PiecewiseDensity({0.0, 0.5, 1.0}, {1.5, 0.5}),
                                  PaymentRule::all_pay());
  CHECK_THROWS_AS(solve_all_pay(falling), UnsupportedProblem);
}

TEST_CASE("general search recovers the closed forms") {
  const CommitmentProblem fp = test::uniform_first_price();
  const Solution two = solve_general(fp, 2);
  REQUIRE(two.cut_points.size() == 1);
  CHECK(two.cut_points[0] == doctest::Approx(t_star).epsilon(5e-3));
  CHECK(two.leader_utility >= 0.2269);
  CHECK(two.leader_utility == doctest::Approx(solve_first_price_uniform_f2(fp).leader_utility).epsilon(1e-3));

  // a single level v earns v (1/2 - v), best at v = 1/4
  const Solution one = solve_general(fp, 1);
  CHECK(one.leader_utility == doctest::Approx(1.0 / 16.0).epsilon(1e-6));
  CHECK(one.g(0.5) == doctest::Approx(0.25).epsilon(1e-4));
  CHECK(one.leader_utility <= two.leader_utility);

  const Solution ap = solve_general(test::uniform_all_pay(), 2);
  REQUIRE(ap.cut_points.size() == 1);
  CHECK(ap.cut_points[0] == doctest::Approx(0.5).epsilon(5e-3));
}

TEST_CASE("auto dispatch") {
  CHECK(solve_auto(test::uniform_first_price()).method == Method::first_price_uniform);
  CHECK(solve_auto(test::uniform_all_pay()).method == Method::all_pay);
  const CommitmentProblem shifted(PiecewiseDensity::uniform(0.0, 1.0), PiecewiseDensity::uniform(0.2, 1.0),
                                  PaymentRule::first_price());
  const Solution s = solve_auto(shifted, 2);
  CHECK(s.method == Method::general_search);
  CHECK(method_from_string("all_pay") == Method::all_pay);
}
