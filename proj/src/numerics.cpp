#include "rankbid/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

namespace rankbid {

void Tolerance::validate() const {
  if (!(abs_tol > 0.0)) throw std::invalid_argument("Tolerance: abs_tol must be > 0");
  if (!(rel_tol >= 0.0)) throw std::invalid_argument("Tolerance: rel_tol must be >= 0");
  if (max_iter < 1) throw std::invalid_argument("Tolerance: max_iter must be >= 1");
}

namespace {

struct SimpsonState {
  const ScalarFn& f;
  double rel_tol;
  int max_depth;
  bool exhausted = false;
  double residual = 0.0;
};

double simpson_recurse(SimpsonState& st, double a, double b, double fa, double fm, double fb,
                       double whole, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = st.f(lm);
  const double frm = st.f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  const double bound = 15.0 * std::max(eps, st.rel_tol * std::abs(left + right));
  // Intervals at the resolution of double arithmetic cannot be refined further.
  const bool too_small = (m - a) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(m);
  if (std::abs(delta) <= bound || too_small) return left + right + delta / 15.0;
  if (depth >= st.max_depth) {
    st.exhausted = true;
    st.residual += std::abs(delta);
    return left + right + delta / 15.0;
  }
  return simpson_recurse(st, a, m, fa, flm, fm, left, 0.5 * eps, depth + 1) +
         simpson_recurse(st, m, b, fm, frm, fb, right, 0.5 * eps, depth + 1);
}

}  // namespace

double integrate(const ScalarFn& f, double lo, double hi, const Tolerance& tol,
                 std::span<const double> splits) {
  tol.validate();
  if (hi < lo) throw std::invalid_argument("integrate: lo > hi");
  if (hi == lo) return 0.0;

  std::vector<double> cuts;
  cuts.reserve(splits.size() + 2);
  cuts.push_back(lo);
  for (double s : splits)
    if (s > lo && s < hi) cuts.push_back(s);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  SimpsonState st{f, tol.rel_tol, std::min(tol.max_iter, 60)};
  const double total_width = hi - lo;
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    // Pieces are closed at both ends but the integrand may jump at a split;
    // nudge the evaluation points inward so each piece sees its own branch.
    const double nudge = 1e-14 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
    const double ea = std::min(a + nudge, 0.5 * (a + b));
    const double eb = std::max(b - nudge, 0.5 * (a + b));
    const double fa = f(ea);
    const double fb = f(eb);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double eps = tol.abs_tol * (b - a) / total_width;
    sum += simpson_recurse(st, a, b, fa, fm, fb, whole, eps, 0);
  }
  if (st.exhausted && st.residual > tol.abs_tol + tol.rel_tol * std::abs(sum)) {
    throw NonConvergence("integrate: recursion depth exhausted", sum, st.residual);
  }
  return sum;
}

RootBracket find_root_bracket(const ScalarFn& f, double lo, double hi, const Tolerance& tol) {
  tol.validate();
  if (hi < lo) std::swap(lo, hi);
  double flo = f(lo);
  double fhi = f(hi);
  if (std::isnan(flo) || std::isnan(fhi)) throw NoRoot("find_root: NaN at bracket end");
  if (flo == 0.0) return {lo, lo, lo, 0};
  if (fhi == 0.0) return {hi, hi, hi, 0};
  if (flo * fhi > 0.0) throw NoRoot("find_root: no sign change on bracket");

  // Illinois variant: the retained endpoint has its value halved whenever it
  // survives twice, which restores superlinear convergence.
  int side = 0;
  double width_before = hi - lo;
  for (int it = 1; it <= tol.max_iter; ++it) {
    if (hi - lo <= tol.abs_tol) return {0.5 * (lo + hi), lo, hi, it - 1};
    double x = (lo * fhi - hi * flo) / (fhi - flo);
    // Every third step is a bisection unless the bracket already halved.
    if (it % 3 == 0 && (hi - lo) > 0.5 * width_before) x = 0.5 * (lo + hi);
    if (it % 3 == 0) width_before = hi - lo;
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    const double fx = f(x);
    if (fx == 0.0) return {x, x, x, it};
    if ((fx < 0.0) == (flo < 0.0)) {
      lo = x;
      flo = fx;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = x;
      fhi = fx;
      if (side == 1) flo *= 0.5;
      side = 1;
    }
  }
  if (hi - lo <= tol.abs_tol) return {0.5 * (lo + hi), lo, hi, tol.max_iter};
  throw NonConvergence("find_root: iteration budget exhausted", 0.5 * (lo + hi), hi - lo);
}

double find_root(const ScalarFn& f, double lo, double hi, const Tolerance& tol) {
  return find_root_bracket(f, lo, hi, tol).root;
}

LineMax golden_section_max(const ScalarFn& f, double lo, double hi, double x_tol, int max_iter) {
  if (hi < lo) std::swap(lo, hi);
  LineMax best{lo, f(lo)};
  const double fhi = f(hi);
  if (fhi > best.value) best = {hi, fhi};
  if (hi - lo <= x_tol) return best;

  constexpr double inv_phi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > x_tol; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  if (fc > best.value) best = {c, fc};
  if (fd > best.value) best = {d, fd};
  return best;
}

std::size_t worker_count() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("COMMITMENT_SOLVER_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = std::min<std::size_t>(n, static_cast<std::size_t>(cap));
  }
  return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n < 2) throw std::invalid_argument("linspace: need at least two points");
  std::vector<double> out(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

std::vector<double> merge_grid(std::vector<double> base, std::span<const double> extra, double lo,
                               double hi, double merge_tol) {
  base.insert(base.end(), extra.begin(), extra.end());
  std::vector<double> out;
  out.reserve(base.size());
  for (double v : base)
    if (v >= lo && v <= hi) out.push_back(v);
  std::sort(out.begin(), out.end());
  std::vector<double> merged;
  merged.reserve(out.size());
  for (double v : out) {
    if (merged.empty() || v - merged.back() > merge_tol) {
      merged.push_back(v);
    } else if (v == lo || v == hi) {
      merged.back() = v;  // keep exact endpoints
    }
  }
  return merged;
}

}  // namespace rankbid
