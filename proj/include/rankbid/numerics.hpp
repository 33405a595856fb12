#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rankbid {

/// Error bounds shared by the quadrature, root and line-search kernels.
struct Tolerance {
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  int max_iter = 200;

  /// Throws std::invalid_argument unless abs_tol > 0, rel_tol >= 0, max_iter >= 1.
  void validate() const;
};

/// Raised when an iterative kernel hits its iteration budget.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double estimate, double residual)
      : std::runtime_error(what), estimate_(estimate), residual_(residual) {}
  double estimate() const noexcept { return estimate_; }
  double residual() const noexcept { return residual_; }

 private:
  double estimate_;
  double residual_;
};

/// Raised by find_root when the bracket has no sign change.
class NoRoot : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ScalarFn = std::function<double(double)>;

/// Adaptive Simpson quadrature of f over [lo, hi].
///
/// `splits` are interior breakpoints of f (kinks or jumps); each piece between
/// consecutive splits is integrated separately so the adaptive rule only ever
/// sees smooth integrands. Splits outside (lo, hi) are ignored. The recursion
/// depth per piece is bounded by tol.max_iter; exhausting it throws
/// NonConvergence carrying the best estimate and the residual error estimate.
double integrate(const ScalarFn& f, double lo, double hi, const Tolerance& tol = {},
                 std::span<const double> splits = {});

struct RootBracket {
  double root = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  int iterations = 0;
};

/// Bracketed root of f on [lo, hi] by Illinois regula falsi with bisection
/// safeguard. The returned bracket satisfies hi - lo <= tol.abs_tol (or f
/// vanished exactly) and f(lo) * f(hi) <= 0.
RootBracket find_root_bracket(const ScalarFn& f, double lo, double hi, const Tolerance& tol = {});

/// Convenience wrapper returning only the root estimate.
double find_root(const ScalarFn& f, double lo, double hi, const Tolerance& tol = {});

struct LineMax {
  double x = 0.0;
  double value = 0.0;
};

/// Golden-section maximisation over [lo, hi]. The endpoints are evaluated as
/// well, so a monotone f returns the better endpoint.
LineMax golden_section_max(const ScalarFn& f, double lo, double hi, double x_tol,
                           int max_iter = 200);

/// Number of worker threads: hardware concurrency, capped by the
/// COMMITMENT_SOLVER_THREADS environment variable when it is set.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) across worker_count() threads. Exceptions from
/// workers are rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// n evenly spaced points covering [lo, hi] inclusive (n >= 2).
std::vector<double> linspace(double lo, double hi, std::size_t n);

/// Sorted union of `base` and `extra` restricted to [lo, hi], with points
/// closer than `merge_tol` collapsed.
std::vector<double> merge_grid(std::vector<double> base, std::span<const double> extra, double lo,
                               double hi, double merge_tol = 1e-12);

}  // namespace rankbid
