#include "rankbid/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rankbid {

PiecewiseDensity::PiecewiseDensity(std::vector<double> breakpoints, std::vector<double> densities)
    : breakpoints_(std::move(breakpoints)), densities_(std::move(densities)) {
  if (breakpoints_.size() < 2)
    throw std::invalid_argument("PiecewiseDensity: need at least two breakpoints");
  if (densities_.size() + 1 != breakpoints_.size())
    throw std::invalid_argument("PiecewiseDensity: expected one density per segment");
  for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i + 1] > breakpoints_[i]) || !std::isfinite(breakpoints_[i + 1]))
      throw std::invalid_argument("PiecewiseDensity: breakpoints must be finite and strictly increasing");
  }
  double mass = 0.0;
  for (std::size_t i = 0; i < densities_.size(); ++i) {
    if (!(densities_[i] > 0.0) || !std::isfinite(densities_[i]))
      throw std::invalid_argument("PiecewiseDensity: density on segment " + std::to_string(i) +
                                  " must be positive");
    mass += densities_[i] * (breakpoints_[i + 1] - breakpoints_[i]);
  }
  if (std::abs(mass - 1.0) > 1e-6)
    throw std::invalid_argument("PiecewiseDensity: total mass " + std::to_string(mass) +
                                " is not 1");
  for (double& d : densities_) d /= mass;

  cumulative_.resize(breakpoints_.size());
  cumulative_[0] = 0.0;
  for (std::size_t i = 0; i < densities_.size(); ++i)
    cumulative_[i + 1] = cumulative_[i] + densities_[i] * (breakpoints_[i + 1] - breakpoints_[i]);
  cumulative_.back() = 1.0;
}

PiecewiseDensity PiecewiseDensity::uniform(double lo, double hi) {
  if (!(hi > lo)) throw std::invalid_argument("PiecewiseDensity::uniform: empty support");
  return PiecewiseDensity({lo, hi}, {1.0 / (hi - lo)});
}

std::size_t PiecewiseDensity::segment_of(double x) const noexcept {
  // Index i such that breakpoints_[i] <= x < breakpoints_[i+1], clamped.
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  std::size_t idx = it == breakpoints_.begin() ? 0 : static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
  return std::min(idx, densities_.size() - 1);
}

double PiecewiseDensity::pdf(double x) const noexcept {
  if (x < lower() || x > upper()) return 0.0;
  return densities_[segment_of(x)];
}

double PiecewiseDensity::pdf_left(double x) const noexcept {
  if (x < lower() || x > upper()) return 0.0;
  auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), x);
  std::size_t idx = it == breakpoints_.begin() ? 0 : static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
  return densities_[std::min(idx, densities_.size() - 1)];
}

double PiecewiseDensity::cdf(double x) const noexcept {
  if (x <= lower()) return 0.0;
  if (x >= upper()) return 1.0;
  const std::size_t i = segment_of(x);
  return std::min(1.0, cumulative_[i] + densities_[i] * (x - breakpoints_[i]));
}

double PiecewiseDensity::quantile(double q) const {
  if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("quantile: probability outside [0, 1]");
  if (q == 0.0) return lower();
  if (q == 1.0) return upper();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), q);
  std::size_t i = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
  i = std::min(i, densities_.size() - 1);
  const double x = breakpoints_[i] + (q - cumulative_[i]) / densities_[i];
  return std::clamp(x, breakpoints_[i], breakpoints_[i + 1]);
}

double PiecewiseDensity::max_density() const noexcept {
  return *std::max_element(densities_.begin(), densities_.end());
}

bool PiecewiseDensity::density_nondecreasing() const noexcept {
  return std::is_sorted(densities_.begin(), densities_.end());
}

double PiecewiseDensity::integrate_weighted(const ScalarFn& w, double lo, double hi,
                                            const Tolerance& tol,
                                            std::span<const double> w_splits) const {
  const double slack = 1e-12 * std::max(1.0, upper() - lower());
  if (lo < lower() - slack || hi > upper() + slack || hi < lo)
    throw std::domain_error("integrate_weighted: interval outside the support");
  lo = std::max(lo, lower());
  hi = std::min(hi, upper());
  std::vector<double> splits(w_splits.begin(), w_splits.end());
  splits.insert(splits.end(), breakpoints_.begin(), breakpoints_.end());
  return integrate([&](double t) { return w(t) * pdf(t); }, lo, hi, tol, splits);
}

}  // namespace rankbid
