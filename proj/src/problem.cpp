#include "rankbid/problem.hpp"

#include <stdexcept>
#include <string>

namespace rankbid {

void CommitmentProblem::validate() const {
  tol.validate();
  if (a1() < 0.0 || b1() < 0.0)
    throw std::invalid_argument("CommitmentProblem: valuations must be nonnegative");
  if (curve_samples < 3) throw std::invalid_argument("CommitmentProblem: curve_samples must be >= 3");
  const auto violations = rankbid::validate(rule);
  if (!violations.empty()) {
    std::string msg = "CommitmentProblem: invalid payment rule:";
    for (const auto& v : violations) msg += " " + v.message + ";";
    throw std::invalid_argument(msg);
  }
}

}  // namespace rankbid
