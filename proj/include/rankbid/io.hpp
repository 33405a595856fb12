#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "rankbid/optimizer.hpp"
#include "rankbid/oracle.hpp"
#include "rankbid/problem.hpp"
#include "rankbid/strategy.hpp"

namespace rankbid {

/// Malformed or invalid user input. The message names the line or the JSON
/// field at fault.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemSpec {
  CommitmentProblem problem;
  GridSpec grid;
};

/// Parses the problem JSON:
///   {"f1": {"breakpoints": [...], "densities": [...]} | {"uniform": [lo, hi]},
///    "f2": same,
///    "auction": {"kind": "first_price" | "all_pay" | "custom",
///                "participation": {"value_at_zero", "breakpoints", "slopes"},
///                "winning": {...}},
///    "tolerances": {"abs_tol", "rel_tol", "max_iter"},
///    "grids": {"n", "m", "k", "bid_ceiling", "curve_samples"},
///    "tie_breaking": {"ties_to_follower", "lowest_best_response"}}
/// The last three sections are optional.
ProblemSpec parse_problem(const std::string& text);
ProblemSpec load_problem(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

/// Writes through a temporary file in the same directory and renames it over
/// the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Shortest round-trip decimal form, independent of the locale.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Comma-separated numbers, one header row. Throws InputError naming the line
/// of the first non-numeric cell or ragged row.
CsvTable parse_csv(const std::string& text, std::size_t columns);

std::string to_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns);

/// Two-column strategy file (x, bid).
RawStrategy parse_strategy_csv(const std::string& text);

/// Curve as (x, value) rows; repeated x encode jumps.
std::string curve_csv(const MonotoneCurve& c, const std::string& value_name);
MonotoneCurve parse_curve_csv(const std::string& text, bool left_continuous);

std::string solution_json(const Solution& sol);

struct StoredSolution {
  std::string method;
  double leader_utility = 0.0;
  std::vector<double> cut_points;
  double stationarity_residual = 0.0;
  std::vector<std::string> notes;
};

StoredSolution parse_solution_json(const std::string& text);

}  // namespace rankbid
