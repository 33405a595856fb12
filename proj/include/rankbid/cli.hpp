#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace rankbid::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_verification_failed = 1;
inline constexpr int exit_input_error = 2;

struct CommonOptions {
  std::optional<double> tol;
  std::optional<std::size_t> grid_n, grid_m, grid_k;
  std::uint64_t seed = 0;
};

int cmd_solve(const std::string& spec_path, const std::string& method, const std::string& out_dir,
              std::size_t max_steps, const CommonOptions& opt, std::ostream& out, std::ostream& err);
int cmd_respond(const std::string& spec_path, const std::string& strategy_csv, const std::string& out_dir,
                const CommonOptions& opt, std::ostream& out, std::ostream& err);
int cmd_smooth(const std::string& spec_path, const std::string& strategy_csv, const std::string& out_dir,
               const CommonOptions& opt, std::ostream& out, std::ostream& err);
int cmd_verify(const std::string& spec_path, const std::string& solution_dir, std::size_t trials,
               const CommonOptions& opt, std::ostream& out, std::ostream& err);

/// Full command line: rankbid <solve|respond|smooth|verify> ...
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rankbid::cli
