#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rankbid/cli.hpp"
#include "rankbid/follower.hpp"
#include "rankbid/io.hpp"
#include "rankbid/optimizer.hpp"
#include "rankbid/oracle.hpp"
#include "rankbid/smoothing.hpp"

namespace fs = std::filesystem;

namespace rankbid::cli {

namespace {

ProblemSpec load(const std::string& spec_path, const CommonOptions& opt) {
  ProblemSpec spec = load_problem(spec_path);
  if (opt.tol) {
    if (!(*opt.tol > 0.0)) throw InputError("--tol must be positive");
    spec.problem.tol.abs_tol = *opt.tol;
    spec.problem.tol.rel_tol = *opt.tol;
  }
  if (opt.grid_n) spec.grid.leader_types = *opt.grid_n;
  if (opt.grid_m) spec.grid.bids = *opt.grid_m;
  if (opt.grid_k) spec.grid.follower_types = *opt.grid_k;
  try {
    spec.grid.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return spec;
}

MonotoneCurve load_strategy(const CommitmentProblem& p, const std::string& path) {
  const RawStrategy raw = parse_strategy_csv(read_file(path));
  try {
    return sort_strategy(raw, p.leader);
  } catch (const std::invalid_argument& e) {
    throw InputError(path + ": " + e.what());
  }
}

void prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir + ": " + ec.message());
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return exit_input_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_input_error;
  }
}

}  // namespace

int cmd_solve(const std::string& spec_path, const std::string& method, const std::string& out_dir,
              std::size_t max_steps, const CommonOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ProblemSpec spec = load(spec_path, opt);
    const CommitmentProblem& p = spec.problem;
    SearchOptions search;
    search.seed = opt.seed;
    Solution sol;
    if (method == "auto") {
      sol = solve_auto(p, max_steps, search);
    } else if (method == "first_price_uniform" || method == "all_pay") {
      try {
        sol = method == "all_pay" ? solve_all_pay(p) : solve_first_price_uniform_f2(p);
      } catch (const UnsupportedProblem& e) {
        sol = solve_general(p, max_steps, search);
        sol.notes.push_back(std::string("requested closed form unsupported (") + e.what() +
                            "); fell back to general search");
      }
    } else if (method == "general") {
      sol = solve_general(p, max_steps, search);
    } else {
      throw InputError("--method must be auto, first_price_uniform, all_pay or general");
    }
    prepare_dir(out_dir);
    const fs::path dir(out_dir);
    write_atomic(dir / "solution.json", solution_json(sol));
    write_atomic(dir / "g.csv", curve_csv(sol.g.curve, "g"));
    write_atomic(dir / "s_star.csv", curve_csv(sol.s_star, "s_star"));
    out << "method " << to_string(sol.method) << "\n";
    out << "leader_utility " << format_double(sol.leader_utility) << "\n";
    for (double c : sol.cut_points) out << "cut_point " << format_double(c) << "\n";
    for (const auto& n : sol.notes) out << "note: " << n << "\n";
    return exit_ok;
  });
}

int cmd_respond(const std::string& spec_path, const std::string& strategy_csv, const std::string& out_dir,
                const CommonOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ProblemSpec spec = load(spec_path, opt);
    const MonotoneCurve s = load_strategy(spec.problem, strategy_csv);
    const ResponseProfile r = response_profile(spec.problem, s);
    prepare_dir(out_dir);
    const std::vector<double> u(r.utility.values().begin(), r.utility.values().end());
    write_atomic(fs::path(out_dir) / "response.csv",
                 to_csv({"y", "u_B", "best_bid", "win_cutoff"}, {r.y, u, r.best_bid, r.win_cutoff}));
    out << "wrote " << r.y.size() << " follower types\n";
    return exit_ok;
  });
}

int cmd_smooth(const std::string& spec_path, const std::string& strategy_csv, const std::string& out_dir,
               const CommonOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ProblemSpec spec = load(spec_path, opt);
    const CommitmentProblem& p = spec.problem;
    const MonotoneCurve s = load_strategy(p, strategy_csv);
    const MonotoneCurve s_star = smooth(p, s);
    const EqualBid g = equal_bid(p, s_star);

    const ResponseModel model(p, s);
    std::vector<double> xs;
    for (std::size_t i = 1; i <= 200; ++i) xs.push_back(p.a1() + (p.a2() - p.a1()) * double(i) / 200.0);
    std::vector<double> cy, cx, ct;
    for (double y : linspace(0.0, p.b2(), 11)) {
      const EqualUtilityCurve c = equal_utility_curve(p, model, y, xs);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        cy.push_back(y);
        cx.push_back(c.x[i]);
        ct.push_back(c.t[i]);
      }
    }
    prepare_dir(out_dir);
    const fs::path dir(out_dir);
    write_atomic(dir / "s_star.csv", curve_csv(s_star, "s_star"));
    write_atomic(dir / "g.csv", curve_csv(g.curve, "g"));
    write_atomic(dir / "eu_curves.csv", to_csv({"y", "x", "t"}, {cy, cx, ct}));
    for (double c : g.cut_points()) out << "jump " << format_double(c) << "\n";
    return exit_ok;
  });
}

int cmd_verify(const std::string& spec_path, const std::string& solution_dir, std::size_t trials,
               const CommonOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ProblemSpec spec = load(spec_path, opt);
    const CommitmentProblem& p = spec.problem;
    const fs::path dir(solution_dir);
    for (const char* f : {"solution.json", "g.csv", "s_star.csv"})
      if (!fs::exists(dir / f)) throw InputError("missing " + (dir / f).string());
    const StoredSolution stored = parse_solution_json(read_file(dir / "solution.json"));
    MonotoneCurve g_curve = parse_curve_csv(read_file(dir / "g.csv"), true);
    const MonotoneCurve s_file = parse_curve_csv(read_file(dir / "s_star.csv"), false);
    EqualBid g;
    try {
      g = EqualBid(std::move(g_curve));
      Reconstruction check(p, g);
    } catch (const std::invalid_argument& e) {
      throw InputError(std::string("g.csv: ") + e.what());
    }

    nlohmann::json checks = nlohmann::json::array();
    std::vector<std::string> findings;
    bool all_pass = true;
    auto record = [&](const std::string& name, bool pass, double value, double threshold, const std::string& detail) {
      checks.push_back({{"name", name}, {"passed", pass}, {"value", value}, {"threshold", threshold}, {"detail", detail}});
      if (!pass) {
        all_pass = false;
        findings.push_back(name + ": " + detail);
      }
      out << (pass ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
    };

    const double utility = leader_utility(p, g);
    const double drift = std::abs(utility - stored.leader_utility);
    record("utility recompute", drift <= 1e-6, drift, 1e-6,
           "recomputed " + format_double(utility) + " vs stored " + format_double(stored.leader_utility));

    const Reconstruction rec(p, g);
    double s_err = 0.0;
    for (double x : s_file.x()) s_err = std::max(s_err, std::abs(s_file.eval(x) - rec.bid(x)));
    const double s_tol = 1e-6 * std::max(1.0, p.b2());
    record("s_star consistency", s_err <= s_tol, s_err, s_tol, "max |s_star.csv - reconstruct(g)| " + format_double(s_err));

    const BruteForce bf(p, [&](double x) { return rec.bid(x); }, spec.grid);
    const double res = grid_resolution(p, spec.grid, bf.ceiling());
    const double bf_gap = std::abs(bf.leader_utility() - utility);
    record("brute-force agreement", bf_gap <= 3.0 * res, bf_gap, 3.0 * res,
           "grid utility " + format_double(bf.leader_utility()) + " vs " + format_double(utility));

    const SweepResult sweep = sweep_cut_point(p, default_cut_grid(p));
    const double sweep_gap = sweep.max_utility - utility;
    record("sweep dominance", sweep_gap <= 1e-6, sweep_gap, 1e-6,
           "best two-piece utility " + format_double(sweep.max_utility) + " at t=" + format_double(sweep.argmax));
    const auto cuts = g.cut_points();
    const bool two_piece = cuts.size() == 1 && g.curve.min_value() == 0.0 && g.curve.max_value() == p.b2();
    if (two_piece) {
      const double off = std::abs(cuts[0] - sweep.argmax);
      const double tol = 3e-3 * (p.a2() - p.a1());
      record("sweep argmax", off <= tol, off, tol,
             "cut " + format_double(cuts[0]) + " vs sweep argmax " + format_double(sweep.argmax));
    }

    Solution sol;
    sol.g = g;
    sol.leader_utility = utility;
    const AuditReport audit = perturbation_audit(p, sol, trials, opt.seed);
    record("perturbation gain", audit.max_gain <= 1e-4, audit.max_gain, 1e-4,
           "max gain " + format_double(audit.max_gain) + " over " + std::to_string(trials) + " trials (" +
               (audit.worst_kind.empty() ? std::string("none") : audit.worst_kind) + ")");

    nlohmann::json report;
    report["passed"] = all_pass;
    report["seed"] = opt.seed;
    report["trials"] = trials;
    report["checks"] = checks;
    report["findings"] = findings;
    report["grid"] = {{"n", spec.grid.leader_types},
                      {"m", spec.grid.bids},
                      {"k", spec.grid.follower_types},
                      {"bid_ceiling", bf.ceiling()},
                      {"resolution", res}};
    report["sweep"] = {{"argmax", sweep.argmax}, {"grid_argmax", sweep.grid_argmax}, {"max_utility", sweep.max_utility}};
    report["perturbation"] = {
        {"base_utility", audit.base_utility}, {"max_gain", audit.max_gain}, {"worst_kind", audit.worst_kind}};
    write_atomic(dir / "audit.json", report.dump(2) + "\n");
    std::vector<double> st, su;
    for (const auto& [t, u] : sweep.curve) {
      st.push_back(t);
      su.push_back(u);
    }
    write_atomic(dir / "sweep.csv", to_csv({"t", "utility"}, {st, su}));
    return all_pass ? exit_ok : exit_verification_failed;
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal leader commitment in two-bidder rank-and-bid auctions"};
  app.require_subcommand(1);
  CommonOptions opt;
  double tol = 0.0;
  std::size_t gn = 0, gm = 0, gk = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--tol", tol, "absolute and relative solver tolerance");
    sub->add_option("--grid-n", gn, "brute-force leader types");
    sub->add_option("--grid-m", gm, "brute-force bid grid size");
    sub->add_option("--grid-k", gk, "brute-force follower types");
    sub->add_option("--seed", opt.seed, "random seed")->capture_default_str();
  };

  std::string spec, method = "auto", out_dir = ".", strategy, solution_dir;
  std::size_t max_steps = 3, trials = 200;

  auto* solve = app.add_subcommand("solve", "solve for the optimal commitment");
  solve->add_option("spec", spec, "problem JSON")->required();
  solve->add_option("--method", method, "auto|first_price_uniform|all_pay|general")->capture_default_str();
  solve->add_option("--out", out_dir, "output directory")->capture_default_str();
  solve->add_option("--max-steps", max_steps, "levels for the general search")->capture_default_str();
  add_common(solve);

  auto* respond = app.add_subcommand("respond", "follower best responses to a strategy");
  respond->add_option("spec", spec, "problem JSON")->required();
  respond->add_option("strategy", strategy, "strategy CSV (x,bid)")->required();
  respond->add_option("--out", out_dir, "output directory")->capture_default_str();
  add_common(respond);

  auto* smooth_cmd = app.add_subcommand("smooth", "smooth a strategy and compute its equal-bid function");
  smooth_cmd->add_option("spec", spec, "problem JSON")->required();
  smooth_cmd->add_option("strategy", strategy, "strategy CSV (x,bid)")->required();
  smooth_cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
  add_common(smooth_cmd);

  auto* verify = app.add_subcommand("verify", "audit a stored solution");
  verify->add_option("spec", spec, "problem JSON")->required();
  verify->add_option("solution_dir", solution_dir, "directory written by solve")->required();
  verify->add_option("--trials", trials, "perturbation trials")->capture_default_str();
  add_common(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_input_error;
  }
  if (tol != 0.0) opt.tol = tol;
  if (gn) opt.grid_n = gn;
  if (gm) opt.grid_m = gm;
  if (gk) opt.grid_k = gk;

  if (*solve) return cmd_solve(spec, method, out_dir, max_steps, opt, out, err);
  if (*respond) return cmd_respond(spec, strategy, out_dir, opt, out, err);
  if (*smooth_cmd) return cmd_smooth(spec, strategy, out_dir, opt, out, err);
  return cmd_verify(spec, solution_dir, trials, opt, out, err);
}

}  // namespace rankbid::cli
