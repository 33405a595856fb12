#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rankbid/cli.hpp"
#include "rankbid/io.hpp"
#include "rankbid/optimizer.hpp"

namespace fs = std::filesystem;
using namespace rankbid;

namespace {

const fs::path spec_dir = SPEC_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "rankbid");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Fresh scratch directory per test case, removed afterwards.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) {
    dir = fs::temp_directory_path() / ("rankbid_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator/(const std::string& f) const { return (dir / f).string(); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string spec(const std::string& name) { return (spec_dir / name).string(); }

CsvTable read_table(const fs::path& p, std::size_t columns) { return parse_csv(slurp(p), columns); }

}  // namespace

TEST_CASE("solve picks the first-price closed form for the uniform instance") {
  Scratch tmp("solve_fp");
  const Run r = run({"solve", spec("uniform_first_price.json"), "--out", tmp / "out"});
  REQUIRE(r.code == cli::exit_ok);
  const StoredSolution sol = parse_solution_json(slurp(tmp / "out/solution.json"));
  CHECK(sol.method == "first_price_uniform");
  REQUIRE(sol.cut_points.size() == 1);
  CHECK(sol.cut_points[0] == doctest::Approx(0.5671432904).epsilon(1e-8));
  CHECK(sol.leader_utility == doctest::Approx(0.227969).epsilon(1e-5));
  CHECK(fs::exists(tmp / "out/g.csv"));
  CHECK(fs::exists(tmp / "out/s_star.csv"));
  CHECK(slurp(tmp / "out/g.csv").rfind("x,g\n", 0) == 0);
  CHECK(slurp(tmp / "out/s_star.csv").rfind("x,s_star\n", 0) == 0);
}

TEST_CASE("solve on uniform all-pay cuts at one half") {
  Scratch tmp("solve_ap");
  const Run r = run({"solve", spec("uniform_all_pay.json"), "--out", tmp / "out"});
  REQUIRE(r.code == cli::exit_ok);
  const StoredSolution sol = parse_solution_json(slurp(tmp / "out/solution.json"));
  CHECK(sol.method == "all_pay");
  REQUIRE(sol.cut_points.size() == 1);
  CHECK(sol.cut_points[0] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("a requested closed form that does not apply falls back to search") {
  Scratch tmp("solve_fallback");
  const Run r = run({"solve", spec("uniform_all_pay.json"), "--method", "first_price_uniform", "--out", tmp / "out"});
  REQUIRE(r.code == cli::exit_ok);
  const StoredSolution sol = parse_solution_json(slurp(tmp / "out/solution.json"));
  CHECK(sol.method == "general_search");
  bool noted = false;
  for (const std::string& n : sol.notes) noted = noted || n.find("fell back") != std::string::npos;
  CHECK(noted);
}

TEST_CASE("an unknown method is an input error") {
  Scratch tmp("solve_bad_method");
  const Run r = run({"solve", spec("uniform_all_pay.json"), "--method", "simplex", "--out", tmp / "out"});
  CHECK(r.code == cli::exit_input_error);
  CHECK_FALSE(fs::exists(tmp / "out/solution.json"));
}

TEST_CASE("malformed JSON exits 2 and writes nothing") {
  Scratch tmp("malformed");
  {
    std::ofstream f(tmp / "bad.json");
    f << "{\"f1\": {\"uniform\": [0, 1]},\n  \"f2\": ";
  }
  const Run r = run({"solve", tmp / "bad.json", "--out", tmp / "out"});
  CHECK(r.code == cli::exit_input_error);
  CHECK(r.err.find("line") != std::string::npos);
  CHECK_FALSE(fs::exists(tmp / "out"));
}

TEST_CASE("invalid field values are reported by name") {
  Scratch tmp("bad_field");
  {
    std::ofstream f(tmp / "bad.json");
    f << R"({"f1": {"uniform": [1, 0]}, "f2": {"uniform": [0, 1]}, "auction": {"kind": "first_price"}})";
  }
  const Run r = run({"solve", tmp / "bad.json", "--out", tmp / "out"});
  CHECK(r.code == cli::exit_input_error);
  CHECK(r.err.find("f1") != std::string::npos);
}

TEST_CASE("respond against the zero strategy gives u_B = y") {
  Scratch tmp("respond_zero");
  {
    std::ofstream f(tmp / "zero.csv");
    f << "x,bid\n0,0\n0.5,0\n1,0\n";
  }
  const Run r = run({"respond", spec("uniform_first_price.json"), tmp / "zero.csv", "--out", tmp / "out"});
  REQUIRE(r.code == cli::exit_ok);
  const CsvTable t = read_table(tmp / "out/response.csv", 4);
  REQUIRE(t.header == std::vector<std::string>{"y", "u_B", "best_bid", "win_cutoff"});
  REQUIRE(t.rows.size() > 10);
  for (const auto& row : t.rows) {
    CHECK(row[1] == doctest::Approx(row[0]).epsilon(1e-12));
    CHECK(row[2] == 0.0);
  }
}

TEST_CASE("respond against x^2/2 bids y/3") {
  Scratch tmp("respond_quadratic");
  const Run r = run({"respond", spec("uniform_first_price.json"), spec("quadratic_strategy.csv"), "--out", tmp / "out"});
  REQUIRE(r.code == cli::exit_ok);
  const CsvTable t = read_table(tmp / "out/response.csv", 4);
  double worst_bid = 0.0, worst_u = 0.0;
  for (const auto& row : t.rows) {
    const double y = row[0];
    // The strategy file samples x^2/2 every 0.005. Utility moves by O(h^2)
    // under that interpolation, while the argmax of a flat maximum moves by O(h).
    worst_bid = std::max(worst_bid, std::abs(row[2] - y / 3.0));
    worst_u = std::max(worst_u, std::abs(row[1] - (2.0 * y / 3.0) * std::sqrt(2.0 * y / 3.0)));
  }
  CHECK(worst_bid <= 1e-3);
  CHECK(worst_u < 1e-5);
}

TEST_CASE("respond on the kinked strategy follows the three-piece utility") {
  Scratch tmp("respond_kinked");
  const Run r = run({"respond", spec("uniform_first_price.json"), spec("kinked_strategy.csv"), "--out", tmp / "out"});
  REQUIRE(r.code == cli::exit_ok);
  const CsvTable t = read_table(tmp / "out/response.csv", 4);
  double worst = 0.0;
  for (const auto& row : t.rows) {
    const double y = row[0];
    const double want = y <= 0.2 ? y * y : y <= 0.5 ? 0.4 * y - 0.04 : (y + 0.3) * (y + 0.3) / 4.0;
    worst = std::max(worst, std::abs(row[1] - want));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("respond rejects non-numeric strategy rows") {
  Scratch tmp("respond_bad_csv");
  {
    std::ofstream f(tmp / "bad.csv");
    f << "x,bid\n0,0\n0.5,abc\n1,1\n";
  }
  const Run r = run({"respond", spec("uniform_first_price.json"), tmp / "bad.csv", "--out", tmp / "out"});
  CHECK(r.code == cli::exit_input_error);
  CHECK(r.err.find("line 3") != std::string::npos);
}

TEST_CASE("smooth reproduces the three-piece smoothed strategy") {
  Scratch tmp("smooth");
  const Run r = run({"smooth", spec("uniform_first_price.json"), spec("kinked_strategy.csv"), "--out", tmp / "out"});
  REQUIRE(r.code == cli::exit_ok);
  const CsvTable s = read_table(tmp / "out/s_star.csv", 2);
  double worst = 0.0;
  for (const auto& row : s.rows) {
    const double x = row[0];
    const double want = x <= 0.4 ? x / 4.0 : x <= 0.65 ? x - 0.3 : 1.0 - 0.4225 / x;
    worst = std::max(worst, std::abs(row[1] - want));
  }
  CHECK(worst < 1e-4);
  const MonotoneCurve g = parse_curve_csv(slurp(tmp / "out/g.csv"), true);
  CHECK(g.eval(0.45) == doctest::Approx(0.6).epsilon(1e-3));
  const CsvTable eu = read_table(tmp / "out/eu_curves.csv", 3);
  CHECK(eu.header == std::vector<std::string>{"y", "x", "t"});
  CHECK(eu.rows.size() == 11 * 200);
}

TEST_CASE("smoothing an already smoothed strategy changes nothing") {
  Scratch tmp("smooth_twice");
  REQUIRE(run({"smooth", spec("uniform_first_price.json"), spec("kinked_strategy.csv"), "--out", tmp / "once"}).code ==
          cli::exit_ok);
  {
    // s_star.csv has the x,s_star header; the strategy reader wants x,bid
    std::string text = slurp(tmp / "once/s_star.csv");
    text.replace(0, text.find('\n'), "x,bid");
    std::ofstream(tmp / "smoothed.csv") << text;
  }
  REQUIRE(run({"smooth", spec("uniform_first_price.json"), tmp / "smoothed.csv", "--out", tmp / "twice"}).code ==
          cli::exit_ok);
  const MonotoneCurve once = parse_curve_csv(slurp(tmp / "once/s_star.csv"), false);
  const MonotoneCurve twice = parse_curve_csv(slurp(tmp / "twice/s_star.csv"), false);
  double worst = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double x = i / 1000.0;
    worst = std::max(worst, std::abs(once.eval(x) - twice.eval(x)));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("smoothing the zero strategy gives zero curves") {
  Scratch tmp("smooth_zero");
  {
    std::ofstream f(tmp / "zero.csv");
    f << "x,bid\n0,0\n1,0\n";
  }
  REQUIRE(run({"smooth", spec("uniform_first_price.json"), tmp / "zero.csv", "--out", tmp / "out"}).code ==
          cli::exit_ok);
  for (const char* f : {"s_star.csv", "g.csv"}) {
    const CsvTable t = read_table(tmp.dir / "out" / f, 2);
    for (const auto& row : t.rows) CHECK(row[1] == 0.0);
  }
}

TEST_CASE("verify accepts a fresh solution and rejects a moved cut") {
  Scratch tmp("verify");
  REQUIRE(run({"solve", spec("uniform_first_price.json"), "--out", tmp / "good"}).code == cli::exit_ok);
  const Run ok = run({"verify", spec("uniform_first_price.json"), tmp / "good"});
  CHECK(ok.code == cli::exit_ok);
  CHECK(fs::exists(tmp / "good/audit.json"));
  CHECK(fs::exists(tmp / "good/sweep.csv"));

  // a self-consistent but suboptimal solution: cut moved by 0.1
  const ProblemSpec specd = load_problem(spec("uniform_first_price.json"));
  const CommitmentProblem& p = specd.problem;
  const Solution moved =
      make_solution(p, EqualBid::step(p.a1(), p.a2(), {0.5671432904 + 0.1}, {0.0, p.b2()}), Method::first_price_uniform);
  fs::create_directories(tmp.dir / "moved");
  write_atomic(tmp.dir / "moved/solution.json", solution_json(moved));
  write_atomic(tmp.dir / "moved/g.csv", curve_csv(moved.g.curve, "g"));
  write_atomic(tmp.dir / "moved/s_star.csv", curve_csv(moved.s_star, "s_star"));
  const Run bad = run({"verify", spec("uniform_first_price.json"), tmp / "moved"});
  CHECK(bad.code == cli::exit_verification_failed);
  CHECK(bad.out.find("FAIL perturbation gain") != std::string::npos);
  CHECK(bad.out.find("PASS s_star consistency") != std::string::npos);

  fs::remove(tmp.dir / "good/g.csv");
  const Run missing = run({"verify", spec("uniform_first_price.json"), tmp / "good"});
  CHECK(missing.code == cli::exit_input_error);
}

TEST_CASE("reruns are byte-identical") {
  Scratch tmp("rerun");
  for (const char* d : {"a", "b"}) {
    REQUIRE(run({"solve", spec("two_level_first_price.json"), "--out", tmp / d}).code == cli::exit_ok);
    REQUIRE(run({"verify", spec("two_level_first_price.json"), tmp / d, "--seed", "3"}).code == cli::exit_ok);
  }
  for (const char* f : {"solution.json", "g.csv", "s_star.csv", "audit.json", "sweep.csv"})
    CHECK(slurp(tmp.dir / "a" / f) == slurp(tmp.dir / "b" / f));

  REQUIRE(run({"solve", spec("kinked_custom.json"), "--method", "general", "--max-steps", "2", "--out", tmp / "c"})
              .code == cli::exit_ok);
  REQUIRE(run({"solve", spec("kinked_custom.json"), "--method", "general", "--max-steps", "2", "--out", tmp / "d"})
              .code == cli::exit_ok);
  CHECK(slurp(tmp.dir / "c/solution.json") == slurp(tmp.dir / "d/solution.json"));
}
