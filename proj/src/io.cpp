#include "rankbid/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "json.hpp"

namespace rankbid {

using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw InputError("field '" + field + "': " + what);
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) field_error(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) field_error(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) field_error(path, "expected a number");
  return v.get<double>();
}

std::vector<double> numbers(const json& v, const std::string& path) {
  if (!v.is_array()) field_error(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::size_t count(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0) field_error(path, "expected a nonnegative integer");
  return static_cast<std::size_t>(v.get<long long>());
}

PiecewiseDensity density(const json& v, const std::string& path) {
  if (!v.is_object()) field_error(path, "expected an object");
  try {
    if (v.contains("uniform")) {
      const auto b = numbers(v["uniform"], path + ".uniform");
      if (b.size() != 2) field_error(path + ".uniform", "expected [lo, hi]");
      return PiecewiseDensity::uniform(b[0], b[1]);
    }
    return PiecewiseDensity(numbers(require(v, "breakpoints", path), path + ".breakpoints"),
                            numbers(require(v, "densities", path), path + ".densities"));
  } catch (const std::invalid_argument& e) {
    field_error(path, e.what());
  }
}

PiecewiseLinear payment(const json& v, const std::string& path) {
  if (!v.is_object()) field_error(path, "expected an object");
  const double v0 = v.contains("value_at_zero") ? number(v["value_at_zero"], path + ".value_at_zero") : 0.0;
  try {
    return PiecewiseLinear(v0, numbers(require(v, "breakpoints", path), path + ".breakpoints"),
                           numbers(require(v, "slopes", path), path + ".slopes"));
  } catch (const std::invalid_argument& e) {
    field_error(path, e.what());
  }
}

PaymentRule rule(const json& v) {
  const json& kind = require(v, "kind", "auction");
  if (!kind.is_string()) field_error("auction.kind", "expected a string");
  const std::string k = kind.get<std::string>();
  if (k == "first_price") return PaymentRule::first_price();
  if (k == "all_pay") return PaymentRule::all_pay();
  if (k == "custom")
    return PaymentRule::custom(payment(require(v, "participation", "auction"), "auction.participation"),
                               payment(require(v, "winning", "auction"), "auction.winning"));
  field_error("auction.kind", "unknown kind '" + k + "'");
}

}  // namespace

ProblemSpec parse_problem(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw InputError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": malformed JSON");
  }
  if (!doc.is_object()) throw InputError("line 1: expected a JSON object");

  ProblemSpec spec{CommitmentProblem(density(require(doc, "f1", ""), "f1"), density(require(doc, "f2", ""), "f2"),
                                     rule(require(doc, "auction", ""))),
                   GridSpec{}};
  CommitmentProblem& p = spec.problem;
  if (doc.contains("tolerances")) {
    const json& t = doc["tolerances"];
    if (!t.is_object()) field_error("tolerances", "expected an object");
    if (t.contains("abs_tol")) p.tol.abs_tol = number(t["abs_tol"], "tolerances.abs_tol");
    if (t.contains("rel_tol")) p.tol.rel_tol = number(t["rel_tol"], "tolerances.rel_tol");
    if (t.contains("max_iter")) p.tol.max_iter = static_cast<int>(count(t["max_iter"], "tolerances.max_iter"));
  }
  if (doc.contains("grids")) {
    const json& g = doc["grids"];
    if (!g.is_object()) field_error("grids", "expected an object");
    if (g.contains("n")) spec.grid.leader_types = count(g["n"], "grids.n");
    if (g.contains("k")) spec.grid.follower_types = count(g["k"], "grids.k");
    if (g.contains("m")) spec.grid.bids = count(g["m"], "grids.m");
    if (g.contains("bid_ceiling")) spec.grid.bid_ceiling = number(g["bid_ceiling"], "grids.bid_ceiling");
    if (g.contains("curve_samples")) p.curve_samples = count(g["curve_samples"], "grids.curve_samples");
    try {
      spec.grid.validate();
    } catch (const std::invalid_argument& e) {
      field_error("grids", e.what());
    }
  }
  if (doc.contains("tie_breaking")) {
    const json& t = doc["tie_breaking"];
    if (!t.is_object()) field_error("tie_breaking", "expected an object");
    for (auto [key, flag] : {std::pair{"ties_to_follower", &p.ties.ties_to_follower},
                             std::pair{"lowest_best_response", &p.ties.lowest_best_response}}) {
      if (!t.contains(key)) continue;
      if (!t[key].is_boolean()) field_error(std::string("tie_breaking.") + key, "expected a boolean");
      *flag = t[key].get<bool>();
    }
  }
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("invalid problem: ") + e.what());
  }
  return spec;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ProblemSpec load_problem(const std::filesystem::path& path) {
  try {
    return parse_problem(read_file(path));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string format_double(double v) {
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

CsvTable parse_csv(const std::string& text, std::size_t columns) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (t.header.empty() && t.rows.empty()) {
      t.header = cells;
      if (cells.size() != columns)
        throw InputError("line " + std::to_string(line_no) + ": expected " + std::to_string(columns) + " columns");
      continue;
    }
    if (cells.size() != columns)
      throw InputError("line " + std::to_string(line_no) + ": expected " + std::to_string(columns) + " columns");
    std::vector<double> row;
    for (std::string& c : cells) {
      const auto b = c.find_first_not_of(" \t");
      const auto e = c.find_last_not_of(" \t");
      const std::string cell = b == std::string::npos ? std::string() : c.substr(b, e - b + 1);
      double v = 0.0;
      const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || r.ec != std::errc() || r.ptr != cell.data() + cell.size() || !std::isfinite(v))
        throw InputError("line " + std::to_string(line_no) + ": non-numeric value '" + cell + "'");
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw InputError("line 1: missing header row");
  return t;
}

std::string to_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns) {
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
  out += '\n';
  const std::size_t n = columns.empty() ? 0 : columns[0].size();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += ',';
      out += format_double(columns[c][r]);
    }
    out += '\n';
  }
  return out;
}

RawStrategy parse_strategy_csv(const std::string& text) {
  const CsvTable t = parse_csv(text, 2);
  RawStrategy raw;
  for (const auto& r : t.rows) {
    raw.x.push_back(r[0]);
    raw.bids.push_back(r[1]);
  }
  if (raw.x.size() < 2) throw InputError("strategy needs at least two rows");
  try {
    raw.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("strategy: ") + e.what());
  }
  return raw;
}

std::string curve_csv(const MonotoneCurve& c, const std::string& value_name) {
  return to_csv({"x", value_name}, {std::vector<double>(c.x().begin(), c.x().end()),
                                    std::vector<double>(c.values().begin(), c.values().end())});
}

MonotoneCurve parse_curve_csv(const std::string& text, bool left_continuous) {
  const CsvTable t = parse_csv(text, 2);
  std::vector<double> x, v;
  for (const auto& r : t.rows) {
    x.push_back(r[0]);
    v.push_back(r[1]);
  }
  if (x.size() < 2) throw InputError("curve needs at least two rows");
  try {
    return MonotoneCurve(std::move(x), std::move(v), left_continuous);
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("curve: ") + e.what());
  }
}

std::string solution_json(const Solution& sol) {
  json j;
  j["method"] = to_string(sol.method);
  j["cut_points"] = sol.cut_points;
  j["leader_utility"] = sol.leader_utility;
  j["stationarity_residual"] = sol.stationarity_residual;
  j["g"] = {{"x", std::vector<double>(sol.g.curve.x().begin(), sol.g.curve.x().end())},
            {"values", std::vector<double>(sol.g.curve.values().begin(), sol.g.curve.values().end())}};
  j["s_star"] = {{"x", std::vector<double>(sol.s_star.x().begin(), sol.s_star.x().end())},
                 {"values", std::vector<double>(sol.s_star.values().begin(), sol.s_star.values().end())}};
  j["notes"] = sol.notes;
  return j.dump(2) + "\n";
}

StoredSolution parse_solution_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error&) {
    throw InputError("solution.json: malformed JSON");
  }
  StoredSolution s;
  try {
    const json& m = require(doc, "method", "");
    if (!m.is_string()) field_error("method", "expected a string");
    s.method = m.get<std::string>();
    s.leader_utility = number(require(doc, "leader_utility", ""), "leader_utility");
    s.cut_points = numbers(require(doc, "cut_points", ""), "cut_points");
    if (doc.contains("stationarity_residual"))
      s.stationarity_residual = number(doc["stationarity_residual"], "stationarity_residual");
    if (doc.contains("notes") && doc["notes"].is_array())
      for (const auto& n : doc["notes"])
        if (n.is_string()) s.notes.push_back(n.get<std::string>());
  } catch (const InputError& e) {
    throw InputError(std::string("solution.json: ") + e.what());
  }
  return s;
}

}  // namespace rankbid
