#pragma once

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace vexherz {

struct InequalityCase
{
  std::string input;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

/// Outcome of one numerical inequality check.
///
/// ratio = lhs / rhs per case and c_estimate is the maximum ratio. `passed`
/// covers only the checks that were asserted; inadmissible parameter choices
/// are computed and recorded but never asserted.
struct InequalityReport
{
  std::string statement_id;
  nlohmann::json params = nlohmann::json::object();
  std::vector<InequalityCase> cases;
  double c_estimate = 0.0;
  bool stable = true;
  bool admissible = true;
  bool passed = true;
  /// Human-readable outcome of each asserted check.
  std::vector<std::string> checks;
  std::vector<std::string> notes;

  void add_case(std::string input, double lhs, double rhs)
  {
    InequalityCase c{std::move(input), lhs, rhs, 0.0};
    if (rhs > 0.0)
      c.ratio = lhs / rhs;
    else
      c.ratio = lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    c_estimate = cases.empty() ? c.ratio : std::max(c_estimate, c.ratio);
    cases.push_back(std::move(c));
  }

  /// Records an asserted check; a failing check fails the report.
  void assert_check(bool ok, const std::string& what)
  {
    checks.push_back((ok ? "PASS " : "FAIL ") + what);
    passed = passed && ok;
  }
};

namespace detail {

// JSON has no infinities; encode them as strings so reports stay valid.
inline nlohmann::json number(double v)
{
  if (std::isfinite(v))
    return v;
  if (std::isnan(v))
    return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline std::string utc_timestamp()
{
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

} // namespace detail

/// Canonical JSON document. Volatile data (timestamps) lives under "metadata" only.
inline nlohmann::json to_json(const InequalityReport& r, bool with_metadata = true)
{
  nlohmann::json j;
  j["statement_id"] = r.statement_id;
  j["params"] = r.params;
  nlohmann::json cases = nlohmann::json::array();
  for (const auto& c : r.cases)
    cases.push_back(
      {{"input", c.input}, {"lhs", detail::number(c.lhs)}, {"rhs", detail::number(c.rhs)}, {"ratio", detail::number(c.ratio)}});
  j["cases"] = std::move(cases);
  j["c_estimate"] = detail::number(r.c_estimate);
  j["stable"] = r.stable;
  j["admissible"] = r.admissible;
  j["passed"] = r.passed;
  j["checks"] = r.checks;
  j["notes"] = r.notes;
  if (with_metadata)
    j["metadata"] = {{"generated_at", detail::utc_timestamp()}, {"generator", "vexherz"}};
  return j;
}

/// The report without its metadata block, for determinism comparisons.
inline nlohmann::json canonical(nlohmann::json j)
{
  j.erase("metadata");
  return j;
}

inline const char* csv_header()
{
  return "statement_id,case,lhs,rhs,ratio";
}

/// One CSV row per case, full precision.
inline void write_csv_rows(std::ostream& os, const InequalityReport& r)
{
  const auto old = os.precision(17);
  for (std::size_t i = 0; i < r.cases.size(); ++i) {
    const auto& c = r.cases[i];
    os << r.statement_id << ',' << i << ',' << c.lhs << ',' << c.rhs << ',' << c.ratio << '\n';
  }
  os.precision(old);
}

} // namespace vexherz
