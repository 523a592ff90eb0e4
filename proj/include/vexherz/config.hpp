#pragma once

#include "vexherz/errors.hpp"
#include "vexherz/exponent.hpp"
#include "vexherz/grid.hpp"
#include "vexherz/operators.hpp"
#include "vexherz/report.hpp"
#include "vexherz/verify.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace vexherz {

// ---------------------------------------------------------------- descriptors

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep)
{
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline double to_number(const std::string& s, const std::string& context)
{
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size())
      throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse number '" + s + "' in '" + context + "'");
  }
}

inline int to_int(const std::string& s, const std::string& context)
{
  const double v = to_number(s, context);
  if (v != std::floor(v))
    throw ConfigError("expected an integer, got '" + s + "' in '" + context + "'");
  return int(v);
}

} // namespace detail

/// Parses an exponent descriptor:
///   const:Q | decay[:A:B] | piecewise:A:B[:T] | smooth:A:B:W | linear:A:B[:W]
/// Domain-level hypotheses (q_- > 1) raise PreconditionError; syntax errors ConfigError.
inline ExponentFunction parse_exponent(const std::string& text, int dim = 1, double radius = 8.0)
{
  const auto parts = detail::split(text, ':');
  const std::string& kind = parts[0];
  std::vector<double> v;
  for (std::size_t i = 1; i < parts.size(); ++i)
    v.push_back(detail::to_number(parts[i], text));
  auto arity = [&](std::size_t lo, std::size_t hi) {
    if (v.size() < lo || v.size() > hi)
      throw ConfigError("exponent '" + text + "' has the wrong number of parameters");
  };
  if (kind == "const") {
    arity(1, 1);
    return make_exponent(ExponentDescriptor::constant(v[0], dim, radius));
  }
  if (kind == "decay") {
    if (v.size() != 0 && v.size() != 2)
      throw ConfigError("exponent '" + text + "' expects decay or decay:A:B");
    return make_exponent(v.empty() ? ExponentDescriptor::decay(2.0, 1.0, dim, radius)
                                   : ExponentDescriptor::decay(v[0], v[1], dim, radius));
  }
  if (kind == "piecewise") {
    arity(2, 3);
    return make_exponent(ExponentDescriptor::piecewise(v[0], v[1], v.size() > 2 ? v[2] : 0.0, dim, radius));
  }
  if (kind == "smooth") {
    arity(3, 3);
    return make_exponent(ExponentDescriptor::smooth(v[0], v[1], v[2], SmoothShape::gaussian, dim, radius));
  }
  if (kind == "linear") {
    arity(2, 3);
    return make_exponent(
      ExponentDescriptor::smooth(v[0], v[1], v.size() > 2 ? v[2] : 1.0, SmoothShape::linear, dim, radius));
  }
  throw ConfigError("unknown exponent kind '" + kind + "' in '" + text + "'");
}

/// Parses a function descriptor, terms joined by '+':
///   indicator:A:B (interval, or the square [A,B]^2) | annulus:K[:C] | ball:K[:C] | zero
inline SampledFunction parse_function(const std::string& text, const Grid& g)
{
  SampledFunction f(g);
  for (const auto& term : detail::split(text, '+')) {
    const auto parts = detail::split(term, ':');
    const std::string& kind = parts[0];
    auto coefficient = [&](std::size_t at) { return parts.size() > at ? detail::to_number(parts[at], text) : 1.0; };
    if (kind == "zero" && parts.size() == 1)
      continue;
    if (kind == "indicator" && parts.size() == 3) {
      f += box_indicator(g, detail::to_number(parts[1], text), detail::to_number(parts[2], text));
    } else if (kind == "annulus" && (parts.size() == 2 || parts.size() == 3)) {
      auto a = annulus_indicator(g, detail::to_int(parts[1], text));
      a *= coefficient(2);
      f += a;
    } else if (kind == "ball" && (parts.size() == 2 || parts.size() == 3)) {
      auto b = ball_indicator(g, detail::to_int(parts[1], text));
      b *= coefficient(2);
      f += b;
    } else {
      throw ConfigError("cannot parse function term '" + term + "'");
    }
  }
  return f;
}

// ---------------------------------------------------------------- suite configuration

struct GridSpec
{
  int n = 1;
  double R = 8.0;
  std::size_t m = 0; ///< 0 selects the default for n
  std::optional<int> k_min;

  Grid build() const
  {
    if (n != 1 && n != 2)
      throw ConfigError("grid.n must be 1 or 2");
    int e = 0;
    const double mant = std::frexp(R, &e);
    if (!(R > 0.0) || mant != 0.5)
      throw ConfigError("grid.R must be a power of two");
    const int k_max = e - 1;
    const std::size_t mm = m ? m : (n == 1 ? 4096 : 512);
    const int kmin = k_min ? *k_min : std::max(-6, Grid::finest_resolved_shell(n, k_max, mm));
    return Grid(n, k_max, mm, kmin);
  }
};

struct OperatorSpec
{
  std::string name = "maximal";
  std::optional<double> beta;
};

/// One Herz-Morrey parameter set. A missing alpha selects the midpoint of the
/// fitted admissible window.
struct SpaceSpec
{
  std::optional<double> alpha;
  double lambda = 0.5;
  double p = 1.0;
  double p2 = 2.0; ///< target summability for the fractional theorem
};

struct OutputSpec
{
  std::string dir = "reports";
  std::string csv = "cases.csv"; ///< relative to dir
};

struct SuiteConfig
{
  GridSpec grid;
  std::vector<std::string> exponents{"const:2", "decay"};
  std::vector<OperatorSpec> operators;
  std::vector<SpaceSpec> spaces{SpaceSpec{std::nullopt, 0.5, 1.0, 2.0}, SpaceSpec{std::nullopt, 0.5, 2.0, 2.0}};
  std::vector<std::string> suites{"all"};
  double beta = 0.25;
  std::size_t trials = 50;
  std::uint64_t seed = 42;
  OutputSpec output;
};

namespace detail {

template <class T>
T get_as(const nlohmann::json& j, const char* key)
{
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

inline void only_keys(const nlohmann::json& j, std::initializer_list<const char*> keys, const std::string& where)
{
  if (!j.is_object())
    throw ConfigError(where + " must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* a : keys)
      known = known || k == a;
    if (!known)
      throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

} // namespace detail

inline SuiteConfig parse_config(const nlohmann::json& j)
{
  using detail::get_as;
  SuiteConfig c;
  detail::only_keys(j, {"grid", "exponents", "operators", "spaces", "suites", "seed", "output", "trials", "beta"},
                    "config");
  if (!j.contains("seed"))
    throw ConfigError("config must set 'seed' (determinism contract)");
  c.seed = get_as<std::uint64_t>(j, "seed");
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    detail::only_keys(g, {"n", "R", "m", "k_min"}, "grid");
    if (g.contains("n"))
      c.grid.n = get_as<int>(g, "n");
    if (g.contains("R"))
      c.grid.R = get_as<double>(g, "R");
    if (g.contains("m"))
      c.grid.m = get_as<std::size_t>(g, "m");
    if (g.contains("k_min"))
      c.grid.k_min = get_as<int>(g, "k_min");
  }
  if (j.contains("exponents"))
    c.exponents = get_as<std::vector<std::string>>(j, "exponents");
  if (j.contains("operators")) {
    c.operators.clear();
    for (const auto& o : j["operators"]) {
      OperatorSpec s;
      if (o.is_string()) {
        s.name = o.get<std::string>();
      } else {
        detail::only_keys(o, {"name", "beta"}, "operators entry");
        s.name = get_as<std::string>(o, "name");
        if (o.contains("beta"))
          s.beta = get_as<double>(o, "beta");
      }
      c.operators.push_back(s);
    }
  }
  if (j.contains("spaces")) {
    c.spaces.clear();
    for (const auto& s : j["spaces"]) {
      detail::only_keys(s, {"alpha", "lambda", "p", "p2"}, "spaces entry");
      SpaceSpec sp;
      if (s.contains("alpha") && !s["alpha"].is_null())
        sp.alpha = get_as<double>(s, "alpha");
      if (s.contains("lambda"))
        sp.lambda = get_as<double>(s, "lambda");
      if (s.contains("p"))
        sp.p = get_as<double>(s, "p");
      if (s.contains("p2"))
        sp.p2 = get_as<double>(s, "p2");
      c.spaces.push_back(sp);
    }
  }
  if (j.contains("suites"))
    c.suites = get_as<std::vector<std::string>>(j, "suites");
  if (j.contains("trials"))
    c.trials = get_as<std::size_t>(j, "trials");
  if (j.contains("beta"))
    c.beta = get_as<double>(j, "beta");
  if (j.contains("output")) {
    const auto& o = j["output"];
    detail::only_keys(o, {"dir", "csv"}, "output");
    if (o.contains("dir"))
      c.output.dir = get_as<std::string>(o, "dir");
    if (o.contains("csv"))
      c.output.csv = get_as<std::string>(o, "csv");
  }
  return c;
}

inline SuiteConfig parse_config_text(const std::string& text)
{
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------- suites

inline const std::vector<std::string>& suite_names()
{
  static const std::vector<std::string> names{"lemmas", "hls", "size", "theorem31", "theorem32", "all"};
  return names;
}

namespace detail {

inline OperatorHandle resolve_operator(const OperatorSpec& s, double default_beta)
{
  OperatorRegistry reg;
  return reg.get(s.name, s.beta ? *s.beta : default_beta);
}

/// The beta = 0 remark: the fractional sweep at beta = 0 must reproduce the
/// plain sweep case by case.
inline InequalityReport beta_zero_remark(const InequalityReport& plain, const InequalityReport& fractional)
{
  InequalityReport rep;
  rep.statement_id = "Remark-Beta0";
  rep.params = {{"compared", plain.statement_id}, {"cases", plain.cases.size()}};
  bool same_shape = plain.cases.size() == fractional.cases.size();
  double worst = 0.0;
  for (std::size_t i = 0; same_shape && i < plain.cases.size(); ++i) {
    const auto& a = plain.cases[i];
    const auto& b = fractional.cases[i];
    rep.add_case(a.input, b.ratio, a.ratio);
    worst = std::max({worst, std::abs(a.lhs - b.lhs), std::abs(a.rhs - b.rhs), std::abs(a.ratio - b.ratio)});
  }
  rep.params["max_abs_difference"] = worst;
  rep.assert_check(same_shape && worst <= 1e-9,
                   "beta = 0 fractional report equals the plain report within 1e-9 (max diff " + fmt(worst) + ")");
  return rep;
}

} // namespace detail

/// Runs the named suites. Reports are appended in a fixed order.
inline std::vector<InequalityReport> run_suites(const SuiteConfig& cfg,
                                                const std::function<void(const std::string&)>& progress = {})
{
  const Grid grid = cfg.grid.build();
  VerifyContext ctx{grid, cfg.seed, cfg.trials};
  std::vector<ExponentFunction> qs;
  for (const auto& e : cfg.exponents)
    qs.push_back(parse_exponent(e, grid.dim(), grid.radius()));
  if (qs.empty())
    throw ConfigError("config lists no exponents");

  bool all = false;
  std::vector<std::string> suites;
  for (const auto& s : cfg.suites) {
    if (std::find(suite_names().begin(), suite_names().end(), s) == suite_names().end())
      throw ConfigError("unknown suite '" + s + "'");
    all = all || s == "all";
    suites.push_back(s);
  }
  auto selected = [&](const char* s) { return all || std::find(suites.begin(), suites.end(), s) != suites.end(); };
  auto note = [&](const std::string& s) {
    if (progress)
      progress(s);
  };

  std::vector<InequalityReport> out;
  const double beta = cfg.beta;

  if (selected("lemmas")) {
    for (const auto& q : qs) {
      note("lemmas " + q.describe());
      out.push_back(verify_holder(q, ctx));
      out.push_back(verify_duality_bound(q, ctx));
      out.push_back(delta_report(estimate_delta(q, DeltaWindow::delta1, ctx), q.describe()));
      out.push_back(delta_report(estimate_delta(q, DeltaWindow::delta2, ctx), q.describe()));
      out.push_back(verify_lemma_2_3(q, ctx));
      out.push_back(verify_maximal_boundedness(q, ctx));
    }
  }
  if (selected("hls")) {
    for (const auto& q : qs) {
      note("hls " + q.describe());
      out.push_back(verify_prop_2_4(q, beta, ctx));
      out.push_back(verify_hls(q, beta, ctx));
      out.push_back(delta_report(estimate_delta(q, DeltaWindow::delta3, ctx, beta), q.describe()));
      out.push_back(delta_report(estimate_delta(q, DeltaWindow::delta4, ctx, beta), q.describe()));
    }
    out.push_back(verify_ibeta_ball_lower_bound(beta, ctx));
  }
  if (selected("size")) {
    note("size conditions");
    const int k = (grid.k_min() + grid.k_max()) / 2;
    const auto M = OperatorHandle::maximal();
    out.push_back(verify_size_condition(M, SizeCondition::outer, k, ctx));
    out.push_back(verify_size_condition(M, SizeCondition::inner, k, ctx));
    for (const auto& op : {OperatorHandle::fractional_integral(beta), OperatorHandle::fractional_maximal(beta)}) {
      out.push_back(verify_size_condition(op, SizeCondition::fractional_outer, k, ctx));
      out.push_back(verify_size_condition(op, SizeCondition::fractional_inner, k, ctx));
    }
  }
  if (selected("theorem31")) {
    std::vector<OperatorHandle> ops;
    for (const auto& s : cfg.operators) {
      auto h = detail::resolve_operator(s, 0.0);
      if (h.beta == 0.0)
        ops.push_back(h);
    }
    if (ops.empty())
      ops.push_back(OperatorHandle::maximal());
    for (const auto& q : qs)
      for (const auto& sp : cfg.spaces)
        for (const auto& op : ops) {
          const double alpha = sp.alpha ? *sp.alpha : theorem_3_1_window(q, sp.lambda, ctx).midpoint();
          note("theorem31 " + op.name + " " + q.describe() + " p=" + detail::fmt(sp.p));
          out.push_back(verify_theorem_3_1(op, HerzMorreyParams::on(grid, alpha, sp.lambda, sp.p, q), ctx));
        }
  }
  if (selected("theorem32")) {
    std::vector<OperatorHandle> ops;
    for (const auto& s : cfg.operators) {
      auto h = detail::resolve_operator(s, beta);
      if (h.beta > 0.0)
        ops.push_back(h);
    }
    if (ops.empty())
      ops = {OperatorHandle::fractional_integral(beta), OperatorHandle::fractional_maximal(beta)};
    for (const auto& q : qs) {
      if (!(beta < double(grid.dim()) / q.q_plus())) {
        note("theorem32 skipped for " + q.describe() + ": beta >= n/q_+");
        continue;
      }
      for (const auto& sp : cfg.spaces)
        for (const auto& op : ops) {
          const double alpha = sp.alpha ? *sp.alpha : theorem_3_2_window(q, op.beta, sp.lambda, ctx).midpoint();
          note("theorem32 " + op.name + " " + q.describe() + " p1=" + detail::fmt(sp.p));
          const auto src = HerzMorreyParams::on(grid, alpha, sp.lambda, sp.p, q);
          out.push_back(verify_theorem_3_2(op, src, std::max(sp.p, sp.p2), ctx));
        }
    }
    // beta = 0 reduces the fractional theorem to the plain one
    const auto& q = qs.front();
    const auto& sp = cfg.spaces.front();
    const double alpha = sp.alpha ? *sp.alpha : theorem_3_1_window(q, sp.lambda, ctx).midpoint();
    const auto params = HerzMorreyParams::on(grid, alpha, sp.lambda, sp.p, q);
    note("theorem32 beta = 0 remark");
    const auto plain = verify_theorem_3_1(OperatorHandle::maximal(), params, ctx);
    const auto frac = verify_theorem_3_2(OperatorHandle::maximal(), params, sp.p, ctx);
    out.push_back(detail::beta_zero_remark(plain, frac));
  }
  return out;
}

} // namespace vexherz
