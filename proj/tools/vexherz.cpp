// vexherz: variable-exponent norms, operators and inequality suites.
//
// Exit codes: 0 success, 1 failed assertion, 2 configuration error,
// 3 violated mathematical precondition.

#include "vexherz/config.hpp"
#include "vexherz/norms.hpp"
#include "vexherz/operators.hpp"
#include "vexherz/report.hpp"
#include "vexherz/verify.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace vexherz;

enum Exit
{
  ok = 0,
  assertion_failed = 1,
  config_error = 2,
  precondition_violated = 3
};

std::string show(double v)
{
  char buf[64];
  const double a = std::abs(v);
  if (v == 0.0 || (a >= 1e-3 && a < 1e6))
    std::snprintf(buf, sizeof buf, "%.6f", v);
  else
    std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct GridFlags
{
  int n = 1;
  double R = 8.0;
  std::size_t m = 0;

  void add_to(CLI::App* app)
  {
    app->add_option("--dim", n, "Dimension (1 or 2)")->check(CLI::IsMember({1, 2}));
    app->add_option("--R", R, "Box half-width, a power of two");
    app->add_option("--m", m, "Grid points per axis (default 4096 in 1D, 512 in 2D)");
  }

  Grid build() const
  {
    GridSpec s;
    s.n = n;
    s.R = R;
    s.m = m;
    return s.build();
  }
};

std::vector<double> parse_point(const std::string& s, int dim)
{
  std::vector<double> v;
  for (const auto& part : vexherz::detail::split(s, ','))
    v.push_back(vexherz::detail::to_number(part, s));
  if (int(v.size()) != dim)
    throw ConfigError("point '" + s + "' needs " + std::to_string(dim) + " coordinate(s)");
  return v;
}

// ------------------------------------------------------------ norm

struct NormArgs
{
  GridFlags grid;
  std::string space = "lq";
  std::string q = "const:2";
  std::string f;
  double alpha = 0.0;
  double p = 1.0;
  double lambda = 0.0;
  std::string curve;
};

int cmd_norm(const NormArgs& a)
{
  const Grid g = a.grid.build();
  const auto q = parse_exponent(a.q, g.dim(), g.radius());
  const auto f = parse_function(a.f, g);
  if (a.space == "lq") {
    ModularCurve curve;
    const double v = luxemburg_norm(f, q, &curve);
    std::cout << show(v) << '\n';
    if (!a.curve.empty()) {
      std::ofstream os(a.curve);
      if (!os)
        throw ConfigError("cannot write " + a.curve);
      os.precision(17);
      os << "eta,modular\n";
      for (const auto& [eta, rho] : curve.evaluations)
        os << eta << ',' << rho << '\n';
    }
    return ok;
  }
  const double lambda = a.space == "herz" ? 0.0 : a.lambda;
  if (a.space != "herz" && a.space != "herz-morrey")
    throw ConfigError("unknown space '" + a.space + "'");
  const auto params = HerzMorreyParams::on(g, a.alpha, lambda, a.p, q);
  const auto res = herz_morrey_detailed(f, params);
  std::cout << show(res.value) << '\n';
  for (const auto& w : res.warnings)
    std::cerr << "warning: " << w << '\n';
  return ok;
}

// ------------------------------------------------------------ operator

struct OperatorArgs
{
  GridFlags grid;
  std::string name;
  std::string f;
  std::vector<std::string> at;
  double beta = 0.0;
  std::string output;
};

int cmd_operator(const OperatorArgs& a)
{
  const Grid g = a.grid.build();
  OperatorRegistry reg;
  const auto op = reg.get(a.name, a.beta);
  const auto f = parse_function(a.f, g);
  if (!a.at.empty()) {
    for (const auto& s : a.at) {
      const auto c = parse_point(s, g.dim());
      const Point x{c[0], g.dim() == 2 ? c[1] : 0.0};
      double v = 0.0;
      switch (op.kind) {
      case OperatorKind::maximal:
      case OperatorKind::fractional_maximal: v = maximal_at(f, op, x); break;
      case OperatorKind::fractional_integral: v = fractional_integral_at(f, op.beta, x); break;
      default: {
        // nearest grid point of the sampled output
        const auto tf = apply(op, f);
        auto nearest = [&](double t) {
          const double s = std::floor((t + g.radius()) / g.spacing());
          return std::size_t(std::clamp(s, 0.0, double(g.points_per_axis() - 1)));
        };
        v = tf[g.index(nearest(x[0]), g.dim() == 2 ? nearest(x[1]) : 0)];
      }
      }
      std::cout << show(v) << '\n';
    }
    return ok;
  }
  const auto tf = apply(op, f);
  std::ofstream file;
  if (!a.output.empty()) {
    file.open(a.output);
    if (!file)
      throw ConfigError("cannot write " + a.output);
  }
  std::ostream& os = a.output.empty() ? std::cout : file;
  os.precision(17);
  os << (g.dim() == 1 ? "x,f,Tf\n" : "x,y,f,Tf\n");
  for (std::size_t i = 0; i < tf.size(); ++i) {
    const auto x = g.point(i);
    os << x[0] << ',';
    if (g.dim() == 2)
      os << x[1] << ',';
    os << f[i] << ',' << tf[i] << '\n';
  }
  return ok;
}

// ------------------------------------------------------------ verify

struct VerifyArgs
{
  std::string config;
  std::vector<std::string> suites;
  std::vector<std::string> q;
  std::vector<std::string> operators;
  std::optional<double> alpha;
  std::optional<double> lambda;
  std::optional<double> p;
  std::optional<double> p2;
  std::optional<double> beta;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::string output;
  GridFlags grid;
  bool grid_set = false;
  bool quiet = false;
};

SuiteConfig build_config(const VerifyArgs& a)
{
  SuiteConfig c;
  if (!a.config.empty()) {
    std::ifstream is(a.config);
    if (!is)
      throw ConfigError("cannot read config " + a.config);
    std::stringstream ss;
    ss << is.rdbuf();
    c = parse_config_text(ss.str());
  }
  if (a.grid_set) {
    c.grid.n = a.grid.n;
    c.grid.R = a.grid.R;
    c.grid.m = a.grid.m;
  }
  if (!a.suites.empty())
    c.suites = a.suites;
  if (!a.q.empty())
    c.exponents = a.q;
  if (!a.operators.empty()) {
    c.operators.clear();
    for (const auto& o : a.operators)
      c.operators.push_back({o, std::nullopt});
  }
  if (a.alpha || a.lambda || a.p || a.p2) {
    SpaceSpec s = c.spaces.empty() ? SpaceSpec{} : c.spaces.front();
    if (a.alpha)
      s.alpha = a.alpha;
    if (a.lambda)
      s.lambda = *a.lambda;
    if (a.p)
      s.p = *a.p;
    if (a.p2)
      s.p2 = *a.p2;
    c.spaces = {s};
  }
  if (a.beta)
    c.beta = *a.beta;
  if (a.trials)
    c.trials = *a.trials;
  if (a.seed)
    c.seed = *a.seed;
  if (!a.output.empty())
    c.output.dir = a.output;
  return c;
}

void write_reports(const SuiteConfig& cfg, const std::vector<InequalityReport>& reports)
{
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output.dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw ConfigError("cannot create output directory " + dir.string());
  for (std::size_t i = 0; i < reports.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%03zu-", i);
    std::ofstream os(dir / (name + reports[i].statement_id + ".json"));
    os << to_json(reports[i]).dump(2) << '\n';
  }
  std::ofstream csv(dir / cfg.output.csv);
  csv << csv_header() << '\n';
  for (const auto& r : reports)
    write_csv_rows(csv, r);
}

int cmd_verify(const VerifyArgs& a)
{
  const SuiteConfig cfg = build_config(a);
  auto progress = [&](const std::string& s) {
    if (!a.quiet)
      std::cerr << "running " << s << '\n';
  };
  const auto reports = run_suites(cfg, progress);
  write_reports(cfg, reports);

  bool all = true;
  std::printf("%-32s %12s %7s %11s %7s\n", "statement", "c_estimate", "stable", "admissible", "passed");
  for (const auto& r : reports) {
    std::printf("%-32s %12s %7s %11s %7s\n", r.statement_id.c_str(), show(r.c_estimate).c_str(),
                r.stable ? "yes" : "no", r.admissible ? "yes" : "no", r.passed ? "PASS" : "FAIL");
    for (const auto& c : r.checks)
      if (c.rfind("FAIL", 0) == 0)
        std::printf("    %s\n", c.c_str());
    all = all && r.passed;
  }
  std::printf("%zu reports written to %s\n", reports.size(), cfg.output.dir.c_str());
  return all ? ok : assertion_failed;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Variable-exponent Herz-Morrey norms, operators and inequality checks"};
  app.require_subcommand(1);

  NormArgs norm;
  auto* norm_cmd = app.add_subcommand("norm", "Lebesgue, Herz or Herz-Morrey norm of a function");
  norm.grid.add_to(norm_cmd);
  norm_cmd->add_option("--space", norm.space, "lq | herz | herz-morrey")
    ->check(CLI::IsMember({"lq", "herz", "herz-morrey"}));
  norm_cmd->add_option("--q", norm.q, "Exponent descriptor");
  norm_cmd->add_option("--f", norm.f, "Function descriptor")->required();
  norm_cmd->add_option("--alpha", norm.alpha, "Herz weight exponent");
  norm_cmd->add_option("--p", norm.p, "Outer summability");
  norm_cmd->add_option("--lambda", norm.lambda, "Morrey exponent");
  norm_cmd->add_option("--curve", norm.curve, "Write the modular evaluations (eta, rho) as CSV");

  OperatorArgs opa;
  auto* op_cmd = app.add_subcommand("operator", "Apply an operator; print point values or dump the field");
  opa.grid.add_to(op_cmd);
  op_cmd->add_option("name", opa.name, "maximal | mbeta | ibeta | identity | zero | maximal-volume | maximal-uncentered")
    ->required();
  op_cmd->add_option("--f", opa.f, "Function descriptor")->required();
  op_cmd->add_option("--at", opa.at, "Evaluation point (x or x,y); repeatable");
  op_cmd->add_option("--beta", opa.beta, "Order of the fractional operator");
  op_cmd->add_option("--output", opa.output, "CSV file for the field dump (default: stdout)");

  VerifyArgs va;
  auto* verify_cmd = app.add_subcommand("verify", "Run inequality suites and write reports");
  va.grid.add_to(verify_cmd);
  verify_cmd->add_option("--config", va.config, "Suite configuration (JSON)");
  verify_cmd->add_option("--suite", va.suites, "lemmas | hls | size | theorem31 | theorem32 | all")
    ->check(CLI::IsMember(suite_names()));
  verify_cmd->add_option("--q", va.q, "Exponent descriptor; repeatable");
  verify_cmd->add_option("--operator", va.operators, "Operator name; repeatable");
  verify_cmd->add_option("--alpha", va.alpha, "Herz weight exponent (default: window midpoint)");
  verify_cmd->add_option("--lambda", va.lambda, "Morrey exponent");
  verify_cmd->add_option("--p", va.p, "Source summability");
  verify_cmd->add_option("--p2", va.p2, "Target summability of the fractional theorem");
  verify_cmd->add_option("--beta", va.beta, "Fractional order");
  verify_cmd->add_option("--trials", va.trials, "Random functions per family");
  verify_cmd->add_option("--seed", va.seed, "Random seed");
  verify_cmd->add_option("--output", va.output, "Report directory");
  verify_cmd->add_flag("--quiet", va.quiet, "No progress lines");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try {
    if (*norm_cmd)
      return cmd_norm(norm);
    if (*op_cmd)
      return cmd_operator(opa);
    va.grid_set = verify_cmd->count("--dim") + verify_cmd->count("--R") + verify_cmd->count("--m") > 0;
    return cmd_verify(va);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition violated: " << e.what() << '\n';
    return precondition_violated;
  }
}
