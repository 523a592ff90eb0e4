#pragma once

#include "vexherz/errors.hpp"
#include "vexherz/exponent.hpp"
#include "vexherz/grid.hpp"
#include "vexherz/norms.hpp"
#include "vexherz/operators.hpp"
#include "vexherz/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace vexherz {

/// Grid, seed and trial count shared by every check of a suite.
struct VerifyContext
{
  Grid grid = Grid::make_default(1);
  std::uint64_t seed = 42;
  std::size_t trials = 50;
};

/// Relative change tolerated when a sweep range or trial set doubles.
inline constexpr double stability_tolerance = 0.25;

// ---------------------------------------------------------------- families

namespace detail {

inline std::string fmt(double v)
{
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

inline bool stable_pair(double base, double doubled)
{
  if (!std::isfinite(base) || !std::isfinite(doubled))
    return false;
  if (base == 0.0)
    return doubled == 0.0;
  return std::abs(doubled - base) / base < stability_tolerance;
}

inline double spread(const std::vector<double>& v)
{
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

/// Zeroes f outside the closed ball B_k (2D corners of the box lie beyond B_kmax).
inline SampledFunction restrict_to_ball(SampledFunction f, int k)
{
  const double r = std::ldexp(1.0, k);
  auto& v = f.mutable_values();
  for (std::size_t i = 0; i < v.size(); ++i)
    if (f.grid().norm(i) > r)
      v[i] = 0.0;
  return f;
}

/// Smallest k for which the closed ball B_k holds at least min_annulus_points cells.
inline int finest_resolved_ball(const Grid& g)
{
  for (int k = g.k_min() - 8; k <= g.k_max(); ++k) {
    const double r = std::ldexp(1.0, k);
    std::size_t count = 0;
    for (double nr : g.norms())
      count += nr <= r ? 1 : 0;
    if (count >= Grid::min_annulus_points)
      return k;
  }
  return g.k_max();
}

/// Ordered pair of independent draws; drawn in sequence so the result does not
/// depend on argument evaluation order.
template <class Dist>
std::pair<std::size_t, std::size_t> random_span(Dist& cell, std::mt19937_64& rng)
{
  const std::size_t a = cell(rng);
  const std::size_t b = cell(rng);
  return {std::min(a, b), std::max(a, b)};
}

inline double measure(const SampledFunction& indicator)
{
  return l1_norm(indicator);
}

} // namespace detail

/// A random cell-aligned step function: 1 to 6 intervals (boxes in 2D) with
/// heights in [-3, 3].
inline SampledFunction random_step_function(const Grid& g, std::mt19937_64& rng)
{
  const std::size_t m = g.points_per_axis();
  std::uniform_int_distribution<std::size_t> pieces(1, 6);
  std::uniform_int_distribution<std::size_t> cell(0, m - 1);
  std::uniform_real_distribution<double> height(-3.0, 3.0);
  SampledFunction f(g);
  auto& v = f.mutable_values();
  while (f.is_zero()) {
    const std::size_t count = pieces(rng);
    for (std::size_t p = 0; p < count; ++p) {
      auto [x0, x1] = detail::random_span(cell, rng);
      const double c = height(rng);
      if (g.dim() == 1) {
        for (std::size_t i = x0; i <= x1; ++i)
          v[i] += c;
      } else {
        auto [y0, y1] = detail::random_span(cell, rng);
        for (std::size_t iy = y0; iy <= y1; ++iy)
          for (std::size_t ix = x0; ix <= x1; ++ix)
            v[g.index(ix, iy)] += c;
      }
    }
  }
  return f;
}

/// Nonnegative combinations of annulus indicators and smooth bumps, each
/// term confined to one annulus A_k with k in [k_lo, k_hi].
inline SampledFunction random_annulus_function(const Grid& g, int k_lo, int k_hi, std::mt19937_64& rng)
{
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SampledFunction f(g);
  while (f.is_zero()) {
    for (int k = k_lo; k <= k_hi; ++k) {
      if (unit(rng) < 0.6) {
        auto a = annulus_indicator(g, k);
        a *= std::exp(2.0 * unit(rng) - 1.0);
        f += a;
      }
      if (unit(rng) < 0.3) {
        const double inner = std::ldexp(1.0, k - 1);
        const double outer = std::ldexp(1.0, k);
        const double c = inner + (outer - inner) * (0.25 + 0.5 * unit(rng));
        const double w = std::min(c - inner, outer - c) * (0.5 + 0.5 * unit(rng));
        const Point dir = detail::random_direction(rng, g.dim());
        const Point centre{c * dir[0], c * dir[1]};
        const double amp = std::exp(2.0 * unit(rng) - 1.0);
        auto bump = SampledFunction::from(g, [&](const Point& x) {
          const double d2 = ((x[0] - centre[0]) * (x[0] - centre[0]) + (x[1] - centre[1]) * (x[1] - centre[1])) / (w * w);
          return d2 < 1.0 ? amp * (1.0 - d2) * (1.0 - d2) : 0.0;
        });
        f += annulus_restrict(bump, k);
      }
    }
  }
  return f;
}

/// `count` functions from the annulus family, seeded deterministically.
inline std::vector<SampledFunction> random_family(const Grid& g, std::size_t count, std::uint64_t seed, int k_lo,
                                                  int k_hi)
{
  std::mt19937_64 rng(seed);
  std::vector<SampledFunction> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(random_annulus_function(g, k_lo, k_hi, rng));
  return out;
}

// ---------------------------------------------------------------- Holder and duality

/// ∫|fg| <= r_q ||f||_q ||g||_q' over random step-function pairs. The first
/// case is the self-dual pair f = g = indicator of [-1, 1].
inline InequalityReport verify_holder(const ExponentFunction& q, const VerifyContext& ctx)
{
  const Grid& g = ctx.grid;
  const ExponentSamples qs(q, g);
  const ExponentSamples qcs(q.conjugate(), g);
  const double rq = holder_constant(q);
  InequalityReport rep;
  rep.statement_id = "Lemma2.1-Holder";
  rep.params = {{"q", q.describe()}, {"r_q", rq}, {"trials", ctx.trials}};

  auto run = [&](const SampledFunction& f, const SampledFunction& h, const std::string& label) {
    const double lhs = l1_norm(f * h);
    const double rhs = rq * luxemburg_norm(f, qs) * luxemburg_norm(h, qcs);
    rep.add_case(label, lhs, rhs);
  };
  const auto chi = box_indicator(g, -1.0, 1.0);
  run(chi, chi, "indicator[-1,1] x indicator[-1,1]");

  std::mt19937_64 rng(ctx.seed);
  for (std::size_t t = 0; t < ctx.trials; ++t)
    run(random_step_function(g, rng), random_step_function(g, rng), "step pair " + std::to_string(t));

  const double tol = 1e-9;
  rep.assert_check(rep.c_estimate <= 1.0 + tol, "max ratio " + detail::fmt(rep.c_estimate) + " <= 1");
  return rep;
}

/// Lower-bound witness for ||f||_q <= sup{∫|fg| : ||g||_q' <= 1}. The
/// candidates are the normalized power |f|^(q-1), the support indicator and
/// |f| itself; the case ratio is ||f|| / witness.
inline InequalityReport verify_duality_bound(const ExponentFunction& q, const VerifyContext& ctx)
{
  const Grid& g = ctx.grid;
  const ExponentSamples qs(q, g);
  const ExponentSamples qcs(q.conjugate(), g);
  InequalityReport rep;
  rep.statement_id = "Lemma2.1-Duality";
  rep.params = {{"q", q.describe()}, {"trials", ctx.trials}, {"witness_tolerance", 0.05}};

  auto unit_ball = [&](SampledFunction h) {
    const double n = luxemburg_norm(h, qcs);
    if (n > 0.0)
      h *= 1.0 / n;
    return h;
  };
  auto run = [&](const SampledFunction& f, const std::string& label) {
    const double norm = luxemburg_norm(f, qs);
    SampledFunction power(g);
    SampledFunction support(g);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double a = std::abs(f[i]);
      if (a == 0.0)
        continue;
      power.mutable_values()[i] = std::pow(a / norm, qs[i] - 1.0);
      support.mutable_values()[i] = 1.0;
    }
    double witness = 0.0;
    for (const auto& cand : {unit_ball(power), unit_ball(support), unit_ball(f.abs())})
      witness = std::max(witness, l1_norm(f * cand));
    rep.add_case(label, norm, witness);
  };
  run(box_indicator(g, -1.0, 1.0), "indicator[-1,1]");
  std::mt19937_64 rng(ctx.seed);
  for (std::size_t t = 0; t < ctx.trials; ++t)
    run(random_step_function(g, rng), "step " + std::to_string(t));

  rep.assert_check(rep.c_estimate <= 1.0 / 0.95, "witness >= 0.95 ||f|| (max ||f||/witness " +
                                                   detail::fmt(rep.c_estimate) + ")");
  return rep;
}

// ---------------------------------------------------------------- delta estimation

enum class DeltaWindow
{
  delta1, ///< exponent q',  window (0, 1/(q')_+)
  delta2, ///< exponent q,   window (0, 1/q_+)
  delta3, ///< exponent q1', window (0, 1/(q2')_+)
  delta4  ///< exponent q2,  window (0, 1/(q1)_+)
};

inline std::string to_string(DeltaWindow w)
{
  switch (w) {
  case DeltaWindow::delta1: return "delta1";
  case DeltaWindow::delta2: return "delta2";
  case DeltaWindow::delta3: return "delta3";
  case DeltaWindow::delta4: return "delta4";
  }
  return "delta";
}

/// Fitted exponent in ||chi_S|| / ||chi_B|| <= C (|S|/|B|)^delta over nested
/// dyadic balls S = B_j, B = B_k, j < k.
///
/// `delta` is the largest value valid with C = 1 (the lower envelope of the
/// pair slopes). `ls_slope` is the least-squares slope through the origin and
/// `fit_residual` its RMS residual. For constant exponents both equal 1/q0.
struct DeltaEstimate
{
  DeltaWindow window = DeltaWindow::delta2;
  double delta = 0.0;
  double ls_slope = 0.0;
  double fit_residual = 0.0;
  /// Upper end of the window the estimate is checked against.
  double bound = 0.0;
  /// The window bound used in the boundedness theorem for the fractional case
  /// (1/(q1')_+ for delta3, 1/(q2)_+ for delta4); equal to `bound` otherwise.
  double theorem_bound = 0.0;
  bool in_window = false;
  std::string exponent;
  std::size_t pairs = 0;
  /// Per pair: (j, k, log |S|/|B|, log ||chi_S||/||chi_B||).
  std::vector<std::array<double, 4>> samples;
};

/// Ball indicator norms ||chi_{B_k}|| and measures for k = k_lo .. k_hi.
inline std::pair<std::vector<double>, std::vector<double>> ball_norms(const Grid& g, const ExponentFunction& q,
                                                                     int k_lo, int k_hi)
{
  const ExponentSamples qs(q, g);
  std::vector<double> norms, measures;
  for (int k = k_lo; k <= k_hi; ++k) {
    const auto chi = ball_indicator(g, k);
    norms.push_back(luxemburg_norm(chi, qs));
    measures.push_back(detail::measure(chi));
  }
  return {norms, measures};
}

/// Estimates delta_i for the window `which`. `beta` enters delta3/delta4 via q2.
inline DeltaEstimate estimate_delta(const ExponentFunction& q, DeltaWindow which, const VerifyContext& ctx,
                                    double beta = 0.0)
{
  const Grid& g = ctx.grid;
  DeltaEstimate est;
  est.window = which;
  std::optional<ExponentFunction> e;
  switch (which) {
  case DeltaWindow::delta1:
    e = q.conjugate();
    est.bound = est.theorem_bound = 1.0 / e->q_plus();
    break;
  case DeltaWindow::delta2:
    e = q;
    est.bound = est.theorem_bound = 1.0 / q.q_plus();
    break;
  case DeltaWindow::delta3:
    e = q.conjugate();
    est.bound = 1.0 / sobolev_exponent(q, beta).conjugate().q_plus();
    est.theorem_bound = 1.0 / e->q_plus();
    break;
  case DeltaWindow::delta4:
    e = sobolev_exponent(q, beta);
    est.bound = 1.0 / q.q_plus();
    est.theorem_bound = 1.0 / e->q_plus();
    break;
  }
  est.exponent = e->describe();

  const int k_lo = detail::finest_resolved_ball(g);
  const int k_hi = g.k_max();
  if (k_hi - k_lo + 1 < 3)
    throw PreconditionError("delta estimation needs at least 3 (j, k) ball pairs in range");
  const auto [norms, measures] = ball_norms(g, *e, k_lo, k_hi);

  double sxx = 0.0, sxy = 0.0;
  double envelope = std::numeric_limits<double>::infinity();
  for (int k = k_lo; k <= k_hi; ++k)
    for (int j = k_lo; j < k; ++j) {
      const double x = std::log(measures[std::size_t(j - k_lo)] / measures[std::size_t(k - k_lo)]);
      const double y = std::log(norms[std::size_t(j - k_lo)] / norms[std::size_t(k - k_lo)]);
      est.samples.push_back({double(j), double(k), x, y});
      sxx += x * x;
      sxy += x * y;
      envelope = std::min(envelope, y / x);
    }
  est.pairs = est.samples.size();
  est.ls_slope = sxy / sxx;
  double ss = 0.0;
  for (const auto& s : est.samples)
    ss += (s[3] - est.ls_slope * s[2]) * (s[3] - est.ls_slope * s[2]);
  est.fit_residual = std::sqrt(ss / double(est.pairs));
  est.delta = envelope;
  // closed at the top: for constant exponents the fitted value is exactly 1/q0
  est.in_window = est.delta > 0.0 && est.delta < 1.0 && est.delta <= est.bound + 1e-9;
  return est;
}

/// The pairwise inequalities behind a delta estimate, as a report.
inline InequalityReport delta_report(const DeltaEstimate& est, const std::string& q_label)
{
  InequalityReport rep;
  rep.statement_id = "Lemma2.2-" + to_string(est.window);
  rep.params = {{"q", q_label},
                {"exponent", est.exponent},
                {"delta", est.delta},
                {"ls_slope", est.ls_slope},
                {"fit_residual", est.fit_residual},
                {"window_bound", est.bound},
                {"theorem_bound", est.theorem_bound}};
  for (const auto& s : est.samples) {
    std::ostringstream label;
    label << "S=B_" << int(s[0]) << " B=B_" << int(s[1]);
    rep.add_case(label.str(), std::exp(s[3]), std::exp(est.delta * s[2]));
  }
  rep.assert_check(est.in_window, "delta " + detail::fmt(est.delta) + " in (0, " + detail::fmt(est.bound) + "]");
  rep.admissible = est.in_window;
  if (est.delta > est.theorem_bound + 1e-9)
    rep.notes.push_back("delta exceeds the tighter bound " + detail::fmt(est.theorem_bound));
  return rep;
}

// ---------------------------------------------------------------- ball lemmas

/// |B|^-1 ||chi_B||_q ||chi_B||_q' across dyadic balls; bounded above and below.
inline InequalityReport verify_lemma_2_3(const ExponentFunction& q, const VerifyContext& ctx)
{
  const Grid& g = ctx.grid;
  InequalityReport rep;
  rep.statement_id = "Lemma2.3-BallProduct";
  auto products = [&](const Grid& grid, const ExponentFunction& e, int k_lo, int k_hi, bool record) {
    const auto [nq, meas] = ball_norms(grid, e, k_lo, k_hi);
    const auto nqc = ball_norms(grid, e.conjugate(), k_lo, k_hi).first;
    std::vector<double> out;
    for (int k = k_lo; k <= k_hi; ++k) {
      const std::size_t i = std::size_t(k - k_lo);
      out.push_back(nq[i] * nqc[i] / meas[i]);
      if (record)
        rep.add_case("B_" + std::to_string(k), nq[i] * nqc[i], meas[i]);
    }
    return out;
  };

  const int k_lo = detail::finest_resolved_ball(g);
  const auto base = products(g, q, k_lo, g.k_max(), true);
  const double base_spread = detail::spread(base);

  // Extension by two octaves: 1D refines h by 4 and grows R by 4; in 2D the
  // cost restricts it to h x 2, so only the outward side gains two octaves.
  const std::size_t m_ext = g.points_per_axis() * (g.dim() == 1 ? 16 : 2);
  const int k_max_ext = g.k_max() + 2;
  const Grid ext(g.dim(), k_max_ext, m_ext, Grid::finest_resolved_shell(g.dim(), k_max_ext, m_ext));
  const auto q_ext = q.with_domain_radius(ext.radius());
  const int k_lo_ext = detail::finest_resolved_ball(ext);
  const auto extended = products(ext, q_ext, k_lo_ext, k_max_ext, false);
  const double ext_spread = detail::spread(extended);

  rep.params = {{"q", q.describe()},
                {"k_range", {k_lo, g.k_max()}},
                {"extended_k_range", {k_lo_ext, k_max_ext}},
                {"spread", base_spread},
                {"extended_spread", ext_spread}};
  rep.stable = detail::stable_pair(base_spread, ext_spread);
  rep.assert_check(base_spread <= 10.0, "max/min over k = " + detail::fmt(base_spread) + " <= 10");
  rep.assert_check(rep.stable, "spread changes < 25% on the extended range (" + detail::fmt(ext_spread) + ")");
  if (q.is_constant()) {
    double worst = 0.0;
    for (double v : base)
      worst = std::max(worst, std::abs(v - 1.0));
    rep.assert_check(worst <= 1e-9, "constant exponent: product = 1 (max deviation " + detail::fmt(worst) + ")");
  }
  return rep;
}

/// r_k = 2^(k beta) ||chi_{B_k}||_q2 / ||chi_{B_k}||_q1 across dyadic balls.
inline InequalityReport verify_prop_2_4(const ExponentFunction& q1, double beta, const VerifyContext& ctx)
{
  const Grid& g = ctx.grid;
  const double n = double(g.dim());
  if (!(beta > 0.0 && beta < n / q1.q_plus()))
    throw PreconditionError("characteristic-function estimate requires 0 < beta < n/(q1)_+");
  const auto q2 = sobolev_exponent(q1, beta);
  const int k_lo = detail::finest_resolved_ball(g);
  const auto [n1, meas] = ball_norms(g, q1, k_lo, g.k_max());
  const auto n2 = ball_norms(g, q2, k_lo, g.k_max()).first;

  InequalityReport rep;
  rep.statement_id = "Prop2.4-BallRatio";
  std::vector<double> r;
  double closed_form_dev = 0.0;
  for (int k = k_lo; k <= g.k_max(); ++k) {
    const std::size_t i = std::size_t(k - k_lo);
    const double rhs = std::exp2(-double(k) * beta) * n1[i];
    rep.add_case("B_" + std::to_string(k), n2[i], rhs);
    r.push_back(rep.cases.back().ratio);
    // constant exponents: r_k = 2^(k beta) |B_k|^(-beta/n) with the grid measure
    const double closed = std::exp2(double(k) * beta) * std::pow(meas[i], -beta / n);
    closed_form_dev = std::max(closed_form_dev, std::abs(r.back() - closed) / closed);
  }
  const double s = detail::spread(r);
  rep.params = {{"q1", q1.describe()}, {"q2", q2.describe()}, {"beta", beta}, {"k_range", {k_lo, g.k_max()}},
                {"spread", s}};
  rep.assert_check(s <= 10.0, "max/min r_k = " + detail::fmt(s) + " <= 10");
  if (q1.is_constant()) {
    rep.assert_check(closed_form_dev <= 1e-6,
                     "constant exponent: r_k matches 2^(k beta)|B_k|^(-beta/n) (dev " + detail::fmt(closed_form_dev) + ")");
    rep.assert_check(s - 1.0 <= 1e-6 || g.dim() != 1, "1D constant exponent: r_k constant in k");
  }
  return rep;
}

/// I_beta(chi_{B_k}) >= C 2^(k beta) on B_k: min over B_k of the potential.
inline InequalityReport verify_ibeta_ball_lower_bound(double beta, const VerifyContext& ctx)
{
  const Grid& g = ctx.grid;
  detail::check_fractional_beta(beta, g.dim(), "fractional integral");
  InequalityReport rep;
  rep.statement_id = "Prop2.4-LowerBound";
  const int k_lo = detail::finest_resolved_ball(g);
  std::vector<double> r;
  for (int k = k_lo; k <= g.k_max(); ++k) {
    const auto chi = ball_indicator(g, k);
    const auto pot = fractional_integral(chi, beta);
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < chi.size(); ++i)
      if (chi[i] != 0.0)
        lo = std::min(lo, pot[i]);
    // recorded as 2^(k beta) <= C^-1 min I_beta chi: ratio is the lower constant
    rep.add_case("B_" + std::to_string(k), lo, std::exp2(double(k) * beta));
    r.push_back(rep.cases.back().ratio);
  }
  const double s = detail::spread(r);
  rep.c_estimate = *std::min_element(r.begin(), r.end());
  rep.params = {{"beta", beta}, {"k_range", {k_lo, g.k_max()}}, {"spread", s}};
  rep.notes.push_back("c_estimate is the smallest lower constant min_k ratio");
  rep.assert_check(rep.c_estimate > 0.0, "lower constant " + detail::fmt(rep.c_estimate) + " > 0");
  rep.assert_check(s <= 10.0, "lower constant spread " + detail::fmt(s) + " <= 10");
  return rep;
}

// ---------------------------------------------------------------- Lebesgue boundedness

namespace detail {

inline void require_log_holder(const ExponentFunction& q)
{
  const auto lh = check_log_holder(q);
  if (!lh.local_satisfied || !lh.decay_satisfied)
    throw PreconditionError("exponent must satisfy the log-Holder conditions (C1)/(C2); estimated C1 = " +
                            fmt(lh.c_local) + ", C2 = " + fmt(lh.c_decay));
}

/// Ratio sweep ||Tf||_target / ||f||_source; stability compares the first
/// half of the trials against all of them.
inline void lebesgue_sweep(InequalityReport& rep, const OperatorHandle& op, const ExponentFunction& src,
                           const ExponentFunction& tgt, const VerifyContext& ctx, const std::string& tag,
                           std::uint64_t seed)
{
  const Grid& g = ctx.grid;
  const ExponentSamples ss(src, g);
  const ExponentSamples ts(tgt, g);
  std::vector<SampledFunction> fs;
  fs.push_back(box_indicator(g, -1.0, 1.0));
  std::mt19937_64 rng(seed);
  for (std::size_t t = 0; t < ctx.trials; ++t)
    fs.push_back(t % 2 == 0 ? random_step_function(g, rng)
                            : random_annulus_function(g, g.k_min() + 1, g.k_max() - 1, rng));
  double half = 0.0, all = 0.0;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (fs[i].is_zero())
      continue;
    const double lhs = luxemburg_norm(apply(op, fs[i]), ts);
    const double rhs = luxemburg_norm(fs[i], ss);
    rep.add_case(tag + (i == 0 ? " indicator[-1,1]" : " f" + std::to_string(i)), lhs, rhs);
    all = std::max(all, rep.cases.back().ratio);
    if (i <= fs.size() / 2)
      half = all;
  }
  const bool st = stable_pair(half, all);
  rep.stable = rep.stable && st;
  rep.params["c_" + tag] = all;
  rep.assert_check(std::isfinite(all), tag + ": max ratio " + fmt(all) + " finite");
  rep.assert_check(st, tag + ": max ratio changes < 25% when trials double (" + fmt(half) + " -> " + fmt(all) + ")");
}

} // namespace detail

/// ||I_beta f||_q2 / ||f||_q1 over random f.
inline InequalityReport verify_hls(const ExponentFunction& q1, double beta, const VerifyContext& ctx)
{
  detail::require_log_holder(q1);
  const double n = double(ctx.grid.dim());
  if (!(beta > 0.0 && beta < n / q1.q_plus()))
    throw PreconditionError("fractional integral bound requires 0 < beta < n/(q1)_+");
  const auto q2 = sobolev_exponent(q1, beta);
  InequalityReport rep;
  rep.statement_id = "Prop2.3-HLS";
  rep.params = {{"q1", q1.describe()}, {"q2", q2.describe()}, {"beta", beta}, {"trials", ctx.trials}};
  detail::lebesgue_sweep(rep, OperatorHandle::fractional_integral(beta), q1, q2, ctx, "q1->q2", ctx.seed);
  return rep;
}

/// ||Mf||_q / ||f||_q for q and for q' (empirical B-membership of both).
inline InequalityReport verify_maximal_boundedness(const ExponentFunction& q, const VerifyContext& ctx)
{
  detail::require_log_holder(q);
  InequalityReport rep;
  rep.statement_id = "Prop2.2-MaximalDuality";
  rep.params = {{"q", q.describe()}, {"trials", ctx.trials}};
  const auto M = OperatorHandle::maximal();
  detail::lebesgue_sweep(rep, M, q, q, ctx, "q", ctx.seed);
  const auto qc = q.conjugate();
  detail::lebesgue_sweep(rep, M, qc, qc, ctx, "q'", ctx.seed + 1);
  return rep;
}

// ---------------------------------------------------------------- size conditions

/// Size-condition constant on chi_{A_k} at resolution m and 2m; stable when
/// the refinement changes it by less than 10%.
inline InequalityReport verify_size_condition(const OperatorHandle& op, SizeCondition condition, int k,
                                              const VerifyContext& ctx)
{
  const Grid& g = ctx.grid;
  const Grid fine(g.dim(), g.k_max(), g.points_per_axis() * 2, g.k_min());
  InequalityReport rep;
  rep.statement_id = "Size" + to_string(condition) + "-" + op.name;
  const auto coarse_rep = estimate_size_constant(op, annulus_indicator(g, k), condition);
  const auto fine_rep = estimate_size_constant(op, annulus_indicator(fine, k), condition);
  rep.add_case("m=" + std::to_string(g.points_per_axis()), coarse_rep.c_estimate, 1.0);
  rep.add_case("m=" + std::to_string(fine.points_per_axis()), fine_rep.c_estimate, 1.0);
  const double a = coarse_rep.c_estimate;
  const double b = fine_rep.c_estimate;
  const double change = a > 0.0 ? std::abs(b - a) / a : (b == 0.0 ? 0.0 : 1.0);
  rep.stable = change < 0.10;
  rep.params = {{"operator", op.name}, {"beta", op.beta}, {"condition", to_string(condition)}, {"k", k},
                {"refinement_change", change}};
  rep.assert_check(std::isfinite(a) && std::isfinite(b), "constants finite");
  rep.assert_check(rep.stable, "constant changes " + detail::fmt(100.0 * change) + "% < 10% under m -> 2m");
  return rep;
}

// ---------------------------------------------------------------- Herz-Morrey boundedness

struct AlphaWindow
{
  double lower = 0.0;
  double upper = 0.0;
  double midpoint() const { return 0.5 * (lower + upper); }
  bool contains(double a) const { return a > lower && a < upper; }
};

/// λ - n δ2 < α < λ + n δ1 from fitted δ1 (q') and δ2 (q).
inline AlphaWindow theorem_3_1_window(const ExponentFunction& q, double lambda, const VerifyContext& ctx)
{
  const double n = double(ctx.grid.dim());
  const auto d1 = estimate_delta(q, DeltaWindow::delta1, ctx);
  const auto d2 = estimate_delta(q, DeltaWindow::delta2, ctx);
  return {lambda - n * d2.delta, lambda + n * d1.delta};
}

/// λ - n δ4 < α < λ + n δ3 from fitted δ3 (q1') and δ4 (q2).
inline AlphaWindow theorem_3_2_window(const ExponentFunction& q1, double beta, double lambda,
                                      const VerifyContext& ctx)
{
  const double n = double(ctx.grid.dim());
  const auto d3 = estimate_delta(q1, DeltaWindow::delta3, ctx, beta);
  const auto d4 = estimate_delta(q1, DeltaWindow::delta4, ctx, beta);
  return {lambda - n * d4.delta, lambda + n * d3.delta};
}

namespace detail {

/// Shared sweep of both boundedness theorems: herz_morrey(Tf; target) /
/// herz_morrey(f; source) over a base family on the central half of the
/// annulus range and a doubled family on the full range.
inline void herz_morrey_sweep(InequalityReport& rep, const OperatorHandle& op, const HerzMorreyParams& src,
                              const HerzMorreyParams& tgt, const VerifyContext& ctx)
{
  const Grid& g = ctx.grid;
  src.validate(g);
  tgt.validate(g);
  const ExponentSamples ss(src.q, g);
  const ExponentSamples ts(tgt.q, g);
  const int kl = src.k_min + 1;
  const int kh = src.k_max - 1;
  if (kh < kl)
    throw PreconditionError("boundedness sweep needs at least three annuli in the k range");
  const int len = kh - kl + 1;
  const int base_len = (len + 1) / 2;
  const int base_lo = kl + (len - base_len) / 2;
  const int base_hi = base_lo + base_len - 1;

  double c_base = 0.0, c_full = 0.0;
  bool finite = true;
  auto run = [&](const std::vector<SampledFunction>& fam, const std::string& tag, double& c) {
    for (std::size_t i = 0; i < fam.size(); ++i) {
      const auto tf = restrict_to_ball(apply(op, fam[i]), tgt.k_max);
      const double lhs = herz_morrey_detailed(tf, tgt, ts).value;
      const double rhs = herz_morrey_detailed(fam[i], src, ss).value;
      rep.add_case(tag + " f" + std::to_string(i), lhs, rhs);
      c = std::max(c, rep.cases.back().ratio);
      finite = finite && std::isfinite(rep.cases.back().ratio);
    }
  };
  run(random_family(g, ctx.trials, ctx.seed, base_lo, base_hi), "base", c_base);
  run(random_family(g, ctx.trials, ctx.seed + 1, kl, kh), "doubled", c_full);

  rep.stable = stable_pair(c_base, c_full);
  rep.params["base_k_range"] = {base_lo, base_hi};
  rep.params["doubled_k_range"] = {kl, kh};
  rep.params["c_base"] = number(c_base);
  rep.params["c_doubled"] = number(c_full);
  if (rep.admissible) {
    rep.assert_check(finite, "all ratios finite");
    rep.assert_check(rep.stable, "max ratio changes < 25% when the sweep range doubles (" + fmt(c_base) + " -> " +
                                   fmt(c_full) + ")");
  } else {
    rep.notes.push_back("alpha outside the admissible window: computed, not asserted");
  }
}

inline void record_size_constants(InequalityReport& rep, const OperatorHandle& op, const HerzMorreyParams& src,
                                  const Grid& g, bool fractional)
{
  const int k = (src.k_min + src.k_max) / 2;
  const auto f = annulus_indicator(g, k);
  const auto outer = fractional ? SizeCondition::fractional_outer : SizeCondition::outer;
  const auto inner = fractional ? SizeCondition::fractional_inner : SizeCondition::inner;
  for (auto c : {outer, inner}) {
    const double v = estimate_size_constant(op, f, c).c_estimate;
    rep.params["size_constants"][to_string(c)] = number(v);
    rep.assert_check(std::isfinite(v), "size condition " + to_string(c) + " constant " + fmt(v) + " finite");
  }
}

inline nlohmann::json space_json(const HerzMorreyParams& p)
{
  return {{"alpha", p.alpha}, {"lambda", p.lambda}, {"p", p.p}, {"q", p.q.describe()}, {"k_range", {p.k_min, p.k_max}}};
}

inline void check_operator_beta(const OperatorHandle& op, double beta)
{
  if (op.beta != beta)
    throw PreconditionError("operator '" + op.name + "' has beta = " + fmt(op.beta) + ", expected " + fmt(beta));
}

inline void boundedness_core(InequalityReport& rep, const OperatorHandle& op, const HerzMorreyParams& src,
                             const HerzMorreyParams& tgt, double beta, const AlphaWindow& w, const VerifyContext& ctx)
{
  if (!(src.lambda > 0.0))
    throw PreconditionError("Herz-Morrey boundedness requires lambda > 0");
  rep.params["operator"] = op.name;
  rep.params["beta"] = beta;
  rep.params["source"] = space_json(src);
  rep.params["target"] = space_json(tgt);
  rep.params["alpha_window"] = {w.lower, w.upper};
  rep.params["trials"] = ctx.trials;
  rep.admissible = w.contains(src.alpha);
  record_size_constants(rep, op, src, ctx.grid, beta > 0.0);
  herz_morrey_sweep(rep, op, src, tgt, ctx);
}

} // namespace detail

/// Herz-Morrey boundedness of T on MK^{α,λ}_{p,q}.
inline InequalityReport verify_theorem_3_1(const OperatorHandle& op, const HerzMorreyParams& params,
                                           const VerifyContext& ctx)
{
  detail::check_operator_beta(op, 0.0);
  InequalityReport rep;
  rep.statement_id = "Theorem3.1-HerzMorrey";
  const auto w = theorem_3_1_window(params.q, params.lambda, ctx);
  detail::boundedness_core(rep, op, params, params, 0.0, w, ctx);
  return rep;
}

/// T_beta: MK^{α,λ}_{p1,q1} -> MK^{α,λ}_{p2,q2} with 1/q2 = 1/q1 - beta/n.
/// `source.q` is q1; `p2` is the target summability. With beta = 0 the report
/// coincides case by case with verify_theorem_3_1.
inline InequalityReport verify_theorem_3_2(const OperatorHandle& op, const HerzMorreyParams& source, double p2,
                                           const VerifyContext& ctx)
{
  const double beta = op.beta;
  const double n = double(ctx.grid.dim());
  if (beta < 0.0 || (beta > 0.0 && !(beta < n / source.q.q_plus())))
    throw PreconditionError("fractional boundedness requires 0 < beta < n/(q1)_+");
  if (!(source.p <= p2))
    throw PreconditionError("fractional boundedness requires 0 < p1 <= p2");
  HerzMorreyParams target = source;
  target.q = sobolev_exponent(source.q, beta);
  target.p = p2;
  InequalityReport rep;
  rep.statement_id = beta == 0.0 ? "Theorem3.1-HerzMorrey" : "Theorem3.2-HerzMorrey";
  const auto w = beta == 0.0 ? theorem_3_1_window(source.q, source.lambda, ctx)
                             : theorem_3_2_window(source.q, beta, source.lambda, ctx);
  detail::boundedness_core(rep, op, source, target, beta, w, ctx);
  return rep;
}

// ---------------------------------------------------------------- E-term decomposition

struct ETermDecomposition
{
  double e1 = 0.0; ///< far field from inner annuli, j <= k - 2
  double e2 = 0.0; ///< near diagonal, |j - k| <= 1
  double e3 = 0.0; ///< far field from outer annuli, j >= k + 2
  double lhs = 0.0; ///< ||Tf||^p over the truncated range
  double f_norm_p = 0.0; ///< ||f||^p over the truncated range
  double c_report = 0.0; ///< lhs / (e1 + e2 + e3)
  double bound = 1.0; ///< max(1, 3^(p - 1))
  bool passed = true;
  std::vector<std::string> flags;
};

/// Splits ||Tf||^p of the Herz-Morrey norm into the three sums of the
/// boundedness proof, with f_j = f chi_j and the 2^(-k0 λ p) 2^(k α p) weights.
inline ETermDecomposition decompose_e_terms(const OperatorHandle& op, const SampledFunction& f,
                                            const HerzMorreyParams& params)
{
  const Grid& g = f.grid();
  params.validate(g);
  bool outside = false;
  support_shells(f, &outside);
  if (outside)
    throw PreconditionError("E-term decomposition needs f supported in the annuli of the k range");
  const ExponentSamples qs(params.q, g);
  const int k0 = params.k_min;
  const int k1 = params.k_max;
  const std::size_t count = std::size_t(k1 - k0 + 1);
  const double p = params.p;

  std::vector<SampledFunction> tf;
  for (int j = k0; j <= k1; ++j) {
    const auto fj = annulus_restrict(f, j);
    tf.push_back(fj.is_zero() ? SampledFunction(g) : apply(op, fj));
  }
  // norms[j][k] = ||T(f_j) chi_k||
  std::vector<std::vector<double>> norms(count);
  for (std::size_t j = 0; j < count; ++j)
    norms[j] = tf[j].is_zero() ? std::vector<double>(count, 0.0) : annulus_norms(tf[j], qs, k0, k1);

  std::vector<double> a1(count, 0.0), a2(count, 0.0), a3(count, 0.0);
  bool any1 = false, any3 = false;
  for (std::size_t k = 0; k < count; ++k) {
    const double w = std::exp2(double(k0 + int(k)) * params.alpha * p);
    double s1 = 0.0, s3 = 0.0;
    for (std::size_t j = 0; j + 2 <= k; ++j) {
      s1 += norms[j][k];
      any1 = true;
    }
    for (std::size_t j = k + 2; j < count; ++j) {
      s3 += norms[j][k];
      any3 = true;
    }
    SampledFunction near(g);
    for (std::size_t j = (k == 0 ? 0 : k - 1); j <= std::min(count - 1, k + 1); ++j)
      near += annulus_restrict(f, k0 + int(j));
    const double n2 = near.is_zero() ? 0.0 : annulus_norm(apply(op, near), qs, k0 + int(k));
    a1[k] = w * std::pow(s1, p);
    a2[k] = w * std::pow(n2, p);
    a3[k] = w * std::pow(s3, p);
  }
  auto sup_cutoff = [&](const std::vector<double>& a) {
    double best = 0.0, partial = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
      partial += a[k];
      best = std::max(best, std::exp2(-double(k0 + int(k)) * params.lambda * p) * partial);
    }
    return best;
  };

  ETermDecomposition out;
  out.e1 = sup_cutoff(a1);
  out.e2 = sup_cutoff(a2);
  out.e3 = sup_cutoff(a3);
  const auto tf_full = detail::restrict_to_ball(apply(op, f), k1);
  out.lhs = std::pow(herz_morrey_from_annuli(annulus_norms(tf_full, qs, k0, k1), params.alpha, params.lambda, p, k0).value, p);
  out.f_norm_p = std::pow(herz_morrey_from_annuli(annulus_norms(f, qs, k0, k1), params.alpha, params.lambda, p, k0).value, p);
  const double sum = out.e1 + out.e2 + out.e3;
  out.c_report = sum > 0.0 ? out.lhs / sum : (out.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  out.bound = std::max(1.0, std::pow(3.0, p - 1.0));
  out.passed = out.c_report <= out.bound * (1.0 + 1e-9);
  if (!any1)
    out.flags.push_back("E1 sum is empty on the truncated range");
  if (!any3)
    out.flags.push_back("E3 sum is empty on the truncated range");
  return out;
}

} // namespace vexherz
