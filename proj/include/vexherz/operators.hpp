#pragma once

#include "vexherz/detail/kernel.hpp"
#include "vexherz/errors.hpp"
#include "vexherz/exponent.hpp"
#include "vexherz/grid.hpp"
#include "vexherz/norms.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace vexherz {

enum class Normalization
{
  radius_power,   ///< r^(beta - n)
  volume_fraction ///< |B|^(beta/n - 1)
};

enum class Centering
{
  centered,
  uncentered_sampled
};

enum class OperatorKind
{
  maximal,
  fractional_maximal,
  fractional_integral,
  identity,
  zero,
  user
};

/// Pointwise size conditions checked against an operator.
enum class SizeCondition
{
  kernel_bound,    ///< |Tf(x)| <= C int |x-y|^-n |f(y)| dy, x outside supp f
  outer,           ///< |Tf(x)| <= C |x|^-n ||f||_1 for |x| >= 2^(k+1)
  inner,           ///< |Tf(x)| <= C 2^-kn ||f||_1 for |x| <= 2^(k-2)
  fractional_outer, ///< |Tf(x)| <= C |x|^(beta-n) ||f||_1 for |x| >= 2^(k+1)
  fractional_inner, ///< |Tf(x)| <= C 2^(k(beta-n)) ||f||_1 for |x| <= 2^(k-2)
  fractional_kernel_bound ///< |Tf(x)| <= C int |x-y|^(beta-n) |f(y)| dy, x outside supp f
};

inline std::string to_string(SizeCondition c)
{
  switch (c) {
  case SizeCondition::kernel_bound: return "(1.1)";
  case SizeCondition::outer: return "(Size-1)";
  case SizeCondition::inner: return "(Size-2)";
  case SizeCondition::fractional_outer: return "(equ.5)";
  case SizeCondition::fractional_inner: return "(equ.6)";
  case SizeCondition::fractional_kernel_bound: return "(equ.12)";
  }
  return "?";
}

inline std::optional<SizeCondition> size_condition_from_string(const std::string& s)
{
  for (auto c : {SizeCondition::kernel_bound, SizeCondition::outer, SizeCondition::inner,
                 SizeCondition::fractional_outer, SizeCondition::fractional_inner,
                 SizeCondition::fractional_kernel_bound}) {
    const std::string name = to_string(c);
    if (s == name || s == name.substr(1, name.size() - 2))
      return c;
  }
  return std::nullopt;
}

/// A named sublinear operator with its fractional order and normalization.
struct OperatorHandle
{
  std::string name;
  OperatorKind kind = OperatorKind::identity;
  double beta = 0.0;
  Normalization normalization = Normalization::radius_power;
  Centering centering = Centering::centered;
  std::function<SampledFunction(const SampledFunction&)> user;
  std::vector<SizeCondition> claimed;

  static OperatorHandle maximal(Normalization norm = Normalization::radius_power,
                                Centering centering = Centering::centered)
  {
    OperatorHandle h;
    h.name = "maximal";
    h.kind = OperatorKind::maximal;
    h.normalization = norm;
    h.centering = centering;
    h.claimed = {SizeCondition::kernel_bound, SizeCondition::outer, SizeCondition::inner};
    return h;
  }

  static OperatorHandle fractional_maximal(double beta, Normalization norm = Normalization::volume_fraction,
                                           Centering centering = Centering::centered)
  {
    OperatorHandle h;
    h.name = "fractional_maximal";
    h.kind = OperatorKind::fractional_maximal;
    h.beta = beta;
    h.normalization = norm;
    h.centering = centering;
    h.claimed = {SizeCondition::fractional_outer, SizeCondition::fractional_inner,
                 SizeCondition::fractional_kernel_bound};
    return h;
  }

  static OperatorHandle fractional_integral(double beta)
  {
    OperatorHandle h;
    h.name = "ibeta";
    h.kind = OperatorKind::fractional_integral;
    h.beta = beta;
    h.claimed = {SizeCondition::fractional_outer, SizeCondition::fractional_inner,
                 SizeCondition::fractional_kernel_bound};
    return h;
  }

  static OperatorHandle identity()
  {
    OperatorHandle h;
    h.name = "identity";
    h.kind = OperatorKind::identity;
    h.claimed = {SizeCondition::kernel_bound, SizeCondition::outer, SizeCondition::inner};
    return h;
  }

  static OperatorHandle zero()
  {
    OperatorHandle h;
    h.name = "zero";
    h.kind = OperatorKind::zero;
    return h;
  }

  static OperatorHandle custom(std::string name, double beta, std::function<SampledFunction(const SampledFunction&)> fn,
                               std::vector<SizeCondition> claimed = {})
  {
    OperatorHandle h;
    h.name = std::move(name);
    h.kind = OperatorKind::user;
    h.beta = beta;
    h.user = std::move(fn);
    h.claimed = std::move(claimed);
    return h;
  }
};

namespace detail {

inline double ball_weight(double r, int dim, double beta, Normalization norm)
{
  if (norm == Normalization::radius_power)
    return std::pow(r, beta - double(dim));
  const double vol = (dim == 1 ? 2.0 : std::numbers::pi) * std::pow(r, double(dim));
  return std::pow(vol, beta / double(dim) - 1.0);
}

/// Radii h, h 2^(1/20), ..., up to at least 2 R sqrt(n): 20 rungs per octave
/// (about 66 per decade), so every dyadic multiple of h is a rung.
inline std::vector<double> radius_ladder(const Grid& g)
{
  constexpr int per_octave = 20;
  const double top = 2.0 * g.radius() * std::sqrt(double(g.dim()));
  std::vector<double> r;
  for (int i = 0;; ++i) {
    const double v = g.spacing() * std::exp2(double(i) / per_octave);
    r.push_back(v);
    if (v >= top)
      break;
  }
  return r;
}

/// Cumulative integral of |f| at the cell boundaries, 1D.
inline std::vector<double> abs_prefix(const SampledFunction& f)
{
  const auto v = f.values();
  std::vector<double> p(v.size() + 1, 0.0);
  const double h = f.grid().spacing();
  for (std::size_t i = 0; i < v.size(); ++i)
    p[i + 1] = p[i] + std::abs(v[i]) * h;
  return p;
}

/// Exact cumulative integral of the step function |f| at an arbitrary t, 1D.
inline double prefix_at(const std::vector<double>& p, const Grid& g, double t)
{
  const double h = g.spacing();
  const double s = (t + g.radius()) / h;
  if (s <= 0.0)
    return 0.0;
  const double m = double(g.points_per_axis());
  if (s >= m)
    return p.back();
  const auto i = std::size_t(s);
  return p[i] + (p[i + 1] - p[i]) * (s - double(i));
}

// 1D centered supremum at grid point c. The ball integral S(r) is piecewise
// linear in r with nonnegative slope, and the weight is c r^-s with
// s in (0, 1], so on every linear piece S(r) w(r) is maximal at an end.
// The ends are the radii (j + 1/2) h where both ball ends cross cell boundaries.
inline double centered_sup_1d(const std::vector<double>& p, std::size_t c, std::size_t m,
                              const std::vector<double>& weights)
{
  double best = 0.0;
  const std::size_t far = std::max(c, m - 1 - c);
  for (std::size_t j = 0; j <= far; ++j) {
    const std::size_t lo = c >= j ? c - j : 0;
    const std::size_t hi = std::min(m, c + j + 1);
    best = std::max(best, (p[hi] - p[lo]) * weights[j]);
  }
  return best;
}

/// w((j + 1/2) h) for j = 0 .. m - 1.
inline std::vector<double> breakpoint_weights(const Grid& g, double beta, Normalization norm)
{
  std::vector<double> w(g.points_per_axis());
  for (std::size_t j = 0; j < w.size(); ++j)
    w[j] = ball_weight((double(j) + 0.5) * g.spacing(), 1, beta, norm);
  return w;
}

/// 1D centered supremum at an arbitrary point.
inline double centered_sup_1d_at(const std::vector<double>& p, const Grid& g, double x, double beta, Normalization norm)
{
  const double h = g.spacing();
  const std::size_t m = g.points_per_axis();
  double best = 0.0;
  for (std::size_t i = 0; i <= m; ++i) {
    const double b = -g.radius() + h * double(i);
    const double r = std::abs(x - b);
    if (r == 0.0)
      continue;
    const double s = prefix_at(p, g, x + r) - prefix_at(p, g, x - r);
    if (s > 0.0)
      best = std::max(best, s * ball_weight(r, 1, beta, norm));
  }
  if (beta == 0.0) {
    // r -> 0 limit: the density at x
    const double r = 1e-9 * h;
    const double s = prefix_at(p, g, x + r) - prefix_at(p, g, x - r);
    best = std::max(best, s * ball_weight(r, 1, beta, norm));
  }
  return best;
}

/// Row prefix sums of |f| on a 2D grid; row iy occupies [iy (m+1), (iy+1)(m+1)).
inline std::vector<double> row_prefix(const SampledFunction& f)
{
  const std::size_t m = f.grid().points_per_axis();
  std::vector<double> p((m + 1) * m, 0.0);
  const auto v = f.values();
  for (std::size_t iy = 0; iy < m; ++iy)
    for (std::size_t ix = 0; ix < m; ++ix)
      p[iy * (m + 1) + ix + 1] = p[iy * (m + 1) + ix] + std::abs(v[iy * m + ix]);
  return p;
}

/// Sum of |f| over cells whose centres lie within distance r of x (2D), times the cell area.
inline double disc_sum_2d(const std::vector<double>& p, const Grid& g, const Point& x, double r)
{
  const std::size_t m = g.points_per_axis();
  const double h = g.spacing();
  const double R = g.radius();
  // cell centre coordinate: -R + h (i + 1/2)
  // the slack keeps centres exactly on the circle inside the closed disc
  constexpr double slack = 1e-9;
  auto to_index = [&](double t) { return (t + R) / h - 0.5; };
  const double y_lo = std::ceil(to_index(x[1] - r) - slack);
  const double y_hi = std::floor(to_index(x[1] + r) + slack);
  double s = 0.0;
  for (double iyd = std::max(0.0, y_lo); iyd <= std::min(double(m) - 1.0, y_hi); iyd += 1.0) {
    const auto iy = std::size_t(iyd);
    const double dy = g.axis_coordinate(iy) - x[1];
    const double half = std::sqrt(std::max(0.0, r * r - dy * dy + slack * h * h));
    const double lo = std::max(0.0, std::ceil(to_index(x[0] - half) - slack));
    const double hi = std::min(double(m) - 1.0, std::floor(to_index(x[0] + half) + slack));
    if (hi < lo)
      continue;
    s += p[iy * (m + 1) + std::size_t(hi) + 1] - p[iy * (m + 1) + std::size_t(lo)];
  }
  return s * g.cell_volume();
}

inline SampledFunction maximal_uncentered_1d(const SampledFunction& f, double beta, Normalization norm)
{
  const Grid& g = f.grid();
  const std::size_t m = g.points_per_axis();
  const double h = g.spacing();
  const auto p = abs_prefix(f);
  SampledFunction out(g);
  auto& o = out.mutable_values();
  std::vector<double> avg(m);
  for (double r : radius_ladder(g)) {
    const double w = ball_weight(r, 1, beta, norm);
    for (std::size_t c = 0; c < m; ++c) {
      const double x = g.axis_coordinate(c);
      avg[c] = (prefix_at(p, g, x + r) - prefix_at(p, g, x - r)) * w;
    }
    // sliding maximum over centres with |c - x| < r
    const auto half = std::size_t(std::ceil(r / h)) - 1;
    std::deque<std::size_t> dq;
    std::size_t next = 0;
    for (std::size_t i = 0; i < m; ++i) {
      while (next < m && next <= i + half) {
        while (!dq.empty() && avg[dq.back()] <= avg[next])
          dq.pop_back();
        dq.push_back(next++);
      }
      while (dq.front() + half < i)
        dq.pop_front();
      o[i] = std::max(o[i], avg[dq.front()]);
    }
  }
  return out;
}

/// Centered 2D supremum at every cell centre. Disc offsets are lattice
/// vectors, so each rung reduces to fixed row half-widths. Rungs that cannot
/// reach the support are skipped, and the scan stops once mass * w(r) cannot
/// beat the current best (w is non-increasing for beta <= n).
inline void centered_sup_2d(const SampledFunction& f, const std::vector<double>& p, const std::vector<double>& ladder,
                            double beta, Normalization norm, std::vector<double>& o)
{
  const Grid& g = f.grid();
  const long m = long(g.points_per_axis());
  const double h = g.spacing();
  const auto v = f.values();
  long x0 = m, x1 = -1, y0 = m, y1 = -1;
  double mass = 0.0;
  for (long iy = 0; iy < m; ++iy)
    for (long ix = 0; ix < m; ++ix) {
      const double a = std::abs(v[std::size_t(iy * m + ix)]);
      if (a == 0.0)
        continue;
      mass += a;
      x0 = std::min(x0, ix);
      x1 = std::max(x1, ix);
      y0 = std::min(y0, iy);
      y1 = std::max(y1, iy);
    }
  if (x1 < 0)
    return;

  struct Rung
  {
    double rho;
    double weight; // w(r) times the cell area
    std::vector<long> half; // half[|dy|]: largest dx with dx^2 + dy^2 <= rho^2
  };
  std::vector<Rung> rungs;
  for (double r : ladder) {
    Rung k{r / h, ball_weight(r, 2, beta, norm) * g.cell_volume(), {}};
    const double rr = k.rho * k.rho;
    for (long dy = 0; double(dy * dy) <= rr; ++dy) {
      long w = long(std::sqrt(std::max(0.0, rr - double(dy * dy))));
      while (double((w + 1) * (w + 1) + dy * dy) <= rr)
        ++w;
      while (w > 0 && double(w * w + dy * dy) > rr)
        --w;
      k.half.push_back(w);
    }
    rungs.push_back(std::move(k));
  }

  const std::size_t stride = std::size_t(m) + 1;
  for (long iy = 0; iy < m; ++iy)
    for (long ix = 0; ix < m; ++ix) {
      const long gx = std::max({0L, x0 - ix, ix - x1});
      const long gy = std::max({0L, y0 - iy, iy - y1});
      const double gap = std::hypot(double(gx), double(gy));
      double best = 0.0;
      for (const auto& k : rungs) {
        if (k.rho < gap)
          continue;
        if (mass * k.weight <= best)
          break;
        const long reach = long(k.half.size()) - 1;
        double s = 0.0;
        for (long y = std::max(iy - reach, y0); y <= std::min(iy + reach, y1); ++y) {
          const long w = k.half[std::size_t(std::abs(y - iy))];
          const double* row = p.data() + std::size_t(y) * stride;
          s += row[std::min(ix + w, m - 1) + 1] - row[std::max(ix - w, 0L)];
        }
        best = std::max(best, s * k.weight);
      }
      o[std::size_t(iy * m + ix)] = best;
    }
}

inline SampledFunction maximal_2d(const SampledFunction& f, double beta, Normalization norm, Centering centering)
{
  const Grid& g = f.grid();
  const auto p = row_prefix(f);
  const auto ladder = radius_ladder(g);
  const std::size_t n = g.size();
  SampledFunction out(g);
  auto& o = out.mutable_values();
  const double h = g.spacing();
  const std::size_t m = g.points_per_axis();
  if (centering == Centering::centered) {
    centered_sup_2d(f, p, ladder, beta, norm, o);
    return out;
  }
  std::vector<double> avg(n);
  for (double r : ladder) {
    const double w = ball_weight(r, 2, beta, norm);
    for (std::size_t i = 0; i < n; ++i)
      avg[i] = disc_sum_2d(p, g, g.point(i), r) * w;
    const long reach = long(std::ceil(r / h));
    for (std::size_t i = 0; i < n; ++i) {
      const long ix = long(i % m);
      const long iy = long(i / m);
      double best = o[i];
      for (long dy = -reach; dy <= reach; ++dy) {
        const long y = iy + dy;
        if (y < 0 || y >= long(m))
          continue;
        for (long dx = -reach; dx <= reach; ++dx) {
          const long x = ix + dx;
          if (x < 0 || x >= long(m))
            continue;
          if (double(dx * dx + dy * dy) * h * h >= r * r)
            continue;
          best = std::max(best, avg[std::size_t(y) * m + std::size_t(x)]);
        }
      }
      o[i] = best;
    }
  }
  return out;
}

inline SampledFunction maximal_family(const SampledFunction& f, double beta, Normalization norm, Centering centering)
{
  const Grid& g = f.grid();
  if (g.dim() == 2)
    return maximal_2d(f, beta, norm, centering);
  if (centering == Centering::uncentered_sampled)
    return maximal_uncentered_1d(f, beta, norm);
  const auto p = abs_prefix(f);
  const std::size_t m = g.points_per_axis();
  SampledFunction out(g);
  auto& o = out.mutable_values();
  const auto w = breakpoint_weights(g, beta, norm);
  for (std::size_t c = 0; c < m; ++c)
    o[c] = centered_sup_1d(p, c, m, w);
  return out;
}

inline void check_fractional_beta(double beta, int dim, const char* what)
{
  if (!(beta > 0.0 && beta < double(dim))) {
    std::ostringstream os;
    os << what << " requires 0 < beta < n = " << dim << ", got " << beta;
    throw PreconditionError(os.str());
  }
}

} // namespace detail

/// Hardy-Littlewood maximal function sup_r w(r) int_{B(x,r)} |f|.
///
/// 1D centered: exact supremum over all radii (breakpoint enumeration).
/// 2D, and uncentered sampling: supremum over the radius ladder.
inline SampledFunction maximal(const SampledFunction& f, const OperatorHandle& handle = OperatorHandle::maximal())
{
  if (handle.beta != 0.0)
    throw PreconditionError("maximal operator requires beta = 0; use fractional_maximal");
  return detail::maximal_family(f, 0.0, handle.normalization, handle.centering);
}

/// Fractional maximal function sup_B |B|^(beta/n - 1) int_B |f| (or r^(beta - n) with radius-power normalization).
inline SampledFunction fractional_maximal(const SampledFunction& f, const OperatorHandle& handle)
{
  detail::check_fractional_beta(handle.beta, f.grid().dim(), "fractional maximal operator");
  return detail::maximal_family(f, handle.beta, handle.normalization, handle.centering);
}

/// Fractional integral I_beta f(x) = int f(y) |x-y|^(beta-n) dy, with f taken
/// constant on each cell and the kernel integrated exactly over each cell.
inline SampledFunction fractional_integral(const SampledFunction& f, double beta)
{
  const Grid& g = f.grid();
  detail::check_fractional_beta(beta, g.dim(), "fractional integral");
  const detail::CellKernel kernel(g, beta - double(g.dim()));
  SampledFunction out(g);
  auto& o = out.mutable_values();
  const auto v = f.values();
  const long m = long(g.points_per_axis());
  if (g.dim() == 1) {
    for (long j = 0; j < m; ++j) {
      const double fj = v[std::size_t(j)];
      if (fj == 0.0)
        continue;
      for (long i = 0; i < m; ++i)
        o[std::size_t(i)] += fj * kernel(j - i);
    }
    return out;
  }
  for (long jy = 0; jy < m; ++jy)
    for (long jx = 0; jx < m; ++jx) {
      const double fj = v[std::size_t(jy * m + jx)];
      if (fj == 0.0)
        continue;
      for (long iy = 0; iy < m; ++iy) {
        double* row = &o[std::size_t(iy * m)];
        for (long ix = 0; ix < m; ++ix)
          row[ix] += fj * kernel(jx - ix, jy - iy);
      }
    }
  return out;
}

/// I_beta f at an arbitrary point.
inline double fractional_integral_at(const SampledFunction& f, double beta, const Point& x)
{
  const Grid& g = f.grid();
  detail::check_fractional_beta(beta, g.dim(), "fractional integral");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f[i] != 0.0)
      s += f[i] * detail::cell_integral_at(g, i, x, beta - double(g.dim()));
  return s;
}

/// Maximal or fractional maximal function at an arbitrary point (centered balls).
inline double maximal_at(const SampledFunction& f, const OperatorHandle& handle, const Point& x)
{
  const Grid& g = f.grid();
  if (handle.beta != 0.0)
    detail::check_fractional_beta(handle.beta, g.dim(), "fractional maximal operator");
  if (g.dim() == 1)
    return detail::centered_sup_1d_at(detail::abs_prefix(f), g, x[0], handle.beta, handle.normalization);
  const auto p = detail::row_prefix(f);
  double best = 0.0;
  for (double r : detail::radius_ladder(g))
    best = std::max(best, detail::disc_sum_2d(p, g, x, r) * detail::ball_weight(r, 2, handle.beta, handle.normalization));
  return best;
}

/// Applies any operator handle.
inline SampledFunction apply(const OperatorHandle& op, const SampledFunction& f)
{
  switch (op.kind) {
  case OperatorKind::maximal: return maximal(f, op);
  case OperatorKind::fractional_maximal: return fractional_maximal(f, op);
  case OperatorKind::fractional_integral: return fractional_integral(f, op.beta);
  case OperatorKind::identity: return f;
  case OperatorKind::zero: return SampledFunction(f.grid());
  case OperatorKind::user:
    if (!op.user)
      throw PreconditionError("user operator '" + op.name + "' has no function attached");
    return op.user(f);
  }
  return f;
}

/// q2 with 1/q1(x) - 1/q2(x) = beta/n.
inline ExponentFunction sobolev_exponent(const ExponentFunction& q1, double beta)
{
  if (beta < 0.0)
    throw PreconditionError("Sobolev exponent requires beta >= 0");
  const double n = double(q1.dimension());
  if (beta > 0.0 && !(beta < n / q1.q_plus())) {
    std::ostringstream os;
    os << "Sobolev exponent requires 0 < beta < n/(q1)_+ = " << n / q1.q_plus() << ", got beta = " << beta;
    throw PreconditionError(os.str());
  }
  return q1.sobolev_shift(beta / n);
}

/// Named operators, built-ins plus user registrations.
class OperatorRegistry
{
public:
  OperatorRegistry()
  {
    add(OperatorHandle::maximal());
    add(OperatorHandle::identity());
    add(OperatorHandle::zero());
  }

  void add(OperatorHandle h) { ops_[h.name] = std::move(h); }

  /// Looks up a name; "ibeta" and "fractional_maximal" are built on demand for the given beta.
  OperatorHandle get(const std::string& name, double beta = 0.0) const
  {
    if (name == "ibeta" || name == "fractional_integral")
      return OperatorHandle::fractional_integral(beta);
    if (name == "fractional_maximal" || name == "mbeta")
      return OperatorHandle::fractional_maximal(beta);
    if (name == "maximal-volume")
      return OperatorHandle::maximal(Normalization::volume_fraction);
    if (name == "maximal-uncentered")
      return OperatorHandle::maximal(Normalization::radius_power, Centering::uncentered_sampled);
    auto it = ops_.find(name);
    if (it == ops_.end())
      throw ConfigError("unknown operator '" + name + "'");
    return it->second;
  }

  std::vector<std::string> names() const
  {
    std::vector<std::string> out;
    for (const auto& [k, v] : ops_)
      out.push_back(k);
    return out;
  }

private:
  std::map<std::string, OperatorHandle> ops_;
};

struct SizeConditionReport
{
  double c_estimate = 0.0;
  Point worst_point{0.0, 0.0};
  SizeCondition condition = SizeCondition::outer;
  int support_shell = 0;
  std::size_t zone_points = 0;
};

/// The single annulus carrying supp f; throws when f is zero or spans several.
inline int single_support_shell(const SampledFunction& f)
{
  bool outside = false;
  const auto ks = support_shells(f, &outside);
  if (outside || ks.size() != 1) {
    std::ostringstream os;
    os << "size condition needs f supported in a single annulus A_k (found " << ks.size() << " annuli"
       << (outside ? ", plus points outside the annulus range" : "") << ")";
    throw PreconditionError(os.str());
  }
  return ks.front();
}

/// Smallest C fitting the chosen size condition over the grid points of its zone.
inline SizeConditionReport estimate_size_constant(const OperatorHandle& op, const SampledFunction& f,
                                                  SizeCondition condition)
{
  const Grid& g = f.grid();
  SizeConditionReport rep;
  rep.condition = condition;
  rep.support_shell = single_support_shell(f);
  const int k = rep.support_shell;
  const double n = double(g.dim());
  const double beta = op.beta;
  const double l1 = l1_norm(f);

  const bool outer = condition == SizeCondition::outer || condition == SizeCondition::fractional_outer;
  const bool inner = condition == SizeCondition::inner || condition == SizeCondition::fractional_inner;
  const bool kernel = condition == SizeCondition::kernel_bound || condition == SizeCondition::fractional_kernel_bound;
  const bool fractional = condition == SizeCondition::fractional_outer ||
                          condition == SizeCondition::fractional_inner ||
                          condition == SizeCondition::fractional_kernel_bound;
  if (fractional && !(beta > 0.0 && beta < n))
    throw PreconditionError("fractional size conditions need an operator with 0 < beta < n");

  std::vector<std::size_t> zone;
  const double outer_r = std::ldexp(1.0, k + 1);
  const double inner_r = std::ldexp(1.0, k - 2);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.norm(i);
    if ((outer && r >= outer_r) || (inner && r <= inner_r) || (kernel && f[i] == 0.0))
      zone.push_back(i);
  }
  if (zone.empty()) {
    std::ostringstream os;
    os << "zone of " << to_string(condition) << " is empty on the grid for k = " << k;
    throw PreconditionError(os.str());
  }
  rep.zone_points = zone.size();

  const SampledFunction tf = apply(op, f);
  std::optional<detail::CellKernel> kern;
  if (kernel)
    kern.emplace(g, (condition == SizeCondition::kernel_bound ? 0.0 : beta) - n);
  const auto fv = f.values();
  const long m = long(g.points_per_axis());
  for (std::size_t i : zone) {
    double env = 0.0;
    const double r = g.norm(i);
    switch (condition) {
    case SizeCondition::outer: env = std::pow(r, -n) * l1; break;
    case SizeCondition::inner: env = std::exp2(-double(k) * n) * l1; break;
    case SizeCondition::fractional_outer: env = std::pow(r, beta - n) * l1; break;
    case SizeCondition::fractional_inner: env = std::exp2(double(k) * (beta - n)) * l1; break;
    default: {
      const long ix = long(i) % m;
      const long iy = long(i) / m;
      for (std::size_t j = 0; j < fv.size(); ++j) {
        if (fv[j] == 0.0)
          continue;
        const long jx = long(j) % m;
        const long jy = long(j) / m;
        env += std::abs(fv[j]) * (g.dim() == 1 ? (*kern)(long(j) - long(i)) : (*kern)(jx - ix, jy - iy));
      }
    }
    }
    if (!(env > 0.0))
      continue;
    const double ratio = std::abs(tf[i]) / env;
    if (ratio > rep.c_estimate) {
      rep.c_estimate = ratio;
      rep.worst_point = g.point(i);
    }
  }
  return rep;
}

} // namespace vexherz
