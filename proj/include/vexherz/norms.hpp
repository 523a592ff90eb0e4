#pragma once

#include "vexherz/errors.hpp"
#include "vexherz/exponent.hpp"
#include "vexherz/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace vexherz {

/// q(.) evaluated at every point of a grid.
class ExponentSamples
{
public:
  ExponentSamples(const ExponentFunction& q, const Grid& grid)
    : grid_(grid)
    , values_(grid.size())
  {
    if (q.dimension() != grid.dim())
      throw PreconditionError("exponent and grid dimensions differ");
    for (std::size_t i = 0; i < values_.size(); ++i)
      values_[i] = q(grid.point(i));
  }

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

private:
  Grid grid_;
  std::vector<double> values_;
};

/// Evaluations of the modular recorded while computing a Luxemburg norm.
struct ModularCurve
{
  std::vector<std::pair<double, double>> evaluations; ///< (eta, rho(f/eta))
  double eta_lo = 0.0;
  double eta_hi = 0.0;
};

struct LuxemburgOptions
{
  double relative_width = 1e-10;
  int max_iterations = 200;
};

namespace detail {

/// Nonzero samples (|f|, q) of a function, optionally restricted to one annulus.
struct ModularTerms
{
  std::vector<double> magnitude;
  std::vector<double> exponent;
  double cell_volume = 0.0;
  double sup = 0.0;
  double box_volume = 0.0;

  double rho(double eta) const
  {
    double s = 0.0;
    for (std::size_t i = 0; i < magnitude.size(); ++i)
      s += std::pow(magnitude[i] / eta, exponent[i]);
    return s * cell_volume;
  }
};

inline ModularTerms collect_terms(std::span<const double> values, std::span<const double> qvals, const Grid& g,
                                  int shell = Grid::no_annulus)
{
  ModularTerms t;
  t.cell_volume = g.cell_volume();
  t.box_volume = std::pow(2.0 * g.radius(), g.dim());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == 0.0)
      continue;
    if (shell != Grid::no_annulus && g.shell(i) != shell)
      continue;
    if (!std::isfinite(values[i]))
      throw PreconditionError("Luxemburg norm requires finite function values");
    t.magnitude.push_back(std::abs(values[i]));
    t.exponent.push_back(qvals[i]);
    t.sup = std::max(t.sup, std::abs(values[i]));
  }
  return t;
}

inline double luxemburg(const ModularTerms& t, const LuxemburgOptions& opt, ModularCurve* curve)
{
  if (t.magnitude.empty())
    return 0.0;
  auto eval = [&](double eta) {
    const double r = t.rho(eta);
    if (curve)
      curve->evaluations.emplace_back(eta, r);
    return r;
  };
  double hi = std::max(1.0, t.sup * t.box_volume);
  while (eval(hi) > 1.0)
    hi *= 2.0;
  double lo = hi;
  while (eval(lo) < 1.0)
    lo *= 0.5;
  for (int it = 0; it < opt.max_iterations && (hi - lo) > opt.relative_width * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (eval(mid) <= 1.0)
      hi = mid;
    else
      lo = mid;
  }
  if (curve) {
    curve->eta_lo = lo;
    curve->eta_hi = hi;
  }
  return hi;
}

} // namespace detail

/// rho_q(f / eta) = integral of (|f(x)| / eta)^q(x).
inline double modular(const SampledFunction& f, const ExponentSamples& q, double eta)
{
  if (!(eta > 0.0))
    throw PreconditionError("modular requires eta > 0");
  return detail::collect_terms(f.values(), q.values(), f.grid()).rho(eta);
}

inline double modular(const SampledFunction& f, const ExponentFunction& q, double eta)
{
  return modular(f, ExponentSamples(q, f.grid()), eta);
}

/// inf{eta > 0 : rho_q(f / eta) <= 1}, by bracketing and bisection.
///
/// The returned value is the upper end of the final bracket, so
/// rho_q(f / norm) <= 1 always holds. The zero function has norm 0.
inline double luxemburg_norm(const SampledFunction& f, const ExponentSamples& q, ModularCurve* curve = nullptr,
                             const LuxemburgOptions& opt = {})
{
  return detail::luxemburg(detail::collect_terms(f.values(), q.values(), f.grid()), opt, curve);
}

inline double luxemburg_norm(const SampledFunction& f, const ExponentFunction& q, ModularCurve* curve = nullptr,
                             const LuxemburgOptions& opt = {})
{
  return luxemburg_norm(f, ExponentSamples(q, f.grid()), curve, opt);
}

/// ||f chi_k|| in L^q(.) without materializing the restriction.
inline double annulus_norm(const SampledFunction& f, const ExponentSamples& q, int k)
{
  check_shell_in_range(f.grid(), k);
  return detail::luxemburg(detail::collect_terms(f.values(), q.values(), f.grid(), k), {}, nullptr);
}

inline double l1_norm(const SampledFunction& f)
{
  double s = 0.0;
  for (double v : f.values())
    s += std::abs(v);
  return s * f.grid().cell_volume();
}

struct HerzMorreyParams
{
  double alpha = 0.0;
  double lambda = 0.0;
  double p = 1.0;
  ExponentFunction q{ExponentDescriptor::constant(2.0)};
  int k_min = 0;
  int k_max = 0;

  /// Parameters spanning the full annulus range of a grid.
  static HerzMorreyParams on(const Grid& g, double alpha, double lambda, double p, const ExponentFunction& q)
  {
    HerzMorreyParams hp;
    hp.alpha = alpha;
    hp.lambda = lambda;
    hp.p = p;
    hp.q = q;
    hp.k_min = g.k_min();
    hp.k_max = g.k_max();
    return hp;
  }

  void validate(const Grid& g) const
  {
    if (!(p > 0.0) || !std::isfinite(p))
      throw PreconditionError("Herz-Morrey norm requires 0 < p < infinity");
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
      throw PreconditionError("Herz-Morrey norm requires 0 <= lambda < infinity");
    if (!std::isfinite(alpha))
      throw PreconditionError("Herz-Morrey norm requires a finite alpha");
    if (k_min > k_max)
      throw PreconditionError("Herz-Morrey norm requires a non-empty k range");
    if (k_min < g.k_min() || k_max > g.k_max()) {
      std::ostringstream os;
      os << "k range [" << k_min << ", " << k_max << "] exceeds the grid's dyadic range [" << g.k_min() << ", "
         << g.k_max() << "]";
      throw PreconditionError(os.str());
    }
  }
};

struct HerzMorreyResult
{
  double value = 0.0;
  /// ||f chi_k||_{q(.)} for k = k_min .. k_max.
  std::vector<double> annulus_norms;
  /// 2^(-k0 lambda) (sum_{k <= k0} 2^(k alpha p) ||f chi_k||^p)^(1/p) for k0 = k_min .. k_max.
  std::vector<double> per_cutoff;
  int argmax_cutoff = 0;
  /// Estimate of the neglected sum over k < k_min, from the geometric ratio of
  /// the two innermost terms; infinite when the ratio does not decay.
  double tail_estimate = 0.0;
  bool tail_warning = false;
  /// f is nonzero inside B_(k_min - 1); the truncated value is then a lower bound.
  bool origin_support = false;
  std::vector<std::string> warnings;
};

/// Annulus norms ||f chi_k|| for k in [k_lo, k_hi], one pass over the grid.
inline std::vector<double> annulus_norms(const SampledFunction& f, const ExponentSamples& q, int k_lo, int k_hi)
{
  const Grid& g = f.grid();
  const std::size_t count = std::size_t(k_hi - k_lo + 1);
  std::vector<detail::ModularTerms> terms(count);
  for (auto& t : terms) {
    t.cell_volume = g.cell_volume();
    t.box_volume = std::pow(2.0 * g.radius(), g.dim());
  }
  const auto v = f.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const int k = g.shell(i);
    if (v[i] == 0.0 || k == Grid::no_annulus || k < k_lo || k > k_hi)
      continue;
    auto& t = terms[std::size_t(k - k_lo)];
    t.magnitude.push_back(std::abs(v[i]));
    t.exponent.push_back(q[i]);
    t.sup = std::max(t.sup, std::abs(v[i]));
  }
  std::vector<double> out(count);
  for (std::size_t j = 0; j < count; ++j)
    out[j] = detail::luxemburg(terms[j], {}, nullptr);
  return out;
}

/// Herz-Morrey norm from precomputed annulus norms (index 0 is k_min).
inline HerzMorreyResult herz_morrey_from_annuli(std::vector<double> norms, double alpha, double lambda, double p,
                                                int k_min)
{
  HerzMorreyResult res;
  res.annulus_norms = std::move(norms);
  const std::size_t count = res.annulus_norms.size();
  std::vector<double> terms(count);
  for (std::size_t j = 0; j < count; ++j) {
    const int k = k_min + int(j);
    terms[j] = std::exp2(double(k) * alpha * p) * std::pow(res.annulus_norms[j], p);
  }
  res.per_cutoff.resize(count);
  double partial = 0.0;
  res.value = 0.0;
  res.argmax_cutoff = k_min;
  for (std::size_t j = 0; j < count; ++j) {
    const int k0 = k_min + int(j);
    partial += terms[j];
    res.per_cutoff[j] = std::exp2(-double(k0) * lambda) * std::pow(partial, 1.0 / p);
    if (res.per_cutoff[j] > res.value) {
      res.value = res.per_cutoff[j];
      res.argmax_cutoff = k0;
    }
  }
  // cutoffs beyond k_max see a constant inner sum and a non-increasing weight,
  // so the supremum over k0 >= k_max is attained at k_max.

  if (count > 0 && terms[0] > 0.0) {
    if (count > 1 && terms[1] > 0.0 && terms[0] < terms[1]) {
      const double ratio = terms[0] / terms[1];
      res.tail_estimate = terms[0] * ratio / (1.0 - ratio);
    } else {
      res.tail_estimate = std::numeric_limits<double>::infinity();
    }
  }
  if (res.tail_estimate > 1e-6 * partial) {
    res.tail_warning = true;
    std::ostringstream os;
    os << "estimated tail below k_min = " << k_min << " is " << res.tail_estimate << " (sum " << partial << ")";
    res.warnings.push_back(os.str());
  }
  return res;
}

inline HerzMorreyResult herz_morrey_detailed(const SampledFunction& f, const HerzMorreyParams& params,
                                             const ExponentSamples& q)
{
  const Grid& g = f.grid();
  params.validate(g);
  const double inner = std::ldexp(1.0, params.k_min - 1);
  const double outer = std::ldexp(1.0, params.k_max);
  bool origin = false;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] == 0.0)
      continue;
    if (g.norm(i) > outer) {
      std::ostringstream os;
      os << "Herz-Morrey norm requires supp f inside B_" << params.k_max;
      throw PreconditionError(os.str());
    }
    if (g.norm(i) <= inner)
      origin = true;
  }
  auto res = herz_morrey_from_annuli(annulus_norms(f, q, params.k_min, params.k_max), params.alpha, params.lambda,
                                     params.p, params.k_min);
  res.origin_support = origin;
  if (origin)
    res.warnings.push_back("f does not vanish near the origin; the truncated supremum is a lower bound");
  return res;
}

inline HerzMorreyResult herz_morrey_detailed(const SampledFunction& f, const HerzMorreyParams& params)
{
  return herz_morrey_detailed(f, params, ExponentSamples(params.q, f.grid()));
}

/// sup_k0 2^(-k0 lambda) (sum_{k <= k0} 2^(k alpha p) ||f chi_k||_{q(.)}^p)^(1/p) over the truncation range.
inline double herz_morrey_norm(const SampledFunction& f, const HerzMorreyParams& params)
{
  return herz_morrey_detailed(f, params).value;
}

/// (sum_k 2^(k alpha p) ||f chi_k||_{q(.)}^p)^(1/p): the lambda = 0 case of herz_morrey_norm.
inline double herz_norm(const SampledFunction& f, double alpha, double p, const ExponentFunction& q)
{
  auto params = HerzMorreyParams::on(f.grid(), alpha, 0.0, p, q);
  return herz_morrey_norm(f, params);
}

/// Both sides of (sum a_i)^theta <= sum a_i^theta for nonnegative a_i, theta in (0, 1].
inline std::pair<double, double> power_subadditivity(std::span<const double> a, double theta)
{
  if (!(theta > 0.0 && theta <= 1.0))
    throw PreconditionError("power subadditivity needs theta in (0, 1]");
  double sum = 0.0;
  double powers = 0.0;
  for (double x : a) {
    sum += std::abs(x);
    powers += std::pow(std::abs(x), theta);
  }
  return {std::pow(sum, theta), powers};
}

} // namespace vexherz
