#pragma once

#include "vexherz/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace vexherz {

using Point = std::array<double, 2>;

inline double norm_of(const Point& x, int dim)
{
  return dim == 1 ? std::abs(x[0]) : std::hypot(x[0], x[1]);
}

enum class ExponentKind
{
  constant,
  piecewise_constant,
  smooth_profile,
  decay_profile
};

enum class SmoothShape
{
  gaussian, ///< a + b exp(-|x|^2 / w^2)
  linear    ///< a + b |x| / w
};

/// Parameters of one exponent family. Field meaning depends on kind:
///   constant:            a = q0
///   piecewise_constant:  a on {x_1 < threshold}, b on {x_1 >= threshold}
///   smooth_profile:      a + b * shape(|x| / width)
///   decay_profile:       a + b / ln(e + |x|)
struct ExponentDescriptor
{
  ExponentKind kind = ExponentKind::constant;
  double a = 2.0;
  double b = 0.0;
  double width = 1.0;
  double threshold = 0.0;
  SmoothShape shape = SmoothShape::gaussian;
  int dimension = 1;
  double domain_radius = 8.0;

  static ExponentDescriptor constant(double q0, int dim = 1, double radius = 8.0)
  {
    ExponentDescriptor d;
    d.kind = ExponentKind::constant;
    d.a = q0;
    d.dimension = dim;
    d.domain_radius = radius;
    return d;
  }

  static ExponentDescriptor piecewise(double left, double right, double threshold = 0.0,
                                      int dim = 1, double radius = 8.0)
  {
    ExponentDescriptor d;
    d.kind = ExponentKind::piecewise_constant;
    d.a = left;
    d.b = right;
    d.threshold = threshold;
    d.dimension = dim;
    d.domain_radius = radius;
    return d;
  }

  static ExponentDescriptor decay(double a = 2.0, double b = 1.0, int dim = 1, double radius = 8.0)
  {
    ExponentDescriptor d;
    d.kind = ExponentKind::decay_profile;
    d.a = a;
    d.b = b;
    d.dimension = dim;
    d.domain_radius = radius;
    return d;
  }

  static ExponentDescriptor smooth(double a, double b, double width, SmoothShape shape = SmoothShape::gaussian,
                                   int dim = 1, double radius = 8.0)
  {
    ExponentDescriptor d;
    d.kind = ExponentKind::smooth_profile;
    d.a = a;
    d.b = b;
    d.width = width;
    d.shape = shape;
    d.dimension = dim;
    d.domain_radius = radius;
    return d;
  }
};

inline std::string to_string(ExponentKind k)
{
  switch (k) {
  case ExponentKind::constant: return "constant";
  case ExponentKind::piecewise_constant: return "piecewise-constant";
  case ExponentKind::smooth_profile: return "smooth-profile";
  case ExponentKind::decay_profile: return "decay-profile";
  }
  return "unknown";
}

/// A variable exponent q(.) on the box [-R, R]^n, possibly composed with the
/// pointwise maps q -> q' (conjugate) and q -> 1 / (1/q - s) (Sobolev shift).
///
/// Values are immutable after construction. q_minus() and q_plus() bracket
/// every evaluation on the working box.
class ExponentFunction
{
public:
  explicit ExponentFunction(ExponentDescriptor desc)
    : desc_(desc)
  {
    if (desc_.dimension != 1 && desc_.dimension != 2)
      throw PreconditionError("exponent dimension must be 1 or 2");
    if (!(desc_.domain_radius > 0.0) || !std::isfinite(desc_.domain_radius))
      throw PreconditionError("exponent domain radius must be positive and finite");
    if (desc_.kind == ExponentKind::smooth_profile && !(desc_.width > 0.0))
      throw PreconditionError("smooth-profile width must be positive");
    certify_bounds();
  }

  double operator()(const Point& x) const { return apply_maps(base(x)); }

  double q_minus() const { return q_minus_; }
  double q_plus() const { return q_plus_; }
  int dimension() const { return desc_.dimension; }
  double domain_radius() const { return desc_.domain_radius; }
  ExponentKind kind() const { return desc_.kind; }
  const ExponentDescriptor& descriptor() const { return desc_; }

  bool is_constant() const { return desc_.kind == ExponentKind::constant; }

  /// True when no conjugate or Sobolev map has been applied.
  bool is_base() const { return maps_.empty(); }

  /// Points where the family changes character: the origin for radial
  /// profiles, the split point for piecewise exponents.
  std::vector<Point> features() const
  {
    if (desc_.kind == ExponentKind::piecewise_constant)
      return {Point{desc_.threshold, 0.0}};
    return {Point{0.0, 0.0}};
  }

  /// Pointwise conjugate q'(x) = q(x) / (q(x) - 1).
  ExponentFunction conjugate() const
  {
    ExponentFunction out = *this;
    out.maps_.push_back({MapKind::conjugate, 0.0});
    out.q_minus_ = q_plus_ / (q_plus_ - 1.0);
    out.q_plus_ = q_minus_ / (q_minus_ - 1.0);
    return out;
  }

  /// q2 with 1/q(x) - 1/q2(x) = shift. Requires shift < 1 / q_plus.
  ExponentFunction sobolev_shift(double shift) const
  {
    if (!(shift >= 0.0) || !(shift < 1.0 / q_plus_)) {
      std::ostringstream os;
      os << "Sobolev exponent requires 0 <= beta/n < 1/(q1)_+ = " << 1.0 / q_plus_ << ", got " << shift;
      throw PreconditionError(os.str());
    }
    ExponentFunction out = *this;
    if (shift == 0.0)
      return out;
    out.maps_.push_back({MapKind::sobolev, shift});
    out.q_minus_ = 1.0 / (1.0 / q_minus_ - shift);
    out.q_plus_ = 1.0 / (1.0 / q_plus_ - shift);
    return out;
  }

  /// Same exponent on a box of a different half-width; the bounds are recertified.
  ExponentFunction with_domain_radius(double radius) const
  {
    auto d = desc_;
    d.domain_radius = radius;
    ExponentFunction out(d);
    for (const auto& m : maps_)
      out = m.kind == MapKind::conjugate ? out.conjugate() : out.sobolev_shift(m.shift);
    return out;
  }

  std::string describe() const
  {
    std::ostringstream os;
    os.precision(17);
    switch (desc_.kind) {
    case ExponentKind::constant: os << "const:" << desc_.a; break;
    case ExponentKind::piecewise_constant:
      os << "piecewise:" << desc_.a << ":" << desc_.b << ":" << desc_.threshold;
      break;
    case ExponentKind::smooth_profile:
      os << (desc_.shape == SmoothShape::gaussian ? "smooth:" : "linear:") << desc_.a << ":" << desc_.b << ":"
         << desc_.width;
      break;
    case ExponentKind::decay_profile: os << "decay:" << desc_.a << ":" << desc_.b; break;
    }
    for (const auto& m : maps_) {
      if (m.kind == MapKind::conjugate)
        os << "'";
      else
        os << "|sobolev:" << m.shift;
    }
    return os.str();
  }

private:
  enum class MapKind
  {
    conjugate,
    sobolev
  };
  struct Map
  {
    MapKind kind;
    double shift;
  };

  double radial(double r) const
  {
    switch (desc_.kind) {
    case ExponentKind::smooth_profile: {
      const double t = r / desc_.width;
      return desc_.shape == SmoothShape::gaussian ? desc_.a + desc_.b * std::exp(-t * t) : desc_.a + desc_.b * t;
    }
    case ExponentKind::decay_profile: return desc_.a + desc_.b / std::log(std::numbers::e + r);
    default: return desc_.a;
    }
  }

  double base(const Point& x) const
  {
    switch (desc_.kind) {
    case ExponentKind::constant: return desc_.a;
    case ExponentKind::piecewise_constant: return x[0] < desc_.threshold ? desc_.a : desc_.b;
    default: return radial(norm_of(x, desc_.dimension));
    }
  }

  double apply_maps(double q) const
  {
    for (const auto& m : maps_) {
      if (m.kind == MapKind::conjugate)
        q = q / (q - 1.0);
      else
        q = 1.0 / (1.0 / q - m.shift);
    }
    return q;
  }

  // Radial families are sampled densely on [0, R sqrt(n)] including both
  // endpoints; all built-in profiles are monotone in |x|, so the endpoint
  // values are the exact extremes and the dense scan certifies that.
  void certify_bounds()
  {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    const double r_max = desc_.domain_radius * std::sqrt(double(desc_.dimension));
    switch (desc_.kind) {
    case ExponentKind::constant: lo = hi = desc_.a; break;
    case ExponentKind::piecewise_constant:
      if (desc_.threshold > -desc_.domain_radius) {
        lo = std::min(lo, desc_.a);
        hi = std::max(hi, desc_.a);
      }
      if (desc_.threshold <= desc_.domain_radius) {
        lo = std::min(lo, desc_.b);
        hi = std::max(hi, desc_.b);
      }
      break;
    default: {
      constexpr int samples = 4096;
      for (int i = 0; i <= samples; ++i) {
        const double v = radial(r_max * double(i) / samples);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    }
    if (!std::isfinite(hi) || !std::isfinite(lo)) {
      throw PreconditionError("exponent must lie in P: requires q_+ = esssup q(x) < infinity");
    }
    if (!(lo > 1.0)) {
      std::ostringstream os;
      os << "exponent must lie in P: hypothesis 1< essinf q(x) = q_- violated (q_- = " << lo << ")";
      throw PreconditionError(os.str());
    }
    q_minus_ = lo;
    q_plus_ = hi;
  }

  ExponentDescriptor desc_;
  std::vector<Map> maps_;
  double q_minus_ = 0.0;
  double q_plus_ = 0.0;
};

inline ExponentFunction make_exponent(const ExponentDescriptor& desc)
{
  return ExponentFunction(desc);
}

inline ExponentFunction conjugate_exponent(const ExponentFunction& q)
{
  return q.conjugate();
}

/// Holder constant 1 + 1/q_- - 1/q_+ of the generalized Holder inequality.
inline double holder_constant(const ExponentFunction& q)
{
  return 1.0 + 1.0 / q.q_minus() - 1.0 / q.q_plus();
}

struct LogHolderReport
{
  double c_local = 0.0; ///< max |q(x)-q(y)| (-ln|x-y|) over pairs with 0 < |x-y| <= 1/2
  double c_decay = 0.0; ///< max |q(x)-q(y)| ln(e+|x|) over pairs with |y| >= |x|
  bool local_satisfied = true;
  bool decay_satisfied = true;
  double c_max = 50.0;
  std::size_t pairs_local = 0;
  std::size_t pairs_decay = 0;
  /// Per-decade maxima of the local quantity, coarsest (|x-y| ~ 1/2) first.
  std::vector<double> local_by_decade;
};

struct LogHolderOptions
{
  std::size_t pair_budget = 4000;
  double c_max = 50.0;
  std::uint64_t seed = 42;
  int finest_decade = -12; ///< smallest |x-y| sampled is 10^finest_decade
};

namespace detail {

inline Point random_direction(std::mt19937_64& rng, int dim)
{
  if (dim == 1)
    return {std::uniform_int_distribution<int>(0, 1)(rng) == 0 ? -1.0 : 1.0, 0.0};
  const double t = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
  return {std::cos(t), std::sin(t)};
}

inline bool inside_box(const Point& x, int dim, double radius)
{
  if (std::abs(x[0]) > radius)
    return false;
  return dim == 1 || std::abs(x[1]) <= radius;
}

} // namespace detail

/// Estimates the smallest constants for the local (C1) and decay (C2)
/// log-Holder conditions from sampled pairs in the working box.
///
/// Local pairs are stratified by distance decade between 10^finest_decade and
/// 1/2; a quarter of them are anchored at the exponent's feature points so
/// jumps are not missed. Decay pairs draw |x| log-uniformly and |y| >= |x|.
inline LogHolderReport check_log_holder(const ExponentFunction& q, const LogHolderOptions& opt = {})
{
  if (opt.pair_budget < 1000)
    throw PreconditionError("log-Holder check needs a pair budget of at least 1000");
  const int dim = q.dimension();
  const double R = q.domain_radius();
  if (!(R > 0.0))
    throw PreconditionError("log-Holder check needs a non-degenerate domain");

  LogHolderReport rep;
  rep.c_max = opt.c_max;
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform_point = [&] {
    Point p{(2.0 * unit(rng) - 1.0) * R, 0.0};
    if (dim == 2)
      p[1] = (2.0 * unit(rng) - 1.0) * R;
    return p;
  };

  const double top = std::log10(0.5);
  const int decades = int(std::ceil(top - opt.finest_decade));
  rep.local_by_decade.assign(decades, 0.0);
  const auto features = q.features();
  const std::size_t local_budget = opt.pair_budget / 2;
  for (std::size_t i = 0; i < local_budget; ++i) {
    const int dec = int(i % decades);
    const double e_hi = top - dec;
    const double e_lo = std::max(e_hi - 1.0, double(opt.finest_decade));
    const double d = std::pow(10.0, e_lo + (e_hi - e_lo) * unit(rng));
    Point x;
    const std::size_t round = i / std::size_t(decades);
    if (round % 4 == 3) {
      const Point& f = features[(round / 4) % features.size()];
      const Point dir = detail::random_direction(rng, dim);
      const double s = d * unit(rng);
      x = {f[0] + s * dir[0], f[1] + s * dir[1]};
    } else {
      x = uniform_point();
    }
    Point dir = detail::random_direction(rng, dim);
    Point y{x[0] + d * dir[0], x[1] + d * dir[1]};
    if (!detail::inside_box(y, dim, R))
      y = {x[0] - d * dir[0], x[1] - d * dir[1]};
    if (!detail::inside_box(x, dim, R) || !detail::inside_box(y, dim, R))
      continue;
    const double dist = std::hypot(x[0] - y[0], x[1] - y[1]);
    if (dist == 0.0 || dist > 0.5)
      continue;
    const double v = std::abs(q(x) - q(y)) * (-std::log(dist));
    rep.c_local = std::max(rep.c_local, v);
    rep.local_by_decade[dec] = std::max(rep.local_by_decade[dec], v);
    ++rep.pairs_local;
  }

  const double r_max = R * std::sqrt(double(dim));
  const double lr_lo = std::log(1e-3);
  const double lr_hi = std::log(r_max);
  const std::size_t decay_budget = opt.pair_budget - local_budget;
  for (std::size_t i = 0; i < decay_budget; ++i) {
    Point x;
    if (i % 4 == 3) {
      x = uniform_point();
    } else {
      const double rx = std::exp(lr_lo + (lr_hi - lr_lo) * unit(rng));
      const Point dir = detail::random_direction(rng, dim);
      x = {rx * dir[0], rx * dir[1]};
    }
    if (!detail::inside_box(x, dim, R))
      continue;
    const double nx = norm_of(x, dim);
    const double ry = nx + (r_max - nx) * unit(rng);
    const Point dir = detail::random_direction(rng, dim);
    Point y{ry * dir[0], ry * dir[1]};
    if (!detail::inside_box(y, dim, R)) {
      // clip to the box boundary along the same ray; stays at |y| >= |x| only if far enough
      const double scale = R / std::max(std::abs(y[0]), std::abs(y[1]));
      y = {y[0] * scale, y[1] * scale};
    }
    if (norm_of(y, dim) < nx)
      continue;
    const double v = std::abs(q(x) - q(y)) * std::log(std::numbers::e + nx);
    rep.c_decay = std::max(rep.c_decay, v);
    ++rep.pairs_decay;
  }

  if (rep.pairs_local + rep.pairs_decay < 2)
    throw PreconditionError("log-Holder check produced a degenerate pair set");
  rep.local_satisfied = rep.c_local <= opt.c_max;
  rep.decay_satisfied = rep.c_decay <= opt.c_max;
  return rep;
}

inline LogHolderReport check_log_holder(const ExponentFunction& q, std::size_t pair_budget)
{
  LogHolderOptions opt;
  opt.pair_budget = pair_budget;
  return check_log_holder(q, opt);
}

} // namespace vexherz
