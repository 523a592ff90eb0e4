#pragma once

#include "vexherz/errors.hpp"
#include "vexherz/exponent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <span>
#include <sstream>
#include <vector>

namespace vexherz {

/// Dyadic shell index of a radius: the k with 2^(k-1) < r <= 2^k.
inline int dyadic_shell(double r)
{
  int e = 0;
  const double mant = std::frexp(r, &e); // r = mant * 2^e, mant in [1/2, 1)
  return mant == 0.5 ? e - 1 : e;
}

/// Uniform midpoint grid on [-R, R]^n with R = 2^k_max, n in {1, 2}.
///
/// Points are cell centres; sets (balls, annuli) are classified by the centre
/// of each cell. The annulus range [k_min, k_max] is validated against the
/// resolution guard: every annulus in range holds at least `min_annulus_points`
/// grid points. Copies share the immutable geometry.
class Grid
{
public:
  static constexpr std::size_t min_annulus_points = 8;
  static constexpr int no_annulus = std::numeric_limits<int>::min();

  Grid(int dim, int k_max, std::size_t m, int k_min)
  {
    if (dim != 1 && dim != 2)
      throw PreconditionError("grid dimension must be 1 or 2");
    if (m < 2)
      throw PreconditionError("grid needs at least 2 points per axis");
    if (k_min > k_max)
      throw PreconditionError("grid annulus range is empty (k_min > k_max)");
    auto g = std::make_shared<Geometry>();
    g->dim = dim;
    g->k_max = k_max;
    g->k_min = k_min;
    g->m = m;
    g->radius = std::ldexp(1.0, k_max);
    g->h = 2.0 * g->radius / double(m);
    g->cell_volume = dim == 1 ? g->h : g->h * g->h;
    const std::size_t total = dim == 1 ? m : m * m;
    g->norms.resize(total);
    g->shell.resize(total);
    std::vector<std::size_t> counts(std::size_t(k_max - k_min + 1), 0);
    for (std::size_t i = 0; i < total; ++i) {
      const Point x = point_of(*g, i);
      const double r = norm_of(x, dim);
      g->norms[i] = r;
      const int k = r > 0.0 ? dyadic_shell(r) : no_annulus;
      if (k != no_annulus && k >= k_min && k <= k_max) {
        g->shell[i] = k;
        ++counts[std::size_t(k - k_min)];
      } else {
        g->shell[i] = no_annulus;
      }
    }
    for (int k = k_min; k <= k_max; ++k) {
      if (counts[std::size_t(k - k_min)] < min_annulus_points) {
        std::ostringstream os;
        os << "resolution guard: annulus A_" << k << " holds " << counts[std::size_t(k - k_min)]
           << " grid points (need " << min_annulus_points << "); raise m or k_min";
        throw PreconditionError(os.str());
      }
    }
    geo_ = std::move(g);
  }

  /// Smallest k whose annulus passes the resolution guard at this resolution.
  static int finest_resolved_shell(int dim, int k_max, std::size_t m)
  {
    const double h = std::ldexp(2.0, k_max) / double(m);
    for (int k = k_max; k > k_max - 64; --k) {
      // 1D: count the positive half and mirror; 2D: scan the square around the origin
      std::size_t count = 0;
      if (dim == 1) {
        const double lo = std::ldexp(1.0, k - 1);
        const double hi = std::ldexp(1.0, k);
        for (std::size_t i = m / 2; i < m; ++i) {
          const double x = -std::ldexp(1.0, k_max) + h * (double(i) + 0.5);
          if (x > lo && x <= hi)
            count += 2;
        }
      } else {
        const double lo = std::ldexp(1.0, k - 1);
        const double hi = std::ldexp(1.0, k);
        const double R = std::ldexp(1.0, k_max);
        const auto span = std::size_t(std::ceil(hi / h)) + 1;
        const std::size_t c = m / 2;
        for (std::size_t iy = (c > span ? c - span : 0); iy < std::min(m, c + span); ++iy)
          for (std::size_t ix = (c > span ? c - span : 0); ix < std::min(m, c + span); ++ix) {
            const double r = std::hypot(-R + h * (double(ix) + 0.5), -R + h * (double(iy) + 0.5));
            if (r > lo && r <= hi)
              ++count;
          }
      }
      if (count < min_annulus_points)
        return k + 1;
    }
    return k_max - 63;
  }

  /// Default desk-scale grid: R = 8, m = 4096 (n = 1) or 512 (n = 2), k_min = -6
  /// or the finest annulus that passes the resolution guard, whichever is larger.
  static Grid make_default(int dim, std::size_t m = 0)
  {
    constexpr int k_max = 3;
    if (m == 0)
      m = dim == 1 ? 4096 : 512;
    const int k_min = std::max(-6, finest_resolved_shell(dim, k_max, m));
    return Grid(dim, k_max, m, k_min);
  }

  int dim() const { return geo_->dim; }
  int k_min() const { return geo_->k_min; }
  int k_max() const { return geo_->k_max; }
  std::size_t points_per_axis() const { return geo_->m; }
  std::size_t size() const { return geo_->norms.size(); }
  double radius() const { return geo_->radius; }
  double spacing() const { return geo_->h; }
  double cell_volume() const { return geo_->cell_volume; }

  Point point(std::size_t i) const { return point_of(*geo_, i); }
  double norm(std::size_t i) const { return geo_->norms[i]; }
  /// Annulus index of point i, or no_annulus when outside [k_min, k_max] or at the origin.
  int shell(std::size_t i) const { return geo_->shell[i]; }
  std::span<const double> norms() const { return geo_->norms; }

  /// Flattened index of (ix, iy); iy ignored in 1D.
  std::size_t index(std::size_t ix, std::size_t iy = 0) const { return iy * geo_->m + ix; }

  /// Coordinate of cell centre i along either axis.
  double axis_coordinate(std::size_t i) const { return -geo_->radius + geo_->h * (double(i) + 0.5); }

  bool same_as(const Grid& other) const
  {
    return geo_ == other.geo_ || (dim() == other.dim() && k_min() == other.k_min() && k_max() == other.k_max() &&
                                  points_per_axis() == other.points_per_axis());
  }

  /// Volume of the unit ball in R^n.
  double unit_ball_volume() const { return dim() == 1 ? 2.0 : std::numbers::pi; }

  /// Grid with the same box and twice the points per axis.
  Grid refined() const { return Grid(dim(), k_max(), 2 * points_per_axis(), k_min()); }

private:
  struct Geometry
  {
    int dim = 1;
    int k_min = 0;
    int k_max = 0;
    std::size_t m = 0;
    double radius = 0.0;
    double h = 0.0;
    double cell_volume = 0.0;
    std::vector<double> norms;
    std::vector<int> shell;
  };

  static Point point_of(const Geometry& g, std::size_t i)
  {
    if (g.dim == 1)
      return {-g.radius + g.h * (double(i) + 0.5), 0.0};
    const std::size_t ix = i % g.m;
    const std::size_t iy = i / g.m;
    return {-g.radius + g.h * (double(ix) + 0.5), -g.radius + g.h * (double(iy) + 0.5)};
  }

  std::shared_ptr<const Geometry> geo_;
};

/// Midpoint samples of a function on a grid.
class SampledFunction
{
public:
  explicit SampledFunction(Grid grid)
    : grid_(std::move(grid))
    , values_(grid_.size(), 0.0)
  {}

  SampledFunction(Grid grid, std::vector<double> values)
    : grid_(std::move(grid))
    , values_(std::move(values))
  {
    if (values_.size() != grid_.size())
      throw PreconditionError("sampled function size does not match its grid");
    for (double v : values_)
      if (!std::isfinite(v))
        throw PreconditionError("sampled function values must be finite");
  }

  /// Samples fn at every grid point.
  static SampledFunction from(const Grid& grid, const std::function<double(const Point&)>& fn)
  {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = fn(grid.point(i));
    return SampledFunction(grid, std::move(v));
  }

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  double sup_abs() const
  {
    double s = 0.0;
    for (double v : values_)
      s = std::max(s, std::abs(v));
    return s;
  }

  bool is_zero() const
  {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
  }

  SampledFunction abs() const
  {
    SampledFunction out = *this;
    for (double& v : out.values_)
      v = std::abs(v);
    return out;
  }

  SampledFunction& operator+=(const SampledFunction& o)
  {
    check_compatible(o);
    for (std::size_t i = 0; i < values_.size(); ++i)
      values_[i] += o.values_[i];
    return *this;
  }

  SampledFunction& operator*=(double c)
  {
    for (double& v : values_)
      v *= c;
    return *this;
  }

  friend SampledFunction operator+(SampledFunction a, const SampledFunction& b) { return a += b; }
  friend SampledFunction operator*(double c, SampledFunction a) { return a *= c; }
  friend SampledFunction operator*(SampledFunction a, double c) { return a *= c; }

  /// Pointwise product.
  friend SampledFunction operator*(const SampledFunction& a, const SampledFunction& b)
  {
    a.check_compatible(b);
    SampledFunction out = a;
    for (std::size_t i = 0; i < out.values_.size(); ++i)
      out.values_[i] *= b.values_[i];
    return out;
  }

private:
  void check_compatible(const SampledFunction& o) const
  {
    if (!grid_.same_as(o.grid_))
      throw PreconditionError("sampled functions live on different grids");
  }

  Grid grid_;
  std::vector<double> values_;
};

/// Midpoint quadrature: sum of values times the cell volume.
inline double integrate(const SampledFunction& f)
{
  const auto v = f.values();
  return std::accumulate(v.begin(), v.end(), 0.0) * f.grid().cell_volume();
}

inline void check_shell_in_range(const Grid& g, int k)
{
  if (k < g.k_min() || k > g.k_max()) {
    std::ostringstream os;
    os << "annulus index " << k << " outside the truncation range [" << g.k_min() << ", " << g.k_max() << "]";
    throw PreconditionError(os.str());
  }
}

/// f restricted to the annulus A_k = B_k \ B_(k-1).
inline SampledFunction annulus_restrict(const SampledFunction& f, int k)
{
  const Grid& g = f.grid();
  check_shell_in_range(g, k);
  SampledFunction out(g);
  auto& v = out.mutable_values();
  for (std::size_t i = 0; i < v.size(); ++i)
    if (g.shell(i) == k)
      v[i] = f[i];
  return out;
}

inline SampledFunction annulus_indicator(const Grid& g, int k)
{
  check_shell_in_range(g, k);
  SampledFunction out(g);
  auto& v = out.mutable_values();
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = g.shell(i) == k ? 1.0 : 0.0;
  return out;
}

/// Characteristic function of the closed ball B_k = {|x| <= 2^k}.
inline SampledFunction ball_indicator(const Grid& g, int k)
{
  const double r = std::ldexp(1.0, k);
  if (r > g.radius()) {
    std::ostringstream os;
    os << "ball B_" << k << " exceeds the grid half-width " << g.radius();
    throw PreconditionError(os.str());
  }
  SampledFunction out(g);
  auto& v = out.mutable_values();
  bool any = false;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = g.norm(i) <= r ? 1.0 : 0.0;
    any = any || v[i] != 0.0;
  }
  if (!any) {
    std::ostringstream os;
    os << "ball B_" << k << " contains no grid point at spacing " << g.spacing();
    throw PreconditionError(os.str());
  }
  return out;
}

/// Characteristic function of [lo, hi] (1D) or [lo, hi]^2 (2D).
inline SampledFunction box_indicator(const Grid& g, double lo, double hi)
{
  return SampledFunction::from(g, [&](const Point& x) {
    const bool in0 = x[0] >= lo && x[0] <= hi;
    const bool in1 = g.dim() == 1 || (x[1] >= lo && x[1] <= hi);
    return in0 && in1 ? 1.0 : 0.0;
  });
}

/// Annulus indices that carry nonzero values of f. Points outside every
/// annulus of the range are reported through `outside`.
inline std::vector<int> support_shells(const SampledFunction& f, bool* outside = nullptr)
{
  const Grid& g = f.grid();
  std::vector<char> hit(std::size_t(g.k_max() - g.k_min() + 1), 0);
  bool out = false;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] == 0.0)
      continue;
    const int k = g.shell(i);
    if (k == Grid::no_annulus)
      out = true;
    else
      hit[std::size_t(k - g.k_min())] = 1;
  }
  if (outside)
    *outside = out;
  std::vector<int> ks;
  for (int k = g.k_min(); k <= g.k_max(); ++k)
    if (hit[std::size_t(k - g.k_min())])
      ks.push_back(k);
  return ks;
}

} // namespace vexherz
