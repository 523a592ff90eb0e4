#pragma once

#include "vexherz/grid.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <vector>

namespace vexherz::detail {

// Cell integrals of the radial power |t|^gamma, gamma = beta - n.
//
// 1D: exact antiderivative for every cell.
// 2D: near cells use the exact rectangle primitive (a polar-coordinate line
// integral evaluated with Gauss-Legendre); far cells use a tensor Gauss rule.

/// Primitive of |t|^gamma on the line, gamma in [-1, 0).
inline double line_primitive(double t, double gamma)
{
  if (t == 0.0)
    return 0.0;
  const double s = t > 0.0 ? 1.0 : -1.0;
  if (gamma == -1.0)
    return s * std::log(std::abs(t));
  return s * std::pow(std::abs(t), gamma + 1.0) / (gamma + 1.0);
}

/// Integral of |t|^gamma over [a, b]. For gamma = -1 the interval must not contain 0.
inline double line_cell_integral(double a, double b, double gamma)
{
  if (gamma == -1.0 && a <= 0.0 && b >= 0.0)
    return std::numeric_limits<double>::infinity();
  return line_primitive(b, gamma) - line_primitive(a, gamma);
}

/// Integral of |t|^gamma over [0, a] x [0, b], gamma in (-2, 0).
inline double quadrant_integral(double a, double b, double gamma)
{
  if (a <= 0.0 || b <= 0.0)
    return 0.0;
  using Rule = boost::math::quadrature::gauss<double, 30>;
  const double beta = gamma + 2.0;
  const double split = std::atan2(b, a);
  const double first = Rule::integrate([&](double th) { return std::pow(a / std::cos(th), beta); }, 0.0, split);
  const double second =
    Rule::integrate([&](double th) { return std::pow(b / std::sin(th), beta); }, split, std::numbers::pi / 2);
  return (first + second) / beta;
}

/// Signed primitive: its mixed second difference over a rectangle is the integral.
inline double plane_primitive(double x, double y, double gamma)
{
  const double sx = x < 0.0 ? -1.0 : 1.0;
  const double sy = y < 0.0 ? -1.0 : 1.0;
  return sx * sy * quadrant_integral(std::abs(x), std::abs(y), gamma);
}

inline double plane_cell_integral_gauss(double x0, double x1, double y0, double y1, double gamma)
{
  using Rule = boost::math::quadrature::gauss<double, 4>;
  return Rule::integrate(
    [&](double x) { return Rule::integrate([&](double y) { return std::pow(x * x + y * y, 0.5 * gamma); }, y0, y1); },
    x0, x1);
}

/// Integral of |t|^gamma over [x0, x1] x [y0, y1]; `near` selects the exact primitive.
inline double plane_cell_integral(double x0, double x1, double y0, double y1, double gamma, bool near)
{
  const bool has_origin = x0 <= 0.0 && x1 >= 0.0 && y0 <= 0.0 && y1 >= 0.0;
  if (gamma <= -2.0 && has_origin)
    return std::numeric_limits<double>::infinity();
  if (near && gamma > -2.0) {
    return plane_primitive(x1, y1, gamma) - plane_primitive(x0, y1, gamma) - plane_primitive(x1, y0, gamma) +
           plane_primitive(x0, y0, gamma);
  }
  if (near) {
    // gamma = -2 away from the origin: subdivide into 4 x 4 sub-cells
    double s = 0.0;
    const double dx = (x1 - x0) / 4.0;
    const double dy = (y1 - y0) / 4.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        s += plane_cell_integral_gauss(x0 + i * dx, x0 + (i + 1) * dx, y0 + j * dy, y0 + (j + 1) * dy, gamma);
    return s;
  }
  return plane_cell_integral_gauss(x0, x1, y0, y1, gamma);
}

/// Offsets within this many cells use the exact 2D primitive.
inline constexpr long near_cells = 8;

/// Kernel table K[d] = integral of |x_i - y|^gamma over the source cell at
/// offset d = j - i (per axis), for grid targets. Size (2m - 1)^n, offset
/// (m - 1) per axis.
class CellKernel
{
public:
  CellKernel(const Grid& g, double gamma)
    : m_(long(g.points_per_axis()))
    , dim_(g.dim())
  {
    const double h = g.spacing();
    const long w = 2 * m_ - 1;
    if (dim_ == 1) {
      table_.resize(std::size_t(w));
      for (long d = -(m_ - 1); d <= m_ - 1; ++d)
        table_[std::size_t(d + m_ - 1)] = line_cell_integral((double(d) - 0.5) * h, (double(d) + 0.5) * h, gamma);
    } else {
      // the kernel is symmetric in each axis and under swapping axes
      table_.resize(std::size_t(w * w));
      for (long dy = 0; dy <= m_ - 1; ++dy)
        for (long dx = 0; dx <= dy; ++dx) {
          const bool near = std::max(dx, dy) <= near_cells;
          const double v = plane_cell_integral((double(dx) - 0.5) * h, (double(dx) + 0.5) * h,
                                               (double(dy) - 0.5) * h, (double(dy) + 0.5) * h, gamma, near);
          for (long sx : {-1L, 1L})
            for (long sy : {-1L, 1L}) {
              at2(sx * dx, sy * dy) = v;
              at2(sy * dy, sx * dx) = v;
            }
        }
    }
  }

  double operator()(long dx, long dy = 0) const
  {
    if (dim_ == 1)
      return table_[std::size_t(dx + m_ - 1)];
    return table_[std::size_t((dy + m_ - 1) * (2 * m_ - 1) + (dx + m_ - 1))];
  }

private:
  double& at2(long dx, long dy) { return table_[std::size_t((dy + m_ - 1) * (2 * m_ - 1) + (dx + m_ - 1))]; }

  long m_;
  int dim_;
  std::vector<double> table_;
};

/// Integral of |x - y|^gamma over the grid cell with index i, for an arbitrary point x.
inline double cell_integral_at(const Grid& g, std::size_t i, const Point& x, double gamma)
{
  const double h = g.spacing();
  const Point c = g.point(i);
  if (g.dim() == 1)
    return line_cell_integral(c[0] - 0.5 * h - x[0], c[0] + 0.5 * h - x[0], gamma);
  const double x0 = c[0] - 0.5 * h - x[0];
  const double y0 = c[1] - 0.5 * h - x[1];
  const bool near = std::max(std::abs(c[0] - x[0]), std::abs(c[1] - x[1])) <= double(near_cells) * h;
  return plane_cell_integral(x0, x0 + h, y0, y0 + h, gamma, near);
}

} // namespace vexherz::detail
