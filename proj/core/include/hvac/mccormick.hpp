#pragma once

#include "hvac/model.hpp"

#include <array>

namespace hvac {

struct McCormickBox {
  double x_lo = 0.0;
  double x_hi = 0.0;
  double y_lo = 0.0;
  double y_hi = 0.0;

  void validate() const;
};

/// cx * x + cy * y + cz * z <= rhs
struct LinearCut {
  double cx = 0.0;
  double cy = 0.0;
  double cz = 0.0;
  double rhs = 0.0;

  double slack(double x, double y, double z) const { return rhs - (cx * x + cy * y + cz * z); }
};

/// Under- and over-estimators of z = x * y on the box, as four inequalities:
///   z >= x_lo y + x y_lo - x_lo y_lo,   z >= x_hi y + x y_hi - x_hi y_hi,
///   z <= x y_hi + x_lo y - x_lo y_hi,   z <= x_hi y + x y_lo - x_hi y_lo.
std::array<LinearCut, 4> mccormick_constraints(const McCormickBox& box);

/// True if (x, y, z) satisfies all four cuts within tol.
bool mccormick_contains(const McCormickBox& box, double x, double y, double z, double tol = 1e-9);

/// Range of z admitted by the envelope at (x, y).
std::pair<double, double> mccormick_range(const McCormickBox& box, double x, double y);

}  // namespace hvac
