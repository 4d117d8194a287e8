#include "hvac/mccormick.hpp"

#include <algorithm>
#include <cmath>

namespace hvac {

void McCormickBox::validate() const {
  if (!std::isfinite(x_lo) || !std::isfinite(x_hi) || !std::isfinite(y_lo) || !std::isfinite(y_hi)) {
    throw InputError("McCormick box bounds must be finite");
  }
  if (x_lo > x_hi || y_lo > y_hi) throw InputError("McCormick box has inverted bounds");
}

std::array<LinearCut, 4> mccormick_constraints(const McCormickBox& b) {
  b.validate();
  return {{
      // -z + x_lo y + y_lo x <= x_lo y_lo
      {b.y_lo, b.x_lo, -1.0, b.x_lo * b.y_lo},
      {b.y_hi, b.x_hi, -1.0, b.x_hi * b.y_hi},
      // z - x y_hi - x_lo y <= -x_lo y_hi
      {-b.y_hi, -b.x_lo, 1.0, -b.x_lo * b.y_hi},
      {-b.y_lo, -b.x_hi, 1.0, -b.x_hi * b.y_lo},
  }};
}

bool mccormick_contains(const McCormickBox& box, double x, double y, double z, double tol) {
  for (const auto& c : mccormick_constraints(box)) {
    if (c.slack(x, y, z) < -tol) return false;
  }
  return true;
}

std::pair<double, double> mccormick_range(const McCormickBox& b, double x, double y) {
  const double lo = std::max(b.x_lo * y + x * b.y_lo - b.x_lo * b.y_lo, b.x_hi * y + x * b.y_hi - b.x_hi * b.y_hi);
  const double hi = std::min(x * b.y_hi + b.x_lo * y - b.x_lo * b.y_hi, b.x_hi * y + x * b.y_lo - b.x_hi * b.y_lo);
  return {lo, hi};
}

}  // namespace hvac
