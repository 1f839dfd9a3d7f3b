#pragma once

// Shared scalar formula for the linear-element stiffness. Both kernel variants
// use it for tails so that every lane follows the same operation order.

#include "spdekit/kernels.hpp"

namespace spdekit::kernels::detail {

// perp(a)^T H perp(b) with perp(x, y) = (-y, x)
inline double perp_form(const Tensor2& h, double ax, double ay, double bx, double by) {
  double t0 = h.xx * (ay * by);
  double t1 = h.xy * (ay * bx + ax * by);
  double t2 = h.yy * (ax * bx);
  return (t0 - t1) + t2;
}

inline void element_one(const TriangleBatch& t, const Tensor2& h, const ElementStiffness& o,
                        std::size_t k) {
  const double e0x = t.x2[k] - t.x1[k], e0y = t.y2[k] - t.y1[k];
  const double e1x = t.x0[k] - t.x2[k], e1y = t.y0[k] - t.y2[k];
  const double e2x = t.x1[k] - t.x0[k], e2y = t.y1[k] - t.y0[k];
  const double twice_area = e2x * (-e1y) - e2y * (-e1x);
  const double denom = 2.0 * twice_area;
  o.area[k] = 0.5 * twice_area;
  o.g00[k] = perp_form(h, e0x, e0y, e0x, e0y) / denom;
  o.g01[k] = perp_form(h, e0x, e0y, e1x, e1y) / denom;
  o.g02[k] = perp_form(h, e0x, e0y, e2x, e2y) / denom;
  o.g11[k] = perp_form(h, e1x, e1y, e1x, e1y) / denom;
  o.g12[k] = perp_form(h, e1x, e1y, e2x, e2y) / denom;
  o.g22[k] = perp_form(h, e2x, e2y, e2x, e2y) / denom;
}

}  // namespace spdekit::kernels::detail
