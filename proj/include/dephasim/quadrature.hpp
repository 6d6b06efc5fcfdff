#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature over period-aligned panels.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dephasim/error.hpp"

namespace dephasim {

struct QuadratureSpec {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  double cutoff_multiplier = 30.0;  // integrate w in [0, cutoff_multiplier * scale]

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
      throw Error(ErrorCode::InvalidParameter, "quadrature tolerances must be > 0");
    if (!(cutoff_multiplier >= 10.0))
      throw Error(ErrorCode::InvalidParameter, "quadrature cutoff multiplier must be >= 10");
  }
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

/// Width of panels for an integrand carrying sin^2(w t / 2): one half period
/// of sin(w t), i.e. pi / t. Unbounded for t = 0.
inline double oscillation_panel_width(double t) {
  return t > 0.0 ? std::numbers::pi / t : std::numeric_limits<double>::infinity();
}

/// Integrates f on [lo, hi], split into panels no wider than panel_width,
/// each refined adaptively. Throws QuadratureNotConverged (with the achieved
/// error in the message) if the summed error estimate misses
/// max(rel_tol * |I|, abs_tol).
template <class F>
QuadratureResult integrate_panels(F&& f, double lo, double hi, double panel_width,
                                  const QuadratureSpec& spec) {
  spec.validate();
  QuadratureResult out;
  if (!(hi > lo)) return out;

  using rule = boost::math::quadrature::gauss_kronrod<double, 15>;
  constexpr unsigned max_depth = 18;  // bounds work per panel; misses surface as errors
  const double span = hi - lo;
  const double panels_d = std::isfinite(panel_width) ? std::ceil(span / panel_width) : 1.0;
  const long panels = std::max(1L, static_cast<long>(panels_d));
  const double width = span / static_cast<double>(panels);
  // The integrands used here are nonnegative, so per-panel relative errors add
  // up to a relative error on the total.
  const double panel_tol = 0.1 * spec.rel_tol;

  for (long p = 0; p < panels; ++p) {
    const double a = lo + width * static_cast<double>(p);
    const double b = (p + 1 == panels) ? hi : a + width;
    double err = 0.0;
    const double v = rule::integrate(f, a, b, max_depth, panel_tol, &err);
    out.value += v;
    out.error += err;
  }
  const double target = std::max(spec.rel_tol * std::abs(out.value), spec.abs_tol);
  if (!(out.error <= target) || !std::isfinite(out.value)) {
    throw Error(ErrorCode::QuadratureNotConverged,
                "achieved error " + std::to_string(out.error) + " exceeds target " +
                    std::to_string(target));
  }
  return out;
}

}  // namespace dephasim
