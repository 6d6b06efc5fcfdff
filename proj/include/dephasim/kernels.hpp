#pragma once

// Per-mode functions and spectral integrals of the dephasing model.

#include <cmath>
#include <complex>
#include <numbers>
#include <variant>

#include "dephasim/error.hpp"
#include "dephasim/model.hpp"
#include "dephasim/quadrature.hpp"

namespace dephasim {

namespace detail {

inline void require_positive_frequency(double omega) {
  if (!(omega > 0.0))
    throw Error(ErrorCode::NonPositiveModeFrequency, "mode frequency must be > 0");
}

// x - sin(x) and x - atan(x) by their Taylor series below |x| = 0.5, where
// the direct difference loses more than a few digits.
inline double x_minus_sin(double x) {
  if (std::abs(x) < 0.5) {
    const double x2 = x * x;
    double term = x * x2 / 6.0;
    double sum = term;
    for (int k = 2; k < 40 && std::abs(term) > 1e-18 * std::abs(sum); ++k) {
      term *= -x2 / ((2.0 * k) * (2.0 * k + 1.0));
      sum += term;
    }
    return sum;
  }
  return x - std::sin(x);
}

inline double x_minus_atan(double x) {
  if (std::abs(x) < 0.5) {
    const double x2 = x * x;
    double power = x * x2;
    double sum = power / 3.0;
    for (int k = 2; k < 80; ++k) {
      power *= -x2;
      const double term = power / (2.0 * k + 1.0);
      sum += term;
      if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return x - std::atan(x);
}

// t - sin(w t) / w.
inline double t_minus_sinc(double omega, double t) { return x_minus_sin(omega * t) / omega; }

// 4 sin^2(w t / 2) / w^2 with the w -> 0 limit t^2.
inline double sin2_kernel(double omega, double t) {
  if (omega == 0.0) return t * t;
  const double s = 2.0 * std::sin(0.5 * omega * t) / omega;
  return s * s;
}

}  // namespace detail

/// eta(w, t) = i (e^{-i w t} - 1) / w, evaluated as 2 sin(w t / 2) e^{-i w t / 2} / w.
inline complex eta(double omega, double t) {
  detail::require_positive_frequency(omega);
  const double half = 0.5 * omega * t;
  return std::polar(2.0 * std::sin(half) / omega, -half);
}

/// Coherent displacement of the bath mode in the branch of a level with coupling g:
/// g * (xi^* / w) (e^{-i w t} - 1).
inline complex displacement_amplitude(complex xi, double omega, double t, double g) {
  return g * (complex(0.0, -1.0) * std::conj(xi) * eta(omega, t));
}

/// z = dg^2 |xi eta(w, t)|^2 = dg^2 |xi|^2 4 sin^2(w t / 2) / w^2.
inline double z_factor(double delta_g, complex xi, double omega, double t) {
  detail::require_positive_frequency(omega);
  return delta_g * delta_g * std::norm(xi) * detail::sin2_kernel(omega, t);
}

/// Ordinary Laguerre polynomial L_m(x) by upward three-term recurrence.
inline double laguerre(unsigned m, double x) {
  double prev = 1.0;
  if (m == 0) return prev;
  double cur = 1.0 - x;
  for (unsigned k = 1; k < m; ++k) {
    const double next = ((2.0 * k + 1.0 - x) * cur - k * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

/// e^{-m x}: the small-excitation, weak-coupling stand-in for L_m(x). Only
/// meaningful while m x << 1; e.g. L_1(2) = -1 while this gives e^{-2}.
inline double laguerre_exp_approx(unsigned m, double x) { return std::exp(-static_cast<double>(m) * x); }

/// Bessel J0. Power series (in long double) below |x| = 17, Hankel asymptotic
/// expansion truncated at its smallest term above; absolute error < 1e-12.
inline double bessel_j0(double x) {
  const long double ax = std::abs(static_cast<long double>(x));
  if (ax < 17.0L) {
    const long double q = -0.25L * ax * ax;
    long double term = 1.0L;
    long double sum = 1.0L;
    for (int k = 1; k < 200; ++k) {
      term *= q / (static_cast<long double>(k) * k);
      sum += term;
      if (std::abs(term) < 1e-22L * std::max(1.0L, std::abs(sum))) break;
    }
    return static_cast<double>(sum);
  }
  // J0(x) ~ sqrt(2 / (pi x)) (P cos(x - pi/4) - Q sin(x - pi/4))
  const long double inv8x = 1.0L / (8.0L * ax);
  long double p = 1.0L;
  long double q = 0.0L;
  long double term = 1.0L;
  long double last = std::numeric_limits<long double>::infinity();
  for (int k = 1; k < 100; ++k) {
    const long double a = 2.0L * k - 1.0L;
    term *= a * a * inv8x / k;
    if (std::abs(term) >= last) break;
    last = std::abs(term);
    switch (k % 4) {
      case 1: q -= term; break;
      case 2: p -= term; break;
      case 3: q += term; break;
      case 0: p += term; break;
    }
  }
  const long double phase = ax - std::numbers::pi_v<long double> / 4.0L;
  const long double amp = std::sqrt(2.0L / (std::numbers::pi_v<long double> * ax));
  return static_cast<double>(amp * (p * std::cos(phase) - q * std::sin(phase)));
}

/// Large-occupation diagnostic for a single-mode factor e^{-x/2} L_m(x):
/// the exact value next to two Bessel-function forms. Nothing is concluded
/// from these; the Laguerre value is authoritative.
struct BesselDiagnostic {
  double exact = 0.0;          // e^{-x/2} L_m(x)
  double literal_limit = 0.0;  // e^{-x/2} J0(x)
  double scaled_limit = 0.0;   // e^{-x/2} e^{x/2} J0(2 sqrt(m x)) = J0(2 sqrt(m x))
};

inline BesselDiagnostic laguerre_bessel_diagnostic(unsigned m, double x) {
  const double damp = std::exp(-0.5 * x);
  return {damp * laguerre(m, x), damp * bessel_j0(x),
          bessel_j0(2.0 * std::sqrt(static_cast<double>(m) * x))};
}

enum class IntegralMethod { ClosedForm, Quadrature };

namespace detail {

inline void require_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t))
    throw Error(ErrorCode::InvalidParameter, "time must be finite and >= 0");
}

inline QuadratureResult ohmic_vacuum_quadrature(const OhmicBath& b, double t,
                                                const QuadratureSpec& quad) {
  auto integrand = [&](double w) {
    return b.gamma * w * std::exp(-w / b.cutoff) * detail::sin2_kernel(w, t);
  };
  return integrate_panels(integrand, 0.0, quad.cutoff_multiplier * b.cutoff,
                          oscillation_panel_width(t), quad);
}

inline QuadratureResult ohmic_force_quadrature(const OhmicBath& b, double t,
                                               const QuadratureSpec& quad) {
  auto integrand = [&](double w) {
    if (w == 0.0) return 0.0;
    return 2.0 * b.gamma * std::exp(-w / b.cutoff) * detail::t_minus_sinc(w, t);
  };
  return integrate_panels(integrand, 0.0, quad.cutoff_multiplier * b.cutoff,
                          oscillation_panel_width(t), quad);
}

}  // namespace detail

/// sum_j |xi_j eta_j(t)|^2, or its continuum form int dw J(w) 4 sin^2(w t/2) / w^2.
/// Ohmic: gamma ln(1 + cutoff^2 t^2) in closed form, or by quadrature on request.
inline double vacuum_overlap_integral(const BathSpec& bath, double t, const QuadratureSpec& quad = {},
                                      IntegralMethod method = IntegralMethod::ClosedForm) {
  detail::require_time(t);
  if (const auto* d = std::get_if<DiscreteBath>(&bath)) {
    double acc = 0.0;
    for (const BathMode& mode : d->modes) acc += z_factor(1.0, mode.xi, mode.omega, t);
    return acc;
  }
  const auto& o = std::get<OhmicBath>(bath);
  if (t == 0.0) return 0.0;
  if (method == IntegralMethod::Quadrature) return detail::ohmic_vacuum_quadrature(o, t, quad).value;
  const double x = o.cutoff * t;
  return o.gamma * std::log1p(x * x);
}

/// F(t) = 2 int dw J(w) (t - sin(w t) / w) / w.
/// Ohmic closed form: 2 gamma (cutoff t - atan(cutoff t)).
inline double back_action_F(const BathSpec& bath, double t, const QuadratureSpec& quad = {},
                            IntegralMethod method = IntegralMethod::ClosedForm) {
  detail::require_time(t);
  if (const auto* d = std::get_if<DiscreteBath>(&bath)) {
    double acc = 0.0;
    for (const BathMode& mode : d->modes) {
      detail::require_positive_frequency(mode.omega);
      acc += 2.0 * std::norm(mode.xi) * detail::t_minus_sinc(mode.omega, t) / mode.omega;
    }
    return acc;
  }
  const auto& o = std::get<OhmicBath>(bath);
  if (t == 0.0) return 0.0;
  if (method == IntegralMethod::Quadrature) return detail::ohmic_force_quadrature(o, t, quad).value;
  return 2.0 * o.gamma * detail::x_minus_atan(o.cutoff * t);
}

/// Mean thermal occupation 1 / (e^{w/T} - 1); zero at T = 0.
inline double bose_occupation(double omega, double temperature) {
  detail::require_positive_frequency(omega);
  if (temperature < 0.0) throw Error(ErrorCode::NegativeTemperature, "temperature must be >= 0");
  if (temperature == 0.0) return 0.0;
  return 1.0 / std::expm1(omega / temperature);
}

/// z(t) <m>_T for one mode: the exponent of that mode's thermal factor.
inline double thermal_weight(double delta_g, const BathMode& mode, double temperature, double t) {
  if (temperature < 0.0) throw Error(ErrorCode::NegativeTemperature, "temperature must be >= 0");
  if (temperature == 0.0) return 0.0;
  return z_factor(delta_g, mode.xi, mode.omega, t) * bose_occupation(mode.omega, temperature);
}

/// int dw J(w) 4 sin^2(w t/2) / w^2 / (e^{w/T} - 1) for an Ohmic bath. The
/// integrand tends to gamma t^2 T as w -> 0; that limit is used at w = 0.
inline QuadratureResult thermal_integral_result(const OhmicBath& b, double temperature, double t,
                                                const QuadratureSpec& quad = {}) {
  detail::require_time(t);
  if (temperature < 0.0) throw Error(ErrorCode::NegativeTemperature, "temperature must be >= 0");
  if (temperature == 0.0 || t == 0.0) return {};
  auto integrand = [&](double w) {
    const double w_nbar = (w == 0.0) ? temperature : w / std::expm1(w / temperature);
    return b.gamma * std::exp(-w / b.cutoff) * detail::sin2_kernel(w, t) * w_nbar;
  };
  // Both the spectral cutoff and the Bose factor bound the support.
  const double scale = b.cutoff * temperature / (b.cutoff + temperature);
  return integrate_panels(integrand, 0.0, quad.cutoff_multiplier * scale, oscillation_panel_width(t),
                          quad);
}

inline double thermal_integral(const OhmicBath& b, double temperature, double t,
                               const QuadratureSpec& quad = {}) {
  return thermal_integral_result(b, temperature, t, quad).value;
}

}  // namespace dephasim
