#pragma once

// Analytic decoherence factors and the quantities derived from them.
//
// For a pair of levels (n, m) the off-diagonal element of the reduced density
// matrix is
//
//   rho_nm(t) = c_n c_m^* e^{i theta_mn(t)} D_nm(t),
//   theta_mn(t) = (Omega_m - Omega_n) t + (g_n^2 - g_m^2) F(t) / 2,
//
// and D_nm factorizes into a vacuum part prod_j e^{-z_j/2} and an excitation
// part: prod_j L_{m_j}(z_j) for Fock states, prod_j e^{-z_j <m_j>_T} for a
// thermal bath.

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "dephasim/error.hpp"
#include "dephasim/kernels.hpp"
#include "dephasim/model.hpp"
#include "dephasim/quadrature.hpp"

namespace dephasim {

struct EvalOptions {
  QuadratureSpec quad{};
  IntegralMethod method = IntegralMethod::ClosedForm;
};

struct DecoherencePoint {
  double t = 0.0;
  double vacuum_part = 1.0;
  double excitation_part = 1.0;  // signed for Fock states
  double total = 1.0;
  double theta = 0.0;
  double gaussian_total = 1.0;
};

struct DecoherenceSeries {
  LevelPair pair;
  std::vector<double> grid;
  std::vector<DecoherencePoint> points;
};

struct PhaseVariance {
  double vacuum_var = 0.0;      // sum_j z_j
  double excitation_var = 0.0;  // sum_j 2 m_j z_j
};

struct BathExcitationReport {
  double n0 = 0.0;     // N_B(0)
  double delta = 0.0;  // N_B(t) - N_B(0)
};

struct FluctuationRelation {
  double predicted = 1.0;
  double exact_vacuum = 1.0;
  double residual = 0.0;
};

/// 1/2 dg^2 sum_j |xi_j eta_j|^2, the exponent of the vacuum factor.
inline double vacuum_exponent(const ValidatedModel& model, const LevelPair& pair, double t,
                              const EvalOptions& opt = {}) {
  const double dg = model.delta_g(pair);
  if (dg == 0.0) return 0.0;
  return 0.5 * dg * dg * vacuum_overlap_integral(model.bath(), t, opt.quad, opt.method);
}

inline double vacuum_factor(const ValidatedModel& model, const LevelPair& pair, double t,
                            const EvalOptions& opt = {}) {
  return std::exp(-vacuum_exponent(model, pair, t, opt));
}

/// e^{-(t/tau)^2} with 1/tau = |dg| cutoff sqrt(gamma / 2); tracks the Ohmic
/// vacuum factor while cutoff^2 t^2 << 1.
inline double short_time_gaussian(double delta_g, double gamma, double cutoff, double t) {
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidParameter, "time must be >= 0");
  const double inv_tau = std::abs(delta_g) * cutoff * std::sqrt(0.5 * gamma);
  const double x = t * inv_tau;
  return std::exp(-x * x);
}

/// prod_j L_{m_j}(z_j(t)). One for the vacuum, including an Ohmic vacuum.
inline double fock_excitation_factor(const ValidatedModel& model, const LevelPair& pair, double t) {
  const std::vector<unsigned> occ = model.occupations();  // throws for thermal states
  const double dg = model.delta_g(pair);
  if (occ.empty()) return 1.0;
  const auto& modes = model.modes();
  double acc = 1.0;
  for (std::size_t j = 0; j < modes.size(); ++j) {
    if (occ[j] == 0) continue;
    acc *= laguerre(occ[j], z_factor(dg, modes[j].xi, modes[j].omega, t));
  }
  return acc;
}

/// theta_mn(t) = (Omega_m - Omega_n) t + (g_n^2 - g_m^2) F(t) / 2.
///
/// Each branch |chi_n(t)> = e^{-i H_n t}|{m_j}> picks up e^{i g_n^2 F(t)/2}
/// from the polaron shift minus the displacement-composition phase; the
/// factor 1/2 is what exact branch evolution produces.
inline double theta_phase(const ValidatedModel& model, const LevelPair& pair, double t,
                          const EvalOptions& opt = {}) {
  model.check_pair(pair);
  const Level& ln = model.level(pair.n);
  const Level& lm = model.level(pair.m);
  const double dg2 = ln.g * ln.g - lm.g * lm.g;
  const double force = dg2 == 0.0 ? 0.0 : back_action_F(model.bath(), t, opt.quad, opt.method);
  return (lm.omega - ln.omega) * t + 0.5 * dg2 * force;
}

inline PhaseVariance phase_variance(const ValidatedModel& model, const LevelPair& pair, double t,
                                    const EvalOptions& opt = {}) {
  const std::vector<unsigned> occ = model.occupations();
  const double dg = model.delta_g(pair);
  PhaseVariance pv;
  if (occ.empty()) {
    pv.vacuum_var = dg * dg * vacuum_overlap_integral(model.bath(), t, opt.quad, opt.method);
    return pv;
  }
  const auto& modes = model.modes();
  for (std::size_t j = 0; j < modes.size(); ++j) {
    const double z = z_factor(dg, modes[j].xi, modes[j].omega, t);
    pv.vacuum_var += z;
    pv.excitation_var += 2.0 * occ[j] * z;
  }
  return pv;
}

/// e^{-(dphi_0^2 + dphi_f^2)/2}; matches the exact factor only while every
/// m_j z_j << 1 (the Laguerre polynomial can change sign, this cannot).
inline double gaussian_factor(const ValidatedModel& model, const LevelPair& pair, double t,
                              const EvalOptions& opt = {}) {
  const PhaseVariance pv = phase_variance(model, pair, t, opt);
  return std::exp(-0.5 * (pv.vacuum_var + pv.excitation_var));
}

/// Full decoherence factor for a vacuum or Fock bath.
inline DecoherencePoint decoherence_factor(const ValidatedModel& model, const LevelPair& pair,
                                           double t, const EvalOptions& opt = {}) {
  if (model.is_thermal())
    throw Error(ErrorCode::ThermalStateNotFock, "use thermal_factor for a thermal bath");
  DecoherencePoint p;
  p.t = t;
  p.vacuum_part = vacuum_factor(model, pair, t, opt);
  p.excitation_part = fock_excitation_factor(model, pair, t);
  p.total = p.vacuum_part * p.excitation_part;
  p.theta = theta_phase(model, pair, t, opt);
  p.gaussian_total = gaussian_factor(model, pair, t, opt);
  return p;
}

/// Exponent sum_j z_j <m_j>_T of the thermal excitation part.
inline double thermal_exponent(const ValidatedModel& model, const LevelPair& pair, double t,
                               double temperature, const EvalOptions& opt = {}) {
  const double dg = model.delta_g(pair);
  if (temperature < 0.0) throw Error(ErrorCode::NegativeTemperature, "temperature must be >= 0");
  if (dg == 0.0 || temperature == 0.0) return 0.0;
  if (const auto* d = std::get_if<DiscreteBath>(&model.bath())) {
    double acc = 0.0;
    for (const BathMode& mode : d->modes) acc += thermal_weight(dg, mode, temperature, t);
    return acc;
  }
  return dg * dg * thermal_integral(std::get<OhmicBath>(model.bath()), temperature, t, opt.quad);
}

/// D^[T] = D^(0) prod_j e^{-z_j <m_j>_T}; strictly positive.
inline double thermal_factor(const ValidatedModel& model, const LevelPair& pair, double t,
                             double temperature, const EvalOptions& opt = {}) {
  return std::exp(-vacuum_exponent(model, pair, t, opt) -
                  thermal_exponent(model, pair, t, temperature, opt));
}

/// DecoherencePoint for a thermal bath at the model's temperature. The
/// excitation part is the thermal factor; the Gaussian column equals the total.
inline DecoherencePoint thermal_point(const ValidatedModel& model, const LevelPair& pair, double t,
                                      const EvalOptions& opt = {}) {
  DecoherencePoint p;
  p.t = t;
  p.vacuum_part = vacuum_factor(model, pair, t, opt);
  p.excitation_part = std::exp(-thermal_exponent(model, pair, t, model.temperature(), opt));
  p.total = p.vacuum_part * p.excitation_part;
  p.theta = theta_phase(model, pair, t, opt);
  p.gaussian_total = p.total;
  return p;
}

/// decoherence_factor or thermal_point depending on the bath state.
inline DecoherencePoint evaluate_point(const ValidatedModel& model, const LevelPair& pair, double t,
                                       const EvalOptions& opt = {}) {
  return model.is_thermal() ? thermal_point(model, pair, t, opt)
                            : decoherence_factor(model, pair, t, opt);
}

inline DecoherenceSeries decoherence_series(const ValidatedModel& model, const LevelPair& pair,
                                            const std::vector<double>& grid,
                                            const EvalOptions& opt = {}) {
  DecoherenceSeries s{pair, grid, {}};
  s.points.reserve(grid.size());
  for (double t : grid) s.points.push_back(evaluate_point(model, pair, t, opt));
  return s;
}

/// Reduced density matrix of the system at time t, for any bath state.
inline Eigen::MatrixXcd reduced_density_matrix(const ValidatedModel& model, double t,
                                               const EvalOptions& opt = {}) {
  const std::size_t n_levels = model.levels();
  Eigen::MatrixXcd rho(n_levels, n_levels);
  for (std::size_t n = 0; n < n_levels; ++n) {
    const complex cn = model.level(n).amplitude;
    rho(n, n) = std::norm(cn);
    for (std::size_t m = n + 1; m < n_levels; ++m) {
      const DecoherencePoint p = evaluate_point(model, {n, m}, t, opt);
      const complex entry =
          cn * std::conj(model.level(m).amplitude) * std::polar(p.total, p.theta);
      rho(n, m) = entry;
      rho(m, n) = std::conj(entry);
    }
  }
  return rho;
}

/// N_B(t) = N_B(0) + delta with delta = <G_0^2> sum_j |xi_j eta_j|^2.
inline BathExcitationReport bath_excitation(const ValidatedModel& model, double t,
                                            const EvalOptions& opt = {}) {
  BathExcitationReport r;
  for (unsigned m : model.occupations()) r.n0 += m;
  r.delta = g0_squared_mean(model) * vacuum_overlap_integral(model.bath(), t, opt.quad, opt.method);
  return r;
}

/// Compares exp(-1/2 dg^2 delta_N_B / <G_0^2>) with the vacuum factor.
inline FluctuationRelation fluctuation_relation_check(const ValidatedModel& model,
                                                      const LevelPair& pair, double t,
                                                      const EvalOptions& opt = {}) {
  const double g2 = g0_squared_mean(model);
  if (!(g2 > 0.0))
    throw Error(ErrorCode::ZeroPopulationVariance, "<G_0^2> vanishes for this initial state");
  const double dg = model.delta_g(pair);
  const double delta =
      g2 * vacuum_overlap_integral(model.bath(), t, opt.quad, opt.method);
  FluctuationRelation r;
  r.predicted = std::exp(-0.5 * dg * dg * delta / g2);
  r.exact_vacuum = vacuum_factor(model, pair, t, opt);
  r.residual = std::abs(r.predicted - r.exact_vacuum);
  return r;
}

}  // namespace dephasim
