#pragma once

// Subcommand implementations shared by the dephasim tool and the tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dephasim/cli/config.hpp"
#include "dephasim/cli/report.hpp"
#include "dephasim/decoherence.hpp"
#include "dephasim/error.hpp"
#include "dephasim/kernels.hpp"
#include "dephasim/model.hpp"
#include "dephasim/oracle.hpp"
#include "dephasim/parallel.hpp"

namespace dephasim::cli {

/// Tolerances of the oracle-check verdicts.
struct OracleTolerances {
  double entry = 1e-8;       // reduced-matrix entries, overlaps, bath number
  double diagonal = 1e-10;   // population drift
  double unitarity = 1e-10;  // branch norm drift
  double thermal_rel = 1e-8;
};

inline ValidatedModel model_of(const RunConfig& cfg) {
  return validate_config(cfg.system, cfg.bath, cfg.state);
}

inline std::vector<LevelPair> resolve_pairs(const RunConfig& cfg, const ValidatedModel& model) {
  std::vector<LevelPair> pairs = cfg.pairs.empty() ? all_pairs(model.levels()) : cfg.pairs;
  for (const LevelPair& p : pairs) {
    try {
      model.check_pair(p);
    } catch (const Error& e) {
      throw Error(ErrorCode::Config, std::string("run.pairs: ") + e.what());
    }
  }
  return pairs;
}

inline EvalOptions eval_options(const RunConfig& cfg) { return {cfg.quad, IntegralMethod::ClosedForm}; }

inline std::filesystem::path prepare_output(const RunConfig& cfg) {
  std::filesystem::path dir(cfg.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create output directory '" + dir.string() + "'");
  return dir;
}

inline std::string pair_tag(const LevelPair& p) {
  return std::to_string(p.n) + "_" + std::to_string(p.m);
}

inline void write_report(const RunReport& report, const std::filesystem::path& dir,
                         const std::string& name) {
  std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write report to " + (dir / name).string());
  out << report.to_json().dump(2) << '\n';
}

namespace detail {

/// Max relative gap between closed forms and quadrature for an Ohmic bath.
inline void verify_quadrature(RunReport& report, const ValidatedModel& model,
                              const std::vector<double>& grid, const QuadratureSpec& quad) {
  if (!model.is_ohmic()) {
    report.check("quadrature_vs_closed_form", 0.0, 1e-8, "discrete bath: exact sums, nothing to compare");
    return;
  }
  std::vector<double> gaps(grid.size(), 0.0);
  parallel_for(grid.size(), [&](std::size_t i) {
    const double t = grid[i];
    if (t == 0.0) return;
    const double v_cf = vacuum_overlap_integral(model.bath(), t, quad, IntegralMethod::ClosedForm);
    const double v_q = vacuum_overlap_integral(model.bath(), t, quad, IntegralMethod::Quadrature);
    const double f_cf = back_action_F(model.bath(), t, quad, IntegralMethod::ClosedForm);
    const double f_q = back_action_F(model.bath(), t, quad, IntegralMethod::Quadrature);
    gaps[i] = std::max(std::abs(v_q - v_cf) / std::abs(v_cf), std::abs(f_q - f_cf) / std::abs(f_cf));
  });
  report.check("quadrature_vs_closed_form", *std::max_element(gaps.begin(), gaps.end()), 1e-8,
               "max relative gap of vacuum integral and F(t)");
}

}  // namespace detail

/// Per-pair decoherence curves: t,vacuum,excitation,total,theta,gaussian.
inline RunReport cmd_series(const RunConfig& cfg) {
  Stopwatch clock;
  RunReport report;
  report.command = "series";
  const ValidatedModel model = model_of(cfg);
  report.warnings = model.warnings();
  const auto pairs = resolve_pairs(cfg, model);
  const auto grid = cfg.time.points();
  const auto dir = prepare_output(cfg);
  const EvalOptions opt = eval_options(cfg);

  double worst_bound = 0.0;
  double worst_initial = 0.0;
  for (const LevelPair& pair : pairs) {
    std::vector<DecoherencePoint> pts(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) { pts[i] = evaluate_point(model, pair, grid[i], opt); });

    const auto path = dir / ("series_" + pair_tag(pair) + ".csv");
    CsvWriter csv(path, {"t", "vacuum", "excitation", "total", "theta", "gaussian"});
    for (const auto& p : pts) {
      const double exc = cfg.magnitude_only ? std::abs(p.excitation_part) : p.excitation_part;
      const double tot = cfg.magnitude_only ? std::abs(p.total) : p.total;
      csv.row({p.t, p.vacuum_part, exc, tot, p.theta, p.gaussian_total});
      worst_bound = std::max(worst_bound, std::abs(p.total) - 1.0);
    }
    csv.close();
    report.files.push_back(path.string());
    if (!grid.empty() && grid.front() == 0.0)
      worst_initial = std::max(worst_initial, std::abs(pts.front().total - 1.0));
  }
  report.check("bounded_total", std::max(0.0, worst_bound), 1e-12, "|D| <= 1");
  if (!grid.empty() && grid.front() == 0.0)
    report.check("initial_coherence", worst_initial, 1e-12, "D(0) = 1");
  if (cfg.verify_quadrature) detail::verify_quadrature(report, model, grid, cfg.quad);
  report.timings.emplace_back("total", clock.seconds());
  write_report(report, dir, "series_report.json");
  return report;
}

/// Thermal decoherence factor over (T, t): t,T,total, temperature-major.
inline RunReport cmd_thermal_map(const RunConfig& cfg) {
  Stopwatch clock;
  RunReport report;
  report.command = "thermal-map";
  const ValidatedModel model = model_of(cfg);
  if (!model.is_thermal())
    throw Error(ErrorCode::Config, "initial_state: thermal-map needs a thermal initial state");
  report.warnings = model.warnings();
  const auto pairs = resolve_pairs(cfg, model);
  const auto grid = cfg.time.points();
  std::vector<double> temps = cfg.temperatures.empty() ? std::vector<double>{model.temperature()}
                                                       : cfg.temperatures;
  const auto dir = prepare_output(cfg);
  const EvalOptions opt = eval_options(cfg);

  double worst_increase = 0.0;
  double worst_zero_row = 0.0;
  for (const LevelPair& pair : pairs) {
    const std::size_t nt = grid.size();
    std::vector<double> values(temps.size() * nt);
    parallel_for(values.size(), [&](std::size_t k) {
      values[k] = thermal_factor(model, pair, grid[k % nt], temps[k / nt], opt);
    });

    const auto path = dir / ("thermal_map_" + pair_tag(pair) + ".csv");
    CsvWriter csv(path, {"t", "T", "total"});
    for (std::size_t a = 0; a < temps.size(); ++a)
      for (std::size_t i = 0; i < nt; ++i) csv.row({grid[i], temps[a], values[a * nt + i]});
    csv.close();
    report.files.push_back(path.string());

    // monotone nonincreasing in T at fixed t, over the temperatures in ascending order
    std::vector<std::size_t> order(temps.size());
    for (std::size_t a = 0; a < order.size(); ++a) order[a] = a;
    std::sort(order.begin(), order.end(), [&](auto x, auto y) { return temps[x] < temps[y]; });
    for (std::size_t i = 0; i < nt; ++i) {
      for (std::size_t k = 1; k < order.size(); ++k) {
        const double rise = values[order[k] * nt + i] - values[order[k - 1] * nt + i];
        worst_increase = std::max(worst_increase, rise);
      }
    }
    for (std::size_t a = 0; a < temps.size(); ++a) {
      if (temps[a] != 0.0) continue;
      for (std::size_t i = 0; i < nt; ++i)
        worst_zero_row = std::max(
            worst_zero_row, std::abs(values[a * nt + i] - vacuum_factor(model, pair, grid[i], opt)));
    }
  }
  report.check("monotone_in_temperature", worst_increase, 1e-12, "D(t, T) nonincreasing in T");
  if (std::find(temps.begin(), temps.end(), 0.0) != temps.end())
    report.check("zero_temperature_is_vacuum", worst_zero_row, 1e-12, "D(t, 0) = vacuum factor");
  report.timings.emplace_back("total", clock.seconds());
  write_report(report, dir, "thermal_map_report.json");
  return report;
}

/// t,delta_NB,predicted,vacuum,residual per pair.
inline RunReport cmd_relation(const RunConfig& cfg) {
  Stopwatch clock;
  RunReport report;
  report.command = "relation";
  const ValidatedModel model = model_of(cfg);
  report.warnings = model.warnings();
  const auto pairs = resolve_pairs(cfg, model);
  const auto grid = cfg.time.points();
  const auto dir = prepare_output(cfg);
  const EvalOptions opt = eval_options(cfg);
  const double g2 = g0_squared_mean(model);

  double worst = 0.0;
  for (const LevelPair& pair : pairs) {
    std::vector<FluctuationRelation> rel(grid.size());
    std::vector<double> delta(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
      rel[i] = fluctuation_relation_check(model, pair, grid[i], opt);
      delta[i] = g2 * vacuum_overlap_integral(model.bath(), grid[i], opt.quad, opt.method);
    });
    const auto path = dir / ("relation_" + pair_tag(pair) + ".csv");
    CsvWriter csv(path, {"t", "delta_NB", "predicted", "vacuum", "residual"});
    for (std::size_t i = 0; i < grid.size(); ++i) {
      csv.row({grid[i], delta[i], rel[i].predicted, rel[i].exact_vacuum, rel[i].residual});
      worst = std::max(worst, rel[i].residual);
    }
    csv.close();
    report.files.push_back(path.string());
  }
  report.check("dephasing_fluctuation_identity", worst, 1e-12,
               "|exp(-dg^2 dN_B / 2<G0^2>) - vacuum factor|");
  report.timings.emplace_back("total", clock.seconds());
  write_report(report, dir, "relation_report.json");
  return report;
}

/// Oracle comparison for one model over a time grid; appends checks to report.
inline void oracle_suite(RunReport& report, const std::string& label, const ValidatedModel& model,
                         const std::vector<LevelPair>& pairs, const std::vector<double>& grid,
                         const std::optional<std::vector<std::size_t>>& dims,
                         std::size_t dimension_cap, const OracleTolerances& tol = {}) {
  if (!model.is_discrete())
    throw Error(ErrorCode::Config, "bath: oracle-check needs a discrete bath");
  const double t_max = grid.empty() ? 0.0 : *std::max_element(grid.begin(), grid.end());
  const std::string pre = label.empty() ? "" : label + ".";

  if (model.is_thermal()) {
    ThermalOracleOptions topt;
    topt.dimension_cap = dimension_cap;
    double worst = 0.0;
    double tail = 0.0;
    for (const LevelPair& pair : pairs) {
      std::vector<std::size_t> use_dims = dims.value_or(std::vector<std::size_t>{});
      std::optional<ThermalFockOracle> oracle;
      try {
        oracle.emplace(model, pair, model.temperature(), topt, use_dims);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::TruncationInsufficient) throw;
        report.fail(pre + "truncation_tail", e.what());
        return;
      }
      for (double t : grid) {
        ThermalOracleResult r = oracle->evaluate(t);
        // escalate automatically unless dimensions were fixed by the caller
        while (!dims && !(r.tail_mass < topt.tail_tol)) {
          auto bigger = oracle->truncation().dims;
          for (auto& d : bigger) d *= 2;
          oracle.emplace(model, pair, model.temperature(), topt, bigger);
          r = oracle->evaluate(t);
        }
        tail = std::max(tail, r.tail_mass);
        const double analytic = thermal_factor(model, pair, t, model.temperature());
        worst = std::max(worst, std::abs(r.factor - analytic) / analytic);
      }
    }
    report.check(pre + "truncation_tail", tail, kTailMassLimit,
                 tail < kTailMassLimit ? "" : "TruncationInsufficient");
    report.check(pre + "thermal_oracle_vs_analytic", worst, tol.thermal_rel, "relative");
    return;
  }

  Truncation trunc;
  if (dims) {
    trunc.dims = *dims;
    trunc.dimension_cap = dimension_cap;
  } else {
    trunc = truncation_autotune(model, t_max, 1e-12, dimension_cap);
  }
  std::optional<FockOracle> oracle;
  try {
    oracle.emplace(model, trunc);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::TruncationInsufficient) throw;
    report.fail(pre + "truncation_tail", e.what());
    return;
  }

  const BathExcitationReport n0 = bath_excitation(model, 0.0);
  double tail = 0.0, entry = 0.0, modulus = 0.0, diag = 0.0, norm = 0.0, number = 0.0, herm = 0.0;
  for (double t : grid) {
    const OracleResult r = oracle->evaluate(t);
    tail = std::max(tail, r.tail_mass);
    norm = std::max(norm, r.norm_drift);
    const Eigen::MatrixXcd analytic = reduced_density_matrix(model, t);
    entry = std::max(entry, (r.reduced - analytic).cwiseAbs().maxCoeff());
    herm = std::max(herm, (r.reduced - r.reduced.adjoint()).cwiseAbs().maxCoeff());
    herm = std::max(herm, std::abs(r.reduced.trace() - 1.0));
    for (std::size_t n = 0; n < model.levels(); ++n) {
      const auto idx = static_cast<Eigen::Index>(n);
      diag = std::max(diag, std::abs(r.reduced(idx, idx) - std::norm(model.level(n).amplitude)));
    }
    for (const LevelPair& pair : pairs) {
      const DecoherencePoint p = decoherence_factor(model, pair, t);
      modulus = std::max(modulus, std::abs(std::abs(r.overlap(pair)) -
                                           p.vacuum_part * std::abs(p.excitation_part)));
    }
    number = std::max(number, std::abs(r.bath_number - (n0.n0 + bath_excitation(model, t).delta)));
  }
  std::string dims_text;
  for (std::size_t d : trunc.dims) dims_text += (dims_text.empty() ? "" : "x") + std::to_string(d);
  report.check(pre + "truncation_tail", tail, kTailMassLimit,
               (tail < kTailMassLimit ? "dims " : "TruncationInsufficient at dims ") + dims_text);
  report.check(pre + "unitarity", norm, tol.unitarity);
  report.check(pre + "reduced_density_vs_analytic", entry, tol.entry, "max |entry difference|");
  report.check(pre + "overlap_modulus_factorization", modulus, tol.entry,
               "| |<chi_m|chi_n>| - vacuum * |excitation| |");
  report.check(pre + "diagonal_drift", diag, tol.diagonal);
  report.check(pre + "hermitian_trace", herm, 1e-9);
  report.check(pre + "bath_number_vs_analytic", number, tol.entry, "N_B(0) + delta N_B");
}

/// Built-in benchmark models shared with the acceptance suite.
namespace benchmarks {

inline SystemSpec three_level_system() {
  return {{{0.0, 0.0, {0.6, 0.0}}, {1.0, 1.0, {0.0, 0.64}}, {2.5, -0.5, {0.384, -0.288}}}};
}

inline DiscreteBath one_mode() { return {{{1.0, {0.2, 0.0}}}}; }
inline DiscreteBath two_mode() { return {{{1.0, {0.2, 0.0}}, {2.0, {0.15, 0.0}}}}; }

}  // namespace benchmarks

/// Oracle checks for the configured model, or the built-in 1-mode vacuum and
/// 2-mode Fock{1,2} benchmarks when no model is given.
inline RunReport cmd_oracle_check(const std::optional<RunConfig>& cfg,
                                  const std::optional<std::vector<std::size_t>>& dims_override = {}) {
  Stopwatch clock;
  RunReport report;
  report.command = "oracle-check";
  if (cfg) {
    const ValidatedModel model = model_of(*cfg);
    report.warnings = model.warnings();
    const auto dims = dims_override ? dims_override : cfg->trunc_dims;
    oracle_suite(report, "", model, resolve_pairs(*cfg, model), cfg->time.points(), dims,
                 cfg->dimension_cap);
  } else {
    Grid grid{0.0, 10.0, std::nullopt, 50};
    const auto times = grid.points();
    const ValidatedModel one =
        validate_config(benchmarks::three_level_system(), benchmarks::one_mode(), VacuumState{});
    const ValidatedModel two =
        validate_config(benchmarks::three_level_system(), benchmarks::two_mode(), FockState{{1, 2}});
    auto fit = [&](const ValidatedModel& m) -> std::optional<std::vector<std::size_t>> {
      if (!dims_override) return std::nullopt;
      std::vector<std::size_t> d(m.modes().size(), dims_override->front());
      return d;
    };
    oracle_suite(report, "one_mode", one, all_pairs(one.levels()), times, fit(one), 200000);
    oracle_suite(report, "two_mode_fock12", two, all_pairs(two.levels()), times, fit(two), 200000);
  }
  report.timings.emplace_back("total", clock.seconds());
  if (cfg) write_report(report, prepare_output(*cfg), "oracle_check_report.json");
  return report;
}

/// Process exit status for a finished run: 0 OK, 1 some check failed.
inline int exit_code(const RunReport& report) { return report.failed() ? 1 : 0; }

/// Process exit status for an aborted run: 3 for resource caps, 2 otherwise.
inline int exit_code(const Error& error) {
  switch (error.code()) {
    case ErrorCode::DimensionCapExceeded:
    case ErrorCode::NonConvergence:
    case ErrorCode::QuadratureNotConverged:
      return 3;
    default:
      return 2;
  }
}

}  // namespace dephasim::cli
