#pragma once

// System/bath description for a pure-dephasing model with QND coupling.
//
// Natural units throughout: hbar = k_B = 1. Frequencies are angular, the
// temperature is an energy, and the system couples to the bath through a
// diagonal operator G = sum_n g_n |n><n| times sum_j (xi_j a_j + h.c.).

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "dephasim/error.hpp"

namespace dephasim {

using complex = std::complex<double>;

struct Level {
  double omega = 0.0;     // level energy Omega_n
  double g = 0.0;         // dimensionless coupling g_n
  complex amplitude{};    // initial amplitude c_n

  friend bool operator==(const Level&, const Level&) = default;
};

struct SystemSpec {
  std::vector<Level> levels;

  std::size_t size() const noexcept { return levels.size(); }
  friend bool operator==(const SystemSpec&, const SystemSpec&) = default;
};

struct BathMode {
  double omega = 1.0;
  complex xi{};

  friend bool operator==(const BathMode&, const BathMode&) = default;
};

struct DiscreteBath {
  std::vector<BathMode> modes;
  friend bool operator==(const DiscreteBath&, const DiscreteBath&) = default;
};

/// J(w) = gamma * w * exp(-w / cutoff).
struct OhmicBath {
  double gamma = 1.0;
  double cutoff = 1.0;
  friend bool operator==(const OhmicBath&, const OhmicBath&) = default;
};

using BathSpec = std::variant<DiscreteBath, OhmicBath>;

struct VacuumState {
  friend bool operator==(const VacuumState&, const VacuumState&) = default;
};

struct FockState {
  std::vector<unsigned> occupations;
  friend bool operator==(const FockState&, const FockState&) = default;
};

struct ThermalState {
  double temperature = 0.0;
  friend bool operator==(const ThermalState&, const ThermalState&) = default;
};

using BathInitialState = std::variant<VacuumState, FockState, ThermalState>;

struct LevelPair {
  std::size_t n = 0;
  std::size_t m = 1;

  LevelPair swapped() const noexcept { return {m, n}; }
  friend bool operator==(const LevelPair&, const LevelPair&) = default;
};

class ValidatedModel;
ValidatedModel validate_config(SystemSpec system, BathSpec bath, BathInitialState state);

/// A model whose cross-field invariants have been checked. Only
/// validate_config() can produce one; afterwards it is immutable.
class ValidatedModel {
 public:
  const SystemSpec& system() const noexcept { return system_; }
  const BathSpec& bath() const noexcept { return bath_; }
  const BathInitialState& state() const noexcept { return state_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  std::size_t levels() const noexcept { return system_.size(); }
  const Level& level(std::size_t n) const { return system_.levels.at(n); }

  bool is_discrete() const noexcept { return std::holds_alternative<DiscreteBath>(bath_); }
  bool is_ohmic() const noexcept { return std::holds_alternative<OhmicBath>(bath_); }
  bool is_thermal() const noexcept { return std::holds_alternative<ThermalState>(state_); }

  const std::vector<BathMode>& modes() const {
    if (const auto* d = std::get_if<DiscreteBath>(&bath_)) return d->modes;
    throw Error(ErrorCode::UnsupportedBath, "operation requires a discrete bath");
  }

  /// Fock occupations; the vacuum is reported as all zeros. Ohmic + vacuum
  /// yields an empty list.
  std::vector<unsigned> occupations() const {
    if (const auto* f = std::get_if<FockState>(&state_)) return f->occupations;
    if (std::holds_alternative<ThermalState>(state_))
      throw Error(ErrorCode::ThermalStateNotFock, "bath is in a thermal state");
    if (const auto* d = std::get_if<DiscreteBath>(&bath_))
      return std::vector<unsigned>(d->modes.size(), 0u);
    return {};
  }

  double temperature() const {
    if (const auto* th = std::get_if<ThermalState>(&state_)) return th->temperature;
    return 0.0;
  }

  void check_pair(const LevelPair& pair) const {
    if (pair.n >= levels() || pair.m >= levels())
      throw Error(ErrorCode::InvalidParameter, "level pair index out of range");
    if (pair.n == pair.m) throw Error(ErrorCode::InvalidParameter, "level pair needs n != m");
  }

  double delta_g(const LevelPair& pair) const {
    check_pair(pair);
    return level(pair.n).g - level(pair.m).g;
  }

  /// Structural equality; warnings are ignored.
  friend bool operator==(const ValidatedModel& a, const ValidatedModel& b) {
    return a.system_ == b.system_ && a.bath_ == b.bath_ && a.state_ == b.state_;
  }

 private:
  ValidatedModel() = default;
  friend ValidatedModel validate_config(SystemSpec, BathSpec, BathInitialState);

  SystemSpec system_;
  BathSpec bath_;
  BathInitialState state_;
  std::vector<std::string> warnings_;
};

namespace detail {

inline bool finite(complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace detail

/// Checks every invariant and renormalizes the amplitudes. A shift of the
/// squared norm larger than 1e-12 is recorded in warnings().
inline ValidatedModel validate_config(SystemSpec system, BathSpec bath, BathInitialState state) {
  if (system.levels.size() < 2)
    throw Error(ErrorCode::EmptySystem, "system needs at least 2 levels");

  double norm2 = 0.0;
  for (std::size_t n = 0; n < system.levels.size(); ++n) {
    const Level& lv = system.levels[n];
    if (!std::isfinite(lv.omega) || !std::isfinite(lv.g) || !detail::finite(lv.amplitude))
      throw Error(ErrorCode::InvalidParameter,
                  "level " + std::to_string(n) + " has a non-finite field");
    norm2 += std::norm(lv.amplitude);
  }
  if (!(norm2 > 0.0))
    throw Error(ErrorCode::InvalidParameter, "initial amplitudes are all zero");

  ValidatedModel model;
  if (std::abs(norm2 - 1.0) > 1e-12) {
    model.warnings_.push_back("amplitudes renormalized (sum |c|^2 was " + std::to_string(norm2) +
                              ")");
  }
  // Within a few ulps of 1 the amplitudes are left untouched so validation is idempotent.
  if (std::abs(norm2 - 1.0) > 8.0 * std::numeric_limits<double>::epsilon()) {
    const double scale = 1.0 / std::sqrt(norm2);
    for (Level& lv : system.levels) lv.amplitude *= scale;
  }

  std::size_t mode_count = 0;
  if (auto* d = std::get_if<DiscreteBath>(&bath)) {
    if (d->modes.empty()) throw Error(ErrorCode::InvalidParameter, "discrete bath has no modes");
    for (std::size_t j = 0; j < d->modes.size(); ++j) {
      const BathMode& mode = d->modes[j];
      if (!std::isfinite(mode.omega) || !detail::finite(mode.xi))
        throw Error(ErrorCode::InvalidParameter,
                    "bath mode " + std::to_string(j) + " has a non-finite field");
      if (!(mode.omega > 0.0))
        throw Error(ErrorCode::NonPositiveModeFrequency,
                    "bath mode " + std::to_string(j) + " has omega <= 0");
    }
    mode_count = d->modes.size();
  } else {
    const auto& o = std::get<OhmicBath>(bath);
    if (!(o.gamma > 0.0) || !std::isfinite(o.gamma))
      throw Error(ErrorCode::InvalidParameter, "ohmic gamma must be > 0");
    if (!(o.cutoff > 0.0) || !std::isfinite(o.cutoff))
      throw Error(ErrorCode::InvalidParameter, "ohmic cutoff must be > 0");
  }

  if (const auto* f = std::get_if<FockState>(&state)) {
    if (!std::holds_alternative<DiscreteBath>(bath))
      throw Error(ErrorCode::InvalidParameter, "Fock initial state requires a discrete bath");
    if (f->occupations.size() != mode_count)
      throw Error(ErrorCode::FockLengthMismatch,
                  "got " + std::to_string(f->occupations.size()) + " occupations for " +
                      std::to_string(mode_count) + " modes");
  } else if (const auto* th = std::get_if<ThermalState>(&state)) {
    if (!std::isfinite(th->temperature))
      throw Error(ErrorCode::InvalidParameter, "temperature is not finite");
    if (th->temperature < 0.0)
      throw Error(ErrorCode::NegativeTemperature, "temperature must be >= 0");
  }

  model.system_ = std::move(system);
  model.bath_ = std::move(bath);
  model.state_ = std::move(state);
  return model;
}

inline ValidatedModel validate_config(const ValidatedModel& model) {
  return validate_config(model.system(), model.bath(), model.state());
}

/// <G_0^2> = sum_n |c_n|^2 g_n^2.
inline double g0_squared_mean(const SystemSpec& system) {
  double acc = 0.0;
  for (const Level& lv : system.levels) acc += std::norm(lv.amplitude) * lv.g * lv.g;
  return acc;
}

inline double g0_squared_mean(const ValidatedModel& model) { return g0_squared_mean(model.system()); }

/// Single boson mode b^dag b coupled through its number operator:
/// levels n = 0..n_max with Omega_n = n * omega0 and g_n = n, uniform amplitudes.
inline SystemSpec preset_boson_mode(double omega0, int n_max) {
  if (n_max < 1) throw Error(ErrorCode::InvalidParameter, "n_max must be >= 1");
  if (!std::isfinite(omega0)) throw Error(ErrorCode::InvalidParameter, "omega0 is not finite");
  SystemSpec spec;
  const double amp = 1.0 / std::sqrt(static_cast<double>(n_max + 1));
  for (int n = 0; n <= n_max; ++n)
    spec.levels.push_back({n * omega0, static_cast<double>(n), complex(amp, 0.0)});
  return spec;
}

/// All pairs (n, m) with n < m.
inline std::vector<LevelPair> all_pairs(std::size_t levels) {
  std::vector<LevelPair> out;
  for (std::size_t n = 0; n < levels; ++n)
    for (std::size_t m = n + 1; m < levels; ++m) out.push_back({n, m});
  return out;
}

}  // namespace dephasim
