#pragma once

// Brute-force reference: exact unitary evolution of every system branch on a
// truncated multimode Fock space. Nothing here uses the closed-form results
// of decoherence.hpp; agreement between the two is the point.
//
// Because the coupling is QND, the composite Hamiltonian is block diagonal in
// the system levels:
//
//   H_n = Omega_n + sum_j [ w_j a_j^dag a_j + g_n (xi_j a_j + xi_j^* a_j^dag) ],
//
// and |psi(t)> = sum_n c_n |n> (x) |chi_n(t)> with |chi_n(t)> = e^{-i H_n t}|bath_0>.
// The reduced density matrix is rho_nm = c_n c_m^* <chi_m|chi_n>.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dephasim/error.hpp"
#include "dephasim/model.hpp"

namespace dephasim {

/// Population allowed in the top Fock level of any mode for a result to pass.
inline constexpr double kTailMassLimit = 1e-8;

struct Truncation {
  std::vector<std::size_t> dims;  // Fock-space dimension per mode, each >= 2
  double unitarity_tol = 1e-10;
  std::size_t dimension_cap = 200000;  // bound on levels * prod(dims)

  std::size_t bath_dimension() const {
    std::size_t d = 1;
    for (std::size_t k : dims) d *= k;
    return d;
  }
};

struct OracleResult {
  std::vector<LevelPair> pairs;
  std::vector<complex> branch_overlaps;  // <chi_m|chi_n> for each pair, phases included
  Eigen::MatrixXcd reduced;
  double bath_number = 0.0;  // <sum_j a_j^dag a_j>
  Truncation truncation_used;
  double tail_mass = 0.0;   // max over branches and modes
  double norm_drift = 0.0;  // max over branches of | ||chi_n|| - 1 |

  complex overlap(const LevelPair& pair) const {
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      if (pairs[k] == pair) return branch_overlaps[k];
      if (pairs[k] == pair.swapped()) return std::conj(branch_overlaps[k]);
    }
    throw Error(ErrorCode::InvalidParameter, "pair not present in oracle result");
  }
};

namespace detail {

/// Mixed-radix indexing of multimode Fock states; mode 0 varies fastest.
class FockBasis {
 public:
  explicit FockBasis(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    stride_.resize(dims_.size());
    std::size_t s = 1;
    for (std::size_t j = 0; j < dims_.size(); ++j) {
      stride_[j] = s;
      s *= dims_[j];
    }
    size_ = s;
  }

  std::size_t size() const noexcept { return size_; }
  std::size_t modes() const noexcept { return dims_.size(); }
  std::size_t dim(std::size_t j) const { return dims_[j]; }
  std::size_t stride(std::size_t j) const { return stride_[j]; }

  std::size_t occupation(std::size_t index, std::size_t j) const {
    return (index / stride_[j]) % dims_[j];
  }

  std::size_t index_of(const std::vector<unsigned>& occ) const {
    std::size_t idx = 0;
    for (std::size_t j = 0; j < dims_.size(); ++j) {
      if (occ[j] >= dims_[j])
        throw Error(ErrorCode::TruncationInsufficient,
                    "initial occupation " + std::to_string(occ[j]) + " of mode " +
                        std::to_string(j) + " does not fit dimension " + std::to_string(dims_[j]));
      idx += occ[j] * stride_[j];
    }
    return idx;
  }

 private:
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> stride_;
  std::size_t size_ = 1;
};

inline void check_truncation(const ValidatedModel& model, const Truncation& trunc) {
  const auto& modes = model.modes();
  if (trunc.dims.size() != modes.size())
    throw Error(ErrorCode::InvalidParameter, "truncation needs one dimension per bath mode");
  std::size_t total = model.levels();
  for (std::size_t d : trunc.dims) {
    if (d < 2) throw Error(ErrorCode::InvalidParameter, "truncation dimensions must be >= 2");
    if (total > trunc.dimension_cap / d)
      throw Error(ErrorCode::DimensionCapExceeded,
                  "truncated Hilbert space exceeds cap " + std::to_string(trunc.dimension_cap));
    total *= d;
  }
}

/// Max over modes of the population in that mode's top Fock level.
inline double tail_mass(const FockBasis& basis, const Eigen::Ref<const Eigen::VectorXcd>& psi) {
  double worst = 0.0;
  for (std::size_t j = 0; j < basis.modes(); ++j) {
    const std::size_t top = basis.dim(j) - 1;
    double acc = 0.0;
    for (std::size_t k = 0; k < basis.size(); ++k)
      if (basis.occupation(k, j) >= top) acc += std::norm(psi(static_cast<Eigen::Index>(k)));
    worst = std::max(worst, acc);
  }
  return worst;
}

inline double number_expectation(const FockBasis& basis,
                                 const Eigen::Ref<const Eigen::VectorXcd>& psi) {
  double acc = 0.0;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    std::size_t n = 0;
    for (std::size_t j = 0; j < basis.modes(); ++j) n += basis.occupation(k, j);
    acc += static_cast<double>(n) * std::norm(psi(static_cast<Eigen::Index>(k)));
  }
  return acc;
}

}  // namespace detail

/// Block H_n of the composite Hamiltonian on the truncated bath space.
inline Eigen::MatrixXcd build_branch_hamiltonian(const ValidatedModel& model, std::size_t n,
                                                 const Truncation& trunc) {
  if (!model.is_discrete())
    throw Error(ErrorCode::UnsupportedBath, "the Fock-space oracle needs a discrete bath");
  if (n >= model.levels()) throw Error(ErrorCode::InvalidParameter, "level index out of range");
  detail::check_truncation(model, trunc);

  const auto& modes = model.modes();
  const Level& lv = model.level(n);
  const detail::FockBasis basis(trunc.dims);
  const auto dim = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);

  for (std::size_t k = 0; k < basis.size(); ++k) {
    double diag = lv.omega;
    for (std::size_t j = 0; j < modes.size(); ++j)
      diag += modes[j].omega * static_cast<double>(basis.occupation(k, j));
    h(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = diag;

    if (lv.g == 0.0) continue;
    for (std::size_t j = 0; j < modes.size(); ++j) {
      const std::size_t occ = basis.occupation(k, j);
      if (occ + 1 >= basis.dim(j)) continue;
      // <occ+1| g (xi a + xi^* a^dag) |occ> = g xi^* sqrt(occ+1)
      const auto up = static_cast<Eigen::Index>(k + basis.stride(j));
      const complex elem = lv.g * std::conj(modes[j].xi) * std::sqrt(static_cast<double>(occ + 1));
      h(up, static_cast<Eigen::Index>(k)) = elem;
      h(static_cast<Eigen::Index>(k), up) = std::conj(elem);
    }
  }
  return h;
}

/// Spectral propagator of one Hermitian block; one decomposition serves all t.
class BranchPropagator {
 public:
  explicit BranchPropagator(const Eigen::MatrixXcd& hamiltonian) : solver_(hamiltonian) {
    if (solver_.info() != Eigen::Success)
      throw Error(ErrorCode::EigenSolverFailure, "Hermitian eigendecomposition failed");
  }

  Eigen::VectorXcd evolve(const Eigen::VectorXcd& psi0, double t) const {
    Eigen::VectorXcd coeff = solver_.eigenvectors().adjoint() * psi0;
    coeff.array() *= phases(t).array();
    return solver_.eigenvectors() * coeff;
  }

  /// e^{-i H t} as a dense matrix.
  Eigen::MatrixXcd propagator(double t) const {
    const auto& v = solver_.eigenvectors();
    return v * phases(t).asDiagonal() * v.adjoint();
  }

  Eigen::Index dimension() const { return solver_.eigenvalues().size(); }

 private:
  Eigen::VectorXcd phases(double t) const {
    const auto& e = solver_.eigenvalues();
    Eigen::VectorXcd ph(e.size());
    for (Eigen::Index k = 0; k < e.size(); ++k) ph(k) = std::polar(1.0, -e(k) * t);
    return ph;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver_;
};

/// e^{-i H t} psi0 via eigendecomposition of H.
inline Eigen::VectorXcd evolve_branch(const Eigen::MatrixXcd& hamiltonian,
                                      const Eigen::VectorXcd& psi0, double t,
                                      double unitarity_tol = 1e-10) {
  if (std::abs(psi0.norm() - 1.0) > unitarity_tol)
    throw Error(ErrorCode::InvalidParameter, "initial state is not normalized");
  Eigen::VectorXcd out = BranchPropagator(hamiltonian).evolve(psi0, t);
  if (std::abs(out.norm() - 1.0) > unitarity_tol)
    throw Error(ErrorCode::EigenSolverFailure, "evolution lost unitarity");
  return out;
}

/// Evolves every branch of a vacuum/Fock model. Decompositions happen once in
/// the constructor; evaluate() is then cheap per time point.
class FockOracle {
 public:
  FockOracle(const ValidatedModel& model, Truncation trunc)
      : model_(model), trunc_(std::move(trunc)), basis_(trunc_.dims) {
    if (!model_.is_discrete())
      throw Error(ErrorCode::UnsupportedBath, "the Fock-space oracle needs a discrete bath");
    if (model_.is_thermal())
      throw Error(ErrorCode::ThermalStateNotFock, "use thermal_oracle_factor for a thermal bath");
    detail::check_truncation(model_, trunc_);
    initial_ = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis_.size()));
    initial_(static_cast<Eigen::Index>(basis_.index_of(model_.occupations()))) = 1.0;
    branches_.reserve(model_.levels());
    for (std::size_t n = 0; n < model_.levels(); ++n)
      branches_.emplace_back(build_branch_hamiltonian(model_, n, trunc_));
  }

  const Truncation& truncation() const noexcept { return trunc_; }
  const ValidatedModel& model() const noexcept { return model_; }

  std::vector<Eigen::VectorXcd> branch_states(double t) const {
    std::vector<Eigen::VectorXcd> out;
    out.reserve(branches_.size());
    for (const auto& b : branches_) out.push_back(b.evolve(initial_, t));
    return out;
  }

  OracleResult evaluate(double t) const {
    const std::vector<Eigen::VectorXcd> chi = branch_states(t);
    const std::size_t n_levels = model_.levels();
    OracleResult r;
    r.truncation_used = trunc_;
    r.reduced = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n_levels),
                                       static_cast<Eigen::Index>(n_levels));
    for (std::size_t n = 0; n < n_levels; ++n) {
      const complex cn = model_.level(n).amplitude;
      r.norm_drift = std::max(r.norm_drift, std::abs(chi[n].norm() - 1.0));
      r.tail_mass = std::max(r.tail_mass, detail::tail_mass(basis_, chi[n]));
      r.bath_number += std::norm(cn) * detail::number_expectation(basis_, chi[n]);
      for (std::size_t m = 0; m < n_levels; ++m) {
        const complex ov = chi[m].dot(chi[n]);  // <chi_m|chi_n>
        r.reduced(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m)) =
            cn * std::conj(model_.level(m).amplitude) * ov;
        if (n < m) {
          r.pairs.push_back({n, m});
          r.branch_overlaps.push_back(ov);
        }
      }
    }
    return r;
  }

 private:
  ValidatedModel model_;
  Truncation trunc_;
  detail::FockBasis basis_;
  Eigen::VectorXcd initial_;
  std::vector<BranchPropagator> branches_;
};

namespace detail {

inline void require_converged(const OracleResult& r) {
  if (!(r.tail_mass < kTailMassLimit))
    throw Error(ErrorCode::TruncationInsufficient,
                "tail mass " + std::to_string(r.tail_mass) + " >= " +
                    std::to_string(kTailMassLimit));
  if (r.norm_drift > r.truncation_used.unitarity_tol)
    throw Error(ErrorCode::EigenSolverFailure, "branch evolution lost unitarity");
}

}  // namespace detail

/// Full oracle evaluation at one time, rejecting results whose truncation leaks.
inline OracleResult oracle_evaluate(const ValidatedModel& model, double t, const Truncation& trunc) {
  OracleResult r = FockOracle(model, trunc).evaluate(t);
  detail::require_converged(r);
  return r;
}

inline complex oracle_overlap(const ValidatedModel& model, const LevelPair& pair, double t,
                              const Truncation& trunc) {
  model.check_pair(pair);
  return oracle_evaluate(model, t, trunc).overlap(pair);
}

inline Eigen::MatrixXcd oracle_reduced_density(const ValidatedModel& model, double t,
                                               const Truncation& trunc) {
  return oracle_evaluate(model, t, trunc).reduced;
}

inline double oracle_bath_number(const ValidatedModel& model, double t, const Truncation& trunc) {
  return oracle_evaluate(model, t, trunc).bath_number;
}

/// Largest coherent displacement any branch can reach in mode j: max_n |g_n| 2|xi_j| / w_j.
inline double max_displacement(const ValidatedModel& model, std::size_t j) {
  double gmax = 0.0;
  for (const Level& lv : model.system().levels) gmax = std::max(gmax, std::abs(lv.g));
  const BathMode& mode = model.modes().at(j);
  return gmax * 2.0 * std::abs(mode.xi) / mode.omega;
}

/// Starting dimension for a mode displaced by up to d from Fock level m.
inline std::size_t initial_mode_dimension(unsigned m, double d) {
  const double spread = 4.0 * d * d + 6.0 * d * std::sqrt(static_cast<double>(m) + 1.0);
  return static_cast<std::size_t>(m) + static_cast<std::size_t>(std::ceil(spread)) + 10;
}

namespace detail {

inline std::vector<double> autotune_times(const ValidatedModel& model, double t_max) {
  std::vector<double> times;
  constexpr int samples = 64;
  for (int k = 0; k <= samples; ++k) times.push_back(t_max * k / samples);
  // instants of maximal displacement, t = pi / w_j (mod 2 pi / w_j)
  for (const BathMode& mode : model.modes()) {
    const double period = 2.0 * std::numbers::pi / mode.omega;
    for (double t = 0.5 * period; t <= t_max; t += period) times.push_back(t);
  }
  return times;
}

inline Truncation doubled(const ValidatedModel& model, Truncation trunc) {
  for (std::size_t& d : trunc.dims) d *= 2;
  check_truncation(model, trunc);
  return trunc;
}

}  // namespace detail

/// Picks per-mode dimensions for a vacuum/Fock model from the displacement
/// bound, then doubles them until the tail mass over [0, t_max] is below tol.
inline Truncation truncation_autotune(const ValidatedModel& model, double t_max, double tol = 1e-12,
                                      std::size_t dimension_cap = 200000) {
  if (!model.is_discrete())
    throw Error(ErrorCode::UnsupportedBath, "the Fock-space oracle needs a discrete bath");
  const std::vector<unsigned> occ = model.occupations();
  Truncation trunc;
  trunc.dimension_cap = dimension_cap;
  for (std::size_t j = 0; j < occ.size(); ++j)
    trunc.dims.push_back(initial_mode_dimension(occ[j], max_displacement(model, j)));
  detail::check_truncation(model, trunc);

  const std::vector<double> times = detail::autotune_times(model, t_max);
  for (;;) {
    const FockOracle oracle(model, trunc);
    double tail = 0.0;
    for (double t : times) tail = std::max(tail, oracle.evaluate(t).tail_mass);
    if (tail < tol) return trunc;
    trunc = detail::doubled(model, trunc);
  }
}

struct ThermalOracleOptions {
  double weight_tol = 1e-12;  // neglected Boltzmann weight per mode
  unsigned m_max_cap = 4000;  // largest occupation summed per mode
  double tail_tol = 1e-18;    // Boltzmann-weighted tail population
  std::size_t dimension_cap = 200000;
};

struct ThermalOracleResult {
  complex mixture{};     // sum_k p_k <chi_m|chi_n>_k, phase included
  double factor = 0.0;   // |mixture|
  std::vector<unsigned> m_max;
  Truncation truncation_used;
  double tail_mass = 0.0;
};

/// Thermal decoherence factor as an explicit Boltzmann mixture of Fock
/// initial states, each one evolved on the truncated space:
/// sum_k p_k <chi_m^k(t)|chi_n^k(t)>, p_k = prod_j (1 - q_j) q_j^{k_j}, q_j = e^{-w_j/T}.
/// The two branch decompositions are done once; evaluate() reuses them.
class ThermalFockOracle {
 public:
  /// Dimensions default to the displacement bound evaluated at the largest
  /// summed occupation.
  ThermalFockOracle(const ValidatedModel& model, const LevelPair& pair, double temperature,
                    const ThermalOracleOptions& opt = {}, std::vector<std::size_t> dims = {})
      : temperature_(temperature) {
    if (!model.is_discrete())
      throw Error(ErrorCode::UnsupportedBath, "the Fock-space oracle needs a discrete bath");
    if (temperature < 0.0) throw Error(ErrorCode::NegativeTemperature, "temperature must be >= 0");
    model.check_pair(pair);
    const auto& modes = model.modes();
    q_.assign(modes.size(), 0.0);
    for (std::size_t j = 0; j < modes.size(); ++j) {
      unsigned mmax = 0;
      if (temperature > 0.0) {
        q_[j] = std::exp(-modes[j].omega / temperature);
        // weight left beyond mmax is q^{mmax+1}
        const double need = q_[j] > 0.0 ? std::log(opt.weight_tol) / std::log(q_[j]) - 1.0 : 0.0;
        if (!(need <= static_cast<double>(opt.m_max_cap)))
          throw Error(ErrorCode::NonConvergence,
                      "thermal sum needs occupations beyond cap " + std::to_string(opt.m_max_cap));
        mmax = static_cast<unsigned>(std::max(0.0, std::ceil(need)));
      }
      m_max_.push_back(mmax);
    }
    if (dims.empty())
      for (std::size_t j = 0; j < modes.size(); ++j)
        dims.push_back(initial_mode_dimension(m_max_[j], max_displacement(model, j)));
    if (dims.size() != modes.size())
      throw Error(ErrorCode::InvalidParameter, "truncation needs one dimension per bath mode");
    for (std::size_t j = 0; j < modes.size(); ++j)
      if (dims[j] < m_max_[j] + 2)
        throw Error(ErrorCode::TruncationInsufficient,
                    "dimension of mode " + std::to_string(j) + " cannot hold occupation " +
                        std::to_string(m_max_[j]));
    trunc_.dims = std::move(dims);
    trunc_.dimension_cap = opt.dimension_cap;
    // only the two branches of the pair are evolved
    std::size_t total = 2;
    for (std::size_t d : trunc_.dims) {
      if (total > trunc_.dimension_cap / d)
        throw Error(ErrorCode::DimensionCapExceeded,
                    "thermal oracle space exceeds cap " + std::to_string(trunc_.dimension_cap));
      total *= d;
    }
    basis_ = detail::FockBasis(trunc_.dims);
    branch_n_.emplace(build_branch_hamiltonian(model, pair.n, trunc_));
    branch_m_.emplace(build_branch_hamiltonian(model, pair.m, trunc_));
  }

  const Truncation& truncation() const noexcept { return trunc_; }
  const std::vector<unsigned>& m_max() const noexcept { return m_max_; }

  ThermalOracleResult evaluate(double t) const {
    const Eigen::MatrixXcd un = branch_n_->propagator(t);
    const Eigen::MatrixXcd um = branch_m_->propagator(t);
    ThermalOracleResult res;
    res.m_max = m_max_;
    res.truncation_used = trunc_;
    for (std::size_t k = 0; k < basis_.size(); ++k) {
      double weight = 1.0;
      for (std::size_t j = 0; j < q_.size() && weight > 0.0; ++j) {
        const std::size_t occ = basis_.occupation(k, j);
        if (occ > m_max_[j]) weight = 0.0;
        else if (temperature_ > 0.0) weight *= (1.0 - q_[j]) * std::pow(q_[j], static_cast<double>(occ));
        else if (occ != 0) weight = 0.0;
      }
      if (weight == 0.0) continue;
      const auto col = static_cast<Eigen::Index>(k);
      res.mixture += weight * um.col(col).dot(un.col(col));
      res.tail_mass += weight * std::max(detail::tail_mass(basis_, um.col(col)),
                                         detail::tail_mass(basis_, un.col(col)));
    }
    res.factor = std::abs(res.mixture);
    return res;
  }

 private:
  double temperature_;
  std::vector<double> q_;
  std::vector<unsigned> m_max_;
  Truncation trunc_;
  detail::FockBasis basis_{{}};
  std::optional<BranchPropagator> branch_n_;
  std::optional<BranchPropagator> branch_m_;
};

/// One-shot thermal oracle; doubles the truncation until the Boltzmann-weighted
/// tail population is below opt.tail_tol.
inline ThermalOracleResult thermal_oracle_factor(const ValidatedModel& model, const LevelPair& pair,
                                                 double t, double temperature,
                                                 const ThermalOracleOptions& opt = {}) {
  std::vector<std::size_t> dims;
  for (;;) {
    const ThermalFockOracle oracle(model, pair, temperature, opt, dims);
    ThermalOracleResult res = oracle.evaluate(t);
    if (res.tail_mass < opt.tail_tol) return res;
    dims = oracle.truncation().dims;
    for (std::size_t& d : dims) d *= 2;
  }
}

}  // namespace dephasim
