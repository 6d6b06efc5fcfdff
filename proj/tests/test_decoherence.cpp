#include <cmath>
#include <complex>
#include <numbers>

#include <gtest/gtest.h>

#include "dephasim/decoherence.hpp"
#include "support/oracles.hpp"

using namespace dephasim;
using std::numbers::pi;

namespace {

constexpr double kVacuumAtOne = 0.981780118351626;   // exp(-z/2), z = 0.16 sin^2(1/2)
constexpr double kRho01AtOne = 0.490890059175813;
constexpr double kThermalAtPi = 0.841039818853014;   // exp(-0.08 - 0.16 / (e - 1))

const double kH = 1.0 / std::sqrt(2.0);

ValidatedModel two_level(BathSpec bath, BathInitialState state, double g1 = 1.0,
                         complex c0 = kH, complex c1 = kH, double omega1 = 1.0) {
  return validate_config({{{0.0, 0.0, c0}, {omega1, g1, c1}}}, std::move(bath), std::move(state));
}

DiscreteBath one_mode() { return {{{1.0, {0.2, 0.0}}}}; }

// Single mode with z(t) = 2 at t = pi: dg^2 |xi|^2 4 / w^2 = 2 * 0.25 * 4 = 2.
ValidatedModel negative_excitation_model() {
  return validate_config({{{0.0, 0.0, kH}, {0.0, std::sqrt(2.0), kH}}}, DiscreteBath{{{1.0, {0.5, 0.0}}}},
                         FockState{{2}});
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no dephasim::Error thrown";
  return ErrorCode::Io;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

struct RandomCase {
  ValidatedModel model;
  LevelPair pair;
};

// 2-4 levels, 1-3 discrete modes, Fock occupations up to 4.
RandomCase random_fock_case(test::Sampler& rng, unsigned max_occ = 4) {
  SystemSpec sys;
  const unsigned n = rng.integer(2, 4);
  for (unsigned k = 0; k < n; ++k)
    sys.levels.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2), complex(rng.uniform(-1, 1), rng.uniform(-1, 1))});
  DiscreteBath bath;
  std::vector<unsigned> occ;
  const unsigned modes = rng.integer(1, 3);
  for (unsigned j = 0; j < modes; ++j) {
    bath.modes.push_back({rng.uniform(0.2, 3), std::polar(rng.uniform(0, 0.6), rng.uniform(0, 2 * pi))});
    occ.push_back(rng.integer(0, max_occ));
  }
  LevelPair pair{rng.integer(0, n - 1), 0};
  do pair.m = rng.integer(0, n - 1);
  while (pair.m == pair.n);
  return {validate_config(sys, bath, FockState{occ}), pair};
}

}  // namespace

TEST(VacuumFactor, Examples) {
  const auto ohmic = two_level(OhmicBath{1.0, 1.0}, VacuumState{});
  EXPECT_EQ(vacuum_factor(ohmic, {0, 1}, 0.0), 1.0);
  EXPECT_NEAR(vacuum_factor(ohmic, {0, 1}, 1.0), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(vacuum_factor(ohmic, {0, 1}, 3.0), 1.0 / std::sqrt(10.0), 1e-15);
  EXPECT_NEAR(vacuum_factor(ohmic, {0, 1}, 3.0, {{}, IntegralMethod::Quadrature}), 1.0 / std::sqrt(10.0), 1e-10);
}

TEST(VacuumFactor, OhmicPowerLaw) {
  // (1 + cutoff^2 t^2)^(-dg^2 gamma / 2)
  const auto model = two_level(OhmicBath{0.5, 2.0}, VacuumState{}, 1.5);
  for (double t : {0.1, 1.0, 4.0})
    EXPECT_LT(rel(vacuum_factor(model, {0, 1}, t), std::pow(1.0 + 4.0 * t * t, -0.5 * 2.25 * 0.5)), 1e-14);
}

TEST(ShortTimeGaussian, Examples) {
  EXPECT_EQ(short_time_gaussian(1.0, 1.0, 1.0, 0.0), 1.0);
  EXPECT_NEAR(short_time_gaussian(1.0, 1.0, 1.0, 0.1), 0.995012479192682, 1e-15);
  const auto ohmic = two_level(OhmicBath{1.0, 1.0}, VacuumState{});
  const double exact = vacuum_factor(ohmic, {0, 1}, 0.1);
  EXPECT_LE(rel(short_time_gaussian(1.0, 1.0, 1.0, 0.1), exact), 5e-5);
  EXPECT_EQ(code_of([] { short_time_gaussian(1.0, 1.0, 1.0, -1.0); }), ErrorCode::InvalidParameter);
}

TEST(FockExcitation, Examples) {
  EXPECT_EQ(fock_excitation_factor(two_level(one_mode(), VacuumState{}), {0, 1}, 2.0), 1.0);
  EXPECT_EQ(fock_excitation_factor(two_level(OhmicBath{}, VacuumState{}), {0, 1}, 2.0), 1.0);
  EXPECT_NEAR(fock_excitation_factor(two_level(one_mode(), FockState{{1}}), {0, 1}, pi), 0.84, 1e-15);

  const auto neg = negative_excitation_model();
  EXPECT_NEAR(fock_excitation_factor(neg, {0, 1}, pi), -1.0, 1e-14);
  const DecoherencePoint p = decoherence_factor(neg, {0, 1}, pi);
  EXPECT_LT(p.total, 0.0);
  EXPECT_NEAR(std::abs(p.total), std::exp(-1.0), 1e-14);

  const auto thermal = two_level(one_mode(), ThermalState{1.0});
  EXPECT_EQ(code_of([&] { fock_excitation_factor(thermal, {0, 1}, 1.0); }), ErrorCode::ThermalStateNotFock);
  EXPECT_EQ(code_of([&] { decoherence_factor(thermal, {0, 1}, 1.0); }), ErrorCode::ThermalStateNotFock);
  EXPECT_EQ(code_of([&] { phase_variance(thermal, {0, 1}, 1.0); }), ErrorCode::ThermalStateNotFock);
}

TEST(DecoherenceFactor, Examples) {
  const auto model = two_level(one_mode(), VacuumState{});
  const DecoherencePoint zero = decoherence_factor(model, {0, 1}, 0.0);
  EXPECT_EQ(zero.total, 1.0);
  EXPECT_EQ(zero.theta, 0.0);

  const DecoherencePoint one = decoherence_factor(model, {0, 1}, 1.0);
  EXPECT_NEAR(one.total, kVacuumAtOne, 1e-15);
  EXPECT_NEAR(one.total, one.vacuum_part * one.excitation_part, 1e-16);

  const auto flat = two_level(one_mode(), FockState{{3}}, 0.0);
  for (double t : {0.5, 2.0, 9.0}) EXPECT_EQ(decoherence_factor(flat, {0, 1}, t).total, 1.0);
}

TEST(ThetaPhase, Examples) {
  const auto model = two_level(OhmicBath{1.0, 1.0}, VacuumState{});
  EXPECT_EQ(theta_phase(model, {1, 0}, 0.0), 0.0);
  // -(Omega_1 - Omega_0) t + g_1^2 F(1) / 2 with F(1) = 2 (1 - pi/4)
  EXPECT_NEAR(theta_phase(model, {1, 0}, 1.0), -pi / 4, 1e-15);
  EXPECT_NEAR(theta_phase(model, {0, 1}, 1.0), pi / 4, 1e-15);

  const auto degenerate = validate_config({{{0.3, 0.7, kH}, {0.3, 0.7, kH}}}, OhmicBath{}, VacuumState{});
  for (double t : {0.0, 1.0, 5.0}) EXPECT_EQ(theta_phase(degenerate, {0, 1}, t), 0.0);
}

TEST(ReducedDensity, Examples) {
  const complex c0(0.6, 0.0);
  const complex c1(0.0, 0.8);
  const auto model = two_level(one_mode(), VacuumState{}, 1.0, c0, c1);
  const Eigen::MatrixXcd rho0 = reduced_density_matrix(model, 0.0);
  const Eigen::Vector2cd c(c0, c1);
  EXPECT_LT((rho0 - c * c.adjoint()).cwiseAbs().maxCoeff(), 1e-15);

  const auto half = two_level(one_mode(), VacuumState{});
  const Eigen::MatrixXcd rho = reduced_density_matrix(half, 1.0);
  EXPECT_NEAR(std::abs(rho(0, 1)), kRho01AtOne, 1e-15);
  EXPECT_NEAR(rho.trace().real(), 1.0, 1e-15);
  EXPECT_LT((rho - rho.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PhaseVariance, Examples) {
  const auto vac = two_level(one_mode(), VacuumState{});
  const PhaseVariance p0 = phase_variance(vac, {0, 1}, 0.0);
  EXPECT_EQ(p0.vacuum_var, 0.0);
  EXPECT_EQ(p0.excitation_var, 0.0);
  const PhaseVariance p1 = phase_variance(vac, {0, 1}, pi);
  EXPECT_NEAR(p1.vacuum_var, 0.16, 1e-15);
  EXPECT_EQ(p1.excitation_var, 0.0);
  const PhaseVariance p3 = phase_variance(two_level(one_mode(), FockState{{3}}), {0, 1}, pi);
  EXPECT_NEAR(p3.vacuum_var, 0.16, 1e-15);
  EXPECT_NEAR(p3.excitation_var, 0.96, 1e-14);
}

TEST(GaussianFactor, Examples) {
  const auto vac = two_level(one_mode(), VacuumState{});
  for (double t : {0.3, 1.0, 2.5}) EXPECT_EQ(gaussian_factor(vac, {0, 1}, t), vacuum_factor(vac, {0, 1}, t));

  // single mode, m = 5, z = 0.001: xi chosen so z(pi) = 4 |xi|^2 = 0.001
  const auto small = two_level(DiscreteBath{{{1.0, {std::sqrt(0.00025), 0.0}}}}, FockState{{5}});
  const DecoherencePoint p = decoherence_factor(small, {0, 1}, pi);
  EXPECT_NEAR(p.total, 0.994507620189273, 1e-14);
  EXPECT_NEAR(p.gaussian_total, 0.994515097308919, 1e-14);
  EXPECT_LE(std::abs(p.gaussian_total - p.total), 1e-4);

  // outside the regime the two forms disagree in sign
  const DecoherencePoint q = decoherence_factor(negative_excitation_model(), {0, 1}, pi);
  EXPECT_NEAR(q.gaussian_total, std::exp(-5.0), 1e-15);
  EXPECT_NEAR(q.total, -std::exp(-1.0), 1e-14);
}

TEST(ThermalFactor, Examples) {
  const auto model = two_level(one_mode(), ThermalState{1.0});
  for (double t : {0.5, 2.0}) EXPECT_EQ(thermal_factor(model, {0, 1}, t, 0.0), vacuum_factor(model, {0, 1}, t));
  EXPECT_NEAR(thermal_factor(model, {0, 1}, pi, 1.0), kThermalAtPi, 1e-15);
  EXPECT_NEAR(thermal_point(model, {0, 1}, pi).total, kThermalAtPi, 1e-15);
  EXPECT_NEAR(evaluate_point(model, {0, 1}, pi).total, kThermalAtPi, 1e-15);
  EXPECT_EQ(code_of([&] { thermal_factor(model, {0, 1}, 1.0, -1.0); }), ErrorCode::NegativeTemperature);

  // Ohmic, T = 0.01, t = 2: the ratio to the vacuum factor is within 10% of exp(-gamma t^2 T^2)
  const auto ohmic = two_level(OhmicBath{1.0, 1.0}, ThermalState{0.01});
  const double ratio = thermal_factor(ohmic, {0, 1}, 2.0, 0.01) / vacuum_factor(ohmic, {0, 1}, 2.0);
  EXPECT_LE(std::abs(ratio / std::exp(-4e-4) - 1.0), 0.1);
  EXPECT_NEAR(-std::log(ratio), 0.000648402084284, 1e-11);
}

TEST(BathExcitation, Examples) {
  const auto vac = two_level(one_mode(), VacuumState{});
  EXPECT_EQ(bath_excitation(vac, 0.0).delta, 0.0);
  EXPECT_EQ(bath_excitation(vac, 0.0).n0, 0.0);
  EXPECT_NEAR(bath_excitation(vac, pi).delta, 0.08, 1e-15);
  const auto fock = two_level(one_mode(), FockState{{3}});
  EXPECT_EQ(bath_excitation(fock, 1.7).delta, bath_excitation(vac, 1.7).delta);
  EXPECT_EQ(bath_excitation(fock, 1.7).n0, 3.0);
}

TEST(FluctuationRelation, Examples) {
  const auto vac = two_level(one_mode(), VacuumState{});
  const FluctuationRelation r0 = fluctuation_relation_check(vac, {0, 1}, 0.0);
  EXPECT_EQ(r0.predicted, 1.0);
  EXPECT_EQ(r0.residual, 0.0);
  const auto dead = two_level(one_mode(), VacuumState{}, 1.0, 1.0, 0.0);
  EXPECT_EQ(code_of([&] { fluctuation_relation_check(dead, {0, 1}, 1.0); }), ErrorCode::ZeroPopulationVariance);
}

// Properties

TEST(DecoherenceProperty, SymmetryUnderPairSwap) {
  test::Sampler rng(0xd5);
  for (int trial = 0; trial < 150; ++trial) {
    const RandomCase c = random_fock_case(rng);
    const double t = rng.uniform(0, 20);
    const DecoherencePoint a = decoherence_factor(c.model, c.pair, t);
    const DecoherencePoint b = decoherence_factor(c.model, c.pair.swapped(), t);
    EXPECT_EQ(a.total, b.total);
    EXPECT_NEAR(a.theta, -b.theta, 1e-12 * std::max(1.0, std::abs(a.theta)));

    const auto thermal = validate_config(c.model.system(), c.model.bath(), ThermalState{rng.uniform(0, 5)});
    EXPECT_EQ(thermal_factor(thermal, c.pair, t, thermal.temperature()),
              thermal_factor(thermal, c.pair.swapped(), t, thermal.temperature()));

    const Eigen::MatrixXcd rho = reduced_density_matrix(c.model, t);
    EXPECT_EQ(rho, rho.adjoint().eval());
  }
}

TEST(DecoherenceProperty, Boundedness) {
  test::Sampler rng(0xb0);
  for (int trial = 0; trial < 300; ++trial) {
    const RandomCase c = random_fock_case(rng, 12);
    const double t = rng.uniform(0, 30);
    const DecoherencePoint p = decoherence_factor(c.model, c.pair, t);
    EXPECT_LE(std::abs(p.total), 1.0 + 1e-12);
    EXPECT_GT(p.vacuum_part, 0.0);
    EXPECT_LE(p.vacuum_part, 1.0);
    EXPECT_LE(std::abs(p.total - p.vacuum_part * p.excitation_part), 1e-12 * std::abs(p.total) + 1e-300);
    EXPECT_LE(p.gaussian_total, 1.0);

    const auto thermal = validate_config(c.model.system(), c.model.bath(), ThermalState{rng.uniform(0, 5)});
    const double d = thermal_factor(thermal, c.pair, t, thermal.temperature());
    EXPECT_GT(d, 0.0);
    EXPECT_LE(d, 1.0);
  }
  for (double gamma : {0.5, 1.0, 2.0}) {
    const auto ohmic = two_level(OhmicBath{gamma, 1.5}, ThermalState{1.0}, rng.uniform(-2, 2));
    for (double t : {0.0, 0.3, 3.0, 30.0}) {
      const double d = thermal_factor(ohmic, {0, 1}, t, 1.0);
      EXPECT_GT(d, 0.0);
      EXPECT_LE(d, 1.0);
    }
  }
}

TEST(DecoherenceProperty, DecoherenceFreePairs) {
  test::Sampler rng(0xdf);
  for (int trial = 0; trial < 100; ++trial) {
    const double g = rng.uniform(-2, 2);
    const double om0 = rng.uniform(-2, 2);
    const double om1 = rng.uniform(-2, 2);
    const auto model = validate_config({{{om0, g, kH}, {om1, g, kH}}},
                                       DiscreteBath{{{rng.uniform(0.2, 3), {rng.uniform(0, 0.5), 0.0}}}},
                                       FockState{{rng.integer(0, 6)}});
    const double t = rng.uniform(0, 20);
    const DecoherencePoint p = decoherence_factor(model, {0, 1}, t);
    EXPECT_EQ(p.total, 1.0);
    EXPECT_NEAR(p.theta, (om1 - om0) * t, 1e-12 * std::max(1.0, std::abs(p.theta)));
  }
}

TEST(DecoherenceProperty, InitialCoherenceIsComplete) {
  test::Sampler rng(0x1c);
  for (int trial = 0; trial < 50; ++trial) {
    const RandomCase c = random_fock_case(rng);
    const DecoherenceSeries s = decoherence_series(c.model, c.pair, {0.0, 0.5, 1.0});
    EXPECT_EQ(s.points.front().total, 1.0);
    const PhaseVariance pv = phase_variance(c.model, c.pair, 0.0);
    EXPECT_EQ(pv.vacuum_var, 0.0);
    EXPECT_EQ(pv.excitation_var, 0.0);
  }
}

TEST(DecoherenceProperty, ThermalMonotonicInTemperature) {
  test::Sampler rng(0x7e);
  for (int trial = 0; trial < 60; ++trial) {
    const RandomCase c = random_fock_case(rng, 0);
    const auto model = validate_config(c.model.system(), c.model.bath(), ThermalState{0.0});
    const double t = rng.uniform(0.01, 15);
    double last = 2.0;
    for (double T = 0.0; T <= 8.0; T += 0.25) {
      const double d = thermal_factor(model, c.pair, t, T);
      EXPECT_LE(d, last);
      last = d;
    }
  }
  const auto ohmic = two_level(OhmicBath{1.0, 1.0}, ThermalState{0.0});
  for (double t : {0.5, 2.0, 8.0}) {
    double last = 2.0;
    for (double T : {0.0, 0.01, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0}) {
      const double d = thermal_factor(ohmic, {0, 1}, t, T);
      EXPECT_LE(d, last);
      last = d;
    }
  }
}

TEST(DecoherenceProperty, GaussianAgreesInWeakExcitationRegime) {
  test::Sampler rng(0x9a);
  int checked = 0;
  for (int trial = 0; trial < 2000 && checked < 200; ++trial) {
    const RandomCase c = random_fock_case(rng, 10);
    const double t = rng.uniform(0, 10);
    const double dg = c.model.delta_g(c.pair);
    const auto occ = c.model.occupations();
    double worst = 0.0;
    for (std::size_t j = 0; j < occ.size(); ++j)
      worst = std::max(worst, occ[j] * z_factor(dg, c.model.modes()[j].xi, c.model.modes()[j].omega, t));
    if (worst > 0.01) continue;
    ++checked;
    const DecoherencePoint p = decoherence_factor(c.model, c.pair, t);
    EXPECT_LE(std::abs(p.gaussian_total - p.total), 1e-3);
  }
  EXPECT_GE(checked, 50);
}

TEST(DecoherenceProperty, ThermalEqualsBoltzmannWeightedFockSum) {
  test::Sampler rng(0x7b);
  for (int trial = 0; trial < 100; ++trial) {
    const double omega = rng.uniform(0.5, 2.0);
    const double xi = rng.uniform(0.05, 0.4);
    const double T = rng.uniform(0.1, 4.0);
    const double t = rng.uniform(0.0, 10.0);
    const auto model = two_level(DiscreteBath{{{omega, {xi, 0.0}}}}, ThermalState{T});
    const double z = z_factor(1.0, {xi, 0.0}, omega, t);
    const double ref = static_cast<double>(test::boltzmann_fock_sum(omega, T, z, 500));
    EXPECT_LE(rel(thermal_factor(model, {0, 1}, t, T), ref), 1e-8) << omega << " " << xi << " " << T << " " << t;
  }
}

TEST(DecoherenceProperty, HighTemperatureScalingIsLinear) {
  test::Sampler rng(0x41);
  for (int trial = 0; trial < 50; ++trial) {
    DiscreteBath bath;
    double w_max = 0.0;
    for (unsigned j = 0, n = rng.integer(1, 3); j < n; ++j) {
      bath.modes.push_back({rng.uniform(0.2, 2.0), {rng.uniform(0.05, 0.3), 0.0}});
      w_max = std::max(w_max, bath.modes.back().omega);
    }
    const auto model = two_level(bath, ThermalState{0.0}, rng.uniform(0.5, 2));
    const double t = rng.uniform(0.1, 10);
    const double T = w_max / rng.uniform(0.001, 0.01);
    // -ln(D^[T] / D^(0)); the factors themselves underflow this hot
    auto excess = [&](double temp) { return thermal_exponent(model, {0, 1}, t, temp); };
    EXPECT_NEAR(excess(2.0 * T) / excess(T), 2.0, 0.02);
  }
}

TEST(DecoherenceProperty, FluctuationIdentityAndInitialStateIndependence) {
  test::Sampler rng(0xf1);
  for (int trial = 0; trial < 200; ++trial) {
    const RandomCase c = random_fock_case(rng);
    if (!(g0_squared_mean(c.model) > 0.0)) continue;
    const double t = rng.uniform(0, 20);
    EXPECT_LE(fluctuation_relation_check(c.model, c.pair, t).residual, 1e-12);
    const auto vac = validate_config(c.model.system(), c.model.bath(), VacuumState{});
    EXPECT_EQ(bath_excitation(vac, t).delta, bath_excitation(c.model, t).delta);
    EXPECT_GE(bath_excitation(c.model, t).delta, 0.0);
  }
}
