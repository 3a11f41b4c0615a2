#include "vbqc/polarisation.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace vbqc;

namespace {

Eigen::Vector3d bloch_of(const Vec2& v) {
  auto b = bloch_vector(QuantumState::pure(v));
  return {b[0], b[1], b[2]};
}

double axis_distance_deg(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  double c = std::clamp(std::abs(a.normalized().dot(b.normalized())), 0.0, 1.0);
  return std::acos(c) * 180.0 / kPi;
}

}  // namespace

TEST(Waveplate, UnitaryHasUnitDeterminant) {
  for (double r : {0.25, 0.2584, 0.5})
    for (double a : {0.0, 0.3, -1.2}) EXPECT_NEAR(std::abs(WaveplateSpec{r, a}.unitary().determinant()), 1.0, 1e-12);
}

TEST(Analyser, ZeroVoltagesGiveIdentityUpToPhase) {
  EomSpec eom;
  WaveplateSpec no_plate{0.0, 0.0};
  Mat2 u = analyser_unitary(eom, eom, 0.0, 0.0, no_plate);
  EXPECT_NEAR(std::abs(u(0, 0)), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(u(0, 1)), 0.0, 1e-12);
}

TEST(Analyser, HalfWaveOnFirstEomSwapsPorts) {
  EomSpec eom;
  WaveplateSpec qwp{0.25, 0.0};
  Mat2 u = analyser_unitary(eom, eom, kPi, 0.0, qwp);
  // H goes to the V port and vice versa.
  EXPECT_NEAR(std::norm((u * Vec2(1, 0))(1)), 1.0, 1e-12);
  EXPECT_NEAR(std::norm((u * Vec2(0, 1))(0)), 1.0, 1e-12);
}

TEST(Analyser, UnitaryForRandomVoltages) {
  Rng rng(1);
  std::uniform_real_distribution<double> v(-5, 5);
  EomSpec a{0.7, 0.1}, b{1.3, -0.4};
  for (int i = 0; i < 200; ++i) {
    Mat2 u = analyser_unitary(a, b, v(rng), v(rng), {kQuarterWaveMeasured, 0.2});
    EXPECT_LT((u.adjoint() * u - Mat2::Identity()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Analyser, VoltageGridCoversProtocolBases) {
  // phi spans [0, pi] over the grid; one basis needs only one of its two states covered.
  EomSpec eom{kPi / 10.0, 0.0};
  WaveplateSpec qwp{0.25, 0.0};
  std::vector<Eigen::Vector3d> targets;
  for (int k = 0; k < 4; ++k) targets.push_back(bloch_of(ideal_analyser_for_equatorial(k * kPi / 4).adjoint() * Vec2(1, 0)));
  targets.push_back({0, 0, 1});
  double worst = 0.0;
  for (const auto& t : targets) {
    double best = 180.0;
    for (int i = 0; i <= 20; ++i)
      for (int j = 0; j <= 20; ++j) {
        Mat2 u = analyser_unitary(eom, eom, i * 0.5, j * 0.5, qwp);
        best = std::min(best, axis_distance_deg(bloch_of(u.adjoint() * Vec2(1, 0)), t));
      }
    worst = std::max(worst, best);
  }
  EXPECT_LT(worst, 5.0);
}

TEST(TransmittedFraction, TextbookCases) {
  WaveplateSpec q0{0.25, 0.0}, h0{0.5, 0.0};
  EXPECT_NEAR(transmitted_fraction(JonesState::H(), q0, h0), 1.0, 1e-12);
  EXPECT_NEAR(transmitted_fraction(JonesState::V(), q0, h0), 0.0, 1e-12);
  EXPECT_NEAR(transmitted_fraction(JonesState::H(), q0, {0.5, kPi / 8}), 0.5, 1e-12);
}

TEST(TransmittedFraction, MeasuredAndIdealRetardancesStayClose) {
  Rng rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    JonesState psi = JonesState::from_angles(std::acos(1 - 2 * u(rng)), 2 * kPi * u(rng));
    for (double q : {-kPi / 4, 0.0, kPi / 4})
      for (double h : {-kPi / 8, 0.0, kPi / 8, kPi / 4}) {
        double ideal = transmitted_fraction(psi, {0.25, q}, {0.5, h});
        double measured = transmitted_fraction(psi, {kQuarterWaveMeasured, q}, {kHalfWaveMeasured, h});
        worst = std::max(worst, std::abs(ideal - measured));
      }
  }
  EXPECT_LT(worst, 0.02);
}

TEST(TransmittedFraction, RetardanceInRadiansWouldBeFarOff) {
  JonesState psi = JonesState::from_angles(1.0, 0.5);
  double worst = 0.0;
  for (double q : {-kPi / 4, 0.0, kPi / 4})
    for (double h : {-kPi / 8, 0.0, kPi / 8, kPi / 4}) {
      double turns = transmitted_fraction(psi, {kQuarterWaveMeasured, q}, {kHalfWaveMeasured, h});
      double mistake = transmitted_fraction(psi, {kQuarterWaveMeasured / (2 * kPi), q}, {kHalfWaveMeasured / (2 * kPi), h});
      worst = std::max(worst, std::abs(turns - mistake));
    }
  EXPECT_GT(worst, 0.2);
}

TEST(PolarisationFit, NoiselessRoundTrip) {
  PolarisationFit f = fit_polarisation_state(synthetic_scan(JonesState::from_angles(kPi / 3, kPi / 5)));
  EXPECT_NEAR(f.theta, kPi / 3, 1e-6);
  EXPECT_NEAR(f.phi, kPi / 5, 1e-6);
  EXPECT_TRUE(f.phase_identifiable);
  EXPECT_FALSE(f.ill_conditioned);
  EXPECT_LT(f.residual, 1e-12);
}

TEST(PolarisationFit, RandomNoiselessRoundTrips) {
  Rng rng(3);
  std::uniform_real_distribution<double> th(0.1, kPi - 0.1), ph(0, 2 * kPi);
  for (int i = 0; i < 100; ++i) {
    double t = th(rng), p = ph(rng);
    PolarisationFit f = fit_polarisation_state(synthetic_scan(JonesState::from_angles(t, p)));
    EXPECT_NEAR(f.theta, t, 1e-6);
    double dphi = std::remainder(f.phi - p, 2 * kPi);
    EXPECT_NEAR(dphi, 0.0, 1e-6);
  }
}

TEST(PolarisationFit, HorizontalInputHasNoPhase) {
  PolarisationFit f = fit_polarisation_state(synthetic_scan(JonesState::H()));
  EXPECT_NEAR(f.theta, 0.0, 1e-4);
  EXPECT_FALSE(f.phase_identifiable);
}

TEST(PolarisationFit, NoisyScanWithinTolerance) {
  Rng rng(4);
  std::normal_distribution<double> noise(0.0, 0.01);
  for (int i = 0; i < 20; ++i) {
    auto scan = synthetic_scan(JonesState::from_angles(kPi / 3, kPi / 5));
    for (auto& s : scan) s.t += noise(rng);
    PolarisationFit f = fit_polarisation_state(scan);
    EXPECT_NEAR(f.theta, kPi / 3, 0.05);
    EXPECT_NEAR(std::remainder(f.phi - kPi / 5, 2 * kPi), 0.0, 0.05);
  }
}

TEST(PolarisationFit, FlatScanIsIllConditioned) {
  std::vector<ScanPoint> flat;
  for (double q : {-kPi / 4, 0.0, kPi / 4})
    for (double h : {-kPi / 8, 0.0, kPi / 8, kPi / 4}) flat.push_back({q, h, 0.5});
  EXPECT_TRUE(fit_polarisation_state(flat).ill_conditioned);
  EXPECT_THROW(fit_polarisation_state({{0, 0, 1}, {0, 0.1, 0.9}}), std::invalid_argument);
}

TEST(DirectInversion, SignConvention) {
  // All readouts in the p outcome for Z: b_Z = -1.
  auto b = direct_inversion({{'X', 50, 50}, {'Y', 50, 50}, {'Z', 0, 100}});
  EXPECT_DOUBLE_EQ(b[2], -1.0);
  EXPECT_DOUBLE_EQ(b[0], 0.0);
}

TEST(DirectInversion, EqualCountsGiveOrigin) {
  auto b = direct_inversion({{'X', 10, 10}, {'Y', 7, 7}, {'Z', 3, 3}});
  EXPECT_DOUBLE_EQ(b[0], 0.0);
  EXPECT_DOUBLE_EQ(b[1], 0.0);
  EXPECT_DOUBLE_EQ(b[2], 0.0);
}

TEST(DirectInversion, SampledPlusState) {
  Rng rng(5);
  QuantumState plus = QuantumState::pure(ket_theta(0));
  std::vector<BasisCounts> c;
  for (char basis : {'X', 'Y', 'Z'}) c.push_back(sample_counts(plus, basis, 100000, rng));
  auto b = direct_inversion(c);
  EXPECT_NEAR(b[0], 1.0, 0.02);
  EXPECT_NEAR(b[1], 0.0, 0.02);
  EXPECT_NEAR(b[2], 0.0, 0.02);
}

TEST(DirectInversion, RejectsMissingOrEmpty) {
  EXPECT_THROW(direct_inversion({{'X', 1, 1}, {'Y', 1, 1}}), std::invalid_argument);
  EXPECT_THROW(direct_inversion({{'X', 1, 1}, {'Y', 1, 1}, {'Z', 0, 0}}), std::invalid_argument);
}

TEST(Povm, IdealDetectsTransmittedPhoton) {
  auto p = povm_probs(DetectorPovm{}, JonesState::H());
  EXPECT_NEAR(p[0], 1.0, 1e-12);
  EXPECT_NEAR(p[1], 0.0, 1e-12);
  EXPECT_NEAR(p[2], 0.0, 1e-12);
}

TEST(Povm, EqualEfficiencyLossIsStateIndependent) {
  Rng rng(6);
  std::uniform_real_distribution<double> u(0, 1);
  DetectorPovm povm{0.37, 0.37, 0.0, 0.0};
  for (int i = 0; i < 20; ++i) {
    auto p = povm_probs(povm, JonesState::from_angles(kPi * u(rng), 2 * kPi * u(rng)));
    EXPECT_NEAR(p[2], 1 - 0.37, 1e-12);
  }
}

TEST(Povm, ExtinctionLeakage) {
  DetectorPovm povm{0.8, 0.7, 0.5e-4, 1.3e-4};
  auto p = povm_probs(povm, JonesState::V());
  EXPECT_NEAR(p[0], 0.7 * 0.5e-4, 1e-15);
  EXPECT_NEAR(p[1], 0.8 * (1 - 0.5e-4), 1e-15);
}

TEST(Povm, CompleteAndPositiveAtCorners) {
  for (int mask = 0; mask < 16; ++mask) {
    DetectorPovm povm{double(mask & 1), double((mask >> 1) & 1), double((mask >> 2) & 1), double((mask >> 3) & 1)};
    auto f = povm.elements();
    EXPECT_LT((f[0] + f[1] + f[2] - Mat2::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    for (const Mat2& e : f) {
      Eigen::SelfAdjointEigenSolver<Mat2> es(e);
      EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
    }
  }
  EXPECT_THROW(DetectorPovm({1.2, 1, 0, 0}).elements(), std::invalid_argument);
}

TEST(BasisOverlap, OppositePortsOfOneSettingAreOrthogonal) {
  Mat2 u = ideal_analyser_for_equatorial(3 * kPi / 4);
  EXPECT_NEAR(basis_overlap(u, u), 0.0, 1e-12);
}

TEST(BasisOverlap, ZRotationMismatch) {
  Mat2 u = ideal_analyser_for_equatorial(kPi / 4);
  for (double phi : {0.01, 0.08, 0.5, 1.3}) {
    Mat2 u2 = u * gates::rz(-phi);
    EXPECT_NEAR(basis_overlap(u, u2), std::pow(std::sin(phi / 2), 2), 1e-12);
  }
}

TEST(BasisOverlap, DefaultImperfectModelMedian) {
  ImperfectAnalyser model;
  std::vector<double> overlaps;
  for (int k = 0; k < 4; ++k) {
    Mat2 u = ideal_analyser_for_equatorial(k * kPi / 4);
    overlaps.push_back(basis_overlap(model.p_port(u), model.s_port(u)));
  }
  Mat2 z = ideal_analyser_for_z(0);
  overlaps.push_back(basis_overlap(model.p_port(z), model.s_port(z)));
  std::sort(overlaps.begin(), overlaps.end());
  EXPECT_NEAR(overlaps[2], 0.0016, 1e-6);
  EXPECT_NEAR(mismatch_from_overlap(0.0016), model.port_mismatch_rad, 1e-12);
}

TEST(Steering, AnalyserPortsSteerIonIntoTargetPair) {
  // Project (|H>|0> + |V>|1>)/sqrt2 onto each port state.
  for (int k = 0; k < 8; ++k) {
    Mat2 u = ideal_analyser_for_equatorial(k * kPi / 4);
    for (int port = 0; port < 2; ++port) {
      Vec2 a = u.adjoint() * ket_bit(port);
      Vec2 ion(std::conj(a(0)), std::conj(a(1)));
      double f = std::norm(ket_theta(k * kPi / 4 + port * kPi).dot(ion.normalized()));
      EXPECT_NEAR(f, 1.0, 1e-12);
    }
  }
}
