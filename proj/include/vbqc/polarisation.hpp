#pragma once

#include <array>
#include <vector>

#include "vbqc/qcore.hpp"

namespace vbqc {

// Polarisation amplitudes in the {H, V} basis.  H is the transmitted (p) port
// of the analyser's polarising beam splitter and V the reflected (s) port.
struct JonesState {
  Vec2 amp = Vec2(1, 0);

  JonesState() = default;
  explicit JonesState(const Vec2& a);
  // cos(theta/2)|H> + sin(theta/2) e^{i phi}|V>
  static JonesState from_angles(double theta, double phi);
  static JonesState H() { return JonesState(Vec2(1, 0)); }
  static JonesState V() { return JonesState(Vec2(0, 1)); }
};

struct WaveplateSpec {
  double retardance = 0.25;  // turns
  double angle = 0.0;        // radians

  // R(a) diag(e^{i G/2}, e^{-i G/2}) R(-a) with G = 2 pi retardance.
  Mat2 unitary() const;
};

constexpr double kQuarterWaveMeasured = 0.2584;
constexpr double kHalfWaveMeasured = 0.5000;

struct EomSpec {
  double phase_per_volt = 1.0;  // rad / V
  double offset = 0.0;          // rad

  double phase(double volts) const { return offset + phase_per_volt * volts; }
  // exp(-i phi(U)/2 X)
  Mat2 unitary(double volts) const { return gates::rx(phase(volts)); }
};

// Lossy detection after the beam splitter.  eps_s is the fraction of an
// s-polarised photon routed to the p port and eps_p the converse.
struct DetectorPovm {
  double eta_s = 1.0;
  double eta_p = 1.0;
  double eps_s = 0.0;
  double eps_p = 0.0;

  // {F_p, F_s, F_loss} in the analyser frame.
  std::array<Mat2, 3> elements() const;
  void validate() const;
};

// R(U_b) Q R(U_a); the beam splitter then projects onto H (p) or V (s).
Mat2 analyser_unitary(const EomSpec& eom_a, const EomSpec& eom_b, double u_a, double u_b, const WaveplateSpec& internal_qwp);

// |<psi| Q(q) H(h) |H>|^2
double transmitted_fraction(const JonesState& psi, const WaveplateSpec& qwp, const WaveplateSpec& hwp);

struct ScanPoint {
  double q_rad;
  double h_rad;
  double t;
};

struct PolarisationFit {
  double theta = 0.0;
  double phi = 0.0;
  double residual = 0.0;
  bool phase_identifiable = true;
  bool ill_conditioned = false;
};

PolarisationFit fit_polarisation_state(const std::vector<ScanPoint>& scan, double qwp_retardance = kQuarterWaveMeasured,
                                       double hwp_retardance = kHalfWaveMeasured);

std::vector<ScanPoint> synthetic_scan(const JonesState& psi, double qwp_retardance = kQuarterWaveMeasured,
                                      double hwp_retardance = kHalfWaveMeasured);

// Readout counts for one tomography basis.  Outcome s is bit 1 and counts the
// +1 eigenvalue of the basis Pauli after the herald-dependent inversion.
struct BasisCounts {
  char basis;  // 'X', 'Y' or 'Z'
  long n_s;
  long n_p;
};

std::array<double, 3> direct_inversion(const std::vector<BasisCounts>& counts);

BasisCounts sample_counts(const QuantumState& state, char basis, long shots, Rng& rng);

// (p_p, p_s, p_loss)
std::array<double, 3> povm_probs(const DetectorPovm& povm, const JonesState& psi);

// |<psi-|psi+>|^2 where psi+ = u1^dag |H> and psi- = u2^dag |V>.
double basis_overlap(const Mat2& u1, const Mat2& u2);

// Rotation between the two heralded states that yields a given overlap.
double mismatch_from_overlap(double overlap);

// Analyser with a residual rotation of the s-port state about the qubit Z
// axis.  The default mismatch gives a median overlap of 0.0016 over the
// protocol's measurement bases.
struct ImperfectAnalyser {
  double port_mismatch_rad = 0.080021348707977849;

  // Unitaries for the p and s ports when the ideal setting is u.
  Mat2 p_port(const Mat2& u) const { return u; }
  Mat2 s_port(const Mat2& u) const { return u * gates::rz(-port_mismatch_rad); }
};

// Analyser unitary whose p port transmits the photon state that steers the
// ion into |theta> (or into |z> for a Z-basis target).
Mat2 ideal_analyser_for_equatorial(double theta);
Mat2 ideal_analyser_for_z(int z);

}  // namespace vbqc
