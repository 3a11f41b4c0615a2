#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "vbqc/link.hpp"
#include "vbqc/noise.hpp"
#include "vbqc/qcore.hpp"

namespace vbqc {

struct StateEnsemble {
  std::vector<std::pair<double, QuantumState>> states;

  void validate() const;
};

// Holevo quantity in bits.
double holevo(const StateEnsemble& ensemble);

struct HolevoEstimate {
  double approx;  // leading order
  double exact;   // explicit four-basis ensemble
};

// Four bases theta in {0, pi/4, pi/2, 3pi/4}; the p herald leaves |theta>,
// the s herald |theta + pi>.  Every basis sees the p herald with probability
// 1/2 + q_dev (the sign choice that leaks least).
StateEnsemble imbalance_ensemble(double q_dev);
HolevoEstimate holevo_imbalance(double q_dev);

// Same bases with equal herald weights; the s branch carries an extra Rz(phi).
StateEnsemble rotated_ensemble(double phi);
HolevoEstimate holevo_rotated(double phi);

// R(q) = 1 + q log2 q + (1-q) log2(1-q)
double binary_mutual_entropy(double q);

using TimeHistogram = std::map<std::int64_t, double>;

// Expected information from guessing the detector by maximum likelihood from
// the timestamp.  Histograms need not be normalised; bins missing from one are
// zero there.
double ml_timing_gain(const TimeHistogram& hist_s, const TimeHistogram& hist_p, double prior_s = 0.5);

// Fisher information of one sample of an exponential with mean lambda.
double fisher_exponential(double lambda);
// KL(Exp(mean lambda0) || Exp(mean lambda)) in bits.
double kl_exponential(double lambda0, double lambda);

// One reconstructed steered state: basis index 0..3, herald weight, state.
struct BranchState {
  int basis;
  double weight;
  QuantumState state;
};

// Holevo quantity of the four herald-averaged basis states.
double tomographic_holevo(const std::vector<BranchState>& branches);

// Steered states for the four bases and both clicks as the link produces them
// (detector phase and F_theta noise included).  With shots > 0 each state is
// replaced by its direct-inversion tomogram from shots per Pauli basis.
std::vector<BranchState> simulate_tomography(const Link& link, const NoiseModel& noise, double q_dev, long shots,
                                             Rng& rng);

struct LeakageConfig {
  Link link;
  NoiseModel noise;
  double q_dev = 0.01324;      // herald imbalance 1/2 + q_dev
  double lambda0 = 126.0;      // mean attempts
  double lambda_alt = 132.0;   // mean attempts under the other setting
  long tomography_shots = 20000;
  std::uint64_t seed = 1;

  static LeakageConfig observed();
  static LeakageConfig optimised();
  static LeakageConfig ideal();
};

struct LeakageReport {
  struct {
    double angles = 0;
    double herald_efficiency = 0;
    double herald_efficiency_kl = 0;  // relative entropy, reported alongside
    double herald_delay = 0;
  } classical;
  struct {
    double basis = 0;
    double basis_phi = 0;
    double imbalance = 0;
    double measured_tomographic = 0;
  } quantum;
};

LeakageReport build_leakage_table(const LeakageConfig& cfg);

}  // namespace vbqc
