#pragma once

#include <cstdint>
#include <vector>

#include "vbqc/link.hpp"
#include "vbqc/noise.hpp"

namespace vbqc {

struct VerifyConfig {
  long n_rounds = 24000;
  double tau = 0.6;       // test fraction
  double omega = 0.215;   // acceptance threshold
  double p_max = 0.185;   // assumed honest failure rate
  double omega_max = 0.25;

  // floor(tau * n)
  long test_rounds() const;
  void validate() const;
};

// 1 - (3/4)^(2/q) for a q-qubit cluster.
double omega_max(int q);

struct TrapEstimates {
  double p_trap1;
  double p_dummy;
  double p_trap2;
  double p_mean;
};

TrapEstimates trap_estimates(const FidelityBudget& b);

struct Decision {
  bool accept;
  double p_fail_hat;
};

// Accept iff k / t < omega.
Decision accept(long failures, long tests, double omega);

struct HoeffdingBounds {
  double pr_reject_bound;      // honest server with failure rate p_true
  double pr_accept_bad_bound;  // server failing at omega_max
};

// exp(-2 t d^2) for each direction.  Throws if omega is below p_true or above
// omega_max.
HoeffdingBounds hoeffding_rates(const VerifyConfig& cfg, double p_true);

// Exact binomial upper tail Pr[k >= ceil(omega t)], the rejection probability.
double exact_reject_probability(long tests, double p_true, double omega);

struct DecayPoint {
  long n;
  long tests;
  double reject_rate;
  double reject_stderr;
  double bound;
};

struct DecayStudy {
  std::vector<DecayPoint> points;
  double slope = 0;      // d ln(reject rate) / dn
  double r_squared = 0;
  double halving_rounds = 0;
};

// Rejection frequency of an honest server for each n.  Trials sample the
// failure count from a binomial tilted to the threshold and reweight, so tail
// probabilities far below 1/trials are still resolved.  Trial i of point j
// uses its own stream derived from (seed, j, i).
DecayStudy monte_carlo_decay(const std::vector<long>& n_grid, double p_true, double omega, double tau, int trials,
                             std::uint64_t seed);

// Per-position trap failure in three-qubit test rounds, from the full
// simulator (two interaction steps, final B measurement).
std::vector<double> three_step_trap_profile(const NoiseModel& noise, const Link& link, long rounds, std::uint64_t seed);

}  // namespace vbqc
