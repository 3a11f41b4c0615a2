#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "vbqc/noise.hpp"
#include "vbqc/polarisation.hpp"
#include "vbqc/protocol.hpp"

namespace vbqc {

// Step durations in microseconds.  rsp_mean is informational; the RSP time
// actually charged is attempts * attempt_us.
struct StepDurations {
  double rsp_mean = 100;
  double transfer = 400;
  double iswap = 340;
  double readout = 135;
  double deshelve = 50;
  double cooling = 230;
  double outcome_comm = 150;

  double fixed_sum() const { return transfer + iswap + readout + deshelve + cooling + outcome_comm; }
};

struct LinkConfig {
  double p_herald_per_attempt = 0.01;
  std::int64_t timeout_attempts = 1000;
  double attempt_us = 1.0;
  StepDurations durations;

  void validate() const;
};

struct TimingModel {
  double lifetime_ns = 8.0;
  double delay_s_ns = 6.57;
  double delay_p_ns = 0.0;
  double jitter_ns = 0.3;
  double resolution_ns = 1.0;
  // Zeeman splitting, 2 pi x 14 MHz.
  double omega_z_rad_per_ns = 2 * kPi * 0.014;

  double delay(Detector d) const { return d == Detector::s ? delay_s_ns : delay_p_ns; }
  // Phase the ion accumulates relative to the p branch.
  double detector_phase(Detector d) const { return omega_z_rad_per_ns * (delay(d) - delay_p_ns); }
  void validate() const;
};

struct Link {
  LinkConfig cfg;
  TimingModel timing;
  DetectorPovm povm;
  std::optional<ImperfectAnalyser> analyser;  // ideal analyser when empty
};

struct HeraldRecord {
  Detector detector = Detector::p;
  std::int64_t attempts = 1;
  std::int64_t timestamp_ns = 0;
};

// What the client asks the photon measurement to steer into, before the
// herald flips it.
struct RspTarget {
  bool z_eigen = false;
  Octant theta;
  int z = 0;

  static RspTarget equatorial(Octant t) { return {false, t, 0}; }
  static RspTarget z_state(int z) { return {true, Octant(0), z}; }
};

struct RspResult {
  std::optional<HeraldRecord> herald;  // empty on timeout
  QuantumState state;                  // steered network qubit
  int c = 0;                           // 1 for an s click
};

std::int64_t sample_attempts(const LinkConfig& cfg, Rng& rng);

// Network qubit left by projecting the ion-photon pair (|H0> + |V1>)/sqrt2
// with the analyser set for the target, for a given click.  Noise free.
QuantumState steer_by_projection(const RspTarget& target, const Link& link, Detector click);

RspResult rsp_round(const RspTarget& target, const Link& link, const NoiseModel& noise, Rng& rng);

std::int64_t herald_timestamp(Detector d, const TimingModel& tm, Rng& rng);

// Exact probabilities of the quantised timestamps: exponential emission
// convolved with Gaussian jitter, binned by floor(t / resolution).
std::map<std::int64_t, double> arrival_histogram(Detector d, const TimingModel& tm);

// attempts * attempt_us plus the fixed durations for every run of the step.
double round_latency(const LinkConfig& cfg, std::int64_t attempts, int retries);

struct InitOutcome {
  bool timed_out = false;
  int retries = 0;
  std::int64_t attempts = 0;
  int c = 0;
  ServerState state;
};

// Repeats RSP and the transfer until the error flag is clear.  The target is
// reused on every retry; the herald bit is fresh each time.
InitOutcome init_with_retry(const RoundPlan& plan, const Link& link, const NoiseModel& noise, Rng& rng);

}  // namespace vbqc
