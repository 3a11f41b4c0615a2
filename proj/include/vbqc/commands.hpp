#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vbqc/config.hpp"
#include "vbqc/leakage.hpp"
#include "vbqc/polarisation.hpp"
#include "vbqc/session.hpp"
#include "vbqc/verify.hpp"

namespace vbqc {

namespace exit_code {
constexpr int ok = 0;
constexpr int failure = 1;  // I/O errors, failed self-checks
constexpr int config = 2;
constexpr int session_abort = 3;
}  // namespace exit_code

// %.9g
std::string format_sig9(double x);

// One line per round.  Columns:
// round,round_type,alphas,decoded,verdicts,raw,init_retries,restarts,attempts,latency_us
// alphas and raw are ';'-separated; verdicts are position:pass|fail pairs;
// decoded is empty for test rounds.
std::string round_log_csv(const SessionResult& r);
// Per-alpha means of the decoded outcome and trap failure per position.
std::string summary_json(const SessionConfig& cfg, const SessionResult& r);

// Columns n,reject_rate,bound.
std::string decay_csv(const DecayStudy& s);

LeakageConfig observed_leakage_config(const RunConfig& cfg);
LeakageConfig optimised_leakage_config(const RunConfig& cfg);
std::string leakage_json(const LeakageReport& observed, const LeakageReport& optimised);

// CSV readers for calibrate-fit.  Throw ConfigError naming the line.
std::vector<ScanPoint> read_scan_csv(const std::string& path);
std::vector<BasisCounts> read_counts_csv(const std::string& path);

struct SteeringCheck {
  int targets = 0;
  double worst_correctness_error = 0;  // 1 - fidelity
  double tv_plain = 0;                 // distinguisher measures its qubit
  double tv_corrected = 0;             // distinguisher applies U2 first
  double tv_broken = 0;                // simulator without Z^m1
  bool pass = false;
};
SteeringCheck run_steering_check(std::uint64_t seed, int targets = 1000, long samples = 100000);

struct CommandContext {
  RunConfig cfg;
  std::string scan_csv;
  std::string counts_csv;
  std::ostream* out = nullptr;  // progress and short reports; null for none
};

int cmd_simulate(const CommandContext& ctx);
int cmd_connect(const CommandContext& ctx);
int cmd_serve(const CommandContext& ctx);
int cmd_leakage(const CommandContext& ctx);
int cmd_verify(const CommandContext& ctx);
int cmd_calibrate_fit(const CommandContext& ctx);
int cmd_steering_check(const CommandContext& ctx);

// Dispatches by subcommand name and maps exceptions to exit codes.
int run_command(const std::string& name, const CommandContext& ctx, std::ostream& err);

}  // namespace vbqc
