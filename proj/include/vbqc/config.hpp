#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "vbqc/session.hpp"
#include "vbqc/verify.hpp"

namespace vbqc {

constexpr int kConfigSchemaVersion = 1;

// Invalid or unreadable configuration.  what() names the offending field (as
// a dotted path) or the parse position.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RunMode { in_process, two_process };

struct VerifyStudy {
  VerifyConfig cfg;
  std::vector<long> n_grid{3000, 6000, 9000, 12000, 15000, 18000, 21000, 24000};
  int trials = 2000;
  std::uint64_t seed = 1;
};

// Overrides for the observed column of the leakage table.
struct LeakageOverrides {
  double q_dev = 0.01324;
  double lambda0 = 126.0;
  double lambda_alt = 132.0;
  long tomography_shots = 20000;
  std::uint64_t seed = 1;
};

struct RunConfig {
  SessionConfig session;
  RunMode mode = RunMode::in_process;
  std::string endpoint = "127.0.0.1:7390";
  std::string out_dir = ".";
  VerifyStudy verify;
  LeakageOverrides leakage;

  // Throws ConfigError.
  void validate() const;
};

// Every field is optional except schema_version; missing fields keep their
// defaults.  Unknown fields and type mismatches throw ConfigError.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

// Full config as pretty-printed JSON, every field present.
std::string dump_run_config(const RunConfig& cfg);

}  // namespace vbqc
