#pragma once

#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include "vbqc/link.hpp"
#include "vbqc/noise.hpp"
#include "vbqc/protocol.hpp"
#include "vbqc/wire.hpp"

namespace vbqc {

class SessionAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ProtocolViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parameters both sides agree on before the session.  Nothing here depends on
// client secrets.
struct PublicParams {
  int q = 1;
  FinalBasis final_basis = FinalBasis::Z;
  std::int64_t rounds = 1;
  std::int64_t timeout_attempts = 1000;
};

struct SessionConfig {
  int q = 1;
  FinalBasis final_basis = FinalBasis::Z;
  std::int64_t rounds = 1000;
  double test_fraction = 0.5;
  // Round i uses alpha_schedule[i % size].  Each entry has q angles, q+1
  // with the B final basis.
  std::vector<std::vector<Octant>> alpha_schedule{{Octant(0)}};
  Link link;
  NoiseModel noise;
  bool calibration_residual = true;
  std::uint64_t seed_client = 1;
  std::uint64_t seed_server = 2;
  int max_restarts = 100;

  PublicParams public_params() const { return {q, final_basis, rounds, link.cfg.timeout_attempts}; }
  void validate() const;
};

// Strength of the extra depolarisation that brings the mean steering fidelity
// from F_theta (with the detector phase) down to F_theta'.
double calibration_residual_lambda(const FidelityBudget& budget, const TimingModel& timing);

struct LogEntry {
  bool inbound;  // received by the server
  WireMessage msg;
};

// Server controller: checks message order and round numbers, relays
// measurement commands to its device and reports readouts back.
class ServerRole {
 public:
  explicit ServerRole(PublicParams p);

  // Replies to send to the client.  Throws ProtocolViolation on a message
  // that does not fit the current state; the round is then reset.
  std::vector<WireMessage> on_message(const WireMessage& m);
  void reset_round();

  const std::vector<LogEntry>& log() const { return log_; }
  bool finished() const { return finished_; }
  std::int64_t completed_rounds() const { return completed_; }
  bool in_round() const { return phase_ != Phase::idle; }
  std::int64_t current_round() const { return round_; }

 private:
  enum class Phase { idle, init_herald, init_merr, step_herald, step_delta, step_outcome, final_delta, final_outcome, round_end };

  std::vector<WireMessage> handle(const WireMessage& m);
  void expect(bool ok, const WireMessage& m, const char* what) const;
  Phase after_step() const;

  PublicParams params_;
  Phase phase_ = Phase::idle;
  std::int64_t round_ = -1;
  int step_ = 0;
  std::int64_t completed_ = 0;
  bool finished_ = false;
  std::vector<LogEntry> log_;
};

// Byte-stream-independent view of the connection from the client side.
class ClientChannel {
 public:
  virtual ~ClientChannel() = default;
  virtual void send(const WireMessage& m) = 0;
  virtual WireMessage recv() = 0;
};

// Server role in the same process, driven synchronously.
class LocalServer : public ClientChannel {
 public:
  explicit LocalServer(PublicParams p) : server_(p) {}
  void send(const WireMessage& m) override;
  WireMessage recv() override;
  const ServerRole& server() const { return server_; }

 private:
  ServerRole server_;
  std::deque<WireMessage> outbox_;
};

// Simulated server hardware plus the photonic link.  It holds the only copy
// of the quantum state and lives with the client so that the simulation never
// ships secret-dependent states to the server process.
class Device {
 public:
  Device(const Link& link, const NoiseModel& noise, double residual_lambda, Rng world);

  RspResult prepare(const RspTarget& target);
  int transfer();
  int interact(Octant delta);
  int measure_final(FinalBasis basis, Octant delta);

 private:
  Link link_;
  NoiseModel noise_;
  double residual_;
  Rng world_;
  QuantumState network_;
  ServerState state_;
};

struct RoundRecord {
  std::int64_t round = 0;
  RoundType round_type = RoundType::computation;
  std::vector<Octant> alphas;
  int decoded = -1;  // computation rounds
  std::vector<TrapVerdict> verdicts;
  std::vector<int> raw;
  int init_retries = 0;
  int restarts = 0;
  std::int64_t attempts = 0;
  double latency_us = 0;
};

struct SessionResult {
  std::vector<RoundRecord> rounds;
};

SessionResult run_client_session(const SessionConfig& cfg, ClientChannel& channel);
// Client and server in one process.  The server log is copied out when asked.
SessionResult run_in_process(const SessionConfig& cfg, std::vector<LogEntry>* server_log = nullptr);

// Failure rate per 1-based position over all checked traps.
struct PositionStats {
  std::vector<long> checked;
  std::vector<long> failed;
  double rate(int pos) const { return checked.at(pos - 1) ? double(failed[pos - 1]) / checked[pos - 1] : 0.0; }
};
PositionStats position_failures(const SessionResult& r, int n_qubits);
// Fraction of test rounds with at least one failed trap.
double test_round_failure_rate(const SessionResult& r);

}  // namespace vbqc
