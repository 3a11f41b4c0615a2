#pragma once

#include <vector>

#include "vbqc/noise.hpp"
#include "vbqc/qcore.hpp"
#include "vbqc/wire.hpp"

namespace vbqc {

// Angle k*pi/4, k mod 8.
struct Octant {
  int k = 0;

  constexpr Octant() = default;
  constexpr Octant(int v) : k(((v % 8) + 8) % 8) {}

  double radians() const { return k * kPi / 4.0; }
  constexpr Octant operator+(Octant o) const { return Octant(k + o.k); }
  constexpr Octant operator-(Octant o) const { return Octant(k - o.k); }
  constexpr Octant operator-() const { return Octant(-k); }
  constexpr bool operator==(const Octant&) const = default;
};

enum class RoundType { computation, test };
enum class FinalBasis { Z, B };

// Client secrets for one round.  Positions are 1-based in the docs and
// 0-based in the vectors: qubit l lives at index l-1.  Qubit 1 is prepared
// for the initialisation, qubit l+1 during interaction step l.
struct RoundPlan {
  RoundType round_type = RoundType::computation;
  int q = 1;
  FinalBasis final_basis = FinalBasis::Z;
  std::vector<Octant> alphas;       // q entries, q+1 when the final basis is B
  std::vector<Octant> thetas;       // pre-herald angle keys
  std::vector<int> r_bits;          // pre-herald bits (encryption key, or Z value for dummies)
  std::vector<int> dummy_mask;      // test rounds only
  std::vector<int> trap_positions;  // 1-based, test rounds only

  int n_qubits() const { return q + 1; }
  bool is_dummy(int pos) const { return !dummy_mask.empty() && dummy_mask[pos - 1]; }
};

// Key values once the herald bit c of each qubit is known: theta += pi c for
// equatorial qubits, r ^= c for dummies.
struct RoundKeys {
  std::vector<Octant> theta;
  std::vector<int> r;
};

RoundPlan client_plan_round(int q, const std::vector<Octant>& alphas, RoundType type, Rng& rng,
                            FinalBasis final_basis = FinalBasis::Z);

RoundKeys effective_keys(const RoundPlan& plan, const std::vector<int>& herald_bits);

// R_l = XOR over 0 <= j < l/2 of b_{l-2j}; b is 1-based as in the text
// (decrypted[0] holds b_1).  R_0 = 0.
int feedforward_R(const std::vector<int>& decrypted, int ell);
// Bound 1 <= j < l/2 read literally.  Kept for the oracle test that rejects it.
int feedforward_R_literal(const std::vector<int>& decrypted, int ell);

Octant encrypt_delta(Octant alpha, Octant theta, int r, int R_prev);
Octant test_delta(Octant theta, int r);

// Phase the iSWAP adds to a qubit before it is measured: qubit 1 enters memory
// by a transfer and picks up one S when it leaves, later qubits pick up one S
// on entering and one on leaving, and the last qubit one S on entering.
Octant iswap_offset(int pos, int n_qubits);

// Z kick a trap receives from its dummy neighbours through the CZ part of the
// interaction, as an angle correction.
Octant dummy_kick(const RoundPlan& plan, const RoundKeys& keys, int pos);

// Measurement angle the client sends for qubit pos, given decrypted outcomes
// of qubits 1..pos-1.
Octant client_delta(const RoundPlan& plan, const RoundKeys& keys, const std::vector<int>& decrypted, int pos);

int client_decrypt(int m, int r);

// Logical result of a computation round from the raw outcomes m_1..m_{q+1}.
int decode_final(const RoundPlan& plan, const RoundKeys& keys, const std::vector<int>& raw);

struct TrapVerdict {
  int position;
  bool pass;
};

// Traps measured in B plus a dummy measured in Z at the end of the round.
std::vector<TrapVerdict> trap_verdicts(const RoundPlan& plan, const RoundKeys& keys, const std::vector<int>& raw);

// Server registers: qubit 0 memory, qubit 1 network when present.
struct ServerState {
  QuantumState memory;
  int step = 0;
  bool has_memory = false;
};

struct InitResult {
  int m_err;
  ServerState state;
};

struct StepResult {
  int m;
  ServerState state;
};

InitResult server_init_step(const QuantumState& network, const NoiseModel& noise, Rng& rng);
StepResult server_interaction_step(const ServerState& st, const QuantumState& steered, Octant delta, const NoiseModel& noise,
                                   Rng& rng);
int server_final_measure(const ServerState& st, const MeasBasis& basis, Rng& rng);

// State of the last node built by direct matrix products: Rz(theta_final) X^{R_q} Z^{R_{q-1}} H Rz(-a_q) ... H Rz(-a_1)|+>.
// The measurement B_delta with delta = alpha + theta on a |theta> node applies
// H Rz(-alpha) to the cluster head, so the node angles enter with a minus sign.
QuantumState cluster_oracle(const std::vector<double>& alphas, const std::vector<int>& decrypted, double theta_final = 0.0);

using Transcript = std::vector<WireMessage>;

}  // namespace vbqc
