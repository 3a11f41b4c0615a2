#include "vbqc/protocol.hpp"

#include <stdexcept>
#include <string>

namespace vbqc {

RoundPlan client_plan_round(int q, const std::vector<Octant>& alphas, RoundType type, Rng& rng, FinalBasis final_basis) {
  if (q < 1) throw std::invalid_argument("a round needs at least one interaction step");
  const int n = q + 1;
  RoundPlan plan;
  plan.round_type = type;
  plan.q = q;
  plan.final_basis = final_basis;
  if (type == RoundType::computation) {
    std::size_t need = final_basis == FinalBasis::B ? n : q;
    if (alphas.size() != need)
      throw std::invalid_argument("computation round needs " + std::to_string(need) + " angles, got " + std::to_string(alphas.size()));
    plan.alphas = alphas;
  }
  std::uniform_int_distribution<int> oct(0, 7);
  for (int i = 0; i < n; ++i) plan.thetas.emplace_back(oct(rng));
  for (int i = 0; i < n; ++i) plan.r_bits.push_back(bernoulli(rng, 0.5));
  if (type == RoundType::test) {
    // Dummies on every second qubit.  A Z-basis final measurement can only
    // check a dummy, which fixes the alternation; otherwise pick it at random.
    int parity = final_basis == FinalBasis::Z ? (n % 2) : bernoulli(rng, 0.5);
    for (int pos = 1; pos <= n; ++pos) {
      int dummy = (pos % 2) == parity ? 1 : 0;
      plan.dummy_mask.push_back(dummy);
      if (!dummy) plan.trap_positions.push_back(pos);
    }
  }
  return plan;
}

RoundKeys effective_keys(const RoundPlan& plan, const std::vector<int>& herald_bits) {
  RoundKeys k{plan.thetas, plan.r_bits};
  for (std::size_t i = 0; i < herald_bits.size() && i < k.theta.size(); ++i) {
    if (plan.is_dummy(static_cast<int>(i) + 1))
      k.r[i] ^= herald_bits[i];
    else
      k.theta[i] = k.theta[i] + Octant(4 * herald_bits[i]);
  }
  return k;
}

namespace {

int xor_every_second(const std::vector<int>& b, int ell, int j_start) {
  if (ell < 0 || ell > static_cast<int>(b.size())) throw std::out_of_range("feedforward index " + std::to_string(ell) + " out of range");
  int r = 0;
  for (int j = j_start; 2 * j < ell; ++j) r ^= b[ell - 2 * j - 1];
  return r;
}

}  // namespace

int feedforward_R(const std::vector<int>& decrypted, int ell) { return xor_every_second(decrypted, ell, 0); }

int feedforward_R_literal(const std::vector<int>& decrypted, int ell) { return xor_every_second(decrypted, ell, 1); }

Octant encrypt_delta(Octant alpha, Octant theta, int r, int R_prev) {
  return (R_prev ? -alpha : alpha) + theta + Octant(4 * r);
}

Octant test_delta(Octant theta, int r) { return theta + Octant(4 * r); }

Octant iswap_offset(int pos, int n_qubits) { return Octant(pos == 1 || pos == n_qubits ? 2 : 4); }

Octant dummy_kick(const RoundPlan& plan, const RoundKeys& keys, int pos) {
  int kick = 0;
  for (int nb : {pos - 1, pos + 1})
    if (nb >= 1 && nb <= plan.n_qubits() && plan.is_dummy(nb)) kick ^= keys.r[nb - 1];
  return Octant(4 * kick);
}

Octant client_delta(const RoundPlan& plan, const RoundKeys& keys, const std::vector<int>& decrypted, int pos) {
  const int i = pos - 1;
  Octant base;
  if (plan.round_type == RoundType::computation) {
    int R_prev = feedforward_R(decrypted, pos - 1);
    base = encrypt_delta(plan.alphas.at(i), keys.theta[i], keys.r[i], R_prev);
  } else {
    Octant th = keys.theta[i];
    if (!plan.is_dummy(pos)) th = th + dummy_kick(plan, keys, pos);
    base = test_delta(th, keys.r[i]);
  }
  return base + iswap_offset(pos, plan.n_qubits());
}

int client_decrypt(int m, int r) { return m ^ r; }

int decode_final(const RoundPlan& plan, const RoundKeys& keys, const std::vector<int>& raw) {
  const int q = plan.q;
  std::vector<int> s;
  for (int i = 0; i < q; ++i) s.push_back(client_decrypt(raw.at(i), keys.r[i]));
  if (plan.final_basis == FinalBasis::Z) return raw.at(q) ^ feedforward_R(s, q);
  return client_decrypt(raw.at(q), keys.r[q]) ^ feedforward_R(s, q - 1);
}

std::vector<TrapVerdict> trap_verdicts(const RoundPlan& plan, const RoundKeys& keys, const std::vector<int>& raw) {
  std::vector<TrapVerdict> v;
  if (plan.round_type != RoundType::test) return v;
  const int n = plan.n_qubits();
  for (int pos = 1; pos <= n; ++pos) {
    bool checked = !plan.is_dummy(pos) || (pos == n && plan.final_basis == FinalBasis::Z);
    if (checked) v.push_back({pos, raw.at(pos - 1) == keys.r[pos - 1]});
  }
  return v;
}

InitResult server_init_step(const QuantumState& network, const NoiseModel& noise, Rng& rng) {
  if (network.dim() != 2) throw std::invalid_argument("network register must hold one qubit");
  InitResult out{0, {}};
  double f_transfer = noise.budget.F_iS;
  if (noise.error_detection) {
    if (bernoulli(rng, noise.p_errdetect)) {
      out.m_err = 1;
      return out;
    }
    f_transfer = noise.budget.F_iS_prime;
  }
  out.state.memory = apply_channel(network, Channel::dephase(1.0 - f_transfer, 0));
  out.state.has_memory = true;
  return out;
}

StepResult server_interaction_step(const ServerState& st, const QuantumState& steered, Octant delta, const NoiseModel& noise,
                                   Rng& rng) {
  if (!st.has_memory) throw std::logic_error("interaction step without a memory qubit");
  if (steered.dim() != 2) throw std::invalid_argument("network register must hold one qubit");
  // Memory is mapped to a storage level during the photon attempts and back.
  QuantumState mem = apply_channel(st.memory, Channel::dephase(1.0 - noise.budget.F_map, 0));
  mem = apply_channel(mem, Channel::dephase(1.0 - noise.budget.F_map, 0));
  QuantumState joint = tensor(mem, steered);
  joint = apply_unitary(joint, gates::ISWAP(), {0, 1});
  const double lam = depolarizing_strength(noise.budget.F_iS);
  joint = apply_channel(joint, Channel::depolarize(lam, 0));
  joint = apply_channel(joint, Channel::depolarize(lam, 1));
  auto [m, rest] = measure(joint, MeasBasis::B(delta.radians()), 1, rng);
  StepResult out{m, st};
  out.state.memory = rest;
  out.state.step = st.step + 1;
  return out;
}

int server_final_measure(const ServerState& st, const MeasBasis& basis, Rng& rng) {
  if (!st.has_memory) throw std::logic_error("final measurement without a memory qubit");
  return measure(st.memory, basis, 0, rng).first;
}

QuantumState cluster_oracle(const std::vector<double>& alphas, const std::vector<int>& decrypted, double theta_final) {
  if (decrypted.size() < alphas.size()) throw std::invalid_argument("need one decrypted outcome per angle");
  const int q = static_cast<int>(alphas.size());
  Vec2 psi = ket_theta(0.0);
  for (double a : alphas) psi = gates::H() * gates::rz(-a) * psi;
  if (q >= 1 && feedforward_R(decrypted, q - 1)) psi = gates::Z() * psi;
  if (feedforward_R(decrypted, q)) psi = gates::X() * psi;
  psi = gates::rz(theta_final) * psi;
  return QuantumState::pure(psi);
}

}  // namespace vbqc
