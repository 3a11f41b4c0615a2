#include "vbqc/session.hpp"

#include <algorithm>
#include <cmath>

namespace vbqc {

void SessionConfig::validate() const {
  if (q < 1) throw std::invalid_argument("q must be at least 1");
  if (rounds < 1) throw std::invalid_argument("rounds must be at least 1");
  if (test_fraction < 0.0 || test_fraction > 1.0) throw std::invalid_argument("test_fraction must lie in [0, 1]");
  if (max_restarts < 0) throw std::invalid_argument("max_restarts must be non-negative");
  if (alpha_schedule.empty()) throw std::invalid_argument("alpha schedule is empty");
  const std::size_t need = final_basis == FinalBasis::B ? q + 1 : q;
  for (const auto& a : alpha_schedule)
    if (a.size() != need)
      throw std::invalid_argument("each alpha entry needs " + std::to_string(need) + " angles, got " + std::to_string(a.size()));
  link.cfg.validate();
  link.timing.validate();
  link.povm.validate();
  noise.validate();
}

double calibration_residual_lambda(const FidelityBudget& budget, const TimingModel& timing) {
  double contraction = (2 * budget.F_theta - 1) * (1 + std::cos(timing.detector_phase(Detector::s))) / 2;
  if (contraction <= 0.0) return 0.0;
  double keep = std::min(1.0, (2 * budget.F_theta_prime - 1) / contraction);
  return 1.0 - keep;
}

// ---------------------------------------------------------------- server

ServerRole::ServerRole(PublicParams p) : params_(p) {
  if (p.q < 1) throw std::invalid_argument("q must be at least 1");
}

void ServerRole::reset_round() {
  phase_ = Phase::idle;
  step_ = 0;
}

void ServerRole::expect(bool ok, const WireMessage& m, const char* what) const {
  if (!ok)
    throw ProtocolViolation(std::string("unexpected ") + to_string(m.type) + " in round " + std::to_string(m.round) +
                            ": " + what);
}

ServerRole::Phase ServerRole::after_step() const {
  if (step_ <= params_.q) return Phase::step_herald;
  return params_.final_basis == FinalBasis::B ? Phase::final_delta : Phase::final_outcome;
}

std::vector<WireMessage> ServerRole::on_message(const WireMessage& m) {
  log_.push_back({true, m});
  std::vector<WireMessage> out;
  try {
    out = handle(m);
  } catch (const ProtocolViolation&) {
    reset_round();
    out = {make_abort(m.round)};
  }
  for (const auto& r : out) log_.push_back({false, r});
  return out;
}

std::vector<WireMessage> ServerRole::handle(const WireMessage& m) {
  if (finished_) throw ProtocolViolation("session already finished");
  if (m.type == MsgType::abort) {
    reset_round();
    return {};
  }
  if (phase_ != Phase::idle) expect(m.round == round_, m, "round number mismatch");
  switch (phase_) {
    case Phase::idle:
      if (m.type == MsgType::result) {
        finished_ = true;
        return {make_result(completed_)};
      }
      expect(m.type == MsgType::round_begin, m, "expected round_begin");
      expect(m.round == completed_ && m.round < params_.rounds, m, "round out of sequence");
      round_ = m.round;
      phase_ = Phase::init_herald;
      return {};
    case Phase::init_herald:
    case Phase::step_herald:
      expect(m.type == MsgType::herald, m, "expected herald");
      expect(*m.attempts <= params_.timeout_attempts, m, "attempts beyond timeout");
      phase_ = phase_ == Phase::init_herald ? Phase::init_merr : Phase::step_delta;
      return {};
    case Phase::init_merr:
      expect(m.type == MsgType::m_err, m, "expected m_err readout");
      if (*m.bit) {
        phase_ = Phase::init_herald;
      } else {
        step_ = 1;
        phase_ = after_step();
      }
      return {make_m_err(round_, *m.bit)};
    case Phase::step_delta:
    case Phase::final_delta:
      expect(m.type == MsgType::delta, m, "expected delta");
      phase_ = phase_ == Phase::step_delta ? Phase::step_outcome : Phase::final_outcome;
      return {make_delta(round_, *m.octant)};
    case Phase::step_outcome:
      expect(m.type == MsgType::outcome, m, "expected outcome readout");
      ++step_;
      phase_ = after_step();
      return {make_outcome(round_, *m.bit)};
    case Phase::final_outcome:
      expect(m.type == MsgType::outcome, m, "expected final outcome readout");
      phase_ = Phase::round_end;
      return {make_outcome(round_, *m.bit)};
    case Phase::round_end:
      expect(m.type == MsgType::round_end, m, "expected round_end");
      ++completed_;
      reset_round();
      return {};
  }
  throw ProtocolViolation("bad server state");
}

void LocalServer::send(const WireMessage& m) {
  for (auto& r : server_.on_message(m)) outbox_.push_back(std::move(r));
}

WireMessage LocalServer::recv() {
  if (outbox_.empty()) throw SessionAbort("server sent no reply");
  WireMessage m = outbox_.front();
  outbox_.pop_front();
  return m;
}

// ---------------------------------------------------------------- device

Device::Device(const Link& link, const NoiseModel& noise, double residual_lambda, Rng world)
    : link_(link), noise_(noise), residual_(residual_lambda), world_(std::move(world)) {}

RspResult Device::prepare(const RspTarget& target) {
  RspResult r = rsp_round(target, link_, noise_, world_);
  if (r.herald && !target.z_eigen && residual_ > 0.0) r.state = apply_channel(r.state, Channel::depolarize(residual_, 0));
  network_ = r.state;
  return r;
}

int Device::transfer() {
  InitResult r = server_init_step(network_, noise_, world_);
  if (!r.m_err) state_ = r.state;
  return r.m_err;
}

int Device::interact(Octant delta) {
  StepResult r = server_interaction_step(state_, network_, delta, noise_, world_);
  state_ = r.state;
  return r.m;
}

int Device::measure_final(FinalBasis basis, Octant delta) {
  return server_final_measure(state_, basis == FinalBasis::Z ? MeasBasis::Z() : MeasBasis::B(delta.radians()), world_);
}

// ---------------------------------------------------------------- client

namespace {

class ClientRun {
 public:
  ClientRun(const SessionConfig& cfg, ClientChannel& ch)
      : cfg_(cfg),
        ch_(ch),
        client_(make_stream(cfg.seed_client, {stream::client})),
        device_(cfg.link, cfg.noise, cfg.calibration_residual ? calibration_residual_lambda(cfg.noise.budget, cfg.link.timing) : 0.0,
                make_stream(cfg.seed_client, {stream::world, cfg.seed_server})) {}

  SessionResult run() {
    SessionResult res;
    for (std::int64_t r = 0; r < cfg_.rounds; ++r) {
      RoundRecord rec;
      rec.round = r;
      rec.round_type = bernoulli(client_, cfg_.test_fraction) ? RoundType::test : RoundType::computation;
      rec.alphas = cfg_.alpha_schedule[r % cfg_.alpha_schedule.size()];
      for (;;) {
        RoundPlan plan = client_plan_round(cfg_.q, rec.round_type == RoundType::computation ? rec.alphas : std::vector<Octant>{},
                                           rec.round_type, client_, cfg_.final_basis);
        if (attempt_round(plan, rec)) break;
        ch_.send(make_abort(r));
        if (++rec.restarts > cfg_.max_restarts) throw SessionAbort("round " + std::to_string(r) + " timed out too often");
      }
      res.rounds.push_back(std::move(rec));
    }
    ch_.send(make_result(cfg_.rounds));
    reply(MsgType::result, cfg_.rounds);
    return res;
  }

 private:
  WireMessage reply(MsgType type, std::int64_t round) {
    WireMessage m = ch_.recv();
    if (m.type == MsgType::abort) throw SessionAbort("server aborted round " + std::to_string(m.round));
    if (m.type != type || m.round != round)
      throw SessionAbort(std::string("expected ") + to_string(type) + " for round " + std::to_string(round) + ", got " +
                         to_string(m.type) + " for round " + std::to_string(m.round));
    return m;
  }

  static RspTarget target(const RoundPlan& plan, int pos) {
    return plan.is_dummy(pos) ? RspTarget::z_state(plan.r_bits[pos - 1]) : RspTarget::equatorial(plan.thetas[pos - 1]);
  }

  void send_herald(std::int64_t r, const HeraldRecord& h) { ch_.send(make_herald(r, h.detector, h.attempts, h.timestamp_ns)); }

  // False when the link timed out and the round has to start over.
  bool attempt_round(const RoundPlan& plan, RoundRecord& rec) {
    const std::int64_t r = rec.round;
    const auto& lc = cfg_.link.cfg;
    ch_.send(make_round_begin(r));
    std::vector<int> c;
    rec.raw.clear();
    rec.init_retries = 0;

    std::int64_t init_attempts = 0;
    for (;;) {
      RspResult rsp = device_.prepare(target(plan, 1));
      if (!rsp.herald) {
        charge_timeout(rec);
        return false;
      }
      init_attempts += rsp.herald->attempts;
      rec.attempts += rsp.herald->attempts;
      send_herald(r, *rsp.herald);
      ch_.send(make_m_err(r, device_.transfer()));
      if (!*reply(MsgType::m_err, r).bit) {
        c.push_back(rsp.c);
        break;
      }
      ++rec.init_retries;
    }
    rec.latency_us += round_latency(lc, init_attempts, rec.init_retries);

    std::vector<int> s;
    for (int pos = 1; pos <= plan.q; ++pos) {
      RspResult rsp = device_.prepare(target(plan, pos + 1));
      if (!rsp.herald) {
        charge_timeout(rec);
        return false;
      }
      rec.attempts += rsp.herald->attempts;
      rec.latency_us += round_latency(lc, rsp.herald->attempts, 0);
      send_herald(r, *rsp.herald);
      c.push_back(rsp.c);
      RoundKeys keys = effective_keys(plan, c);
      ch_.send(make_delta(r, client_delta(plan, keys, s, pos).k));
      Octant command(*reply(MsgType::delta, r).octant);
      ch_.send(make_outcome(r, device_.interact(command)));
      int m = *reply(MsgType::outcome, r).bit;
      rec.raw.push_back(m);
      s.push_back(client_decrypt(m, keys.r[pos - 1]));
    }

    RoundKeys keys = effective_keys(plan, c);
    Octant final_delta(0);
    if (plan.final_basis == FinalBasis::B) {
      ch_.send(make_delta(r, client_delta(plan, keys, s, plan.q + 1).k));
      final_delta = Octant(*reply(MsgType::delta, r).octant);
    }
    ch_.send(make_outcome(r, device_.measure_final(plan.final_basis, final_delta)));
    rec.raw.push_back(*reply(MsgType::outcome, r).bit);
    ch_.send(make_round_end(r));

    if (plan.round_type == RoundType::computation)
      rec.decoded = decode_final(plan, keys, rec.raw);
    else
      rec.verdicts = trap_verdicts(plan, keys, rec.raw);
    return true;
  }

  void charge_timeout(RoundRecord& rec) {
    rec.attempts += cfg_.link.cfg.timeout_attempts;
    rec.latency_us += cfg_.link.cfg.timeout_attempts * cfg_.link.cfg.attempt_us;
  }

  const SessionConfig& cfg_;
  ClientChannel& ch_;
  Rng client_;
  Device device_;
};

}  // namespace

SessionResult run_client_session(const SessionConfig& cfg, ClientChannel& channel) {
  cfg.validate();
  return ClientRun(cfg, channel).run();
}

SessionResult run_in_process(const SessionConfig& cfg, std::vector<LogEntry>* server_log) {
  LocalServer local(cfg.public_params());
  SessionResult r = run_client_session(cfg, local);
  if (server_log) *server_log = local.server().log();
  return r;
}

PositionStats position_failures(const SessionResult& r, int n_qubits) {
  PositionStats st{std::vector<long>(n_qubits, 0), std::vector<long>(n_qubits, 0)};
  for (const auto& rec : r.rounds)
    for (const auto& v : rec.verdicts) {
      st.checked.at(v.position - 1)++;
      if (!v.pass) st.failed[v.position - 1]++;
    }
  return st;
}

double test_round_failure_rate(const SessionResult& r) {
  long tests = 0, failed = 0;
  for (const auto& rec : r.rounds) {
    if (rec.round_type != RoundType::test) continue;
    ++tests;
    failed += std::any_of(rec.verdicts.begin(), rec.verdicts.end(), [](const TrapVerdict& v) { return !v.pass; });
  }
  return tests ? double(failed) / tests : 0.0;
}

}  // namespace vbqc
