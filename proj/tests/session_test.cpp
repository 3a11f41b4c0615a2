#include "vbqc/session.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

using namespace vbqc;

namespace {

SessionConfig noiseless(int q, std::int64_t rounds) {
  SessionConfig c;
  c.q = q;
  c.rounds = rounds;
  c.noise = NoiseModel::ideal();
  c.link.timing.delay_s_ns = 0.0;
  c.alpha_schedule = {std::vector<Octant>(q, Octant(0))};
  return c;
}

double mutual_information(const std::vector<int>& x, const std::vector<long long>& y) {
  std::map<std::pair<int, long long>, double> joint;
  std::map<int, double> px;
  std::map<long long, double> py;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    joint[{x[i], y[i]}] += 1 / n;
    px[x[i]] += 1 / n;
    py[y[i]] += 1 / n;
  }
  double mi = 0;
  for (auto& [k, p] : joint) mi += p * std::log2(p / (px[k.first] * py[k.second]));
  return mi;
}

}  // namespace

TEST(Session, NoiselessFringe) {
  for (int k : {0, 2, 3, 4}) {
    SessionConfig c = noiseless(1, 1500);
    c.test_fraction = 0.0;
    c.alpha_schedule = {{Octant(k)}};
    c.seed_client = 10 + k;
    auto r = run_in_process(c);
    double ones = 0;
    for (const auto& rec : r.rounds) ones += rec.decoded;
    double p = std::pow(std::sin(k * kPi / 8), 2);
    double sigma = std::sqrt(std::max(p * (1 - p), 1e-4) / c.rounds);
    EXPECT_LT(std::abs(ones / c.rounds - p), 4 * sigma + 1e-12) << k;
  }
}

TEST(Session, NoiselessTestRoundsNeverFail) {
  for (auto fb : {FinalBasis::Z, FinalBasis::B})
    for (int q = 1; q <= 3; ++q) {
      SessionConfig c = noiseless(q, 300);
      c.final_basis = fb;
      c.test_fraction = 1.0;
      c.alpha_schedule = {std::vector<Octant>(fb == FinalBasis::B ? q + 1 : q, Octant(1))};
      auto r = run_in_process(c);
      EXPECT_EQ(test_round_failure_rate(r), 0.0) << q;
    }
}

TEST(Session, DefaultNoiseOneStepRates) {
  SessionConfig c;
  c.rounds = 20000;
  c.test_fraction = 1.0;
  auto r = run_in_process(c);
  auto st = position_failures(r, 2);
  EXPECT_EQ(st.checked[0], 20000);
  EXPECT_EQ(st.checked[1], 20000);
  EXPECT_NEAR(st.rate(1), 0.201, 0.02);
  EXPECT_NEAR(st.rate(2), 0.095, 0.015);
}

TEST(Session, DefaultNoiseBothPlacements) {
  SessionConfig c;
  c.final_basis = FinalBasis::B;
  c.alpha_schedule = {{Octant(0), Octant(0)}};
  c.rounds = 20000;
  c.test_fraction = 1.0;
  auto r = run_in_process(c);
  auto st = position_failures(r, 2);
  EXPECT_NEAR(double(st.checked[0]) / c.rounds, 0.5, 0.02);
  double mean = test_round_failure_rate(r);
  EXPECT_NEAR(mean, 0.18, 0.02);
  EXPECT_LT(mean, 0.25);
}

TEST(Session, CalibrationResidual) {
  FidelityBudget b;
  TimingModel tm;
  double lam = calibration_residual_lambda(b, tm);
  double phi = tm.detector_phase(Detector::s);
  EXPECT_NEAR((2 * b.F_theta - 1) * (1 + std::cos(phi)) / 2 * (1 - lam), 2 * b.F_theta_prime - 1, 1e-12);
  EXPECT_EQ(calibration_residual_lambda(FidelityBudget::ideal(), tm), 0.0);
}

TEST(Session, DeterministicForFixedSeeds) {
  SessionConfig c;
  c.rounds = 300;
  auto a = run_in_process(c), b = run_in_process(c);
  ASSERT_EQ(a.rounds.size(), b.rounds.size());
  for (std::size_t i = 0; i < a.rounds.size(); ++i) {
    EXPECT_EQ(a.rounds[i].raw, b.rounds[i].raw);
    EXPECT_EQ(a.rounds[i].decoded, b.rounds[i].decoded);
    EXPECT_EQ(a.rounds[i].attempts, b.rounds[i].attempts);
  }
  c.seed_server = 99;
  auto d = run_in_process(c);
  bool differs = false;
  for (std::size_t i = 0; i < a.rounds.size(); ++i) differs |= a.rounds[i].raw != d.rounds[i].raw;
  EXPECT_TRUE(differs);
}

TEST(Session, ServerLogCarriesOnlyPublicFields) {
  SessionConfig c;
  c.rounds = 200;
  std::vector<LogEntry> log;
  run_in_process(c, &log);
  ASSERT_FALSE(log.empty());
  for (const auto& e : log) {
    std::string line = serialize(e.msg);
    EXPECT_EQ(parse_wire(line), e.msg);
    for (const char* secret : {"theta", "r_bits", "round_type", "dummy", "trap", "alpha", "test", "computation"})
      EXPECT_EQ(line.find(secret), std::string::npos) << line;
  }
  EXPECT_EQ(log.back().msg.type, MsgType::result);
}

TEST(Session, TranscriptIndependentOfRoundType) {
  SessionConfig c;
  c.q = 2;
  c.alpha_schedule = {{Octant(2), Octant(6)}};
  c.rounds = 10000;
  std::vector<LogEntry> log;
  auto res = run_in_process(c, &log);
  std::vector<int> type;
  for (const auto& rec : res.rounds) type.push_back(rec.round_type == RoundType::test);

  // Features of the completed attempt of every round, from the server's view.
  std::map<std::int64_t, std::vector<long long>> feats;
  std::vector<long long> cur;
  for (const auto& e : log) {
    if (!e.inbound) continue;
    const auto& m = e.msg;
    if (m.type == MsgType::round_begin || m.type == MsgType::abort) cur.clear();
    if (m.type == MsgType::herald) {
      cur.push_back(m.detector == Detector::s);
      cur.push_back(static_cast<long long>(std::log2(double(*m.attempts))));
      cur.push_back(*m.timestamp_ns);
    }
    if (m.type == MsgType::delta) cur.push_back(*m.octant);
    if (m.type == MsgType::outcome || m.type == MsgType::m_err) cur.push_back(*m.bit);
    if (m.type == MsgType::round_end) feats[m.round] = cur;
  }
  ASSERT_EQ(feats.size(), res.rounds.size());
  std::size_t width = 1000;
  for (auto& [r, f] : feats) width = std::min(width, f.size());
  for (std::size_t j = 0; j < width; ++j) {
    std::vector<long long> col;
    for (auto& [r, f] : feats) col.push_back(f[j]);
    EXPECT_LT(mutual_information(type, col), 0.01) << "field " << j;
  }
}

TEST(ServerRole, RejectsOutOfOrderMessagesAndRecovers) {
  PublicParams p;
  ServerRole s(p);
  auto r = s.on_message(make_delta(0, 3));
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].type, MsgType::abort);
  EXPECT_TRUE(s.on_message(make_round_begin(0)).empty());
  EXPECT_EQ(s.on_message(make_outcome(0, 1))[0].type, MsgType::abort);
  // A fresh attempt of the same round goes through.
  EXPECT_TRUE(s.on_message(make_round_begin(0)).empty());
  EXPECT_TRUE(s.on_message(make_herald(0, Detector::p, 10, 5)).empty());
  EXPECT_EQ(s.on_message(make_m_err(0, 0))[0], make_m_err(0, 0));
  EXPECT_TRUE(s.on_message(make_herald(0, Detector::s, 10, 12)).empty());
  EXPECT_EQ(s.on_message(make_delta(0, 5))[0], make_delta(0, 5));
  EXPECT_EQ(s.on_message(make_outcome(0, 1))[0], make_outcome(0, 1));
  EXPECT_EQ(s.on_message(make_outcome(0, 0))[0], make_outcome(0, 0));
  EXPECT_TRUE(s.on_message(make_round_end(0)).empty());
  EXPECT_EQ(s.completed_rounds(), 1);
  EXPECT_EQ(s.on_message(make_round_begin(5))[0].type, MsgType::abort);
  EXPECT_EQ(s.on_message(make_herald(0, Detector::p, 100000, 5))[0].type, MsgType::abort);
  EXPECT_EQ(s.on_message(make_result(1))[0], make_result(1));
  EXPECT_TRUE(s.finished());
}

TEST(Session, TimeoutsRestartTheRound) {
  SessionConfig c = noiseless(2, 200);
  c.link.cfg.p_herald_per_attempt = 0.05;
  c.link.cfg.timeout_attempts = 30;
  auto r = run_in_process(c);
  int restarts = 0;
  for (const auto& rec : r.rounds) restarts += rec.restarts;
  EXPECT_GT(restarts, 50);
  EXPECT_EQ(test_round_failure_rate(r), 0.0);
  c.max_restarts = 0;
  EXPECT_THROW(run_in_process(c), SessionAbort);
}

TEST(Session, LatencyAccounting) {
  SessionConfig c = noiseless(1, 50);
  c.link.cfg.p_herald_per_attempt = 1.0;
  auto r = run_in_process(c);
  for (const auto& rec : r.rounds) EXPECT_DOUBLE_EQ(rec.latency_us, 2 * 1306.0);
}

TEST(SessionConfig, Validation) {
  SessionConfig c;
  EXPECT_NO_THROW(c.validate());
  c.alpha_schedule = {{Octant(1), Octant(2)}};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.test_fraction = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}
