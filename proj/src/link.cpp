#include "vbqc/link.hpp"

#include <cmath>
#include <stdexcept>

namespace vbqc {

void LinkConfig::validate() const {
  if (!(p_herald_per_attempt > 0.0 && p_herald_per_attempt <= 1.0))
    throw std::invalid_argument("p_herald_per_attempt must lie in (0, 1]");
  if (timeout_attempts < 1) throw std::invalid_argument("timeout_attempts must be positive");
  const auto& d = durations;
  for (double v : {attempt_us, d.rsp_mean, d.transfer, d.iswap, d.readout, d.deshelve, d.cooling, d.outcome_comm})
    if (!(v >= 0.0)) throw std::invalid_argument("durations must be non-negative");
}

void TimingModel::validate() const {
  if (!(lifetime_ns > 0.0)) throw std::invalid_argument("lifetime_ns must be positive");
  if (delay_s_ns < 0.0 || delay_p_ns < 0.0) throw std::invalid_argument("detector delays must be non-negative");
  if (jitter_ns < 0.0) throw std::invalid_argument("jitter_ns must be non-negative");
  if (!(resolution_ns > 0.0)) throw std::invalid_argument("resolution_ns must be positive");
}

std::int64_t sample_attempts(const LinkConfig& cfg, Rng& rng) {
  if (cfg.p_herald_per_attempt >= 1.0) return 1;
  std::geometric_distribution<std::int64_t> g(cfg.p_herald_per_attempt);
  return g(rng) + 1;
}

namespace {

Mat2 port_unitary(const RspTarget& target, const Link& link, Detector click) {
  Mat2 u = target.z_eigen ? ideal_analyser_for_z(target.z) : ideal_analyser_for_equatorial(target.theta.radians());
  if (!link.analyser) return u;
  return click == Detector::s ? link.analyser->s_port(u) : link.analyser->p_port(u);
}

// POVM element of a click, pulled back to the photon's H/V frame.
Mat2 click_element(const RspTarget& target, const Link& link, Detector click) {
  auto f = link.povm.elements();
  Mat2 u = port_unitary(target, link, click);
  return u.adjoint() * f[click == Detector::s ? 1 : 0] * u;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// CDF of exponential(tau) + normal(0, sigma).
double emg_cdf(double y, double tau, double sigma) {
  if (sigma <= 0.0) return y <= 0.0 ? 0.0 : -std::expm1(-y / tau);
  double phi = normal_cdf(y / sigma);
  double tail = normal_cdf(y / sigma - sigma / tau);
  if (tail <= 0.0) return phi;
  return phi - std::exp(-y / tau + sigma * sigma / (2 * tau * tau) + std::log(tail));
}

}  // namespace

QuantumState steer_by_projection(const RspTarget& target, const Link& link, Detector click) {
  Vec bell = Vec::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);  // photon is qubit 0, H = 0
  QuantumState pair = QuantumState::pure(bell);
  Mat e = kron(click_element(target, link, click), Mat2::Identity());
  Mat proj = e * pair.matrix();
  Mat ion = partial_trace(QuantumState(Mat(0.5 * (proj + proj.adjoint())), QuantumState::Unchecked{}), {1}).matrix();
  double tr = ion.trace().real();
  if (tr <= kProbTol) throw std::domain_error("click has zero probability for this analyser setting");
  return QuantumState(Mat(ion / tr));
}

RspResult rsp_round(const RspTarget& target, const Link& link, const NoiseModel& noise, Rng& rng) {
  RspResult out;
  std::int64_t attempts = sample_attempts(link.cfg, rng);
  if (attempts > link.cfg.timeout_attempts) {
    out.state = QuantumState::maximally_mixed(1);
    return out;
  }
  // The photon alone is maximally mixed, so a click's weight is half the
  // trace of its element.
  double w_p = click_element(target, link, Detector::p).trace().real();
  double w_s = click_element(target, link, Detector::s).trace().real();
  Detector click = uniform01(rng) * (w_p + w_s) < w_s ? Detector::s : Detector::p;
  out.c = click == Detector::s ? 1 : 0;
  out.state = steer_by_projection(target, link, click);
  out.state = apply_channel(out.state, Channel::z_rotation(link.timing.detector_phase(click), 0));
  double f = target.z_eigen ? noise.budget.F_z : noise.budget.F_theta;
  out.state = apply_channel(out.state, Channel::depolarize(depolarizing_strength(f), 0));
  out.herald = HeraldRecord{click, attempts, herald_timestamp(click, link.timing, rng)};
  return out;
}

std::int64_t herald_timestamp(Detector d, const TimingModel& tm, Rng& rng) {
  double x = std::exponential_distribution<double>(1.0 / tm.lifetime_ns)(rng) + tm.delay(d);
  if (tm.jitter_ns > 0.0) x += std::normal_distribution<double>(0.0, tm.jitter_ns)(rng);
  return std::llround(std::floor(x / tm.resolution_ns) * tm.resolution_ns);
}

std::map<std::int64_t, double> arrival_histogram(Detector d, const TimingModel& tm) {
  tm.validate();
  const double r = tm.resolution_ns, mu = tm.delay(d);
  auto k_lo = static_cast<std::int64_t>(std::floor((mu - 10 * tm.jitter_ns) / r)) - 1;
  auto k_hi = static_cast<std::int64_t>(std::ceil((mu + 40 * tm.lifetime_ns + 10 * tm.jitter_ns) / r)) + 1;
  std::map<std::int64_t, double> h;
  double total = 0;
  double prev = emg_cdf(k_lo * r - mu, tm.lifetime_ns, tm.jitter_ns);
  for (std::int64_t k = k_lo; k <= k_hi; ++k) {
    double next = emg_cdf((k + 1) * r - mu, tm.lifetime_ns, tm.jitter_ns);
    double p = std::max(0.0, next - prev);
    prev = next;
    if (p > 0.0) {
      h[std::llround(k * r)] += p;
      total += p;
    }
  }
  for (auto& [t, p] : h) p /= total;
  return h;
}

double round_latency(const LinkConfig& cfg, std::int64_t attempts, int retries) {
  if (attempts < 0 || retries < 0) throw std::invalid_argument("attempts and retries must be non-negative");
  return attempts * cfg.attempt_us + (1 + retries) * cfg.durations.fixed_sum();
}

InitOutcome init_with_retry(const RoundPlan& plan, const Link& link, const NoiseModel& noise, Rng& rng) {
  const RspTarget target = plan.is_dummy(1) ? RspTarget::z_state(plan.r_bits[0]) : RspTarget::equatorial(plan.thetas[0]);
  InitOutcome out;
  for (;;) {
    RspResult rsp = rsp_round(target, link, noise, rng);
    if (!rsp.herald) {
      out.attempts += link.cfg.timeout_attempts;
      out.timed_out = true;
      return out;
    }
    out.attempts += rsp.herald->attempts;
    InitResult init = server_init_step(rsp.state, noise, rng);
    if (!init.m_err) {
      out.c = rsp.c;
      out.state = init.state;
      return out;
    }
    ++out.retries;
  }
}

}  // namespace vbqc
