#include "vbqc/leakage.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vbqc {

void StateEnsemble::validate() const {
  if (states.empty()) throw std::invalid_argument("empty ensemble");
  double total = 0;
  int dim = states.front().second.dim();
  for (const auto& [w, s] : states) {
    if (w < 0.0) throw std::invalid_argument("negative ensemble weight");
    if (s.dim() != dim) throw std::invalid_argument("ensemble states differ in dimension");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("ensemble weights must sum to 1");
}

double holevo(const StateEnsemble& ensemble) {
  ensemble.validate();
  const int dim = ensemble.states.front().second.dim();
  Mat mix = Mat::Zero(dim, dim);
  double avg = 0;
  for (const auto& [w, s] : ensemble.states) {
    mix += w * s.matrix();
    avg += w * von_neumann_entropy(s);
  }
  return std::max(0.0, von_neumann_entropy(mix) - avg);
}

namespace {

QuantumState herald_mix(double theta, double q_p, double phi_s) {
  Vec2 s = gates::rz(phi_s) * ket_theta(theta + kPi);
  Mat2 rho = q_p * QuantumState::pure(ket_theta(theta)).matrix() + (1 - q_p) * QuantumState::pure(s).matrix();
  return QuantumState(Mat(rho));
}

// 8 - |n_0 + n_1 + n_2 + n_3|^2 / 2 for the four basis directions.
const double kBasisFactor = (6.0 - std::sqrt(2.0));

}  // namespace

StateEnsemble imbalance_ensemble(double q_dev) {
  if (std::abs(q_dev) > 0.5) throw std::invalid_argument("q_dev must lie in [-1/2, 1/2]");
  StateEnsemble e;
  for (int k = 0; k < 4; ++k) e.states.emplace_back(0.25, herald_mix(k * kPi / 4, 0.5 + q_dev, 0.0));
  return e;
}

HolevoEstimate holevo_imbalance(double q_dev) {
  return {kBasisFactor * q_dev * q_dev / (4 * std::log(2.0)), holevo(imbalance_ensemble(q_dev))};
}

StateEnsemble rotated_ensemble(double phi) {
  StateEnsemble e;
  for (int k = 0; k < 4; ++k) e.states.emplace_back(0.25, herald_mix(k * kPi / 4, 0.5, phi));
  return e;
}

HolevoEstimate holevo_rotated(double phi) {
  return {kBasisFactor * phi * phi / (64 * std::log(2.0)), holevo(rotated_ensemble(phi))};
}

double binary_mutual_entropy(double q) {
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("probability outside [0,1]");
  return 1.0 - binary_entropy(q);
}

double ml_timing_gain(const TimeHistogram& hist_s, const TimeHistogram& hist_p, double prior_s) {
  if (prior_s <= 0.0 || prior_s >= 1.0) throw std::invalid_argument("prior must lie in (0,1)");
  double ns = 0, np = 0;
  for (const auto& [t, v] : hist_s) ns += v;
  for (const auto& [t, v] : hist_p) np += v;
  if (!(ns > 0.0) || !(np > 0.0)) throw std::invalid_argument("timing histograms must be non-empty");
  TimeHistogram grid;
  for (const auto& [t, v] : hist_s) grid[t] += prior_s * v / ns;
  std::map<std::int64_t, double> weighted_p;
  for (const auto& [t, v] : hist_p) {
    weighted_p[t] = (1 - prior_s) * v / np;
    grid[t] += weighted_p[t];
  }
  double gain = 0;
  for (const auto& [t, pr] : grid) {
    if (pr <= 0.0) continue;
    double wp = weighted_p.count(t) ? weighted_p[t] : 0.0;
    double sigma = std::max(pr - wp, wp) / pr;
    gain += pr * binary_mutual_entropy(std::clamp(sigma, 0.0, 1.0));
  }
  return std::clamp(gain, 0.0, 1.0);
}

double fisher_exponential(double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  return 1.0 / (lambda * lambda);
}

double kl_exponential(double lambda0, double lambda) {
  if (!(lambda0 > 0.0) || !(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  double r = lambda0 / lambda;
  return (r - 1.0 - std::log(r)) / std::log(2.0);
}

double tomographic_holevo(const std::vector<BranchState>& branches) {
  std::array<Mat2, 4> rho;
  std::array<double, 4> w{};
  for (auto& m : rho) m.setZero();
  for (const auto& b : branches) {
    if (b.basis < 0 || b.basis > 3) throw std::invalid_argument("basis index must lie in 0..3");
    if (b.state.dim() != 2 || b.weight < 0.0) throw std::invalid_argument("branch needs a qubit state and a weight >= 0");
    rho[b.basis] += b.weight * b.state.matrix();
    w[b.basis] += b.weight;
  }
  StateEnsemble e;
  for (int k = 0; k < 4; ++k) {
    if (w[k] <= 0.0) throw std::invalid_argument("every basis needs at least one weighted branch");
    e.states.emplace_back(0.25, QuantumState(Mat(rho[k] / w[k])));
  }
  return holevo(e);
}

std::vector<BranchState> simulate_tomography(const Link& link, const NoiseModel& noise, double q_dev, long shots,
                                             Rng& rng) {
  std::vector<BranchState> out;
  const double lam = depolarizing_strength(noise.budget.F_theta);
  for (int k = 0; k < 4; ++k)
    for (Detector d : {Detector::p, Detector::s}) {
      QuantumState st = steer_by_projection(RspTarget::equatorial(Octant(k)), link, d);
      st = apply_channel(st, Channel::z_rotation(link.timing.detector_phase(d), 0));
      st = apply_channel(st, Channel::depolarize(lam, 0));
      if (shots > 0) {
        std::vector<BasisCounts> counts;
        for (char b : {'X', 'Y', 'Z'}) counts.push_back(sample_counts(st, b, shots, rng));
        auto bv = direct_inversion(counts);
        double norm = std::sqrt(bv[0] * bv[0] + bv[1] * bv[1] + bv[2] * bv[2]);
        if (norm > 1.0)
          for (double& x : bv) x /= norm;
        st = from_bloch(bv);
      }
      out.push_back({k, d == Detector::p ? 0.5 + q_dev : 0.5 - q_dev, st});
    }
  return out;
}

LeakageConfig LeakageConfig::observed() { return {}; }

LeakageConfig LeakageConfig::optimised() {
  LeakageConfig c;
  // Delays matched to the 0.04 ns calibration residual, matched efficiencies,
  // and the analyser's port mismatch as the remaining basis error.
  c.link.timing.delay_s_ns = 0.04;
  c.link.analyser = ImperfectAnalyser{};
  c.q_dev = 0.0;
  c.lambda_alt = c.lambda0;
  return c;
}

LeakageConfig LeakageConfig::ideal() {
  LeakageConfig c;
  c.link.timing.delay_s_ns = c.link.timing.delay_p_ns = 0.0;
  c.noise = NoiseModel::ideal();
  c.q_dev = 0.0;
  c.lambda_alt = c.lambda0;
  c.tomography_shots = 0;
  return c;
}

LeakageReport build_leakage_table(const LeakageConfig& cfg) {
  cfg.link.timing.validate();
  cfg.noise.validate();
  LeakageReport r;
  r.classical.angles = 0.0;
  bool rate_differs = std::abs(cfg.lambda_alt - cfg.lambda0) > 0.0;
  r.classical.herald_efficiency = rate_differs ? fisher_exponential(cfg.lambda0) : 0.0;
  r.classical.herald_efficiency_kl = kl_exponential(cfg.lambda0, cfg.lambda_alt);
  r.classical.herald_delay = ml_timing_gain(arrival_histogram(Detector::s, cfg.link.timing),
                                            arrival_histogram(Detector::p, cfg.link.timing));
  const auto& tm = cfg.link.timing;
  double phi_delay = std::abs(tm.omega_z_rad_per_ns * (tm.delay_s_ns - tm.delay_p_ns));
  double phi_ports = cfg.link.analyser ? std::abs(cfg.link.analyser->port_mismatch_rad) : 0.0;
  r.quantum.basis_phi = std::max(phi_delay, phi_ports);
  r.quantum.basis = holevo_rotated(r.quantum.basis_phi).approx;
  r.quantum.imbalance = holevo_imbalance(cfg.q_dev).approx;
  Rng rng = make_stream(cfg.seed, {stream::world});
  r.quantum.measured_tomographic =
      tomographic_holevo(simulate_tomography(cfg.link, cfg.noise, cfg.q_dev, cfg.tomography_shots, rng));
  return r;
}

}  // namespace vbqc
