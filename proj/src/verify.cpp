#include "vbqc/verify.hpp"

#include <boost/math/distributions/binomial.hpp>
#include <cmath>
#include <stdexcept>

#include "vbqc/session.hpp"

namespace vbqc {

long VerifyConfig::test_rounds() const { return static_cast<long>(std::floor(tau * static_cast<double>(n_rounds))); }

void VerifyConfig::validate() const {
  if (n_rounds < 1) throw std::invalid_argument("n_rounds must be positive");
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must lie in (0, 1)");
  if (!(omega > 0.0 && omega < 1.0)) throw std::invalid_argument("omega must lie in (0, 1)");
  if (p_max < 0.0 || p_max >= omega) throw std::invalid_argument("p_max must lie in [0, omega)");
  if (omega_max > 1.0 || omega_max < omega) throw std::invalid_argument("omega_max must lie in [omega, 1]");
}

double omega_max(int q) {
  if (q < 1) throw std::invalid_argument("cluster size must be positive");
  return 1.0 - std::pow(0.75, 2.0 / q);
}

TrapEstimates trap_estimates(const FidelityBudget& b) {
  b.validate();
  TrapEstimates e;
  e.p_trap1 = 1 - b.F_map * b.F_iS * b.F_map * b.F_iS_prime * b.F_theta_prime;
  e.p_dummy = 1 - b.F_iS * b.F_z;
  e.p_trap2 = 1 - b.F_iS * b.F_theta_prime;
  e.p_mean = (e.p_trap1 + e.p_trap2) / 2;
  return e;
}

Decision accept(long failures, long tests, double omega) {
  if (tests <= 0 || failures < 0 || failures > tests) throw std::invalid_argument("need 0 <= failures <= tests, tests > 0");
  double p = static_cast<double>(failures) / static_cast<double>(tests);
  return {p < omega, p};
}

HoeffdingBounds hoeffding_rates(const VerifyConfig& cfg, double p_true) {
  if (cfg.omega < p_true) throw std::invalid_argument("omega below the honest failure rate");
  if (cfg.omega > cfg.omega_max) throw std::invalid_argument("omega above omega_max");
  const double t = static_cast<double>(cfg.test_rounds());
  return {std::exp(-2 * t * std::pow(cfg.omega - p_true, 2)), std::exp(-2 * t * std::pow(cfg.omega_max - cfg.omega, 2))};
}

double exact_reject_probability(long tests, double p_true, double omega) {
  long kmin = static_cast<long>(std::ceil(omega * tests - 1e-12));
  if (kmin <= 0) return 1.0;
  if (kmin > tests) return 0.0;
  if (p_true <= 0.0) return 0.0;
  if (p_true >= 1.0) return 1.0;
  boost::math::binomial_distribution<double> d(static_cast<double>(tests), p_true);
  return boost::math::cdf(boost::math::complement(d, static_cast<double>(kmin - 1)));
}

DecayStudy monte_carlo_decay(const std::vector<long>& n_grid, double p_true, double omega, double tau, int trials,
                             std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("trials must be positive");
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must lie in (0, 1)");
  DecayStudy study;
  for (std::size_t j = 0; j < n_grid.size(); ++j) {
    const long n = n_grid[j];
    const long t = static_cast<long>(std::floor(tau * static_cast<double>(n)));
    const long kmin = static_cast<long>(std::ceil(omega * t - 1e-12));
    DecayPoint pt{n, t, 0.0, 0.0, 1.0};
    if (p_true < omega) pt.bound = std::exp(-2 * t * std::pow(omega - p_true, 2));
    if (p_true > 0.0 && p_true < 1.0) {
      // Tilt to the threshold when the tail is rare, else sample directly.
      const double tilt = std::max(p_true, omega);
      const double log_a = std::log(p_true / tilt), log_b = std::log((1 - p_true) / (1 - tilt));
      double sum = 0, sum2 = 0;
      for (int i = 0; i < trials; ++i) {
        Rng rng = make_stream(seed, {stream::trial, j, static_cast<std::uint64_t>(i)});
        long k = std::binomial_distribution<long>(t, tilt)(rng);
        double w = k >= kmin ? std::exp(k * log_a + (t - k) * log_b) : 0.0;
        sum += w;
        sum2 += w * w;
      }
      pt.reject_rate = sum / trials;
      pt.reject_stderr = std::sqrt(std::max(0.0, sum2 / trials - pt.reject_rate * pt.reject_rate) / trials);
    } else if (p_true >= 1.0) {
      pt.reject_rate = kmin <= t ? 1.0 : 0.0;
    }
    study.points.push_back(pt);
  }

  // Least squares of ln(rate) on n over the points with a positive rate.
  std::vector<double> xs, ys;
  for (const auto& p : study.points)
    if (p.reject_rate > 0.0) {
      xs.push_back(static_cast<double>(p.n));
      ys.push_back(std::log(p.reject_rate));
    }
  if (xs.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
    mx /= xs.size();
    my /= ys.size();
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
      syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx > 0) {
      study.slope = sxy / sxx;
      study.r_squared = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
      if (study.slope < 0) study.halving_rounds = std::log(2.0) / -study.slope;
    }
  }
  return study;
}

std::vector<double> three_step_trap_profile(const NoiseModel& noise, const Link& link, long rounds, std::uint64_t seed) {
  SessionConfig c;
  c.q = 2;
  c.final_basis = FinalBasis::B;
  c.alpha_schedule = {{Octant(0), Octant(0), Octant(0)}};
  c.rounds = rounds;
  c.test_fraction = 1.0;
  c.noise = noise;
  c.link = link;
  c.seed_client = seed;
  c.seed_server = seed + 1;
  auto stats = position_failures(run_in_process(c), 3);
  return {stats.rate(1), stats.rate(2), stats.rate(3)};
}

}  // namespace vbqc
