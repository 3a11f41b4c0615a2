#pragma once

#include <stdexcept>

namespace vbqc {

// Component fidelities.  F_theta is a single steering operation, F_theta_prime
// the steering fidelity seen by the protocol once calibration drift and the
// detector-dependent phase are included.
struct FidelityBudget {
  double F_theta = 0.973;
  double F_theta_prime = 0.924;
  double F_z = 0.996;
  double F_iS = 0.913;
  double F_iS_prime = 0.973;
  double F_map = 0.98;

  static FidelityBudget ideal() { return {1, 1, 1, 1, 1, 1}; }

  void validate() const {
    for (double f : {F_theta, F_theta_prime, F_z, F_iS, F_iS_prime, F_map})
      if (f < 0.5 || f > 1.0) throw std::invalid_argument("fidelities must lie in [0.5, 1]");
  }
};

// Strength of the depolarizing channel that lowers a trap's pass probability
// by the factor F.
inline double depolarizing_strength(double fidelity) { return 2.0 * (1.0 - fidelity); }

struct NoiseModel {
  FidelityBudget budget;
  double p_errdetect = 0.1;
  bool error_detection = true;

  static NoiseModel ideal() {
    NoiseModel n;
    n.budget = FidelityBudget::ideal();
    n.p_errdetect = 0.0;
    return n;
  }

  void validate() const {
    budget.validate();
    if (p_errdetect < 0.0 || p_errdetect >= 1.0) throw std::invalid_argument("p_errdetect must lie in [0, 1)");
  }
};

}  // namespace vbqc
