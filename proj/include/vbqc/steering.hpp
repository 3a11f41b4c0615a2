#pragma once

#include <vector>

#include "vbqc/qcore.hpp"

namespace vbqc {

// QR of a complex Gaussian matrix with the phases of R's diagonal moved into Q.
Mat2 haar_unitary(Rng& rng);

struct WorldTranscript {
  Mat2 message;                // U2 sent to the server
  QuantumState server_output;  // the qubit the server ends up holding
  std::vector<int> outcomes;   // m (real world) or (m1, m2) (simulator)
};

// Honest run: the client keeps half of |Phi+>, applies a Haar U1 to it and
// measures m; the server applies U2 = U X^m conj(U1) to its half.
WorldTranscript run_real_world(const Mat2& U, Rng& rng);

// The server supplies psi_ab, sends qubit A to the client and keeps B.
// server_output is B after the client's measurement; no U2 applied.
WorldTranscript run_real_world(const Mat2& U, const Vec& psi_ab, Rng& rng);

enum class SimulatorVariant { faithful, drop_z };

// Simulator: applies U1 to A, Bell-measures A with the resource qubit U|0>
// and announces U2 = U1^dag Z^m1 X^m2.
WorldTranscript run_ideal_world(const Mat2& U, const Vec& psi_ab, Rng& rng,
                                SimulatorVariant variant = SimulatorVariant::faithful);

// Fixed input state and fixed output measurement (basis 'X' or 'Z' on B,
// optionally after applying the received U2).
struct Distinguisher {
  Vec psi_ab;
  char basis = 'X';
  bool apply_message = false;
};

enum class World { real, ideal, broken_ideal };

// Largest total-variation distance over the eight real parameters of U2, each
// cut into 16 bins and taken jointly with the distinguisher's outcome.
double tv_distance(const Mat2& U, const Distinguisher& d, long n_samples, World a, World b, Rng& rng);
double indistinguishability_test(const Mat2& U, const Distinguisher& d, long n_samples, Rng& rng);

// Kolmogorov-Smirnov statistics and the asymptotic p-value.
double ks_uniform01(std::vector<double> xs);
double ks_two_sample(std::vector<double> a, std::vector<double> b);
double ks_pvalue(double d, double n_eff);

}  // namespace vbqc
