#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "vbqc/rng.hpp"

namespace vbqc {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;

constexpr double kPi = 3.14159265358979323846;
constexpr double kStructTol = 1e-9;
constexpr double kProbTol = 1e-12;
constexpr double kEigClamp = 1e-12;

// Density operator on up to three qubits.  Qubit 0 is the most significant
// bit of the computational-basis index.  A zero-qubit state (dim 1) is what
// remains after measuring the last qubit of a register.
class QuantumState {
 public:
  QuantumState();
  explicit QuantumState(Mat rho);

  static QuantumState pure(const Vec& psi);
  static QuantumState maximally_mixed(int n_qubits);
  static QuantumState basis(int n_qubits, int index);

  int dim() const { return static_cast<int>(rho_.rows()); }
  int n_qubits() const;
  const Mat& matrix() const { return rho_; }

  // Throws std::invalid_argument if trace, Hermiticity or positivity fail.
  void validate() const;

  struct Unchecked {};
  QuantumState(Mat rho, Unchecked) : rho_(std::move(rho)) {}

 private:
  Mat rho_;
};

class UnitaryOp {
 public:
  explicit UnitaryOp(Mat u);
  int dim() const { return static_cast<int>(u_.rows()); }
  const Mat& matrix() const { return u_; }
  UnitaryOp adjoint() const { return UnitaryOp(u_.adjoint()); }

 private:
  Mat u_;
};

// B_alpha has eigenvectors (|0> +- e^{i alpha}|1>)/sqrt2 with outcome 0 on the
// plus sign.  Z has outcome 0 on |0>.
struct MeasBasis {
  enum class Kind { B, Z };
  Kind kind = Kind::Z;
  double angle = 0.0;

  static MeasBasis B(double alpha) { return {Kind::B, alpha}; }
  static MeasBasis B_octant(int k) { return {Kind::B, k * kPi / 4.0}; }
  static MeasBasis Z() { return {Kind::Z, 0.0}; }

  // Eigenvector for the given outcome.
  Vec2 eigenvector(int outcome) const;
};

struct Channel {
  enum class Kind { depolarize, z_rotation, bitflip, dephase };
  Kind kind;
  double param;
  int target;

  static Channel depolarize(double lambda, int target) { return {Kind::depolarize, lambda, target}; }
  static Channel z_rotation(double phi, int target) { return {Kind::z_rotation, phi, target}; }
  static Channel bitflip(double p, int target) { return {Kind::bitflip, p, target}; }
  // Phase flip with probability p; leaves Z eigenstates untouched.
  static Channel dephase(double p, int target) { return {Kind::dephase, p, target}; }

  std::vector<Mat2> kraus() const;
};

namespace gates {
Mat2 I();
Mat2 X();
Mat2 Y();
Mat2 Z();
Mat2 H();
Mat2 S();
// exp(-i a Z / 2)
Mat2 rz(double a);
// exp(-i a X / 2)
Mat2 rx(double a);
Mat CZ();
Mat SWAP();
// |01> -> i|10>, |10> -> i|01>, |00> and |11> fixed.
Mat ISWAP();
}  // namespace gates

// (|0> + e^{i theta}|1>)/sqrt2
Vec2 ket_theta(double theta);
Vec2 ket_bit(int b);

Mat kron(const Mat& a, const Mat& b);
QuantumState tensor(const QuantumState& a, const QuantumState& b);

// Full-register operator acting as u on the listed targets (in order).
Mat embed(const Mat& u, const std::vector<int>& targets, int n_qubits);

QuantumState apply_unitary(const QuantumState& state, const UnitaryOp& u, const std::vector<int>& targets);
QuantumState apply_unitary(const QuantumState& state, const Mat& u, const std::vector<int>& targets);

std::array<double, 2> outcome_probs(const QuantumState& state, const MeasBasis& basis, int target);

// Post-measurement state for a fixed outcome with the measured qubit removed,
// together with its probability.  Throws if the outcome has zero probability.
std::pair<double, QuantumState> project(const QuantumState& state, const MeasBasis& basis, int target, int outcome);

std::pair<int, QuantumState> measure(const QuantumState& state, const MeasBasis& basis, int target, Rng& rng);

QuantumState apply_channel(const QuantumState& state, const Channel& ch);

QuantumState partial_trace(const QuantumState& state, const std::vector<int>& keep);

double fidelity(const QuantumState& a, const QuantumState& b);

std::array<double, 3> bloch_vector(const QuantumState& state);
QuantumState from_bloch(const std::array<double, 3>& b);

// Entropy in bits of a Hermitian, unit-trace matrix.
template <typename Derived>
double von_neumann_entropy(const Eigen::MatrixBase<Derived>& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>> es(
      rho.eval(), Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    double p = es.eigenvalues()(i);
    if (p > kEigClamp) s -= p * std::log2(p);
  }
  return s;
}

inline double von_neumann_entropy(const QuantumState& state) { return von_neumann_entropy(state.matrix()); }

// Binary entropy in bits.
double binary_entropy(double p);

}  // namespace vbqc
