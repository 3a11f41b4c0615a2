#include "vbqc/qcore.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace vbqc {

namespace {

int log2_dim(Eigen::Index dim) {
  switch (dim) {
    case 1: return 0;
    case 2: return 1;
    case 4: return 2;
    case 8: return 3;
    default: throw std::invalid_argument("register dimension must be 1, 2, 4 or 8, got " + std::to_string(dim));
  }
}

int bit_of(int index, int qubit, int n) { return (index >> (n - 1 - qubit)) & 1; }

void check_target(int target, int n) {
  if (target < 0 || target >= n) throw std::out_of_range("qubit index " + std::to_string(target) + " out of range");
}

#ifndef NDEBUG
void debug_check(const QuantumState& s) { s.validate(); }
#else
void debug_check(const QuantumState&) {}
#endif

}  // namespace

QuantumState::QuantumState() : rho_(Mat::Zero(2, 2)) { rho_(0, 0) = 1.0; }

QuantumState::QuantumState(Mat rho) : rho_(std::move(rho)) { validate(); }

QuantumState QuantumState::pure(const Vec& psi) {
  double n = psi.norm();
  if (n < kStructTol) throw std::invalid_argument("zero state vector");
  Vec v = psi / n;
  return QuantumState(v * v.adjoint());
}

QuantumState QuantumState::maximally_mixed(int n_qubits) {
  int d = 1 << n_qubits;
  return QuantumState(Mat::Identity(d, d) / static_cast<double>(d));
}

QuantumState QuantumState::basis(int n_qubits, int index) {
  int d = 1 << n_qubits;
  Mat rho = Mat::Zero(d, d);
  rho(index, index) = 1.0;
  return QuantumState(rho);
}

int QuantumState::n_qubits() const { return log2_dim(rho_.rows()); }

void QuantumState::validate() const {
  if (rho_.rows() != rho_.cols()) throw std::invalid_argument("density matrix is not square");
  log2_dim(rho_.rows());
  if (std::abs(rho_.trace() - cplx(1.0, 0.0)) > kStructTol) throw std::invalid_argument("density matrix trace differs from 1");
  if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > kStructTol) throw std::invalid_argument("density matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Mat> es(rho_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kStructTol) throw std::invalid_argument("density matrix has a negative eigenvalue");
}

UnitaryOp::UnitaryOp(Mat u) : u_(std::move(u)) {
  if (u_.rows() != u_.cols()) throw std::invalid_argument("unitary is not square");
  Mat id = Mat::Identity(u_.rows(), u_.cols());
  if ((u_ * u_.adjoint() - id).cwiseAbs().maxCoeff() > kStructTol) throw std::invalid_argument("matrix is not unitary");
}

Vec2 MeasBasis::eigenvector(int outcome) const {
  if (kind == Kind::Z) return ket_bit(outcome);
  return ket_theta(angle + (outcome ? kPi : 0.0));
}

std::vector<Mat2> Channel::kraus() const {
  switch (kind) {
    case Kind::depolarize: {
      if (param < 0.0 || param > 1.0) throw std::invalid_argument("depolarizing strength outside [0,1]");
      double a = std::sqrt(1.0 - 3.0 * param / 4.0), b = std::sqrt(param / 4.0);
      return {a * gates::I(), b * gates::X(), b * gates::Y(), b * gates::Z()};
    }
    case Kind::z_rotation:
      return {gates::rz(param)};
    case Kind::bitflip:
      if (param < 0.0 || param > 1.0) throw std::invalid_argument("flip probability outside [0,1]");
      return {std::sqrt(1.0 - param) * gates::I(), std::sqrt(param) * gates::X()};
    case Kind::dephase:
      if (param < 0.0 || param > 1.0) throw std::invalid_argument("flip probability outside [0,1]");
      return {std::sqrt(1.0 - param) * gates::I(), std::sqrt(param) * gates::Z()};
  }
  throw std::logic_error("unknown channel kind");
}

namespace gates {
Mat2 I() { return Mat2::Identity(); }
Mat2 X() { Mat2 m; m << 0, 1, 1, 0; return m; }
Mat2 Y() { Mat2 m; m << 0, cplx(0, -1), cplx(0, 1), 0; return m; }
Mat2 Z() { Mat2 m; m << 1, 0, 0, -1; return m; }
Mat2 H() { Mat2 m; m << 1, 1, 1, -1; return m / std::sqrt(2.0); }
Mat2 S() { Mat2 m; m << 1, 0, 0, cplx(0, 1); return m; }
Mat2 rz(double a) {
  Mat2 m = Mat2::Zero();
  m(0, 0) = std::polar(1.0, -a / 2);
  m(1, 1) = std::polar(1.0, a / 2);
  return m;
}
Mat2 rx(double a) {
  Mat2 m;
  m << std::cos(a / 2), cplx(0, -std::sin(a / 2)), cplx(0, -std::sin(a / 2)), std::cos(a / 2);
  return m;
}
Mat CZ() {
  Mat m = Mat::Identity(4, 4);
  m(3, 3) = -1;
  return m;
}
Mat SWAP() {
  Mat m = Mat::Zero(4, 4);
  m(0, 0) = m(3, 3) = 1;
  m(1, 2) = m(2, 1) = 1;
  return m;
}
Mat ISWAP() {
  Mat m = Mat::Zero(4, 4);
  m(0, 0) = m(3, 3) = 1;
  m(1, 2) = m(2, 1) = cplx(0, 1);
  return m;
}
}  // namespace gates

Vec2 ket_theta(double theta) {
  Vec2 v(1.0, std::polar(1.0, theta));
  return v / std::sqrt(2.0);
}

Vec2 ket_bit(int b) { return b ? Vec2(0, 1) : Vec2(1, 0); }

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

QuantumState tensor(const QuantumState& a, const QuantumState& b) {
  return QuantumState(kron(a.matrix(), b.matrix()), QuantumState::Unchecked{});
}

Mat embed(const Mat& u, const std::vector<int>& targets, int n) {
  const int k = static_cast<int>(targets.size());
  if (u.rows() != (1 << k) || u.cols() != (1 << k)) throw std::invalid_argument("operator dimension does not match target count");
  int mask = 0;
  for (int t : targets) {
    check_target(t, n);
    int bit = 1 << (n - 1 - t);
    if (mask & bit) throw std::invalid_argument("repeated target qubit");
    mask |= bit;
  }
  const int d = 1 << n;
  auto sub = [&](int idx) {
    int s = 0;
    for (int t : targets) s = (s << 1) | bit_of(idx, t, n);
    return s;
  };
  Mat m = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if ((i & ~mask) == (j & ~mask)) m(i, j) = u(sub(i), sub(j));
  return m;
}

QuantumState apply_unitary(const QuantumState& state, const Mat& u, const std::vector<int>& targets) {
  Mat full = embed(u, targets, state.n_qubits());
  QuantumState out(full * state.matrix() * full.adjoint(), QuantumState::Unchecked{});
  debug_check(out);
  return out;
}

QuantumState apply_unitary(const QuantumState& state, const UnitaryOp& u, const std::vector<int>& targets) {
  return apply_unitary(state, u.matrix(), targets);
}

namespace {

// (<v| on target) (x) I on the rest, as a (d/2) x d matrix.
Mat bra_on(const Vec2& v, int target, int n) {
  const int d = 1 << n;
  Mat k = Mat::Zero(d / 2, d);
  const int low_bits = n - 1 - target;
  for (int j = 0; j < d; ++j) {
    int b = bit_of(j, target, n);
    int hi = j >> (low_bits + 1);
    int lo = j & ((1 << low_bits) - 1);
    int row = (hi << low_bits) | lo;
    k(row, j) = std::conj(v(b));
  }
  return k;
}

}  // namespace

std::array<double, 2> outcome_probs(const QuantumState& state, const MeasBasis& basis, int target) {
  const int n = state.n_qubits();
  check_target(target, n);
  std::array<double, 2> p{};
  for (int o = 0; o < 2; ++o) {
    Mat k = bra_on(basis.eigenvector(o), target, n);
    p[o] = std::max(0.0, (k * state.matrix() * k.adjoint()).trace().real());
  }
  double s = p[0] + p[1];
  p[0] /= s;
  p[1] /= s;
  return p;
}

std::pair<double, QuantumState> project(const QuantumState& state, const MeasBasis& basis, int target, int outcome) {
  const int n = state.n_qubits();
  check_target(target, n);
  Mat k = bra_on(basis.eigenvector(outcome), target, n);
  Mat post = k * state.matrix() * k.adjoint();
  double p = post.trace().real();
  if (p <= kProbTol) throw std::domain_error("projection onto an outcome of zero probability");
  post /= p;
  QuantumState out(std::move(post), QuantumState::Unchecked{});
  debug_check(out);
  return {p, out};
}

std::pair<int, QuantumState> measure(const QuantumState& state, const MeasBasis& basis, int target, Rng& rng) {
  auto p = outcome_probs(state, basis, target);
  int m = uniform01(rng) < p[1] ? 1 : 0;
  if (p[m] <= kProbTol) m ^= 1;
  return {m, project(state, basis, target, m).second};
}

QuantumState apply_channel(const QuantumState& state, const Channel& ch) {
  const int n = state.n_qubits();
  check_target(ch.target, n);
  Mat out = Mat::Zero(state.dim(), state.dim());
  for (const Mat2& k2 : ch.kraus()) {
    Mat k = embed(k2, {ch.target}, n);
    out += k * state.matrix() * k.adjoint();
  }
  QuantumState s(std::move(out), QuantumState::Unchecked{});
  debug_check(s);
  return s;
}

QuantumState partial_trace(const QuantumState& state, const std::vector<int>& keep) {
  const int n = state.n_qubits();
  int keep_mask = 0;
  for (int t : keep) {
    check_target(t, n);
    keep_mask |= 1 << (n - 1 - t);
  }
  const int d = 1 << n;
  const int dk = 1 << keep.size();
  auto sub = [&](int idx) {
    int s = 0;
    for (int t : keep) s = (s << 1) | bit_of(idx, t, n);
    return s;
  };
  Mat out = Mat::Zero(dk, dk);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if ((i & ~keep_mask) == (j & ~keep_mask)) out(sub(i), sub(j)) += state.matrix()(i, j);
  return QuantumState(std::move(out), QuantumState::Unchecked{});
}

namespace {
Mat psd_sqrt(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}
}  // namespace

double fidelity(const QuantumState& a, const QuantumState& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("fidelity of states with different dimensions");
  // Pure and single-qubit cases have closed forms that avoid square roots of
  // near-zero eigenvalues.
  double overlap = (a.matrix() * b.matrix()).trace().real();
  auto purity = [](const Mat& m) { return (m * m).trace().real(); };
  if (std::abs(purity(a.matrix()) - 1.0) < kProbTol || std::abs(purity(b.matrix()) - 1.0) < kProbTol)
    return std::clamp(overlap, 0.0, 1.0);
  if (a.dim() == 2) {
    double da = std::max(0.0, a.matrix().determinant().real());
    double db = std::max(0.0, b.matrix().determinant().real());
    return std::clamp(overlap + 2.0 * std::sqrt(da * db), 0.0, 1.0);
  }
  Mat sa = psd_sqrt(a.matrix());
  Mat inner = sa * b.matrix() * sa;
  inner = (inner + inner.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(inner, Eigen::EigenvaluesOnly);
  double t = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return std::clamp(t * t, 0.0, 1.0);
}

std::array<double, 3> bloch_vector(const QuantumState& state) {
  if (state.dim() != 2) throw std::invalid_argument("Bloch vector of a multi-qubit state");
  const Mat& r = state.matrix();
  return {2.0 * r(0, 1).real(), -2.0 * r(0, 1).imag(), (r(0, 0) - r(1, 1)).real()};
}

QuantumState from_bloch(const std::array<double, 3>& b) {
  Mat2 r = (gates::I() + b[0] * gates::X() + b[1] * gates::Y() + b[2] * gates::Z()) / 2.0;
  return QuantumState(Mat(r));
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1 - p) * std::log2(1 - p);
}

}  // namespace vbqc
