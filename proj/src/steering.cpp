#include "vbqc/steering.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace vbqc {

namespace {

Mat cnot() {
  Mat c = Mat::Zero(4, 4);
  c(0, 0) = c(1, 1) = c(2, 3) = c(3, 2) = 1.0;
  return c;
}

Mat2 xpow(int m) { return m ? gates::X() : gates::I(); }
Mat2 zpow(int m) { return m ? gates::Z() : gates::I(); }

Vec bell_phi_plus() {
  Vec v = Vec::Zero(4);
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  return v;
}

void check_pair(const Vec& psi) {
  if (psi.size() != 4 || std::abs(psi.norm() - 1.0) > kStructTol)
    throw std::invalid_argument("distinguisher state must be a normalised two-qubit vector");
}

int sample_outcome(const Distinguisher& d, const WorldTranscript& w, Rng& rng) {
  QuantumState b = w.server_output;
  if (d.apply_message) b = apply_unitary(b, Mat(w.message), {0});
  MeasBasis basis = d.basis == 'Z' ? MeasBasis::Z() : MeasBasis::B(0.0);
  return measure(b, basis, 0, rng).first;
}

WorldTranscript draw(World world, const Mat2& U, const Vec& psi, Rng& rng) {
  switch (world) {
    case World::real:
      return run_real_world(U, psi, rng);
    case World::ideal:
      return run_ideal_world(U, psi, rng);
    case World::broken_ideal:
      return run_ideal_world(U, psi, rng, SimulatorVariant::drop_z);
  }
  throw std::logic_error("unknown world");
}

constexpr int kBins = 16;
constexpr int kParams = 8;

int bin_of(double x) { return std::clamp(static_cast<int>((x + 1.0) / 2.0 * kBins), 0, kBins - 1); }

using Histograms = std::array<std::array<double, 2 * kBins>, kParams>;

Histograms histogram(World world, const Mat2& U, const Distinguisher& d, long n, Rng& rng) {
  Histograms h{};
  for (long i = 0; i < n; ++i) {
    WorldTranscript w = draw(world, U, d.psi_ab, rng);
    int o = sample_outcome(d, w, rng);
    for (int k = 0; k < 4; ++k) {
      cplx z = w.message(k / 2, k % 2);
      h[2 * k][2 * bin_of(z.real()) + o] += 1.0 / n;
      h[2 * k + 1][2 * bin_of(z.imag()) + o] += 1.0 / n;
    }
  }
  return h;
}

}  // namespace

Mat2 haar_unitary(Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat2 z;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) z(i, j) = cplx(g(rng), g(rng));
  Eigen::HouseholderQR<Mat2> qr(z);
  Mat2 q = qr.householderQ();
  Mat2 r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < 2; ++j) {
    double a = std::abs(r(j, j));
    if (a > 0) q.col(j) *= r(j, j) / a;
  }
  return q;
}

WorldTranscript run_real_world(const Mat2& U, Rng& rng) {
  WorldTranscript w = run_real_world(U, bell_phi_plus(), rng);
  w.server_output = apply_unitary(w.server_output, Mat(w.message), {0});
  return w;
}

WorldTranscript run_real_world(const Mat2& U, const Vec& psi_ab, Rng& rng) {
  check_pair(psi_ab);
  Mat2 u1 = haar_unitary(rng);
  QuantumState s = apply_unitary(QuantumState::pure(psi_ab), Mat(u1), {0});
  auto [m, rest] = measure(s, MeasBasis::Z(), 0, rng);
  WorldTranscript w;
  w.message = U * xpow(m) * u1.conjugate();
  w.server_output = rest;
  w.outcomes = {m};
  return w;
}

WorldTranscript run_ideal_world(const Mat2& U, const Vec& psi_ab, Rng& rng, SimulatorVariant variant) {
  check_pair(psi_ab);
  Mat2 u1 = haar_unitary(rng);
  // Register: resource qubit U|0>, then the distinguisher's A and B.
  Vec2 res = U.col(0);
  QuantumState s = QuantumState::pure(kron(Mat(res), Mat(psi_ab)));
  s = apply_unitary(s, Mat(u1), {0});
  s = apply_unitary(s, cnot(), {0, 1});
  s = apply_unitary(s, Mat(gates::H()), {0});
  auto [m1, s1] = measure(s, MeasBasis::Z(), 0, rng);
  auto [m2, s2] = measure(s1, MeasBasis::Z(), 0, rng);
  WorldTranscript w;
  w.message = variant == SimulatorVariant::drop_z ? Mat2(u1.adjoint() * xpow(m2))
                                                   : Mat2(u1.adjoint() * zpow(m1) * xpow(m2));
  w.server_output = s2;
  w.outcomes = {m1, m2};
  return w;
}

double tv_distance(const Mat2& U, const Distinguisher& d, long n_samples, World a, World b, Rng& rng) {
  if (n_samples < 1000) throw std::invalid_argument("need at least 1000 samples per world");
  check_pair(d.psi_ab);
  if (d.basis != 'X' && d.basis != 'Z') throw std::invalid_argument("distinguisher basis must be X or Z");
  Histograms ha = histogram(a, U, d, n_samples, rng);
  Histograms hb = histogram(b, U, d, n_samples, rng);
  double worst = 0;
  for (int p = 0; p < kParams; ++p) {
    double tv = 0;
    for (int c = 0; c < 2 * kBins; ++c) tv += std::abs(ha[p][c] - hb[p][c]);
    worst = std::max(worst, tv / 2);
  }
  return worst;
}

double indistinguishability_test(const Mat2& U, const Distinguisher& d, long n_samples, Rng& rng) {
  return tv_distance(U, d, n_samples, World::real, World::ideal, rng);
}

double ks_uniform01(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("empty sample");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double x = std::clamp(xs[i], 0.0, 1.0);
    d = std::max({d, (i + 1) / n - x, x - i / n});
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

double ks_pvalue(double d, double n_eff) {
  double s = std::sqrt(n_eff);
  double lam = (s + 0.12 + 0.11 / s) * d;
  if (lam < 0.2) return 1.0;
  double q = 0, sign = 1;
  for (int k = 1; k <= 100; ++k) {
    double term = sign * 2 * std::exp(-2.0 * k * k * lam * lam);
    q += term;
    if (std::abs(term) < 1e-12) break;
    sign = -sign;
  }
  return std::clamp(q, 0.0, 1.0);
}

}  // namespace vbqc
