#include "vbqc/polarisation.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace vbqc {

namespace {

Mat2 rotation(double a) {
  Mat2 r;
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return r;
}

double model_t(double theta, double phi, const ScanPoint& s, double qr, double hr) {
  JonesState psi = JonesState::from_angles(theta, phi);
  return transmitted_fraction(psi, {qr, s.q_rad}, {hr, s.h_rad});
}

double objective(double theta, double phi, const std::vector<ScanPoint>& scan, double qr, double hr) {
  double f = 0.0;
  for (const ScanPoint& s : scan) {
    double r = model_t(theta, phi, s, qr, hr) - s.t;
    f += r * r;
  }
  return f;
}

}  // namespace

JonesState::JonesState(const Vec2& a) : amp(a) {
  if (std::abs(a.norm() - 1.0) > kStructTol) throw std::invalid_argument("Jones vector is not normalised");
}

JonesState JonesState::from_angles(double theta, double phi) {
  return JonesState(Vec2(std::cos(theta / 2), std::polar(std::sin(theta / 2), phi)));
}

Mat2 WaveplateSpec::unitary() const {
  const double g = 2.0 * kPi * retardance;
  Mat2 d = Mat2::Zero();
  d(0, 0) = std::polar(1.0, g / 2);
  d(1, 1) = std::polar(1.0, -g / 2);
  return rotation(angle) * d * rotation(-angle);
}

std::array<Mat2, 3> DetectorPovm::elements() const {
  validate();
  Mat2 pp = Mat2::Zero(), ss = Mat2::Zero();
  pp(0, 0) = 1;
  ss(1, 1) = 1;
  Mat2 fp = eta_p * (1 - eps_p) * pp + eta_p * eps_s * ss;
  Mat2 fs = eta_s * (1 - eps_s) * ss + eta_s * eps_p * pp;
  return {fp, fs, Mat2::Identity() - fp - fs};
}

void DetectorPovm::validate() const {
  for (double v : {eta_s, eta_p, eps_s, eps_p})
    if (v < 0.0 || v > 1.0) throw std::invalid_argument("detector parameters must lie in [0,1]");
}

Mat2 analyser_unitary(const EomSpec& eom_a, const EomSpec& eom_b, double u_a, double u_b, const WaveplateSpec& internal_qwp) {
  return eom_b.unitary(u_b) * internal_qwp.unitary() * eom_a.unitary(u_a);
}

double transmitted_fraction(const JonesState& psi, const WaveplateSpec& qwp, const WaveplateSpec& hwp) {
  Vec2 out = qwp.unitary() * hwp.unitary() * Vec2(1, 0);
  return std::clamp(std::norm(psi.amp.dot(out)), 0.0, 1.0);
}

std::vector<ScanPoint> synthetic_scan(const JonesState& psi, double qr, double hr) {
  std::vector<ScanPoint> scan;
  for (double q : {-kPi / 4, 0.0, kPi / 4})
    for (double h : {-kPi / 8, 0.0, kPi / 8, kPi / 4}) scan.push_back({q, h, transmitted_fraction(psi, {qr, q}, {hr, h})});
  return scan;
}

PolarisationFit fit_polarisation_state(const std::vector<ScanPoint>& scan, double qr, double hr) {
  if (scan.size() < 6) throw std::invalid_argument("polarisation fit needs at least 6 scan points");
  PolarisationFit fit;
  auto [tmin, tmax] = std::minmax_element(scan.begin(), scan.end(), [](auto& a, auto& b) { return a.t < b.t; });
  if (tmax->t - tmin->t < 1e-9) fit.ill_conditioned = true;

  constexpr int kGrid = 64;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGrid; ++i) {
    double th = kPi * i / (kGrid - 1);
    for (int j = 0; j < kGrid; ++j) {
      double ph = 2 * kPi * j / kGrid;
      double f = objective(th, ph, scan, qr, hr);
      if (f < best) {
        best = f;
        fit.theta = th;
        fit.phi = ph;
      }
    }
  }

  // Levenberg-Marquardt on the residual vector with central differences.
  const std::size_t n = scan.size();
  Eigen::Vector2d x(fit.theta, fit.phi);
  double mu = 1e-3;
  auto residuals = [&](const Eigen::Vector2d& p) {
    Eigen::VectorXd r(n);
    for (std::size_t k = 0; k < n; ++k) r(k) = model_t(p(0), p(1), scan[k], qr, hr) - scan[k].t;
    return r;
  };
  Eigen::VectorXd r = residuals(x);
  double f = r.squaredNorm();
  for (int it = 0; it < 200 && f > 1e-30; ++it) {
    Eigen::MatrixXd J(n, 2);
    const double h = 1e-7;
    for (int c = 0; c < 2; ++c) {
      Eigen::Vector2d e = Eigen::Vector2d::Zero();
      e(c) = h;
      J.col(c) = (residuals(x + e) - residuals(x - e)) / (2 * h);
    }
    Eigen::Matrix2d A = J.transpose() * J;
    Eigen::Vector2d g = J.transpose() * r;
    bool improved = false;
    for (int tries = 0; tries < 30; ++tries) {
      Eigen::Matrix2d damped = A;
      damped.diagonal().array() += mu * (1.0 + A.diagonal().array());
      Eigen::Vector2d step = damped.ldlt().solve(-g);
      Eigen::VectorXd r_new = residuals(x + step);
      double f_new = r_new.squaredNorm();
      if (f_new < f) {
        x += step;
        improved = f - f_new > 1e-8 * f || step.norm() > 1e-12;
        r = r_new;
        f = f_new;
        mu = std::max(mu / 10, 1e-12);
        break;
      }
      mu *= 10;
    }
    if (!improved) break;
  }

  double th = x(0), ph = x(1);
  th = std::fmod(th, 2 * kPi);
  if (th < 0) th += 2 * kPi;
  if (th > kPi) {
    th = 2 * kPi - th;
    ph += kPi;
  }
  ph = std::fmod(ph, 2 * kPi);
  if (ph < 0) ph += 2 * kPi;
  fit.theta = th;
  fit.phi = ph;
  fit.residual = f;
  fit.phase_identifiable = std::sin(th) > 1e-3;
  return fit;
}

std::array<double, 3> direct_inversion(const std::vector<BasisCounts>& counts) {
  std::array<double, 3> b{};
  std::array<bool, 3> seen{};
  for (const BasisCounts& c : counts) {
    int i = c.basis == 'X' ? 0 : c.basis == 'Y' ? 1 : c.basis == 'Z' ? 2 : -1;
    if (i < 0) throw std::invalid_argument(std::string("unknown tomography basis '") + c.basis + "'");
    long total = c.n_s + c.n_p;
    if (total <= 0 || c.n_s < 0 || c.n_p < 0) throw std::invalid_argument(std::string("no counts in basis ") + c.basis);
    b[i] = static_cast<double>(c.n_s - c.n_p) / static_cast<double>(total);
    seen[i] = true;
  }
  if (!seen[0] || !seen[1] || !seen[2]) throw std::invalid_argument("tomography needs X, Y and Z counts");
  return b;
}

BasisCounts sample_counts(const QuantumState& state, char basis, long shots, Rng& rng) {
  auto b = bloch_vector(state);
  int i = basis == 'X' ? 0 : basis == 'Y' ? 1 : 2;
  double p = std::clamp((1.0 + b[i]) / 2.0, 0.0, 1.0);
  long ns = std::binomial_distribution<long>(shots, p)(rng);
  return {basis, ns, shots - ns};
}

std::array<double, 3> povm_probs(const DetectorPovm& povm, const JonesState& psi) {
  auto f = povm.elements();
  std::array<double, 3> p{};
  for (int i = 0; i < 2; ++i) p[i] = std::max(0.0, psi.amp.dot(f[i] * psi.amp).real());
  p[2] = std::max(0.0, 1.0 - p[0] - p[1]);
  return p;
}

double basis_overlap(const Mat2& u1, const Mat2& u2) {
  Vec2 plus = u1.adjoint() * Vec2(1, 0);
  Vec2 minus = u2.adjoint() * Vec2(0, 1);
  return std::clamp(std::norm(minus.dot(plus)), 0.0, 1.0);
}

double mismatch_from_overlap(double overlap) { return 2.0 * std::asin(std::sqrt(std::clamp(overlap, 0.0, 1.0))); }

Mat2 ideal_analyser_for_equatorial(double theta) {
  // p port transmits conj(|theta>), so the ion is left in |theta>.
  Vec2 a = ket_theta(theta).conjugate();
  Vec2 b = ket_theta(theta + kPi).conjugate();
  Mat2 u;
  u.row(0) = a.adjoint();
  u.row(1) = b.adjoint();
  return u;
}

Mat2 ideal_analyser_for_z(int z) { return z ? gates::X() : gates::I(); }

}  // namespace vbqc
