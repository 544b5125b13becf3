#include "ilbench/matkit.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace ilbench::matkit {

double smooth_transition(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const auto phi = [](double v) { return std::exp(1.0 - 1.0 / v); };
  return (1.0 - phi(1.0 - u)) * phi(u);
}

double bump_radial(double r) {
  // Argument rescaled so the plateau ends at r = 1 and the support at r = 2:
  // (4 - r^2)/3 maps [1,2] onto [1,0].
  return smooth_transition((4.0 - r * r) / 3.0);
}

namespace {
// Frozen from a high-precision calibration of sup_r |d^j bump_radial(r)|
// (peaks at r ~ 1.45, 1.74, 1.87, 1.92), rounded up ~5%.
constexpr double kBumpDerivBound[4] = {1.92, 6.5, 60.0, 1250.0};
}  // namespace

double bump_derivative_bound(int order) {
  if (order < 1 || order > 4)
    throw std::invalid_argument("bump_derivative_bound: order must be in 1..4");
  return kBumpDerivBound[order - 1];
}

double bump_derivative_bound_max(int s) {
  double m = 0.0;
  for (int j = 1; j <= s; ++j) m = std::max(m, bump_derivative_bound(j));
  return m;
}

ChallengingPair challenging_pair(double mu) {
  if (!(mu > 0.0 && mu <= 0.5))
    throw std::invalid_argument("challenging_pair: mu must lie in (0, 1/2]");
  ChallengingPair p;
  p.mu = mu;
  p.c_mu = 1.5 * mu;
  const double c = p.c_mu;
  p.A1 << 1.0 + mu, c, -c, 1.0 - 2.0 * mu;
  p.A2 << -(1.0 - 0.25 * mu), c, 0.0, 1.0 - 2.0 * mu;
  p.K1 << -(1.0 + mu), -c, c, 0.0;
  p.K2 << (1.0 - 0.25 * mu), -c, 0.0, 0.0;
  return p;
}

SpectralResult spectral_radius_checked(const Mat& A) {
  if (A.rows() != A.cols())
    throw std::invalid_argument("spectral_radius: matrix must be square");
  const int d = static_cast<int>(A.rows());
  if (d == 1) return {std::abs(A(0, 0)), true};
  if (d == 2) {
    const double tr = A(0, 0) + A(1, 1);
    const double det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
    const double disc = tr * tr - 4.0 * det;
    if (disc >= 0.0) {
      const double s = std::sqrt(disc);
      return {std::max(std::abs((tr + s) / 2.0), std::abs((tr - s) / 2.0)),
              true};
    }
    return {std::sqrt(det), true};  // complex pair, |lambda|^2 = det
  }

  // rho(A) = lim ||A^m||^{1/m}; repeated squaring with norm rescaling gives
  // m = 2^50 in 50 multiplies, which crushes the polynomial slack from
  // defective eigenvalues well below 1e-10.
  const int kSquarings = 50;
  Mat B = A;
  double acc = 0.0;  // log ||A^m|| = acc + log ||B||, B rescaled each round
  for (int it = 0; it < kSquarings; ++it) {
    const double n = operator_norm(B);
    if (n == 0.0) return {0.0, true};
    if (!std::isfinite(n)) return {0.0, false};
    acc = 2.0 * (acc + std::log(n));
    Mat Bn = B / n;
    B = (Bn * Bn).eval();
  }
  const double m = std::pow(2.0, kSquarings);
  const double final_norm = operator_norm(B);
  if (!(final_norm > 0.0) || !std::isfinite(final_norm)) return {0.0, false};
  return {std::exp((acc + std::log(final_norm)) / m), true};
}

double spectral_radius(const Mat& A) {
  const SpectralResult r = spectral_radius_checked(A);
  if (!r.converged)
    throw std::runtime_error("spectral_radius: iteration failed to converge");
  return r.value;
}

double operator_norm(const Mat& A) {
  if (A.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(A.transpose() * A,
                                        Eigen::EigenvaluesOnly);
  const double lam = es.eigenvalues().maxCoeff();
  return lam > 0.0 ? std::sqrt(lam) : 0.0;
}

StabilityEstimate stability_constants(const Mat& A, int horizon,
                                      double margin) {
  if (horizon < 1)
    throw std::invalid_argument("stability_constants: horizon must be >= 1");
  StabilityEstimate out;
  out.horizon_used = horizon;
  const double sr = spectral_radius(A);
  if (sr >= 1.0) {
    out.stable = false;
    out.rho = sr;
    return out;
  }
  out.stable = true;
  out.rho = std::min(sr + margin, std::nextafter(1.0, 0.0));
  double C = 1.0;
  Mat P = Mat::Identity(A.rows(), A.cols());
  double rho_pow = 1.0;
  for (int s = 1; s <= horizon; ++s) {
    P = (P * A).eval();
    rho_pow *= out.rho;
    C = std::max(C, operator_norm(P) / rho_pow);
  }
  out.C = C;
  return out;
}

double cross_instability(const ChallengingPair& pair,
                         const Eigen::Matrix2d& Khat, int H) {
  if (H < 0) throw std::invalid_argument("cross_instability: H must be >= 0");
  const Eigen::Vector2d e2(0.0, 1.0);
  if (((Khat - pair.K1) * e2).norm() > 1e-12)
    throw std::invalid_argument(
        "cross_instability: Khat e2 must equal K1 e2 (within 1e-12)");
  const Eigen::Vector2d e1(1.0, 0.0);
  double best = 0.0;
  for (int i : {1, 2}) {
    Eigen::Matrix2d M = pair.A(i) + Khat;
    Eigen::Vector2d v = e1;
    for (int s = 0; s < H; ++s) v = M * v;
    best = std::max(best, v.norm());
  }
  return best;
}

Mat random_orthogonal(int d, Rng& rng) {
  if (d < 1) throw std::invalid_argument("random_orthogonal: d must be >= 1");
  Mat G(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) G(i, j) = rng.normal();
  Eigen::HouseholderQR<Mat> qr(G);
  Mat Q = qr.householderQ();
  Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j)
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  return Q;
}

bool Packing::check_invariants() const {
  const int n = size();
  for (int i = 0; i < n; ++i) {
    if (centers[i].norm() > domain_radius + 1e-12) return false;
    for (int j = i + 1; j < n; ++j)
      if ((centers[i] - centers[j]).norm() < separation - 1e-12) return false;
  }
  return true;
}

Packing greedy_packing(int d, double sep, double domain_radius, int max_n,
                       Rng& rng) {
  if (!(sep > 0.0)) throw std::invalid_argument("greedy_packing: sep must be > 0");
  Packing p;
  p.separation = sep;
  p.domain_radius = domain_radius;
  const long budget = 64L * std::max(1, max_n);
  for (long attempt = 0; attempt < budget && p.size() < max_n; ++attempt) {
    Vec cand = rng.uniform_ball(d, domain_radius);
    bool ok = true;
    for (const Vec& c : p.centers) {
      if ((cand - c).norm() < sep) {
        ok = false;
        break;
      }
    }
    if (ok) p.centers.push_back(std::move(cand));
  }
  p.degenerate = p.size() < 2;
  return p;
}

}  // namespace ilbench::matkit
