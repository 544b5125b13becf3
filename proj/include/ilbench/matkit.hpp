#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "ilbench/common.hpp"

namespace ilbench::matkit {

// ---------------------------------------------------------------------------
// Bump functions
// ---------------------------------------------------------------------------

/// Smooth transition: 0 for u <= 0, 1 for u >= 1, (1 - phi(1-u))*phi(u) in
/// between with phi(u) = exp(1 - 1/u). Strictly increasing on (0,1).
double smooth_transition(double u);

/// Radial bump profile: exactly 1 for r <= 1, exactly 0 for r >= 2, smooth
/// and strictly inside (0,1) in between.
double bump_radial(double r);

/// bump_k(z): 1 iff ||z|| <= 1, 0 iff ||z|| >= 2, C-infinity in between.
template <typename Derived>
double bump(const Eigen::MatrixBase<Derived>& z) {
  return bump_radial(z.norm());
}

/// Measured sup of |d^j/dr^j bump(r)|, frozen from a high-precision
/// calibration pass (values rounded up). Orders 1..4 supported.
double bump_derivative_bound(int order);

/// c'_s = max of the derivative bounds up to order s.
double bump_derivative_bound_max(int s);

// ---------------------------------------------------------------------------
// Challenging pair
// ---------------------------------------------------------------------------

/// The two 2x2 systems where each gain stabilizes its own dynamics and
/// destabilizes the other's, while agreeing on everything e2 can reveal.
struct ChallengingPair {
  double mu = 0.0;
  double c_mu = 0.0;  // (3/2) * mu
  Eigen::Matrix2d A1, A2, K1, K2;

  Eigen::Matrix2d A(int i) const { return i == 1 ? A1 : A2; }
  Eigen::Matrix2d K(int i) const { return i == 1 ? K1 : K2; }
};

/// Builds the pair for mu in (0, 1/2]. Throws std::invalid_argument outside.
ChallengingPair challenging_pair(double mu);

// ---------------------------------------------------------------------------
// Spectral quantities
// ---------------------------------------------------------------------------

/// Largest eigenvalue magnitude. Closed form for d = 2; scaled repeated
/// squaring otherwise (intended for small d). Accuracy ~1e-10 on
/// well-conditioned inputs.
struct SpectralResult {
  double value = 0.0;
  bool converged = true;
};
SpectralResult spectral_radius_checked(const Mat& A);
double spectral_radius(const Mat& A);  // throws on non-convergence

/// Operator (2-) norm via the symmetric eigensolver on A^T A.
double operator_norm(const Mat& A);

/// (C, rho) certificate for ||A^s|| <= C rho^s over s = 1..horizon, with
/// rho = spectral_radius(A) + margin (clamped below 1).
struct StabilityEstimate {
  double C = 1.0;
  double rho = 0.0;
  int horizon_used = 0;
  bool stable = false;  // false when spectral radius >= 1
};
StabilityEstimate stability_constants(const Mat& A, int horizon,
                                      double margin = 0.01);

/// max_i ||(A_i + Khat)^H e1|| for a gain that agrees with the pair on e2.
/// Requires ||(Khat - K1) e2|| <= 1e-12; throws otherwise.
double cross_instability(const ChallengingPair& pair,
                         const Eigen::Matrix2d& Khat, int H);

// ---------------------------------------------------------------------------
// Random orthogonal matrices and packings
// ---------------------------------------------------------------------------

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the sign
/// of diag(R) folded into Q.
Mat random_orthogonal(int d, Rng& rng);

struct Packing {
  std::vector<Vec> centers;
  double separation = 0.0;
  double domain_radius = 0.0;
  bool degenerate = false;  // fewer than 2 centers placed

  int size() const { return static_cast<int>(centers.size()); }
  /// Pairwise distances >= separation and all centers inside the domain ball.
  bool check_invariants() const;
};

/// Rejection-sampled packing of the radius-`domain_radius` ball; attempt
/// budget 64 * max_n, deterministic under the given rng.
Packing greedy_packing(int d, double sep, double domain_radius, int max_n,
                       Rng& rng);

}  // namespace ilbench::matkit
