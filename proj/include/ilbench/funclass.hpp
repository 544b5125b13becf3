#pragma once

#include <optional>
#include <vector>

#include "ilbench/common.hpp"
#include "ilbench/matkit.hpp"

namespace ilbench::funclass {

// ---------------------------------------------------------------------------
// Bump-packing hard functions
// ---------------------------------------------------------------------------

/// g(z) = sum_i sign_i * (eps^s / (2^s c'_s)) * bump_k(2 (z - z_i) / eps)
/// over a packing of the unit ball with pairwise separation 2*eps, so patch
/// supports are disjoint. |g| <= 1 and all derivatives of order <= s are
/// bounded by 1.
struct SmoothFunction {
  int k = 1;
  int s = 1;
  double eps = 1.0;
  double amplitude = 0.0;
  matkit::Packing packing;
  std::vector<int> signs;  // +1 / -1 per center

  double operator()(const Vec& z) const;
};

SmoothFunction sample_hard_function(int k, int s, double eps, Rng& rng);

/// Identically-zero member of the class (useful as a control).
SmoothFunction zero_function(int k, int s);

inline double eval_g(const SmoothFunction& g, const Vec& z) { return g(z); }

// ---------------------------------------------------------------------------
// Interpolation-regime regression
// ---------------------------------------------------------------------------

struct RegressionSample {
  Mat inputs;  // k x n
  Vec labels;  // n

  int n() const { return static_cast<int>(labels.size()); }
  int k() const { return static_cast<int>(inputs.rows()); }
};

RegressionSample sample_uniform_ball(const SmoothFunction& g, int n, Rng& rng);

/// Local polynomial least squares of the given degree over the
/// neighborhood_size nearest training inputs; exact on training inputs,
/// 1-nearest-neighbor fallback when the local system is rank-deficient.
class LocalEstimator {
 public:
  LocalEstimator() = default;
  LocalEstimator(RegressionSample sample, int degree, int neighborhood_size);

  double predict(const Vec& z) const;
  double operator()(const Vec& z) const { return predict(z); }

  const RegressionSample& sample() const { return sample_; }
  int degree() const { return degree_; }
  int neighborhood_size() const { return neighborhood_size_; }
  bool empty() const { return sample_.n() == 0; }

 private:
  RegressionSample sample_;
  int degree_ = 0;
  int neighborhood_size_ = 1;
};

/// Number of monomials of total degree <= degree in k variables.
int polynomial_coefficient_count(int k, int degree);

/// degree = s - 1, neighborhood = 4 * (#coefficients), per the default
/// estimator recipe.
LocalEstimator fit_local_estimator(RegressionSample sample, int degree,
                                   int neighborhood_size);
LocalEstimator fit_default_estimator(RegressionSample sample, int k, int s);

struct RiskEstimate {
  double risk = 0.0;    // sqrt(E |ghat - g|^2) over the uniform ball
  double stderr_ = 0.0; // delta-method standard error of `risk`
  int m_queries = 0;
};

template <typename Predictor>
RiskEstimate regression_risk_fn(const Predictor& ghat, const SmoothFunction& g,
                                int m_queries, Rng& rng) {
  if (m_queries < 1)
    throw std::invalid_argument("regression_risk: m_queries must be >= 1");
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < m_queries; ++i) {
    const Vec z = rng.uniform_ball(g.k);
    const double e = ghat(z) - g(z);
    const double e2 = e * e;
    sum += e2;
    sumsq += e2 * e2;
  }
  const double mean = sum / m_queries;
  const double var = std::max(0.0, sumsq / m_queries - mean * mean);
  const double se_mean = std::sqrt(var / m_queries);
  RiskEstimate out;
  out.m_queries = m_queries;
  out.risk = std::sqrt(mean);
  out.stderr_ = mean > 0.0 ? se_mean / (2.0 * out.risk) : se_mean;
  return out;
}

RiskEstimate regression_risk(const LocalEstimator& est, const SmoothFunction& g,
                             int m_queries, Rng& rng);

// ---------------------------------------------------------------------------
// Rate sweep
// ---------------------------------------------------------------------------

struct RateSweepResult {
  double slope = 0.0;                // log-log slope of risk vs n
  bool skipped = false;              // risk ~ 0 everywhere (degenerate target)
  std::vector<int> n_grid;
  std::vector<double> mean_risk;     // per n, averaged over seeds
};

/// For each n: hard function with eps = n^{-1/k} (unless eps_override), n
/// noiseless samples, default estimator, Monte Carlo risk; least-squares
/// slope of log(mean risk) against log(n).
RateSweepResult rate_sweep(int k, int s, const std::vector<int>& n_grid,
                           int seeds, Rng& rng, int m_queries = 2048,
                           std::optional<double> eps_override = std::nullopt);

/// Slope fit shared by rate_sweep; degenerate (all ~zero) risks are flagged
/// as skipped instead of producing a meaningless slope.
RateSweepResult fit_rate_slope(const std::vector<int>& n_grid,
                               const std::vector<double>& mean_risk);

}  // namespace ilbench::funclass
