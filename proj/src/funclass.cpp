#include "ilbench/funclass.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ilbench::funclass {

double SmoothFunction::operator()(const Vec& z) const {
  if (z.size() != k)
    throw std::invalid_argument("SmoothFunction: dimension mismatch");
  double v = 0.0;
  for (int i = 0; i < packing.size(); ++i) {
    const double r = (z - packing.centers[i]).norm();
    if (r < eps) v += signs[i] * amplitude * matkit::bump_radial(2.0 * r / eps);
  }
  return v;
}

SmoothFunction sample_hard_function(int k, int s, double eps, Rng& rng) {
  if (!(eps > 0.0 && eps <= 1.0))
    throw std::invalid_argument("sample_hard_function: eps must be in (0,1]");
  if (s < 1 || s > 4)
    throw std::invalid_argument("sample_hard_function: s must be in 1..4");
  SmoothFunction g;
  g.k = k;
  g.s = s;
  g.eps = eps;
  g.amplitude =
      std::pow(eps, s) / (std::pow(2.0, s) * matkit::bump_derivative_bound_max(s));
  // Separation 2*eps keeps patch supports disjoint, so at most one patch is
  // active at any point and the per-patch derivative bounds carry over.
  // Volume bound on how many centers can fit caps the attempt budget.
  const double cap = std::pow(1.0 / eps + 1.0, k);
  const int max_n = std::min(8192, std::max(1, static_cast<int>(std::ceil(cap))));
  g.packing = matkit::greedy_packing(k, 2.0 * eps, 1.0, max_n, rng);
  g.signs.resize(g.packing.size());
  for (auto& sgn : g.signs) sgn = rng.coin() ? 1 : -1;
  return g;
}

SmoothFunction zero_function(int k, int s) {
  SmoothFunction g;
  g.k = k;
  g.s = s;
  g.eps = 1.0;
  g.amplitude = 0.0;
  g.packing.separation = 2.0;
  g.packing.domain_radius = 1.0;
  g.packing.degenerate = true;
  return g;
}

RegressionSample sample_uniform_ball(const SmoothFunction& g, int n, Rng& rng) {
  RegressionSample s;
  s.inputs.resize(g.k, n);
  s.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    const Vec z = rng.uniform_ball(g.k);
    s.inputs.col(i) = z;
    s.labels[i] = g(z);
  }
  return s;
}

int polynomial_coefficient_count(int k, int degree) {
  // C(k + degree, degree)
  long num = 1, den = 1;
  for (int j = 1; j <= degree; ++j) {
    num *= k + j;
    den *= j;
  }
  return static_cast<int>(num / den);
}

LocalEstimator::LocalEstimator(RegressionSample sample, int degree,
                               int neighborhood_size)
    : sample_(std::move(sample)),
      degree_(degree),
      neighborhood_size_(neighborhood_size) {
  if (sample_.n() == 0)
    throw std::invalid_argument("LocalEstimator: empty sample");
  if (neighborhood_size_ < 1 || neighborhood_size_ > sample_.n())
    throw std::invalid_argument(
        "LocalEstimator: neighborhood_size must be in [1, n]");
}

namespace {

// Monomial features of (z - z0), total degree <= degree, intercept first.
void fill_features(const Vec& dz, int degree, Eigen::RowVectorXd& row) {
  const int k = static_cast<int>(dz.size());
  int idx = 0;
  row[idx++] = 1.0;
  if (degree >= 1)
    for (int i = 0; i < k; ++i) row[idx++] = dz[i];
  if (degree >= 2)
    for (int i = 0; i < k; ++i)
      for (int j = i; j < k; ++j) row[idx++] = dz[i] * dz[j];
  if (degree >= 3)
    for (int i = 0; i < k; ++i)
      for (int j = i; j < k; ++j)
        for (int l = j; l < k; ++l) row[idx++] = dz[i] * dz[j] * dz[l];
  if (degree > 3)
    throw std::invalid_argument("LocalEstimator: degree > 3 not supported");
}

}  // namespace

double LocalEstimator::predict(const Vec& z) const {
  const int n = sample_.n();
  // Nearest neighbors by linear scan.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> d2(n);
  for (int i = 0; i < n; ++i) d2[i] = (sample_.inputs.col(i) - z).squaredNorm();
  const int m = std::min(neighborhood_size_, n);
  std::partial_sort(order.begin(), order.begin() + m, order.end(),
                    [&](int a, int b) { return d2[a] < d2[b]; });
  if (d2[order[0]] == 0.0) return sample_.labels[order[0]];  // interpolation

  const int p = polynomial_coefficient_count(static_cast<int>(z.size()), degree_);
  if (degree_ == 0 || m < p) {
    // Local constant: average of the neighborhood (1-NN when m == 1).
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += sample_.labels[order[i]];
    return s / m;
  }

  Mat X(m, p);
  Vec y(m);
  Eigen::RowVectorXd row(p);
  for (int i = 0; i < m; ++i) {
    fill_features(sample_.inputs.col(order[i]) - z, degree_, row);
    X.row(i) = row;
    y[i] = sample_.labels[order[i]];
  }
  Eigen::ColPivHouseholderQR<Mat> qr(X);
  if (qr.rank() < p) return sample_.labels[order[0]];  // 1-NN fallback
  const Vec beta = qr.solve(y);
  return beta[0];  // features centered at z: intercept is the prediction
}

LocalEstimator fit_local_estimator(RegressionSample sample, int degree,
                                   int neighborhood_size) {
  return LocalEstimator(std::move(sample), degree, neighborhood_size);
}

LocalEstimator fit_default_estimator(RegressionSample sample, int k, int s) {
  const int degree = s - 1;
  const int p = polynomial_coefficient_count(k, degree);
  const int nb = std::min(sample.n(), 4 * p);
  return LocalEstimator(std::move(sample), degree, nb);
}

RiskEstimate regression_risk(const LocalEstimator& est, const SmoothFunction& g,
                             int m_queries, Rng& rng) {
  return regression_risk_fn(est, g, m_queries, rng);
}

RateSweepResult fit_rate_slope(const std::vector<int>& n_grid,
                               const std::vector<double>& mean_risk) {
  RateSweepResult out;
  out.n_grid = n_grid;
  out.mean_risk = mean_risk;
  // Degenerate targets give ~zero risk at every n; no slope to report.
  const double top = *std::max_element(mean_risk.begin(), mean_risk.end());
  if (top < 1e-14) {
    out.skipped = true;
    return out;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int m = static_cast<int>(n_grid.size());
  for (int i = 0; i < m; ++i) {
    const double x = std::log(static_cast<double>(n_grid[i]));
    const double y = std::log(std::max(mean_risk[i], 1e-300));
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  out.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return out;
}

RateSweepResult rate_sweep(int k, int s, const std::vector<int>& n_grid,
                           int seeds, Rng& rng, int m_queries,
                           std::optional<double> eps_override) {
  if (n_grid.size() < 4)
    throw std::invalid_argument("rate_sweep: need >= 4 grid points");
  std::vector<double> mean_risk;
  for (size_t gi = 0; gi < n_grid.size(); ++gi) {
    const int n = n_grid[gi];
    double acc = 0.0;
    for (int seed = 0; seed < seeds; ++seed) {
      Rng cell = rng.derive(1000003ULL * gi + seed);
      const double eps =
          eps_override ? *eps_override : std::pow(n, -1.0 / k);
      SmoothFunction g = sample_hard_function(k, s, eps, cell);
      RegressionSample sample = sample_uniform_ball(g, n, cell);
      LocalEstimator est = fit_default_estimator(std::move(sample), k, s);
      acc += regression_risk(est, g, m_queries, cell).risk;
    }
    mean_risk.push_back(acc / seeds);
  }
  return fit_rate_slope(n_grid, mean_risk);
}

}  // namespace ilbench::funclass
