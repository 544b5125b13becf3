#include "ilbench/instances.hpp"

#include <cmath>
#include <stdexcept>

namespace ilbench::instances {

namespace {

Vec embed_tail(int d, const Vec& z) {
  // (0, 0, z) in R^d
  Vec x = Vec::Zero(d);
  x.tail(z.size()) = z;
  return x;
}

}  // namespace

StableInstance::StableInstance(funclass::SmoothFunction g, int i, int omega,
                               double mu, double tau, double Delta,
                               CostSpec cost)
    : g_(std::move(g)),
      i_(i),
      omega_(omega),
      mu_(mu),
      tau_(tau),
      Delta_(Delta),
      d_(g_.k + 2),
      cost_(cost) {
  if (i_ != 1 && i_ != 2)
    throw std::invalid_argument("StableInstance: i must be 1 or 2");
  if (omega_ != 1 && omega_ != -1)
    throw std::invalid_argument("StableInstance: omega must be +1 or -1");
  if (!(tau_ > 0.0 && tau_ < 1.0) || !(Delta_ > 0.0 && Delta_ < 1.0))
    throw std::invalid_argument("StableInstance: tau, Delta must be in (0,1)");
  if (d_ < 3) throw std::invalid_argument("StableInstance: need k >= 1");
  pair_ = matkit::challenging_pair(mu_);

  auto lift = [&](const Eigen::Matrix2d& M) {
    Mat B = Mat::Zero(d_, d_);
    B.topLeftCorner(2, 2) = M;
    return B;
  };
  Kbar1_ = lift(pair_.K1);
  Kbar2_ = lift(pair_.K2);
  Abar_ = lift(pair_.A(i_));
  Kbar_ = i_ == 1 ? Kbar1_ : Kbar2_;

  x_offset_ = Vec::Zero(d_);
  x_offset_[2] = 3.0;

  // Conditional law of y_level given Y != 1: weights 1/l^2 for l < level_max,
  // with the tail mass folded onto level_max.
  std::vector<double> w(kLevelMax);
  double total = M_PI * M_PI / 6.0;
  double head = 0.0;
  for (int l = 1; l < kLevelMax; ++l) {
    w[l - 1] = 1.0 / (static_cast<double>(l) * l);
    head += w[l - 1];
  }
  w[kLevelMax - 1] = total - head;
  level_cdf_.resize(kLevelMax);
  double acc = 0.0;
  for (int l = 0; l < kLevelMax; ++l) {
    acc += w[l] / total;
    level_cdf_[l] = acc;
  }
  level_cdf_[kLevelMax - 1] = 1.0;
}

double StableInstance::restrict_gate(const Vec& x) const {
  return matkit::bump(x - x_offset_);
}

double StableInstance::transform_g(const Vec& x) const {
  return g_(Vec((x - x_offset_).tail(d_ - 2)));
}

Vec StableInstance::expert_action(const Vec& x) const {
  Vec u = Kbar_ * x;
  const double gate = restrict_gate(x);
  if (gate != 0.0) u[0] += tau_ * gate * transform_g(x);
  return u;
}

Vec StableInstance::step(const Vec& x, const Vec& u) const {
  Vec next = Abar_ * x + u;
  const double gate = restrict_gate(x);
  if (gate != 0.0) {
    const double tg = transform_g(x);
    next[0] -= tau_ * gate * tg;
    next[0] += omega_ * tau_ * tau_ * gate *
               (tg - u[0] * matkit::bump(u) / tau_);
  }
  return next;
}

InitState StableInstance::sample_init(Rng& rng) const {
  InitState init;
  if (rng.coin()) {
    init.branch = Branch::Z0;
    init.z = rng.uniform_ball(g_.k);
    init.x1 = x_offset_ + embed_tail(d_, init.z);
  } else {
    init.branch = Branch::Z1;
    double Y = 1.0;
    init.y_level = 0;
    if (rng.coin()) {
      const double r = rng.uniform();
      int level = kLevelMax;
      for (int l = 0; l < kLevelMax; ++l) {
        if (r <= level_cdf_[l]) {
          level = l + 1;
          break;
        }
      }
      init.y_level = level;
      Y = std::pow(2.0, -level);
    }
    // Uniform on the unit ball of coordinates 2..d.
    Vec w = rng.uniform_ball(d_ - 1);
    Vec x = Vec::Zero(d_);
    x.tail(d_ - 1) = Delta_ * Y * w;
    init.x1 = x;
  }
  return init;
}

double StableInstance::cost_hard(const Vec& x, const Vec& u) const {
  const double C = cost_.C_cost;
  double total = C * std::abs(x[0]);

  const double near_origin = matkit::bump(x);
  if (near_origin != 0.0)
    total += C * ((u - Kbar1_ * x).norm() + (u - Kbar2_ * x).norm()) *
             near_origin;

  const double patch = restrict_gate(x);
  const double tiny = matkit::bump(x / (cost_.C_Delta * Delta_));
  total += C * Delta_ * (1.0 - patch) * (1.0 - tiny);

  total += tau_ * C * (1.0 - matkit::bump(u / tau_));

  if (patch != 0.0) {
    Vec u_perp = u;
    u_perp[0] = 0.0;
    total += C * patch * u_perp.norm();
  }
  return total;
}

StableInstance make_stable_instance(funclass::SmoothFunction g, int i,
                                    int omega, double mu, double tau,
                                    double Delta) {
  return StableInstance(std::move(g), i, omega, mu, tau, Delta);
}

// ---------------------------------------------------------------------------

UnstableInstance::UnstableInstance(funclass::SmoothFunction g, double rho,
                                   int d, int k, UnstableVariant variant,
                                   std::uint64_t rotation_seed, double r0,
                                   CostSpec cost)
    : g_(std::move(g)),
      rho_(rho),
      d_(d),
      k_(k),
      variant_(variant),
      rotation_seed_(rotation_seed),
      r0_(r0),
      cost_(cost) {
  if (!(rho_ > 1.0))
    throw std::invalid_argument("UnstableInstance: rho must exceed 1");
  if (k_ > d_ || k_ < 1)
    throw std::invalid_argument("UnstableInstance: need 1 <= k <= d");
  if (g_.k != k_)
    throw std::invalid_argument("UnstableInstance: g dimension mismatch");
  if (variant_ == UnstableVariant::time_invariant) {
    // Disjoint radius-3*r0 balls around the centers require pairwise
    // separation 6*r0; patch supports (radius 2*r0) are then disjoint too.
    Rng prng(rotation_seed_ ^ 0x5ca1ab1eULL);
    patches_ = matkit::greedy_packing(d_, 6.0 * r0_, 1.0, 256, prng);
    if (patches_.degenerate)
      throw std::runtime_error(
          "UnstableInstance: packing failed for time-invariant variant");
  }
}

Mat UnstableInstance::rotation(int t) const {
  Rng r = Rng(rotation_seed_).derive(static_cast<std::uint64_t>(t));
  return matkit::random_orthogonal(d_, r);
}

Vec UnstableInstance::patch_drift(const Vec& x) const {
  Vec drift = Vec::Zero(d_);
  const int N = patches_.size();
  for (int j = 1; j <= N; ++j) {
    const Vec& y = patches_.centers[j - 1];
    const double psi = matkit::bump((x - y) / r0_);
    if (psi == 0.0) continue;
    if (j == 1) {
      Vec zz = (x - y).head(k_) / r0_;
      drift[0] += psi * g_(zz);
    } else if (j <= N - 1) {
      drift += psi * (-rho_ * (rotation(j) * (x - y)));
    }
    // Patch N carries no drift term: it parks the chain.
  }
  return drift;
}

Vec UnstableInstance::patch_target(const Vec& x) const {
  Vec target = Vec::Zero(d_);
  const int N = patches_.size();
  for (int j = 1; j <= N; ++j) {
    const double psi = matkit::bump((x - patches_.centers[j - 1]) / r0_);
    if (psi == 0.0) continue;
    const int next = j < N ? j + 1 : N;  // the chain parks at the last center
    target += psi * patches_.centers[next - 1];
  }
  return target;
}

Vec UnstableInstance::expert_action(const Vec& x, int t) const {
  if (variant_ == UnstableVariant::time_varying) {
    Vec u = Vec::Zero(d_);
    if (t == 1) {
      u[0] = g_(Vec(x.head(k_)));
    } else {
      u = -rho_ * (rotation(t) * x);
    }
    return u;
  }
  return patch_drift(x) + patch_target(x);
}

Vec UnstableInstance::step(const Vec& x, const Vec& u, int t) const {
  if (variant_ == UnstableVariant::time_varying) {
    Vec pi = Vec::Zero(d_);
    if (t == 1) {
      pi[0] = g_(Vec(x.head(k_)));
    } else {
      pi = -rho_ * (rotation(t) * x);
    }
    return u - pi;
  }
  return u - patch_drift(x);
}

InitState UnstableInstance::sample_init(Rng& rng) const {
  InitState init;
  init.branch = Branch::Z0;
  init.z = rng.uniform_ball(k_);
  if (variant_ == UnstableVariant::time_varying) {
    Vec x = Vec::Zero(d_);
    x.head(k_) = init.z;
    init.x1 = x;
  } else {
    Vec x = patches_.centers[0];
    x.head(k_) += r0_ * init.z;
    init.x1 = x;
  }
  return init;
}

double UnstableInstance::step_cost(const Vec& x, const Vec& u, int t) const {
  (void)u;
  if (variant_ == UnstableVariant::time_varying)
    return t >= 2 ? x.norm() : 0.0;
  double total = 0.0;
  const int N = patches_.size();
  for (int j = 2; j <= N; ++j) {
    const Vec diff = x - patches_.centers[j - 1];
    const double psi = matkit::bump(diff / r0_);
    if (psi != 0.0) total += psi * diff.norm();
  }
  return total / cost_.C_cost;
}

UnstableInstance make_unstable_instance(funclass::SmoothFunction g, double rho,
                                        int d, int k, UnstableVariant variant,
                                        std::uint64_t rotation_seed,
                                        double r0) {
  return UnstableInstance(std::move(g), rho, d, k, variant, rotation_seed, r0);
}

// ---------------------------------------------------------------------------

ControlResult one_step_control(
    const std::function<Vec(const Vec&, const Vec&)>& step_fn, const Vec& x,
    const Vec& x_target, double tol) {
  const int d = static_cast<int>(x.size());
  // Probe the input orientation: dynamics are phi(x) + u + psi or
  // phi(x) - u + psi with psi contractive in u.
  const Vec f0 = step_fn(x, Vec::Zero(d));
  Vec probe = Vec::Zero(d);
  const double h = 1e-3;
  probe[0] = h;
  const double dir = (step_fn(x, probe) - f0)[0];
  const double sign = dir >= 0.0 ? 1.0 : -1.0;

  ControlResult out;
  out.u = Vec::Zero(d);
  for (int it = 1; it <= 200; ++it) {
    const Vec r = x_target - step_fn(x, out.u);
    out.residual = r.norm();
    out.iterations = it;
    if (out.residual <= tol) {
      out.ok = true;
      return out;
    }
    out.u += sign * r;
  }
  const Vec r = x_target - step_fn(x, out.u);
  out.residual = r.norm();
  out.ok = out.residual <= tol;
  return out;
}

}  // namespace ilbench::instances
