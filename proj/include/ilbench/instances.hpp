#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ilbench/common.hpp"
#include "ilbench/funclass.hpp"
#include "ilbench/matkit.hpp"

namespace ilbench::instances {

enum class Branch { Z0, Z1 };

struct InitState {
  Vec x1;
  Branch branch = Branch::Z0;
  int y_level = 0;  // Z1 only: Y = 1 for level 0, else Y = 2^{-level}
  Vec z;            // Z0 only: the regression input
};

enum class CostKind { hard_stable, hard_tiv, gambler_clip };

struct CostSpec {
  CostKind which = CostKind::hard_stable;
  double C_cost = 1.0 / 16.0;
  double C_Delta = 1.0;  // frozen from expert-rollout calibration
};

// ---------------------------------------------------------------------------
// Stable embedding construction
// ---------------------------------------------------------------------------

/// Linear challenging-pair dynamics in the top-left 2x2 block, a nonparametric
/// regression patch parked on a ball around x_offset = 3 e3, and an initial
/// distribution that mixes the two. Everything is deterministic; randomness
/// enters only through sampled initial states.
class StableInstance {
 public:
  StableInstance(funclass::SmoothFunction g, int i, int omega, double mu,
                 double tau, double Delta, CostSpec cost = {});

  int d() const { return d_; }
  int k() const { return g_.k; }
  int index() const { return i_; }
  int omega() const { return omega_; }
  double mu() const { return mu_; }
  double tau() const { return tau_; }
  double Delta() const { return Delta_; }
  const funclass::SmoothFunction& g() const { return g_; }
  const Mat& Abar() const { return Abar_; }
  const Mat& Kbar() const { return Kbar_; }
  const Mat& Kbar_of(int i) const { return i == 1 ? Kbar1_ : Kbar2_; }
  const Vec& x_offset() const { return x_offset_; }
  const matkit::ChallengingPair& pair() const { return pair_; }
  const CostSpec& cost_spec() const { return cost_; }

  /// bump(x - x_offset): gates the regression patch.
  double restrict_gate(const Vec& x) const;
  /// g evaluated on the patch coordinates of x.
  double transform_g(const Vec& x) const;

  Vec expert_action(const Vec& x) const;
  Vec step(const Vec& x, const Vec& u) const;

  InitState sample_init(Rng& rng) const;

  double cost_hard(const Vec& x, const Vec& u) const;

  static constexpr int kLevelMax = 30;

 private:
  funclass::SmoothFunction g_;
  int i_ = 1;
  int omega_ = 1;
  double mu_, tau_, Delta_;
  int d_;
  matkit::ChallengingPair pair_;
  Mat Abar_, Kbar_, Kbar1_, Kbar2_;
  Vec x_offset_;
  CostSpec cost_;
  std::vector<double> level_cdf_;  // conditional law of y_level >= 1
};

StableInstance make_stable_instance(funclass::SmoothFunction g, int i,
                                    int omega, double mu = 0.25,
                                    double tau = 0.1, double Delta = 0.01);

// ---------------------------------------------------------------------------
// Unstable constructions (time-varying rotations / bump-patched invariant)
// ---------------------------------------------------------------------------

enum class UnstableVariant { time_varying, time_invariant };

class UnstableInstance {
 public:
  UnstableInstance(funclass::SmoothFunction g, double rho, int d, int k,
                   UnstableVariant variant, std::uint64_t rotation_seed,
                   double r0 = 0.1, CostSpec cost = {CostKind::hard_tiv});

  int d() const { return d_; }
  int k() const { return k_; }
  double rho() const { return rho_; }
  double r0() const { return r0_; }
  UnstableVariant variant() const { return variant_; }
  std::uint64_t rotation_seed() const { return rotation_seed_; }
  const matkit::Packing& patches() const { return patches_; }
  const funclass::SmoothFunction& g() const { return g_; }
  const CostSpec& cost_spec() const { return cost_; }

  /// Rotation for time step / patch index t (t >= 2), derived statelessly
  /// from (rotation_seed, t).
  Mat rotation(int t) const;

  Vec expert_action(const Vec& x, int t) const;
  Vec step(const Vec& x, const Vec& u, int t) const;
  InitState sample_init(Rng& rng) const;

  /// Per-step cost: time-invariant -> patch-weighted distance sum;
  /// time-varying -> ||x|| for t >= 2 (vanishes on the expert support).
  double step_cost(const Vec& x, const Vec& u, int t) const;

 private:
  Vec patch_drift(const Vec& x) const;   // the summed patch terms
  Vec patch_target(const Vec& x) const;  // next-center shift

  funclass::SmoothFunction g_;
  double rho_;
  int d_, k_;
  UnstableVariant variant_;
  std::uint64_t rotation_seed_;
  double r0_;
  matkit::Packing patches_;  // time-invariant only
  CostSpec cost_;
};

UnstableInstance make_unstable_instance(funclass::SmoothFunction g, double rho,
                                        int d, int k, UnstableVariant variant,
                                        std::uint64_t rotation_seed,
                                        double r0 = 0.1);

// ---------------------------------------------------------------------------
// Scalar gambler system
// ---------------------------------------------------------------------------

struct GamblerSystem {
  double rho = 1.5;
  int xi = 1;          // unknown sign, +1 or -1
  double eps0 = 0.01;  // initial error x_1
};

inline double gambler_step(const GamblerSystem& sys, double x, double u) {
  return sys.xi * (sys.rho * x) + u;
}

// ---------------------------------------------------------------------------
// One-step controllability
// ---------------------------------------------------------------------------

struct ControlResult {
  Vec u;
  bool ok = false;
  int iterations = 0;
  double residual = 0.0;
};

/// Fixed-point solve of step_fn(x, u) == x_target for dynamics of the form
/// phi(x) +/- u + psi(x, u) with psi contractive in u. The +/- orientation is
/// probed numerically. Fails after 200 iterations.
ControlResult one_step_control(
    const std::function<Vec(const Vec&, const Vec&)>& step_fn, const Vec& x,
    const Vec& x_target, double tol = 1e-10);

}  // namespace ilbench::instances
