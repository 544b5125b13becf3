#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ilbench/common.hpp"
#include "ilbench/instances.hpp"
#include "ilbench/policies.hpp"
#include "ilbench/trajectory.hpp"

namespace ilbench::simkit {

/// Uniform closure view over the three constructions. Copies of the instance
/// live inside the closures, so a System is self-contained and shareable.
struct System {
  int d = 0;
  std::string id;
  std::function<Vec(const Vec&, const Vec&, int)> step;  // (x, u, t) -> x'
  std::function<Vec(const Vec&, int)> expert;            // (x, t) -> u*
  std::function<instances::InitState(Rng&)> sample_init;
  std::function<double(const Vec&, const Vec&, int)> step_cost;
};

System as_system(const instances::StableInstance& inst);
System as_system(const instances::UnstableInstance& inst);
System as_system(const instances::GamblerSystem& sys);

/// max_t min(1, step_cost(x_t, u_t, t)).
double traj_cost(const System& sys, const Trajectory& traj);

constexpr double kBlowupGuard = 1e6;

/// Closed-loop rollout from a given initial state; deterministic given
/// (policy parameters, init, seed). States beyond a blow-up are frozen at the
/// offending value and the event is recorded.
Trajectory rollout(const policies::Policy& policy, const System& sys,
                   const Vec& x1, int H, std::uint64_t seed);
Trajectory rollout(const policies::Policy& policy, const System& sys,
                   const instances::InitState& init, int H, std::uint64_t seed);

/// n expert demonstrations with i.i.d. derived seeds.
Dataset sample_dataset(const System& sys, int n, int H, Rng& rng);

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

/// Sum over t of sqrt(E ||u_hat_t - u*_t||^2) along expert trajectories,
/// with an inner expectation over policy noise (n_noise samples per rollout).
Estimate expert_l2_risk(const policies::Policy& policy, const System& sys,
                        int H, int m, Rng& rng, int n_noise = 16);

/// Mean learner trajectory cost minus mean expert trajectory cost.
Estimate cost_risk(const policies::Policy& policy, const System& sys, int H,
                   int m, Rng& rng);

/// Empirical (1 - delta)-quantile of the learner's trajectory cost.
double quantile_risk(const policies::Policy& policy, const System& sys, int H,
                     int m, double delta, Rng& rng);

/// Canonically coupled expert/learner rollouts from shared inits:
/// E sum_t min(1, ||x*_t - x_t|| + ||u*_t - u_t||).
Estimate traj_l1_risk(const policies::Policy& policy, const System& sys, int H,
                      int m, Rng& rng);

struct RiskReport {
  Estimate expert_l2;
  Estimate cost;
  Estimate traj_l1;
  double quantile_delta = 0.1;
  double quantile_value = 0.0;
  int m_rollouts = 0;
};

RiskReport evaluate_policy(const policies::Policy& policy, const System& sys,
                           int H, int m, double delta, Rng& rng);

// ---------------------------------------------------------------------------
// Verification probes
// ---------------------------------------------------------------------------

struct EiissOptions {
  double init_gap = 0.1;
  double input_gap = 0.05;
  double base_state_scale = 1.0;
  double base_input_scale = 0.05;
};

struct EiissReport {
  double max_ratio = 0.0;  // max over (trial, t) of LHS / RHS
  bool pass = false;       // ratio <= 1 + 1e-6
};

/// Samples paired initial states and bounded input streams, simulates both,
/// and compares the trajectory gap against the geometric envelope
/// C rho^t ||dx1|| + sum_k C rho^{t-k} ||du_k||.
EiissReport eiiss_check(
    const std::function<Vec(const Vec&, const Vec&, int)>& step, int d,
    double C, double rho, int H, int trials, Rng& rng, EiissOptions opts = {});

/// Coupled rollouts (shared policy noise) from inits differing by
/// delta_e1 * e1; entry t is max_{s<=t} |<e1, x_s - x~_s>| / delta_e1.
std::vector<double> compounding_probe(const policies::Policy& policy,
                                      const System& sys, const Vec& x1, int H,
                                      double delta_e1, std::uint64_t seed);

/// Causal controller for x_{t+1} = rho O_t x_t + u_t; sees everything up to
/// and including the current state (rotations only once revealed).
using RotationController = std::function<Vec(
    const std::vector<Vec>& states, const std::vector<Vec>& inputs,
    const std::vector<Mat>& revealed_rotations)>;

RotationController zero_controller();
/// u_t = -rho * O_{t-1} x_t (last rotation as the estimate; u_1 = 0).
RotationController greedy_cancel_controller(double rho);

struct FrequencyEstimate {
  double frequency = 0.0;
  double stderr_ = 0.0;
  int trials = 0;
};

/// Frequency of { ||x_{t+1}|| >= rho^{t/2} ||x_1|| for all t <= H }.
FrequencyEstimate orthogonal_compounding_mc(int d, double rho, int H,
                                            const RotationController& ctrl,
                                            int trials, Rng& rng);

struct GamblerCurves {
  std::vector<double> t;           // 1..T (steps taken)
  std::vector<double> p_nonzero;   // Pr[x_{t+1} != 0]
  std::vector<double> e_clip;      // E[min(1, |x_{t+1}|)]
  std::vector<double> e_abs;       // E[|x_{t+1}|]
  std::vector<double> se_p, se_clip, se_abs;
};

GamblerCurves gambler_curves(const policies::Policy& policy,
                             const instances::GamblerSystem& sys, int T,
                             int runs, Rng& rng);

}  // namespace ilbench::simkit
