#include "ilbench/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "ilbench/matkit.hpp"

namespace ilbench::simkit {

namespace {

class ExpertActorFromSystem final : public policies::Actor {
 public:
  explicit ExpertActorFromSystem(std::function<Vec(const Vec&, int)> expert)
      : expert_(std::move(expert)) {}
  Vec act(const Vec* state, int t, Rng&) override { return expert_(*state, t); }

 private:
  std::function<Vec(const Vec&, int)> expert_;
};

class ExpertImplFromSystem final : public policies::Policy::Impl {
 public:
  explicit ExpertImplFromSystem(const System& sys) : expert_(sys.expert) {}
  std::unique_ptr<policies::Actor> make_actor() const override {
    return std::make_unique<ExpertActorFromSystem>(expert_);
  }

 private:
  std::function<Vec(const Vec&, int)> expert_;
};

policies::Policy expert_of(const System& sys) {
  return policies::Policy(policies::PolicyKind::deterministic, sys.d,
                          std::make_shared<ExpertImplFromSystem>(sys));
}

}  // namespace

System as_system(const instances::StableInstance& inst) {
  auto copy = std::make_shared<const instances::StableInstance>(inst);
  System sys;
  sys.d = inst.d();
  sys.id = "stable";
  sys.step = [copy](const Vec& x, const Vec& u, int) { return copy->step(x, u); };
  sys.expert = [copy](const Vec& x, int) { return copy->expert_action(x); };
  sys.sample_init = [copy](Rng& rng) { return copy->sample_init(rng); };
  sys.step_cost = [copy](const Vec& x, const Vec& u, int) {
    return copy->cost_hard(x, u);
  };
  return sys;
}

System as_system(const instances::UnstableInstance& inst) {
  auto copy = std::make_shared<const instances::UnstableInstance>(inst);
  System sys;
  sys.d = inst.d();
  sys.id = inst.variant() == instances::UnstableVariant::time_varying
               ? "unstable_tv"
               : "unstable_tiv";
  sys.step = [copy](const Vec& x, const Vec& u, int t) {
    return copy->step(x, u, t);
  };
  sys.expert = [copy](const Vec& x, int t) { return copy->expert_action(x, t); };
  sys.sample_init = [copy](Rng& rng) { return copy->sample_init(rng); };
  sys.step_cost = [copy](const Vec& x, const Vec& u, int t) {
    return copy->step_cost(x, u, t);
  };
  return sys;
}

System as_system(const instances::GamblerSystem& g) {
  System sys;
  sys.d = 1;
  sys.id = "gambler";
  sys.step = [g](const Vec& x, const Vec& u, int) {
    Vec n(1);
    n[0] = instances::gambler_step(g, x[0], u[0]);
    return n;
  };
  sys.expert = [](const Vec&, int) { return Vec(Vec::Zero(1)); };
  sys.sample_init = [g](Rng&) {
    instances::InitState init;
    init.x1 = Vec::Constant(1, g.eps0);
    init.branch = instances::Branch::Z0;
    return init;
  };
  sys.step_cost = [](const Vec& x, const Vec&, int) { return std::abs(x[0]); };
  return sys;
}

double traj_cost(const System& sys, const Trajectory& traj) {
  double worst = 0.0;
  for (int t = 0; t < traj.horizon(); ++t)
    worst = std::max(worst, std::min(1.0, sys.step_cost(traj.states.col(t),
                                                        traj.inputs.col(t),
                                                        t + 1)));
  return worst;
}

Trajectory rollout(const policies::Policy& policy, const System& sys,
                   const Vec& x1, int H, std::uint64_t seed) {
  if (H < 1) throw std::invalid_argument("rollout: H must be >= 1");
  Trajectory traj;
  traj.seed = seed;
  traj.instance_id = sys.id;
  traj.states.resize(sys.d, H);
  traj.inputs.resize(sys.d, H);
  Rng rng(seed);
  auto actor = policy.make_actor();
  Vec x = x1;
  for (int t = 1; t <= H; ++t) {
    traj.states.col(t - 1) = x;
    const bool wants = actor->wants_state(t);
    Vec u = actor->act(wants ? &x : nullptr, t, rng);
    traj.inputs.col(t - 1) = u;
    if (t == H) break;
    if (!traj.blew_up) {
      Vec next = sys.step(x, u, t);
      if (!next.allFinite() || next.norm() > kBlowupGuard) {
        traj.blew_up = true;
        traj.blowup_t = t + 1;
        // Freeze the state; clipped costs keep downstream estimates valid.
      } else {
        x = next;
      }
    }
  }
  return traj;
}

Trajectory rollout(const policies::Policy& policy, const System& sys,
                   const instances::InitState& init, int H,
                   std::uint64_t seed) {
  Trajectory traj = rollout(policy, sys, init.x1, H, seed);
  traj.branch = init.branch;
  traj.y_level = init.y_level;
  return traj;
}

Dataset sample_dataset(const System& sys, int n, int H, Rng& rng) {
  Dataset data;
  data.H = H;
  data.instance_id = sys.id;
  policies::Policy expert = expert_of(sys);
  for (int i = 0; i < n; ++i) {
    Rng traj_rng = rng.derive(i);
    const instances::InitState init = sys.sample_init(traj_rng);
    data.trajectories.push_back(
        rollout(expert, sys, init, H, traj_rng.next_u64()));
  }
  return data;
}

Estimate expert_l2_risk(const policies::Policy& policy, const System& sys,
                        int H, int m, Rng& rng, int n_noise) {
  if (m < 1) throw std::invalid_argument("expert_l2_risk: m must be >= 1");
  if (policy.deterministic()) n_noise = 1;
  // Expert trajectory per outer draw; policy replayed along it.
  Mat per_t_sum = Mat::Zero(H, 1);
  Mat per_t_sumsq = Mat::Zero(H, 1);
  std::vector<double> traj_mean(H);
  for (int i = 0; i < m; ++i) {
    Rng traj_rng = rng.derive(i);
    const instances::InitState init = sys.sample_init(traj_rng);
    // Expert states and actions.
    Mat xs(sys.d, H), us(sys.d, H);
    Vec x = init.x1;
    for (int t = 1; t <= H; ++t) {
      xs.col(t - 1) = x;
      Vec u = sys.expert(x, t);
      us.col(t - 1) = u;
      if (t < H) x = sys.step(x, u, t);
    }
    std::fill(traj_mean.begin(), traj_mean.end(), 0.0);
    for (int rep = 0; rep < n_noise; ++rep) {
      Rng noise_rng = traj_rng.derive(rep + 1);
      auto actor = policy.make_actor();
      for (int t = 1; t <= H; ++t) {
        const Vec xcol = xs.col(t - 1);
        const bool wants = actor->wants_state(t);
        const Vec u_hat = actor->act(wants ? &xcol : nullptr, t, noise_rng);
        traj_mean[t - 1] += (u_hat - us.col(t - 1)).squaredNorm();
      }
    }
    for (int t = 0; t < H; ++t) {
      const double v = traj_mean[t] / n_noise;
      per_t_sum(t, 0) += v;
      per_t_sumsq(t, 0) += v * v;
    }
  }
  Estimate out;
  double var_total = 0.0;
  for (int t = 0; t < H; ++t) {
    const double mean = per_t_sum(t, 0) / m;
    const double var =
        std::max(0.0, per_t_sumsq(t, 0) / m - mean * mean) / std::max(1, m - 1);
    out.value += std::sqrt(mean);
    if (mean > 0.0) var_total += var / (4.0 * mean);
  }
  out.stderr_ = std::sqrt(var_total);
  return out;
}

namespace {

std::vector<double> learner_costs(const policies::Policy& policy,
                                  const System& sys, int H, int m, Rng& rng) {
  std::vector<double> costs(m);
  for (int i = 0; i < m; ++i) {
    Rng traj_rng = rng.derive(i);
    const instances::InitState init = sys.sample_init(traj_rng);
    costs[i] = traj_cost(
        sys, rollout(policy, sys, init, H, traj_rng.next_u64()));
  }
  return costs;
}

Estimate mean_and_se(const std::vector<double>& xs) {
  const int m = static_cast<int>(xs.size());
  double s = 0.0, ss = 0.0;
  for (double v : xs) {
    s += v;
    ss += v * v;
  }
  const double mean = s / m;
  const double var = std::max(0.0, ss / m - mean * mean) / std::max(1, m - 1);
  return {mean, std::sqrt(var)};
}

}  // namespace

Estimate cost_risk(const policies::Policy& policy, const System& sys, int H,
                   int m, Rng& rng) {
  if (m < 1) throw std::invalid_argument("cost_risk: m must be >= 1");
  Rng learner_rng = rng.derive(1);
  Rng expert_rng = rng.derive(1);  // shared inits for variance reduction
  const auto lc = learner_costs(policy, sys, H, m, learner_rng);

  const auto ec = learner_costs(expert_of(sys), sys, H, m, expert_rng);
  std::vector<double> diff(m);
  for (int i = 0; i < m; ++i) diff[i] = lc[i] - ec[i];
  return mean_and_se(diff);
}

double quantile_risk(const policies::Policy& policy, const System& sys, int H,
                     int m, double delta, Rng& rng) {
  Rng learner_rng = rng.derive(1);
  auto costs = learner_costs(policy, sys, H, m, learner_rng);
  std::sort(costs.begin(), costs.end());
  const double q = 1.0 - delta;
  const int idx = std::min<int>(m - 1, static_cast<int>(std::ceil(q * m)) - 1);
  return costs[std::max(0, idx)];
}

Estimate traj_l1_risk(const policies::Policy& policy, const System& sys, int H,
                      int m, Rng& rng) {
  policies::Policy expert = expert_of(sys);
  std::vector<double> gaps(m);
  for (int i = 0; i < m; ++i) {
    Rng traj_rng = rng.derive(i);
    const instances::InitState init = sys.sample_init(traj_rng);
    const std::uint64_t seed = traj_rng.next_u64();
    const Trajectory ours = rollout(policy, sys, init, H, seed);
    const Trajectory ref = rollout(expert, sys, init, H, seed + 1);
    double total = 0.0;
    for (int t = 0; t < H; ++t) {
      const double gap = (ours.states.col(t) - ref.states.col(t)).norm() +
                         (ours.inputs.col(t) - ref.inputs.col(t)).norm();
      total += std::min(1.0, gap);
    }
    gaps[i] = total;
  }
  return mean_and_se(gaps);
}

RiskReport evaluate_policy(const policies::Policy& policy, const System& sys,
                           int H, int m, double delta, Rng& rng) {
  RiskReport report;
  Rng r1 = rng.derive(101), r2 = rng.derive(102), r3 = rng.derive(103),
      r4 = rng.derive(104);
  report.expert_l2 = expert_l2_risk(policy, sys, H, m, r1);
  report.cost = cost_risk(policy, sys, H, m, r2);
  report.traj_l1 = traj_l1_risk(policy, sys, H, m, r3);
  report.quantile_delta = delta;
  report.quantile_value = quantile_risk(policy, sys, H, m, delta, r4);
  report.m_rollouts = m;
  return report;
}

// ---------------------------------------------------------------------------

EiissReport eiiss_check(
    const std::function<Vec(const Vec&, const Vec&, int)>& step, int d,
    double C, double rho, int H, int trials, Rng& rng, EiissOptions opts) {
  if (trials < 1) throw std::invalid_argument("eiiss_check: trials >= 1");
  EiissReport report;
  for (int trial = 0; trial < trials; ++trial) {
    Vec x = rng.uniform_ball(d, opts.base_state_scale);
    Vec xp = x + Vec(rng.unit_sphere(d) * (opts.init_gap * rng.uniform()));
    const double dx1 = (x - xp).norm();
    double input_series = 0.0;  // sum_k C rho^{t-k} ||du_k|| built on the fly
    for (int t = 1; t <= H; ++t) {
      const Vec u = rng.uniform_ball(d, opts.base_input_scale);
      const Vec du = rng.unit_sphere(d) * (opts.input_gap * rng.uniform());
      const Vec up = u + du;
      x = step(x, u, t);
      xp = step(xp, up, t);
      // RHS at horizon t: C rho^t dx1 + sum C rho^{t-k} du_k.
      input_series = rho * input_series + C * du.norm();
      const double rhs = C * std::pow(rho, t) * dx1 + input_series;
      const double lhs = (x - xp).norm();
      if (rhs > 0.0)
        report.max_ratio = std::max(report.max_ratio, lhs / rhs);
      else if (lhs > 0.0)
        report.max_ratio = std::max(report.max_ratio, 1e300);
    }
  }
  report.pass = report.max_ratio <= 1.0 + 1e-6;
  return report;
}

std::vector<double> compounding_probe(const policies::Policy& policy,
                                      const System& sys, const Vec& x1, int H,
                                      double delta_e1, std::uint64_t seed) {
  Vec x1b = x1;
  x1b[0] += delta_e1;
  const Trajectory a = rollout(policy, sys, x1, H, seed);
  const Trajectory b = rollout(policy, sys, x1b, H, seed);
  std::vector<double> curve(H, 0.0);
  double running = 0.0;
  for (int t = 0; t < H; ++t) {
    const double gap = std::abs(a.states.col(t)[0] - b.states.col(t)[0]);
    running = std::max(running, gap);
    curve[t] = delta_e1 != 0.0 ? running / std::abs(delta_e1) : 0.0;
  }
  return curve;
}

RotationController zero_controller() {
  return [](const std::vector<Vec>& states, const std::vector<Vec>&,
            const std::vector<Mat>&) {
    return Vec(Vec::Zero(states.back().size()));
  };
}

RotationController greedy_cancel_controller(double rho) {
  return [rho](const std::vector<Vec>& states, const std::vector<Vec>&,
               const std::vector<Mat>& rotations) {
    const Vec& x = states.back();
    if (rotations.empty()) return Vec(Vec::Zero(x.size()));
    return Vec(-rho * (rotations.back() * x));
  };
}

FrequencyEstimate orthogonal_compounding_mc(int d, double rho, int H,
                                            const RotationController& ctrl,
                                            int trials, Rng& rng) {
  int hits = 0;
  for (int trial = 0; trial < trials; ++trial) {
    Rng trng = rng.derive(trial);
    std::vector<Vec> states;
    std::vector<Vec> inputs;
    std::vector<Mat> revealed;
    Vec x = Vec::Zero(d);
    x[0] = 1.0;
    states.push_back(x);
    const double x1n = x.norm();
    bool ok = true;
    for (int t = 1; t <= H; ++t) {
      const Vec u = ctrl(states, inputs, revealed);
      const Mat O = matkit::random_orthogonal(d, trng);
      x = rho * (O * x) + u;
      inputs.push_back(u);
      revealed.push_back(O);
      states.push_back(x);
      if (x.norm() < std::pow(rho, t / 2.0) * x1n) {
        ok = false;
        break;
      }
    }
    if (ok) ++hits;
  }
  FrequencyEstimate out;
  out.trials = trials;
  out.frequency = static_cast<double>(hits) / trials;
  out.stderr_ = std::sqrt(out.frequency * (1.0 - out.frequency) / trials);
  return out;
}

GamblerCurves gambler_curves(const policies::Policy& policy,
                             const instances::GamblerSystem& sys, int T,
                             int runs, Rng& rng) {
  GamblerCurves curves;
  Mat nonzero = Mat::Zero(T, 1), clip = Mat::Zero(T, 1), abs = Mat::Zero(T, 1);
  Mat clip2 = Mat::Zero(T, 1), abs2 = Mat::Zero(T, 1);
  for (int run = 0; run < runs; ++run) {
    Rng r = rng.derive(run);
    auto actor = policy.make_actor();
    double x = sys.eps0;
    Vec xv(1);
    for (int t = 1; t <= T; ++t) {
      xv[0] = x;
      const Vec u = actor->act(&xv, t, r);
      x = instances::gambler_step(sys, x, u[0]);
      // statistics of x_{t+1}
      const double c = std::min(1.0, std::abs(x));
      const double a = std::abs(x);
      if (x != 0.0) nonzero(t - 1, 0) += 1.0;
      clip(t - 1, 0) += c;
      clip2(t - 1, 0) += c * c;
      abs(t - 1, 0) += a;
      abs2(t - 1, 0) += a * a;
    }
  }
  for (int t = 1; t <= T; ++t) {
    const double p = nonzero(t - 1, 0) / runs;
    const double mc = clip(t - 1, 0) / runs;
    const double ma = abs(t - 1, 0) / runs;
    curves.t.push_back(t);
    curves.p_nonzero.push_back(p);
    curves.e_clip.push_back(mc);
    curves.e_abs.push_back(ma);
    curves.se_p.push_back(std::sqrt(p * (1.0 - p) / runs));
    curves.se_clip.push_back(std::sqrt(
        std::max(0.0, clip2(t - 1, 0) / runs - mc * mc) / runs));
    curves.se_abs.push_back(std::sqrt(
        std::max(0.0, abs2(t - 1, 0) / runs - ma * ma) / runs));
  }
  return curves;
}

}  // namespace ilbench::simkit
