#include "ilbench/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ilbench::policies {

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::deterministic: return "deterministic";
    case PolicyKind::simply_stochastic: return "simply_stochastic";
    case PolicyKind::gaussian: return "gaussian";
    case PolicyKind::mixture: return "mixture";
    case PolicyKind::gamblers_ruin: return "gamblers_ruin";
    case PolicyKind::concentric: return "concentric";
    case PolicyKind::switching: return "switching";
    case PolicyKind::chunked: return "chunked";
    case PolicyKind::mlp: return "mlp";
    case PolicyKind::toy_diffusion: return "toy_diffusion";
  }
  return "unknown";
}

namespace {

/// Stateless Markovian actor from a plain function of (state, t, rng).
class FuncActor final : public Actor {
 public:
  using Fn = std::function<Vec(const Vec&, int, Rng&)>;
  explicit FuncActor(Fn fn) : fn_(std::move(fn)) {}
  Vec act(const Vec* state, int t, Rng& rng) override {
    if (state == nullptr)
      throw std::logic_error("FuncActor: state required every step");
    return fn_(*state, t, rng);
  }

 private:
  Fn fn_;
};

class FuncImpl final : public Policy::Impl {
 public:
  explicit FuncImpl(FuncActor::Fn fn) : fn_(std::move(fn)) {}
  std::unique_ptr<Actor> make_actor() const override {
    return std::make_unique<FuncActor>(fn_);
  }

 private:
  FuncActor::Fn fn_;
};

Policy make_func_policy(PolicyKind kind, int dim, FuncActor::Fn fn) {
  return Policy(kind, dim, std::make_shared<FuncImpl>(std::move(fn)));
}

}  // namespace

Vec Policy::sample_action(const Vec& x, Rng& rng) const {
  auto actor = make_actor();
  return actor->act(&x, 1, rng);
}

// ---------------------------------------------------------------------------
// Elementary policies
// ---------------------------------------------------------------------------

Policy zero_policy(int d) {
  return make_func_policy(PolicyKind::deterministic, d,
                          [d](const Vec&, int, Rng&) { return Vec::Zero(d); });
}

Policy linear_policy(const Mat& K) {
  const int d = static_cast<int>(K.rows());
  return make_func_policy(PolicyKind::deterministic, d,
                          [K](const Vec& x, int, Rng&) { return Vec(K * x); });
}

Policy expert_policy(const instances::StableInstance& inst) {
  auto copy = std::make_shared<const instances::StableInstance>(inst);
  return make_func_policy(
      PolicyKind::deterministic, inst.d(),
      [copy](const Vec& x, int, Rng&) { return copy->expert_action(x); });
}

Policy expert_policy(const instances::UnstableInstance& inst) {
  auto copy = std::make_shared<const instances::UnstableInstance>(inst);
  Policy p = make_func_policy(
      PolicyKind::deterministic, inst.d(),
      [copy](const Vec& x, int t, Rng&) { return copy->expert_action(x, t); });
  p.set_markovian(inst.variant() == instances::UnstableVariant::time_invariant);
  return p;
}

Policy random_noise_policy(int d, double sigma) {
  Policy p = make_func_policy(
      PolicyKind::simply_stochastic, d,
      [d, sigma](const Vec&, int, Rng& rng) { return Vec(sigma * rng.normal_vec(d)); });
  p.set_deterministic(false);
  return p;
}

Policy gaussian_wrap(const Policy& base, double sigma) {
  if (!base.deterministic())
    throw std::invalid_argument("gaussian_wrap: base must be deterministic");
  const int d = base.dim();
  auto impl = std::make_shared<FuncImpl>(
      [base, sigma, d](const Vec& x, int t, Rng& rng) {
        // Noise drawn before the mean so coupled streams share it
        // independently of the state.
        Vec noise = sigma != 0.0 ? Vec(sigma * rng.normal_vec(d)) : Vec(Vec::Zero(d));
        auto actor = base.make_actor();
        Rng dummy(0);
        return Vec(actor->act(&x, t, dummy) + noise);
      });
  Policy p(PolicyKind::gaussian, d, impl);
  p.set_deterministic(sigma == 0.0);
  p.set_markovian(base.markovian());
  return p;
}

Policy offset_policy(const Policy& base, const Vec& offset) {
  if (!base.deterministic())
    throw std::invalid_argument("offset_policy: base must be deterministic");
  auto impl = std::make_shared<FuncImpl>(
      [base, offset](const Vec& x, int t, Rng& rng) {
        auto actor = base.make_actor();
        return Vec(actor->act(&x, t, rng) + offset);
      });
  return Policy(base.kind(), base.dim(), impl);
}

Policy patch_offset_policy(const instances::StableInstance& inst,
                           const Vec& offset) {
  auto copy = std::make_shared<const instances::StableInstance>(inst);
  Vec off = offset;
  return make_func_policy(PolicyKind::deterministic, inst.d(),
                          [copy, off](const Vec& x, int, Rng&) {
                            return Vec(copy->expert_action(x) +
                                       copy->restrict_gate(x) * off);
                          });
}

// ---------------------------------------------------------------------------
// Scalar strategies
// ---------------------------------------------------------------------------

Policy gamblers_ruin_policy(double rho) {
  Policy p = make_func_policy(PolicyKind::gamblers_ruin, 1,
                              [rho](const Vec& x, int, Rng& rng) {
                                Vec u(1);
                                const double v = rho * x[0];
                                u[0] = rng.coin() ? v : -v;
                                return u;
                              });
  p.set_deterministic(false);
  return p;
}

int concentric_interval_index(double rho, double x) {
  // |x| in ((2 rho)^{-2j}, (2 rho)^{-2(j-1)}]  <=>  j = floor(-y/2) + 1 with
  // y = log|x| / log(2 rho).
  const double y = std::log(std::abs(x)) / std::log(2.0 * rho);
  return static_cast<int>(std::floor(-y / 2.0)) + 1;
}

Policy concentric_policy(double rho) {
  return make_func_policy(PolicyKind::concentric, 1,
                          [rho](const Vec& x, int, Rng&) {
                            Vec u(1);
                            if (x[0] == 0.0) {
                              u[0] = 0.0;
                              return u;
                            }
                            const int j = concentric_interval_index(rho, x[0]);
                            const double v = rho * x[0];
                            u[0] = (j % 2 == 0) ? v : -v;
                            return u;
                          });
}

Policy switching_policy(double rho) {
  Policy p = make_func_policy(PolicyKind::switching, 1,
                              [rho](const Vec& x, int t, Rng&) {
                                Vec u(1);
                                const double v = rho * x[0];
                                u[0] = (t % 2 == 1) ? -v : v;
                                return u;
                              });
  p.set_period(2);
  p.set_markovian(false);  // time-dependent
  return p;
}

namespace {

class AdaptiveCancelActor final : public Actor {
 public:
  Vec act(const Vec* state, int t, Rng&) override {
    const double x = (*state)[0];
    Vec u(1);
    if (t == 1) {
      x1_ = x;
      u[0] = 0.0;  // probe step: u_1 = 0
      return u;
    }
    if (t == 2 && x1_ != 0.0) gain_ = x / x1_;  // x_2/x_1 identifies xi * rho
    u[0] = -gain_ * x;
    return u;
  }

 private:
  double x1_ = 0.0;
  double gain_ = 0.0;
};

class AdaptiveCancelImpl final : public Policy::Impl {
 public:
  std::unique_ptr<Actor> make_actor() const override {
    return std::make_unique<AdaptiveCancelActor>();
  }
};

}  // namespace

Policy adaptive_cancel_policy() {
  Policy p(PolicyKind::deterministic, 1, std::make_shared<AdaptiveCancelImpl>());
  p.set_markovian(false);
  return p;
}

// ---------------------------------------------------------------------------
// Behavior cloning
// ---------------------------------------------------------------------------

Vec BCFit::action(const Vec& x) const {
  const double gate = matkit::bump(x - x_offset);
  Vec u = (1.0 - gate) * (K_hat * x);
  if (gate != 0.0 && g_ok)
    u[0] += tau * gate * g_hat(Vec((x - x_offset).tail(k)));
  return u;
}

namespace {

class BCImpl final : public Policy::Impl {
 public:
  explicit BCImpl(std::shared_ptr<const BCFit> fit) : fit_(std::move(fit)) {}
  std::unique_ptr<Actor> make_actor() const override {
    auto fit = fit_;
    return std::make_unique<FuncActor>(
        [fit](const Vec& x, int, Rng&) { return fit->action(x); });
  }

 private:
  std::shared_ptr<const BCFit> fit_;
};

}  // namespace

Policy bc_learn(const simkit::Dataset& data,
                const instances::StableInstance& inst, const BCOptions& opts) {
  const int d = inst.d();
  const int k = inst.k();
  auto fit = std::make_shared<BCFit>();
  fit->completion = opts.completion;
  fit->tau = inst.tau();
  fit->x_offset = inst.x_offset();
  fit->k = k;
  fit->d = d;

  std::string status;
  if (data.n() == 0) {
    fit->K_hat = Mat::Zero(d, d);
    fit->Acl_hat = Mat::Zero(d, d);
    status = "degraded: empty dataset, zero policy";
  } else {
    // Split by initial-state support: the Z0 patch sits on a unit ball around
    // x_offset, the Z1 cloud near the origin; the supports are disjoint.
    std::vector<const simkit::Trajectory*> z0, z1;
    for (const auto& tr : data.trajectories) {
      const double dist = (tr.states.col(0) - inst.x_offset()).norm();
      (dist <= 1.5 ? z0 : z1).push_back(&tr);
    }
    fit->n_z0 = static_cast<int>(z0.size());
    fit->n_z1 = static_cast<int>(z1.size());

    if (!z0.empty()) {
      funclass::RegressionSample sample;
      sample.inputs.resize(k, fit->n_z0);
      sample.labels.resize(fit->n_z0);
      for (int i = 0; i < fit->n_z0; ++i) {
        const auto& tr = *z0[i];
        sample.inputs.col(i) = (tr.states.col(0) - inst.x_offset()).tail(k);
        sample.labels[i] = tr.inputs.col(0)[0] / inst.tau();
      }
      const int degree = opts.degree >= 0 ? opts.degree : inst.g().s - 1;
      const int nb = opts.neighborhood_size > 0
                         ? std::min(opts.neighborhood_size, fit->n_z0)
                         : std::min(fit->n_z0,
                                    4 * funclass::polynomial_coefficient_count(
                                            k, degree));
      fit->g_hat = funclass::LocalEstimator(std::move(sample), degree, nb);
      fit->g_ok = true;
    } else {
      status = "warning: no Z0 samples, g_hat == 0";
    }

    // Least squares for the gain on the Z1 pairs. Those states never excite
    // e1, so the minimal-norm solution zeroes column 1; the completion rule
    // below decides what to put there.
    long m = 0;
    for (const auto* tr : z1) m += tr->horizon();
    if (m > 0) {
      Mat X(d, m), U(d, m);
      Mat Xp(d, m - static_cast<long>(z1.size()));
      Mat Xn(d, Xp.cols());
      long col = 0, pcol = 0;
      for (const auto* tr : z1) {
        const int H = tr->horizon();
        for (int t = 0; t < H; ++t, ++col) {
          X.col(col) = tr->states.col(t);
          U.col(col) = tr->inputs.col(t);
          if (t + 1 < H) {
            Xp.col(pcol) = tr->states.col(t);
            Xn.col(pcol) = tr->states.col(t + 1);
            ++pcol;
          }
        }
      }
      Eigen::CompleteOrthogonalDecomposition<Mat> cod(X.transpose());
      fit->K_hat = cod.solve(U.transpose()).transpose();
      fit->z1_residual = (U - fit->K_hat * X).colwise().norm().maxCoeff();
      if (Xp.cols() > 0) {
        Eigen::CompleteOrthogonalDecomposition<Mat> codn(Xp.transpose());
        fit->Acl_hat = codn.solve(Xn.transpose()).transpose();
      } else {
        fit->Acl_hat = Mat::Zero(d, d);
      }
    } else {
      fit->K_hat = Mat::Zero(d, d);
      fit->Acl_hat = Mat::Zero(d, d);
      status = status.empty() ? "warning: no Z1 samples, K_hat == 0" : status;
    }

    // Column-1 completion: Z1 data is blind along e1.
    switch (opts.completion) {
      case Completion::least_norm:
        fit->K_hat.col(0).setZero();
        break;
      case Completion::assume_i:
        fit->K_hat.col(0) = inst.Kbar_of(inst.index()).col(0);
        break;
      case Completion::adversarial:
        fit->K_hat.col(0) = inst.Kbar_of(3 - inst.index()).col(0);
        break;
    }
    fit->Acl_hat.col(0).setZero();  // true closed loop has zero first column
  }

  Policy p(PolicyKind::deterministic, d, std::make_shared<BCImpl>(fit));
  p.set_bc_fit(fit);
  if (!status.empty()) p.set_status(status);
  return p;
}

// ---------------------------------------------------------------------------
// Action chunking
// ---------------------------------------------------------------------------

namespace {

struct ChunkContext {
  std::shared_ptr<const BCFit> fit;
  std::shared_ptr<const instances::StableInstance> inst;
  int chunk_len = 1;
  ChunkMode mode = ChunkMode::expert_plan;
};

class ChunkActor final : public Actor {
 public:
  explicit ChunkActor(std::shared_ptr<const ChunkContext> ctx)
      : ctx_(std::move(ctx)) {}

  bool wants_state(int t) const override {
    return (t - 1) % ctx_->chunk_len == 0;
  }

  Vec act(const Vec* state, int t, Rng&) override {
    const int offset = (t - 1) % ctx_->chunk_len;
    if (offset == 0) {
      if (state == nullptr)
        throw std::logic_error("ChunkActor: re-plan step needs the state");
      replan(*state);
    }
    return plan_.at(offset);
  }

 private:
  void replan(const Vec& x) {
    plan_.clear();
    const BCFit& fit = *ctx_->fit;
    Vec y = x;
    for (int j = 0; j < ctx_->chunk_len; ++j) {
      const Vec u = fit.action(y);
      plan_.push_back(u);
      if (ctx_->mode == ChunkMode::expert_plan) {
        // Fitted expert sequence: the learned closed loop sends patch states
        // to the origin and evolves linear-region states by Acl_hat.
        const double gate = matkit::bump(y - fit.x_offset);
        y = (1.0 - gate) * (fit.Acl_hat * y);
      } else {
        // Learner's open-loop model: Ahat = Acl_hat - K_hat.
        y = (fit.Acl_hat - fit.K_hat) * y + u;
      }
    }
  }

  std::shared_ptr<const ChunkContext> ctx_;
  std::vector<Vec> plan_;
};

class ChunkImpl final : public Policy::Impl {
 public:
  explicit ChunkImpl(std::shared_ptr<const ChunkContext> ctx)
      : ctx_(std::move(ctx)) {}
  std::unique_ptr<Actor> make_actor() const override {
    return std::make_unique<ChunkActor>(ctx_);
  }

 private:
  std::shared_ptr<const ChunkContext> ctx_;
};

}  // namespace

Policy chunk_wrap(const Policy& base, const instances::StableInstance& inst,
                  int chunk_len, ChunkMode mode) {
  if (chunk_len < 1)
    throw std::invalid_argument("chunk_wrap: chunk_len must be >= 1");
  auto fit = base.bc_fit();
  if (!fit)
    throw std::invalid_argument(
        "chunk_wrap: base must carry a behavior-cloning fit");
  auto ctx = std::make_shared<ChunkContext>();
  ctx->fit = std::move(fit);
  ctx->inst = std::make_shared<const instances::StableInstance>(inst);
  ctx->chunk_len = chunk_len;
  ctx->mode = mode;
  Policy p(PolicyKind::chunked, inst.d(), std::make_shared<ChunkImpl>(ctx));
  p.set_chunk_len(chunk_len);
  p.set_markovian(false);
  p.set_bc_fit(ctx->fit);
  return p;
}

// ---------------------------------------------------------------------------
// Anti-concentration
// ---------------------------------------------------------------------------

double AntiConcentrationReport::p_at(double alpha) const {
  double best = 1.0;
  double bestgap = std::numeric_limits<double>::infinity();
  for (const auto& [a, p] : frontier) {
    const double gap = std::abs(a - alpha);
    if (gap < bestgap) {
      bestgap = gap;
      best = p;
    }
  }
  return best;
}

AntiConcentrationReport anti_concentration_estimate(const Policy& policy,
                                                    CouplingKind coupling,
                                                    const Vec& x,
                                                    const Vec& x_prime,
                                                    int trials, Rng& rng) {
  if (trials < 2)
    throw std::invalid_argument("anti_concentration_estimate: trials >= 2");
  const int d = policy.dim();
  Mat diffs(d, trials);
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t s = rng.next_u64();
    Rng r1(s);
    Rng r2 = coupling == CouplingKind::shared_noise ? Rng(s) : Rng(rng.next_u64());
    auto a1 = policy.make_actor();
    auto a2 = policy.make_actor();
    const Vec u = a1->act(&x, 1, r1);
    const Vec up = a2->act(&x_prime, 1, r2);
    diffs.col(i) = u - up;
  }

  const std::vector<double> alpha_grid = {0.25, 0.5,  1.0 / std::sqrt(2.0),
                                          0.75, 1.0, 1.25, 1.5, 2.0};
  const int n_dirs = d == 1 ? 1 : 32;
  AntiConcentrationReport report;
  std::vector<double> worst_p(alpha_grid.size(), 1.0);
  bool any_variance = false;
  for (int dir = 0; dir < n_dirs; ++dir) {
    Vec v = d == 1 ? Vec::Ones(1) : rng.unit_sphere(d);
    Eigen::RowVectorXd s = v.transpose() * diffs;
    const double mean = s.mean();
    const double var = (s.array() - mean).square().mean();
    const double sd = std::sqrt(var);
    if (sd <= 1e-14) continue;  // deterministic direction: (1,1) by convention
    any_variance = true;
    for (size_t ai = 0; ai < alpha_grid.size(); ++ai) {
      int hits = 0;
      for (int i = 0; i < trials; ++i)
        if (std::abs(s[i] - mean) >= alpha_grid[ai] * sd) ++hits;
      worst_p[ai] = std::min(worst_p[ai], static_cast<double>(hits) / trials);
    }
  }

  if (!any_variance) {
    report.degenerate = true;
    report.alpha_hat = 1.0;
    report.p_hat = 1.0;
    for (double a : alpha_grid) report.frontier.emplace_back(a, 1.0);
    return report;
  }
  double best_score = -1.0;
  for (size_t ai = 0; ai < alpha_grid.size(); ++ai) {
    report.frontier.emplace_back(alpha_grid[ai], worst_p[ai]);
    const double score = alpha_grid[ai] * worst_p[ai];
    if (score > best_score) {
      best_score = score;
      report.alpha_hat = alpha_grid[ai];
      report.p_hat = worst_p[ai];
    }
  }
  return report;
}

Policy bc_policy_from_fit(std::shared_ptr<const BCFit> fit) {
  const int d = fit->d;
  Policy p(PolicyKind::deterministic, d, std::make_shared<BCImpl>(fit));
  p.set_bc_fit(std::move(fit));
  return p;
}

Policy mixture_policy(std::vector<Policy> components,
                      std::vector<double> weights) {
  if (components.empty() || components.size() != weights.size())
    throw std::invalid_argument("mixture_policy: bad component/weight lists");
  const int d = components.front().dim();
  double total = 0.0;
  for (double w : weights) total += w;
  auto comps = std::make_shared<std::vector<Policy>>(std::move(components));
  auto ws = std::make_shared<std::vector<double>>(std::move(weights));
  Policy p = make_func_policy(
      PolicyKind::mixture, d,
      [comps, ws, total](const Vec& x, int t, Rng& rng) {
        double r = rng.uniform() * total;
        size_t idx = 0;
        for (; idx + 1 < ws->size(); ++idx) {
          if (r < (*ws)[idx]) break;
          r -= (*ws)[idx];
        }
        auto actor = (*comps)[idx].make_actor();
        return actor->act(&x, t, rng);
      });
  p.set_deterministic(false);
  return p;
}

}  // namespace ilbench::policies
