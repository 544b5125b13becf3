#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ilbench/common.hpp"
#include "ilbench/instances.hpp"
#include "ilbench/trajectory.hpp"

namespace ilbench::policies {

enum class PolicyKind {
  deterministic,
  simply_stochastic,
  gaussian,
  mixture,
  gamblers_ruin,
  concentric,
  switching,
  chunked,
  mlp,
  toy_diffusion,
};

std::string to_string(PolicyKind kind);

/// Per-rollout execution state. Actors may remember what they have seen;
/// chunked actors decline the state mid-chunk, which is how open-loop
/// execution is enforced at the interface.
class Actor {
 public:
  virtual ~Actor() = default;
  virtual bool wants_state(int /*t*/) const { return true; }
  /// `state` is null exactly when wants_state(t) returned false. t is 1-based.
  virtual Vec act(const Vec* state, int t, Rng& rng) = 0;
};

struct BCFit;

/// Immutable policy description; clone per-trajectory execution state via
/// make_actor().
class Policy {
 public:
  struct Impl {
    virtual ~Impl() = default;
    virtual std::unique_ptr<Actor> make_actor() const = 0;
  };

  Policy() = default;
  Policy(PolicyKind kind, int dim, std::shared_ptr<const Impl> impl)
      : kind_(kind), dim_(dim), impl_(std::move(impl)) {}

  PolicyKind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool deterministic() const { return deterministic_; }
  bool markovian() const { return markovian_; }
  int chunk_len() const { return chunk_len_; }
  int period() const { return period_; }
  const std::optional<double>& mean_lipschitz() const { return mean_L_; }
  const std::optional<double>& mean_smooth() const { return mean_M_; }
  const std::string& status() const { return status_; }
  std::shared_ptr<const BCFit> bc_fit() const { return bc_fit_; }

  std::unique_ptr<Actor> make_actor() const { return impl_->make_actor(); }

  /// One Markovian action sample at x (runs a fresh actor at t = 1).
  Vec sample_action(const Vec& x, Rng& rng) const;

  // Builder-style setters used by the factory functions.
  Policy& set_deterministic(bool v) { deterministic_ = v; return *this; }
  Policy& set_markovian(bool v) { markovian_ = v; return *this; }
  Policy& set_chunk_len(int v) { chunk_len_ = v; return *this; }
  Policy& set_period(int v) { period_ = v; return *this; }
  Policy& set_mean_smoothness(double L, double M) { mean_L_ = L; mean_M_ = M; return *this; }
  Policy& set_status(std::string s) { status_ = std::move(s); return *this; }
  Policy& set_bc_fit(std::shared_ptr<const BCFit> f) { bc_fit_ = std::move(f); return *this; }

 private:
  PolicyKind kind_ = PolicyKind::deterministic;
  int dim_ = 0;
  bool deterministic_ = true;
  bool markovian_ = true;
  int chunk_len_ = 1;
  int period_ = 1;
  std::optional<double> mean_L_, mean_M_;
  std::string status_;
  std::shared_ptr<const BCFit> bc_fit_;
  std::shared_ptr<const Impl> impl_;
};

// ---------------------------------------------------------------------------
// Elementary policies
// ---------------------------------------------------------------------------

Policy zero_policy(int d);
Policy linear_policy(const Mat& K);
Policy expert_policy(const instances::StableInstance& inst);
Policy expert_policy(const instances::UnstableInstance& inst);
/// Fresh u ~ N(0, sigma^2 I) each step, independent of the state.
Policy random_noise_policy(int d, double sigma);
/// Adds state-independent N(0, sigma^2 I) noise to a deterministic base.
Policy gaussian_wrap(const Policy& base, double sigma);
/// Deterministic offset c added on top of a deterministic base.
Policy offset_policy(const Policy& base, const Vec& offset);
/// Offset applied only inside the regression patch of a stable instance.
Policy patch_offset_policy(const instances::StableInstance& inst,
                           const Vec& offset);

// ---------------------------------------------------------------------------
// Scalar strategies for the gambler system
// ---------------------------------------------------------------------------

Policy gamblers_ruin_policy(double rho);
Policy concentric_policy(double rho);
Policy switching_policy(double rho);
/// History-dependent adaptive variant: probes with u_1 = 0, then cancels the
/// identified dynamics exactly for t >= 2.
Policy adaptive_cancel_policy();

/// Interval index j with |x| in ((2 rho)^{-2j}, (2 rho)^{-2(j-1)}].
int concentric_interval_index(double rho, double x);

// ---------------------------------------------------------------------------
// Behavior cloning on the stable construction
// ---------------------------------------------------------------------------

enum class Completion { least_norm, assume_i, adversarial };

struct BCFit {
  funclass::LocalEstimator g_hat;
  bool g_ok = false;  // false when no Z0 samples were available
  Mat K_hat;          // d x d gain; column 1 set by the completion rule
  Mat Acl_hat;        // closed-loop map estimate from consecutive Z1 states
  double z1_residual = 0.0;
  int n_z0 = 0;
  int n_z1 = 0;
  Completion completion = Completion::least_norm;
  double tau = 0.1;
  Vec x_offset;
  int k = 0, d = 0;

  Vec action(const Vec& x) const;
};

struct BCOptions {
  Completion completion = Completion::least_norm;
  int degree = -1;             // default: s - 1
  int neighborhood_size = -1;  // default: 4 * (#coefficients)
};

Policy bc_learn(const simkit::Dataset& data,
                const instances::StableInstance& inst, const BCOptions& opts);

// ---------------------------------------------------------------------------
// Action chunking
// ---------------------------------------------------------------------------

enum class ChunkMode {
  expert_plan,    // replay the fitted expert sequence from the re-plan state
  model_rollout,  // simulate the base under the learner's fitted model
};

/// Wraps a BC-backed base policy: re-plans every chunk_len steps and executes
/// the planned actions open loop in between.
Policy chunk_wrap(const Policy& base, const instances::StableInstance& inst,
                  int chunk_len, ChunkMode mode = ChunkMode::expert_plan);

// ---------------------------------------------------------------------------
// Tiny MLP policies (hand-rolled backprop)
// ---------------------------------------------------------------------------

struct TinyNet {
  std::vector<Mat> W;
  std::vector<Vec> b;

  int in_dim() const { return W.empty() ? 0 : static_cast<int>(W.front().cols()); }
  int out_dim() const { return W.empty() ? 0 : static_cast<int>(W.back().rows()); }
  Vec forward(const Vec& x) const;  // tanh hidden layers, linear output
  int parameter_count() const;
};

TinyNet make_net(int in_dim, const std::vector<int>& hidden, int out_dim,
                 Rng& rng, double init_scale = 0.5);

/// Mean squared error over columns of (X, Y) plus its gradient.
double mlp_loss_and_grad(const TinyNet& net, const Mat& X, const Mat& Y,
                         std::vector<Mat>* gW, std::vector<Vec>* gb);

struct MlpConfig {
  std::vector<int> hidden = {16, 16, 16};
  int iterations = 2000;
  int batch = 256;
  double lr = 1e-3;
  double weight_decay = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double val_fraction = 0.1;
  int val_every = 50;
};

struct TrainTrace {
  std::vector<int> iteration;
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  bool diverged = false;
};

struct MlpTrainResult {
  Policy policy;
  TinyNet net;
  TrainTrace trace;
};

/// Supervised L2 regression of actions on states over all (x_t, u_t) pairs,
/// AdamW with cosine learning-rate decay. Deterministic given (data, cfg, rng).
MlpTrainResult mlp_train(const simkit::Dataset& data, const MlpConfig& cfg,
                         Rng& rng);
MlpTrainResult mlp_train_xy(const Mat& X, const Mat& Y, const MlpConfig& cfg,
                            Rng& rng);

// ---------------------------------------------------------------------------
// Toy diffusion policy (DDPM-style conditional denoiser)
// ---------------------------------------------------------------------------

struct DiffusionConfig {
  int steps = 16;  // linear beta schedule, frozen
  double beta_min = 1e-4;
  double beta_max = 0.25;
  int hidden = 16;
  int film_layers = 3;
  int time_dim = 256;
  int iterations = 1500;
  int batch = 128;
  double lr = 1e-3;
  double weight_decay = 1e-5;
  int chunk_len = 1;  // predicts chunk_len actions per draw
  double val_fraction = 0.1;
  int val_every = 50;
};

struct DiffusionModel;  // opaque; serialized via serialize.hpp

struct DiffusionTrainResult {
  Policy policy;
  std::shared_ptr<const DiffusionModel> model;
  TrainTrace trace;
  double train_residual = 0.0;  // rms action residual on the training pairs
};

DiffusionTrainResult toy_diffusion_train(const simkit::Dataset& data,
                                         const DiffusionConfig& cfg, Rng& rng);
DiffusionTrainResult toy_diffusion_train_xy(const Mat& X, const Mat& U,
                                            const DiffusionConfig& cfg,
                                            Rng& rng);

/// Draw one action (or chunk head) from a trained model at state x.
Vec diffusion_sample(const DiffusionModel& model, const Vec& x, Rng& rng);

// Checkpoint reconstruction (used by the serialization layer).
Policy bc_policy_from_fit(std::shared_ptr<const BCFit> fit);
Policy mlp_policy_from_net(TinyNet net);
Policy diffusion_policy_from_model(std::shared_ptr<const DiffusionModel> model);

// ---------------------------------------------------------------------------
// Anti-concentration
// ---------------------------------------------------------------------------

enum class CouplingKind { shared_noise, independent };

struct AntiConcentrationReport {
  double alpha_hat = 1.0;
  double p_hat = 1.0;
  bool degenerate = false;  // zero-variance direction: (1,1) by convention
  std::vector<std::pair<double, double>> frontier;  // (alpha, worst-case p)

  double p_at(double alpha) const;  // frontier lookup (closest grid point)
};

/// Estimates Pr[|<v, u - u'>| - mean| >= alpha * std] over random unit
/// directions v, reporting the worst case per alpha on a fixed grid.
AntiConcentrationReport anti_concentration_estimate(
    const Policy& policy, CouplingKind coupling, const Vec& x,
    const Vec& x_prime, int trials, Rng& rng);

Policy mixture_policy(std::vector<Policy> components,
                      std::vector<double> weights);

}  // namespace ilbench::policies
