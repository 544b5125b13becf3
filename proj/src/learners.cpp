#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ilbench/policies.hpp"

#include "diffusion_model.hpp"

namespace ilbench::policies {

// ---------------------------------------------------------------------------
// TinyNet
// ---------------------------------------------------------------------------

Vec TinyNet::forward(const Vec& x) const {
  Vec h = x;
  const int L = static_cast<int>(W.size());
  for (int l = 0; l < L; ++l) {
    h = (W[l] * h + b[l]).eval();
    if (l + 1 < L) h = h.array().tanh().matrix();
  }
  return h;
}

int TinyNet::parameter_count() const {
  int n = 0;
  for (const auto& w : W) n += static_cast<int>(w.size());
  for (const auto& v : b) n += static_cast<int>(v.size());
  return n;
}

TinyNet make_net(int in_dim, const std::vector<int>& hidden, int out_dim,
                 Rng& rng, double init_scale) {
  TinyNet net;
  std::vector<int> dims;
  dims.push_back(in_dim);
  for (int h : hidden) dims.push_back(h);
  dims.push_back(out_dim);
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    const int rows = dims[l + 1], cols = dims[l];
    Mat w(rows, cols);
    const double scale = init_scale / std::sqrt(static_cast<double>(cols));
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) w(i, j) = scale * rng.normal();
    net.W.push_back(std::move(w));
    net.b.push_back(Vec::Zero(rows));
  }
  return net;
}

double mlp_loss_and_grad(const TinyNet& net, const Mat& X, const Mat& Y,
                         std::vector<Mat>* gW, std::vector<Vec>* gb) {
  const int L = static_cast<int>(net.W.size());
  const int B = static_cast<int>(X.cols());
  if (gW) {
    gW->clear();
    gb->clear();
    for (int l = 0; l < L; ++l) {
      gW->push_back(Mat::Zero(net.W[l].rows(), net.W[l].cols()));
      gb->push_back(Vec::Zero(net.b[l].size()));
    }
  }
  // Forward with caches (batched).
  std::vector<Mat> H(L + 1);
  H[0] = X;
  for (int l = 0; l < L; ++l) {
    Mat A = (net.W[l] * H[l]).colwise() + net.b[l];
    H[l + 1] = (l + 1 < L) ? Mat(A.array().tanh().matrix()) : A;
  }
  const Mat R = H[L] - Y;
  const double loss = R.squaredNorm() / B;
  if (!gW) return loss;

  Mat D = (2.0 / B) * R;  // dLoss/dA_L (output layer is linear)
  for (int l = L - 1; l >= 0; --l) {
    (*gW)[l] = D * H[l].transpose();
    (*gb)[l] = D.rowwise().sum();
    if (l > 0) {
      Mat up = net.W[l].transpose() * D;
      D = up.array() * (1.0 - H[l].array().square());
    }
  }
  return loss;
}

namespace {

struct AdamState {
  std::vector<Mat> mW, vW;
  std::vector<Vec> mb, vb;
  long t = 0;

  void init(const TinyNet& net) {
    for (size_t l = 0; l < net.W.size(); ++l) {
      mW.push_back(Mat::Zero(net.W[l].rows(), net.W[l].cols()));
      vW.push_back(Mat::Zero(net.W[l].rows(), net.W[l].cols()));
      mb.push_back(Vec::Zero(net.b[l].size()));
      vb.push_back(Vec::Zero(net.b[l].size()));
    }
  }
};

void adamw_update(TinyNet& net, const std::vector<Mat>& gW,
                  const std::vector<Vec>& gb, AdamState& st, double lr,
                  double wd, double b1, double b2, double eps) {
  ++st.t;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(st.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(st.t));
  for (size_t l = 0; l < net.W.size(); ++l) {
    st.mW[l] = b1 * st.mW[l] + (1.0 - b1) * gW[l];
    st.vW[l] = b2 * st.vW[l].array().matrix() +
               (1.0 - b2) * gW[l].array().square().matrix();
    net.W[l].array() -=
        lr * ((st.mW[l].array() / c1) / ((st.vW[l].array() / c2).sqrt() + eps) +
              wd * net.W[l].array());
    st.mb[l] = b1 * st.mb[l] + (1.0 - b1) * gb[l];
    st.vb[l] = b2 * st.vb[l].array().matrix() +
               (1.0 - b2) * gb[l].array().square().matrix();
    net.b[l].array() -=
        lr * ((st.mb[l].array() / c1) / ((st.vb[l].array() / c2).sqrt() + eps) +
              wd * net.b[l].array());
  }
}

class MlpImpl final : public Policy::Impl {
 public:
  explicit MlpImpl(std::shared_ptr<const TinyNet> net) : net_(std::move(net)) {}
  std::unique_ptr<Actor> make_actor() const override;

 private:
  std::shared_ptr<const TinyNet> net_;
};

class MlpActor final : public Actor {
 public:
  explicit MlpActor(std::shared_ptr<const TinyNet> net) : net_(std::move(net)) {}
  Vec act(const Vec* state, int, Rng&) override { return net_->forward(*state); }

 private:
  std::shared_ptr<const TinyNet> net_;
};

std::unique_ptr<Actor> MlpImpl::make_actor() const {
  return std::make_unique<MlpActor>(net_);
}

void dataset_to_xy(const simkit::Dataset& data, Mat& X, Mat& Y) {
  long m = 0;
  for (const auto& tr : data.trajectories) m += tr.horizon();
  if (m == 0) throw std::invalid_argument("mlp_train: empty dataset");
  const int d = data.trajectories.front().dim();
  X.resize(d, m);
  Y.resize(d, m);
  long col = 0;
  for (const auto& tr : data.trajectories) {
    for (int t = 0; t < tr.horizon(); ++t, ++col) {
      X.col(col) = tr.states.col(t);
      Y.col(col) = tr.inputs.col(t);
    }
  }
}

}  // namespace

MlpTrainResult mlp_train_xy(const Mat& X, const Mat& Y, const MlpConfig& cfg,
                            Rng& rng) {
  const int n = static_cast<int>(X.cols());
  if (n == 0) throw std::invalid_argument("mlp_train: empty dataset");
  const int in_dim = static_cast<int>(X.rows());
  const int out_dim = static_cast<int>(Y.rows());

  // Deterministic shuffled split for validation.
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_int(i + 1)]);
  const int n_val = std::min(n - 1, std::max(1, static_cast<int>(n * cfg.val_fraction)));
  const int n_train = n - n_val;
  Mat Xt(in_dim, n_train), Yt(out_dim, n_train), Xv(in_dim, n_val), Yv(out_dim, n_val);
  for (int i = 0; i < n_train; ++i) {
    Xt.col(i) = X.col(perm[i]);
    Yt.col(i) = Y.col(perm[i]);
  }
  for (int i = 0; i < n_val; ++i) {
    Xv.col(i) = X.col(perm[n_train + i]);
    Yv.col(i) = Y.col(perm[n_train + i]);
  }

  MlpTrainResult out;
  TinyNet net = make_net(in_dim, cfg.hidden, out_dim, rng);
  AdamState adam;
  adam.init(net);
  std::vector<Mat> gW;
  std::vector<Vec> gb;
  const int B = std::min(cfg.batch, n_train);
  Mat Xb(in_dim, B), Yb(out_dim, B);
  for (int it = 0; it < cfg.iterations; ++it) {
    for (int j = 0; j < B; ++j) {
      const int idx = rng.uniform_int(n_train);
      Xb.col(j) = Xt.col(idx);
      Yb.col(j) = Yt.col(idx);
    }
    const double loss = mlp_loss_and_grad(net, Xb, Yb, &gW, &gb);
    if (!std::isfinite(loss)) {
      out.trace.diverged = true;
      break;
    }
    const double lr =
        cfg.lr * 0.5 * (1.0 + std::cos(M_PI * it / std::max(1, cfg.iterations)));
    adamw_update(net, gW, gb, adam, lr, cfg.weight_decay, cfg.adam_beta1,
                 cfg.adam_beta2, cfg.adam_eps);
    if (it % std::max(1, cfg.val_every) == 0 || it + 1 == cfg.iterations) {
      out.trace.iteration.push_back(it);
      out.trace.train_loss.push_back(loss);
      out.trace.val_loss.push_back(mlp_loss_and_grad(net, Xv, Yv, nullptr, nullptr));
    }
  }
  if (out.trace.diverged)
    throw std::runtime_error("mlp_train: loss diverged (NaN)");

  auto shared = std::make_shared<const TinyNet>(net);
  Policy p(PolicyKind::mlp, out_dim, std::make_shared<MlpImpl>(shared));
  out.policy = p;
  out.net = net;
  return out;
}

MlpTrainResult mlp_train(const simkit::Dataset& data, const MlpConfig& cfg,
                         Rng& rng) {
  Mat X, Y;
  dataset_to_xy(data, X, Y);
  return mlp_train_xy(X, Y, cfg, rng);
}

// ---------------------------------------------------------------------------
// Toy diffusion
// ---------------------------------------------------------------------------

namespace {

struct FilmCache {
  Vec cond, film;
  std::vector<Vec> a_pre;   // pre-activation before film, per layer
  std::vector<Vec> z_post;  // post-film pre-tanh, per layer
  std::vector<Vec> h;       // activations, h[0] = input
};

Vec film_forward(const DiffusionModel& m, const Vec& u, int t, const Vec& xs,
                 FilmCache* cache) {
  Vec cond(m.time_dim + m.state_dim);
  cond << m.time_embedding(t), xs;
  const Vec film = m.W_film * cond + m.b_film;
  std::vector<Vec> a_pre, z_post, hs;
  hs.push_back(u);
  Vec h = u;
  int off = 0;
  for (int l = 0; l < m.layers; ++l) {
    Vec a = l == 0 ? Vec(m.W_in * h + m.b_in) : Vec(m.W_h[l - 1] * h + m.b_h[l - 1]);
    Vec z(m.hidden);
    for (int i = 0; i < m.hidden; ++i)
      z[i] = (1.0 + film[off + i]) * a[i] + film[off + m.hidden + i];
    off += 2 * m.hidden;
    a_pre.push_back(a);
    z_post.push_back(z);
    h = z.array().tanh().matrix();
    hs.push_back(h);
  }
  Vec out = m.W_out * h + m.b_out;
  if (cache) {
    cache->cond = cond;
    cache->film = film;
    cache->a_pre = std::move(a_pre);
    cache->z_post = std::move(z_post);
    cache->h = std::move(hs);
  }
  return out;
}

}  // namespace

Vec DiffusionModel::predict_eps(const Vec& u, int t, const Vec& xs) const {
  return film_forward(*this, u, t, xs, nullptr);
}

namespace {

struct DiffusionGrads {
  Mat W_in, W_out, W_film;
  Vec b_in, b_out, b_film;
  std::vector<Mat> W_h;
  std::vector<Vec> b_h;

  void init(const DiffusionModel& m) {
    W_in = Mat::Zero(m.W_in.rows(), m.W_in.cols());
    b_in = Vec::Zero(m.b_in.size());
    W_out = Mat::Zero(m.W_out.rows(), m.W_out.cols());
    b_out = Vec::Zero(m.b_out.size());
    W_film = Mat::Zero(m.W_film.rows(), m.W_film.cols());
    b_film = Vec::Zero(m.b_film.size());
    for (const auto& w : m.W_h) W_h.push_back(Mat::Zero(w.rows(), w.cols()));
    for (const auto& v : m.b_h) b_h.push_back(Vec::Zero(v.size()));
  }
};

void film_backward(const DiffusionModel& m, const FilmCache& c, const Vec& dout,
                   DiffusionGrads& g) {
  g.W_out += dout * c.h.back().transpose();
  g.b_out += dout;
  Vec dh = m.W_out.transpose() * dout;
  Vec dfilm = Vec::Zero(m.b_film.size());
  for (int l = m.layers - 1; l >= 0; --l) {
    const Vec& h = c.h[l + 1];
    Vec dz = (dh.array() * (1.0 - h.array().square())).matrix();
    const int off = 2 * m.hidden * l;
    Vec da(m.hidden);
    for (int i = 0; i < m.hidden; ++i) {
      dfilm[off + i] += dz[i] * c.a_pre[l][i];      // d gamma_raw
      dfilm[off + m.hidden + i] += dz[i];           // d beta
      da[i] = dz[i] * (1.0 + c.film[off + i]);
    }
    if (l == 0) {
      g.W_in += da * c.h[0].transpose();
      g.b_in += da;
    } else {
      g.W_h[l - 1] += da * c.h[l].transpose();
      g.b_h[l - 1] += da;
      dh = m.W_h[l - 1].transpose() * da;
    }
  }
  g.W_film += dfilm * c.cond.transpose();
  g.b_film += dfilm;
}

struct DiffusionAdam {
  DiffusionGrads m, v;
  long t = 0;
  void init(const DiffusionModel& model) {
    m.init(model);
    v.init(model);
  }
};

void adam_apply(Mat& p, const Mat& g, Mat& m, Mat& v, double lr, double wd,
                double b1, double b2, double eps, double c1, double c2) {
  m = b1 * m + (1.0 - b1) * g;
  v = (b2 * v.array() + (1.0 - b2) * g.array().square()).matrix();
  p.array() -= lr * ((m.array() / c1) / ((v.array() / c2).sqrt() + eps) +
                     wd * p.array());
}
void adam_apply(Vec& p, const Vec& g, Vec& m, Vec& v, double lr, double wd,
                double b1, double b2, double eps, double c1, double c2) {
  m = b1 * m + (1.0 - b1) * g;
  v = (b2 * v.array() + (1.0 - b2) * g.array().square()).matrix();
  p.array() -= lr * ((m.array() / c1) / ((v.array() / c2).sqrt() + eps) +
                     wd * p.array());
}

class DiffusionActor final : public Actor {
 public:
  DiffusionActor(std::shared_ptr<const DiffusionModel> model)
      : model_(std::move(model)) {}

  bool wants_state(int t) const override {
    return (t - 1) % model_->chunk_len == 0;
  }

  Vec act(const Vec* state, int t, Rng& rng) override {
    const int offset = (t - 1) % model_->chunk_len;
    if (offset == 0) {
      if (state == nullptr)
        throw std::logic_error("DiffusionActor: re-plan step needs the state");
      chunk_ = diffusion_sample(*model_, *state, rng);
    }
    const int d = model_->out_dim / model_->chunk_len;
    return chunk_.segment(offset * d, d);
  }

 private:
  std::shared_ptr<const DiffusionModel> model_;
  Vec chunk_;
};

class DiffusionImpl final : public Policy::Impl {
 public:
  explicit DiffusionImpl(std::shared_ptr<const DiffusionModel> model)
      : model_(std::move(model)) {}
  std::unique_ptr<Actor> make_actor() const override {
    return std::make_unique<DiffusionActor>(model_);
  }

 private:
  std::shared_ptr<const DiffusionModel> model_;
};

Vec standardize(const Vec& v, const Vec& mu, const Vec& sd) {
  return ((v - mu).array() / sd.array()).matrix();
}

}  // namespace

Vec diffusion_sample(const DiffusionModel& m, const Vec& x, Rng& rng) {
  const Vec xs = standardize(x, m.x_mu, m.x_sd);
  Vec u = rng.normal_vec(m.out_dim);
  for (int t = m.steps; t >= 1; --t) {
    const double a = m.alphas[t - 1];
    const double ab = m.alpha_bars[t - 1];
    const double abp = t > 1 ? m.alpha_bars[t - 2] : 1.0;
    const Vec eps = m.predict_eps(u, t, xs);
    u = (u - (m.betas[t - 1] / std::sqrt(1.0 - ab)) * eps) / std::sqrt(a);
    if (t > 1) {
      const double sigma =
          std::sqrt((1.0 - abp) / (1.0 - ab) * m.betas[t - 1]);
      u += sigma * rng.normal_vec(m.out_dim);
    }
  }
  return (u.array() * m.u_sd.array() + m.u_mu.array()).matrix();
}

DiffusionTrainResult toy_diffusion_train_xy(const Mat& X, const Mat& U,
                                            const DiffusionConfig& cfg,
                                            Rng& rng) {
  const int n = static_cast<int>(X.cols());
  if (n == 0) throw std::invalid_argument("toy_diffusion_train: empty dataset");
  const int state_dim = static_cast<int>(X.rows());
  const int out_dim = static_cast<int>(U.rows());

  auto model = std::make_shared<DiffusionModel>();
  DiffusionModel& m = *model;
  m.out_dim = out_dim;
  m.state_dim = state_dim;
  m.hidden = cfg.hidden;
  m.layers = cfg.film_layers;
  m.time_dim = cfg.time_dim;
  m.steps = cfg.steps;
  m.chunk_len = cfg.chunk_len;

  m.x_mu = X.rowwise().mean();
  m.u_mu = U.rowwise().mean();
  m.x_sd = ((X.colwise() - m.x_mu).array().square().rowwise().mean() + 1e-12)
               .sqrt()
               .matrix();
  m.u_sd = ((U.colwise() - m.u_mu).array().square().rowwise().mean() + 1e-12)
               .sqrt()
               .matrix();

  m.betas.resize(cfg.steps);
  m.alphas.resize(cfg.steps);
  m.alpha_bars.resize(cfg.steps);
  double ab = 1.0;
  for (int t = 0; t < cfg.steps; ++t) {
    m.betas[t] = cfg.beta_min +
                 (cfg.beta_max - cfg.beta_min) * t / std::max(1, cfg.steps - 1);
    m.alphas[t] = 1.0 - m.betas[t];
    ab *= m.alphas[t];
    m.alpha_bars[t] = ab;
  }

  auto glorot = [&rng](Mat& w, double scale) {
    const double s = scale / std::sqrt(static_cast<double>(w.cols()));
    for (int j = 0; j < w.cols(); ++j)
      for (int i = 0; i < w.rows(); ++i) w(i, j) = s * rng.normal();
  };
  m.W_in.resize(cfg.hidden, out_dim);
  glorot(m.W_in, 0.5);
  m.b_in = Vec::Zero(cfg.hidden);
  for (int l = 0; l + 1 < cfg.film_layers; ++l) {
    Mat w(cfg.hidden, cfg.hidden);
    glorot(w, 0.5);
    m.W_h.push_back(std::move(w));
    m.b_h.push_back(Vec::Zero(cfg.hidden));
  }
  m.W_out.resize(out_dim, cfg.hidden);
  glorot(m.W_out, 0.5);
  m.b_out = Vec::Zero(out_dim);
  m.W_film.resize(2 * cfg.hidden * cfg.film_layers, cfg.time_dim + state_dim);
  glorot(m.W_film, 0.1);
  m.b_film = Vec::Zero(2 * cfg.hidden * cfg.film_layers);

  // Standardize once.
  Mat Xs(state_dim, n), Us(out_dim, n);
  for (int i = 0; i < n; ++i) {
    Xs.col(i) = standardize(X.col(i), m.x_mu, m.x_sd);
    Us.col(i) = standardize(U.col(i), m.u_mu, m.u_sd);
  }
  const int n_val = std::min(n - 1, std::max(1, static_cast<int>(n * cfg.val_fraction)));
  const int n_train = n - n_val;

  DiffusionAdam adam;
  adam.init(m);
  DiffusionGrads grads;
  grads.init(m);

  DiffusionTrainResult out;
  const int B = std::min(cfg.batch, n_train);
  for (int it = 0; it < cfg.iterations; ++it) {
    grads.init(m);
    double loss = 0.0;
    for (int j = 0; j < B; ++j) {
      const int idx = rng.uniform_int(n_train);
      const int t = 1 + rng.uniform_int(cfg.steps);
      const double abt = m.alpha_bars[t - 1];
      const Vec eps = rng.normal_vec(out_dim);
      const Vec u_noisy =
          std::sqrt(abt) * Us.col(idx) + std::sqrt(1.0 - abt) * eps;
      FilmCache cache;
      const Vec pred = film_forward(m, u_noisy, t, Xs.col(idx), &cache);
      const Vec r = pred - eps;
      loss += r.squaredNorm();
      film_backward(m, cache, (2.0 / B) * r, grads);
    }
    loss /= B;
    if (!std::isfinite(loss)) {
      out.trace.diverged = true;
      break;
    }
    const double lr =
        cfg.lr * 0.5 * (1.0 + std::cos(M_PI * it / std::max(1, cfg.iterations)));
    ++adam.t;
    const double c1 = 1.0 - std::pow(0.9, static_cast<double>(adam.t));
    const double c2 = 1.0 - std::pow(0.999, static_cast<double>(adam.t));
    const double wd = cfg.weight_decay;
    adam_apply(m.W_in, grads.W_in, adam.m.W_in, adam.v.W_in, lr, wd, 0.9, 0.999, 1e-8, c1, c2);
    adam_apply(m.b_in, grads.b_in, adam.m.b_in, adam.v.b_in, lr, 0.0, 0.9, 0.999, 1e-8, c1, c2);
    for (size_t l = 0; l < m.W_h.size(); ++l) {
      adam_apply(m.W_h[l], grads.W_h[l], adam.m.W_h[l], adam.v.W_h[l], lr, wd, 0.9, 0.999, 1e-8, c1, c2);
      adam_apply(m.b_h[l], grads.b_h[l], adam.m.b_h[l], adam.v.b_h[l], lr, 0.0, 0.9, 0.999, 1e-8, c1, c2);
    }
    adam_apply(m.W_out, grads.W_out, adam.m.W_out, adam.v.W_out, lr, wd, 0.9, 0.999, 1e-8, c1, c2);
    adam_apply(m.b_out, grads.b_out, adam.m.b_out, adam.v.b_out, lr, 0.0, 0.9, 0.999, 1e-8, c1, c2);
    adam_apply(m.W_film, grads.W_film, adam.m.W_film, adam.v.W_film, lr, wd, 0.9, 0.999, 1e-8, c1, c2);
    adam_apply(m.b_film, grads.b_film, adam.m.b_film, adam.v.b_film, lr, 0.0, 0.9, 0.999, 1e-8, c1, c2);

    if (it % std::max(1, cfg.val_every) == 0 || it + 1 == cfg.iterations) {
      // Validation denoising loss on held-out pairs at mid-chain noise.
      double vloss = 0.0;
      Rng vr(0xd1f5u + it);
      for (int i = 0; i < n_val; ++i) {
        const int idx = n_train + i;
        const int t = 1 + vr.uniform_int(cfg.steps);
        const Vec eps = vr.normal_vec(out_dim);
        const double abt = m.alpha_bars[t - 1];
        const Vec u_noisy =
            std::sqrt(abt) * Us.col(idx) + std::sqrt(1.0 - abt) * eps;
        vloss += (film_forward(m, u_noisy, t, Xs.col(idx), nullptr) - eps)
                     .squaredNorm();
      }
      out.trace.iteration.push_back(it);
      out.trace.train_loss.push_back(loss);
      out.trace.val_loss.push_back(vloss / n_val);
    }
  }
  if (out.trace.diverged)
    throw std::runtime_error("toy_diffusion_train: loss diverged (NaN)");

  // Residual scale: rms distance between samples and training actions at
  // training states (few probes).
  {
    Rng pr(0x9d5u);
    double acc = 0.0;
    const int probes = std::min(32, n);
    for (int i = 0; i < probes; ++i) {
      const Vec s = diffusion_sample(m, X.col(i), pr);
      acc += (s - U.col(i)).squaredNorm();
    }
    out.train_residual = std::sqrt(acc / probes);
  }

  std::shared_ptr<const DiffusionModel> frozen = model;
  Policy p(PolicyKind::toy_diffusion, out_dim / cfg.chunk_len,
           std::make_shared<DiffusionImpl>(frozen));
  p.set_deterministic(false);
  p.set_chunk_len(cfg.chunk_len);
  p.set_markovian(cfg.chunk_len == 1);
  out.policy = p;
  out.model = frozen;
  return out;
}

Policy mlp_policy_from_net(TinyNet net) {
  const int out_dim = net.out_dim();
  auto shared = std::make_shared<const TinyNet>(std::move(net));
  return Policy(PolicyKind::mlp, out_dim, std::make_shared<MlpImpl>(shared));
}

Policy diffusion_policy_from_model(
    std::shared_ptr<const DiffusionModel> model) {
  const int d = model->out_dim / model->chunk_len;
  const int chunk = model->chunk_len;
  const bool markov = chunk == 1;
  Policy p(PolicyKind::toy_diffusion, d,
           std::make_shared<DiffusionImpl>(std::move(model)));
  p.set_deterministic(false);
  p.set_chunk_len(chunk);
  p.set_markovian(markov);
  return p;
}

DiffusionTrainResult toy_diffusion_train(const simkit::Dataset& data,
                                         const DiffusionConfig& cfg, Rng& rng) {
  // Chunked pairs: condition on the re-plan state, predict the next
  // chunk_len actions stacked.
  long m = 0;
  for (const auto& tr : data.trajectories)
    m += (tr.horizon() / cfg.chunk_len);
  if (m == 0) throw std::invalid_argument("toy_diffusion_train: empty dataset");
  const int d = data.trajectories.front().dim();
  Mat X(d, m), U(d * cfg.chunk_len, m);
  long col = 0;
  for (const auto& tr : data.trajectories) {
    for (int t0 = 0; t0 + cfg.chunk_len <= tr.horizon(); t0 += cfg.chunk_len) {
      X.col(col) = tr.states.col(t0);
      for (int j = 0; j < cfg.chunk_len; ++j)
        U.col(col).segment(j * d, d) = tr.inputs.col(t0 + j);
      ++col;
    }
  }
  return toy_diffusion_train_xy(X.leftCols(col), U.leftCols(col), cfg, rng);
}

}  // namespace ilbench::policies
