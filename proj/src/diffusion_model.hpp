#pragma once

#include <cmath>
#include <vector>

#include "ilbench/common.hpp"

namespace ilbench::policies {

/// DDPM-style conditional denoiser over (possibly chunked) actions: a small
/// tanh trunk with per-layer FiLM modulation computed from the sinusoidal
/// time embedding concatenated with the (standardized) state.
struct DiffusionModel {
  int out_dim = 1;  // action (or stacked chunk) dimension
  int state_dim = 1;
  int hidden = 16;
  int layers = 3;
  int time_dim = 256;
  int steps = 16;
  int chunk_len = 1;

  Mat W_in;  // hidden x out_dim
  Vec b_in;
  std::vector<Mat> W_h;  // (layers-1) of hidden x hidden
  std::vector<Vec> b_h;
  Mat W_out;  // out_dim x hidden
  Vec b_out;
  Mat W_film;  // (2 * hidden * layers) x (time_dim + state_dim)
  Vec b_film;

  Vec x_mu, x_sd, u_mu, u_sd;
  Vec betas, alphas, alpha_bars;

  Vec time_embedding(int t) const {
    Vec e(time_dim);
    const int half = time_dim / 2;
    for (int i = 0; i < half; ++i) {
      const double w = std::exp(-std::log(10000.0) * i / half);
      e[2 * i] = std::sin(t * w);
      e[2 * i + 1] = std::cos(t * w);
    }
    return e;
  }

  /// eps_hat(u_noisy, t, x), all in standardized coordinates.
  Vec predict_eps(const Vec& u, int t, const Vec& xs) const;
};

}  // namespace ilbench::policies
