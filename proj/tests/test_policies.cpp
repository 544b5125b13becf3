#include <doctest.h>

#include <cmath>

#include "ilbench/simkit.hpp"

using namespace ilbench;
using namespace ilbench::policies;
using simkit::Dataset;
using simkit::System;

namespace {

instances::StableInstance default_stable(int i = 1, int omega = 1,
                                         Rng rng = Rng(41)) {
  funclass::SmoothFunction g = funclass::sample_hard_function(2, 2, 0.5, rng);
  return instances::make_stable_instance(std::move(g), i, omega, 0.25, 0.1,
                                         0.01);
}

}  // namespace

TEST_CASE("bc_learn: gain recovery, risk bound, empty-data degradation") {
  const auto inst = default_stable(1, 1);
  const System sys = simkit::as_system(inst);
  Rng rng(7);
  const Dataset data = simkit::sample_dataset(sys, 4096, 6, rng);

  BCOptions opts;
  opts.completion = Completion::least_norm;
  const Policy policy = bc_learn(data, inst, opts);
  const auto fit = policy.bc_fit();
  REQUIRE(fit);
  CHECK(fit->n_z0 + fit->n_z1 == 4096);
  CHECK(fit->n_z0 > 1800);

  // K_hat e2 recovers the shared second column (-c_mu, 0, 0, 0).
  Vec e2 = Vec::Zero(4);
  e2[1] = 1.0;
  Vec expected = Vec::Zero(4);
  expected[0] = -inst.pair().c_mu;
  CHECK((fit->K_hat * e2 - expected).norm() <= 1e-6);
  CHECK(fit->K_hat.col(0).norm() == 0.0);  // least-norm completion
  CHECK(fit->z1_residual <= 1e-8);

  // Acl_hat matches the true closed loop on the identified columns.
  const Mat acl_true = inst.Abar() + inst.Kbar();
  CHECK((fit->Acl_hat - acl_true).norm() <= 1e-6);

  // Expert-distribution risk is at the regression rate.
  Rng rrng(11);
  const auto risk = simkit::expert_l2_risk(policy, sys, 6, 400, rrng);
  CHECK(risk.value <=
        10.0 * inst.tau() * std::pow(4096.0, -1.0) + 10.0 * fit->z1_residual);

  // Empty dataset: zero policy with an explicit degraded status.
  const Policy empty = bc_learn(Dataset{}, inst, opts);
  CHECK(empty.status().find("degraded") != std::string::npos);
  Rng arng(13);
  CHECK(empty.sample_action(Vec(Vec::Ones(4)), arng).norm() == 0.0);
}

TEST_CASE("bc_learn: completion modes fill column one differently") {
  const auto inst = default_stable(1, 1);
  const System sys = simkit::as_system(inst);
  Rng rng(17);
  const Dataset data = simkit::sample_dataset(sys, 512, 6, rng);
  for (auto mode : {Completion::least_norm, Completion::assume_i,
                    Completion::adversarial}) {
    BCOptions opts;
    opts.completion = mode;
    const auto fit = bc_learn(data, inst, opts).bc_fit();
    if (mode == Completion::least_norm)
      CHECK(fit->K_hat.col(0).norm() == 0.0);
    if (mode == Completion::assume_i)
      CHECK((fit->K_hat.col(0) - inst.Kbar_of(1).col(0)).norm() == 0.0);
    if (mode == Completion::adversarial)
      CHECK((fit->K_hat.col(0) - inst.Kbar_of(2).col(0)).norm() == 0.0);
  }
}

TEST_CASE("gaussian_wrap: zero noise, mean recovery, shared-noise coupling") {
  const auto inst = default_stable();
  const Policy expert = expert_policy(inst);
  Rng rng(19);
  const Vec x = rng.uniform_ball(4, 0.5);

  SUBCASE("sigma = 0 reproduces the base exactly") {
    const Policy p = gaussian_wrap(expert, 0.0);
    Rng r1(3), r2(3);
    CHECK((p.sample_action(x, r1) - expert.sample_action(x, r2)).norm() == 0.0);
  }
  SUBCASE("empirical mean approaches the base action") {
    const double sigma = 0.2;
    const Policy p = gaussian_wrap(expert, sigma);
    Rng r(23);
    Vec acc = Vec::Zero(4);
    const int n = 10000;
    for (int i = 0; i < n; ++i) acc += p.sample_action(x, r);
    acc /= n;
    Rng r2(5);
    const Vec base = expert.sample_action(x, r2);
    CHECK((acc - base).norm() <= 3.0 * sigma * 2.0 / std::sqrt(double(n)) + 1e-9);
  }
  SUBCASE("shared noise cancels exactly in differences") {
    const Policy p = gaussian_wrap(expert, 0.3);
    Rng rx(29);
    const Vec xa = rx.uniform_ball(4, 0.5);
    const Vec xb = rx.uniform_ball(4, 0.5);
    Rng rmean(1);
    const Vec mean_gap = expert.sample_action(xa, rmean) -
                         expert.sample_action(xb, rmean);
    for (std::uint64_t seed : {1ULL, 7ULL, 99ULL}) {
      Rng ra(seed), rb(seed);
      const Vec diff = p.sample_action(xa, ra) - p.sample_action(xb, rb);
      CHECK((diff - mean_gap).norm() == 0.0);
    }
  }
}

TEST_CASE("gamblers ruin policy: zeroing probability") {
  instances::GamblerSystem sys{1.5, 1, 0.01};
  const Policy p = gamblers_ruin_policy(1.5);
  Rng rng(31);
  int nonzero_t3 = 0;
  const int runs = 20000;
  for (int i = 0; i < runs; ++i) {
    Rng r = rng.derive(i);
    auto actor = p.make_actor();
    double x = sys.eps0;
    for (int t = 1; t <= 3; ++t) {
      Vec xv = Vec::Constant(1, x);
      x = instances::gambler_step(sys, x, actor->act(&xv, t, r)[0]);
    }
    if (x != 0.0) ++nonzero_t3;
  }
  const double expect = 1.0 / 8.0;
  CHECK(std::abs(nonzero_t3 / double(runs) - expect) <=
        3.0 * std::sqrt(expect * (1 - expect) / runs));
}

TEST_CASE("concentric policy: interval index, trace, stabilization bound") {
  const double rho = 1.5;
  const Policy p = concentric_policy(rho);
  CHECK(concentric_interval_index(rho, 1.0) == 1);
  CHECK(concentric_interval_index(rho, 3.0) == 0);

  SUBCASE("hand trace at rho = 1.5, x1 = 1, xi = -1") {
    instances::GamblerSystem sys{rho, -1, 1.0};
    Rng r(1);
    auto actor = p.make_actor();
    Vec xv = Vec::Constant(1, 1.0);
    double x2 = instances::gambler_step(sys, 1.0, actor->act(&xv, 1, r)[0]);
    CHECK(x2 == doctest::Approx(-3.0));
    xv[0] = x2;
    double x3 = instances::gambler_step(sys, x2, actor->act(&xv, 2, r)[0]);
    CHECK(x3 == 0.0);
  }
  SUBCASE("zeros within three steps, bounded overshoot, all rho and xi") {
    Rng rng(37);
    for (double r0 : {1.25, 1.5, 2.0}) {
      const Policy pol = concentric_policy(r0);
      for (int xi : {1, -1}) {
        instances::GamblerSystem sys{r0, xi, 0.0};
        for (int trial = 0; trial < 1000; ++trial) {
          double x = rng.uniform(-10.0, 10.0);
          const double x1 = x;
          double peak = std::abs(x);
          Rng rr(1);
          auto actor = pol.make_actor();
          for (int t = 1; t <= 8; ++t) {
            Vec xv = Vec::Constant(1, x);
            x = instances::gambler_step(sys, x, actor->act(&xv, t, rr)[0]);
            peak = std::max(peak, std::abs(x));
            if (t >= 3) CHECK(x == 0.0);
          }
          CHECK(peak <= std::pow(2.0 * r0, 2) * std::abs(x1) * (1 + 1e-12));
        }
      }
    }
  }
  SUBCASE("scale covariance across one interval") {
    Rng rng(41);
    const double q = std::pow(2.0 * rho, -2.0);
    for (int trial = 0; trial < 200; ++trial) {
      const double x = rng.uniform(0.2, 5.0);
      Vec xv = Vec::Constant(1, x), xq = Vec::Constant(1, q * x);
      Rng r(1);
      auto a1 = p.make_actor();
      auto a2 = p.make_actor();
      const double ux = a1->act(&xv, 1, r)[0];
      const double uq = a2->act(&xq, 1, r)[0];
      CHECK(uq == doctest::Approx(-q * ux).epsilon(1e-12));
    }
  }
}

TEST_CASE("switching policy zeroes by t = 3; adaptive variant by t = 2") {
  const double rho = 1.7;
  SUBCASE("periodic sign alternation") {
    const Policy p = switching_policy(rho);
    CHECK(p.period() == 2);
    Rng rng(43);
    for (int xi : {1, -1}) {
      instances::GamblerSystem sys{rho, xi, 0.0};
      for (int trial = 0; trial < 200; ++trial) {
        double x = rng.uniform(-5.0, 5.0);
        Rng r(1);
        auto actor = p.make_actor();
        for (int t = 1; t <= 4; ++t) {
          Vec xv = Vec::Constant(1, x);
          x = instances::gambler_step(sys, x, actor->act(&xv, t, r)[0]);
          if (t >= 2) CHECK(x == 0.0);  // x_3 = 0 onward
        }
      }
    }
  }
  SUBCASE("history-dependent cancellation") {
    const Policy p = adaptive_cancel_policy();
    Rng rng(47);
    for (int xi : {1, -1}) {
      instances::GamblerSystem sys{rho, xi, 0.0};
      for (int trial = 0; trial < 200; ++trial) {
        double x = rng.uniform(0.1, 5.0) * (rng.coin() ? 1 : -1);
        Rng r(1);
        auto actor = p.make_actor();
        for (int t = 1; t <= 5; ++t) {
          Vec xv = Vec::Constant(1, x);
          x = instances::gambler_step(sys, x, actor->act(&xv, t, r)[0]);
          // The identified gain x_2 / x_1 carries one rounding, so the
          // cancellation is exact only up to ulp scale.
          if (t >= 2) CHECK(std::abs(x) <= 1e-12);
        }
      }
    }
  }
}

TEST_CASE("chunking: identity at length one, open-loop enforcement, benefit") {
  const auto inst = default_stable(1, 1);
  const System sys = simkit::as_system(inst);
  Rng rng(53);
  const Dataset data = simkit::sample_dataset(sys, 512, 6, rng);
  BCOptions opts;
  opts.completion = Completion::adversarial;
  const Policy base = bc_learn(data, inst, opts);

  SUBCASE("chunk_len = 1 is bitwise the base policy") {
    const Policy c1 = chunk_wrap(base, inst, 1);
    Rng irng(59);
    for (int trial = 0; trial < 20; ++trial) {
      Rng trng = irng.derive(trial);
      const auto init = sys.sample_init(trng);
      const auto ta = simkit::rollout(base, sys, init, 16, 7);
      const auto tb = simkit::rollout(c1, sys, init, 16, 7);
      CHECK((ta.states - tb.states).norm() == 0.0);
      CHECK((ta.inputs - tb.inputs).norm() == 0.0);
    }
  }
  SUBCASE("mid-chunk actions never read the state") {
    const Policy c4 = chunk_wrap(base, inst, 4);
    auto actor = c4.make_actor();
    CHECK(actor->wants_state(1));
    CHECK_FALSE(actor->wants_state(2));
    CHECK_FALSE(actor->wants_state(4));
    CHECK(actor->wants_state(5));
    Rng r(1);
    Vec x = Vec::Zero(4);
    x[1] = 0.01;
    const Vec u1 = actor->act(&x, 1, r);
    // The remaining chunk actions are already determined.
    const Vec u2 = actor->act(nullptr, 2, r);
    const Vec u3 = actor->act(nullptr, 3, r);
    auto actor2 = c4.make_actor();
    (void)actor2->act(&x, 1, r);
    CHECK((actor2->act(nullptr, 2, r) - u2).norm() == 0.0);
    CHECK((actor2->act(nullptr, 3, r) - u3).norm() == 0.0);
    (void)u1;
  }
  SUBCASE("chunking strictly reduces the destabilized rollout cost") {
    Rng eval_rng(61);
    const Policy c4 = chunk_wrap(base, inst, 4);
    Rng ra = eval_rng.derive(1), rb = eval_rng.derive(1);
    const auto cost1 = simkit::cost_risk(base, sys, 32, 40, ra);
    const auto cost4 = simkit::cost_risk(c4, sys, 32, 40, rb);
    CHECK(cost4.value < cost1.value);
  }
}

TEST_CASE("tiny MLP: linear fit, gradient check, determinism, validation") {
  SUBCASE("linear-capacity net nails a linear target") {
    Rng rng(67);
    Mat W(2, 3);
    W << 0.3, -0.2, 0.5, 0.1, 0.7, -0.4;
    const int n = 512;
    Mat X(3, n), Y(2, n);
    for (int i = 0; i < n; ++i) {
      X.col(i) = rng.uniform_ball(3, 1.0);
      Y.col(i) = W * X.col(i);
    }
    MlpConfig cfg;
    cfg.hidden = {};  // single linear layer
    cfg.iterations = 3000;
    cfg.batch = 128;
    cfg.weight_decay = 0.0;
    cfg.lr = 2e-2;
    Rng trng(71);
    const auto result = mlp_train_xy(X, Y, cfg, trng);
    CHECK(result.trace.val_loss.back() <= 1e-4);
  }
  SUBCASE("backprop matches central differences") {
    Rng rng(73);
    TinyNet net = make_net(2, {3}, 1, rng);
    Mat X(2, 5), Y(1, 5);
    for (int i = 0; i < 5; ++i) {
      X.col(i) = rng.normal_vec(2);
      Y(0, i) = rng.normal();
    }
    std::vector<Mat> gW;
    std::vector<Vec> gb;
    mlp_loss_and_grad(net, X, Y, &gW, &gb);
    const double h = 1e-6;
    for (size_t l = 0; l < net.W.size(); ++l) {
      for (int r = 0; r < net.W[l].rows(); ++r)
        for (int c = 0; c < net.W[l].cols(); ++c) {
          TinyNet plus = net, minus = net;
          plus.W[l](r, c) += h;
          minus.W[l](r, c) -= h;
          const double fd = (mlp_loss_and_grad(plus, X, Y, nullptr, nullptr) -
                             mlp_loss_and_grad(minus, X, Y, nullptr, nullptr)) /
                            (2 * h);
          CHECK(gW[l](r, c) ==
                doctest::Approx(fd).epsilon(1e-5).scale(std::abs(fd) + 1.0));
        }
      for (int r = 0; r < net.b[l].size(); ++r) {
        TinyNet plus = net, minus = net;
        plus.b[l][r] += h;
        minus.b[l][r] -= h;
        const double fd = (mlp_loss_and_grad(plus, X, Y, nullptr, nullptr) -
                           mlp_loss_and_grad(minus, X, Y, nullptr, nullptr)) /
                          (2 * h);
        CHECK(gb[l][r] ==
              doctest::Approx(fd).epsilon(1e-5).scale(std::abs(fd) + 1.0));
      }
    }
  }
  SUBCASE("training is bitwise deterministic given (data, cfg, seed)") {
    const auto inst = default_stable();
    const System sys = simkit::as_system(inst);
    Rng drng(79);
    const Dataset data = simkit::sample_dataset(sys, 64, 4, drng);
    MlpConfig cfg;
    cfg.iterations = 50;
    cfg.batch = 32;
    Rng r1(83), r2(83);
    const auto a = mlp_train(data, cfg, r1);
    const auto b = mlp_train(data, cfg, r2);
    for (size_t l = 0; l < a.net.W.size(); ++l) {
      CHECK((a.net.W[l] - b.net.W[l]).norm() == 0.0);
      CHECK((a.net.b[l] - b.net.b[l]).norm() == 0.0);
    }
  }
  SUBCASE("validation loss improves on the construction dataset") {
    const auto inst = default_stable();
    const System sys = simkit::as_system(inst);
    Rng drng(89);
    const Dataset data = simkit::sample_dataset(sys, 512, 4, drng);
    MlpConfig cfg;
    cfg.iterations = 600;
    cfg.batch = 128;
    Rng trng(97);
    const auto result = mlp_train(data, cfg, trng);
    REQUIRE(result.trace.val_loss.size() >= 2);
    CHECK(result.trace.val_loss.back() < result.trace.val_loss.front());
  }
}

TEST_CASE("toy diffusion: bimodal recovery and deterministic-data spread") {
  SUBCASE("two-point mixture: both modes recovered with fair frequencies") {
    Rng rng(101);
    const int n = 1024;
    Mat X(1, n), U(1, n);
    for (int i = 0; i < n; ++i) {
      X(0, i) = rng.uniform(-0.05, 0.05);  // essentially one probed state
      U(0, i) = rng.coin() ? 0.8 : -0.8;
    }
    DiffusionConfig cfg;
    cfg.iterations = 1500;
    cfg.batch = 128;
    Rng trng(103);
    const auto result = toy_diffusion_train_xy(X, U, cfg, trng);
    Rng srng(107);
    int hi = 0, lo = 0, stray = 0;
    const int draws = 600;
    Vec probe = Vec::Zero(1);
    for (int i = 0; i < draws; ++i) {
      const Vec u = result.policy.sample_action(probe, srng);
      if (std::abs(u[0] - 0.8) < 0.4)
        ++hi;
      else if (std::abs(u[0] + 0.8) < 0.4)
        ++lo;
      else
        ++stray;
    }
    CHECK(stray <= draws / 10);
    CHECK(std::abs(hi / double(draws) - 0.5) <= 0.1);
    CHECK(std::abs(lo / double(draws) - 0.5) <= 0.1);
  }
  SUBCASE("deterministic conditional: sample spread at the residual scale") {
    Rng rng(109);
    const int n = 512;
    Mat X(2, n), U(1, n);
    for (int i = 0; i < n; ++i) {
      X.col(i) = rng.uniform_ball(2, 1.0);
      U(0, i) = 0.5;
    }
    DiffusionConfig cfg;
    cfg.iterations = 1200;
    cfg.batch = 128;
    Rng trng(113);
    const auto result = toy_diffusion_train_xy(X, U, cfg, trng);
    Rng srng(127);
    const Vec probe = X.col(0);
    double s1 = 0.0, s2 = 0.0;
    const int draws = 300;
    for (int i = 0; i < draws; ++i) {
      const double u = result.policy.sample_action(probe, srng)[0];
      s1 += u;
      s2 += u * u;
    }
    const double mean = s1 / draws;
    const double sd = std::sqrt(std::max(0.0, s2 / draws - mean * mean));
    CHECK(sd <= 3.0 * result.train_residual + 1e-6);
    CHECK(std::abs(mean - 0.5) <= 3.0 * result.train_residual + 0.05);
  }
}

TEST_CASE("anti-concentration estimates") {
  SUBCASE("deterministic policies report (1, 1)") {
    const auto inst = default_stable();
    const Policy p = expert_policy(inst);
    Rng rng(131);
    const auto rep = anti_concentration_estimate(
        p, CouplingKind::shared_noise, Vec(Vec::Zero(4)), Vec(Vec::Ones(4) * 0.1),
        400, rng);
    CHECK(rep.degenerate);
    CHECK(rep.alpha_hat == 1.0);
    CHECK(rep.p_hat == 1.0);
  }
  SUBCASE("gaussian policy achieves (1/sqrt 2, >= 1/12)") {
    const auto inst = default_stable();
    const Policy p = gaussian_wrap(expert_policy(inst), 0.2);
    Rng rng(137);
    Vec xa = Vec::Zero(4), xb = Vec::Zero(4);
    xb[1] = 0.05;
    const auto rep = anti_concentration_estimate(p, CouplingKind::independent,
                                                 xa, xb, 4000, rng);
    const double p_sqrt2 = rep.p_at(1.0 / std::sqrt(2.0));
    const double ci = 3.0 * std::sqrt(0.25 / 4000);
    CHECK(p_sqrt2 >= 1.0 / 12.0 - ci);
  }
  SUBCASE("gambler's ruin under the independent coupling is (1, >= 1/4)") {
    const Policy p = gamblers_ruin_policy(1.5);
    Rng rng(139);
    Vec xa = Vec::Constant(1, 0.7), xb = Vec::Constant(1, 0.4);
    const auto rep = anti_concentration_estimate(p, CouplingKind::independent,
                                                 xa, xb, 4000, rng);
    const double ci = 3.0 * std::sqrt(0.25 / 4000);
    CHECK(rep.p_at(1.0) >= 0.25 - ci);
  }
}

TEST_CASE("markovian policies ignore history") {
  const Policy p = gamblers_ruin_policy(1.3);
  Vec x = Vec::Constant(1, 0.5);
  Rng r1(7);
  const Vec direct = p.sample_action(x, r1);
  // Same (state, seed) after an unrelated prefix of activity elsewhere.
  auto actor = p.make_actor();
  Rng scratch(99);
  Vec other = Vec::Constant(1, -2.0);
  (void)actor->act(&other, 1, scratch);
  Rng r2(7);
  const Vec after = p.sample_action(x, r2);
  CHECK((direct - after).norm() == 0.0);
}
