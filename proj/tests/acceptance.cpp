// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Every threshold is pinned here; nothing is calibrated at runtime.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "ilbench/presets.hpp"
#include "ilbench/serialize.hpp"
#include "ilbench/simkit.hpp"

using namespace ilbench;

namespace {

int g_failures = 0;

void report(int idx, const std::string& name, bool pass,
            const std::string& detail, double seconds) {
  std::printf("%-4s criterion %2d  %-46s [%6.1fs]  %s\n",
              pass ? "PASS" : "FAIL", idx, name.c_str(), seconds,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void run(int idx, const std::string& name,
         const std::function<bool(std::string&)>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool pass = false;
  try {
    pass = fn(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  report(idx, name, pass, detail, secs);
}

instances::StableInstance default_stable(int i, int omega, std::uint64_t gseed) {
  Rng rng(gseed);
  funclass::SmoothFunction g = funclass::sample_hard_function(2, 2, 0.5, rng);
  return instances::make_stable_instance(std::move(g), i, omega, 0.25, 0.1,
                                         0.01);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

// --------------------------------------------------------------------------

bool c1_pair_spectra(std::string& detail) {
  const auto p = matkit::challenging_pair(0.25);
  const double r1 = matkit::spectral_radius(Mat(p.A1));
  const double r2 = matkit::spectral_radius(Mat(p.A2));
  const double c1 = matkit::spectral_radius(Mat(p.A1 + p.K1));
  const double c2 = matkit::spectral_radius(Mat(p.A2 + p.K2));
  detail = "radii " + fmt(r1) + ", " + fmt(r2) + ", " + fmt(c1) + ", " + fmt(c2);
  return std::abs(r1 - 0.875) <= 1e-9 && std::abs(r2 - 0.9375) <= 1e-9 &&
         std::abs(c1 - 0.5) <= 1e-9 && std::abs(c2 - 0.5) <= 1e-9;
}

bool c2_cross_destabilization(std::string& detail) {
  Rng rng(2024);
  int checked = 0;
  for (double mu : {0.125, 0.25}) {
    const auto p = matkit::challenging_pair(mu);
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::Matrix2d Khat;
      Khat << rng.uniform(-3.0, 3.0), -p.c_mu, rng.uniform(-3.0, 3.0), 0.0;
      for (int H = 0; H <= 30; ++H) {
        if (matkit::cross_instability(p, Khat, H) <
            std::pow(1.0 + mu / 4.0, H) * (1.0 - 1e-12)) {
          detail = "violated at mu=" + fmt(mu) + " H=" + std::to_string(H);
          return false;
        }
        ++checked;
      }
    }
  }
  detail = std::to_string(checked) + " gain/horizon pairs above the envelope";
  return true;
}

bool c3_expert_cost_vanishes(std::string& detail) {
  const auto inst = default_stable(1, 1, 41);
  const auto sys = simkit::as_system(inst);
  const auto expert = policies::expert_policy(inst);
  Rng rng(7);
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    Rng trng = rng.derive(trial);
    const auto init = sys.sample_init(trng);
    const auto tr = simkit::rollout(expert, sys, init, 32, trng.next_u64());
    worst = std::max(worst, simkit::traj_cost(sys, tr));
  }
  detail = "max trajectory cost " + fmt(worst) + " over 10^4 rollouts";
  return worst <= 1e-12;
}

bool c4_compounding_gap(std::string& detail) {
  const auto inst = default_stable(1, 1, 41);
  const auto sys = simkit::as_system(inst);
  Rng drng(11);
  const auto data = simkit::sample_dataset(sys, 256, 6, drng);

  auto ratio_for = [&](policies::Completion mode) {
    policies::BCOptions opts;
    opts.completion = mode;
    const auto policy = policies::bc_learn(data, inst, opts);
    Rng r1(21), r2(22);
    const auto cost = simkit::cost_risk(policy, sys, 32, 512, r1);
    const auto el2 = simkit::expert_l2_risk(policy, sys, 32, 512, r2);
    return el2.value > 0.0 ? cost.value / el2.value : 0.0;
  };
  const double adversarial = ratio_for(policies::Completion::adversarial);
  const double oracle = ratio_for(policies::Completion::assume_i);
  detail = "cost/expert ratio: adversarial " + fmt(adversarial) + ", oracle " +
           fmt(oracle);
  return adversarial >= 20.0 && oracle <= 5.0;
}

bool c5_regression_rate(std::string& detail) {
  Rng rng(3);
  const auto sweep = funclass::rate_sweep(
      2, 2, {64, 128, 256, 512, 1024, 2048, 4096}, 10, rng);
  detail = "log-log slope " + fmt(sweep.slope);
  return !sweep.skipped && sweep.slope >= -1.35 && sweep.slope <= -0.65;
}

bool c6_gambler_laws(std::string& detail) {
  instances::GamblerSystem sys{1.5, 1, 0.01};
  Rng rng(103);
  const int runs = 100000;
  const auto curves = simkit::gambler_curves(
      policies::gamblers_ruin_policy(1.5), sys, 10, runs, rng);
  double worst_sigma = 0.0;
  for (int t = 1; t <= 10; ++t) {
    const double p = std::pow(2.0, -t);
    const double se_p = std::sqrt(p * (1 - p) / runs);
    worst_sigma = std::max(
        worst_sigma, std::abs(curves.p_nonzero[t - 1] - p) / se_p);
    const double clip = p * std::min(1.0, std::pow(3.0, t) * 0.01);
    const double se_c = std::max(curves.se_clip[t - 1], 1e-12);
    worst_sigma =
        std::max(worst_sigma, std::abs(curves.e_clip[t - 1] - clip) / se_c);
  }
  detail = "worst deviation " + fmt(worst_sigma) + " standard errors";
  return worst_sigma <= 3.0;
}

bool c7_concentric(std::string& detail) {
  Rng rng(37);
  for (double rho : {1.25, 1.5, 2.0}) {
    const auto policy = policies::concentric_policy(rho);
    for (int trial = 0; trial < 1000; ++trial) {
      const int xi = rng.coin() ? 1 : -1;
      instances::GamblerSystem sys{rho, xi, 0.0};
      double x = rng.uniform(-10.0, 10.0);
      const double x1 = x;
      double peak = std::abs(x);
      Rng rr(1);
      auto actor = policy.make_actor();
      for (int t = 1; t <= 8; ++t) {
        Vec xv = Vec::Constant(1, x);
        x = instances::gambler_step(sys, x, actor->act(&xv, t, rr)[0]);
        peak = std::max(peak, std::abs(x));
        if (t >= 3 && x != 0.0) {
          detail = "nonzero state past step three at rho=" + fmt(rho);
          return false;
        }
      }
      if (peak > std::pow(2.0 * rho, 2) * std::abs(x1) * (1.0 + 1e-12)) {
        detail = "overshoot beyond (2 rho)^2 |x1| at rho=" + fmt(rho);
        return false;
      }
    }
  }
  detail = "zeroed by t=3 with bounded overshoot, 3000 runs";
  return true;
}

bool c8_switching(std::string& detail) {
  Rng rng(43);
  const auto policy = policies::switching_policy(1.5);
  for (int trial = 0; trial < 1000; ++trial) {
    const int xi = rng.coin() ? 1 : -1;
    instances::GamblerSystem sys{1.5, xi, 0.0};
    double x = rng.uniform(-10.0, 10.0);
    Rng rr(1);
    auto actor = policy.make_actor();
    for (int t = 1; t <= 3; ++t) {
      Vec xv = Vec::Constant(1, x);
      x = instances::gambler_step(sys, x, actor->act(&xv, t, rr)[0]);
    }
    if (x != 0.0) {
      detail = "x_3 != 0";
      return false;
    }
  }
  detail = "x_3 == 0 exactly for both signs, 1000 starts";
  return true;
}

bool c9_orthogonal_compounding(std::string& detail) {
  Rng r1(97), r2(101);
  const auto high = simkit::orthogonal_compounding_mc(
      64, 1.5, 8, simkit::greedy_cancel_controller(1.5), 10000, r1);
  const auto low = simkit::orthogonal_compounding_mc(
      1, 1.5, 8, simkit::greedy_cancel_controller(1.5), 10000, r2);
  detail = "frequency d=64: " + fmt(high.frequency) +
           ", d=1: " + fmt(low.frequency);
  return high.frequency >= 0.77 && low.frequency <= 0.05;
}

bool c10_phenomenology(std::string& detail) {
  const presets::json cfg = presets::json::object();
  const auto result = presets::figure1_run(cfg, 3);

  auto worst = [&](const std::string& pol, int H) {
    return std::max(presets::row_value(result, "stable_i1", pol, H, "e1_max"),
                    presets::row_value(result, "stable_i2", pol, H, "e1_max"));
  };
  // (a) validation loss falls while the rollout cost grows with horizon.
  double val_first = -1.0, val_last = -1.0;
  for (const auto& r : result.at("rows")) {
    if (r.at("policy_kind") == "mlp" && r.at("metric") == "val_loss") {
      if (val_first < 0.0) val_first = r.at("value").get<double>();
      val_last = r.at("value").get<double>();
    }
  }
  const double mlp4 = worst("mlp", 4), mlp12 = worst("mlp", 12),
               mlp32 = worst("mlp", 32);
  const bool a_ok =
      val_first > 0.0 && val_last < val_first && mlp32 >= 4.0 * mlp4;
  // (b) random noise stays flat beyond burn-in and below the net at H = 32.
  const double noise12 = worst("random_noise", 12),
               noise32 = worst("random_noise", 32);
  const bool b_ok = noise32 <= 2.0 * noise12 && noise32 < mlp32;
  // (c) chunking strictly reduces the rollout cost at H = 32.
  const double bc32 = worst("bc", 32);
  const bool c_ok = worst("chunk4", 32) < bc32 && worst("chunk8", 32) < bc32;

  detail = "val " + fmt(val_first) + "->" + fmt(val_last) + "; mlp " +
           fmt(mlp4) + "/" + fmt(mlp12) + "/" + fmt(mlp32) + "; noise " +
           fmt(noise12) + "/" + fmt(noise32) + "; bc " + fmt(bc32) +
           "; chunk4 " + fmt(worst("chunk4", 32)) + "; chunk8 " +
           fmt(worst("chunk8", 32));
  (void)mlp12;
  return a_ok && b_ok && c_ok;
}

bool c11_eiiss_suite(std::string& detail) {
  Rng r1(59);
  auto identity_step = [](const Vec&, const Vec& u, int) { return u; };
  const auto ident = simkit::eiiss_check(identity_step, 3, 1.0, 0.0, 12, 2000, r1);

  const auto inst = default_stable(1, 1, 41);
  Rng r2(61), r3(67);
  auto open_step = [&inst](const Vec& x, const Vec& u, int) {
    return inst.step(x, u);
  };
  // Frozen calibrated constants: open (8, 0.97), closed (8, 0.75).
  const auto open = simkit::eiiss_check(open_step, 4, 8.0, 0.97, 20, 10000, r2);
  auto closed_step = [&inst](const Vec& x, const Vec& u, int) {
    return inst.step(x, inst.expert_action(x) + u);
  };
  const auto closed = simkit::eiiss_check(closed_step, 4, 8.0, 0.75, 20, 10000, r3);

  Rng r4(71);
  Mat A = 1.1 * Mat::Identity(3, 3);
  auto bad_step = [&A](const Vec& x, const Vec& u, int) { return Vec(A * x + u); };
  const auto bad = simkit::eiiss_check(bad_step, 3, 1.0, 0.9, 30, 500, r4);

  detail = "ratios: identity " + fmt(ident.max_ratio) + ", open " +
           fmt(open.max_ratio) + ", closed " + fmt(closed.max_ratio) +
           ", unstable " + fmt(bad.max_ratio);
  return ident.pass && open.pass && closed.pass && !bad.pass;
}

bool c12_determinism(std::string& detail) {
  const presets::json cfg = presets::json::object();
  const auto a = presets::figure1_run(cfg, 3);
  const auto b = presets::figure1_run(cfg, 3);
  const std::string ha = a.dump();
  const std::string hb = b.dump();
  detail = "double-run payloads " +
           std::string(ha == hb ? "identical" : "DIFFER") + " (" +
           std::to_string(ha.size()) + " bytes)";
  return ha == hb;
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  run(1, "challenging-pair spectra (exact)", c1_pair_spectra);
  run(2, "cross-destabilization rate envelope", c2_cross_destabilization);
  run(3, "expert trajectory cost vanishes", c3_expert_cost_vanishes);
  run(4, "compounding gap: adversarial vs oracle gain", c4_compounding_gap);
  run(5, "nonparametric regression rate", c5_regression_rate);
  run(6, "gambler's-ruin laws", c6_gambler_laws);
  run(7, "concentric stabilization (exact)", c7_concentric);
  run(8, "action switching (exact)", c8_switching);
  run(9, "orthogonal compounding frequencies", c9_orthogonal_compounding);
  run(10, "learning-curve phenomenology", c10_phenomenology);
  run(11, "incremental-stability suite", c11_eiiss_suite);
  run(12, "bit-exact determinism of the benchmark preset", c12_determinism);

  if (g_failures == 0) {
    std::printf("acceptance: all 12 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criteria FAILED\n", g_failures);
  return 1;
}
