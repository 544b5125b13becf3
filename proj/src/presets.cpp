#include "ilbench/presets.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ilbench/simkit.hpp"

namespace ilbench::presets {

namespace {

json make_row(const std::string& inst, const std::string& pol, long n, int H,
              const std::string& metric, double value, double se,
              std::uint64_t seed, const std::string& status = "ok") {
  json r;
  r["instance_id"] = inst;
  r["policy_kind"] = pol;
  r["n"] = n;
  r["H"] = H;
  r["metric"] = metric;
  r["value"] = value;
  r["stderr"] = se;
  r["seed"] = seed;
  r["status"] = status;
  return r;
}

/// Mean over shared inits of max_{t <= H} |<e1, x_t>| for every H in the
/// grid, one rollout per init (prefix maxima reuse the longest rollout).
void e1_curve_rows(json& rows, const simkit::System& sys,
                   const policies::Policy& policy, const std::string& name,
                   const std::vector<int>& h_grid, int n_inits,
                   std::uint64_t seed, long n_label) {
  const int h_max = h_grid.back();
  std::vector<std::vector<double>> per_h(h_grid.size());
  Rng rng(seed);
  for (int i = 0; i < n_inits; ++i) {
    Rng trng = rng.derive(i);
    const auto init = sys.sample_init(trng);
    const auto tr = simkit::rollout(policy, sys, init, h_max, trng.next_u64());
    double running = 0.0;
    size_t gi = 0;
    for (int t = 1; t <= h_max; ++t) {
      running = std::max(running, std::abs(tr.states.col(t - 1)[0]));
      while (gi < h_grid.size() && h_grid[gi] == t) {
        per_h[gi].push_back(running);
        ++gi;
      }
    }
  }
  for (size_t gi = 0; gi < h_grid.size(); ++gi) {
    double s = 0, ss = 0;
    for (double v : per_h[gi]) {
      s += v;
      ss += v * v;
    }
    const double mean = s / n_inits;
    const double se = std::sqrt(
        std::max(0.0, ss / n_inits - mean * mean) / std::max(1, n_inits - 1));
    rows.push_back(
        make_row(sys.id, name, n_label, h_grid[gi], "e1_max", mean, se, seed));
  }
}

json __f1_impl(const json& cfg, std::uint64_t seed) {
  // Stable construction tuned so learner-scale errors clear the random-noise
  // baseline within H = 32 at desk scale: mu = 1/2 (fastest guaranteed
  // cross-index growth), omega = -1 and a large tau (amplifies the step-one
  // error), and a first-order target class (hardest regression). Policies
  // are trained once on the shared demonstrations -- which carry no
  // information about the index -- and rolled out under both indices; the
  // reported curves per index make the worst case visible.
  const json icfg = cfg.value("figure1", json::object());
  const int k = icfg.value("k", 2);
  const int s = icfg.value("s", 1);
  const double eps = icfg.value("eps", 0.5);
  const double mu = icfg.value("mu", 0.5);
  const double tau = icfg.value("tau", 0.9);
  const double Delta = icfg.value("Delta", 0.01);
  const int omega = icfg.value("omega", -1);

  Rng grng = Rng(seed).derive(0xf00d);
  funclass::SmoothFunction g = funclass::sample_hard_function(k, s, eps, grng);
  const auto inst1 = instances::make_stable_instance(g, 1, omega, mu, tau, Delta);
  const auto inst2 = instances::make_stable_instance(g, 2, omega, mu, tau, Delta);
  const simkit::System sys1 = simkit::as_system(inst1);
  simkit::System sys2 = simkit::as_system(inst2);
  simkit::System sys1n = sys1;
  sys1n.id = "stable_i1";
  sys2.id = "stable_i2";

  const int n_data = icfg.value("n", 1024);
  const int h_data = icfg.value("H_data", 4);
  Rng drng = Rng(seed).derive(0xda7a);
  const simkit::Dataset data = simkit::sample_dataset(sys1, n_data, h_data, drng);

  policies::MlpConfig mcfg;
  mcfg.iterations = icfg.value("mlp_iterations", 800);
  mcfg.batch = 256;
  mcfg.weight_decay = icfg.value("mlp_weight_decay", 1e-3);
  Rng mrng = Rng(seed).derive(0x317);
  const auto mlp = policies::mlp_train(data, mcfg, mrng);

  policies::DiffusionConfig dcfg;
  dcfg.iterations = icfg.value("diffusion_iterations", 1200);
  Rng dr = Rng(seed).derive(0xd1f);
  const auto diffusion = policies::toy_diffusion_train(data, dcfg, dr);

  policies::BCOptions bopts;  // least-norm completion
  const policies::Policy bc = policies::bc_learn(data, inst1, bopts);
  const policies::Policy chunk4 = policies::chunk_wrap(bc, inst1, 4);
  const policies::Policy chunk8 = policies::chunk_wrap(bc, inst1, 8);
  const policies::Policy noise =
      policies::random_noise_policy(inst1.d(), 1.0 / std::sqrt(6.0));

  const std::vector<int> h_grid = {2, 4, 8, 12, 20, 26, 32};
  const int n_inits = 80;  // 16 initial conditions x 5 evaluation seeds
  json rows = json::array();
  const std::vector<std::pair<std::string, const policies::Policy*>> zoo = {
      {"mlp", &mlp.policy},          {"random_noise", &noise},
      {"toy_diffusion", &diffusion.policy}, {"bc", &bc},
      {"chunk4", &chunk4},           {"chunk8", &chunk8}};
  std::uint64_t tag = 0xa1;
  for (const auto& [name, pol] : zoo) {
    // Same init/noise seeds under both indices: only the dynamics differ.
    e1_curve_rows(rows, sys1n, *pol, name, h_grid, n_inits, seed ^ tag, n_data);
    e1_curve_rows(rows, sys2, *pol, name, h_grid, n_inits, seed ^ tag, n_data);
    ++tag;
  }

  for (const auto& [name, pol] : zoo) {
    Rng er = Rng(seed ^ 0xb0).derive(std::hash<std::string>{}(name));
    const auto est = simkit::cost_risk(*pol, sys1, 32, n_inits, er);
    rows.push_back(make_row(sys1n.id, name, n_data, 32, "cost_risk", est.value,
                            est.stderr_, seed));
  }

  for (size_t i = 0; i < mlp.trace.iteration.size(); ++i)
    rows.push_back(make_row(sys1n.id, "mlp", n_data, mlp.trace.iteration[i],
                            "val_loss", mlp.trace.val_loss[i], 0.0, seed));
  for (size_t i = 0; i < diffusion.trace.iteration.size(); ++i)
    rows.push_back(make_row(sys1n.id, "toy_diffusion", n_data,
                            diffusion.trace.iteration[i], "val_loss",
                            diffusion.trace.val_loss[i], 0.0, seed));

  json out;
  out["rows"] = std::move(rows);
  return out;
}

json __f2_impl(const json& cfg, std::uint64_t seed) {
  // Training-budget sweep: validation loss falls while the rollout cost at
  // H = 32 stays large -- the checkpoint-trace phenomenology.
  const json icfg = cfg.value("figure2", json::object());
  Rng grng = Rng(seed).derive(0xf00d);
  funclass::SmoothFunction g = funclass::sample_hard_function(2, 2, 0.5, grng);
  const auto inst = instances::make_stable_instance(
      std::move(g), 1, 1, icfg.value("mu", 0.5), 0.1, 0.01);
  const simkit::System sys = simkit::as_system(inst);
  Rng drng = Rng(seed).derive(0xda7a);
  const simkit::Dataset data = simkit::sample_dataset(sys, 512, 4, drng);

  json rows = json::array();
  for (int budget : {100, 400, 1600}) {
    policies::MlpConfig mcfg;
    mcfg.iterations = budget;
    mcfg.batch = 128;
    Rng mrng = Rng(seed).derive(0x317);
    const auto result = policies::mlp_train(data, mcfg, mrng);
    rows.push_back(make_row(sys.id, "mlp", budget, 32, "val_loss",
                            result.trace.val_loss.back(), 0.0, seed));
    e1_curve_rows(rows, sys, result.policy,
                  "mlp_budget" + std::to_string(budget), {32}, 32,
                  seed ^ static_cast<std::uint64_t>(budget), budget);
  }
  json out;
  out["rows"] = std::move(rows);
  return out;
}

json __rates_impl(std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<int> grid = {64, 128, 256, 512, 1024, 2048, 4096};
  const auto sweep = funclass::rate_sweep(2, 2, grid, 10, rng);
  json rows = json::array();
  for (size_t i = 0; i < grid.size(); ++i)
    rows.push_back(make_row("regression_k2_s2", "local_poly", grid[i], 0,
                            "l2_risk", sweep.mean_risk[i], 0.0, seed));
  rows.push_back(make_row("regression_k2_s2", "local_poly", 0, 0, "slope",
                          sweep.slope, 0.0, seed,
                          sweep.skipped ? "skipped" : "ok"));
  json out;
  out["rows"] = std::move(rows);
  return out;
}

json __unstable_impl(std::uint64_t seed) {
  json rows = json::array();
  Rng grng = Rng(seed).derive(0xf00d);
  funclass::SmoothFunction g = funclass::sample_hard_function(2, 2, 0.5, grng);

  for (auto variant : {instances::UnstableVariant::time_varying,
                       instances::UnstableVariant::time_invariant}) {
    const auto inst =
        instances::make_unstable_instance(g, 1.5, 6, 2, variant, seed);
    const simkit::System sys = simkit::as_system(inst);
    Rng er = Rng(seed).derive(
        variant == instances::UnstableVariant::time_varying ? 1u : 2u);
    const auto expert_cost =
        simkit::cost_risk(policies::expert_policy(inst), sys, 8, 128, er);
    rows.push_back(make_row(sys.id, "expert", 128, 8, "cost_risk",
                            expert_cost.value, expert_cost.stderr_, seed));
    Rng zr = Rng(seed).derive(3);
    const auto zero_cost =
        simkit::cost_risk(policies::zero_policy(6), sys, 8, 128, zr);
    rows.push_back(make_row(sys.id, "zero", 128, 8, "cost_risk",
                            zero_cost.value, zero_cost.stderr_, seed));
  }

  Rng mc(seed);
  const auto freq = simkit::orthogonal_compounding_mc(
      64, 1.5, 8, simkit::greedy_cancel_controller(1.5), 2000, mc);
  rows.push_back(make_row("rotation_mc_d64", "greedy_cancel", 2000, 8,
                          "growth_frequency", freq.frequency, freq.stderr_,
                          seed));
  json out;
  out["rows"] = std::move(rows);
  return out;
}

json __gambler_impl(std::uint64_t seed) {
  instances::GamblerSystem sys{1.5, 1, 0.01};
  Rng rng(seed);
  const auto curves = simkit::gambler_curves(policies::gamblers_ruin_policy(1.5),
                                             sys, 10, 100000, rng);
  json rows = json::array();
  for (size_t i = 0; i < curves.t.size(); ++i) {
    const int t = static_cast<int>(curves.t[i]);
    rows.push_back(make_row("gambler", "gamblers_ruin", 100000, t, "p_nonzero",
                            curves.p_nonzero[i], curves.se_p[i], seed));
    rows.push_back(make_row("gambler", "gamblers_ruin", 100000, t, "e_clip",
                            curves.e_clip[i], curves.se_clip[i], seed));
    rows.push_back(make_row("gambler", "gamblers_ruin", 100000, t, "e_abs",
                            curves.e_abs[i], curves.se_abs[i], seed));
  }
  json out;
  out["rows"] = std::move(rows);
  return out;
}


}  // namespace

json figure1_run(const json& cfg, std::uint64_t seed) { return __f1_impl(cfg, seed); }
json figure2_run(const json& cfg, std::uint64_t seed) { return __f2_impl(cfg, seed); }
json rates_run(std::uint64_t seed) { return __rates_impl(seed); }
json unstable_run(std::uint64_t seed) { return __unstable_impl(seed); }
json gambler_run(std::uint64_t seed) { return __gambler_impl(seed); }

double row_value(const json& result, const std::string& instance_id,
                 const std::string& policy_kind, int H,
                 const std::string& metric) {
  for (const auto& r : result.at("rows")) {
    if (r.at("instance_id").get<std::string>() == instance_id &&
        r.at("policy_kind").get<std::string>() == policy_kind &&
        r.at("H").get<int>() == H && r.at("metric").get<std::string>() == metric)
      return r.at("value").get<double>();
  }
  throw std::out_of_range("row_value: no such row");
}

}  // namespace ilbench::presets
