// Command-line front end: build instances, generate expert data, train
// learners, evaluate risks, run verification checks, and sweep benchmark
// grids into CSV.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <atomic>
#include <mutex>
#include <optional>
#include <thread>
#include <sstream>
#include <vector>

#include "ilbench/matkit.hpp"
#include "ilbench/serialize.hpp"
#include "ilbench/presets.hpp"
#include "ilbench/simkit.hpp"

namespace fs = std::filesystem;
using namespace ilbench;
using serialize::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CliError : std::runtime_error {
  int code;
  CliError(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

fs::path resolve_out(const std::string& out) {
  const char* root = std::getenv("ILBENCH_OUT_ROOT");
  fs::path p = out.empty() ? fs::path(".") : fs::path(out);
  if (root != nullptr && p.is_relative()) p = fs::path(root) / p;
  return p;
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  try {
    return serialize::read_json_file(path);
  } catch (const std::exception& e) {
    throw CliError(kExitConfig, std::string("config: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Instance construction from config
// ---------------------------------------------------------------------------

struct InstanceBundle {
  simkit::System system;
  json descriptor;
  std::optional<instances::StableInstance> stable;
  std::optional<instances::UnstableInstance> unstable;
  std::optional<instances::GamblerSystem> gambler;
};

InstanceBundle build_instance(const json& cfg, std::uint64_t seed) {
  InstanceBundle out;
  const json inst = cfg.value("instance", json::object());
  const std::string type = inst.value("type", "stable");
  const int k = inst.value("k", 2);
  const int s = inst.value("s", 2);
  const double eps = inst.value("eps", 0.5);
  if (!(eps > 0.0 && eps <= 1.0))
    throw CliError(kExitConfig, "instance.eps must lie in (0, 1]");

  funclass::SmoothFunction g;
  if (inst.contains("g_file")) {
    g = serialize::smooth_function_from_json(
        serialize::read_json_file(inst["g_file"].get<std::string>()));
    if (g.k != k)
      throw CliError(kExitConfig,
                     "instance.k does not match the loaded function payload");
  } else if (inst.contains("g")) {
    g = serialize::smooth_function_from_json(inst["g"]);
    if (g.k != k)
      throw CliError(kExitConfig,
                     "instance.k does not match the embedded function payload");
  } else {
    Rng grng = Rng(seed).derive(0xf00d);
    g = funclass::sample_hard_function(k, s, eps, grng);
  }

  try {
    if (type == "stable") {
      auto st = instances::make_stable_instance(
          g, inst.value("i", 1), inst.value("omega", 1), inst.value("mu", 0.25),
          inst.value("tau", 0.1), inst.value("Delta", 0.01));
      out.descriptor = serialize::stable_instance_to_json(st);
      out.system = simkit::as_system(st);
      out.stable = std::move(st);
    } else if (type == "unstable") {
      const auto variant =
          inst.value("variant", std::string("time_varying")) == "time_varying"
              ? instances::UnstableVariant::time_varying
              : instances::UnstableVariant::time_invariant;
      auto un = instances::make_unstable_instance(
          g, inst.value("rho", 1.5), inst.value("d", k + 2), k, variant,
          inst.value("rotation_seed", seed), inst.value("r0", 0.1));
      out.descriptor = serialize::unstable_instance_to_json(un);
      out.system = simkit::as_system(un);
      out.unstable = std::move(un);
    } else if (type == "gambler") {
      instances::GamblerSystem gs;
      gs.rho = inst.value("rho", 1.5);
      gs.xi = inst.value("xi", 1);
      gs.eps0 = inst.value("eps0", 0.01);
      out.descriptor = serialize::gambler_to_json(gs);
      out.system = simkit::as_system(gs);
      out.gambler = gs;
    } else {
      throw CliError(kExitConfig, "unknown instance type: " + type);
    }
  } catch (const CliError&) {
    throw;
  } catch (const std::exception& e) {
    throw CliError(kExitConfig, std::string("instance: ") + e.what());
  }
  return out;
}

InstanceBundle load_instance_file(const std::string& path) {
  json j;
  try {
    j = serialize::read_json_file(path);
  } catch (const std::exception& e) {
    throw CliError(kExitConfig, std::string("instance file: ") + e.what());
  }
  InstanceBundle out;
  const std::string type = j.value("type", "stable");
  if (type == "stable") {
    auto st = serialize::stable_instance_from_json(j);
    out.descriptor = j;
    out.system = simkit::as_system(st);
    out.stable = std::move(st);
  } else if (type == "unstable") {
    auto un = serialize::unstable_instance_from_json(j);
    out.descriptor = j;
    out.system = simkit::as_system(un);
    out.unstable = std::move(un);
  } else {
    auto gs = serialize::gambler_from_json(j);
    out.descriptor = j;
    out.system = simkit::as_system(gs);
    out.gambler = gs;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Policy resolution
// ---------------------------------------------------------------------------

policies::Policy resolve_policy(const std::string& spec,
                                const InstanceBundle& bundle,
                                const std::string& dataset_path,
                                const json& cfg, std::uint64_t seed) {
  auto need_dataset = [&]() -> simkit::Dataset {
    if (dataset_path.empty())
      throw CliError(kExitConfig,
                     "policy '" + spec + "' needs --dataset <file>");
    if (!fs::exists(dataset_path))
      throw CliError(kExitConfig, "dataset file not found: " + dataset_path);
    return serialize::dataset_from_json(serialize::read_json_file(dataset_path));
  };
  auto need_stable = [&]() -> const instances::StableInstance& {
    if (!bundle.stable)
      throw CliError(kExitConfig,
                     "policy '" + spec + "' requires a stable instance");
    return *bundle.stable;
  };

  if (spec == "expert") {
    if (bundle.stable) return policies::expert_policy(*bundle.stable);
    if (bundle.unstable) return policies::expert_policy(*bundle.unstable);
    return policies::zero_policy(1);  // the gambler system has no expert
  }
  if (spec == "zero") return policies::zero_policy(bundle.system.d);
  if (spec == "random_noise") {
    const double sigma = cfg.value("eval", json::object())
                             .value("noise_sigma", 1.0 / std::sqrt(6.0));
    return policies::random_noise_policy(bundle.system.d, sigma);
  }
  if (spec == "gamblers_ruin" || spec == "concentric" || spec == "switching") {
    double rho = 1.5;
    if (bundle.gambler) rho = bundle.gambler->rho;
    if (bundle.unstable) rho = bundle.unstable->rho();
    if (spec == "gamblers_ruin") return policies::gamblers_ruin_policy(rho);
    if (spec == "concentric") return policies::concentric_policy(rho);
    return policies::switching_policy(rho);
  }
  if (spec == "bc" || spec == "bc_least_norm" || spec == "bc_assume_i" ||
      spec == "bc_adversarial" || spec.rfind("chunk", 0) == 0) {
    const auto& inst = need_stable();
    const simkit::Dataset data = need_dataset();
    policies::BCOptions opts;
    opts.completion = policies::Completion::least_norm;
    if (spec == "bc_assume_i") opts.completion = policies::Completion::assume_i;
    if (spec == "bc_adversarial")
      opts.completion = policies::Completion::adversarial;
    const policies::Policy base = policies::bc_learn(data, inst, opts);
    if (spec.rfind("chunk", 0) == 0) {
      const int len = std::stoi(spec.substr(5));
      return policies::chunk_wrap(base, inst, len);
    }
    return base;
  }
  if (spec == "mlp") {
    const simkit::Dataset data = need_dataset();
    policies::MlpConfig mcfg;
    const json lc = cfg.value("learner", json::object());
    mcfg.iterations = lc.value("iterations", 1500);
    mcfg.batch = lc.value("batch", 256);
    mcfg.lr = lc.value("lr", 1e-3);
    mcfg.weight_decay = lc.value("weight_decay", 1e-3);
    Rng rng = Rng(seed).derive(0x317);
    return policies::mlp_train(data, mcfg, rng).policy;
  }
  if (spec == "toy_diffusion") {
    const simkit::Dataset data = need_dataset();
    policies::DiffusionConfig dcfg;
    const json lc = cfg.value("learner", json::object());
    dcfg.iterations = lc.value("iterations", 1200);
    dcfg.batch = lc.value("batch", 128);
    dcfg.chunk_len = lc.value("chunk_len", 1);
    Rng rng = Rng(seed).derive(0xd1f);
    return policies::toy_diffusion_train(data, dcfg, rng).policy;
  }
  if (!fs::exists(spec))
    throw CliError(kExitConfig, "unknown policy or missing checkpoint: " + spec);
  return serialize::policy_from_checkpoint(serialize::read_json_file(spec));
}

// ---------------------------------------------------------------------------
// CSV helpers
// ---------------------------------------------------------------------------

struct CsvRow {
  std::string instance_id, policy_kind, metric, status = "ok";
  long n = 0;
  int H = 0;
  double value = 0.0, stderr_ = 0.0;
  std::uint64_t seed = 0;

  std::string key() const {
    std::ostringstream os;
    os << instance_id << '|' << policy_kind << '|' << metric << '|' << n << '|'
       << H << '|' << seed;
    return os.str();
  }
};

void write_csv(const fs::path& path, std::vector<CsvRow> rows) {
  std::sort(rows.begin(), rows.end(),
            [](const CsvRow& a, const CsvRow& b) { return a.key() < b.key(); });
  std::ofstream out(path);
  if (!out) throw CliError(kExitRuntime, "cannot write " + path.string());
  out << "instance_id,policy_kind,n,H,metric,value,stderr,seed,status\n";
  out.precision(17);
  for (const auto& r : rows)
    out << r.instance_id << ',' << r.policy_kind << ',' << r.n << ',' << r.H
        << ',' << r.metric << ',' << r.value << ',' << r.stderr_ << ','
        << r.seed << ',' << r.status << "\n";
}

// ---------------------------------------------------------------------------
// gen / eval / train
// ---------------------------------------------------------------------------

int cmd_gen(const json& cfg, std::uint64_t seed, const std::string& out) {
  const fs::path dir = resolve_out(out);
  fs::create_directories(dir);
  InstanceBundle bundle = build_instance(cfg, seed);
  bundle.descriptor["config"] = cfg;
  bundle.descriptor["seed"] = seed;
  serialize::write_json_file((dir / "instance.json").string(),
                             bundle.descriptor);

  const json dc = cfg.value("data", json::object());
  const int n = dc.value("n", 256);
  const int H = dc.value("H", 8);
  if (n < 0 || H < 1)
    throw CliError(kExitConfig, "data.n must be >= 0 and data.H >= 1");
  Rng rng = Rng(seed).derive(0xda7a);
  const simkit::Dataset data = simkit::sample_dataset(bundle.system, n, H, rng);
  json dj = serialize::dataset_to_json(data);
  dj["config"] = cfg;
  dj["seed"] = seed;
  serialize::write_json_file((dir / "dataset.json").string(), dj);
  std::cout << "wrote " << (dir / "instance.json").string() << " and "
            << (dir / "dataset.json").string() << "\n";
  return kExitOk;
}

int cmd_eval(const json& cfg, std::uint64_t seed, const std::string& out,
             const std::string& instance_path, const std::string& dataset_path,
             const std::string& policy_spec) {
  if (instance_path.empty() || !fs::exists(instance_path))
    throw CliError(kExitConfig, "missing instance file: " + instance_path);
  const fs::path dir = resolve_out(out);
  fs::create_directories(dir);
  InstanceBundle bundle = load_instance_file(instance_path);
  const policies::Policy policy =
      resolve_policy(policy_spec, bundle, dataset_path, cfg, seed);

  const json ec = cfg.value("eval", json::object());
  const int m = ec.value("m", 256);
  const int H = ec.value("H", 32);
  const double delta = ec.value("delta", 0.1);
  Rng rng(seed);
  const simkit::RiskReport report =
      simkit::evaluate_policy(policy, bundle.system, H, m, delta, rng);

  json rj = serialize::risk_report_to_json(report);
  rj["policy"] = policy_spec;
  rj["instance"] = instance_path;
  rj["config"] = cfg;
  rj["seed"] = seed;
  serialize::write_json_file((dir / "report.json").string(), rj);

  std::vector<CsvRow> rows;
  for (const auto& [metric, est] :
       std::vector<std::pair<std::string, simkit::Estimate>>{
           {"expert_l2", report.expert_l2},
           {"cost_risk", report.cost},
           {"traj_l1", report.traj_l1}}) {
    CsvRow r;
    r.instance_id = bundle.system.id;
    r.policy_kind = policy_spec;
    r.metric = metric;
    r.n = m;
    r.H = H;
    r.value = est.value;
    r.stderr_ = est.stderr_;
    r.seed = seed;
    rows.push_back(r);
  }
  write_csv(dir / "report.csv", rows);
  std::cout << "expert_l2 " << report.expert_l2.value << "  cost_risk "
            << report.cost.value << "  traj_l1 " << report.traj_l1.value
            << "\n";
  return kExitOk;
}

int cmd_train(const json& cfg, std::uint64_t seed, const std::string& out,
              const std::string& instance_path,
              const std::string& dataset_path) {
  if (dataset_path.empty() || !fs::exists(dataset_path))
    throw CliError(kExitConfig, "missing dataset file: " + dataset_path);
  const fs::path dir = resolve_out(out);
  fs::create_directories(dir);
  const simkit::Dataset data =
      serialize::dataset_from_json(serialize::read_json_file(dataset_path));
  const json lc = cfg.value("learner", json::object());
  const std::string kind = lc.value("kind", "bc");

  json checkpoint;
  policies::TrainTrace trace;
  if (kind == "bc") {
    if (instance_path.empty())
      throw CliError(kExitConfig, "bc training needs --instance");
    InstanceBundle bundle = load_instance_file(instance_path);
    if (!bundle.stable)
      throw CliError(kExitConfig, "bc training needs a stable instance");
    policies::BCOptions opts;
    const std::string comp = lc.value("completion", "least_norm");
    opts.completion = comp == "assume_i" ? policies::Completion::assume_i
                      : comp == "adversarial"
                          ? policies::Completion::adversarial
                          : policies::Completion::least_norm;
    const policies::Policy p = policies::bc_learn(data, *bundle.stable, opts);
    checkpoint = serialize::checkpoint_bc(*p.bc_fit());
  } else if (kind == "mlp") {
    policies::MlpConfig mcfg;
    mcfg.iterations = lc.value("iterations", 1500);
    mcfg.batch = lc.value("batch", 256);
    mcfg.lr = lc.value("lr", 1e-3);
    mcfg.weight_decay = lc.value("weight_decay", 1e-3);
    Rng rng = Rng(seed).derive(0x317);
    auto result = policies::mlp_train(data, mcfg, rng);
    checkpoint = serialize::checkpoint_mlp(result.net);
    trace = result.trace;
  } else if (kind == "toy_diffusion") {
    policies::DiffusionConfig dcfg;
    dcfg.iterations = lc.value("iterations", 1200);
    dcfg.batch = lc.value("batch", 128);
    dcfg.chunk_len = lc.value("chunk_len", 1);
    Rng rng = Rng(seed).derive(0xd1f);
    auto result = policies::toy_diffusion_train(data, dcfg, rng);
    checkpoint = serialize::checkpoint_diffusion(*result.model);
    trace = result.trace;
  } else {
    throw CliError(kExitConfig, "unknown learner kind: " + kind);
  }

  checkpoint["config"] = cfg;
  checkpoint["seed"] = seed;
  serialize::write_json_file((dir / "policy.json").string(), checkpoint);
  if (!trace.iteration.empty()) {
    std::ofstream tr(dir / "trace.csv");
    tr << "iteration,train_loss,val_loss\n";
    tr.precision(17);
    for (size_t i = 0; i < trace.iteration.size(); ++i)
      tr << trace.iteration[i] << ',' << trace.train_loss[i] << ','
         << trace.val_loss[i] << "\n";
  }
  std::cout << "wrote " << (dir / "policy.json").string() << "\n";
  return kExitOk;
}

json run_preset(const std::string& preset, const json& cfg,
                std::uint64_t seed) {
  if (preset == "figure1") return presets::figure1_run(cfg, seed);
  if (preset == "figure2") return presets::figure2_run(cfg, seed);
  if (preset == "rates") return presets::rates_run(seed);
  if (preset == "unstable") return presets::unstable_run(seed);
  if (preset == "gambler") return presets::gambler_run(seed);
  throw CliError(kExitConfig, "unknown preset: " + preset);
}

int cmd_sweep(const json& cfg, std::uint64_t seed, const std::string& out,
              const std::string& preset, int workers) {
  const fs::path dir = resolve_out(out);
  fs::create_directories(dir / "cells");

  // Cell = one preset run, keyed by (preset, seed). Completed cells are kept
  // on disk so interrupted sweeps resume, and results are merged in sorted
  // key order so the CSV does not depend on worker count.
  std::vector<std::string> wanted;
  if (preset == "all")
    wanted = {"figure1", "figure2", "gambler", "rates", "unstable"};
  else
    wanted = {preset};

  std::vector<std::pair<std::string, fs::path>> cells;
  for (const auto& name : wanted)
    cells.emplace_back(
        name, dir / "cells" / (name + "_" + std::to_string(seed) + ".json"));

  std::mutex io_mutex;
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  auto work = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= cells.size() || failed.load()) return;
      const auto& [name, path] = cells[i];
      if (fs::exists(path)) continue;
      try {
        json result = run_preset(name, cfg, seed);
        result["config"] = cfg;
        result["seed"] = seed;
        std::lock_guard<std::mutex> lock(io_mutex);
        serialize::write_json_file(path.string(), result);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(io_mutex);
        if (!failed.exchange(true)) first_error = e.what();
      }
    }
  };
  const int n_workers =
      std::max(1, std::min<int>(workers, static_cast<int>(cells.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < n_workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failed.load()) throw CliError(kExitRuntime, "sweep cell failed: " + first_error);

  std::vector<CsvRow> rows;
  for (const auto& [name, path] : cells) {
    const json result = serialize::read_json_file(path.string());
    for (const auto& rj : result.at("rows")) {
      CsvRow r;
      r.instance_id = rj.at("instance_id").get<std::string>();
      r.policy_kind = rj.at("policy_kind").get<std::string>();
      r.metric = rj.at("metric").get<std::string>();
      r.n = rj.at("n").get<long>();
      r.H = rj.at("H").get<int>();
      r.value = rj.at("value").get<double>();
      r.stderr_ = rj.at("stderr").get<double>();
      r.seed = rj.at("seed").get<std::uint64_t>();
      r.status = rj.value("status", "ok");
      rows.push_back(r);
    }
  }
  write_csv(dir / (preset + ".csv"), rows);
  std::cout << "wrote " << (dir / (preset + ".csv")).string() << " ("
            << rows.size() << " rows)\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

int cmd_verify(double mu) {
  std::vector<Check> checks;
  auto run = [&](const std::string& name, auto&& fn) {
    Check c;
    c.name = name;
    try {
      c.pass = fn(c.detail);
    } catch (const std::exception& e) {
      c.pass = false;
      c.detail = e.what();
    }
    checks.push_back(std::move(c));
  };

  run("challenging-pair structure", [&](std::string& detail) {
    const auto p = matkit::challenging_pair(mu);
    const bool closed = ((p.A1 + p.K1) - (p.A2 + p.K2)).norm() == 0.0;
    const Eigen::Vector2d e2(0, 1);
    const bool col = ((p.K1 - p.K2) * e2).norm() == 0.0;
    detail = closed && col ? "" : "pair columns disagree";
    return closed && col;
  });
  run("pair spectra stable, cross gains unstable", [&](std::string& detail) {
    const auto p = matkit::challenging_pair(mu);
    bool ok = matkit::spectral_radius(Mat(p.A1)) < 1.0 &&
              matkit::spectral_radius(Mat(p.A2)) < 1.0 &&
              matkit::spectral_radius(Mat(p.A1 + p.K1)) < 1.0;
    ok = ok && matkit::cross_instability(p, p.K1, 20) >=
                   std::pow(1.0 + mu / 4.0, 20);
    detail = ok ? "" : "spectra out of range";
    return ok;
  });
  run("bump plateau and support radii", [](std::string&) {
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
      if (matkit::bump(Vec(rng.uniform_ball(3, 1.0))) != 1.0) return false;
      if (matkit::bump(Vec(rng.unit_sphere(3) * rng.uniform(2.0, 9.0))) != 0.0)
        return false;
    }
    return true;
  });
  run("expert cost vanishes on the stable construction", [&](std::string&) {
    Rng grng(5);
    auto g = funclass::sample_hard_function(2, 2, 0.5, grng);
    const auto inst = instances::make_stable_instance(
        std::move(g), 1, 1, std::min(mu, 0.5), 0.1, 0.01);
    const auto sys = simkit::as_system(inst);
    Rng rng(7);
    for (int trial = 0; trial < 500; ++trial) {
      Rng trng = rng.derive(trial);
      const auto init = sys.sample_init(trng);
      const auto tr = simkit::rollout(policies::expert_policy(inst), sys, init,
                                      12, trng.next_u64());
      if (simkit::traj_cost(sys, tr) > 1e-12) return false;
    }
    return true;
  });
  run("identity-input system is (1,0) incrementally stable", [](std::string&) {
    Rng rng(11);
    auto step = [](const Vec&, const Vec& u, int) { return u; };
    return simkit::eiiss_check(step, 3, 1.0, 0.0, 10, 300, rng).pass;
  });
  run("gamblers-ruin zeroing law", [](std::string&) {
    instances::GamblerSystem sys{1.5, 1, 0.01};
    Rng rng(13);
    const auto curves = simkit::gambler_curves(
        policies::gamblers_ruin_policy(1.5), sys, 6, 20000, rng);
    for (int t = 1; t <= 6; ++t) {
      const double expect = std::pow(2.0, -t);
      if (std::abs(curves.p_nonzero[t - 1] - expect) >
          4.0 * std::sqrt(expect * (1 - expect) / 20000))
        return false;
    }
    return true;
  });
  run("concentric stabilization zeroes by step three", [](std::string&) {
    Rng rng(17);
    const auto p = policies::concentric_policy(1.5);
    for (int xi : {1, -1}) {
      instances::GamblerSystem sys{1.5, xi, 0.0};
      for (int trial = 0; trial < 200; ++trial) {
        double x = rng.uniform(-5.0, 5.0);
        Rng rr(1);
        auto actor = p.make_actor();
        for (int t = 1; t <= 5; ++t) {
          Vec xv = Vec::Constant(1, x);
          x = instances::gambler_step(sys, x, actor->act(&xv, t, rr)[0]);
          if (t >= 3 && x != 0.0) return false;
        }
      }
    }
    return true;
  });

  bool all = true;
  for (const auto& c : checks) {
    std::cout << (c.pass ? "PASS" : "FAIL") << "  " << c.name;
    if (!c.pass && !c.detail.empty()) std::cout << "  (" << c.detail << ")";
    std::cout << "\n";
    all = all && c.pass;
  }
  std::cout << (all ? "verify: all checks passed\n"
                    : "verify: FAILURES present\n");
  return all ? kExitOk : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ilbench: hard imitation-learning benchmark instances"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand name

  std::string config_path, out = "runs", instance_path, dataset_path;
  std::string policy_spec = "expert", preset = "figure1";
  std::uint64_t seed = 1;
  int workers = 1;
  double verify_mu = 0.25;

  app.add_option("--seed", seed, "master seed");
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--out", out, "output directory");
  app.add_option("--workers", workers, "worker threads for sweeps");

  auto* gen = app.add_subcommand("gen", "write instance + expert dataset");
  auto* eval = app.add_subcommand("eval", "evaluate a policy on an instance");
  eval->add_option("--instance", instance_path, "instance JSON")->required();
  eval->add_option("--dataset", dataset_path, "expert dataset JSON");
  eval->add_option("--policy", policy_spec,
                   "expert|zero|random_noise|bc[_mode]|chunkN|mlp|"
                   "toy_diffusion|gamblers_ruin|concentric|switching|<file>");
  auto* train = app.add_subcommand("train", "train a learner checkpoint");
  train->add_option("--instance", instance_path, "instance JSON");
  train->add_option("--dataset", dataset_path, "expert dataset JSON");
  auto* sweep = app.add_subcommand("sweep", "run a benchmark preset");
  sweep->add_option("--preset", preset,
                    "figure1|figure2|rates|unstable|gambler");
  auto* verify = app.add_subcommand("verify", "run the invariant suite");
  verify->add_option("--mu", verify_mu, "pair parameter used by the checks");

  CLI11_PARSE(app, argc, argv);

  try {
    const json cfg = load_config(config_path);
    if (cfg.contains("seed") && app.count("--seed") == 0)
      seed = cfg["seed"].get<std::uint64_t>();
    if (cfg.contains("out") && app.count("--out") == 0)
      out = cfg["out"].get<std::string>();
    if (gen->parsed()) return cmd_gen(cfg, seed, out);
    if (eval->parsed())
      return cmd_eval(cfg, seed, out, instance_path, dataset_path, policy_spec);
    if (train->parsed())
      return cmd_train(cfg, seed, out, instance_path, dataset_path);
    if (sweep->parsed()) return cmd_sweep(cfg, seed, out, preset, workers);
    if (verify->parsed()) return cmd_verify(verify_mu);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
