#include "ilbench/serialize.hpp"

#include <fstream>
#include <stdexcept>

#include "diffusion_model.hpp"

namespace ilbench::serialize {

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec vec_from_json(const json& j) {
  Vec v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = j[i].get<double>();
  return v;
}

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat mat_from_json(const json& j) {
  const int rows = static_cast<int>(j.size());
  if (rows == 0) return Mat(0, 0);
  const int cols = static_cast<int>(j[0].size());
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  return m;
}

json smooth_function_to_json(const funclass::SmoothFunction& g) {
  json j;
  j["k"] = g.k;
  j["s"] = g.s;
  j["eps"] = g.eps;
  j["amplitude"] = g.amplitude;
  j["separation"] = g.packing.separation;
  j["domain_radius"] = g.packing.domain_radius;
  json centers = json::array();
  for (const auto& c : g.packing.centers) centers.push_back(vec_to_json(c));
  j["centers"] = std::move(centers);
  j["signs"] = g.signs;
  return j;
}

funclass::SmoothFunction smooth_function_from_json(const json& j) {
  funclass::SmoothFunction g;
  g.k = j.at("k").get<int>();
  g.s = j.at("s").get<int>();
  g.eps = j.at("eps").get<double>();
  g.amplitude = j.at("amplitude").get<double>();
  g.packing.separation = j.at("separation").get<double>();
  g.packing.domain_radius = j.at("domain_radius").get<double>();
  for (const auto& c : j.at("centers")) g.packing.centers.push_back(vec_from_json(c));
  g.packing.degenerate = g.packing.size() < 2;
  g.signs = j.at("signs").get<std::vector<int>>();
  if (static_cast<int>(g.signs.size()) != g.packing.size())
    throw std::invalid_argument("smooth_function_from_json: signs/centers mismatch");
  return g;
}

json stable_instance_to_json(const instances::StableInstance& inst) {
  json j;
  j["type"] = "stable";
  j["g"] = smooth_function_to_json(inst.g());
  j["i"] = inst.index();
  j["omega"] = inst.omega();
  j["mu"] = inst.mu();
  j["tau"] = inst.tau();
  j["Delta"] = inst.Delta();
  j["C_cost"] = inst.cost_spec().C_cost;
  j["C_Delta"] = inst.cost_spec().C_Delta;
  return j;
}

instances::StableInstance stable_instance_from_json(const json& j) {
  instances::CostSpec cost;
  cost.which = instances::CostKind::hard_stable;
  cost.C_cost = j.value("C_cost", 1.0 / 16.0);
  cost.C_Delta = j.value("C_Delta", 1.0);
  return instances::StableInstance(
      smooth_function_from_json(j.at("g")), j.at("i").get<int>(),
      j.at("omega").get<int>(), j.at("mu").get<double>(),
      j.at("tau").get<double>(), j.at("Delta").get<double>(), cost);
}

json unstable_instance_to_json(const instances::UnstableInstance& inst) {
  json j;
  j["type"] = "unstable";
  j["g"] = smooth_function_to_json(inst.g());
  j["rho"] = inst.rho();
  j["d"] = inst.d();
  j["k"] = inst.k();
  j["variant"] = inst.variant() == instances::UnstableVariant::time_varying
                     ? "time_varying"
                     : "time_invariant";
  j["rotation_seed"] = inst.rotation_seed();
  j["r0"] = inst.r0();
  return j;
}

instances::UnstableInstance unstable_instance_from_json(const json& j) {
  const auto variant = j.at("variant").get<std::string>() == "time_varying"
                           ? instances::UnstableVariant::time_varying
                           : instances::UnstableVariant::time_invariant;
  return instances::UnstableInstance(
      smooth_function_from_json(j.at("g")), j.at("rho").get<double>(),
      j.at("d").get<int>(), j.at("k").get<int>(), variant,
      j.at("rotation_seed").get<std::uint64_t>(), j.value("r0", 0.1));
}

json gambler_to_json(const instances::GamblerSystem& sys) {
  json j;
  j["type"] = "gambler";
  j["rho"] = sys.rho;
  j["xi"] = sys.xi;
  j["eps0"] = sys.eps0;
  return j;
}

instances::GamblerSystem gambler_from_json(const json& j) {
  instances::GamblerSystem sys;
  sys.rho = j.at("rho").get<double>();
  sys.xi = j.at("xi").get<int>();
  sys.eps0 = j.at("eps0").get<double>();
  return sys;
}

json trajectory_to_json(const simkit::Trajectory& t) {
  json j;
  j["states"] = mat_to_json(t.states);
  j["inputs"] = mat_to_json(t.inputs);
  j["seed"] = t.seed;
  j["instance_id"] = t.instance_id;
  j["blew_up"] = t.blew_up;
  j["blowup_t"] = t.blowup_t;
  j["branch"] = t.branch == instances::Branch::Z0 ? 0 : 1;
  j["y_level"] = t.y_level;
  return j;
}

simkit::Trajectory trajectory_from_json(const json& j) {
  simkit::Trajectory t;
  t.states = mat_from_json(j.at("states"));
  t.inputs = mat_from_json(j.at("inputs"));
  t.seed = j.at("seed").get<std::uint64_t>();
  t.instance_id = j.value("instance_id", "");
  t.blew_up = j.value("blew_up", false);
  t.blowup_t = j.value("blowup_t", -1);
  t.branch = j.value("branch", 0) == 0 ? instances::Branch::Z0
                                       : instances::Branch::Z1;
  t.y_level = j.value("y_level", 0);
  return t;
}

json dataset_to_json(const simkit::Dataset& d) {
  json j;
  j["H"] = d.H;
  j["instance_id"] = d.instance_id;
  json trs = json::array();
  for (const auto& t : d.trajectories) trs.push_back(trajectory_to_json(t));
  j["trajectories"] = std::move(trs);
  return j;
}

simkit::Dataset dataset_from_json(const json& j) {
  simkit::Dataset d;
  d.H = j.at("H").get<int>();
  d.instance_id = j.value("instance_id", "");
  for (const auto& t : j.at("trajectories"))
    d.trajectories.push_back(trajectory_from_json(t));
  return d;
}

json risk_report_to_json(const simkit::RiskReport& r) {
  json j;
  j["expert_l2"] = r.expert_l2.value;
  j["expert_l2_stderr"] = r.expert_l2.stderr_;
  j["cost_risk"] = r.cost.value;
  j["cost_risk_stderr"] = r.cost.stderr_;
  j["traj_l1"] = r.traj_l1.value;
  j["traj_l1_stderr"] = r.traj_l1.stderr_;
  j["quantile_delta"] = r.quantile_delta;
  j["quantile_value"] = r.quantile_value;
  j["m_rollouts"] = r.m_rollouts;
  return j;
}

json tinynet_to_json(const policies::TinyNet& net) {
  json j;
  json ws = json::array(), bs = json::array();
  for (const auto& w : net.W) ws.push_back(mat_to_json(w));
  for (const auto& b : net.b) bs.push_back(vec_to_json(b));
  j["W"] = std::move(ws);
  j["b"] = std::move(bs);
  return j;
}

policies::TinyNet tinynet_from_json(const json& j) {
  policies::TinyNet net;
  for (const auto& w : j.at("W")) net.W.push_back(mat_from_json(w));
  for (const auto& b : j.at("b")) net.b.push_back(vec_from_json(b));
  return net;
}

json bc_fit_to_json(const policies::BCFit& fit) {
  json j;
  j["K_hat"] = mat_to_json(fit.K_hat);
  j["Acl_hat"] = mat_to_json(fit.Acl_hat);
  j["z1_residual"] = fit.z1_residual;
  j["n_z0"] = fit.n_z0;
  j["n_z1"] = fit.n_z1;
  j["completion"] = static_cast<int>(fit.completion);
  j["tau"] = fit.tau;
  j["x_offset"] = vec_to_json(fit.x_offset);
  j["k"] = fit.k;
  j["d"] = fit.d;
  j["g_ok"] = fit.g_ok;
  if (fit.g_ok) {
    json g;
    g["inputs"] = mat_to_json(fit.g_hat.sample().inputs);
    g["labels"] = vec_to_json(fit.g_hat.sample().labels);
    g["degree"] = fit.g_hat.degree();
    g["neighborhood_size"] = fit.g_hat.neighborhood_size();
    j["g_hat"] = std::move(g);
  }
  return j;
}

std::shared_ptr<policies::BCFit> bc_fit_from_json(const json& j) {
  auto fit = std::make_shared<policies::BCFit>();
  fit->K_hat = mat_from_json(j.at("K_hat"));
  fit->Acl_hat = mat_from_json(j.at("Acl_hat"));
  fit->z1_residual = j.value("z1_residual", 0.0);
  fit->n_z0 = j.value("n_z0", 0);
  fit->n_z1 = j.value("n_z1", 0);
  fit->completion = static_cast<policies::Completion>(j.value("completion", 0));
  fit->tau = j.at("tau").get<double>();
  fit->x_offset = vec_from_json(j.at("x_offset"));
  fit->k = j.at("k").get<int>();
  fit->d = j.at("d").get<int>();
  fit->g_ok = j.value("g_ok", false);
  if (fit->g_ok) {
    funclass::RegressionSample sample;
    sample.inputs = mat_from_json(j.at("g_hat").at("inputs"));
    sample.labels = vec_from_json(j.at("g_hat").at("labels"));
    fit->g_hat = funclass::LocalEstimator(
        std::move(sample), j.at("g_hat").at("degree").get<int>(),
        j.at("g_hat").at("neighborhood_size").get<int>());
  }
  return fit;
}

json diffusion_to_json(const policies::DiffusionModel& m) {
  json j;
  j["out_dim"] = m.out_dim;
  j["state_dim"] = m.state_dim;
  j["hidden"] = m.hidden;
  j["layers"] = m.layers;
  j["time_dim"] = m.time_dim;
  j["steps"] = m.steps;
  j["chunk_len"] = m.chunk_len;
  j["W_in"] = mat_to_json(m.W_in);
  j["b_in"] = vec_to_json(m.b_in);
  json wh = json::array(), bh = json::array();
  for (const auto& w : m.W_h) wh.push_back(mat_to_json(w));
  for (const auto& b : m.b_h) bh.push_back(vec_to_json(b));
  j["W_h"] = std::move(wh);
  j["b_h"] = std::move(bh);
  j["W_out"] = mat_to_json(m.W_out);
  j["b_out"] = vec_to_json(m.b_out);
  j["W_film"] = mat_to_json(m.W_film);
  j["b_film"] = vec_to_json(m.b_film);
  j["x_mu"] = vec_to_json(m.x_mu);
  j["x_sd"] = vec_to_json(m.x_sd);
  j["u_mu"] = vec_to_json(m.u_mu);
  j["u_sd"] = vec_to_json(m.u_sd);
  j["betas"] = vec_to_json(m.betas);
  j["alphas"] = vec_to_json(m.alphas);
  j["alpha_bars"] = vec_to_json(m.alpha_bars);
  return j;
}

std::shared_ptr<policies::DiffusionModel> diffusion_from_json(const json& j) {
  auto m = std::make_shared<policies::DiffusionModel>();
  m->out_dim = j.at("out_dim").get<int>();
  m->state_dim = j.at("state_dim").get<int>();
  m->hidden = j.at("hidden").get<int>();
  m->layers = j.at("layers").get<int>();
  m->time_dim = j.at("time_dim").get<int>();
  m->steps = j.at("steps").get<int>();
  m->chunk_len = j.at("chunk_len").get<int>();
  m->W_in = mat_from_json(j.at("W_in"));
  m->b_in = vec_from_json(j.at("b_in"));
  for (const auto& w : j.at("W_h")) m->W_h.push_back(mat_from_json(w));
  for (const auto& b : j.at("b_h")) m->b_h.push_back(vec_from_json(b));
  m->W_out = mat_from_json(j.at("W_out"));
  m->b_out = vec_from_json(j.at("b_out"));
  m->W_film = mat_from_json(j.at("W_film"));
  m->b_film = vec_from_json(j.at("b_film"));
  m->x_mu = vec_from_json(j.at("x_mu"));
  m->x_sd = vec_from_json(j.at("x_sd"));
  m->u_mu = vec_from_json(j.at("u_mu"));
  m->u_sd = vec_from_json(j.at("u_sd"));
  m->betas = vec_from_json(j.at("betas"));
  m->alphas = vec_from_json(j.at("alphas"));
  m->alpha_bars = vec_from_json(j.at("alpha_bars"));
  return m;
}

json checkpoint_bc(const policies::BCFit& fit) {
  json j = bc_fit_to_json(fit);
  j["kind"] = "bc";
  return j;
}

json checkpoint_mlp(const policies::TinyNet& net) {
  json j = tinynet_to_json(net);
  j["kind"] = "mlp";
  return j;
}

json checkpoint_diffusion(const policies::DiffusionModel& model) {
  json j = diffusion_to_json(model);
  j["kind"] = "toy_diffusion";
  return j;
}

policies::Policy policy_from_checkpoint(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "bc") return policies::bc_policy_from_fit(bc_fit_from_json(j));
  if (kind == "mlp") return policies::mlp_policy_from_net(tinynet_from_json(j));
  if (kind == "toy_diffusion")
    return policies::diffusion_policy_from_model(diffusion_from_json(j));
  if (kind == "random_noise")
    return policies::random_noise_policy(j.at("d").get<int>(),
                                         j.at("sigma").get<double>());
  if (kind == "gamblers_ruin")
    return policies::gamblers_ruin_policy(j.at("rho").get<double>());
  if (kind == "concentric")
    return policies::concentric_policy(j.at("rho").get<double>());
  if (kind == "switching")
    return policies::switching_policy(j.at("rho").get<double>());
  if (kind == "linear")
    return policies::linear_policy(mat_from_json(j.at("K")));
  if (kind == "zero") return policies::zero_policy(j.at("d").get<int>());
  throw std::invalid_argument("policy_from_checkpoint: unknown kind " + kind);
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  json j;
  in >> j;
  return j;
}

}  // namespace ilbench::serialize
