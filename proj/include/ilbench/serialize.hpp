#pragma once

#include <json.hpp>

#include <memory>
#include <string>

#include "ilbench/funclass.hpp"
#include "ilbench/instances.hpp"
#include "ilbench/policies.hpp"
#include "ilbench/simkit.hpp"

namespace ilbench::serialize {

using json = nlohmann::ordered_json;

json vec_to_json(const Vec& v);
Vec vec_from_json(const json& j);
json mat_to_json(const Mat& m);
Mat mat_from_json(const json& j);

json smooth_function_to_json(const funclass::SmoothFunction& g);
funclass::SmoothFunction smooth_function_from_json(const json& j);

json stable_instance_to_json(const instances::StableInstance& inst);
instances::StableInstance stable_instance_from_json(const json& j);

json unstable_instance_to_json(const instances::UnstableInstance& inst);
instances::UnstableInstance unstable_instance_from_json(const json& j);

json gambler_to_json(const instances::GamblerSystem& sys);
instances::GamblerSystem gambler_from_json(const json& j);

json trajectory_to_json(const simkit::Trajectory& t);
simkit::Trajectory trajectory_from_json(const json& j);
json dataset_to_json(const simkit::Dataset& d);
simkit::Dataset dataset_from_json(const json& j);

json risk_report_to_json(const simkit::RiskReport& r);

json tinynet_to_json(const policies::TinyNet& net);
policies::TinyNet tinynet_from_json(const json& j);

json bc_fit_to_json(const policies::BCFit& fit);
std::shared_ptr<policies::BCFit> bc_fit_from_json(const json& j);

json diffusion_to_json(const policies::DiffusionModel& model);
std::shared_ptr<policies::DiffusionModel> diffusion_from_json(const json& j);

/// Policy checkpoints: {"kind": ..., parameters...}. Expert policies are
/// reconstructed from the instance file, not stored.
json checkpoint_bc(const policies::BCFit& fit);
json checkpoint_mlp(const policies::TinyNet& net);
json checkpoint_diffusion(const policies::DiffusionModel& model);
policies::Policy policy_from_checkpoint(const json& j);

void write_json_file(const std::string& path, const json& j);
json read_json_file(const std::string& path);

}  // namespace ilbench::serialize
