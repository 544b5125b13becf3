#pragma once

#include <json.hpp>

#include <cstdint>

namespace ilbench::presets {

using json = nlohmann::ordered_json;

/// Benchmark presets. Each returns {"rows": [...]} where every row carries
/// (instance_id, policy_kind, n, H, metric, value, stderr, seed, status) and
/// is regenerable bit-exactly from (config, seed).
json figure1_run(const json& cfg, std::uint64_t seed);
json figure2_run(const json& cfg, std::uint64_t seed);
json rates_run(std::uint64_t seed);
json unstable_run(std::uint64_t seed);
json gambler_run(std::uint64_t seed);

/// Convenience for reading a metric row back out of a preset result.
double row_value(const json& result, const std::string& instance_id,
                 const std::string& policy_kind, int H,
                 const std::string& metric);

}  // namespace ilbench::presets
