#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ilbench/common.hpp"
#include "ilbench/instances.hpp"

namespace ilbench::simkit {

struct Trajectory {
  Mat states;  // d x H
  Mat inputs;  // d x H
  std::uint64_t seed = 0;
  std::string instance_id;
  bool blew_up = false;
  int blowup_t = -1;

  // Init metadata, recorded for tests and dataset splits.
  instances::Branch branch = instances::Branch::Z0;
  int y_level = 0;

  int horizon() const { return static_cast<int>(states.cols()); }
  int dim() const { return static_cast<int>(states.rows()); }
};

struct Dataset {
  std::vector<Trajectory> trajectories;
  int H = 0;
  std::string instance_id;

  int n() const { return static_cast<int>(trajectories.size()); }
};

}  // namespace ilbench::simkit
