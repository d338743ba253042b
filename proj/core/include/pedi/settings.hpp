#pragma once

#include "pedi/config.hpp"
#include "pedi/controller.hpp"
#include "pedi/params.hpp"
#include "pedi/sim.hpp"
#include "pedi/tasks.hpp"

namespace pedi {

// Every tunable shared by the subcommands, in one place.
struct RunConfig {
  SimConfig sim;
  ControllerConfig controller;
  RewardWeights weights;
  ExpertConfig expert;
  RandomizationRanges ranges;
};

// Settings with all run keys declared at their defaults
// (sim.*, controller.*, reward.*, expert.*, ranges.*).
Settings make_settings();

// Reads and validates a RunConfig. sim.control_period feeds both the
// simulator and the controller.
RunConfig run_config_from(const Settings& s);

}  // namespace pedi
