#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pedi/dataset.hpp"
#include "pedi/tasks.hpp"

namespace pedi {

struct CollectOptions {
  int n_traj = 100;
  int records_per_traj = 200;
  int workers = 1;
  std::uint64_t seed = 0;
  bool with_actions = true;
  // Attempts beyond n_traj before giving up on backfill.
  int max_extra_attempts = 100;
  SimConfig sim;
  ControllerConfig controller;
  RewardWeights weights;
  ExpertConfig expert;

  void validate() const;
};

struct Exclusion {
  int attempt = 0;
  std::uint64_t seed = 0;
  std::string reason;
};

struct CollectReport {
  int requested = 0;
  int collected = 0;
  int attempts = 0;  // attempt indices consumed, in order
  std::vector<Exclusion> exclusions;
  double wall_seconds = 0.0;
};

struct CollectResult {
  Dataset dataset;
  CollectReport report;
};

// Seed of attempt i; trajectories are the first n_traj successful attempts
// in index order, so the output never depends on the worker count.
std::uint64_t attempt_seed(std::uint64_t base, int attempt);

CollectResult collect(const TaskSpec& t, const QuadrupedModel& model, const CollectOptions& opts);

}  // namespace pedi
