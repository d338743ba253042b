#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "pedi/config.hpp"
#include "pedi/sim.hpp"

namespace pedi {

inline constexpr std::array<std::string_view, 9> kTaskNames = {
    "press_button",    "pull_handle",      "push_door",    "lift_basket", "open_dishwasher",
    "close_dishwasher", "pull_objects",    "twist_valve",  "shoot_ball",
};

struct TaskSpec {
  std::string name;
  KeyValueFile config;             // dimensions, thresholds, placement
  TrajectoryParams expert;         // object frame
  Interval place_x;                // m, world
  Interval place_y;                // m, world
  Interval place_yaw;              // rad
  std::function<std::vector<SceneObject>(const KeyValueFile&, const Pose&)> build;
  std::function<bool(const std::vector<SceneObject>&, const KeyValueFile&)> succeeded;
};

// Loads data_dir()/tasks/<name>.cfg and <name>.traj. Unknown names throw
// std::invalid_argument listing the valid ones.
TaskSpec load_task(std::string_view name, const std::filesystem::path& dir);
// Process-wide registry loaded on first use.
const TaskSpec& task(std::string_view name);
std::string task_names_joined();

struct TaskInstance {
  World world;
  std::vector<Pose> object_poses;
};

// Object 0 is the manipulated object, placed uniformly in the task's
// box with uniform yaw; the robot starts in stance at the origin facing +x.
TaskInstance instantiate(const TaskSpec& t, std::uint64_t seed, const QuadrupedModel& model,
                         const SimConfig& sim = {});

// Template mapped into the world. The flag goes to the forelimb on the
// object's side of the robot; zero lateral offset picks the right one.
TrajectoryParams expert_params(const TaskSpec& t, const Pose& object_pose,
                               const Pose& base = Pose::identity());

// Throws std::invalid_argument for an incomplete or faulted episode.
bool success(const TaskSpec& t, const Episode& ep);
bool success(const TaskSpec& t, const std::vector<SceneObject>& objects);

struct ExpertConfig {
  // Clock held at phase 0 until the toe is this close to the first point.
  double start_tolerance = 0.03;     // m
  // Untouched object moving further than this triggers a re-plan.
  double replan_distance = 0.05;     // m
  double replan_angle = 0.1;         // rad
};

// Privileged planner: reads the object pose from the world and emits the
// task template in world coordinates.
class ScriptedExpertPlanner : public Planner {
 public:
  explicit ScriptedExpertPlanner(const TaskSpec& t, ExpertConfig cfg = {});
  PlannerOutput plan(const PlannerContext& ctx) override;

 private:
  const TaskSpec* task_;
  ExpertConfig cfg_;
  bool have_anchor_ = false;
  bool started_ = false;
  int flag_ = kFlagFrontRight;
  Pose anchor_;
};

Episode run_episode(const TaskSpec& t, Planner& planner, const ControllerConfig& controller,
                    std::uint64_t seed, RunHooks hooks = {}, const QuadrupedModel* model = nullptr,
                    const SimConfig& sim = {}, const RewardWeights& weights = {});

}  // namespace pedi
