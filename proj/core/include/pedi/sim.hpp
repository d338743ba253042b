#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pedi/controller.hpp"
#include "pedi/model.hpp"
#include "pedi/params.hpp"
#include "pedi/scene.hpp"

namespace pedi {

struct SimConfig {
  double control_period = 0.02;       // s
  int planner_every = 5;              // control ticks per planner tick
  double duration = 20.0;             // s
  double joint_time_constant = 0.06;  // s
  double joint_rate_limit = 10.0;     // rad/s
  double max_lin_vel = 0.6;           // m/s
  double max_yaw_rate = 1.0;          // rad/s
  int cloud_points = 768;
  double toe_radius = 0.02;           // m

  int ticks() const;
  int planner_ticks() const;
  void validate() const;
};

// Kinematic stand-in for a physics engine: joints follow a first-order lag
// with a rate limit, the base integrates its velocity command at constant
// height, and the flagged toe drives object articulations.
class World {
 public:
  World(QuadrupedModel model, SimConfig cfg, RobotState initial, std::vector<SceneObject> objects);

  const QuadrupedModel& model() const { return model_; }
  const SimConfig& config() const { return cfg_; }
  const RobotState& state() const { return state_; }
  RobotState& mutable_state() { return state_; }
  const std::vector<SceneObject>& objects() const { return objects_; }
  const SceneObject& object(int id) const;
  SceneObject& object(int id);

  int tick() const { return tick_; }
  double time() const { return tick_ * cfg_.control_period; }
  int flag() const { return flag_; }
  void set_flag(int flag);

  const RobotState& step(const JointVector& q_desired, const BaseVelocityCommand& cmd);

  std::array<Pose, kNumLegs> toe_poses() const;
  Vec3 flagged_toe() const;

 private:
  QuadrupedModel model_;
  SimConfig cfg_;
  RobotState state_;
  std::vector<SceneObject> objects_;
  int tick_ = 0;
  int flag_ = kFlagFrontRight;
  Vec3 prev_toe_;
};

// Area-weighted uniform samples on visible object surfaces, world frame.
std::vector<Vec3> synth_point_cloud(const World& world, int n, std::uint64_t seed);

// Left-multiplies the object's pose by `delta` (a world-frame motion).
void apply_perturbation(World& world, int object_id, const Pose& delta);

struct PlannerContext {
  int index = 0;  // planner tick
  int tick = 0;   // control tick
  double time = 0.0;
  std::span<const Vec3> cloud;
  const RobotState* state = nullptr;
  const World* world = nullptr;  // privileged view for scripted planners
};

struct PlannerOutput {
  TrajectoryParams params;  // world frame
  bool restart_clock = false;
};

class Planner {
 public:
  virtual ~Planner() = default;
  virtual PlannerOutput plan(const PlannerContext& ctx) = 0;
};

// Holds the flagged toe where it is.
class HoldPlanner : public Planner {
 public:
  explicit HoldPlanner(int flag = kFlagFrontRight) : flag_(flag) {}
  PlannerOutput plan(const PlannerContext& ctx) override;

 private:
  int flag_;
  std::optional<TrajectoryParams> held_;
};

// A curve with every control point at `p` and unit weights.
TrajectoryParams constant_params(const Vec3& p, const Quat& orientation, int flag, Frame frame);

struct ObjectSnapshot {
  int id = 0;
  Pose pose;
  double joint = 0.0;
};

struct TickRecord {
  int tick = 0;
  double time = 0.0;
  RobotState state;
  ManipulationCommand cmd;  // body frame
  Vec3 desired_world = Vec3::Zero();
  Quat desired_orientation_world;
  std::array<Pose, kNumLegs> toes{};
  RewardTerms reward;
  double position_error = 0.0;     // m
  double orientation_error = 0.0;  // rad
  JointVector action = JointVector::Zero();
  BaseVelocityCommand base_cmd;
  bool out_of_reach = false;
  std::vector<ObjectSnapshot> objects;
};

inline constexpr int kActionsPerPlannerTick = 5;

struct PlannerTick {
  int index = 0;
  int tick = 0;
  std::vector<Vec3> cloud;
  RobotState state;
  int flag = kFlagFrontRight;
  TrajectoryParams params;  // world frame
  bool restarted = false;
  std::array<JointVector, kActionsPerPlannerTick> actions{};
};

struct Episode {
  std::string task;
  std::uint64_t seed = 0;
  double duration = 20.0;
  double tick = 0.02;
  std::vector<TickRecord> ticks;
  std::vector<PlannerTick> planner_ticks;
  std::vector<SceneObject> final_objects;
  bool complete = false;
  std::optional<std::string> fault;
};

struct RunHooks {
  std::function<void(World&, int tick)> before_tick;
  // Called once a planner tick's action slots are filled.
  std::function<void(const PlannerTick&)> planner_tick_done;
  bool record_clouds = true;
};

// Drives one episode tick by tick: planner every planner_every ticks, its
// world-frame params re-expressed in the body frame each tick, then the
// controller and the world step.
class EpisodeRunner {
 public:
  EpisodeRunner(World world, Planner& planner, const ControllerConfig& controller,
                RewardWeights weights, std::string task, std::uint64_t seed, RunHooks hooks = {});

  // No tick limit (live sessions).
  void set_unbounded(bool unbounded) { unbounded_ = unbounded; }
  // Keep per-tick and per-planner-tick logs (default on).
  void set_keep_log(bool keep) { keep_log_ = keep; }
  bool done() const;
  void step();
  Episode finish();

  World& world() { return world_; }
  const World& world() const { return world_; }
  const Episode& episode() const { return episode_; }
  const TickRecord& last() const { return last_; }
  const std::optional<TrajectoryParams>& active_params() const { return active_; }
  const PhaseClock& clock() const { return clock_; }

  // Replace the active world-frame params between ticks.
  void set_params(const TrajectoryParams& params, bool restart_clock);

 private:
  World world_;
  Planner* planner_;
  OracleController controller_;
  RewardWeights weights_;
  RunHooks hooks_;
  Episode episode_;
  TickRecord last_;
  std::optional<TrajectoryParams> active_;
  PhaseClock clock_;
  std::array<RobotState, 3> window_;
  std::optional<PlannerTick> pending_;
  bool unbounded_ = false;
  bool keep_log_ = true;

  void close_planner_tick();
};

Episode run_world_episode(World world, Planner& planner, const ControllerConfig& controller,
                          const RewardWeights& weights, std::string task, std::uint64_t seed,
                          RunHooks hooks = {});

// Little-endian binary dump of the full log; equal logs give equal bytes.
std::vector<std::uint8_t> serialize_episode_log(const Episode& ep);
void save_episode_log(const Episode& ep, const std::filesystem::path& path);

}  // namespace pedi
