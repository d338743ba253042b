#include "pedi/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "bytes.hpp"
#include "pedi/hash.hpp"

namespace pedi {

int SimConfig::ticks() const { return static_cast<int>(std::lround(duration / control_period)); }

int SimConfig::planner_ticks() const { return (ticks() + planner_every - 1) / planner_every; }

void SimConfig::validate() const {
  if (!(control_period > 0.0)) throw std::invalid_argument("SimConfig: control_period must be > 0");
  if (planner_every < 1) throw std::invalid_argument("SimConfig: planner_every must be >= 1");
  if (!(duration > 0.0)) throw std::invalid_argument("SimConfig: duration must be > 0");
  if (!(joint_time_constant > 0.0)) throw std::invalid_argument("SimConfig: joint_time_constant must be > 0");
  if (!(joint_rate_limit > 0.0)) throw std::invalid_argument("SimConfig: joint_rate_limit must be > 0");
  if (cloud_points < 1) throw std::invalid_argument("SimConfig: cloud_points must be >= 1");
}

World::World(QuadrupedModel model, SimConfig cfg, RobotState initial, std::vector<SceneObject> objects)
    : model_(std::move(model)), cfg_(cfg), state_(std::move(initial)), objects_(std::move(objects)) {
  model_.validate();
  cfg_.validate();
  for (std::size_t i = 0; i < objects_.size(); ++i) {
    objects_[i].validate();
    if (objects_[i].id != static_cast<int>(i)) {
      throw std::invalid_argument("World: object ids must be 0..n-1 in order");
    }
  }
  prev_toe_ = flagged_toe();
}

const SceneObject& World::object(int id) const {
  if (id < 0 || id >= static_cast<int>(objects_.size())) {
    throw std::out_of_range("unknown object id " + std::to_string(id));
  }
  return objects_[static_cast<std::size_t>(id)];
}

SceneObject& World::object(int id) {
  return const_cast<SceneObject&>(static_cast<const World&>(*this).object(id));
}

void World::set_flag(int flag) {
  if (flag != kFlagFrontLeft && flag != kFlagFrontRight) {
    throw std::invalid_argument("flag must be 0 or 1");
  }
  if (flag != flag_) {
    flag_ = flag;
    prev_toe_ = flagged_toe();
  }
}

std::array<Pose, kNumLegs> World::toe_poses() const {
  return forward_kinematics(model_, state_.q, state_.base);
}

Vec3 World::flagged_toe() const {
  return transform_point(state_.base, toe_position_body(model_, state_.q, leg_from_flag(flag_)));
}

const RobotState& World::step(const JointVector& q_desired, const BaseVelocityCommand& cmd) {
  if (!q_desired.allFinite() || !std::isfinite(cmd.vx) || !std::isfinite(cmd.vy) ||
      !std::isfinite(cmd.yaw_rate)) {
    throw std::invalid_argument("World::step: non-finite input");
  }
  const double dt = cfg_.control_period;

  const double blend = 1.0 - std::exp(-dt / cfg_.joint_time_constant);
  const double max_move = cfg_.joint_rate_limit * dt;
  const JointVector target = clamp_limits(model_, q_desired);
  JointVector move = blend * (target - state_.q);
  move = move.cwiseMax(-max_move).cwiseMin(max_move);
  const JointVector q_new = clamp_limits(model_, state_.q + move);
  state_.qd = (q_new - state_.q) / dt;
  state_.q = q_new;
  state_.prev_action = q_desired;

  Vec3 v(cmd.vx, cmd.vy, 0.0);
  if (v.norm() > cfg_.max_lin_vel) v *= cfg_.max_lin_vel / v.norm();
  const double yaw_rate = std::clamp(cmd.yaw_rate, -cfg_.max_yaw_rate, cfg_.max_yaw_rate);
  const Vec3 v_world = state_.base.orientation.rotate(v);
  state_.base.position += v_world * dt;
  state_.base.orientation = Quat::from_yaw(yaw_rate * dt) * state_.base.orientation;
  state_.base_lin_vel = v_world;
  state_.base_ang_vel = Vec3(0.0, 0.0, yaw_rate);
  state_.gravity_body = state_.base.orientation.conjugate().rotate(Vec3(0.0, 0.0, -9.81));

  ++tick_;

  ContactInput in;
  in.toe = flagged_toe();
  in.toe_velocity = (in.toe - prev_toe_) / dt;
  in.toe_radius = cfg_.toe_radius;
  in.base_position = state_.base.position;
  in.dt = dt;
  for (SceneObject& obj : objects_) advance_articulation(obj, in);
  prev_toe_ = in.toe;
  return state_;
}

std::vector<Vec3> synth_point_cloud(const World& world, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("synth_point_cloud: n must be >= 1");
  struct Entry {
    const SceneObject* obj;
    const Part* part;
  };
  std::vector<Entry> entries;
  std::vector<double> areas;
  for (const SceneObject& obj : world.objects()) {
    if (!obj.visible) continue;
    for (const Part& p : obj.parts) {
      entries.push_back({&obj, &p});
      areas.push_back(surface_area(p.shape));
    }
  }
  if (entries.empty()) throw std::invalid_argument("synth_point_cloud: scene has no visible surfaces");

  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(areas.begin(), areas.end());
  std::vector<Vec3> cloud;
  cloud.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Entry& e = entries[pick(rng)];
    cloud.push_back(transform_point(e.obj->part_pose_world(*e.part), sample_surface(e.part->shape, rng)));
  }
  return cloud;
}

void apply_perturbation(World& world, int object_id, const Pose& delta) {
  SceneObject& obj = world.object(object_id);
  obj.pose = compose(delta, obj.pose);
}

TrajectoryParams constant_params(const Vec3& p, const Quat& orientation, int flag, Frame frame) {
  TrajectoryParams out;
  out.flag = flag;
  out.curve.points.fill(p);
  out.curve.weights.fill(1.0);
  out.orientation = {orientation, orientation};
  out.frame = frame;
  return out;
}

PlannerOutput HoldPlanner::plan(const PlannerContext& ctx) {
  if (!held_) {
    const Leg leg = leg_from_flag(flag_);
    const RobotState& s = *ctx.state;
    const QuadrupedModel& m = ctx.world->model();
    const Vec3 toe = transform_point(s.base, toe_position_body(m, s.q, leg));
    const Quat ori = s.base.orientation * toe_orientation_from_direction(toe_direction_body(m, s.q, leg));
    held_ = constant_params(toe, ori, flag_, Frame::world);
  }
  return {*held_, false};
}

EpisodeRunner::EpisodeRunner(World world, Planner& planner, const ControllerConfig& controller,
                             RewardWeights weights, std::string task, std::uint64_t seed, RunHooks hooks)
    : world_(std::move(world)),
      planner_(&planner),
      controller_(world_.model(), controller),
      weights_(weights),
      hooks_(std::move(hooks)) {
  controller_.reset(world_.state());
  episode_.task = std::move(task);
  episode_.seed = seed;
  episode_.duration = world_.config().duration;
  episode_.tick = world_.config().control_period;
  window_.fill(world_.state());
}

bool EpisodeRunner::done() const {
  return episode_.fault.has_value() || (!unbounded_ && world_.tick() >= world_.config().ticks());
}

void EpisodeRunner::set_params(const TrajectoryParams& params, bool restart_clock) {
  if (params.frame != Frame::world) throw std::invalid_argument("set_params: params must be world-frame");
  params.validate();
  if (!active_ || restart_clock) clock_ = PhaseClock{world_.time(), params.duration};
  clock_.duration = params.duration;
  active_ = params;
}

void EpisodeRunner::close_planner_tick() {
  if (!pending_) return;
  if (hooks_.planner_tick_done) hooks_.planner_tick_done(*pending_);
  if (keep_log_) {
    if (!hooks_.record_clouds) pending_->cloud.clear();
    episode_.planner_ticks.push_back(std::move(*pending_));
  }
  pending_.reset();
}

void EpisodeRunner::step() {
  if (done()) return;
  const SimConfig& cfg = world_.config();
  const int k = world_.tick();
  const double dt = cfg.control_period;
  try {
    if (hooks_.before_tick) hooks_.before_tick(world_, k);
    const RobotState s = world_.state();

    if (k % cfg.planner_every == 0) {
      close_planner_tick();
      PlannerTick pt;
      pt.index = k / cfg.planner_every;
      pt.tick = k;
      pt.state = s;
      pt.cloud = synth_point_cloud(world_, cfg.cloud_points, mix_seed(episode_.seed, static_cast<std::uint64_t>(k)));
      PlannerContext ctx{pt.index, k, world_.time(), pt.cloud, &s, &world_};
      PlannerOutput out = planner_->plan(ctx);
      pt.restarted = !active_ || out.restart_clock;
      set_params(out.params, out.restart_clock);
      pt.params = *active_;
      pt.flag = active_->flag;
      pending_ = std::move(pt);
    }
    if (!active_) throw std::logic_error("no active trajectory parameters");

    const TrajectoryParams body = express_params(*active_, s.base, Frame::body);
    const ManipulationCommand cmd = build_command(body, clock_, world_.time(), dt);
    world_.set_flag(cmd.flag);
    const OracleController::Output ctrl = controller_.act(s, cmd);

    window_[0] = window_[1];
    window_[1] = window_[2];
    window_[2] = s;

    TickRecord rec;
    rec.tick = k;
    rec.time = world_.time();
    rec.state = s;
    rec.cmd = cmd;
    rec.desired_world = transform_point(s.base, cmd.desired_point);
    rec.desired_orientation_world = s.base.orientation * cmd.desired_orientation;
    rec.toes = world_.toe_poses();
    const Pose& toe = rec.toes[static_cast<std::size_t>(leg_index(leg_from_flag(cmd.flag)))];
    rec.position_error = (toe.position - rec.desired_world).norm();
    rec.orientation_error = quat_angle_between(toe.orientation, rec.desired_orientation_world);
    rec.reward = compute_reward(world_.model(), window_, cmd, weights_, dt);
    rec.action = ctrl.action;
    rec.base_cmd = ctrl.base;
    rec.out_of_reach = ctrl.out_of_reach;
    rec.objects.reserve(world_.objects().size());
    for (const SceneObject& o : world_.objects()) rec.objects.push_back({o.id, o.pose, o.joint_coordinate()});
    if (pending_) pending_->actions[static_cast<std::size_t>(k % cfg.planner_every) % kActionsPerPlannerTick] = ctrl.action;

    world_.step(ctrl.filtered, ctrl.base);
    last_ = rec;
    if (keep_log_) episode_.ticks.push_back(std::move(rec));
  } catch (const std::exception& e) {
    episode_.fault = "tick " + std::to_string(k) + ": " + e.what();
  }
}

Episode EpisodeRunner::finish() {
  while (!done()) step();
  close_planner_tick();
  episode_.complete = !episode_.fault && world_.tick() >= world_.config().ticks();
  episode_.final_objects = world_.objects();
  return std::move(episode_);
}

Episode run_world_episode(World world, Planner& planner, const ControllerConfig& controller,
                          const RewardWeights& weights, std::string task, std::uint64_t seed,
                          RunHooks hooks) {
  EpisodeRunner runner(std::move(world), planner, controller, weights, std::move(task), seed, std::move(hooks));
  return runner.finish();
}

namespace {

void put_vec(detail::ByteWriter& w, const Vec3& v) {
  for (int i = 0; i < 3; ++i) w.put<double>(v[i]);
}
void put_quat(detail::ByteWriter& w, const Quat& q) {
  for (double c : q.wxyz()) w.put<double>(c);
}
void put_pose(detail::ByteWriter& w, const Pose& p) {
  put_vec(w, p.position);
  put_quat(w, p.orientation);
}
void put_joints(detail::ByteWriter& w, const JointVector& q) {
  for (int i = 0; i < kNumJoints; ++i) w.put<double>(q[i]);
}
void put_state(detail::ByteWriter& w, const RobotState& s) {
  put_pose(w, s.base);
  put_vec(w, s.base_lin_vel);
  put_vec(w, s.base_ang_vel);
  put_joints(w, s.q);
  put_joints(w, s.qd);
  put_joints(w, s.prev_action);
  put_vec(w, s.gravity_body);
}
void put_params(detail::ByteWriter& w, const TrajectoryParams& p) {
  for (double v : to_record(p)) w.put<double>(v);
}

}  // namespace

std::vector<std::uint8_t> serialize_episode_log(const Episode& ep) {
  detail::ByteWriter w;
  w.put_bytes(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>("PEDILOG1"), 8));
  w.put_string(ep.task);
  w.put<std::uint64_t>(ep.seed);
  w.put<double>(ep.duration);
  w.put<double>(ep.tick);
  w.put<std::uint8_t>(ep.complete ? 1 : 0);
  w.put_string(ep.fault.value_or(""));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ep.ticks.size()));
  for (const TickRecord& r : ep.ticks) {
    w.put<std::int32_t>(r.tick);
    w.put<double>(r.time);
    put_state(w, r.state);
    w.put<std::int32_t>(r.cmd.flag);
    put_vec(w, r.cmd.desired_point);
    for (const Vec3& p : r.cmd.lookahead) put_vec(w, p);
    put_quat(w, r.cmd.desired_orientation);
    put_vec(w, r.desired_world);
    put_quat(w, r.desired_orientation_world);
    for (const Pose& t : r.toes) put_pose(w, t);
    for (double v : {r.reward.pos_xy, r.reward.pos_z, r.reward.ori, r.reward.ee_accel,
                     r.reward.base_accel, r.reward.total}) {
      w.put<double>(v);
    }
    w.put<double>(r.position_error);
    w.put<double>(r.orientation_error);
    put_joints(w, r.action);
    w.put<double>(r.base_cmd.vx);
    w.put<double>(r.base_cmd.vy);
    w.put<double>(r.base_cmd.yaw_rate);
    w.put<std::uint8_t>(r.out_of_reach ? 1 : 0);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(r.objects.size()));
    for (const ObjectSnapshot& o : r.objects) {
      w.put<std::int32_t>(o.id);
      put_pose(w, o.pose);
      w.put<double>(o.joint);
    }
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ep.planner_ticks.size()));
  for (const PlannerTick& p : ep.planner_ticks) {
    w.put<std::int32_t>(p.index);
    w.put<std::int32_t>(p.tick);
    w.put<std::uint8_t>(p.restarted ? 1 : 0);
    put_state(w, p.state);
    put_params(w, p.params);
    for (const JointVector& a : p.actions) put_joints(w, a);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(p.cloud.size()));
    for (const Vec3& c : p.cloud) put_vec(w, c);
  }
  return std::move(w.bytes());
}

void save_episode_log(const Episode& ep, const std::filesystem::path& path) {
  const auto bytes = serialize_episode_log(ep);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace pedi
