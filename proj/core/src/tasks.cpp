#include "pedi/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <stdexcept>

#include "pedi/hash.hpp"

namespace pedi {

namespace {

constexpr double kDeg = M_PI / 180.0;

Vec3 vec(const KeyValueFile& f, std::string_view key) {
  const auto v = f.get_doubles(key, 3);
  return {v[0], v[1], v[2]};
}

Interval interval(const KeyValueFile& f, std::string_view key) {
  const auto v = f.get_doubles(key, 2);
  if (v[0] > v[1]) throw ConfigError(f.source(), f.at(key).line, std::string(key), "lower bound above upper bound");
  return {v[0], v[1]};
}

Quat axis_to(const Vec3& axis) { return Quat::from_two_vectors(Vec3::UnitZ(), axis.normalized()); }

Part box(const Vec3& size, const Vec3& center, bool on_link = false) {
  return {Box{size / 2.0}, Pose{center, Quat()}, on_link};
}

// Cylinder between two points.
Part rod(const Vec3& a, const Vec3& b, double radius, bool on_link = false) {
  const Vec3 d = b - a;
  return {Cylinder{radius, d.norm() / 2.0}, Pose{(a + b) / 2.0, axis_to(d)}, on_link};
}

SceneObject make(int id, std::string name, const Pose& pose) {
  SceneObject o;
  o.id = id;
  o.name = std::move(name);
  o.pose = pose;
  return o;
}

std::vector<SceneObject> build_button(const KeyValueFile& f, const Pose& pose) {
  SceneObject b = make(0, "button", pose);
  const double r = f.get_double("button.diameter") / 2.0;
  b.parts.push_back({Hemisphere{r}, Pose::identity(), false});
  Latch l;
  l.radius = r;
  l.press_depth = f.get_double("button.press_depth");
  b.articulation = l;
  b.interaction_radius = r + 0.02;
  return {b};
}

std::vector<SceneObject> build_lever(const KeyValueFile& f, const Pose& pose) {
  SceneObject o = make(0, "handle", pose);
  const Vec3 cab = vec(f, "cabinet.size");
  o.parts.push_back(box(cab, Vec3(cab.x() / 2.0, 0.0, cab.z() / 2.0)));
  const Vec3 pivot = vec(f, "lever.pivot");
  const double len = f.get_double("lever.length");
  o.parts.push_back(rod(pivot, pivot + Vec3(0.0, 0.0, len), 0.012, true));
  Hinge h;
  h.pivot = pivot;
  h.axis = Vec3(0.0, -1.0, 0.0);
  h.hi = f.get_double("hinge.max_deg") * kDeg;
  o.articulation = h;
  o.handle = pivot + Vec3(0.0, 0.0, len);
  o.interaction_radius = f.get_double("interaction_radius");
  o.gain = f.get_double("gain");
  return {o};
}

std::vector<SceneObject> build_door(const KeyValueFile& f, const Pose& pose) {
  SceneObject o = make(0, "door", pose);
  const double width = f.get_double("door.width");
  const double height = f.get_double("door.height");
  const double thick = f.get_double("door.thickness");
  const double hinge_y = f.get_double("door.hinge_y");
  o.parts.push_back(box(Vec3(thick, width, height), Vec3(thick / 2.0, hinge_y - width / 2.0, height / 2.0 + 0.02), true));
  o.parts.push_back(rod(Vec3(thick / 2.0, hinge_y + 0.05, 0.0), Vec3(thick / 2.0, hinge_y + 0.05, height + 0.1), 0.04));
  o.parts.push_back(rod(Vec3(thick / 2.0, hinge_y - width - 0.05, 0.0),
                        Vec3(thick / 2.0, hinge_y - width - 0.05, height + 0.1), 0.04));
  Hinge h;
  h.pivot = Vec3(thick / 2.0, hinge_y, 0.0);
  h.axis = Vec3::UnitZ();
  h.hi = f.get_double("hinge.max_deg") * kDeg;
  o.articulation = h;
  o.handle = vec(f, "door.push_point");
  o.interaction_radius = f.get_double("interaction_radius");
  o.gain = f.get_double("gain");
  o.drive = Drive::positive;
  return {o};
}

std::vector<SceneObject> build_basket(const KeyValueFile& f, const Pose& pose) {
  SceneObject o = make(0, "basket", pose);
  const Vec3 size = vec(f, "basket.size");
  const double grip_z = f.get_double("basket.grip_height");
  o.parts.push_back(box(size, Vec3(0.0, 0.0, size.z() / 2.0)));
  const double hy = size.y() / 2.0;
  o.parts.push_back(rod(Vec3(0.0, -hy, size.z()), Vec3(0.0, -hy, grip_z), 0.01));
  o.parts.push_back(rod(Vec3(0.0, hy, size.z()), Vec3(0.0, hy, grip_z), 0.01));
  o.parts.push_back(rod(Vec3(0.0, -hy, grip_z), Vec3(0.0, hy, grip_z), 0.01));
  o.articulation = Carry{};
  o.handle = Vec3(0.0, 0.0, grip_z);
  o.interaction_radius = f.get_double("interaction_radius");
  return {o};
}

std::vector<SceneObject> build_dishwasher(const KeyValueFile& f, const Pose& pose) {
  SceneObject o = make(0, "dishwasher", pose);
  const Vec3 body = vec(f, "body.size");
  const double door_h = f.get_double("door.height");
  const double hinge_z = f.get_double("door.hinge_height");
  const double thick = 0.04;
  o.parts.push_back(box(body, Vec3(body.x() / 2.0 + 0.01, 0.0, body.z() / 2.0)));
  o.parts.push_back(box(Vec3(thick, body.y(), door_h), Vec3(-thick / 2.0, 0.0, hinge_z + door_h / 2.0), true));
  const Vec3 grip = vec(f, "door.handle");
  o.parts.push_back(rod(grip - Vec3(0.0, 0.2, 0.0), grip + Vec3(0.0, 0.2, 0.0), 0.012, true));
  Hinge h;
  h.pivot = Vec3(0.0, 0.0, hinge_z);
  h.axis = Vec3(0.0, -1.0, 0.0);
  h.hi = f.get_double("hinge.max_deg") * kDeg;
  h.angle = f.get_double("hinge.initial_deg") * kDeg;
  o.articulation = h;
  o.handle = grip;
  o.interaction_radius = f.get_double("interaction_radius");
  o.gain = f.get_double("gain");
  return {o};
}

std::vector<SceneObject> build_table(const KeyValueFile& f, const Pose& pose) {
  SceneObject o = make(0, "table", pose);
  const Vec3 top = vec(f, "table.top");
  const double height = f.get_double("table.height");
  o.parts.push_back(box(top, Vec3(0.0, 0.0, height - top.z() / 2.0)));
  for (double sx : {-1.0, 1.0}) {
    for (double sy : {-1.0, 1.0}) {
      const Vec3 foot(sx * (top.x() / 2.0 - 0.04), sy * (top.y() / 2.0 - 0.04), 0.0);
      o.parts.push_back(rod(foot, foot + Vec3(0.0, 0.0, height - top.z()), 0.02));
    }
  }
  const double item = f.get_double("item.size");
  o.parts.push_back(box(Vec3::Constant(item), Vec3(0.0, 0.0, height + item / 2.0), true));
  Slider s;
  s.axis = Vec3(-1.0, 0.0, 0.0);
  s.hi = top.x();
  s.drop_at = top.x() / 2.0 + item / 2.0;
  s.drop_height = height;
  o.articulation = s;
  o.handle = Vec3(item / 2.0, 0.0, height + item / 2.0);
  o.interaction_radius = f.get_double("interaction_radius");
  o.gain = f.get_double("gain");
  o.drive = Drive::positive;
  return {o};
}

std::vector<SceneObject> build_valve(const KeyValueFile& f, const Pose& pose) {
  SceneObject o = make(0, "valve", pose);
  const double r = f.get_double("valve.diameter") / 2.0;
  const double axis_z = f.get_double("valve.axis_height");
  o.parts.push_back(rod(Vec3(0.12, 0.0, 0.0), Vec3(0.12, 0.0, axis_z), 0.04));
  o.parts.push_back(rod(Vec3(0.0, 0.0, axis_z), Vec3(0.12, 0.0, axis_z), 0.02));
  o.parts.push_back({Cylinder{r, 0.015}, Pose{Vec3(0.0, 0.0, axis_z), axis_to(Vec3::UnitX())}, true});
  o.parts.push_back(box(Vec3(0.02, 2.0 * r, 0.02), Vec3(0.0, 0.0, axis_z), true));
  Hinge h;
  h.pivot = Vec3(0.0, 0.0, axis_z);
  h.axis = Vec3::UnitX();
  h.hi = f.get_double("hinge.max_deg") * kDeg;
  o.articulation = h;
  o.handle = Vec3(0.0, -r, axis_z);
  o.interaction_radius = f.get_double("interaction_radius");
  o.gain = f.get_double("gain");
  o.drive = Drive::positive;
  return {o};
}

std::vector<SceneObject> build_ball(const KeyValueFile& f, const Pose& pose) {
  SceneObject ball = make(0, "ball", pose);
  const double r = f.get_double("ball.radius");
  ball.parts.push_back({Sphere{r}, Pose{Vec3(0.0, 0.0, r), Quat()}, false});
  Rolling roll;
  roll.radius = r;
  roll.kick_gain = f.get_double("ball.kick_gain");
  roll.decel = f.get_double("ball.decel");
  const auto gx = f.get_doubles("goal.x", 2);
  const double half_w = f.get_double("goal.width") / 2.0;
  const double goal_h = f.get_double("goal.height");
  const Vec3 centre((gx[0] + gx[1]) / 2.0, 0.0, goal_h / 2.0);
  roll.net_pose = compose(pose, Pose{centre, Quat()});
  roll.net_half_extents = Vec3((gx[1] - gx[0]) / 2.0, half_w, goal_h / 2.0);
  ball.articulation = roll;
  ball.handle = Vec3(0.0, 0.0, r);
  ball.interaction_radius = r + 0.02;

  SceneObject goal = make(1, "goal", pose);
  for (double x : {gx[0], gx[1]}) {
    for (double y : {-half_w, half_w}) goal.parts.push_back(rod(Vec3(x, y, 0.0), Vec3(x, y, goal_h), 0.03));
    goal.parts.push_back(rod(Vec3(x, -half_w, goal_h), Vec3(x, half_w, goal_h), 0.03));
  }
  return {ball, goal};
}

using Builder = std::vector<SceneObject> (*)(const KeyValueFile&, const Pose&);

const std::map<std::string, Builder, std::less<>>& builders() {
  static const std::map<std::string, Builder, std::less<>> m = {
      {"press_button", build_button},       {"pull_handle", build_lever},
      {"push_door", build_door},            {"lift_basket", build_basket},
      {"open_dishwasher", build_dishwasher}, {"close_dishwasher", build_dishwasher},
      {"pull_objects", build_table},        {"twist_valve", build_valve},
      {"shoot_ball", build_ball},
  };
  return m;
}

// Final-state predicate selected by success.kind, on object 0.
bool evaluate_success(const std::vector<SceneObject>& objects, const KeyValueFile& f) {
  const SceneObject& o = objects.at(0);
  const std::string kind = f.get_string("success.kind");
  if (kind == "latch") return std::get<Latch>(o.articulation).pressed;
  if (kind == "angle_at_least") return std::get<Hinge>(o.articulation).angle >= f.get_double("success.deg") * kDeg;
  if (kind == "angle_at_most") return std::get<Hinge>(o.articulation).angle <= f.get_double("success.deg") * kDeg;
  if (kind == "slid_past_edge") {
    return std::get<Slider>(o.articulation).offset >= f.get_doubles("table.top", 3)[0] / 2.0;
  }
  if (kind == "carried") {
    const Carry& c = std::get<Carry>(o.articulation);
    return o.pose.position.z() >= f.get_double("success.height") &&
           c.carried_distance >= f.get_double("success.carry_distance");
  }
  if (kind == "in_goal") {
    const Rolling& r = std::get<Rolling>(o.articulation);
    const Vec3 local = transform_point(invert(*r.net_pose), o.handle_world());
    return (local.cwiseAbs().array() <= r.net_half_extents.array()).all();
  }
  throw ConfigError(f.source(), f.at("success.kind").line, "success.kind", "unknown predicate '" + kind + "'");
}

constexpr std::uint64_t kPlacementStream = 0x706c616365ULL;

}  // namespace

std::string task_names_joined() {
  std::string out;
  for (std::string_view n : kTaskNames) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

TaskSpec load_task(std::string_view name, const std::filesystem::path& dir) {
  const auto it = builders().find(name);
  if (it == builders().end()) {
    throw std::invalid_argument("unknown task '" + std::string(name) + "'; valid tasks: " + task_names_joined());
  }
  TaskSpec t;
  t.name = std::string(name);
  t.config = KeyValueFile::load(dir / (t.name + ".cfg"));
  t.expert = load_params(dir / (t.name + ".traj"));
  if (t.expert.frame != Frame::object) {
    throw ConfigError((dir / (t.name + ".traj")).string(), 0, "frame", "expert template must be in the object frame");
  }
  t.place_x = interval(t.config, "place.x");
  t.place_y = interval(t.config, "place.y");
  t.place_yaw = interval(t.config, "place.yaw");
  const Builder b = it->second;
  t.build = b;
  t.succeeded = evaluate_success;
  // Build once so bad dimensions or keys surface at load time.
  for (const SceneObject& o : b(t.config, Pose::identity())) o.validate();
  evaluate_success(b(t.config, Pose::identity()), t.config);
  return t;
}

const TaskSpec& task(std::string_view name) {
  static std::once_flag once;
  static std::map<std::string, TaskSpec, std::less<>> registry;
  std::call_once(once, [] {
    for (std::string_view n : kTaskNames) registry.emplace(std::string(n), load_task(n, data_dir() / "tasks"));
  });
  const auto it = registry.find(name);
  if (it == registry.end()) {
    throw std::invalid_argument("unknown task '" + std::string(name) + "'; valid tasks: " + task_names_joined());
  }
  return it->second;
}

TaskInstance instantiate(const TaskSpec& t, std::uint64_t seed, const QuadrupedModel& model, const SimConfig& sim) {
  std::mt19937_64 rng(mix_seed(seed, kPlacementStream));
  const auto draw = [&](const Interval& i) { return std::uniform_real_distribution<double>(i.lo, i.hi)(rng); };
  const double x = draw(t.place_x);
  const double y = draw(t.place_y);
  const double yaw = draw(t.place_yaw);
  const Pose pose = Pose::planar(x, y, yaw);
  std::vector<SceneObject> objects = t.build(t.config, pose);
  std::vector<Pose> poses;
  for (const SceneObject& o : objects) poses.push_back(o.pose);
  return {World(model, sim, stance_state(model, Pose::identity()), std::move(objects)), std::move(poses)};
}

TrajectoryParams expert_params(const TaskSpec& t, const Pose& object_pose, const Pose& base) {
  TrajectoryParams p = express_params(t.expert, object_pose, Frame::world);
  const double lateral = transform_point(invert(base), object_pose.position).y();
  p.flag = lateral > 0.0 ? kFlagFrontLeft : kFlagFrontRight;
  return p;
}

bool success(const TaskSpec& t, const std::vector<SceneObject>& objects) { return t.succeeded(objects, t.config); }

bool success(const TaskSpec& t, const Episode& ep) {
  if (ep.fault) throw std::invalid_argument("success: episode faulted: " + *ep.fault);
  if (!ep.complete) throw std::invalid_argument("success: episode is incomplete");
  return success(t, ep.final_objects);
}

ScriptedExpertPlanner::ScriptedExpertPlanner(const TaskSpec& t, ExpertConfig cfg) : task_(&t), cfg_(cfg) {}

PlannerOutput ScriptedExpertPlanner::plan(const PlannerContext& ctx) {
  const SceneObject& obj = ctx.world->object(0);
  const RobotState& s = *ctx.state;
  bool restart = false;
  if (!have_anchor_) {
    anchor_ = obj.pose;
    have_anchor_ = true;
    flag_ = expert_params(*task_, anchor_, s.base).flag;
  } else if (!obj.touched) {
    const double moved = (obj.pose.position - anchor_.position).norm();
    const double turned = quat_angle_between(obj.pose.orientation, anchor_.orientation);
    if (moved > cfg_.replan_distance || turned > cfg_.replan_angle) {
      anchor_ = obj.pose;
      started_ = false;
    }
  }
  TrajectoryParams p = expert_params(*task_, anchor_, s.base);
  p.flag = flag_;
  if (!started_) {
    // Hold at the first point until the toe gets there, then play the template.
    const Leg leg = leg_from_flag(flag_);
    const Vec3 toe = transform_point(s.base, toe_position_body(ctx.world->model(), s.q, leg));
    started_ = (toe - p.curve.points[0]).norm() < cfg_.start_tolerance;
    if (!started_) return {constant_params(p.curve.points[0], p.orientation.start, flag_, Frame::world), false};
    restart = true;
  }
  return {p, restart};
}

Episode run_episode(const TaskSpec& t, Planner& planner, const ControllerConfig& controller, std::uint64_t seed,
                    RunHooks hooks, const QuadrupedModel* model, const SimConfig& sim, const RewardWeights& weights) {
  const QuadrupedModel m = model ? *model : QuadrupedModel::load_default();
  TaskInstance inst = instantiate(t, seed, m, sim);
  return run_world_episode(std::move(inst.world), planner, controller, weights, t.name, seed, std::move(hooks));
}

}  // namespace pedi
