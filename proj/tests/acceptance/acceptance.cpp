// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pedi/collect.hpp"
#include "pedi/curves.hpp"
#include "pedi/dataset.hpp"
#include "pedi/hash.hpp"
#include "pedi/teleop.hpp"
#include "pedi/tracking.hpp"

using namespace pedi;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

const QuadrupedModel& model() {
  static const QuadrupedModel m = QuadrupedModel::load_default();
  return m;
}

// Accumulates failures for one criterion; keeps the first few messages.
struct Check {
  int failures = 0;
  std::vector<std::string> notes;
  void require(bool ok, const std::string& what) {
    if (ok) return;
    ++failures;
    if (notes.size() < 5) notes.push_back(what);
  }
};

int g_failed = 0;

void report(const std::string& name, const Check& c, const std::string& detail, Clock::time_point t0) {
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  std::printf("%s  %-22s %s (%.1f s)\n", c.failures ? "FAIL" : "PASS", name.c_str(), detail.c_str(), secs);
  for (const std::string& n : c.notes) std::printf("      %s\n", n.c_str());
  std::fflush(stdout);
  g_failed += c.failures ? 1 : 0;
}

template <class... A>
std::string fmt(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

Vec3 random_vec(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

Quat random_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Quat(n(rng), n(rng), n(rng), n(rng));
}

Pose random_pose(std::mt19937_64& rng) { return {random_vec(rng, -2.0, 2.0), random_quat(rng)}; }

double params_distance(const TrajectoryParams& a, const TrajectoryParams& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < kControlPoints; ++i) d = std::max(d, (a.curve.points[i] - b.curve.points[i]).norm());
  d = std::max(d, quat_angle_between(a.orientation.start, b.orientation.start));
  return std::max(d, quat_angle_between(a.orientation.end, b.orientation.end));
}

// ---------------------------------------------------------------------------

void curve_core() {
  const auto t0 = Clock::now();
  Check c;
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0), w(1.0, 2000.0);
  double worst = 0.0, worst_end = 0.0, worst_scale = 0.0;
  for (int i = 0; i < 10000; ++i) {
    RationalBezier curve;
    for (std::size_t k = 0; k < kControlPoints; ++k) {
      curve.points[k] = random_vec(rng, -2.0, 2.0);
      curve.weights[k] = w(rng);
    }
    const double t = u(rng);
    const double d = (bezier_eval(curve, t) - bezier_eval_oracle(curve, t)).norm();
    worst = std::max(worst, d);
    c.require(d < 1e-9, fmt("oracle gap %.3g at t=%.6f", d, t));
    const double e = std::max((bezier_eval(curve, 0.0) - curve.points.front()).norm(),
                              (bezier_eval(curve, 1.0) - curve.points.back()).norm());
    worst_end = std::max(worst_end, e);
    c.require(e < 1e-12, fmt("endpoint gap %.3g", e));
    RationalBezier scaled = curve;
    const double s = 0.01 + 100.0 * u(rng);
    for (double& x : scaled.weights) x *= s;
    const double g = (bezier_eval(curve, t) - bezier_eval(scaled, t)).norm();
    worst_scale = std::max(worst_scale, g);
    c.require(g < 1e-9, fmt("weight scaling gap %.3g", g));
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  c.require(secs < 5.0, fmt("took %.2f s", secs));
  report("curve core", c, fmt("10^4 samples: oracle %.1e, endpoints %.1e, scaling %.1e", worst, worst_end, worst_scale),
         t0);
}

void slerp_props() {
  const auto t0 = Clock::now();
  Check c;
  std::mt19937_64 rng(102);
  double worst_norm = 0.0, worst_lin = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Quat a = random_quat(rng), b = random_quat(rng);
    const double total = quat_angle_between(a, b);
    for (int k = 0; k <= 20; ++k) {
      const double t = k / 20.0;
      const Quat q = slerp(a, b, t);
      worst_norm = std::max(worst_norm, std::abs(q.norm() - 1.0));
      worst_lin = std::max(worst_lin, std::abs(quat_angle_between(a, q) - t * total));
    }
    c.require(std::abs(std::abs(slerp(a, b, 0.0).dot(a)) - 1.0) < 1e-15, "t=0 is not q0");
    c.require(std::abs(std::abs(slerp(a, b, 1.0).dot(b)) - 1.0) < 1e-15, "t=1 is not q1");
  }
  c.require(worst_norm < 1e-9, fmt("norm drift %.3g", worst_norm));
  c.require(worst_lin < 1e-7, fmt("angle not linear in t: %.3g", worst_lin));
  // Degenerate endpoints, down to identical.
  for (double eps : {1e-6, 1e-9, 1e-12, 1e-15, 0.0}) {
    const Quat a = Quat::from_yaw(0.4), b = Quat::from_yaw(0.4 + eps);
    for (double t : {0.0, 0.25, 0.5, 1.0}) {
      const Quat q = slerp(a, b, t);
      bool finite = true;
      for (double x : q.wxyz()) finite = finite && std::isfinite(x);
      c.require(finite, fmt("NaN at eps=%.0e", eps));
      c.require(std::abs(q.norm() - 1.0) < 1e-9, "degenerate case not unit");
    }
  }
  report("slerp", c, fmt("norm %.1e, linearity %.1e, degenerate ok", worst_norm, worst_lin), t0);
}

void frames() {
  const auto t0 = Clock::now();
  Check c;
  std::mt19937_64 rng(103);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Pose base = random_pose(rng), obj = random_pose(rng), a = random_pose(rng), b = random_pose(rng);
    const TrajectoryParams body = sample_random_params(static_cast<std::uint64_t>(i));
    const TrajectoryParams world = express_params(body, base, Frame::world);
    double d = params_distance(express_params(world, base, Frame::body), body);
    TrajectoryParams o = body;
    o.frame = Frame::object;
    d = std::max(d, params_distance(express_params(express_params(o, obj, Frame::world), obj, Frame::object), o));
    d = std::max(d, params_distance(transform_params(transform_params(body, b), a), transform_params(body, compose(a, b))));
    for (std::size_t k = 0; k < kControlPoints; ++k) {
      d = std::max(d, (world.curve.points[k] - transform_point(base, body.curve.points[k])).norm());
    }
    d = std::max(d, quat_angle_between(world.orientation.start, base.orientation * body.orientation.start));
    worst = std::max(worst, d);
    c.require(d < 1e-9, fmt("pose %d: %.3g", i, d));
  }
  report("frames", c, fmt("10^3 poses, worst %.1e", worst), t0);
}

void kinematics() {
  const auto t0 = Clock::now();
  Check c;
  const QuadrupedModel& m = model();
  std::mt19937_64 rng(104);
  double worst_j = 0.0, worst_fk = 0.0;
  for (int i = 0; i < 1000; ++i) {
    JointVector q;
    for (int j = 0; j < kNumJoints; ++j) q[j] = std::uniform_real_distribution<double>(m.lower[j], m.upper[j])(rng);
    for (int l = 0; l < kNumLegs; ++l) {
      const Leg leg = static_cast<Leg>(l);
      Mat3 fd;
      const double h = 1e-6;
      for (int k = 0; k < 3; ++k) {
        JointVector qp = q, qm = q;
        qp[kJointsPerLeg * l + k] += h;
        qm[kJointsPerLeg * l + k] -= h;
        fd.col(k) = (toe_position_body(m, qp, leg) - toe_position_body(m, qm, leg)) / (2 * h);
      }
      const Mat3 jac = jacobian(m, q, leg);
      const double rel = (jac - fd).norm() / std::max(jac.norm(), 1e-12);
      worst_j = std::max(worst_j, rel);
      c.require(rel < 1e-4, fmt("Jacobian rel err %.3g", rel));
    }
    const Pose base = random_pose(rng);
    const auto local = forward_kinematics(m, q, Pose::identity());
    const auto world = forward_kinematics(m, q, base);
    for (std::size_t l = 0; l < kNumLegs; ++l) {
      const Pose expect = compose(base, local[l]);
      const double d = std::max((world[l].position - expect.position).norm(),
                                quat_angle_between(world[l].orientation, expect.orientation));
      worst_fk = std::max(worst_fk, d);
      c.require(d < 1e-9, fmt("FK equivariance gap %.3g", d));
    }
  }
  report("kinematics", c, fmt("10^3 configs, Jacobian rel %.1e, FK %.1e", worst_j, worst_fk), t0);
}

// Closest reachable toe point by brute force: a joint-box grid, then a
// pattern search from the best cells.
Vec3 closest_reachable(Leg leg, const Vec3& target) {
  const QuadrupedModel& m = model();
  const int base = kJointsPerLeg * leg_index(leg);
  auto dist = [&](const JointVector& x) { return (toe_position_body(m, x, leg) - target).norm(); };
  const int n = 40;
  std::vector<std::pair<double, JointVector>> cells;
  cells.reserve((n + 1) * (n + 1) * (n + 1));
  JointVector q = m.stance;
  for (int a = 0; a <= n; ++a) {
    for (int b = 0; b <= n; ++b) {
      for (int cc = 0; cc <= n; ++cc) {
        const int idx[3] = {a, b, cc};
        for (int j = 0; j < 3; ++j) q[base + j] = m.lower[base + j] + (m.upper[base + j] - m.lower[base + j]) * idx[j] / n;
        cells.emplace_back(dist(q), q);
      }
    }
  }
  const std::size_t keep = 30;
  std::partial_sort(cells.begin(), cells.begin() + keep, cells.end(),
                    [](const auto& x, const auto& y) { return x.first < y.first; });
  double overall = 1e300;
  JointVector overall_q = m.stance;
  for (std::size_t s = 0; s < keep; ++s) {
    auto [best, best_q] = cells[s];
    for (double step = 0.1; step > 1e-10;) {
      bool improved = false;
      for (int code = 0; code < 27; ++code) {
        if (code == 13) continue;
        JointVector t = best_q;
        for (int j = 0, k = code; j < 3; ++j, k /= 3) {
          t[base + j] = std::clamp(t[base + j] + (k % 3 - 1) * step, m.lower[base + j], m.upper[base + j]);
        }
        const double d = dist(t);
        if (d < best) {
          best = d;
          best_q = t;
          improved = true;
        }
      }
      if (!improved) step *= 0.5;
    }
    if (best < overall) {
      overall = best;
      overall_q = best_q;
    }
  }
  return toe_position_body(m, overall_q, leg);
}

ManipulationCommand static_command(int flag, const Vec3& p) {
  ManipulationCommand cmd;
  cmd.flag = flag;
  cmd.desired_point = p;
  cmd.lookahead = {p, p, p};
  return cmd;
}

void ik_oracle() {
  const auto t0 = Clock::now();
  Check c;
  const QuadrupedModel& m = model();
  const ControllerConfig cfg;
  std::mt19937_64 rng(105);
  int tested = 0, worst_ticks = 0;
  double worst_ori = 0.0;
  while (tested < 500) {
    const int flag = tested % 2;
    const Leg leg = leg_from_flag(flag);
    JointVector q = m.stance;
    for (int j = 0; j < kJointsPerLeg; ++j) {
      const int i = kJointsPerLeg * leg_index(leg) + j;
      q[i] = std::uniform_real_distribution<double>(m.lower[i], m.upper[i])(rng);
    }
    const Vec3 target = toe_position_body(m, q, leg);
    if (!in_workspace(m, Pose::identity(), leg, target)) continue;
    ++tested;
    RobotState s = stance_state(m, Pose::identity());
    s.base = Pose::identity();
    const ManipulationCommand cmd = static_command(flag, target);
    double err = 1.0;
    int k = 0;
    while (k < 50 && err >= 1e-3) {
      s.q = ik_tick(m, s, cmd, cfg).q_desired;
      err = (toe_position_body(m, s.q, leg) - target).norm();
      ++k;
    }
    worst_ticks = std::max(worst_ticks, k);
    worst_ori = std::max(worst_ori, quat_angle_between(toe_orientation_from_direction(toe_direction_body(m, s.q, leg)),
                                                       cmd.desired_orientation));
    c.require(err < 1e-3, fmt("reachable target missed by %.3g m", err));
  }
  double worst_far = 0.0;
  int raised = 0;
  const int far = 200;
  for (int i = 0; i < far; ++i) {
    const int flag = i % 2;
    const Leg leg = leg_from_flag(flag);
    const Vec3 dir = random_vec(rng, -1.0, 1.0).normalized();
    const double range = std::uniform_real_distribution<double>(0.7, 10.0)(rng);
    const Vec3 target = m.mount[static_cast<std::size_t>(leg_index(leg))].position + range * dir;
    if (in_workspace(m, Pose::identity(), leg, target)) {
      --i;
      continue;
    }
    RobotState s = stance_state(m, Pose::identity());
    s.base = Pose::identity();
    IkResult r;
    for (int k = 0; k < 50; ++k) {
      r = ik_tick(m, s, static_command(flag, target), cfg);
      s.q = r.q_desired;
    }
    raised += r.out_of_reach;
    const double gap = (toe_position_body(m, s.q, leg) - closest_reachable(leg, target)).norm();
    worst_far = std::max(worst_far, gap);
    c.require(gap < 1e-3, fmt("far target %d ends %.3g m from the boundary projection", i, gap));
  }
  c.require(raised == far, fmt("out_of_reach raised on %d of %d", raised, far));
  report("IK oracle", c,
         fmt("500 reachable within %d ticks (ori err max %.2f rad, not gated); %d far, gap %.1e m", worst_ticks,
             worst_ori, far, worst_far),
         t0);
}

void reward() {
  const auto t0 = Clock::now();
  Check c;
  const RewardWeights w;
  const RewardTerms r = reward_from_errors(0.0, 0.0, 1.0, 0.0, 0.0, w);
  // 0.8 + 0.8 + 0.3 in doubles rounds to the neighbour above 1.9.
  const double one_ulp = std::nextafter(1.9, 2.0) - 1.9;
  c.require(r.pos_xy == 0.8 && r.pos_z == 0.8 && r.ori == 0.3, "terms are not exactly 0.8, 0.8, 0.3");
  c.require(r.total == w.pos_xy + w.pos_z + w.ori, "total is not the sum of the weights");
  c.require(std::abs(r.total - 1.9) <= one_ulp, fmt("total %.17g", r.total));
  // Same through the state-window path with a stationary robot.
  const QuadrupedModel& m = model();
  const RobotState s = stance_state(m, Pose::identity());
  ManipulationCommand cmd = static_command(kFlagFrontRight, toe_position_body(m, s.q, Leg::FR));
  cmd.desired_orientation = toe_orientation_from_direction(toe_direction_body(m, s.q, Leg::FR));
  const std::array<RobotState, 3> window{s, s, s};
  const RewardTerms r2 = compute_reward(m, window, cmd, w, 0.02);
  c.require(std::abs(r2.total - 1.9) <= one_ulp, fmt("window total %.17g", r2.total));

  RewardTerms prev = reward_from_errors(0, 0, 1, 0, 0, w);
  for (int i = 1; i <= 200; ++i) {
    const double e2 = 0.005 * i;
    const RewardTerms t = reward_from_errors(e2, e2, 1.0 - 0.01 * i, e2, e2, w);
    c.require(t.pos_xy < prev.pos_xy && t.pos_z < prev.pos_z && t.ori < prev.ori && t.ee_accel < prev.ee_accel &&
                  t.base_accel < prev.base_accel,
              fmt("not strictly decreasing at grid step %d", i));
    prev = t;
  }
  double ratio_err = 0.0;
  for (double e2 : {1e-4, 1e-3, 1e-2, 0.05, 0.1}) {
    const double lxy = -std::log(reward_from_errors(e2, 0, 1, 0, 0, w).pos_xy / w.pos_xy);
    const double lz = -std::log(reward_from_errors(0, e2, 1, 0, 0, w).pos_z / w.pos_z);
    ratio_err = std::max(ratio_err, std::abs(lz / lxy - 5.0));
  }
  c.require(ratio_err < 1e-9, fmt("z/xy sensitivity off by %.3g", ratio_err));
  report("reward", c, fmt("total %.17g (sum of weights), z/xy = 5 +- %.0e", r.total, ratio_err), t0);
}

void tracking() {
  const auto t0 = Clock::now();
  Check c;
  std::vector<Episode> eps;
  for (std::string_view name : kTaskNames) {
    const TaskSpec& t = task(name);
    for (int i = 0; i < 10; ++i) {
      ScriptedExpertPlanner planner(t);
      RunHooks hooks;
      hooks.record_clouds = false;
      eps.push_back(run_episode(t, planner, ControllerConfig{}, attempt_seed(500, i), hooks, &model()));
      c.require(eps.back().complete, std::string(name) + " episode faulted");
    }
  }
  const TrackingReport rep = tracking_report(eps);
  const double first_planner = SimConfig{}.control_period * SimConfig{}.planner_every;
  int early_peaks = 0;
  for (const RunSummary& r : rep.runs) early_peaks += r.peak_time < first_planner;
  c.require(early_peaks == static_cast<int>(rep.runs.size()),
            fmt("peak after the start on %d runs", static_cast<int>(rep.runs.size()) - early_peaks));
  c.require(rep.fraction_converged >= 0.9, fmt("minimum within 3 s on %.0f%%", 100 * rep.fraction_converged));
  c.require(rep.steady_mean < 0.02, fmt("steady-state mean %.4f m", rep.steady_mean));
  report("tracking", c,
         fmt("90 runs: peak at start %d/90, converged %.0f%%, steady %.4f m, ori floor %.3f rad (ref %.1f)",
             early_peaks, 100 * rep.fraction_converged, rep.steady_mean, rep.ori_floor, rep.ori_reference),
         t0);
}

void episode_arithmetic() {
  const auto t0 = Clock::now();
  Check c;
  const SimConfig sim;
  c.require(sim.duration == 20.0, "episode is not 20 s");
  c.require(sim.ticks() == 1000 && sim.planner_ticks() == 200, "tick counts");
  const TaskSpec& t = task("push_door");
  HoldPlanner hold;
  const Episode ep = run_world_episode(instantiate(t, 1, model()).world, hold, ControllerConfig{}, RewardWeights{},
                                       t.name, 1);
  c.require(ep.complete, "episode incomplete");
  c.require(ep.ticks.size() == 1000, fmt("%zu control ticks", ep.ticks.size()));
  c.require(ep.planner_ticks.size() == 200, fmt("%zu planner ticks", ep.planner_ticks.size()));
  for (std::size_t i = 0; i < ep.planner_ticks.size(); ++i) {
    c.require(ep.planner_ticks[i].tick == static_cast<int>(5 * i), "planner tick off the 10 Hz grid");
  }
  report("episode arithmetic", c, fmt("%zu control ticks, %zu planner ticks", ep.ticks.size(), ep.planner_ticks.size()),
         t0);
}

void dataset() {
  const auto t0 = Clock::now();
  Check c;
  std::ostringstream detail;
  double press_secs = 0.0;
  for (std::string_view name : kTaskNames) {
    const TaskSpec& t = task(name);
    CollectOptions o;
    o.seed = 2024;
    o.workers = 8;
    const auto s8 = Clock::now();
    const CollectResult r8 = collect(t, model(), o);
    const double secs8 = std::chrono::duration<double>(Clock::now() - s8).count();
    if (name == "press_button") press_secs = secs8;
    const Dataset& ds = r8.dataset;
    c.require(ds.trajectories.size() == 100, fmt("%s: %zu trajectories", t.name.c_str(), ds.trajectories.size()));
    bool shape = ds.header.cloud_points == 768;
    for (const DemoTrajectory& tr : ds.trajectories) {
      shape = shape && tr.records.size() == 200;
      for (const DemoRecord& rec : tr.records) shape = shape && rec.cloud.size() == 768 * 3;
    }
    c.require(shape, t.name + ": records are not 200 x 768 points");
    const auto bytes = serialize_dataset(ds);
    c.require(serialize_dataset(deserialize_dataset(bytes)) == bytes, t.name + ": save/load not byte-identical");
    o.workers = 1;
    const auto bytes1 = serialize_dataset(collect(t, model(), o).dataset);
    const bool same = body_sha256(bytes1) == body_sha256(bytes);
    c.require(same, t.name + ": 1 and 8 workers differ");
    detail << " " << t.name << "=" << r8.report.attempts;
  }
  c.require(press_secs < 180.0, fmt("press_button took %.1f s", press_secs));
  report("dataset", c, fmt("9 x 100 x 200 x 768, press_button in %.1f s; attempts:", press_secs) + detail.str(), t0);
}

void health_gate() {
  const auto t0 = Clock::now();
  Check c;
  std::ostringstream detail;
  for (std::string_view name : kTaskNames) {
    const TaskSpec& t = task(name);
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      ScriptedExpertPlanner planner(t);
      RunHooks hooks;
      hooks.record_clouds = false;
      const Episode ep = run_episode(t, planner, ControllerConfig{}, seed, hooks, &model());
      ok += ep.complete && success(t, ep);
    }
    c.require(ok >= 20, fmt("%s: %d/25", t.name.c_str(), ok));
    detail << " " << t.name << "=" << ok;
  }
  const TaskSpec& lift = task("lift_basket");
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    ScriptedExpertPlanner planner(lift);
    RunHooks hooks;
    hooks.record_clouds = false;
    hooks.before_tick = [](World& w, int k) {
      if (k == 60) apply_perturbation(w, 0, Pose{Vec3(1.5, 0, 0), Quat()});
    };
    const Episode ep = run_episode(lift, planner, ControllerConfig{}, seed, hooks, &model());
    ok += ep.complete && success(lift, ep);
  }
  c.require(ok >= 20, fmt("perturbed lift_basket: %d/25", ok));
  detail << "; perturbed lift_basket=" << ok;
  report("health gate", c, "successes of 25:" + detail.str(), t0);
}

void range_enforcement() {
  const auto t0 = Clock::now();
  Check c;
  const RandomizationRanges r;
  c.require(r.p_xy.lo == -2.0 && r.p_xy.hi == 2.0 && r.p_z.lo == 0.01 && r.p_z.hi == 1.2 && r.w.lo == 1.0 &&
                r.w.hi == 2000.0,
            "default ranges");
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const TrajectoryParams p = sample_random_params(s, r);
    for (const Vec3& v : p.curve.points) c.require(!check_point_in_ranges(v, r), "sampled point outside");
    for (double w : p.curve.weights) c.require(w >= 1.0 && w <= 2000.0, "sampled weight outside");
  }
  // Collapsed ranges put every sample on a bound.
  for (int side = 0; side < 2; ++side) {
    RandomizationRanges b;
    const double xy = side ? 2.0 : -2.0, z = side ? 1.2 : 0.01, w = side ? 2000.0 : 1.0;
    b.p_xy = {xy, xy};
    b.p_z = {z, z};
    b.w = {w, w};
    const TrajectoryParams p = sample_random_params(7, b);
    for (const Vec3& v : p.curve.points) c.require(v == Vec3(xy, xy, z), "collapsed sample off the bound");
    for (double x : p.curve.weights) c.require(x == w, "collapsed weight off the bound");
  }
  const double below_xy = std::nextafter(-2.0, -3.0), above_xy = std::nextafter(2.0, 3.0);
  const double below_z = std::nextafter(0.01, 0.0), above_z = std::nextafter(1.2, 2.0);
  const double below_w = std::nextafter(1.0, 0.0), above_w = std::nextafter(2000.0, 3000.0);

  teleop::SessionConfig cfg;
  cfg.session_id = "acc";
  teleop::Session session(task("push_door"), model(), cfg);
  int id = 0;
  auto edit = [&](json update) {
    json msg = {{"kind", "set_params"}, {"session", "acc"}, {"tick", session.current_tick()}, {"id", ++id},
                {"update", std::move(update)}};
    return json::parse(session.handle(msg.dump()).frame);
  };
  auto point = [](double x, double y, double z) { return json{{"point", {{"index", 3}, {"value", {x, y, z}}}}}; };
  auto weight = [](double w) { return json{{"weight", {{"index", 3}, {"value", w}}}}; };
  const std::vector<json> accept = {point(-2.0, -2.0, 0.01), point(2.0, 2.0, 1.2), weight(1.0), weight(2000.0)};
  const std::vector<json> refuse = {point(below_xy, 0, 0.5), point(above_xy, 0, 0.5), point(0, below_xy, 0.5),
                                    point(0, above_xy, 0.5), point(0, 0, below_z),   point(0, 0, above_z),
                                    point(0, 0, 1.5),        weight(below_w),         weight(above_w)};
  for (const json& u : accept) c.require(edit(u)["kind"] == "ack", "bound refused: " + u.dump());
  for (const json& u : refuse) c.require(edit(u)["kind"] == "error", "out-of-range accepted: " + u.dump());
  const json pz = edit(point(0.5, 0.0, 1.5));
  c.require(pz["message"] == "p_z = 1.5 outside [0.01, 1.2]", "p_z message: " + pz.dump());
  for (int k = 0; k < 10; ++k) session.tick();
  const auto active = session.active_params();
  c.require(active.has_value() && active->curve.points[3] == Vec3(2.0, 2.0, 1.2) && active->curve.weights[3] == 2000.0,
            "accepted bounds did not reach the simulator");
  report("range enforcement", c,
         fmt("10^4 samples inside; teleop: %zu bounds accepted, %zu next-doubles refused", accept.size(), refuse.size()),
         t0);
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void()>>> criteria = {
      {"curve core", curve_core},   {"slerp", slerp_props},    {"frames", frames},
      {"kinematics", kinematics},   {"IK oracle", ik_oracle},  {"reward", reward},
      {"tracking", tracking},       {"episode", episode_arithmetic},
      {"dataset", dataset},         {"health gate", health_gate}, {"ranges", range_enforcement}};
  for (const auto& [name, run] : criteria) {
    try {
      run();
    } catch (const std::exception& e) {
      std::printf("FAIL  %-22s threw: %s\n", name, e.what());
      ++g_failed;
    }
  }
  std::printf("%d of %zu criteria failed\n", g_failed, criteria.size());
  return g_failed == 0 ? 0 : 1;
}
