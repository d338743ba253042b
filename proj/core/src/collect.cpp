#include "pedi/collect.hpp"

#include <atomic>
#include <chrono>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>

#include "pedi/hash.hpp"

namespace pedi {

void CollectOptions::validate() const {
  if (n_traj < 0) throw std::invalid_argument("collect: n_traj must be >= 0");
  if (records_per_traj < 1) throw std::invalid_argument("collect: records_per_traj must be >= 1");
  if (workers < 1) throw std::invalid_argument("collect: workers must be >= 1");
  if (max_extra_attempts < 0) throw std::invalid_argument("collect: max_extra_attempts must be >= 0");
  sim.validate();
  controller.validate();
}

std::uint64_t attempt_seed(std::uint64_t base, int attempt) {
  return mix_seed(base, static_cast<std::uint64_t>(attempt));
}

namespace {

struct Attempt {
  bool done = false;
  std::optional<DemoTrajectory> traj;
  std::string reason;
};

Attempt run_attempt(const TaskSpec& t, const QuadrupedModel& model, const CollectOptions& o,
                    const SimConfig& sim, std::uint64_t seed) {
  Attempt a;
  a.done = true;
  DemoTrajectory traj;
  traj.seed = seed;
  traj.records.reserve(static_cast<std::size_t>(o.records_per_traj));
  try {
    TaskInstance inst = instantiate(t, seed, model, sim);
    ScriptedExpertPlanner planner(t, o.expert);
    RunHooks hooks;
    hooks.planner_tick_done = [&](const PlannerTick& pt) { traj.records.push_back(make_record(pt, o.with_actions)); };
    EpisodeRunner runner(std::move(inst.world), planner, o.controller, o.weights, t.name, seed, std::move(hooks));
    runner.set_keep_log(false);
    const Episode ep = runner.finish();
    if (ep.fault) {
      a.reason = "fault: " + *ep.fault;
    } else if (!success(t, ep)) {
      a.reason = "task not accomplished";
    } else if (traj.records.size() != static_cast<std::size_t>(o.records_per_traj)) {
      a.reason = "record count " + std::to_string(traj.records.size());
    } else {
      a.traj = std::move(traj);
    }
  } catch (const std::exception& e) {
    a.reason = std::string("fault: ") + e.what();
  }
  return a;
}

}  // namespace

CollectResult collect(const TaskSpec& t, const QuadrupedModel& model, const CollectOptions& opts) {
  opts.validate();
  const auto t0 = std::chrono::steady_clock::now();

  SimConfig sim = opts.sim;
  sim.duration = opts.records_per_traj * sim.planner_every * sim.control_period;

  CollectResult res;
  DatasetHeader& h = res.dataset.header;
  h.task = t.name;
  h.provenance = "scripted_expert";
  h.seed = opts.seed;
  h.control_period = sim.control_period;
  h.planner_period = sim.control_period * sim.planner_every;
  h.records_per_traj = static_cast<std::uint32_t>(opts.records_per_traj);
  h.cloud_points = static_cast<std::uint32_t>(sim.cloud_points);
  h.has_actions = opts.with_actions;
  h.model_hash = model.config_hash();
  h.reward_hash = opts.weights.config_hash();
  h.layout = h.expected_layout();
  res.report.requested = opts.n_traj;

  const int max_attempts = opts.n_traj == 0 ? 0 : opts.n_traj + opts.max_extra_attempts;
  std::vector<Attempt> attempts(static_cast<std::size_t>(max_attempts));
  std::atomic<int> next{0};
  std::atomic<bool> stop{opts.n_traj == 0};
  std::mutex mu;
  int frontier = 0;   // attempts [0, frontier) are all done
  int successes = 0;  // among [0, frontier)

  auto worker = [&] {
    while (!stop.load()) {
      const int i = next.fetch_add(1);
      if (i >= max_attempts) break;
      Attempt a = run_attempt(t, model, opts, sim, attempt_seed(opts.seed, i));
      std::lock_guard lock(mu);
      attempts[static_cast<std::size_t>(i)] = std::move(a);
      while (frontier < max_attempts && attempts[static_cast<std::size_t>(frontier)].done) {
        if (attempts[static_cast<std::size_t>(frontier)].traj) ++successes;
        ++frontier;
        if (successes >= opts.n_traj) {
          stop = true;
          break;
        }
      }
    }
  };

  const int nw = std::min(opts.workers, std::max(max_attempts, 1));
  std::vector<std::thread> pool;
  for (int w = 1; w < nw; ++w) pool.emplace_back(worker);
  worker();
  for (std::thread& th : pool) th.join();

  // Keep the first n_traj successes in attempt order.
  for (int i = 0; i < frontier && static_cast<int>(res.dataset.trajectories.size()) < opts.n_traj; ++i) {
    Attempt& a = attempts[static_cast<std::size_t>(i)];
    res.report.attempts = i + 1;
    if (a.traj) {
      res.dataset.trajectories.push_back(std::move(*a.traj));
    } else {
      res.report.exclusions.push_back({i, attempt_seed(opts.seed, i), a.reason});
    }
  }
  res.report.collected = static_cast<int>(res.dataset.trajectories.size());
  res.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace pedi
