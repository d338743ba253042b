#include <benchmark/benchmark.h>

#include "pedi/collect.hpp"
#include "pedi/curves.hpp"
#include "pedi/dataset.hpp"

using namespace pedi;

namespace {

const QuadrupedModel& model() {
  static const QuadrupedModel m = QuadrupedModel::load_default();
  return m;
}

void BM_BezierEval(benchmark::State& state) {
  const TrajectoryParams p = sample_random_params(1);
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bezier_eval(p.curve, t));
    t = t < 0.999 ? t + 0.001 : 0.0;
  }
}
BENCHMARK(BM_BezierEval);

void BM_BezierOracle(benchmark::State& state) {
  const TrajectoryParams p = sample_random_params(1);
  for (auto _ : state) benchmark::DoNotOptimize(bezier_eval_oracle(p.curve, 0.37));
}
BENCHMARK(BM_BezierOracle);

void BM_IkTick(benchmark::State& state) {
  const QuadrupedModel& m = model();
  const RobotState s = stance_state(m, Pose::identity());
  ManipulationCommand cmd;
  cmd.flag = kFlagFrontRight;
  cmd.desired_point = toe_position_body(m, s.q, Leg::FR) + Vec3(0.15, 0.05, 0.2);
  cmd.lookahead = {cmd.desired_point, cmd.desired_point, cmd.desired_point};
  const ControllerConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(ik_tick(m, s, cmd, cfg));
}
BENCHMARK(BM_IkTick);

// One full 20 s expert episode, without point clouds.
void BM_ExpertEpisode(benchmark::State& state) {
  const TaskSpec& t = task("push_door");
  std::uint64_t seed = 0;
  for (auto _ : state) {
    ScriptedExpertPlanner planner(t);
    RunHooks hooks;
    hooks.record_clouds = false;
    benchmark::DoNotOptimize(run_episode(t, planner, ControllerConfig{}, seed++, hooks, &model()));
  }
}
BENCHMARK(BM_ExpertEpisode)->Unit(benchmark::kMillisecond);

void BM_PointCloud(benchmark::State& state) {
  const TaskInstance inst = instantiate(task("open_dishwasher"), 3, model());
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(synth_point_cloud(inst.world, 768, seed++));
}
BENCHMARK(BM_PointCloud)->Unit(benchmark::kMicrosecond);

void BM_SerializeDataset(benchmark::State& state) {
  CollectOptions o;
  o.n_traj = 2;
  const Dataset ds = collect(task("press_button"), model(), o).dataset;
  std::size_t bytes = 0;
  for (auto _ : state) {
    const auto b = serialize_dataset(ds);
    bytes = b.size();
    benchmark::DoNotOptimize(b.data());
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bytes));
}
BENCHMARK(BM_SerializeDataset)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
