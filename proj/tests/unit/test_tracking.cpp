#include <sstream>

#include "doctest.h"
#include "pedi/tasks.hpp"
#include "pedi/tracking.hpp"

using namespace pedi;

namespace {

Episode synthetic(const std::vector<double>& errors, double tick = 0.02) {
  Episode ep;
  ep.task = "synthetic";
  ep.tick = tick;
  ep.complete = true;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    TickRecord r;
    r.tick = static_cast<int>(i);
    r.time = static_cast<double>(i) * tick;
    r.position_error = errors[i];
    r.orientation_error = 0.1;
    ep.ticks.push_back(r);
  }
  return ep;
}

}  // namespace

TEST_CASE("run summary of a decaying error") {
  // 0.5 m decaying to 0.005 m by 1 s, flat afterwards.
  std::vector<double> e;
  for (int i = 0; i < 500; ++i) e.push_back(i < 50 ? 0.5 - 0.495 * i / 50.0 : 0.005);
  const RunSummary s = summarize_run(synthetic(e));
  CHECK(s.peak == 0.5);
  CHECK(s.peak_time == 0.0);
  CHECK(s.min == doctest::Approx(0.005));
  // First tick within 0.01 m of the minimum.
  CHECK(s.time_to_min == doctest::Approx(0.98));
  CHECK(s.steady_mean == doctest::Approx(0.005));
  CHECK(s.ori_steady_mean == doctest::Approx(0.1));
}

TEST_CASE("report aggregates per tick") {
  const std::vector<Episode> eps = {synthetic({0.2, 0.1, 0.0}), synthetic({0.4, 0.3, 0.2, 0.1})};
  TrackingOptions opts;
  opts.steady_from = 0.02;
  const TrackingReport r = tracking_report(eps, opts);
  REQUIRE(r.rows.size() == 3);
  CHECK(r.rows[0].pos_mean == doctest::Approx(0.3));
  CHECK(r.rows[0].pos_std == doctest::Approx(0.1));
  CHECK(r.rows[2].time == doctest::Approx(0.04));
  CHECK(r.runs.size() == 2);
  CHECK(r.fraction_converged == 1.0);

  std::ostringstream out;
  write_tracking_report(r, out);
  const std::string text = out.str();
  CHECK(text.find("tick time pos_mean pos_std ori_mean ori_std") != std::string::npos);
  CHECK(text.find("\nrun ") != std::string::npos);
}

TEST_CASE("report needs episodes with ticks") {
  const std::vector<Episode> none;
  CHECK_THROWS_AS(tracking_report(none), std::invalid_argument);
  const std::vector<Episode> empty = {Episode{}};
  CHECK_THROWS_AS(tracking_report(empty), std::invalid_argument);
}

TEST_CASE("holding still tracks perfectly") {
  const QuadrupedModel m = QuadrupedModel::load_default();
  TaskInstance inst = instantiate(task("push_door"), 1, m);
  HoldPlanner hold;
  const Episode ep = run_world_episode(std::move(inst.world), hold, ControllerConfig{}, RewardWeights{}, "push_door", 1);
  const std::vector<Episode> eps = {ep};
  const TrackingReport r = tracking_report(eps);
  CHECK(r.rows.size() == 1000);
  CHECK(r.mean.peak < 1e-12);
  CHECK(r.steady_mean < 1e-12);
}

TEST_CASE("scripted expert converges within three seconds") {
  std::vector<Episode> eps;
  const TaskSpec& t = task("pull_handle");
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    ScriptedExpertPlanner planner(t);
    eps.push_back(run_episode(t, planner, ControllerConfig{}, seed));
  }
  const TrackingReport r = tracking_report(eps);
  CHECK(r.fraction_converged == 1.0);
  for (const RunSummary& s : r.runs) {
    CHECK(s.time_to_min <= 3.0);
    CHECK(s.steady_mean < s.peak);
  }
}
