#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pedi/sim.hpp"

namespace pedi {

struct TrackingOptions {
  double steady_from = 3.0;  // s; steady-state window starts here
  // The minimum is "reached" at the first tick within this band of it.
  double min_band = 0.01;    // m
  double time_limit = 3.0;   // s; convergence deadline for the fraction
  double ori_reference = 0.4;  // rad, printed for comparison only
};

struct TrackingRow {
  int tick = 0;
  double time = 0.0;
  double pos_mean = 0.0;
  double pos_std = 0.0;
  double ori_mean = 0.0;
  double ori_std = 0.0;
};

struct RunSummary {
  std::string task;
  std::uint64_t seed = 0;
  double peak = 0.0;         // m
  double peak_time = 0.0;    // s
  double min = 0.0;          // m
  double time_to_min = 0.0;  // s
  double steady_mean = 0.0;  // m
  double ori_steady_mean = 0.0;  // rad
};

struct TrackingReport {
  std::vector<TrackingRow> rows;  // one per tick of the shortest episode
  std::vector<RunSummary> runs;
  // Aggregate over the mean series.
  RunSummary mean;
  double steady_mean = 0.0;       // over all runs' steady windows
  double ori_floor = 0.0;         // rad
  double ori_reference = 0.4;
  double time_limit = 3.0;
  double fraction_converged = 0.0;  // runs with time_to_min <= time_limit
};

RunSummary summarize_run(const Episode& ep, const TrackingOptions& opts = {});

// Throws std::invalid_argument when `episodes` is empty or an episode has no ticks.
TrackingReport tracking_report(std::span<const Episode> episodes, const TrackingOptions& opts = {});

// '#' summary lines, then per-run lines prefixed "run", then the per-tick table.
void write_tracking_report(const TrackingReport& r, std::ostream& out);

}  // namespace pedi
