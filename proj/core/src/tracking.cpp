#include "pedi/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace pedi {

namespace {

// peak/min/time-to-min/steady mean over one error series sampled at `times`.
template <class Err>
RunSummary summarize_series(std::span<const double> times, Err err, std::size_t n, const TrackingOptions& o) {
  RunSummary s;
  s.min = err(0);
  for (std::size_t i = 0; i < n; ++i) {
    const double e = err(i);
    if (e > s.peak) {
      s.peak = e;
      s.peak_time = times[i];
    }
    s.min = std::min(s.min, e);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (err(i) <= s.min + o.min_band) {
      s.time_to_min = times[i];
      break;
    }
  }
  double sum = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (times[i] >= o.steady_from) {
      sum += err(i);
      ++count;
    }
  }
  s.steady_mean = count ? sum / count : 0.0;
  return s;
}

}  // namespace

RunSummary summarize_run(const Episode& ep, const TrackingOptions& opts) {
  if (ep.ticks.empty()) throw std::invalid_argument("tracking: episode has no ticks");
  std::vector<double> times;
  times.reserve(ep.ticks.size());
  for (const TickRecord& r : ep.ticks) times.push_back(r.time);
  const std::size_t n = ep.ticks.size();
  RunSummary s = summarize_series(times, [&](std::size_t i) { return ep.ticks[i].position_error; }, n, opts);
  const RunSummary o = summarize_series(times, [&](std::size_t i) { return ep.ticks[i].orientation_error; }, n, opts);
  s.task = ep.task;
  s.seed = ep.seed;
  s.ori_steady_mean = o.steady_mean;
  return s;
}

TrackingReport tracking_report(std::span<const Episode> episodes, const TrackingOptions& opts) {
  if (episodes.empty()) throw std::invalid_argument("tracking: at least one episode is required");
  TrackingReport rep;
  rep.ori_reference = opts.ori_reference;
  rep.time_limit = opts.time_limit;

  std::size_t n = episodes.front().ticks.size();
  for (const Episode& ep : episodes) {
    if (ep.ticks.empty()) throw std::invalid_argument("tracking: episode has no ticks");
    n = std::min(n, ep.ticks.size());
  }

  rep.rows.resize(n);
  const double m = static_cast<double>(episodes.size());
  for (std::size_t i = 0; i < n; ++i) {
    TrackingRow& row = rep.rows[i];
    row.tick = episodes.front().ticks[i].tick;
    row.time = episodes.front().ticks[i].time;
    double ps = 0, ps2 = 0, os = 0, os2 = 0;
    for (const Episode& ep : episodes) {
      const double p = ep.ticks[i].position_error;
      const double o = ep.ticks[i].orientation_error;
      ps += p;
      ps2 += p * p;
      os += o;
      os2 += o * o;
    }
    row.pos_mean = ps / m;
    row.ori_mean = os / m;
    row.pos_std = std::sqrt(std::max(0.0, ps2 / m - row.pos_mean * row.pos_mean));
    row.ori_std = std::sqrt(std::max(0.0, os2 / m - row.ori_mean * row.ori_mean));
  }

  int converged = 0;
  double steady = 0.0, ori = 0.0;
  for (const Episode& ep : episodes) {
    RunSummary s = summarize_run(ep, opts);
    if (s.time_to_min <= rep.time_limit) ++converged;
    steady += s.steady_mean;
    ori += s.ori_steady_mean;
    rep.runs.push_back(std::move(s));
  }
  rep.fraction_converged = converged / m;
  rep.steady_mean = steady / m;
  rep.ori_floor = ori / m;

  std::vector<double> times;
  for (const TrackingRow& r : rep.rows) times.push_back(r.time);
  rep.mean = summarize_series(times, [&](std::size_t i) { return rep.rows[i].pos_mean; }, n, opts);
  rep.mean.task = "mean";
  rep.mean.ori_steady_mean = rep.ori_floor;
  return rep;
}

void write_tracking_report(const TrackingReport& r, std::ostream& out) {
  const auto old = out.precision(6);
  out << "# runs " << r.runs.size() << "\n"
      << "# peak_error_m " << r.mean.peak << " at_s " << r.mean.peak_time << "\n"
      << "# time_to_min_s " << r.mean.time_to_min << " min_error_m " << r.mean.min << "\n"
      << "# steady_state_mean_m " << r.steady_mean << "\n"
      << "# converged_within_s " << r.time_limit << " fraction " << r.fraction_converged << "\n"
      << "# orientation_floor_rad " << r.ori_floor << " reference_rad " << r.ori_reference << "\n";
  out << "# run task seed peak_m peak_s min_m time_to_min_s steady_mean_m ori_steady_rad\n";
  for (const RunSummary& s : r.runs) {
    out << "run " << s.task << ' ' << s.seed << ' ' << s.peak << ' ' << s.peak_time << ' ' << s.min << ' '
        << s.time_to_min << ' ' << s.steady_mean << ' ' << s.ori_steady_mean << "\n";
  }
  out << "tick time pos_mean pos_std ori_mean ori_std\n";
  for (const TrackingRow& row : r.rows) {
    out << row.tick << ' ' << row.time << ' ' << row.pos_mean << ' ' << row.pos_std << ' ' << row.ori_mean << ' '
        << row.ori_std << "\n";
  }
  out.precision(old);
}

}  // namespace pedi
