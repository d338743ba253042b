// pedi: operator entry point. Exit codes: 0 ok, 2 usage/config error, 3 runtime fault.
#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "pedi/collect.hpp"
#include "pedi/dataset.hpp"
#include "pedi/hash.hpp"
#include "pedi/settings.hpp"
#include "pedi/teleop.hpp"
#include "pedi/tracking.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitFault = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop = true; }

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
};

pedi::RunConfig resolve(const Common& c) {
  pedi::Settings s = pedi::make_settings();
  if (!c.config.empty()) s.load_file(c.config);
  s.apply_env();
  s.apply_overrides(c.sets);
  return pedi::run_config_from(s);
}

// Opens `path` for writing, or hands back stdout for "" and "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path);
    if (!file_) throw std::runtime_error("cannot write " + path);
  }
  std::ostream& get() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

int eval_curve(const std::string& params_path, const std::vector<double>& ts, bool oracle, bool machine) {
  const pedi::TrajectoryParams p = pedi::load_params(params_path);
  for (double t : ts) {
    if (!(t >= 0.0 && t <= 1.0)) throw UsageError("t = " + std::to_string(t) + " outside [0, 1]");
  }
  const char sep = machine ? ',' : ' ';
  std::vector<std::string> cols = {"t", "x", "y", "z", "qw", "qx", "qy", "qz"};
  if (oracle) cols.insert(cols.end(), {"oracle_x", "oracle_y", "oracle_z"});
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (machine) {
      std::cout << (i ? "," : "") << cols[i];
    } else {
      std::cout << std::setw(i ? 14 : 8) << cols[i];
    }
  }
  std::cout << "\n";
  for (double t : ts) {
    const pedi::Vec3 x = pedi::bezier_eval(p.curve, t);
    const pedi::Quat q = pedi::slerp(p.orientation, t);
    std::vector<double> row = {t, x.x(), x.y(), x.z(), q.w(), q.x(), q.y(), q.z()};
    if (oracle) {
      const pedi::Vec3 o = pedi::bezier_eval_oracle(p.curve, t);
      row.insert(row.end(), {o.x(), o.y(), o.z()});
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (machine) {
        std::cout << (i ? std::string(1, sep) : "") << std::setprecision(17) << row[i];
      } else {
        std::cout << std::setw(i ? 14 : 8) << std::fixed << std::setprecision(i ? 6 : 4) << row[i]
                  << std::defaultfloat;
      }
    }
    std::cout << "\n";
  }
  return 0;
}

int collect_cmd(const Common& c, const std::string& task, int n, int records, int workers, const std::string& out,
                bool no_actions) {
  const pedi::RunConfig rc = resolve(c);
  const pedi::TaskSpec& t = pedi::task(task);
  pedi::CollectOptions o;
  o.n_traj = n;
  o.records_per_traj = records;
  o.workers = workers;
  o.seed = c.seed;
  o.with_actions = !no_actions;
  o.sim = rc.sim;
  o.controller = rc.controller;
  o.weights = rc.weights;
  o.expert = rc.expert;
  const auto model = pedi::QuadrupedModel::load_default();
  const pedi::CollectResult res = pedi::collect(t, model, o);
  const auto bytes = pedi::serialize_dataset(res.dataset);
  {
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + out);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  const pedi::CollectReport& r = res.report;
  std::cout << "task " << t.name << "\n"
            << "collected " << r.collected << " / " << r.requested << " trajectories in " << r.attempts
            << " attempts\n"
            << "records " << res.dataset.record_count() << "\n"
            << "wall_seconds " << std::fixed << std::setprecision(2) << r.wall_seconds << std::defaultfloat << "\n"
            << "body_sha256 " << pedi::body_sha256(bytes) << "\n"
            << "file " << out << " (" << bytes.size() << " bytes)\n";
  for (const pedi::Exclusion& e : r.exclusions) {
    std::cout << "excluded attempt " << e.attempt << " seed " << e.seed << ": " << e.reason << "\n";
  }
  if (r.collected < r.requested) {
    std::cerr << "pedi: only " << r.collected << " of " << r.requested << " trajectories succeeded\n";
    return kExitFault;
  }
  return 0;
}

int eval_tracking(const Common& c, const std::string& task, int runs, const std::string& out) {
  if (runs < 1) throw UsageError("--runs must be at least 1");
  const pedi::RunConfig rc = resolve(c);
  std::vector<std::string> names;
  if (task == "all") {
    for (auto n : pedi::kTaskNames) names.emplace_back(n);
  } else {
    names.push_back(pedi::task(task).name);
  }
  const auto model = pedi::QuadrupedModel::load_default();
  std::vector<pedi::Episode> eps;
  for (const std::string& name : names) {
    const pedi::TaskSpec& t = pedi::task(name);
    for (int i = 0; i < runs; ++i) {
      pedi::ScriptedExpertPlanner planner(t, rc.expert);
      pedi::RunHooks hooks;
      hooks.record_clouds = false;
      eps.push_back(pedi::run_episode(t, planner, rc.controller, pedi::attempt_seed(c.seed, i), hooks, &model, rc.sim,
                                      rc.weights));
      if (eps.back().fault) throw std::runtime_error(name + ": " + *eps.back().fault);
    }
  }
  const pedi::TrackingReport rep = pedi::tracking_report(eps);
  Output o(out);
  pedi::write_tracking_report(rep, o.get());
  return 0;
}

int serve(const Common& c, const std::string& task, const std::string& host, int port, const std::string& record_dir) {
  const pedi::RunConfig rc = resolve(c);
  const pedi::TaskSpec& t = pedi::task(task);
  const auto model = pedi::QuadrupedModel::load_default();
  pedi::teleop::SessionConfig sc;
  sc.seed = c.seed;
  sc.sim = rc.sim;
  sc.controller = rc.controller;
  sc.weights = rc.weights;
  sc.ranges = rc.ranges;
  sc.record_dir = record_dir;
  pedi::teleop::Session session(t, model, sc);
  pedi::teleop::Server server(session, {host, port, true});
  server.start();
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "serving " << t.name << " on " << host << ":" << server.port() << std::endl;
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  server.stop();
  std::cout << "stopped at tick " << session.current_tick() << std::endl;
  return 0;
}

int export_cmd(const std::string& in, const std::string& out, bool with_cloud) {
  const pedi::Dataset ds = pedi::load_dataset(in);
  Output o(out);
  pedi::export_columns(ds, o.get(), with_cloud);
  return 0;
}

int show_settings(const Common& c) {
  pedi::Settings s = pedi::make_settings();
  if (!c.config.empty()) s.load_file(c.config);
  s.apply_env();
  s.apply_overrides(c.sets);
  pedi::run_config_from(s);
  for (const std::string& k : s.keys()) {
    std::cout << k << " = " << s.get(k) << "    # " << s.origin(k) << "; env " << pedi::Settings::env_name(k) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pedi: legged loco-manipulation trajectory tools"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config, "settings file (key = value lines)")->check(CLI::ExistingFile);
  app.add_option("--set", common.sets, "override a setting, key=value (repeatable)");
  app.add_option("--seed", common.seed, "base seed");
  app.fallthrough();

  std::string params_path;
  std::vector<double> ts;
  bool oracle = false, machine = false;
  auto* ec = app.add_subcommand("eval-curve", "evaluate a parameter file's curve and orientation");
  ec->add_option("params", params_path, "parameter file")->required();
  ec->add_option("--t", ts, "curve parameters in [0, 1]");
  ec->add_flag("--oracle", oracle, "add de Casteljau oracle columns");
  ec->add_flag("--machine", machine, "comma-separated output");

  std::string task, out;
  int n = 100, records = 200, workers = 1;
  bool no_actions = false;
  auto* co = app.add_subcommand("collect", "collect expert demonstrations into a dataset file");
  co->add_option("--task", task, "task name")->required();
  co->add_option("--n", n, "trajectories")->check(CLI::NonNegativeNumber);
  co->add_option("--records", records, "records per trajectory")->check(CLI::PositiveNumber);
  co->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  co->add_option("--out", out, "dataset path")->required();
  co->add_flag("--no-actions", no_actions, "omit the action channel");

  int runs = 10;
  auto* et = app.add_subcommand("eval-tracking", "tracking error report over fresh expert episodes");
  et->add_option("--task", task, "task name or 'all'")->required();
  et->add_option("--runs", runs, "episodes per task");
  et->add_option("--out", out, "report path (default stdout)");

  std::string host = "127.0.0.1", record_dir = ".";
  int port = 8765;
  auto* sv = app.add_subcommand("serve", "run a teleoperation session");
  sv->add_option("--task", task, "task name")->required();
  sv->add_option("--host", host, "bind address");
  sv->add_option("--port", port, "TCP port (0 picks one)")->check(CLI::Range(0, 65535));
  sv->add_option("--record-dir", record_dir, "where recordings are written")->check(CLI::ExistingDirectory);

  std::string in;
  bool with_cloud = false;
  auto* ex = app.add_subcommand("export", "dump a dataset as whitespace-separated columns");
  ex->add_option("--in", in, "dataset path")->required()->check(CLI::ExistingFile);
  ex->add_option("--out", out, "text path (default stdout)");
  ex->add_flag("--with-cloud", with_cloud, "include point cloud columns");

  auto* st = app.add_subcommand("settings", "print resolved settings and where each came from");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*ec) return eval_curve(params_path, ts, oracle, machine);
    if (*co) return collect_cmd(common, task, n, records, workers, out, no_actions);
    if (*et) return eval_tracking(common, task, runs, out);
    if (*sv) return serve(common, task, host, port, record_dir);
    if (*ex) return export_cmd(in, out, with_cloud);
    if (*st) return show_settings(common);
  } catch (const UsageError& e) {
    std::cerr << "pedi: " << e.what() << "\n";
    return kExitUsage;
  } catch (const pedi::ConfigError& e) {
    std::cerr << "pedi: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "pedi: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "pedi: " << e.what() << "\n";
    return kExitFault;
  }
  return kExitUsage;
}
