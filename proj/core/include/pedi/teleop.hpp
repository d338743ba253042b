#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "pedi/dataset.hpp"
#include "pedi/tasks.hpp"

namespace pedi::teleop {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::uint32_t kMaxFrameBytes = 1u << 20;

// Frames are a 4-byte big-endian payload length followed by UTF-8 JSON.
std::string encode_frame(std::string_view payload);
// Pops one complete frame off the front of `buffer`, if there is one.
// Throws std::length_error for a length above kMaxFrameBytes.
std::optional<std::string> decode_frame(std::string& buffer);

struct SessionConfig {
  std::string session_id = "s0";
  std::uint64_t seed = 0;
  SimConfig sim;
  ControllerConfig controller;
  RewardWeights weights;
  RandomizationRanges ranges;
  std::filesystem::path record_dir = ".";
  bool keep_log = false;  // full per-tick log, for replay comparisons
  double max_duration = 60.0;  // s, upper bound accepted for `duration`
};

struct Reply {
  std::string frame;   // JSON text
  bool fatal = false;  // protocol violation: the sender should be dropped
};

// One simulated world driven by client parameter edits. Not thread-safe;
// Server serializes access. Accepted edits are queued and applied at the
// start of the next tick, never mid-tick.
class Session {
 public:
  Session(const TaskSpec& t, const QuadrupedModel& model, SessionConfig cfg);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  std::string hello_frame() const;
  Reply handle(std::string_view frame);

  // Applies queued edits, advances one control tick, and returns frames to
  // broadcast: a state frame every planner tick plus any record notices.
  std::vector<std::string> tick();

  int current_tick() const;
  double control_period() const { return cfg_.sim.control_period; }
  const std::string& id() const { return cfg_.session_id; }
  bool recording() const { return rec_start_.has_value() && !rec_stop_.has_value(); }
  std::optional<TrajectoryParams> active_params() const;
  std::string state_frame() const;
  const std::vector<std::filesystem::path>& saved_files() const { return saved_; }

  // Ends the run and returns its log (requires keep_log).
  Episode take_log();

 private:
  struct Command;
  class SessionPlanner;

  std::string error_frame(std::string_view message, std::optional<std::int64_t> id, bool fatal) const;
  void apply(const Command& c);
  std::optional<std::string> maybe_finalize();

  const TaskSpec* task_;
  QuadrupedModel model_;
  SessionConfig cfg_;
  std::unique_ptr<SessionPlanner> planner_;
  std::unique_ptr<EpisodeRunner> runner_;
  std::deque<Command> queue_;
  std::optional<int> rec_start_;
  std::optional<int> rec_stop_;
  bool rec_pending_start_ = false;  // start queued but not applied
  bool rec_pending_stop_ = false;
  std::vector<DemoRecord> rec_records_;
  std::vector<std::filesystem::path> saved_;
  int recordings_ = 0;
};

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 0;           // 0 picks a free port
  bool realtime = true;   // pace ticks at the control period
};

// TCP front end. One simulation thread, one acceptor, one reader per client.
class Server {
 public:
  Server(Session& session, ServerConfig cfg);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and starts the threads. Throws std::runtime_error on bind failure.
  void start();
  void stop();
  int port() const { return port_; }
  int client_count() const;

 private:
  struct Client;

  void accept_loop();
  void sim_loop();
  void read_loop(std::shared_ptr<Client> c);
  void broadcast(const std::vector<std::string>& frames);

  Session& session_;
  ServerConfig cfg_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> running_{false};
  std::mutex session_mu_;
  mutable std::mutex clients_mu_;
  std::vector<std::shared_ptr<Client>> clients_;
  std::thread accept_thread_;
  std::thread sim_thread_;
};

// Blocking helpers for clients and tests.
void send_frame(int fd, std::string_view payload);
// Returns std::nullopt on orderly shutdown by the peer.
std::optional<std::string> recv_frame(int fd);
int connect_to(const std::string& host, int port);

}  // namespace pedi::teleop
