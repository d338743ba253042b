#include "pedi/teleop.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <sstream>

#include "json.hpp"

namespace pedi::teleop {

using json = nlohmann::json;

std::string encode_frame(std::string_view payload) {
  if (payload.size() > kMaxFrameBytes) throw std::length_error("frame exceeds the size limit");
  const auto n = static_cast<std::uint32_t>(payload.size());
  std::string out;
  out.reserve(4 + payload.size());
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((n >> shift) & 0xff));
  out.append(payload);
  return out;
}

std::optional<std::string> decode_frame(std::string& buffer) {
  if (buffer.size() < 4) return std::nullopt;
  std::uint32_t n = 0;
  for (int i = 0; i < 4; ++i) n = (n << 8) | static_cast<std::uint8_t>(buffer[static_cast<std::size_t>(i)]);
  if (n > kMaxFrameBytes) throw std::length_error("frame length " + std::to_string(n) + " exceeds the limit");
  if (buffer.size() < 4 + std::size_t{n}) return std::nullopt;
  std::string payload = buffer.substr(4, n);
  buffer.erase(0, 4 + std::size_t{n});
  return payload;
}

namespace {

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json to_json(const Quat& q) { return json::array({q.w(), q.x(), q.y(), q.z()}); }
json to_json(const Pose& p) { return {{"position", to_json(p.position)}, {"orientation", to_json(p.orientation)}}; }

json params_json(const TrajectoryParams& p) {
  json pts = json::array();
  for (const Vec3& v : p.curve.points) pts.push_back(to_json(v));
  return {{"flag", p.flag},
          {"points", pts},
          {"weights", p.curve.weights},
          {"q_start", to_json(p.orientation.start)},
          {"q_end", to_json(p.orientation.end)},
          {"duration", p.duration},
          {"frame", std::string(to_string(p.frame))}};
}

struct Rejected {
  std::string message;
};

Vec3 vec_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw Rejected{std::string(what) + " must be [x, y, z]"};
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) throw Rejected{std::string(what) + " must be numeric"};
    v[i] = j[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

Quat quat_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 4) throw Rejected{std::string(what) + " must be [w, x, y, z]"};
  double c[4];
  for (std::size_t i = 0; i < 4; ++i) {
    if (!j[i].is_number()) throw Rejected{std::string(what) + " must be numeric"};
    c[i] = j[i].get<double>();
    if (!std::isfinite(c[i])) throw Rejected{std::string(what) + " must be finite"};
  }
  if (std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2] + c[3] * c[3]) < 1e-9) {
    throw Rejected{std::string(what) + " has zero norm"};
  }
  return Quat(c[0], c[1], c[2], c[3]);
}

int index_from(const json& j) {
  if (!j.contains("index") || !j["index"].is_number_integer()) throw Rejected{"index must be an integer"};
  const int i = j["index"].get<int>();
  if (i < 0 || i >= kControlPoints) {
    throw Rejected{"index = " + std::to_string(i) + " outside [0, " + std::to_string(kControlPoints - 1) + "]"};
  }
  return i;
}

Vec3 clamp_to(const Vec3& p, const RandomizationRanges& r) {
  return {std::clamp(p.x(), r.p_xy.lo, r.p_xy.hi), std::clamp(p.y(), r.p_xy.lo, r.p_xy.hi),
          std::clamp(p.z(), r.p_z.lo, r.p_z.hi)};
}

}  // namespace

struct Session::Command {
  enum class Kind { params, record_start, record_stop };
  Kind kind = Kind::params;
  std::vector<std::pair<int, Vec3>> points;
  std::vector<std::pair<int, double>> weights;
  std::optional<int> flag;
  std::optional<Quat> q_start;
  std::optional<Quat> q_end;
  std::optional<double> duration;
  bool restart = false;
};

class Session::SessionPlanner : public Planner {
 public:
  PlannerOutput plan(const PlannerContext& ctx) override {
    if (!params) return hold.plan(ctx);
    PlannerOutput out{*params, restart};
    restart = false;
    return out;
  }

  HoldPlanner hold{kFlagFrontRight};
  std::optional<TrajectoryParams> params;
  bool restart = false;
};

Session::Session(const TaskSpec& t, const QuadrupedModel& model, SessionConfig cfg)
    : task_(&t), model_(model), cfg_(std::move(cfg)), planner_(std::make_unique<SessionPlanner>()) {
  cfg_.ranges.validate();
  TaskInstance inst = instantiate(t, cfg_.seed, model_, cfg_.sim);
  RunHooks hooks;
  hooks.planner_tick_done = [this](const PlannerTick& pt) {
    if (!rec_start_ || pt.tick < *rec_start_ || (rec_stop_ && pt.tick >= *rec_stop_)) return;
    rec_records_.push_back(make_record(pt, true));
  };
  runner_ = std::make_unique<EpisodeRunner>(std::move(inst.world), *planner_, cfg_.controller, cfg_.weights, t.name,
                                            cfg_.seed, std::move(hooks));
  runner_->set_unbounded(true);
  runner_->set_keep_log(cfg_.keep_log);
}

Session::~Session() = default;

int Session::current_tick() const { return runner_->world().tick(); }

std::optional<TrajectoryParams> Session::active_params() const { return runner_->active_params(); }

std::string Session::hello_frame() const {
  const RandomizationRanges& r = cfg_.ranges;
  json j = {{"kind", "hello"},
            {"session", cfg_.session_id},
            {"tick", current_tick()},
            {"protocol", kProtocolVersion},
            {"task", task_->name},
            {"model_hash", model_.config_hash()},
            {"reward_hash", cfg_.weights.config_hash()},
            {"control_period", cfg_.sim.control_period},
            {"planner_every", cfg_.sim.planner_every},
            {"frame", "world"},
            {"ranges",
             {{"p_xy", {r.p_xy.lo, r.p_xy.hi}}, {"p_z", {r.p_z.lo, r.p_z.hi}}, {"w", {r.w.lo, r.w.hi}}}}};
  return j.dump();
}

std::string Session::error_frame(std::string_view message, std::optional<std::int64_t> id, bool fatal) const {
  json j = {{"kind", "error"},
            {"session", cfg_.session_id},
            {"tick", current_tick()},
            {"message", std::string(message)},
            {"fatal", fatal}};
  if (id) j["id"] = *id;
  return j.dump();
}

Reply Session::handle(std::string_view frame) {
  json msg;
  try {
    msg = json::parse(frame);
  } catch (const json::parse_error& e) {
    return {error_frame(std::string("malformed JSON: ") + e.what(), std::nullopt, true), true};
  }
  if (!msg.is_object()) return {error_frame("frame must be a JSON object", std::nullopt, true), true};
  std::optional<std::int64_t> id;
  if (msg.contains("id")) {
    if (!msg["id"].is_number_integer()) return {error_frame("id must be an integer", std::nullopt, true), true};
    id = msg["id"].get<std::int64_t>();
  }
  if (!msg.contains("kind") || !msg["kind"].is_string()) return {error_frame("missing kind", id, true), true};
  if (!msg.contains("session") || msg["session"] != cfg_.session_id) {
    return {error_frame("session must be \"" + cfg_.session_id + "\"", id, true), true};
  }
  if (!msg.contains("tick") || !msg["tick"].is_number_integer()) {
    return {error_frame("tick must be an integer", id, true), true};
  }
  const std::string kind = msg["kind"].get<std::string>();
  const int applies_at = current_tick();

  try {
    Command c;
    if (kind == "set_params") {
      if (!msg.contains("update") || !msg["update"].is_object()) throw Rejected{"set_params needs an update object"};
      const json& u = msg["update"];
      static const std::vector<std::string> known = {"point", "points", "weight", "weights", "flag", "orientations", "duration"};
      for (auto it = u.begin(); it != u.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
          throw Rejected{"unknown update field '" + it.key() + "'"};
        }
      }
      auto add_point = [&](const json& e) {
        const int i = index_from(e);
        if (!e.contains("value")) throw Rejected{"point update needs a value"};
        const Vec3 v = vec_from(e["value"], "point value");
        if (auto bad = check_point_in_ranges(v, cfg_.ranges)) throw Rejected{*bad};
        c.points.emplace_back(i, v);
      };
      auto add_weight = [&](const json& e) {
        const int i = index_from(e);
        if (!e.contains("value") || !e["value"].is_number()) throw Rejected{"weight value must be numeric"};
        const double w = e["value"].get<double>();
        if (auto bad = check_weight_in_ranges(w, cfg_.ranges)) throw Rejected{*bad};
        c.weights.emplace_back(i, w);
      };
      if (u.contains("point")) add_point(u["point"]);
      if (u.contains("points")) {
        if (!u["points"].is_array()) throw Rejected{"points must be an array"};
        for (const json& e : u["points"]) add_point(e);
      }
      if (u.contains("weight")) add_weight(u["weight"]);
      if (u.contains("weights")) {
        if (!u["weights"].is_array()) throw Rejected{"weights must be an array"};
        for (const json& e : u["weights"]) add_weight(e);
      }
      if (u.contains("flag")) {
        if (!u["flag"].is_number_integer()) throw Rejected{"flag must be 0 or 1"};
        const int f = u["flag"].get<int>();
        if (f != kFlagFrontLeft && f != kFlagFrontRight) throw Rejected{"flag = " + std::to_string(f) + " outside {0, 1}"};
        c.flag = f;
      }
      if (u.contains("orientations")) {
        const json& o = u["orientations"];
        if (!o.is_object()) throw Rejected{"orientations must be an object"};
        if (o.contains("start")) c.q_start = quat_from(o["start"], "orientations.start");
        if (o.contains("end")) c.q_end = quat_from(o["end"], "orientations.end");
      }
      if (u.contains("duration")) {
        if (!u["duration"].is_number()) throw Rejected{"duration must be numeric"};
        const double d = u["duration"].get<double>();
        if (!(d > 0.0 && d <= cfg_.max_duration)) {
          std::ostringstream os;
          os << "duration = " << d << " outside (0, " << cfg_.max_duration << "]";
          throw Rejected{os.str()};
        }
        c.duration = d;
      }
      if (msg.contains("restart")) {
        if (!msg["restart"].is_boolean()) throw Rejected{"restart must be a boolean"};
        c.restart = msg["restart"].get<bool>();
      }
      if (u.empty() && !c.restart) throw Rejected{"empty update"};
    } else if (kind == "record") {
      if (!msg.contains("action") || !msg["action"].is_string()) throw Rejected{"record needs action start|stop"};
      const std::string a = msg["action"].get<std::string>();
      const bool active = (recording() || rec_pending_start_) && !rec_pending_stop_;
      if (a == "start") {
        if (active) throw Rejected{"record start while already recording"};
        if (rec_stop_) throw Rejected{"previous recording is still being written"};
        c.kind = Command::Kind::record_start;
        rec_pending_start_ = true;
      } else if (a == "stop") {
        if (!active) throw Rejected{"record stop without start"};
        c.kind = Command::Kind::record_stop;
        rec_pending_stop_ = true;
      } else {
        throw Rejected{"record action must be start or stop"};
      }
    } else {
      return {error_frame("unknown kind '" + kind + "'", id, true), true};
    }
    queue_.push_back(std::move(c));
  } catch (const Rejected& r) {
    return {error_frame(r.message, id, false), false};
  }

  json ack = {{"kind", "ack"}, {"session", cfg_.session_id}, {"tick", current_tick()},
              {"request", kind},  {"applies_at", applies_at}};
  if (id) ack["id"] = *id;
  if (kind == "record") ack["action"] = msg["action"];
  return {ack.dump(), false};
}

void Session::apply(const Command& c) {
  const int k = current_tick();
  switch (c.kind) {
    case Command::Kind::record_start:
      rec_start_ = k;
      rec_stop_.reset();
      rec_records_.clear();
      rec_pending_start_ = false;
      return;
    case Command::Kind::record_stop:
      rec_stop_ = k;
      rec_pending_stop_ = false;
      return;
    case Command::Kind::params:
      break;
  }

  const World& w = runner_->world();
  TrajectoryParams p;
  if (planner_->params) {
    p = *planner_->params;
  } else if (runner_->active_params()) {
    p = *runner_->active_params();
  } else {
    const Pose toe = w.toe_poses()[static_cast<std::size_t>(leg_index(Leg::FR))];
    p = constant_params(toe.position, toe.orientation, kFlagFrontRight, Frame::world);
  }
  for (const auto& [i, v] : c.points) p.curve.points[static_cast<std::size_t>(i)] = v;
  for (const auto& [i, v] : c.weights) p.curve.weights[static_cast<std::size_t>(i)] = v;
  if (c.flag) p.flag = *c.flag;
  if (c.q_start) p.orientation.start = *c.q_start;
  if (c.q_end) p.orientation.end = *c.q_end;
  if (c.duration) p.duration = *c.duration;
  if (c.restart) {
    const Pose toe = w.toe_poses()[static_cast<std::size_t>(leg_index(leg_from_flag(p.flag)))];
    p.curve.points[0] = clamp_to(toe.position, cfg_.ranges);
  }
  p.validate();
  planner_->params = p;
  if (k % cfg_.sim.planner_every == 0) {
    // The planner runs this tick and hands the edit over itself.
    planner_->restart = planner_->restart || c.restart;
  } else {
    runner_->set_params(p, c.restart);
  }
}

std::optional<std::string> Session::maybe_finalize() {
  if (!rec_stop_) return std::nullopt;
  const int pe = cfg_.sim.planner_every;
  const int boundary = (*rec_stop_ + pe - 1) / pe * pe;
  if (current_tick() <= boundary && !runner_->episode().fault) return std::nullopt;

  Dataset ds;
  DatasetHeader& h = ds.header;
  h.task = task_->name;
  h.provenance = "teleop";
  h.seed = cfg_.seed;
  h.control_period = cfg_.sim.control_period;
  h.planner_period = cfg_.sim.control_period * pe;
  h.records_per_traj = static_cast<std::uint32_t>(rec_records_.size());
  h.cloud_points = static_cast<std::uint32_t>(cfg_.sim.cloud_points);
  h.has_actions = true;
  h.model_hash = model_.config_hash();
  h.reward_hash = cfg_.weights.config_hash();
  h.layout = h.expected_layout();
  ds.trajectories.push_back({cfg_.seed, std::move(rec_records_)});
  rec_records_.clear();

  const auto path = cfg_.record_dir / (cfg_.session_id + "_" + std::to_string(recordings_++) + ".pedi");
  json j = {{"kind", "record"}, {"session", cfg_.session_id}, {"tick", current_tick()}};
  try {
    save_dataset(ds, path);
    saved_.push_back(path);
    j["action"] = "saved";
    j["path"] = path.string();
    j["records"] = ds.trajectories.front().records.size();
  } catch (const std::exception& e) {
    j = json::parse(error_frame(std::string("recording not saved: ") + e.what(), std::nullopt, false));
  }
  rec_start_.reset();
  rec_stop_.reset();
  return j.dump();
}

std::vector<std::string> Session::tick() {
  std::vector<std::string> out;
  if (runner_->done()) return out;
  while (!queue_.empty()) {
    try {
      apply(queue_.front());
    } catch (const std::exception& e) {
      out.push_back(error_frame(std::string("edit not applied: ") + e.what(), std::nullopt, false));
    }
    queue_.pop_front();
  }
  runner_->step();
  if (runner_->episode().fault) {
    out.push_back(error_frame("simulation stopped: " + *runner_->episode().fault, std::nullopt, false));
  } else if (runner_->last().tick % cfg_.sim.planner_every == 0) {
    out.push_back(state_frame());
  }
  if (auto r = maybe_finalize()) out.push_back(std::move(*r));
  return out;
}

std::string Session::state_frame() const {
  const TickRecord& r = runner_->last();
  json toes = json::array();
  for (const Pose& t : r.toes) toes.push_back(to_json(t));
  json q = json::array();
  for (int i = 0; i < kNumJoints; ++i) q.push_back(r.state.q[i]);
  json objects = json::array();
  for (const SceneObject& o : runner_->world().objects()) {
    objects.push_back({{"id", o.id}, {"name", o.name}, {"pose", to_json(o.pose)}, {"joint", o.joint_coordinate()}});
  }
  json j = {{"kind", "state"},
            {"session", cfg_.session_id},
            {"tick", r.tick},
            {"time", r.time},
            {"base", to_json(r.state.base)},
            {"q", q},
            {"toes", toes},
            {"flag", r.cmd.flag},
            {"desired", {{"point", to_json(r.desired_world)}, {"orientation", to_json(r.desired_orientation_world)}}},
            {"error", {{"position", r.position_error}, {"orientation", r.orientation_error}}},
            {"reward",
             {{"pos_xy", r.reward.pos_xy},
              {"pos_z", r.reward.pos_z},
              {"ori", r.reward.ori},
              {"ee_accel", r.reward.ee_accel},
              {"base_accel", r.reward.base_accel},
              {"total", r.reward.total}}},
            {"objects", objects},
            {"recording", recording()}};
  if (const auto& p = runner_->active_params()) j["params"] = params_json(*p);
  return j.dump();
}

Episode Session::take_log() {
  if (!cfg_.keep_log) throw std::logic_error("take_log needs a session started with keep_log");
  runner_->set_unbounded(false);
  if (!runner_->done()) throw std::logic_error("take_log: session has not reached the episode length");
  return runner_->finish();
}

// ---------------------------------------------------------------------------

namespace {

void write_all(int fd, const char* data, std::size_t n) {
  while (n > 0) {
    const ssize_t k = ::send(fd, data, n, MSG_NOSIGNAL);
    if (k < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error(std::string("send: ") + std::strerror(errno));
    }
    data += k;
    n -= static_cast<std::size_t>(k);
  }
}

// false on EOF before the first byte; throws on EOF mid-way.
bool read_all(int fd, char* data, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    const ssize_t k = ::recv(fd, data + got, n - got, 0);
    if (k == 0) {
      if (got == 0) return false;
      throw std::runtime_error("connection closed mid-frame");
    }
    if (k < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error(std::string("recv: ") + std::strerror(errno));
    }
    got += static_cast<std::size_t>(k);
  }
  return true;
}

}  // namespace

void send_frame(int fd, std::string_view payload) {
  const std::string f = encode_frame(payload);
  write_all(fd, f.data(), f.size());
}

std::optional<std::string> recv_frame(int fd) {
  char hdr[4];
  if (!read_all(fd, hdr, 4)) return std::nullopt;
  std::uint32_t n = 0;
  for (char c : hdr) n = (n << 8) | static_cast<std::uint8_t>(c);
  if (n > kMaxFrameBytes) throw std::length_error("frame length " + std::to_string(n) + " exceeds the limit");
  std::string payload(n, '\0');
  if (n > 0 && !read_all(fd, payload.data(), n)) throw std::runtime_error("connection closed mid-frame");
  return payload;
}

int connect_to(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const int rc = ::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res);
  if (rc != 0) throw std::runtime_error("resolve " + host + ": " + ::gai_strerror(rc));
  int fd = -1;
  for (addrinfo* a = res; a; a = a->ai_next) {
    fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw std::runtime_error("cannot connect to " + host + ":" + std::to_string(port));
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return fd;
}

struct Server::Client {
  int fd = -1;
  std::mutex write_mu;
  std::atomic<bool> alive{true};
  std::atomic<bool> subscribed{false};  // set once hello is out
  std::thread reader;

  bool send(std::string_view payload) {
    if (!alive) return false;
    std::lock_guard lock(write_mu);
    try {
      send_frame(fd, payload);
      return true;
    } catch (const std::exception&) {
      alive = false;
      ::shutdown(fd, SHUT_RDWR);
      return false;
    }
  }
};

Server::Server(Session& session, ServerConfig cfg) : session_(session), cfg_(std::move(cfg)) {}

Server::~Server() { stop(); }

int Server::client_count() const {
  std::lock_guard lock(clients_mu_);
  return static_cast<int>(std::count_if(clients_.begin(), clients_.end(), [](const auto& c) { return c->alive.load(); }));
}

void Server::start() {
  if (running_) return;
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const int rc = ::getaddrinfo(cfg_.host.c_str(), std::to_string(cfg_.port).c_str(), &hints, &res);
  if (rc != 0) throw std::runtime_error("resolve " + cfg_.host + ": " + ::gai_strerror(rc));
  std::string why = "no usable address";
  for (addrinfo* a = res; a; a = a->ai_next) {
    const int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, a->ai_addr, a->ai_addrlen) == 0 && ::listen(fd, 16) == 0) {
      listen_fd_ = fd;
      break;
    }
    why = std::strerror(errno);
    ::close(fd);
  }
  ::freeaddrinfo(res);
  if (listen_fd_ < 0) {
    throw std::runtime_error("cannot bind " + cfg_.host + ":" + std::to_string(cfg_.port) + ": " + why);
  }
  sockaddr_storage addr{};
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.ss_family == AF_INET6 ? reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port
                                           : reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
  running_ = true;
  accept_thread_ = std::thread([this] { accept_loop(); });
  sim_thread_ = std::thread([this] { sim_loop(); });
}

void Server::stop() {
  if (!running_.exchange(false)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  listen_fd_ = -1;
  if (accept_thread_.joinable()) accept_thread_.join();
  if (sim_thread_.joinable()) sim_thread_.join();
  std::vector<std::shared_ptr<Client>> clients;
  {
    std::lock_guard lock(clients_mu_);
    clients.swap(clients_);
  }
  for (auto& c : clients) ::shutdown(c->fd, SHUT_RDWR);
  for (auto& c : clients) {
    if (c->reader.joinable()) c->reader.join();
    ::close(c->fd);
  }
}

void Server::accept_loop() {
  while (running_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;
    }
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    auto c = std::make_shared<Client>();
    c->fd = fd;
    std::lock_guard lock(clients_mu_);
    // Reap finished readers.
    for (auto it = clients_.begin(); it != clients_.end();) {
      if (!(*it)->alive) {
        if ((*it)->reader.joinable()) (*it)->reader.join();
        ::close((*it)->fd);
        it = clients_.erase(it);
      } else {
        ++it;
      }
    }
    clients_.push_back(c);
    c->reader = std::thread([this, c] { read_loop(c); });
  }
}

void Server::read_loop(std::shared_ptr<Client> c) {
  {
    // Hello goes out before this client can see any state frame.
    std::lock_guard lock(session_mu_);
    c->send(session_.hello_frame());
    c->subscribed = true;
  }
  try {
    while (running_ && c->alive) {
      auto frame = recv_frame(c->fd);
      if (!frame) break;
      Reply r;
      {
        std::lock_guard lock(session_mu_);
        r = session_.handle(*frame);
      }
      c->send(r.frame);
      if (r.fatal) break;
    }
  } catch (const std::exception& e) {
    std::lock_guard lock(session_mu_);
    c->send(json({{"kind", "error"}, {"session", session_.id()}, {"tick", session_.current_tick()},
                  {"message", e.what()}, {"fatal", true}})
                .dump());
  }
  c->alive = false;
  ::shutdown(c->fd, SHUT_RDWR);
}

void Server::broadcast(const std::vector<std::string>& frames) {
  if (frames.empty()) return;
  std::vector<std::shared_ptr<Client>> clients;
  {
    std::lock_guard lock(clients_mu_);
    clients = clients_;
  }
  for (auto& c : clients) {
    if (!c->subscribed) continue;
    for (const std::string& f : frames) {
      if (!c->send(f)) break;
    }
  }
}

void Server::sim_loop() {
  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration_cast<clock::duration>(
      std::chrono::duration<double>(session_.control_period()));
  auto next = clock::now();
  while (running_) {
    {
      std::lock_guard lock(session_mu_);
      broadcast(session_.tick());
    }
    if (cfg_.realtime) {
      next += period;
      std::this_thread::sleep_until(next);
    } else {
      std::this_thread::yield();
    }
  }
}

}  // namespace pedi::teleop
