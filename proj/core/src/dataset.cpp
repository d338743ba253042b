#include "pedi/dataset.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <ostream>

#include "bytes.hpp"
#include "pedi/hash.hpp"

namespace pedi {

namespace {

constexpr char kMagic[8] = {'P', 'E', 'D', 'I', 'D', 'S', 'E', 'T'};

std::size_t floats_per_record(const DatasetHeader& h) {
  std::size_t n = 0;
  for (const LayoutField& f : h.expected_layout()) n += f.count;
  return n;
}

std::span<const std::uint8_t> tail(std::span<const std::uint8_t> all, std::size_t from) {
  return all.subspan(from);
}

std::span<const std::uint8_t> range(std::span<const std::uint8_t> all, std::size_t from, std::size_t to) {
  return all.subspan(from, to - from);
}

void put_floats(detail::ByteWriter& w, std::span<const float> v, std::size_t traj, std::size_t rec) {
  for (float f : v) {
    if (!std::isfinite(f)) {
      throw DatasetError(DatasetError::Kind::invalid, "non-finite value in record", traj, rec);
    }
    w.put<float>(f);
  }
}

}  // namespace

StateVector state_vector(const RobotState& s, int flag, int planner_index) {
  StateVector v{};
  std::size_t i = 0;
  auto put = [&](double x) { v[i++] = static_cast<float>(x); };
  for (int k = 0; k < 3; ++k) put(s.base.position[k]);
  for (double c : s.base.orientation.wxyz()) put(c);
  for (int k = 0; k < 3; ++k) put(s.base_lin_vel[k]);
  for (int k = 0; k < 3; ++k) put(s.base_ang_vel[k]);
  for (int k = 0; k < kNumJoints; ++k) put(s.q[k]);
  for (int k = 0; k < kNumJoints; ++k) put(s.qd[k]);
  const int leg = leg_index(leg_from_flag(flag));
  for (int k = 0; k < kJointsPerLeg; ++k) put(s.prev_action[kJointsPerLeg * leg + k]);
  for (int k = 0; k < 3; ++k) put(s.gravity_body[k]);
  put(flag);
  put(planner_index);
  put(0.0);
  return v;
}

DemoRecord make_record(const PlannerTick& pt, bool with_actions) {
  DemoRecord r;
  r.index = static_cast<std::uint32_t>(pt.index);
  r.cloud.reserve(pt.cloud.size() * 3);
  for (const Vec3& p : pt.cloud) {
    for (int k = 0; k < 3; ++k) r.cloud.push_back(static_cast<float>(p[k]));
  }
  r.state = state_vector(pt.state, pt.flag, pt.index);
  const ParamsRecord pr = to_record(pt.params);
  for (std::size_t k = 0; k < pr.size(); ++k) r.params[k] = static_cast<float>(pr[k]);
  if (with_actions) {
    r.actions.reserve(kActionSize);
    for (const JointVector& a : pt.actions) {
      for (int k = 0; k < kNumJoints; ++k) r.actions.push_back(static_cast<float>(a[k]));
    }
  }
  return r;
}

std::vector<LayoutField> DatasetHeader::expected_layout() const {
  std::vector<LayoutField> l = {
      {"cloud", cloud_points * 3},
      {"state", static_cast<std::uint32_t>(kStateSize)},
      {"params", static_cast<std::uint32_t>(kParamsRecordSize)},
  };
  if (has_actions) l.push_back({"actions", static_cast<std::uint32_t>(kActionSize)});
  return l;
}

std::size_t Dataset::record_count() const {
  std::size_t n = 0;
  for (const DemoTrajectory& t : trajectories) n += t.records.size();
  return n;
}

DatasetError::DatasetError(Kind kind, const std::string& message, std::optional<std::size_t> trajectory,
                           std::optional<std::size_t> record)
    : std::runtime_error([&] {
        std::string m = message;
        if (trajectory) m += " (trajectory " + std::to_string(*trajectory);
        if (record) m += (trajectory ? ", record " : " (record ") + std::to_string(*record);
        if (trajectory || record) m += ")";
        return m;
      }()),
      kind_(kind),
      trajectory_(trajectory),
      record_(record) {}

std::vector<std::uint8_t> serialize_dataset(const Dataset& ds) {
  const DatasetHeader& h = ds.header;
  const auto layout = h.expected_layout();

  detail::ByteWriter hw;
  hw.put_string(h.task);
  hw.put_string(h.provenance);
  hw.put<std::uint64_t>(h.seed);
  hw.put<double>(h.control_period);
  hw.put<double>(h.planner_period);
  hw.put<std::uint32_t>(h.records_per_traj);
  hw.put<std::uint32_t>(h.cloud_points);
  hw.put<std::uint8_t>(h.has_actions ? 1 : 0);
  hw.put_string(h.model_hash);
  hw.put_string(h.reward_hash);
  hw.put<std::uint32_t>(static_cast<std::uint32_t>(layout.size()));
  for (const LayoutField& f : layout) {
    hw.put_string(f.name);
    hw.put<std::uint32_t>(f.count);
  }
  hw.put<std::uint32_t>(static_cast<std::uint32_t>(ds.trajectories.size()));
  for (const DemoTrajectory& t : ds.trajectories) hw.put<std::uint64_t>(t.seed);

  detail::ByteWriter w;
  w.put_bytes(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(kMagic), 8));
  w.put<std::uint32_t>(kDatasetVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(hw.bytes().size()));
  w.put_bytes(hw.bytes());
  w.put<std::uint32_t>(crc32(hw.bytes()));

  const std::size_t body_start = w.bytes().size();
  const std::size_t cloud_floats = std::size_t{h.cloud_points} * 3;
  for (std::size_t ti = 0; ti < ds.trajectories.size(); ++ti) {
    const DemoTrajectory& t = ds.trajectories[ti];
    const std::size_t traj_start = w.bytes().size();
    w.put<std::uint64_t>(t.seed);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.records.size()));
    for (std::size_t ri = 0; ri < t.records.size(); ++ri) {
      const DemoRecord& r = t.records[ri];
      if (r.cloud.size() != cloud_floats || r.actions.size() != (h.has_actions ? kActionSize : 0)) {
        throw DatasetError(DatasetError::Kind::invalid, "record does not match the header layout", ti, ri);
      }
      const std::size_t rec_start = w.bytes().size();
      w.put<std::uint32_t>(r.index);
      put_floats(w, r.cloud, ti, ri);
      put_floats(w, r.state, ti, ri);
      put_floats(w, r.params, ti, ri);
      put_floats(w, r.actions, ti, ri);
      w.put<std::uint32_t>(crc32(tail(w.bytes(), rec_start)));
    }
    w.put<std::uint32_t>(crc32(tail(w.bytes(), traj_start)));
  }
  const auto digest = sha256(tail(w.bytes(), body_start));
  w.put_bytes(digest);
  return std::move(w.bytes());
}

namespace {

struct HeaderParse {
  DatasetHeader header;
  std::vector<std::uint64_t> seeds;
  std::size_t body_start = 0;
};

HeaderParse parse_header(std::span<const std::uint8_t> bytes) {
  using K = DatasetError::Kind;
  if (bytes.size() < 8) throw DatasetError(K::truncated, "file shorter than the magic");
  if (std::memcmp(bytes.data(), kMagic, 8) != 0) throw DatasetError(K::bad_magic, "not a dataset file (bad magic)");
  HeaderParse out;
  try {
    detail::ByteReader r(bytes);
    r.get_bytes(8);
    const auto version = r.get<std::uint32_t>();
    if (version != kDatasetVersion) {
      throw DatasetError(K::version_mismatch, "dataset version " + std::to_string(version) +
                                                  " unsupported, expected " + std::to_string(kDatasetVersion));
    }
    const auto len = r.get<std::uint32_t>();
    const auto payload = r.get_bytes(len);
    const auto crc = r.get<std::uint32_t>();
    if (crc32(payload) != crc) throw DatasetError(K::checksum, "header checksum mismatch");
    out.body_start = r.pos();

    detail::ByteReader hr(payload);
    DatasetHeader& h = out.header;
    h.task = hr.get_string();
    h.provenance = hr.get_string();
    h.seed = hr.get<std::uint64_t>();
    h.control_period = hr.get<double>();
    h.planner_period = hr.get<double>();
    h.records_per_traj = hr.get<std::uint32_t>();
    h.cloud_points = hr.get<std::uint32_t>();
    h.has_actions = hr.get<std::uint8_t>() != 0;
    h.model_hash = hr.get_string();
    h.reward_hash = hr.get_string();
    const auto nf = hr.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < nf; ++i) {
      LayoutField f;
      f.name = hr.get_string();
      f.count = hr.get<std::uint32_t>();
      h.layout.push_back(std::move(f));
    }
    const auto nt = hr.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < nt; ++i) out.seeds.push_back(hr.get<std::uint64_t>());
  } catch (const detail::Truncated&) {
    throw DatasetError(K::truncated, "file truncated inside the header");
  }
  const auto want = out.header.expected_layout();
  bool same = want.size() == out.header.layout.size();
  for (std::size_t i = 0; same && i < want.size(); ++i) {
    same = want[i].name == out.header.layout[i].name && want[i].count == out.header.layout[i].count;
  }
  if (!same) throw DatasetError(K::layout, "record layout table does not match this reader");
  return out;
}

void get_floats(detail::ByteReader& r, std::span<float> out) {
  const auto b = r.get_bytes(out.size() * sizeof(float));
  std::memcpy(out.data(), b.data(), b.size());
}

}  // namespace

std::size_t body_offset(std::span<const std::uint8_t> bytes) { return parse_header(bytes).body_start; }

std::string body_sha256(std::span<const std::uint8_t> bytes) {
  const std::size_t start = body_offset(bytes);
  if (bytes.size() < start + 32) throw DatasetError(DatasetError::Kind::truncated, "file truncated before the digest");
  return sha256_hex(range(bytes, start, bytes.size() - 32));
}

Dataset deserialize_dataset(std::span<const std::uint8_t> bytes) {
  using K = DatasetError::Kind;
  HeaderParse hp = parse_header(bytes);
  Dataset ds;
  ds.header = std::move(hp.header);
  const DatasetHeader& h = ds.header;
  const std::size_t cloud_floats = std::size_t{h.cloud_points} * 3;
  const std::size_t record_bytes = 4 + floats_per_record(h) * sizeof(float) + 4;

  if (bytes.size() < hp.body_start + 32) throw DatasetError(K::truncated, "file truncated before the digest");
  const auto body = range(bytes, hp.body_start, bytes.size() - 32);
  detail::ByteReader r(body);
  std::size_t ti = 0;
  std::size_t ri = 0;
  try {
    for (; ti < hp.seeds.size(); ++ti) {
      const std::size_t traj_start = r.pos();
      DemoTrajectory t;
      t.seed = r.get<std::uint64_t>();
      if (t.seed != hp.seeds[ti]) throw DatasetError(K::checksum, "trajectory seed differs from the header", ti);
      const auto n = r.get<std::uint32_t>();
      if (r.remaining() < std::size_t{n} * record_bytes) {
        throw DatasetError(K::truncated, "file truncated inside a trajectory", ti);
      }
      t.records.resize(n);
      for (ri = 0; ri < n; ++ri) {
        const std::size_t rec_start = r.pos();
        DemoRecord& rec = t.records[ri];
        rec.index = r.get<std::uint32_t>();
        rec.cloud.resize(cloud_floats);
        get_floats(r, rec.cloud);
        get_floats(r, rec.state);
        get_floats(r, rec.params);
        if (h.has_actions) {
          rec.actions.resize(kActionSize);
          get_floats(r, rec.actions);
        }
        const auto covered = range(body, rec_start, r.pos());
        if (crc32(covered) != r.get<std::uint32_t>()) throw DatasetError(K::checksum, "record checksum mismatch", ti, ri);
      }
      const auto covered = range(body, traj_start, r.pos());
      if (crc32(covered) != r.get<std::uint32_t>()) throw DatasetError(K::checksum, "trajectory checksum mismatch", ti);
      ds.trajectories.push_back(std::move(t));
    }
  } catch (const detail::Truncated&) {
    throw DatasetError(K::truncated, "file truncated inside the body", ti);
  }
  if (r.remaining() != 0) throw DatasetError(K::invalid, "trailing bytes after the last trajectory");
  const auto digest = sha256(body);
  if (std::memcmp(digest.data(), bytes.data() + bytes.size() - 32, 32) != 0) {
    throw DatasetError(K::checksum, "body digest mismatch");
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  const auto bytes = serialize_dataset(ds);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_dataset(bytes);
}

void export_columns(const Dataset& ds, std::ostream& out, bool with_cloud) {
  const DatasetHeader& h = ds.header;
  out << "# task " << h.task << "\n# provenance " << h.provenance << "\n# seed " << h.seed
      << "\n# control_period " << h.control_period << "\n# planner_period " << h.planner_period
      << "\n# model_hash " << h.model_hash << "\n# reward_hash " << h.reward_hash << "\n";
  out << "traj seed record";
  for (std::size_t i = 0; i < kStateSize; ++i) out << " s" << i;
  for (std::size_t i = 0; i < kParamsRecordSize; ++i) out << " p" << i;
  if (h.has_actions) {
    for (std::size_t i = 0; i < kActionSize; ++i) out << " a" << i;
  }
  if (with_cloud) {
    for (std::uint32_t i = 0; i < h.cloud_points; ++i) out << " c" << i << "x c" << i << "y c" << i << "z";
  }
  out << "\n";
  const auto old = out.precision(9);
  for (std::size_t ti = 0; ti < ds.trajectories.size(); ++ti) {
    const DemoTrajectory& t = ds.trajectories[ti];
    for (const DemoRecord& r : t.records) {
      out << ti << ' ' << t.seed << ' ' << r.index;
      for (float v : r.state) out << ' ' << v;
      for (float v : r.params) out << ' ' << v;
      for (float v : r.actions) out << ' ' << v;
      if (with_cloud) {
        for (float v : r.cloud) out << ' ' << v;
      }
      out << "\n";
    }
  }
  out.precision(old);
}

}  // namespace pedi
