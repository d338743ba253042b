#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pedi/sim.hpp"

namespace pedi {

inline constexpr std::uint32_t kDatasetVersion = 1;
inline constexpr std::size_t kStateSize = 46;
inline constexpr std::size_t kActionSize = kActionsPerPlannerTick * kNumJoints;

// Planner-state slots, in order:
//   0-2   base position (world)        3-6   base orientation wxyz
//   7-9   base linear velocity (world) 10-12 base angular velocity (world)
//   13-24 q                            25-36 qd
//   37-39 previous action of the flagged leg (hip, thigh, knee)
//   40-42 gravity in the base frame    43    flag
//   44    planner tick index           45    reserved, always 0
using StateVector = std::array<float, kStateSize>;
StateVector state_vector(const RobotState& s, int flag, int planner_index);

// One (P, s, p [, a]) sample at a planner tick. Cloud and params are world frame.
struct DemoRecord {
  std::uint32_t index = 0;
  std::vector<float> cloud;  // cloud_points * 3, xyz interleaved
  StateVector state{};
  std::array<float, kParamsRecordSize> params{};
  std::vector<float> actions;  // empty, or kActionSize when the dataset carries actions
};

DemoRecord make_record(const PlannerTick& pt, bool with_actions);

struct DemoTrajectory {
  std::uint64_t seed = 0;
  std::vector<DemoRecord> records;
};

struct LayoutField {
  std::string name;
  std::uint32_t count = 0;  // float32 values
};

struct DatasetHeader {
  std::string task;
  std::string provenance = "scripted_expert";
  std::uint64_t seed = 0;
  double control_period = 0.02;
  double planner_period = 0.1;
  std::uint32_t records_per_traj = 200;
  std::uint32_t cloud_points = 768;
  bool has_actions = true;
  std::string model_hash;
  std::string reward_hash;
  std::vector<LayoutField> layout;  // filled by save; checked by load

  std::vector<LayoutField> expected_layout() const;
};

struct Dataset {
  DatasetHeader header;
  std::vector<DemoTrajectory> trajectories;

  std::size_t record_count() const;
};

class DatasetError : public std::runtime_error {
 public:
  enum class Kind { bad_magic, version_mismatch, truncated, checksum, layout, invalid };

  DatasetError(Kind kind, const std::string& message, std::optional<std::size_t> trajectory = {},
               std::optional<std::size_t> record = {});

  Kind kind() const { return kind_; }
  std::optional<std::size_t> trajectory() const { return trajectory_; }
  std::optional<std::size_t> record() const { return record_; }

 private:
  Kind kind_;
  std::optional<std::size_t> trajectory_;
  std::optional<std::size_t> record_;
};

// Header block followed by the body; see README for the byte layout.
std::vector<std::uint8_t> serialize_dataset(const Dataset& ds);
Dataset deserialize_dataset(std::span<const std::uint8_t> bytes);

void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

// Offset of the body within serialized bytes and its sha256.
std::size_t body_offset(std::span<const std::uint8_t> bytes);
std::string body_sha256(std::span<const std::uint8_t> bytes);

// Whitespace-separated columns, one row per record, preceded by '#' comment
// lines carrying the header. Cloud columns only when `with_cloud`.
void export_columns(const Dataset& ds, std::ostream& out, bool with_cloud);

}  // namespace pedi
