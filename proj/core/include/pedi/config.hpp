#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pedi {

// Raised for malformed or unknown configuration. `source()` and `line()`
// locate the offending entry; line is 0 when not file-backed.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string source, int line, std::string field, const std::string& message);

  const std::string& source() const { return source_; }
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::string source_;
  int line_;
  std::string field_;
};

// Closest candidate by edit distance, or "" when candidates is empty.
std::string nearest_key(std::string_view key, std::span<const std::string> candidates);

// Line-oriented "key = value" text. '#' starts a comment. Keys are unique.
class KeyValueFile {
 public:
  struct Entry {
    std::string key;
    std::string value;
    int line = 0;
  };

  static KeyValueFile parse(std::istream& in, std::string source);
  static KeyValueFile parse_string(std::string_view text, std::string source);
  static KeyValueFile load(const std::filesystem::path& path);

  const std::string& source() const { return source_; }
  const std::vector<Entry>& entries() const { return entries_; }
  bool has(std::string_view key) const;
  const Entry& at(std::string_view key) const;

  std::string get_string(std::string_view key) const;
  double get_double(std::string_view key) const;
  int get_int(std::string_view key) const;
  // Whitespace-separated reals; throws unless exactly `count` are present.
  std::vector<double> get_doubles(std::string_view key, std::size_t count) const;

  // Throws ConfigError naming the nearest known key for the first unknown one.
  void require_known(std::span<const std::string> known) const;

 private:
  std::string source_;
  std::vector<Entry> entries_;
};

// Layered run settings. Precedence, lowest first: declared default,
// config file, PEDI_* environment variable, explicit override.
// The environment name of "controller.lowpass_alpha" is
// PEDI_CONTROLLER__LOWPASS_ALPHA ('.' becomes "__").
class Settings {
 public:
  void declare(std::string key, std::string default_value, std::string help);

  void set(std::string_view key, std::string value, std::string origin = "override");
  void load_file(const std::filesystem::path& path);
  void apply_env();
  // Each item is "key=value".
  void apply_overrides(std::span<const std::string> items);

  bool has(std::string_view key) const;
  std::string get(std::string_view key) const;
  double get_double(std::string_view key) const;
  int get_int(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  std::vector<double> get_doubles(std::string_view key) const;
  std::string origin(std::string_view key) const;
  std::vector<std::string> keys() const;
  std::string help(std::string_view key) const;

  static std::string env_name(std::string_view key);

 private:
  struct Slot {
    std::string value;
    std::string help;
    std::string origin;
  };
  const Slot& slot(std::string_view key) const;

  std::map<std::string, Slot, std::less<>> slots_;
};

// Directory holding model and task data files: $PEDI_DATA_DIR if set,
// else the source tree's data/ when present, else the install location.
std::filesystem::path data_dir();

}  // namespace pedi
