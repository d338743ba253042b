#include "pedi/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace pedi {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

bool parse_double(std::string_view text, double& out) {
  const std::string s = trim(text);
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

std::vector<double> parse_doubles(const std::string& text, bool& ok) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string tok;
  ok = true;
  while (in >> tok) {
    double v = 0.0;
    if (!parse_double(tok, v)) {
      ok = false;
      return out;
    }
    out.push_back(v);
  }
  return out;
}

std::string unknown_key_message(std::string_view key, std::span<const std::string> known) {
  std::string msg = "unknown key '" + std::string(key) + "'";
  const std::string near = nearest_key(key, known);
  if (!near.empty()) msg += " (did you mean '" + near + "'?)";
  return msg;
}

}  // namespace

ConfigError::ConfigError(std::string source, int line, std::string field,
                         const std::string& message)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) +
                         (field.empty() ? std::string() : " [" + field + "]") + ": " + message),
      source_(std::move(source)),
      line_(line),
      field_(std::move(field)) {}

std::string nearest_key(std::string_view key, std::span<const std::string> candidates) {
  std::string best;
  std::size_t best_d = static_cast<std::size_t>(-1);
  // A truncated key is the common typo; a prefix match beats raw distance.
  for (const auto& c : candidates) {
    if (!key.empty() && c.starts_with(key) && c.size() - key.size() < best_d) {
      best_d = c.size() - key.size();
      best = c;
    }
  }
  if (!best.empty()) return best;
  for (const auto& c : candidates) {
    const std::size_t d = edit_distance(key, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

KeyValueFile KeyValueFile::parse(std::istream& in, std::string source) {
  KeyValueFile f;
  f.source_ = std::move(source);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(f.source_, line_no, "", "expected 'key = value'");
    }
    Entry e{trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)),
            line_no};
    if (e.key.empty()) throw ConfigError(f.source_, line_no, "", "empty key");
    if (f.has(e.key)) throw ConfigError(f.source_, line_no, e.key, "duplicate key");
    f.entries_.push_back(std::move(e));
  }
  return f;
}

KeyValueFile KeyValueFile::parse_string(std::string_view text, std::string source) {
  std::istringstream in{std::string(text)};
  return parse(in, std::move(source));
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "", "cannot open file");
  return parse(in, path.string());
}

bool KeyValueFile::has(std::string_view key) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.key == key; });
}

const KeyValueFile::Entry& KeyValueFile::at(std::string_view key) const {
  for (const auto& e : entries_) {
    if (e.key == key) return e;
  }
  throw ConfigError(source_, 0, std::string(key), "missing required key");
}

std::string KeyValueFile::get_string(std::string_view key) const { return at(key).value; }

double KeyValueFile::get_double(std::string_view key) const {
  const Entry& e = at(key);
  double v = 0.0;
  if (!parse_double(e.value, v)) {
    throw ConfigError(source_, e.line, e.key, "expected a number, got '" + e.value + "'");
  }
  return v;
}

int KeyValueFile::get_int(std::string_view key) const {
  const Entry& e = at(key);
  int v = 0;
  const auto* first = e.value.data();
  const auto* last = e.value.data() + e.value.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw ConfigError(source_, e.line, e.key, "expected an integer, got '" + e.value + "'");
  }
  return v;
}

std::vector<double> KeyValueFile::get_doubles(std::string_view key, std::size_t count) const {
  const Entry& e = at(key);
  bool ok = false;
  auto v = parse_doubles(e.value, ok);
  if (!ok) throw ConfigError(source_, e.line, e.key, "non-numeric value in '" + e.value + "'");
  if (v.size() != count) {
    throw ConfigError(source_, e.line, e.key,
                      "expected " + std::to_string(count) + " numbers, got " +
                          std::to_string(v.size()));
  }
  return v;
}

void KeyValueFile::require_known(std::span<const std::string> known) const {
  for (const auto& e : entries_) {
    if (std::find(known.begin(), known.end(), e.key) == known.end()) {
      throw ConfigError(source_, e.line, e.key, unknown_key_message(e.key, known));
    }
  }
}

void Settings::declare(std::string key, std::string default_value, std::string help) {
  slots_[std::move(key)] = Slot{std::move(default_value), std::move(help), "default"};
}

void Settings::set(std::string_view key, std::string value, std::string origin) {
  auto it = slots_.find(key);
  if (it == slots_.end()) {
    const auto known = keys();
    throw ConfigError(origin, 0, std::string(key), unknown_key_message(key, known));
  }
  it->second.value = std::move(value);
  it->second.origin = std::move(origin);
}

void Settings::load_file(const std::filesystem::path& path) {
  const auto file = KeyValueFile::load(path);
  file.require_known(keys());
  for (const auto& e : file.entries()) {
    set(e.key, e.value, file.source() + ":" + std::to_string(e.line));
  }
}

void Settings::apply_env() {
  for (auto& [key, slot] : slots_) {
    if (const char* v = std::getenv(env_name(key).c_str())) {
      slot.value = v;
      slot.origin = "env " + env_name(key);
    }
  }
}

void Settings::apply_overrides(std::span<const std::string> items) {
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--set", 0, item, "expected key=value");
    }
    set(trim(std::string_view(item).substr(0, eq)), trim(std::string_view(item).substr(eq + 1)),
        "--set");
  }
}

bool Settings::has(std::string_view key) const { return slots_.find(key) != slots_.end(); }

const Settings::Slot& Settings::slot(std::string_view key) const {
  auto it = slots_.find(key);
  if (it == slots_.end()) {
    const auto known = keys();
    throw ConfigError("settings", 0, std::string(key), unknown_key_message(key, known));
  }
  return it->second;
}

std::string Settings::get(std::string_view key) const { return slot(key).value; }

double Settings::get_double(std::string_view key) const {
  const Slot& s = slot(key);
  double v = 0.0;
  if (!parse_double(s.value, v)) {
    throw ConfigError(s.origin, 0, std::string(key), "expected a number, got '" + s.value + "'");
  }
  return v;
}

int Settings::get_int(std::string_view key) const {
  const double v = get_double(key);
  if (v != static_cast<double>(static_cast<long long>(v))) {
    throw ConfigError(slot(key).origin, 0, std::string(key), "expected an integer");
  }
  return static_cast<int>(v);
}

bool Settings::get_bool(std::string_view key) const {
  const std::string v = slot(key).value;
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError(slot(key).origin, 0, std::string(key), "expected a boolean, got '" + v + "'");
}

std::vector<double> Settings::get_doubles(std::string_view key) const {
  const Slot& s = slot(key);
  bool ok = false;
  auto v = parse_doubles(s.value, ok);
  if (!ok) throw ConfigError(s.origin, 0, std::string(key), "non-numeric value '" + s.value + "'");
  return v;
}

std::string Settings::origin(std::string_view key) const { return slot(key).origin; }

std::vector<std::string> Settings::keys() const {
  std::vector<std::string> out;
  out.reserve(slots_.size());
  for (const auto& [k, _] : slots_) out.push_back(k);
  return out;
}

std::string Settings::help(std::string_view key) const { return slot(key).help; }

std::string Settings::env_name(std::string_view key) {
  std::string out = "PEDI_";
  for (char c : key) {
    if (c == '.') {
      out += "__";
    } else {
      out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
  }
  return out;
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("PEDI_DATA_DIR")) return env;
#ifdef PEDI_BUILD_DATA_DIR
  if (std::filesystem::exists(PEDI_BUILD_DATA_DIR)) return PEDI_BUILD_DATA_DIR;
#endif
#ifdef PEDI_INSTALL_DATA_DIR
  return PEDI_INSTALL_DATA_DIR;
#else
  return "data";
#endif
}

}  // namespace pedi
