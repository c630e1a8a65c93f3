#include "nonpure_cli/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace nonpure::cli {

namespace {

constexpr std::string_view kKindNames[] = {"validate", "evolve",   "stokes",
                                           "nc-stokes", "metric", "identity-suite"};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool valid_key(std::string_view key) {
  if (key.empty() || !std::islower(static_cast<unsigned char>(key.front()))) return false;
  return std::all_of(key.begin(), key.end(), [](char c) {
    return std::islower(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) ||
           c == '.' || c == '-' || c == '_';
  });
}

std::string at_line(int line, std::string_view what) {
  return "line " + std::to_string(line) + ": " + std::string(what);
}

std::optional<double> to_double(std::string_view s) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<long long> to_integer(std::string_view s) {
  long long v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) return std::nullopt;
  return v;
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == ',')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != ',') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

}  // namespace

std::string_view kind_name(Kind kind) { return kKindNames[static_cast<int>(kind)]; }

std::optional<Kind> parse_kind(std::string_view name) {
  for (int i = 0; i < 6; ++i) {
    if (kKindNames[i] == name) return static_cast<Kind>(i);
  }
  return std::nullopt;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Scenario Scenario::parse(std::string_view text, std::string base_dir) {
  Scenario s;
  s.base_dir_ = std::move(base_dir);
  s.hash_ = fnv1a(text);
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(at_line(line_no, "expected 'key = value', found '" + std::string(line) + "'"));
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (!valid_key(key)) throw ParseError(at_line(line_no, "malformed key '" + std::string(key) + "'"));
    if (value.empty()) throw ParseError(at_line(line_no, "key '" + std::string(key) + "' has no value"));
    if (s.entries_.count(key)) {
      throw ParseError(at_line(line_no, "duplicate key '" + std::string(key) + "'"));
    }
    s.entries_.emplace(std::string(key), Entry{std::string(value), line_no});
  }

  if (!s.has("version")) throw ParseError("missing required key 'version'");
  if (s.integer("version", 0, 0, 1 << 30) != kScenarioVersion) {
    const Entry& e = *s.find("version");
    throw ParseError(at_line(e.line, "unsupported version '" + e.value + "'"));
  }
  s.require("kind");
  const Entry& k = *s.find("kind");
  const auto kind = parse_kind(k.value);
  if (!kind) throw ParseError(at_line(k.line, "unknown kind '" + k.value + "'"));
  s.kind_ = *kind;
  s.levels_ = s.integer("levels", 1, kMinLevels, kMaxLevels);
  return s;
}

Scenario Scenario::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open scenario '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  try {
    return parse(ss.str(), parent.empty() ? "." : parent.string());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void Scenario::set_levels(int levels) {
  if (levels < kMinLevels || levels > kMaxLevels) {
    throw ParseError("--levels must lie in [" + std::to_string(kMinLevels) + ", " +
                     std::to_string(kMaxLevels) + "], got " + std::to_string(levels));
  }
  levels_ = levels;
}

void Scenario::allow_only(const std::vector<std::string_view>& allowed) const {
  for (const auto& [key, e] : entries_) {
    if (key == "version" || key == "kind" || key == "levels") continue;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ParseError(at_line(e.line, "unknown key '" + key + "' for kind '" +
                                           std::string(kind_name(kind_)) + "'"));
    }
  }
}

const Scenario::Entry* Scenario::find(std::string_view key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

bool Scenario::has(std::string_view key) const { return find(key) != nullptr; }

void Scenario::require(std::string_view key) const {
  if (!has(key)) throw ParseError("missing required key '" + std::string(key) + "'");
}

void Scenario::bad_value(std::string_view key, const Entry& e, std::string_view expected) const {
  throw ParseError(at_line(e.line, "key '" + std::string(key) + "': expected " + std::string(expected) +
                                       ", got '" + e.value + "'"));
}

std::string Scenario::text(std::string_view key, std::string fallback) const {
  const Entry* e = find(key);
  return e ? e->value : fallback;
}

std::string Scenario::choice(std::string_view key, std::string fallback,
                             const std::vector<std::string_view>& options) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  if (std::find(options.begin(), options.end(), e->value) == options.end()) {
    std::string list;
    for (const auto& o : options) list += (list.empty() ? "" : "|") + std::string(o);
    bad_value(key, *e, "one of " + list);
  }
  return e->value;
}

double Scenario::number(std::string_view key, double fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  const auto v = to_double(e->value);
  if (!v) bad_value(key, *e, "a number");
  return *v;
}

double Scenario::positive(std::string_view key, double fallback) const {
  const double v = number(key, fallback);
  if (!(v > 0.0)) bad_value(key, *find(key), "a positive number");
  return v;
}

double Scenario::nonnegative(std::string_view key, double fallback) const {
  const double v = number(key, fallback);
  if (!(v >= 0.0)) bad_value(key, *find(key), "a nonnegative number");
  return v;
}

std::optional<double> Scenario::optional_number(std::string_view key) const {
  if (!has(key)) return std::nullopt;
  return number(key, 0.0);
}

int Scenario::integer(std::string_view key, int fallback, int lo, int hi) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  const auto v = to_integer(e->value);
  if (!v || *v < lo || *v > hi) {
    bad_value(key, *e, "an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return static_cast<int>(*v);
}

std::uint64_t Scenario::seed() const {
  require("seed");
  const Entry& e = *find("seed");
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (ec != std::errc() || end != e.value.data() + e.value.size()) {
    bad_value("seed", e, "a nonnegative integer");
  }
  return v;
}

bool Scenario::flag(std::string_view key, bool fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  if (e->value == "true") return true;
  if (e->value == "false") return false;
  bad_value(key, *e, "true or false");
}

std::vector<double> Scenario::numbers(std::string_view key, std::vector<double> fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  std::vector<double> out;
  for (const auto t : split_list(e->value)) {
    const auto v = to_double(t);
    if (!v) bad_value(key, *e, "a list of numbers");
    out.push_back(*v);
  }
  return out;
}

std::string Scenario::path(std::string_view key) const {
  require(key);
  const std::filesystem::path p(find(key)->value);
  return p.is_absolute() ? p.string() : (std::filesystem::path(base_dir_) / p).string();
}

}  // namespace nonpure::cli
