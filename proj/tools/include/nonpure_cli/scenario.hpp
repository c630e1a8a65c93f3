/// @file scenario.hpp
/// @brief Scenario documents for the command-line runner.
///
/// A scenario is flat `key = value` text. `#` starts a comment, blank lines
/// are ignored, keys are lowercase words joined by `.`, `-` or `_`, and
/// lists are whitespace or comma separated. `version` and `kind` are
/// mandatory.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nonpure::cli {

/// Malformed scenario; the message names the line and key.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A fixture could not be built from otherwise well-formed keys.
class ConstructorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Kind { kValidate, kEvolve, kStokes, kNcStokes, kMetric, kIdentitySuite };

std::string_view kind_name(Kind kind);
std::optional<Kind> parse_kind(std::string_view name);

inline constexpr int kScenarioVersion = 1;
inline constexpr int kMinLevels = 1;
inline constexpr int kMaxLevels = 4;

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

class Scenario {
 public:
  /// Throws ParseError. Relative paths in the scenario resolve against
  /// `base_dir`.
  static Scenario parse(std::string_view text, std::string base_dir = ".");
  static Scenario load(const std::string& path);

  Kind kind() const { return kind_; }
  std::uint64_t hash() const { return hash_; }

  int levels() const { return levels_; }
  /// Command-line override; ParseError outside [kMinLevels, kMaxLevels].
  void set_levels(int levels);

  /// ParseError naming the first key not in `allowed`; `version`, `kind`
  /// and `levels` are always allowed.
  void allow_only(const std::vector<std::string_view>& allowed) const;

  bool has(std::string_view key) const;
  void require(std::string_view key) const;

  std::string text(std::string_view key, std::string fallback) const;
  std::string choice(std::string_view key, std::string fallback,
                     const std::vector<std::string_view>& options) const;
  double number(std::string_view key, double fallback) const;
  double positive(std::string_view key, double fallback) const;
  /// Tolerances may be zero.
  double nonnegative(std::string_view key, double fallback) const;
  std::optional<double> optional_number(std::string_view key) const;
  int integer(std::string_view key, int fallback, int lo, int hi) const;
  std::uint64_t seed() const;
  bool flag(std::string_view key, bool fallback) const;
  std::vector<double> numbers(std::string_view key, std::vector<double> fallback) const;
  /// Path value resolved against the scenario's directory.
  std::string path(std::string_view key) const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };

  const Entry* find(std::string_view key) const;
  [[noreturn]] void bad_value(std::string_view key, const Entry& e, std::string_view expected) const;

  std::map<std::string, Entry, std::less<>> entries_;
  std::string base_dir_;
  Kind kind_ = Kind::kValidate;
  int levels_ = 1;
  std::uint64_t hash_ = 0;
};

}  // namespace nonpure::cli
