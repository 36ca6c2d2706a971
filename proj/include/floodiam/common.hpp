#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace floodiam {

/// Raised when an input violates a documented invariant. The message names
/// the offending field or record.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a text input (grid, CSV, scenario document) cannot be parsed.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kNoZone = -1;

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

/// Parses a double from the full text of `text`; throws ParseError otherwise.
double parse_double(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);

std::string_view trim(std::string_view text);

/// 64-bit FNV-1a, used for content hashes.
class Fnv1a {
 public:
  void update(std::string_view bytes);
  std::uint64_t digest() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace floodiam
