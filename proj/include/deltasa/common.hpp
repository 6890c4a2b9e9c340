#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace deltasa {

/// Three-valued outcome for checks that numerics alone cannot always settle.
enum class Tri { False, True, Unknown };

constexpr std::string_view to_string(Tri t) noexcept {
  switch (t) {
    case Tri::False: return "false";
    case Tri::True: return "true";
    case Tri::Unknown: return "unknown";
  }
  return "unknown";
}

constexpr Tri tri(bool b) noexcept { return b ? Tri::True : Tri::False; }

/// Raised when a dense section cannot be allocated.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for malformed configuration or command-line input.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace deltasa
