#pragma once

#include <stdexcept>
#include <string>

namespace zb {

// Common base so callers can catch everything thrown by this library at once.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace zb
