#pragma once

#include <stdexcept>
#include <string>

namespace latmpc {

// Bad or inconsistent configuration input (files, keys, value ranges).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Failure while constructing offline artifacts (models, QPs, lattices).
struct BuildError : std::runtime_error {
  explicit BuildError(const std::string& msg) : std::runtime_error(msg) {}
};

// Failure while executing a closed-loop run or writing its outputs.
struct RunError : std::runtime_error {
  explicit RunError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace latmpc
