#pragma once

#include <stdexcept>
#include <string>

namespace taildep {

// Invalid configuration or malformed input. CLI maps this to exit code 2.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

// Valid request that cannot be carried out on the given data. CLI exit code 3.
struct computation_error : std::runtime_error {
  explicit computation_error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

// Moment constraint unsatisfiable: 1/2 lies outside the hull of the angles.
struct infeasible_error : computation_error {
  explicit infeasible_error(const std::string& what_arg) : computation_error(what_arg) {}
};

// Sample is degenerate for the requested operation (e.g. zero variance).
struct degenerate_error : computation_error {
  explicit degenerate_error(const std::string& what_arg) : computation_error(what_arg) {}
};

}  // namespace taildep
