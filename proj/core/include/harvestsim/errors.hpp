#pragma once

#include <stdexcept>
#include <string>

namespace harvestsim {

// Bad user configuration: unknown keys, out-of-range values, missing files.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input data (trace/catalog/checkpoint files).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Violated API precondition; indicates a bug in the caller, not bad input.
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace harvestsim
