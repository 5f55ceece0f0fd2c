#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace idla {

inline constexpr const char* kVersion = "0.1.0";

/// Failure classes, mapped one-to-one onto CLI exit codes.
enum class ErrorKind : int {
  usage = 2,         // bad flags / malformed input
  precondition = 3,  // violated operation precondition
  budget = 4,        // step cap or domain size budget exceeded
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_usage(const std::string& msg) {
  throw Error(ErrorKind::usage, "UsageError: " + msg);
}
[[noreturn]] inline void throw_precondition(const std::string& msg) {
  throw Error(ErrorKind::precondition, msg);
}
[[noreturn]] inline void throw_budget(const std::string& msg) {
  throw Error(ErrorKind::budget, msg);
}

}  // namespace idla
