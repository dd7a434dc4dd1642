#pragma once

#include <stdexcept>
#include <string>

namespace sonilab {

/// Process exit categories shared by the CLI and the service.
enum class ErrorKind { Usage = 1, Data = 2, Numeric = 3 };

/// Every failure raised by the library. `code` is a short stable identifier
/// (e.g. "channel_count", "marker_bounds") so callers can tell diagnostics
/// apart without parsing the message.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, std::string code, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& code() const noexcept { return code_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
  ErrorKind kind_;
  std::string code_;
};

[[noreturn]] void throw_data(const std::string& code, const std::string& message);
[[noreturn]] void throw_usage(const std::string& code, const std::string& message);
[[noreturn]] void throw_numeric(const std::string& code, const std::string& message);

}  // namespace sonilab
