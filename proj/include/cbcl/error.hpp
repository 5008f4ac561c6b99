#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cbcl {

// Values double as CLI exit codes.
enum class ErrorCode : int {
  invalid_argument = 2,
  dimension_mismatch = 3,
  bad_format = 4,
  unsupported_version = 5,
  truncated = 6,
  checksum_mismatch = 7,
  duplicate_id = 8,
  non_finite = 9,
  missing_id = 10,
  unknown_label = 11,
  empty_category = 12,
  io = 13,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

using WarningHandler = std::function<void(std::string_view)>;

/// Replaces the process-wide warning sink (default: one line on stderr).
/// Returns the previous handler.
WarningHandler set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

}  // namespace cbcl
