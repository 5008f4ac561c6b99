#include "cbcl/error.hpp"

#include <iostream>
#include <mutex>

namespace cbcl {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::bad_format: return "bad_format";
    case ErrorCode::unsupported_version: return "unsupported_version";
    case ErrorCode::truncated: return "truncated";
    case ErrorCode::checksum_mismatch: return "checksum_mismatch";
    case ErrorCode::duplicate_id: return "duplicate_id";
    case ErrorCode::non_finite: return "non_finite";
    case ErrorCode::missing_id: return "missing_id";
    case ErrorCode::unknown_label: return "unknown_label";
    case ErrorCode::empty_category: return "empty_category";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

namespace {

std::mutex& handler_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& handler_slot() {
  static WarningHandler h = [](std::string_view msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return h;
}

}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(handler_mutex());
  WarningHandler previous = std::move(handler_slot());
  handler_slot() = std::move(handler);
  return previous;
}

void warn(std::string_view message) {
  std::lock_guard lock(handler_mutex());
  if (handler_slot()) handler_slot()(message);
}

}  // namespace cbcl
