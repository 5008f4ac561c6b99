#pragma once

// Small helpers shared by the unit tests.

#include <doctest.h>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "cbcl/error.hpp"

namespace testing {

/// Captures warnings for the lifetime of the object.
class WarningCapture {
 public:
  WarningCapture()
      : previous_(cbcl::set_warning_handler(
            [this](std::string_view m) { messages.emplace_back(m); })) {}
  ~WarningCapture() { cbcl::set_warning_handler(previous_); }
  WarningCapture(const WarningCapture&) = delete;
  WarningCapture& operator=(const WarningCapture&) = delete;

  std::vector<std::string> messages;

 private:
  cbcl::WarningHandler previous_;
};

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("cbcl-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

template <typename Fn>
cbcl::ErrorCode error_code_of(Fn&& fn) {
  try {
    fn();
  } catch (const cbcl::Error& e) {
    return e.code();
  }
  FAIL("expected cbcl::Error");
  return cbcl::ErrorCode::io;
}

template <typename Fn>
std::string error_message_of(Fn&& fn) {
  try {
    fn();
  } catch (const cbcl::Error& e) {
    return e.what();
  }
  FAIL("expected cbcl::Error");
  return {};
}

inline bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace testing
