// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace duocolor {

// Contract violations (bad arguments, invalid configs, shape mismatches).
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Unrecoverable runtime failures (I/O, non-finite values, corrupt files).
class FatalError : public std::runtime_error {
 public:
  explicit FatalError(const std::string& msg) : std::runtime_error(msg) {}
};

// A multi-file operation where some inputs failed and others succeeded.
class PartialFailure : public std::runtime_error {
 public:
  PartialFailure(const std::string& msg, int64_t failed, int64_t total)
      : std::runtime_error(msg), failed_count(failed), total_count(total) {}
  int64_t failed_count;
  int64_t total_count;
};

template <typename... Args>
std::string format_msg(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

template <typename... Args>
void check_arg(bool cond, Args&&... args) {
  if (!cond) throw UsageError(format_msg(std::forward<Args>(args)...));
}

template <typename... Args>
void check_runtime(bool cond, Args&&... args) {
  if (!cond) throw FatalError(format_msg(std::forward<Args>(args)...));
}

inline std::string shape_str(const std::vector<int64_t>& s) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ")";
  return os.str();
}

}  // namespace duocolor
