// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <sstream>
#include <string>

namespace isac::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

// Threshold comes from ISAC_LOG_LEVEL (error|warn|info|debug), default warn.
Level threshold();
void write(Level lv, const std::string& msg);

template <typename... Args>
void emit(Level lv, Args&&... args) {
  if (lv > threshold()) return;
  std::ostringstream os;
  (os << ... << args);
  write(lv, os.str());
}

}  // namespace isac::log

#define ISAC_LOG_ERROR(...) ::isac::log::emit(::isac::log::Level::error, __VA_ARGS__)
#define ISAC_LOG_WARN(...) ::isac::log::emit(::isac::log::Level::warn, __VA_ARGS__)
#define ISAC_LOG_INFO(...) ::isac::log::emit(::isac::log::Level::info, __VA_ARGS__)
#define ISAC_LOG_DEBUG(...) ::isac::log::emit(::isac::log::Level::debug, __VA_ARGS__)
