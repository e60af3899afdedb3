// SPDX-License-Identifier: Apache-2.0
#include "isac/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace isac::log {

namespace {

Level parse_env() {
  const char* v = std::getenv("ISAC_LOG_LEVEL");
  if (!v) return Level::warn;
  std::string s(v);
  if (s == "error") return Level::error;
  if (s == "warn") return Level::warn;
  if (s == "info") return Level::info;
  if (s == "debug") return Level::debug;
  return Level::warn;
}

const char* tag(Level lv) {
  switch (lv) {
    case Level::error: return "error";
    case Level::warn: return "warn";
    case Level::info: return "info";
    case Level::debug: return "debug";
  }
  return "?";
}

std::mutex g_mutex;

}  // namespace

Level threshold() {
  static const Level lv = parse_env();
  return lv;
}

void write(Level lv, const std::string& msg) {
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << "[isac:" << tag(lv) << "] " << msg << "\n";
}

}  // namespace isac::log
