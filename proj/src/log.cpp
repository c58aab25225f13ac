#include "harvest/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace harvest::log {

namespace {
std::atomic<Level> g_level{Level::kWarn};
std::mutex g_mutex;

std::string_view tag(Level level) {
  switch (level) {
    case Level::kDebug: return "debug";
    case Level::kInfo: return "info";
    case Level::kWarn: return "warn";
    case Level::kError: return "error";
    case Level::kOff: break;
  }
  return "";
}
}  // namespace

void set_level(Level level) { g_level.store(level); }
Level level() { return g_level.load(); }

void write(Level lvl, std::string_view message) {
  if (lvl < g_level.load() || lvl == Level::kOff) return;
  std::lock_guard lock(g_mutex);
  std::cerr << "[" << tag(lvl) << "] " << message << '\n';
}

}  // namespace harvest::log
