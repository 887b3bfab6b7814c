#include "spoofkit/log.hpp"

#include <iostream>
#include <mutex>

namespace spoofkit::log {
namespace {

std::mutex g_mutex;
Level g_level = Level::info;
std::function<void(Level, std::string_view)> g_sink;

std::string_view tag(Level level) {
  switch (level) {
    case Level::debug: return "DEBUG";
    case Level::info: return "INFO";
    case Level::warn: return "WARN";
    case Level::error: return "ERROR";
    case Level::off: break;
  }
  return "";
}

}  // namespace

void set_level(Level level) {
  std::lock_guard lock(g_mutex);
  g_level = level;
}

Level level() {
  std::lock_guard lock(g_mutex);
  return g_level;
}

bool parse_level(std::string_view name, Level& out) {
  if (name == "debug") out = Level::debug;
  else if (name == "info") out = Level::info;
  else if (name == "warn") out = Level::warn;
  else if (name == "error") out = Level::error;
  else if (name == "off") out = Level::off;
  else return false;
  return true;
}

void set_sink(std::function<void(Level, std::string_view)> sink) {
  std::lock_guard lock(g_mutex);
  g_sink = std::move(sink);
}

void write(Level level, std::string_view message) {
  std::lock_guard lock(g_mutex);
  if (level < g_level) return;
  if (g_sink) {
    g_sink(level, message);
    return;
  }
  std::cerr << tag(level) << " " << message << '\n';
}

}  // namespace spoofkit::log
