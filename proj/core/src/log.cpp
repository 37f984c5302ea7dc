#include "adbn/log.hpp"

#include <iostream>
#include <mutex>

namespace adbn {

namespace {

std::mutex sink_mutex;
WarningSink sink = [](std::string_view m) { std::cerr << "warning: " << m << '\n'; };

}  // namespace

WarningSink set_warning_sink(WarningSink s) {
  std::lock_guard lock(sink_mutex);
  return std::exchange(sink, std::move(s));
}

void warn(std::string_view message) {
  std::lock_guard lock(sink_mutex);
  if (sink) sink(message);
}

}  // namespace adbn
