// Copyright 2026 The Gadget Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GADGET_CORE_LOG_HPP
#define GADGET_CORE_LOG_HPP

#include <functional>
#include <iostream>
#include <mutex>
#include <string>

namespace gadget {

enum class LogLevel { Info, Warning };

using LogSink = std::function<void(LogLevel, const std::string&)>;

namespace detail {
inline std::mutex& log_mutex() {
  static std::mutex m;
  return m;
}
inline LogSink& log_sink() {
  static LogSink sink = [](LogLevel level, const std::string& msg) {
    std::cerr << (level == LogLevel::Warning ? "[warn] " : "[info] ") << msg << '\n';
  };
  return sink;
}
}  // namespace detail

/// Replaces the process-wide sink; returns the previous one. Pass an empty
/// function to silence logging.
inline LogSink set_log_sink(LogSink sink) {
  std::lock_guard lock(detail::log_mutex());
  std::swap(detail::log_sink(), sink);
  return sink;
}

inline void log(LogLevel level, const std::string& msg) {
  std::lock_guard lock(detail::log_mutex());
  if (detail::log_sink()) detail::log_sink()(level, msg);
}

inline void log_info(const std::string& msg) { log(LogLevel::Info, msg); }
inline void log_warning(const std::string& msg) { log(LogLevel::Warning, msg); }

}  // namespace gadget

#endif  // GADGET_CORE_LOG_HPP
