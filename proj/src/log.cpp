// Copyright 2026 The UVIP Authors.
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

#include "uvip/log.hpp"

#include <mutex>

namespace uvip {

namespace {
std::mutex sink_mutex;
LogSink& sink() {
  static LogSink s;
  return s;
}
}  // namespace

void set_log_sink(LogSink s) {
  std::lock_guard lock(sink_mutex);
  sink() = std::move(s);
}

void log_message(LogLevel level, const std::string& message) {
  std::lock_guard lock(sink_mutex);
  if (sink()) sink()(level, message);
}

}  // namespace uvip
