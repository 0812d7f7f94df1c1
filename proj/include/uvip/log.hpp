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

#pragma once

#include <functional>
#include <string>

namespace uvip {

enum class LogLevel { debug = 0, info = 1, warning = 2 };

using LogSink = std::function<void(LogLevel, const std::string&)>;

/// Replaces the process-wide sink; an empty sink drops every message.
void set_log_sink(LogSink sink);
void log_message(LogLevel level, const std::string& message);

}  // namespace uvip
