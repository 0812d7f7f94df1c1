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

#include <cstddef>

#include "uvip/policy.hpp"

namespace uvip {

/// Cart-pole rule on (position, velocity, angle, angular velocity): push
/// right (action 1) iff 3 * angle + angular velocity > 0, else left.
ActionIndex ld_cartpole_action(StateView x);
Policy ld_cartpole();

/// Uniform over `action_count` actions, redrawn at every step.
Policy random_uniform(std::size_t action_count);

}  // namespace uvip
