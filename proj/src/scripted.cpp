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

#include "uvip/scripted.hpp"

#include "uvip/error.hpp"

namespace uvip {

ActionIndex ld_cartpole_action(StateView x) {
  require(x.size() == 4, ErrorCode::dimension_mismatch, "cart-pole states have 4 coordinates");
  return 3.0 * x[2] + x[3] > 0.0 ? 1 : 0;
}

Policy ld_cartpole() { return Policy(ScriptedPolicy{"ld_cartpole", &ld_cartpole_action}); }

Policy random_uniform(std::size_t action_count) {
  require(action_count >= 1, ErrorCode::invalid_argument, "action count must be >= 1");
  return Policy(UniformPolicy{action_count});
}

}  // namespace uvip
