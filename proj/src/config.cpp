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

#include "uvip/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/core.h>

#include "uvip/error.hpp"
#include "uvip/policy.hpp"

namespace uvip {

const char* to_string(EnvKind e) noexcept {
  switch (e) {
    case EnvKind::toy: return "toy";
    case EnvKind::chain: return "chain";
    case EnvKind::garnet: return "garnet";
    case EnvKind::frozen_lake: return "frozen_lake";
    case EnvKind::cartpole: return "cartpole";
    case EnvKind::acrobot: return "acrobot";
    case EnvKind::file: return "file";
  }
  return "?";
}

const char* to_string(PolicySource p) noexcept {
  switch (p) {
    case PolicySource::optimal: return "optimal";
    case PolicySource::vi_snapshot: return "vi_snapshot";
    case PolicySource::reinforce: return "reinforce";
    case PolicySource::random: return "random";
    case PolicySource::ld_cartpole: return "ld_cartpole";
    case PolicySource::file: return "file";
  }
  return "?";
}

namespace {

// Value conversion. Errors carry only the value; callers prefix the key.

double to_double(const std::string& s) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty())
    fail(ErrorCode::parse, fmt::format("'{}' is not a number", s));
  return v;
}

std::uint64_t to_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty())
    fail(ErrorCode::parse, fmt::format("'{}' is not a nonnegative integer", s));
  return v;
}

std::size_t to_size(const std::string& s) { return static_cast<std::size_t>(to_u64(s)); }

bool to_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  fail(ErrorCode::parse, fmt::format("'{}' is not true/false", s));
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> to_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) fail(ErrorCode::parse, fmt::format("empty entry in list '{}'", s));
    out.push_back(item);
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + items[i];
  return out;
}

std::vector<std::string> size_tokens(const std::vector<std::size_t>& v) {
  std::vector<std::string> out;
  for (auto k : v) out.push_back(std::to_string(k));
  return out;
}

std::string num(double v) { return fmt::format("{}", v); }

template <class Enum, std::size_t N>
Enum to_enum(const std::string& s, const Enum (&values)[N]) {
  for (Enum e : values)
    if (s == to_string(e)) return e;
  std::string names;
  for (Enum e : values) names += (names.empty() ? "" : ", ") + std::string(to_string(e));
  fail(ErrorCode::parse, fmt::format("'{}' is not one of: {}", s, names));
}

constexpr EnvKind all_envs[] = {EnvKind::toy,      EnvKind::chain,   EnvKind::garnet,
                                EnvKind::frozen_lake, EnvKind::cartpole, EnvKind::acrobot,
                                EnvKind::file};
constexpr PolicySource all_policies[] = {PolicySource::optimal,  PolicySource::vi_snapshot,
                                         PolicySource::reinforce, PolicySource::random,
                                         PolicySource::ld_cartpole, PolicySource::file};
constexpr Coupling all_couplings[] = {Coupling::shared, Coupling::independent};
constexpr Resampling all_resamplings[] = {Resampling::fresh, Resampling::frozen};
constexpr ControlVariateMode all_cv[] = {ControlVariateMode::automatic, ControlVariateMode::exact,
                                         ControlVariateMode::sampled};
constexpr PolicyValueMode all_pv[] = {PolicyValueMode::rollout, PolicyValueMode::interpolated};

struct Field {
  std::string key;
  std::optional<EnvKind> env;  // set for keys that exist only under one environment
  bool quoted;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

#define UVIP_NUM(expr) \
  [](const ExperimentConfig& c) { return num(c.expr); }, [](ExperimentConfig& c, const std::string& v) { c.expr = to_double(v); }
#define UVIP_SIZE(expr) \
  [](const ExperimentConfig& c) { return std::to_string(c.expr); }, [](ExperimentConfig& c, const std::string& v) { c.expr = to_size(v); }

std::size_t positive_size(const std::string& v) {
  const std::size_t n = to_size(v);
  require(n >= 1, ErrorCode::parse, "must be >= 1");
  return n;
}

double positive_double(const std::string& v) {
  const double x = to_double(v);
  require(x > 0.0, ErrorCode::parse, "must be positive");
  return x;
}

#define UVIP_POS_NUM(expr) \
  [](const ExperimentConfig& c) { return num(c.expr); }, [](ExperimentConfig& c, const std::string& v) { c.expr = positive_double(v); }
#define UVIP_POS_SIZE(expr) \
  [](const ExperimentConfig& c) { return std::to_string(c.expr); }, [](ExperimentConfig& c, const std::string& v) { c.expr = positive_size(v); }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    auto env_num = [&](const char* key, EnvKind e, auto get, auto set) {
      f.push_back({key, e, false, get, set});
    };
    f.push_back({"env", std::nullopt, true,
                 [](const ExperimentConfig& c) { return std::string(to_string(c.env)); },
                 [](ExperimentConfig& c, const std::string& v) { c.env = to_enum(v, all_envs); }});

    env_num("env.gamma", EnvKind::toy, UVIP_NUM(toy_gamma));

    env_num("env.length", EnvKind::chain, UVIP_SIZE(chain.length));
    env_num("env.noise_p", EnvKind::chain, UVIP_NUM(chain.noise_p));
    env_num("env.terminal_reward", EnvKind::chain, UVIP_NUM(chain.terminal_reward));
    env_num("env.step_reward", EnvKind::chain, UVIP_NUM(chain.step_reward));
    env_num("env.gamma", EnvKind::chain, UVIP_NUM(chain.gamma));

    env_num("env.states", EnvKind::garnet, UVIP_SIZE(garnet.n_states));
    env_num("env.actions", EnvKind::garnet, UVIP_SIZE(garnet.n_actions));
    env_num("env.branching", EnvKind::garnet, UVIP_SIZE(garnet.branching));
    env_num("env.seed", EnvKind::garnet, UVIP_SIZE(garnet.seed));
    env_num("env.boost_fraction", EnvKind::garnet, UVIP_NUM(garnet.boost_fraction));
    env_num("env.boost_factor", EnvKind::garnet, UVIP_NUM(garnet.boost_factor));
    env_num("env.gamma", EnvKind::garnet, UVIP_NUM(garnet.gamma));

    env_num("env.goal_reward", EnvKind::frozen_lake, UVIP_NUM(frozen_lake.goal_reward));
    env_num("env.gamma", EnvKind::frozen_lake, UVIP_NUM(frozen_lake.gamma));

    env_num("env.gravity", EnvKind::cartpole, UVIP_NUM(cartpole.gravity));
    env_num("env.mass_cart", EnvKind::cartpole, UVIP_NUM(cartpole.mass_cart));
    env_num("env.mass_pole", EnvKind::cartpole, UVIP_NUM(cartpole.mass_pole));
    env_num("env.half_length", EnvKind::cartpole, UVIP_NUM(cartpole.half_length));
    env_num("env.force", EnvKind::cartpole, UVIP_NUM(cartpole.force_mag));
    env_num("env.tau", EnvKind::cartpole, UVIP_NUM(cartpole.tau));
    env_num("env.angle_noise_std", EnvKind::cartpole, UVIP_NUM(cartpole.angle_noise_std));
    env_num("env.gamma", EnvKind::cartpole, UVIP_NUM(cartpole.gamma));

    env_num("env.dt", EnvKind::acrobot, UVIP_NUM(acrobot.dt));
    env_num("env.torque_noise", EnvKind::acrobot, UVIP_NUM(acrobot.torque_noise));
    env_num("env.gamma", EnvKind::acrobot, UVIP_NUM(acrobot.gamma));

    f.push_back({"env.path", EnvKind::file, true,
                 [](const ExperimentConfig& c) { return c.env_path; },
                 [](ExperimentConfig& c, const std::string& v) { c.env_path = v; }});
    f.push_back({"env.r_max", EnvKind::file, true,
                 [](const ExperimentConfig& c) { return c.env_r_max ? num(*c.env_r_max) : "auto"; },
                 [](ExperimentConfig& c, const std::string& v) {
                   if (v == "auto") c.env_r_max.reset();
                   else c.env_r_max = to_double(v);
                 }});

    f.push_back({"policy", std::nullopt, true,
                 [](const ExperimentConfig& c) { return std::string(to_string(c.policy)); },
                 [](ExperimentConfig& c, const std::string& v) { c.policy = to_enum(v, all_policies); }});
    f.push_back({"policy.k", std::nullopt, false, UVIP_SIZE(policy_k)});
    f.push_back({"policy.path", std::nullopt, true,
                 [](const ExperimentConfig& c) { return c.policy_path; },
                 [](ExperimentConfig& c, const std::string& v) { c.policy_path = v; }});

    f.push_back({"vi.eps", std::nullopt, false, UVIP_NUM(vi_eps)});
    f.push_back({"vi.snapshots", std::nullopt, true,
                 [](const ExperimentConfig& c) { return join(c.vi_snapshots); },
                 [](ExperimentConfig& c, const std::string& v) {
                   auto tokens = to_list(v);
                   for (const auto& t : tokens)
                     if (t != "mid" && t != "final" && to_u64(t) == 0)
                       fail(ErrorCode::parse, "snapshot indices start at 1");
                   c.vi_snapshots = std::move(tokens);
                 }});

    f.push_back({"reinforce.episodes", std::nullopt, false, UVIP_POS_SIZE(reinforce.episodes)});
    f.push_back({"reinforce.lr", std::nullopt, false, UVIP_NUM(reinforce.learning_rate)});
    f.push_back({"reinforce.horizon", std::nullopt, false, UVIP_POS_SIZE(reinforce.horizon)});
    f.push_back({"reinforce.snapshots", std::nullopt, true,
                 [](const ExperimentConfig& c) { return join(size_tokens(c.reinforce.snapshot_at)); },
                 [](ExperimentConfig& c, const std::string& v) {
                   c.reinforce.snapshot_at.clear();
                   for (const auto& t : to_list(v)) c.reinforce.snapshot_at.push_back(to_size(t));
                 }});
    f.push_back({"reinforce.start_state", std::nullopt, true,
                 [](const ExperimentConfig& c) {
                   return c.reinforce.start_state ? std::to_string(*c.reinforce.start_state)
                                                  : std::string("initial");
                 },
                 [](ExperimentConfig& c, const std::string& v) {
                   if (v == "initial") c.reinforce.start_state.reset();
                   else c.reinforce.start_state = to_size(v);
                 }});

    f.push_back({"uvip.m1", std::nullopt, false, UVIP_POS_SIZE(uvip.m1)});
    f.push_back({"uvip.m2", std::nullopt, false, UVIP_POS_SIZE(uvip.m2)});
    f.push_back({"uvip.n_design", std::nullopt, false, UVIP_SIZE(uvip.n_design)});
    f.push_back({"uvip.eps_stop", std::nullopt, false, UVIP_POS_NUM(uvip.eps_stop)});
    f.push_back({"uvip.k_max", std::nullopt, false, UVIP_POS_SIZE(uvip.k_max)});
    f.push_back({"uvip.coupling", std::nullopt, true,
                 [](const ExperimentConfig& c) { return std::string(to_string(c.uvip.coupling)); },
                 [](ExperimentConfig& c, const std::string& v) { c.uvip.coupling = to_enum(v, all_couplings); }});
    f.push_back({"uvip.resampling", std::nullopt, true,
                 [](const ExperimentConfig& c) { return std::string(to_string(c.uvip.resampling)); },
                 [](ExperimentConfig& c, const std::string& v) { c.uvip.resampling = to_enum(v, all_resamplings); }});
    f.push_back({"uvip.control_variate", std::nullopt, true,
                 [](const ExperimentConfig& c) { return std::string(to_string(c.uvip.control_variate)); },
                 [](ExperimentConfig& c, const std::string& v) { c.uvip.control_variate = to_enum(v, all_cv); }});
    f.push_back({"uvip.replicates", std::nullopt, false, UVIP_POS_SIZE(uvip.replicates)});
    f.push_back({"uvip.policy_value", std::nullopt, true,
                 [](const ExperimentConfig& c) { return std::string(to_string(c.uvip.policy_value)); },
                 [](ExperimentConfig& c, const std::string& v) { c.uvip.policy_value = to_enum(v, all_pv); }});
    f.push_back({"uvip.policy_value_rollouts", std::nullopt, false, UVIP_POS_SIZE(uvip.policy_value_rollouts)});
    f.push_back({"uvip.successor_rollouts", std::nullopt, false, UVIP_POS_SIZE(uvip.successor_rollouts)});
    f.push_back({"uvip.rollout_tol", std::nullopt, false, UVIP_POS_NUM(uvip.rollout_tol)});
    f.push_back({"uvip.lipschitz", std::nullopt, true,
                 [](const ExperimentConfig& c) { return c.uvip.lipschitz ? num(*c.uvip.lipschitz) : "estimated"; },
                 [](ExperimentConfig& c, const std::string& v) {
                   if (v == "estimated") c.uvip.lipschitz.reset();
                   else c.uvip.lipschitz = to_double(v);
                 }});
    f.push_back({"uvip.lipschitz_cap", std::nullopt, true,
                 [](const ExperimentConfig& c) { return c.uvip.lipschitz_cap ? num(*c.uvip.lipschitz_cap) : "none"; },
                 [](ExperimentConfig& c, const std::string& v) {
                   if (v == "none") c.uvip.lipschitz_cap.reset();
                   else c.uvip.lipschitz_cap = to_double(v);
                 }});
    f.push_back({"uvip.probe_size", std::nullopt, false, UVIP_SIZE(uvip.probe_size)});
    f.push_back({"uvip.delta", std::nullopt, false, UVIP_NUM(delta)});

    f.push_back({"figure1.reinforce", std::nullopt, false,
                 [](const ExperimentConfig& c) { return std::string(c.figure1_reinforce ? "true" : "false"); },
                 [](ExperimentConfig& c, const std::string& v) { c.figure1_reinforce = to_bool(v); }});
    f.push_back({"figure3.steps", std::nullopt, false, UVIP_POS_SIZE(figure3_steps)});
    f.push_back({"figure3.trajectories", std::nullopt, false, UVIP_POS_SIZE(figure3_trajectories)});
    f.push_back({"figure3.policies", std::nullopt, true,
                 [](const ExperimentConfig& c) { return join(c.figure3_policies); },
                 [](ExperimentConfig& c, const std::string& v) { c.figure3_policies = to_list(v); }});

    f.push_back({"seed", std::nullopt, false,
                 [](const ExperimentConfig& c) { return std::to_string(c.seed); },
                 [](ExperimentConfig& c, const std::string& v) {
                   c.seed = to_u64(v);
                   c.uvip.seed = c.seed;
                 }});
    f.push_back({"output", std::nullopt, true,
                 [](const ExperimentConfig& c) { return c.output; },
                 [](ExperimentConfig& c, const std::string& v) { c.output = v; }});
    return f;
  }();
  return table;
}

#undef UVIP_NUM
#undef UVIP_SIZE

const Field* find_field(const std::string& key, EnvKind env) {
  const Field* any = nullptr;
  for (const auto& f : fields()) {
    if (f.key != key) continue;
    if (!f.env || *f.env == env) return &f;
    any = &f;
  }
  if (any)
    fail(ErrorCode::parse, fmt::format("key '{}' does not apply to env \"{}\"", key, to_string(env)));
  return nullptr;
}

std::string quote(const std::string& v) {
  std::string out = "\"";
  for (char ch : v) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out + '"';
}

// Splits `key = value # comment`, honouring double quotes and backslash escapes.
std::pair<std::string, std::string> split_line(const std::string& line) {
  const auto eq = line.find('=');
  if (eq == std::string::npos) fail(ErrorCode::parse, "expected 'key = value'");
  const std::string key = trim(line.substr(0, eq));
  if (key.empty()) fail(ErrorCode::parse, "missing key before '='");
  const std::string rest = trim(line.substr(eq + 1));
  std::string value;
  if (!rest.empty() && rest.front() == '"') {
    std::size_t i = 1;
    bool closed = false;
    for (; i < rest.size(); ++i) {
      if (rest[i] == '\\' && i + 1 < rest.size()) {
        value += rest[++i];
      } else if (rest[i] == '"') {
        closed = true;
        ++i;
        break;
      } else {
        value += rest[i];
      }
    }
    if (!closed) fail(ErrorCode::parse, fmt::format("key '{}': unterminated quote", key));
    const std::string tail = trim(rest.substr(i));
    if (!tail.empty() && tail.front() != '#')
      fail(ErrorCode::parse, fmt::format("key '{}': unexpected text after closing quote", key));
  } else {
    value = trim(rest.substr(0, rest.find('#')));
  }
  return {key, value};
}

}  // namespace

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const Field* f = find_field(key, cfg.env);
  if (!f) fail(ErrorCode::parse, fmt::format("unknown key '{}'", key));
  try {
    f->set(cfg, value);
  } catch (const Error& e) {
    fail(ErrorCode::parse, fmt::format("key '{}': {}", key, e.what()));
  }
}

std::optional<std::string> get_config_value(const ExperimentConfig& cfg, const std::string& key) {
  for (const auto& f : fields())
    if (f.key == key && (!f.env || *f.env == cfg.env)) return f.get(cfg);
  return std::nullopt;
}

ExperimentConfig parse_config(const std::string& text) {
  struct Entry {
    std::size_t line;
    std::string key, value;
  };
  std::vector<Entry> entries;
  std::map<std::string, std::size_t> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    try {
      auto [key, value] = split_line(t);
      if (auto it = seen.find(key); it != seen.end())
        fail(ErrorCode::parse, fmt::format("key '{}' already set on line {}", key, it->second));
      seen[key] = line_no;
      entries.push_back({line_no, std::move(key), std::move(value)});
    } catch (const Error& e) {
      fail(ErrorCode::parse, fmt::format("line {}: {}", line_no, e.what()));
    }
  }

  ExperimentConfig cfg;
  // The environment decides which env.* keys exist, so it is applied first.
  std::stable_partition(entries.begin(), entries.end(), [](const Entry& e) { return e.key == "env"; });
  for (const auto& e : entries) {
    try {
      set_config_value(cfg, e.key, e.value);
    } catch (const Error& err) {
      fail(ErrorCode::parse, fmt::format("line {}: {}", e.line, err.what()));
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_text_file(path)); }

std::string emit_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) {
    if (f.env && *f.env != cfg.env) continue;
    const std::string v = f.get(cfg);
    out += fmt::format("{} = {}\n", f.key, f.quoted ? quote(v) : v);
  }
  return out;
}

std::vector<std::size_t> resolve_snapshots(const std::vector<std::string>& tokens,
                                           std::size_t final_iteration) {
  std::vector<std::size_t> out;
  for (const auto& t : tokens) {
    std::size_t k = 0;
    if (t == "final") k = final_iteration;
    else if (t == "mid") k = std::max<std::size_t>(1, final_iteration / 2);
    else k = to_size(t);
    if (k == 0 || k > final_iteration)
      fail(ErrorCode::invalid_argument,
           fmt::format("snapshot {} outside 1..{} (value iteration stopped there)", t, final_iteration));
    if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace uvip
