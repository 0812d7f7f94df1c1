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

// Command-line front end. Talks to the library through the C interface only.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "uvip/capi.h"

namespace {

constexpr int exit_failure = 1;
constexpr int exit_usage = 2;

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<long long> seed;
  unsigned threads = 1;
  std::string output;
  std::string manifest;
  bool verbose = false;
  // Shortcut flags of the uvip subcommand, in config-key form.
  std::map<std::string, std::string> shortcuts;
};

void print_error(const char* what, uvip_status status) {
  std::fprintf(stderr, "uvip: %s: %s: %s\n", what, uvip_status_string(status), uvip_last_error());
}

void log_to_stderr(uvip_log_level level, const char* message, void* user) {
  const bool verbose = *static_cast<const bool*>(user);
  if (level == UVIP_LOG_DEBUG && !verbose) return;
  const char* tag = level == UVIP_LOG_WARNING ? "warning" : level == UVIP_LOG_INFO ? "info" : "debug";
  std::fprintf(stderr, "uvip: %s: %s\n", tag, message);
}

int verify_manifest(const std::string& path) {
  size_t mismatches = 0;
  size_t needed = 0;
  uvip_status st = uvip_manifest_verify(path.c_str(), &mismatches, nullptr, 0, &needed);
  if (st != UVIP_OK && st != UVIP_ERR_BUFFER) {
    print_error("manifest", st);
    return exit_failure;
  }
  std::string report(needed, '\0');
  st = uvip_manifest_verify(path.c_str(), &mismatches, report.data(), report.size(), &needed);
  if (st != UVIP_OK) {
    print_error("manifest", st);
    return exit_failure;
  }
  if (mismatches == 0) {
    std::printf("manifest ok: %s\n", path.c_str());
    return 0;
  }
  std::fputs(report.c_str(), stdout);
  std::printf("%zu output(s) changed since %s was written\n", mismatches, path.c_str());
  return exit_failure;
}

int run_command(const std::string& name, const Options& opts) {
  uvip_config* cfg = nullptr;
  uvip_status st = opts.config_path.empty() ? uvip_config_new(&cfg)
                                            : uvip_config_parse_file(opts.config_path.c_str(), &cfg);
  if (st != UVIP_OK) {
    print_error(opts.config_path.empty() ? "config" : opts.config_path.c_str(), st);
    return st == UVIP_ERR_IO ? exit_failure : exit_usage;
  }
  std::vector<std::pair<std::string, std::string>> settings;
  for (const auto& [key, value] : opts.shortcuts) settings.emplace_back(key, value);
  for (const auto& item : opts.overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::fprintf(stderr, "uvip: --set expects key=value, got '%s'\n", item.c_str());
      uvip_config_free(cfg);
      return exit_usage;
    }
    settings.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  if (opts.seed) settings.emplace_back("seed", std::to_string(*opts.seed));
  // `env` must precede env.* keys that only apply to the chosen environment.
  std::stable_partition(settings.begin(), settings.end(),
                        [](const auto& kv) { return kv.first == "env"; });
  for (const auto& [key, value] : settings) {
    st = uvip_config_set(cfg, key.c_str(), value.c_str());
    if (st != UVIP_OK) {
      print_error(("setting " + key).c_str(), st);
      uvip_config_free(cfg);
      return exit_usage;
    }
  }

  int code = 0;
  size_t needed = 0;
  std::string summary(4096, '\0');
  st = uvip_command(name.c_str(), cfg, opts.output.empty() ? nullptr : opts.output.c_str(),
                    opts.threads, &code, summary.data(), summary.size(), &needed);
  uvip_config_free(cfg);
  if (st != UVIP_OK) {
    print_error(name.c_str(), st);
    return st == UVIP_ERR_INVALID_ARGUMENT || st == UVIP_ERR_PARSE ? exit_usage : exit_failure;
  }
  std::fputs(summary.c_str(), stdout);
  if (needed > summary.size()) std::fputs("(summary truncated)\n", stdout);
  return code;
}

void add_common(CLI::App* sub, Options& opts) {
  sub->add_option("config", opts.config_path, "Experiment config file (key = value lines)")
      ->check(CLI::ExistingFile);
  sub->add_option("--set", opts.overrides, "Override a config key, key=value (repeatable)")
      ->allow_extra_args(false);
  sub->add_option("--seed", opts.seed, "Master seed (overrides the config)");
  sub->add_option("--threads", opts.threads, "Worker threads; results do not depend on it")
      ->check(CLI::Range(1u, 1024u));
  sub->add_option("--output", opts.output,
                  "Output directory (default: config `output`, then $UVIP_OUTPUT_DIR, then .)");
  sub->add_flag("-v,--verbose", opts.verbose, "Print debug traces");
}

void add_shortcut(CLI::App* sub, Options& opts, const std::string& flag, const std::string& key,
                  const std::string& help) {
  sub->add_option_function<std::string>(
      flag, [&opts, key](const std::string& v) { opts.shortcuts[key] = v; }, help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Upper value iteration: certified suboptimality bounds for MDP policies"};
  app.set_version_flag("--version", std::string(uvip_version()));
  app.require_subcommand(1);

  Options opts;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"solve", "Value iteration on a tabular environment: v_star.csv, q_star.csv, policy.txt"},
      {"evaluate", "Value of the configured policy: v_pi.csv"},
      {"uvip", "Upper bounds for the configured policy: bounds.csv"},
      {"figure1", "Certify value-iteration (and REINFORCE) snapshots along learning"},
      {"figure3", "Bounds along sampled trajectories of each policy on a box environment"},
      {"check", "Invariant suite on the tabular environments, or verify a manifest"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, opts);
    subs.push_back(sub);
  }

  CLI::App* uvip = app.get_subcommand("uvip");
  add_shortcut(uvip, opts, "--env", "env", "Environment name");
  add_shortcut(uvip, opts, "--policy", "policy", "Policy source name, or file:<path>");
  add_shortcut(uvip, opts, "--policy-file", "policy.path", "Policy file (sets policy = file)");
  add_shortcut(uvip, opts, "--m1", "uvip.m1", "Successor samples for the control variate");
  add_shortcut(uvip, opts, "--m2", "uvip.m2", "Outer samples per design point");
  add_shortcut(uvip, opts, "--n-design", "uvip.n_design", "Design size on box environments");
  add_shortcut(uvip, opts, "--eps", "uvip.eps_stop", "Stopping tolerance on the sup change");
  add_shortcut(uvip, opts, "--k-max", "uvip.k_max", "Iteration cap");
  add_shortcut(uvip, opts, "--coupling", "uvip.coupling", "shared | independent");
  add_shortcut(uvip, opts, "--resampling", "uvip.resampling", "fresh | frozen");
  add_shortcut(uvip, opts, "--replicates", "uvip.replicates", "Independent replicates");

  app.get_subcommand("check")
      ->add_option("--manifest", opts.manifest, "Re-hash the outputs listed in a manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_usage;
  }

  if (opts.shortcuts.count("policy.path") && !opts.shortcuts.count("policy"))
    opts.shortcuts["policy"] = "file";
  uvip_set_log_callback(log_to_stderr, &opts.verbose);

  for (CLI::App* sub : subs) {
    if (!sub->parsed()) continue;
    if (sub->get_name() == "check" && !opts.manifest.empty()) return verify_manifest(opts.manifest);
    return run_command(sub->get_name(), opts);
  }
  return exit_usage;
}
