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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "uvip/commands.hpp"
#include "uvip/dp.hpp"
#include "uvip/error.hpp"
#include "uvip/manifest.hpp"

using namespace uvip;
namespace fs = std::filesystem;

namespace {

class CommandTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("uvip_cmd_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CommandOptions opts(const std::string& sub = "", unsigned threads = 1) const {
    CommandOptions o;
    o.threads = threads;
    o.output_dir = (dir_ / sub).string();
    return o;
  }

  std::string read(const std::string& rel) const { return read_text_file((dir_ / rel).string()); }

  static std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
  }

  fs::path dir_;
};

ExperimentConfig config(const std::string& text) { return parse_config(text); }

}  // namespace

TEST_F(CommandTest, SolveWritesVerifiableOptimum) {
  const auto cfg = config("env = \"chain\"\nenv.gamma = 0.8\n");
  const auto r = cmd_solve(cfg, opts());
  EXPECT_EQ(r.exit_code, exit_code::ok);
  const auto v_lines = lines(read("v_star.csv"));
  ASSERT_EQ(v_lines.size(), 11u);
  EXPECT_EQ(v_lines[0], "state,v_star");
  std::vector<double> v;
  for (std::size_t i = 1; i < v_lines.size(); ++i)
    v.push_back(std::stod(v_lines[i].substr(v_lines[i].find(',') + 1)));
  EXPECT_LE(bellman_residual(build_model(cfg).mdp.value(), v), 1e-9);
  EXPECT_EQ(lines(read("q_star.csv"))[0], "state,a0,a1");
  EXPECT_EQ(read("policy.txt").rfind("policy deterministic 10", 0), 0u);
  EXPECT_TRUE(verify_manifest(r.manifest_path).empty());
}

TEST_F(CommandTest, SolveFrozenLakeGoalNeighboursPositive) {
  cmd_solve(config("env = \"frozen_lake\"\n"), opts());
  const auto v_lines = lines(read("v_star.csv"));
  for (int s : {10, 14}) {
    const std::string& row = v_lines[s + 1];
    EXPECT_GT(std::stod(row.substr(row.find(',') + 1)), 0.0) << row;
  }
}

TEST_F(CommandTest, SolveIsByteIdenticalOnRerun) {
  const auto cfg = config("env = \"garnet\"\nseed = 4\n");
  cmd_solve(cfg, opts("a"));
  cmd_solve(cfg, opts("b"));
  for (const char* f : {"v_star.csv", "q_star.csv", "policy.txt"})
    EXPECT_EQ(read(std::string("a/") + f), read(std::string("b/") + f)) << f;
}

TEST_F(CommandTest, SolveRejectsBoxEnvironment) {
  EXPECT_THROW(cmd_solve(config("env = \"cartpole\"\n"), opts()), Error);
}

TEST_F(CommandTest, EvaluateExactAndRollout) {
  cmd_evaluate(config("env = \"toy\"\npolicy = \"random\"\n"), opts("toy"));
  const auto toy = lines(read("toy/v_pi.csv"));
  ASSERT_EQ(toy.size(), 3u);
  const auto r = cmd_evaluate(config("env = \"cartpole\"\npolicy = \"ld_cartpole\"\n"
                                     "uvip.n_design = 5\nuvip.policy_value_rollouts = 4\n"),
                              opts("cp"));
  EXPECT_EQ(lines(read("cp/v_pi.csv")).size(), 6u);
  EXPECT_TRUE(verify_manifest(r.manifest_path).empty());
}

TEST_F(CommandTest, UvipWritesBoundsAndEchoesConfig) {
  const auto cfg = config("env = \"garnet\"\nuvip.m1 = 50\nuvip.m2 = 50\nuvip.replicates = 2\n"
                          "uvip.eps_stop = 0.01\npolicy = \"optimal\"\n");
  const auto r = cmd_uvip(cfg, opts());
  const auto rows = lines(read("bounds.csv"));
  ASSERT_EQ(rows.size(), 21u);
  EXPECT_EQ(rows[0], "state,v_pi,v_up,gap,stderr");
  const std::string manifest = read("uvip.manifest");
  EXPECT_NE(manifest.find("--- config ---\n" + emit_config(cfg)), std::string::npos);
  EXPECT_NE(manifest.find("fact.fingerprint = "), std::string::npos);
  EXPECT_TRUE(r.exit_code == exit_code::ok || r.exit_code == exit_code::not_converged);
  EXPECT_TRUE(verify_manifest(r.manifest_path).empty());
}

TEST_F(CommandTest, UvipExhaustionHasDistinctExitCode) {
  const auto cfg = config("env = \"chain\"\npolicy = \"random\"\nuvip.m1 = 10\nuvip.m2 = 10\n"
                          "uvip.k_max = 2\nuvip.eps_stop = 1e-12\n");
  EXPECT_EQ(cmd_uvip(cfg, opts()).exit_code, exit_code::not_converged);
  const auto ok = config("env = \"toy\"\nuvip.m1 = 5\nuvip.m2 = 5\n");
  EXPECT_EQ(cmd_uvip(ok, opts("ok")).exit_code, exit_code::ok);
}

TEST_F(CommandTest, UvipOutputIndependentOfThreads) {
  const auto cfg = config("env = \"garnet\"\npolicy = \"random\"\nuvip.m1 = 40\nuvip.m2 = 40\n"
                          "uvip.replicates = 2\nuvip.k_max = 5\n");
  cmd_uvip(cfg, opts("t1", 1));
  cmd_uvip(cfg, opts("t3", 3));
  EXPECT_EQ(read("t1/bounds.csv"), read("t3/bounds.csv"));
}

TEST_F(CommandTest, UvipBoxWritesInterpolantAndLipschitzSequence) {
  const auto cfg = config("env = \"cartpole\"\npolicy = \"ld_cartpole\"\nuvip.m1 = 5\nuvip.m2 = 5\n"
                          "uvip.n_design = 30\nuvip.k_max = 3\nuvip.policy_value = \"interpolated\"\n"
                          "uvip.policy_value_rollouts = 3\n");
  cmd_uvip(cfg, opts());
  EXPECT_EQ(lines(read("bounds.csv"))[0], "x0,x1,x2,x3,v_pi,v_up,gap,stderr");
  EXPECT_EQ(read("interpolant.csv").rfind("# uvip-interpolant", 0), 0u);
  EXPECT_GE(lines(read("lipschitz.csv")).size(), 2u);
}

TEST_F(CommandTest, ManifestDetectsTampering) {
  const auto r = cmd_solve(config("env = \"toy\"\n"), opts());
  {
    std::ofstream out(dir_ / "v_star.csv", std::ios::app);
    out << "tampered\n";
  }
  const auto bad = verify_manifest(r.manifest_path);
  ASSERT_EQ(bad.size(), 1u);
  EXPECT_EQ(bad[0].file, "v_star.csv");
  fs::remove(dir_ / "policy.txt");
  EXPECT_EQ(verify_manifest(r.manifest_path).size(), 2u);
}

TEST_F(CommandTest, Figure1SingleSnapshotWritesOneCsv) {
  const auto cfg = config("env = \"chain\"\nvi.snapshots = \"final\"\nuvip.m1 = 50\nuvip.m2 = 50\n"
                          "uvip.replicates = 2\n");
  const auto r = cmd_figure1(cfg, opts());
  std::size_t csvs = 0;
  for (const auto& f : r.files)
    csvs += fs::path(f).filename().string().rfind("figure1_vi_k", 0) == 0;
  EXPECT_EQ(csvs, 1u);
  const auto summary = lines(read("figure1_summary.csv"));
  ASSERT_EQ(summary.size(), 2u);
  EXPECT_EQ(summary[0],
            "source,k,mean_gap,max_gap,max_gap_stderr,argmax_state,iterations,converged");
}

TEST_F(CommandTest, Figure3SingleStepAndInflation) {
  const auto cfg = config("env = \"cartpole\"\nuvip.m1 = 5\nuvip.m2 = 5\nuvip.n_design = 30\n"
                          "uvip.k_max = 3\nuvip.policy_value = \"interpolated\"\n"
                          "uvip.policy_value_rollouts = 3\nfigure3.steps = 1\n"
                          "figure3.policies = \"ld_cartpole\"\nuvip.replicates = 2\n");
  cmd_figure3(cfg, opts());
  const auto rows = lines(read("figure3_ld_cartpole.csv"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0],
            "trajectory,t,x0,x1,x2,x3,v_pi,v_pi_stderr,v_up,v_up_stderr,inflation,upper,gap");
  // Column 11 is the inflation; the trajectory start is off the design.
  std::vector<std::string> cells;
  std::istringstream in(rows[1]);
  for (std::string c; std::getline(in, c, ',');) cells.push_back(c);
  ASSERT_EQ(cells.size(), 13u);
  EXPECT_GT(std::stod(cells[10]), 0.0);
  EXPECT_EQ(lines(read("figure3_summary.csv")).size(), 2u);
}

TEST_F(CommandTest, Figure3RestartsEpisodesUntilEnoughStates) {
  const auto cfg = config("env = \"cartpole\"\nuvip.m1 = 3\nuvip.m2 = 3\nuvip.n_design = 20\n"
                          "uvip.k_max = 2\nuvip.policy_value = \"interpolated\"\n"
                          "uvip.policy_value_rollouts = 2\nfigure3.steps = 60\nfigure3.trajectories = 2\n"
                          "figure3.policies = \"random\"\nuvip.replicates = 2\n");
  const auto r = cmd_figure3(cfg, opts());
  const auto rows = lines(read("figure3_random.csv"));
  ASSERT_EQ(rows.size(), 121u);
  EXPECT_EQ(rows[60].rfind("0,59,", 0), 0u);
  EXPECT_EQ(rows[61].rfind("1,0,", 0), 0u);
  // A random policy drops the pole well within 60 steps, so episodes restarted.
  const RunManifest m = parse_manifest(read_text_file(r.manifest_path));
  bool found = false;
  for (const auto& [k, v] : m.facts)
    if (k == "random.episodes") {
      found = true;
      EXPECT_GT(std::stoul(v), 2u);
    }
  EXPECT_TRUE(found);
  EXPECT_EQ(lines(read("figure3_summary.csv"))[1].rfind("random,120,", 0), 0u);
}

TEST_F(CommandTest, Figure3RejectsTabular) {
  EXPECT_THROW(cmd_figure3(config("env = \"chain\"\n"), opts()), Error);
}

TEST_F(CommandTest, CheckSuitePasses) {
  const auto r = cmd_check(ExperimentConfig{}, opts());
  EXPECT_EQ(r.exit_code, exit_code::ok);
  const auto rows = lines(read("check.csv"));
  ASSERT_GT(rows.size(), 10u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i].substr(rows[i].rfind(',') + 1), "true") << rows[i];
}

TEST_F(CommandTest, OutputDirectoryPrecedence) {
  ExperimentConfig cfg;
  CommandOptions o;
  cfg.output = "from_config";
  EXPECT_EQ(resolve_output_dir(cfg, o), "from_config");
  o.output_dir = "from_flag";
  EXPECT_EQ(resolve_output_dir(cfg, o), "from_flag");
  cfg.output.clear();
  o.output_dir.clear();
  setenv("UVIP_OUTPUT_DIR", "from_env", 1);
  EXPECT_EQ(resolve_output_dir(cfg, o), "from_env");
  unsetenv("UVIP_OUTPUT_DIR");
  EXPECT_EQ(resolve_output_dir(cfg, o), ".");
}

TEST_F(CommandTest, PolicyResolutionErrors) {
  const auto chain = build_model(config("env = \"chain\"\n"));
  EXPECT_THROW(resolve_named_policy("ld_cartpole", ExperimentConfig{}, chain), Error);
  EXPECT_THROW(resolve_named_policy("psychic", ExperimentConfig{}, chain), Error);
  EXPECT_THROW(resolve_named_policy("file:/no/such/policy.txt", ExperimentConfig{}, chain), Error);
}
