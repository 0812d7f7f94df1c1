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

#include <fstream>
#include <sstream>

#include <fmt/core.h>

#include "uvip/error.hpp"
#include "uvip/policy.hpp"

namespace uvip {

namespace {

/// Line reader that skips blanks and '#' comments and tracks line numbers.
class LineReader {
 public:
  explicit LineReader(const std::string& text) : in_(text) {}

  bool next(std::istringstream& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      fields.clear();
      fields.str(line);
      return true;
    }
    return false;
  }

  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorCode::parse, fmt::format("line {}: {}", line_no_, what));
  }

 private:
  std::istringstream in_;
  std::size_t line_no_ = 0;
};

template <class T>
T take(std::istringstream& fields, const LineReader& reader, const char* what) {
  T value{};
  if (!(fields >> value)) reader.error(fmt::format("expected {}", what));
  return value;
}

void expect_end(std::istringstream& fields, const LineReader& reader) {
  std::string extra;
  if (fields >> extra) reader.error(fmt::format("unexpected trailing token '{}'", extra));
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, fmt::format("cannot open '{}' for reading", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, fmt::format("cannot open '{}' for writing", path));
  out << content;
  if (!out) fail(ErrorCode::io, fmt::format("write to '{}' failed", path));
}

std::string format_tabular(const TabularMdp& m) {
  std::string out = fmt::format("tabular {} {} {}\n", m.n_states(), m.n_actions(), m.gamma());
  for (std::size_t x = 0; x < m.n_states(); ++x)
    for (ActionIndex a = 0; a < m.n_actions(); ++a) {
      out += fmt::format("{} {} {}", x, a, m.reward(x, a));
      for (double p : m.row(x, a)) out += fmt::format(" {}", p);
      out += '\n';
    }
  return out;
}

TabularMdp parse_tabular(const std::string& text) {
  LineReader reader(text);
  std::istringstream fields;
  if (!reader.next(fields)) fail(ErrorCode::parse, "empty tabular MDP file");
  if (take<std::string>(fields, reader, "header keyword") != "tabular")
    reader.error("header must start with 'tabular'");
  const auto n = take<std::size_t>(fields, reader, "state count");
  const auto m = take<std::size_t>(fields, reader, "action count");
  const auto gamma = take<double>(fields, reader, "discount");
  expect_end(fields, reader);
  if (n == 0 || m == 0) reader.error("state and action counts must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0)) reader.error("discount must lie in [0, 1)");

  TabularMdp mdp(n, m, gamma);
  std::vector<char> seen(n * m, 0);
  while (reader.next(fields)) {
    const auto x = take<std::size_t>(fields, reader, "state index");
    const auto a = take<std::size_t>(fields, reader, "action index");
    if (x >= n || a >= m) reader.error(fmt::format("(x={}, a={}) out of range", x, a));
    if (seen[x * m + a]) reader.error(fmt::format("duplicate row for (x={}, a={})", x, a));
    seen[x * m + a] = 1;
    mdp.reward(x, a) = take<double>(fields, reader, "reward");
    for (std::size_t y = 0; y < n; ++y) mdp.p(x, a, y) = take<double>(fields, reader, "probability");
    expect_end(fields, reader);
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i])
      fail(ErrorCode::parse, fmt::format("missing row for (x={}, a={})", i / m, i % m));
  return mdp;
}

TabularMdp load_tabular(const std::string& path) { return parse_tabular(read_text_file(path)); }

void save_tabular(const TabularMdp& m, const std::string& path) {
  write_text_file(path, format_tabular(m));
}

std::string format_policy(const Policy& pi) {
  if (const auto* d = std::get_if<DeterministicPolicy>(&pi.variant())) {
    std::string out = fmt::format("policy deterministic {}\n", d->actions.size());
    for (ActionIndex a : d->actions) out += fmt::format("{}\n", a);
    return out;
  }
  if (const auto* s = std::get_if<StochasticPolicy>(&pi.variant())) {
    std::string out = fmt::format("policy stochastic {} {}\n", s->n_states(), s->n_actions);
    for (std::size_t x = 0; x < s->n_states(); ++x) {
      const auto row = s->row(x);
      for (std::size_t a = 0; a < row.size(); ++a) out += fmt::format("{}{}", a ? " " : "", row[a]);
      out += '\n';
    }
    return out;
  }
  fail(ErrorCode::unsupported,
       fmt::format("policy '{}' has no tabular text form", pi.describe()));
}

Policy parse_policy(const std::string& text) {
  LineReader reader(text);
  std::istringstream fields;
  if (!reader.next(fields)) fail(ErrorCode::parse, "empty policy file");
  if (take<std::string>(fields, reader, "header keyword") != "policy")
    reader.error("header must start with 'policy'");
  const auto kind = take<std::string>(fields, reader, "policy kind");
  const auto n = take<std::size_t>(fields, reader, "state count");
  if (kind == "deterministic") {
    expect_end(fields, reader);
    DeterministicPolicy p;
    p.actions.reserve(n);
    for (std::size_t x = 0; x < n; ++x) {
      if (!reader.next(fields)) reader.error(fmt::format("expected {} action lines", n));
      p.actions.push_back(take<std::size_t>(fields, reader, "action index"));
      expect_end(fields, reader);
    }
    if (reader.next(fields)) reader.error("unexpected extra line");
    return Policy(std::move(p));
  }
  if (kind == "stochastic") {
    const auto m = take<std::size_t>(fields, reader, "action count");
    expect_end(fields, reader);
    if (m == 0) reader.error("action count must be positive");
    StochasticPolicy p{m, {}};
    p.probs.reserve(n * m);
    for (std::size_t x = 0; x < n; ++x) {
      if (!reader.next(fields)) reader.error(fmt::format("expected {} probability rows", n));
      for (std::size_t a = 0; a < m; ++a) p.probs.push_back(take<double>(fields, reader, "probability"));
      expect_end(fields, reader);
    }
    if (reader.next(fields)) reader.error("unexpected extra line");
    return Policy(std::move(p));
  }
  reader.error(fmt::format("unknown policy kind '{}'", kind));
}

Policy load_policy(const std::string& path) { return parse_policy(read_text_file(path)); }

void save_policy(const Policy& pi, const std::string& path) {
  write_text_file(path, format_policy(pi));
}

}  // namespace uvip
