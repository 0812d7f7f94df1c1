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

#include "uvip/capi.h"

#include <algorithm>
#include <cstring>
#include <new>
#include <string>

#include "uvip/commands.hpp"
#include "uvip/error.hpp"
#include "uvip/log.hpp"

using namespace uvip;

struct uvip_config {
  ExperimentConfig cfg;
};
struct uvip_model {
  ModelBundle bundle;
};
struct uvip_policy {
  Policy policy;
};
struct uvip_report {
  BoundsReport report;
};
struct uvip_interpolant {
  Interpolant f;
};

namespace {

thread_local std::string last_error;

uvip_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return UVIP_ERR_INVALID_ARGUMENT;
    case ErrorCode::dimension_mismatch: return UVIP_ERR_DIMENSION;
    case ErrorCode::invalid_model: return UVIP_ERR_INVALID_MODEL;
    case ErrorCode::inconsistent_data: return UVIP_ERR_INCONSISTENT;
    case ErrorCode::unsupported: return UVIP_ERR_UNSUPPORTED;
    case ErrorCode::parse: return UVIP_ERR_PARSE;
    case ErrorCode::io: return UVIP_ERR_IO;
  }
  return UVIP_ERR_INTERNAL;
}

// Runs `body`, translating exceptions into status codes.
template <class Body>
uvip_status guard(Body&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return UVIP_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return UVIP_ERR_INTERNAL;
  }
}

uvip_status null_arg(const char* what) {
  last_error = std::string("null argument: ") + what;
  return UVIP_ERR_NULL;
}

#define UVIP_NONNULL(p)                       \
  do {                                        \
    if ((p) == nullptr) return null_arg(#p); \
  } while (0)

uvip_status copy_out(const std::string& s, char* buf, std::size_t capacity, std::size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (!buf || capacity < s.size() + 1) {
    last_error = "buffer too small";
    return UVIP_ERR_BUFFER;
  }
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return UVIP_OK;
}

const TabularMdp& tabular_of(const uvip_model* m) {
  if (!m->bundle.mdp) fail(ErrorCode::unsupported, "operation needs a tabular model");
  return *m->bundle.mdp;
}

}  // namespace

extern "C" {

const char* uvip_version(void) { return UVIP_VERSION_STRING; }

const char* uvip_status_string(uvip_status status) {
  switch (status) {
    case UVIP_OK: return "ok";
    case UVIP_ERR_INVALID_ARGUMENT: return "invalid argument";
    case UVIP_ERR_DIMENSION: return "dimension mismatch";
    case UVIP_ERR_INVALID_MODEL: return "invalid model";
    case UVIP_ERR_INCONSISTENT: return "inconsistent data";
    case UVIP_ERR_UNSUPPORTED: return "unsupported";
    case UVIP_ERR_PARSE: return "parse error";
    case UVIP_ERR_IO: return "i/o error";
    case UVIP_ERR_BUFFER: return "buffer too small";
    case UVIP_ERR_NULL: return "null argument";
    case UVIP_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* uvip_last_error(void) { return last_error.c_str(); }

void uvip_set_log_callback(uvip_log_fn fn, void* user) {
  if (!fn) {
    set_log_sink({});
    return;
  }
  set_log_sink([fn, user](LogLevel level, const std::string& msg) {
    fn(static_cast<uvip_log_level>(level), msg.c_str(), user);
  });
}

// ---- configuration --------------------------------------------------------

uvip_status uvip_config_new(uvip_config** out) {
  UVIP_NONNULL(out);
  return guard([&] {
    *out = new uvip_config{};
    return UVIP_OK;
  });
}

uvip_status uvip_config_parse_string(const char* text, uvip_config** out) {
  UVIP_NONNULL(text);
  UVIP_NONNULL(out);
  return guard([&] {
    *out = new uvip_config{parse_config(text)};
    return UVIP_OK;
  });
}

uvip_status uvip_config_parse_file(const char* path, uvip_config** out) {
  UVIP_NONNULL(path);
  UVIP_NONNULL(out);
  return guard([&] {
    *out = new uvip_config{load_config(path)};
    return UVIP_OK;
  });
}

uvip_status uvip_config_set(uvip_config* cfg, const char* key, const char* value) {
  UVIP_NONNULL(cfg);
  UVIP_NONNULL(key);
  UVIP_NONNULL(value);
  return guard([&] {
    set_config_value(cfg->cfg, key, value);
    return UVIP_OK;
  });
}

uvip_status uvip_config_get(const uvip_config* cfg, const char* key, char* buf, size_t capacity,
                            size_t* needed) {
  UVIP_NONNULL(cfg);
  UVIP_NONNULL(key);
  return guard([&] {
    const auto v = get_config_value(cfg->cfg, key);
    if (!v) fail(ErrorCode::invalid_argument, std::string("unknown key '") + key + "'");
    return copy_out(*v, buf, capacity, needed);
  });
}

uvip_status uvip_config_emit(const uvip_config* cfg, char* buf, size_t capacity, size_t* needed) {
  UVIP_NONNULL(cfg);
  return guard([&] { return copy_out(emit_config(cfg->cfg), buf, capacity, needed); });
}

void uvip_config_free(uvip_config* cfg) { delete cfg; }

// ---- models ----------------------------------------------------------------

uvip_status uvip_model_create(const uvip_config* cfg, uvip_model** out) {
  UVIP_NONNULL(cfg);
  UVIP_NONNULL(out);
  return guard([&] {
    *out = new uvip_model{build_model(cfg->cfg)};
    return UVIP_OK;
  });
}

int uvip_model_is_tabular(const uvip_model* m) { return m && m->bundle.model->states().is_tabular(); }

size_t uvip_model_state_count(const uvip_model* m) {
  return m && m->bundle.model->states().is_tabular() ? m->bundle.model->states().count() : 0;
}

size_t uvip_model_state_dim(const uvip_model* m) { return m ? m->bundle.model->state_dim() : 0; }
size_t uvip_model_action_count(const uvip_model* m) { return m ? m->bundle.model->action_count() : 0; }
size_t uvip_model_noise_dim(const uvip_model* m) { return m ? m->bundle.model->noise().dim : 0; }
double uvip_model_gamma(const uvip_model* m) { return m ? m->bundle.model->gamma() : 0.0; }
double uvip_model_r_max(const uvip_model* m) { return m ? m->bundle.model->r_max() : 0.0; }

uvip_status uvip_model_step(const uvip_model* m, const double* x, size_t action, const double* xi,
                            double* out) {
  UVIP_NONNULL(m);
  UVIP_NONNULL(x);
  UVIP_NONNULL(xi);
  UVIP_NONNULL(out);
  return guard([&] {
    const GenerativeModel& g = *m->bundle.model;
    const State next = transition(g, {x, g.state_dim()}, action, {xi, g.noise().dim});
    std::copy(next.begin(), next.end(), out);
    return UVIP_OK;
  });
}

uvip_status uvip_model_save_tabular(const uvip_model* m, const char* path) {
  UVIP_NONNULL(m);
  UVIP_NONNULL(path);
  return guard([&] {
    save_tabular(tabular_of(m), path);
    return UVIP_OK;
  });
}

void uvip_model_free(uvip_model* m) { delete m; }

// ---- dynamic programming ---------------------------------------------------

uvip_status uvip_value_iteration(const uvip_model* m, double eps, double* v_out, double* q_out,
                                 size_t* iterations) {
  UVIP_NONNULL(m);
  return guard([&] {
    ValueIterationOptions opts;
    opts.eps = eps;
    const auto vi = value_iteration(tabular_of(m), opts);
    if (v_out) std::copy(vi.values.begin(), vi.values.end(), v_out);
    if (q_out) std::copy(vi.q.data().begin(), vi.q.data().end(), q_out);
    if (iterations) *iterations = vi.iterations;
    return UVIP_OK;
  });
}

uvip_status uvip_bellman_residual(const uvip_model* m, const double* v, double* out) {
  UVIP_NONNULL(m);
  UVIP_NONNULL(v);
  UVIP_NONNULL(out);
  return guard([&] {
    const TabularMdp& t = tabular_of(m);
    *out = bellman_residual(t, {v, t.n_states()});
    return UVIP_OK;
  });
}

uvip_status uvip_upper_solution_check(const uvip_model* m, const double* v, double* out) {
  UVIP_NONNULL(m);
  UVIP_NONNULL(v);
  UVIP_NONNULL(out);
  return guard([&] {
    const TabularMdp& t = tabular_of(m);
    *out = upper_solution_check(t, {v, t.n_states()});
    return UVIP_OK;
  });
}

// ---- policies ----------------------------------------------------------------

uvip_status uvip_policy_resolve(const uvip_config* cfg, const uvip_model* m, uvip_policy** out) {
  UVIP_NONNULL(cfg);
  UVIP_NONNULL(m);
  UVIP_NONNULL(out);
  return guard([&] {
    *out = new uvip_policy{resolve_policy(cfg->cfg, m->bundle)};
    return UVIP_OK;
  });
}

uvip_status uvip_policy_load(const char* path, uvip_policy** out) {
  UVIP_NONNULL(path);
  UVIP_NONNULL(out);
  return guard([&] {
    *out = new uvip_policy{load_policy(path)};
    return UVIP_OK;
  });
}

uvip_status uvip_policy_greedy(const double* q, size_t n_states, size_t n_actions,
                               uvip_policy** out) {
  UVIP_NONNULL(q);
  UVIP_NONNULL(out);
  return guard([&] {
    require(n_states >= 1 && n_actions >= 1, ErrorCode::invalid_argument,
            "Q table must be at least 1 x 1");
    QTable table(n_states, n_actions);
    for (std::size_t x = 0; x < n_states; ++x)
      for (std::size_t a = 0; a < n_actions; ++a) table(x, a) = q[x * n_actions + a];
    *out = new uvip_policy{greedy_policy(table)};
    return UVIP_OK;
  });
}

uvip_status uvip_policy_save(const uvip_policy* p, const char* path) {
  UVIP_NONNULL(p);
  UVIP_NONNULL(path);
  return guard([&] {
    save_policy(p->policy, path);
    return UVIP_OK;
  });
}

uvip_status uvip_policy_value_exact(const uvip_model* m, const uvip_policy* p, double* v_out) {
  UVIP_NONNULL(m);
  UVIP_NONNULL(p);
  UVIP_NONNULL(v_out);
  return guard([&] {
    const auto v = policy_value_exact(tabular_of(m), p->policy);
    std::copy(v.begin(), v.end(), v_out);
    return UVIP_OK;
  });
}

uvip_status uvip_martingale_check(const uvip_model* m, const uvip_policy* p, double* out) {
  UVIP_NONNULL(m);
  UVIP_NONNULL(p);
  UVIP_NONNULL(out);
  return guard([&] {
    *out = martingale_check(tabular_of(m), p->policy);
    return UVIP_OK;
  });
}

void uvip_policy_free(uvip_policy* p) { delete p; }

// ---- upper value iteration -----------------------------------------------------

uvip_status uvip_run(const uvip_model* m, const uvip_policy* p, const uvip_config* cfg,
                     unsigned threads, uvip_report** out) {
  UVIP_NONNULL(m);
  UVIP_NONNULL(p);
  UVIP_NONNULL(cfg);
  UVIP_NONNULL(out);
  return guard([&] {
    *out = new uvip_report{uvip::uvip_run(*m->bundle.model, p->policy, effective_uvip(cfg->cfg, threads))};
    return UVIP_OK;
  });
}

size_t uvip_report_size(const uvip_report* r) { return r ? r->report.v_up.size() : 0; }
size_t uvip_report_dim(const uvip_report* r) { return r ? r->report.design.dim() : 0; }
size_t uvip_report_replicates(const uvip_report* r) { return r ? r->report.replicates.size() : 0; }
int uvip_report_converged(const uvip_report* r) { return r && r->report.converged(); }
size_t uvip_report_iterations(const uvip_report* r) { return r ? r->report.max_iterations() : 0; }
double uvip_report_lipschitz(const uvip_report* r) { return r ? r->report.lipschitz() : 0.0; }

uvip_status uvip_report_values(const uvip_report* r, double* v_pi, double* v_up, double* gap,
                               double* std_error) {
  UVIP_NONNULL(r);
  const BoundsReport& b = r->report;
  if (v_pi) std::copy(b.v_pi.begin(), b.v_pi.end(), v_pi);
  if (v_up) std::copy(b.v_up.begin(), b.v_up.end(), v_up);
  if (gap) std::copy(b.gap.begin(), b.gap.end(), gap);
  if (std_error) std::copy(b.v_up_stderr.begin(), b.v_up_stderr.end(), std_error);
  return UVIP_OK;
}

uvip_status uvip_report_state(const uvip_report* r, size_t index, double* coords) {
  UVIP_NONNULL(r);
  UVIP_NONNULL(coords);
  return guard([&] {
    require(index < r->report.design.size(), ErrorCode::invalid_argument, "state index out of range");
    const auto p = r->report.design.point(index);
    std::copy(p.begin(), p.end(), coords);
    return UVIP_OK;
  });
}

uvip_status uvip_report_interval(const uvip_report* r, double delta, double* lower, double* upper) {
  UVIP_NONNULL(r);
  UVIP_NONNULL(lower);
  UVIP_NONNULL(upper);
  return guard([&] {
    const auto iv = confidence_interval(r->report, delta);
    for (std::size_t i = 0; i < iv.size(); ++i) {
      lower[i] = iv[i].lower;
      upper[i] = iv[i].upper;
    }
    return UVIP_OK;
  });
}

uvip_status uvip_report_query(const uvip_report* r, const double* x, double* v_up,
                              double* std_error, double* inflation) {
  UVIP_NONNULL(r);
  UVIP_NONNULL(x);
  return guard([&] {
    const UpperQuery q = query_upper(r->report, {x, r->report.design.dim()});
    if (v_up) *v_up = q.v_up;
    if (std_error) *std_error = q.std_error;
    if (inflation) *inflation = q.inflation;
    return UVIP_OK;
  });
}

uvip_status uvip_report_fingerprint(const uvip_report* r, char* buf, size_t capacity,
                                    size_t* needed) {
  UVIP_NONNULL(r);
  return guard([&] { return copy_out(r->report.fingerprint, buf, capacity, needed); });
}

uvip_status uvip_report_write_csv(const uvip_report* r, const char* path) {
  UVIP_NONNULL(r);
  UVIP_NONNULL(path);
  return guard([&] {
    write_text_file(path, format_bounds_csv(r->report));
    return UVIP_OK;
  });
}

void uvip_report_free(uvip_report* r) { delete r; }

// ---- interpolation ---------------------------------------------------------------

uvip_status uvip_interpolant_create(size_t n, size_t dim, const double* coords,
                                    const double* values, double lipschitz, int discrete,
                                    uvip_interpolant** out) {
  UVIP_NONNULL(coords);
  UVIP_NONNULL(values);
  UVIP_NONNULL(out);
  return guard([&] {
    DesignSet design(dim, std::vector<double>(coords, coords + n * dim),
                     discrete ? Metric::discrete() : Metric::euclidean());
    std::optional<double> lip;
    if (lipschitz >= 0.0) lip = lipschitz;
    *out = new uvip_interpolant{
        build_interpolant(std::move(design), std::vector<double>(values, values + n), lip)};
    return UVIP_OK;
  });
}

uvip_status uvip_interpolant_eval(const uvip_interpolant* f, const double* x, double* out) {
  UVIP_NONNULL(f);
  UVIP_NONNULL(x);
  UVIP_NONNULL(out);
  return guard([&] {
    *out = f->f({x, f->f.design().dim()});
    return UVIP_OK;
  });
}

double uvip_interpolant_lipschitz(const uvip_interpolant* f) { return f ? f->f.lipschitz() : 0.0; }

uvip_status uvip_interpolant_save(const uvip_interpolant* f, const char* path) {
  UVIP_NONNULL(f);
  UVIP_NONNULL(path);
  return guard([&] {
    write_text_file(path, format_interpolant_csv(f->f));
    return UVIP_OK;
  });
}

uvip_status uvip_interpolant_load(const char* path, uvip_interpolant** out) {
  UVIP_NONNULL(path);
  UVIP_NONNULL(out);
  return guard([&] {
    *out = new uvip_interpolant{parse_interpolant_csv(read_text_file(path))};
    return UVIP_OK;
  });
}

void uvip_interpolant_free(uvip_interpolant* f) { delete f; }

uvip_status uvip_covering_radius(size_t n, size_t dim, const double* design, size_t n_probe,
                                 const double* probe, double* out) {
  UVIP_NONNULL(design);
  UVIP_NONNULL(probe);
  UVIP_NONNULL(out);
  return guard([&] {
    const DesignSet d(dim, std::vector<double>(design, design + n * dim), Metric::euclidean());
    *out = covering_radius(d, {probe, n_probe * dim});
    return UVIP_OK;
  });
}

// ---- commands --------------------------------------------------------------------

uvip_status uvip_command(const char* name, const uvip_config* cfg, const char* output_dir,
                         unsigned threads, int* exit_code, char* summary, size_t capacity,
                         size_t* needed) {
  UVIP_NONNULL(name);
  UVIP_NONNULL(cfg);
  return guard([&] {
    CommandOptions opts;
    opts.threads = threads;
    if (output_dir) opts.output_dir = output_dir;
    const std::string cmd = name;
    CommandResult r;
    if (cmd == "solve") r = cmd_solve(cfg->cfg, opts);
    else if (cmd == "evaluate") r = cmd_evaluate(cfg->cfg, opts);
    else if (cmd == "uvip") r = cmd_uvip(cfg->cfg, opts);
    else if (cmd == "figure1") r = cmd_figure1(cfg->cfg, opts);
    else if (cmd == "figure3") r = cmd_figure3(cfg->cfg, opts);
    else if (cmd == "check") r = cmd_check(cfg->cfg, opts);
    else fail(ErrorCode::invalid_argument, "unknown command '" + cmd + "'");
    if (exit_code) *exit_code = r.exit_code;
    std::string text;
    for (const auto& n : r.notes) text += n + "\n";
    text += "manifest: " + r.manifest_path + "\n";
    if (needed) *needed = text.size() + 1;
    if (summary && capacity > 0) {
      const std::size_t k = std::min(capacity - 1, text.size());
      std::memcpy(summary, text.data(), k);
      summary[k] = '\0';
    }
    return UVIP_OK;
  });
}

uvip_status uvip_manifest_verify(const char* path, size_t* mismatches, char* report,
                                 size_t capacity, size_t* needed) {
  UVIP_NONNULL(path);
  return guard([&] {
    const auto bad = verify_manifest(path);
    if (mismatches) *mismatches = bad.size();
    std::string text;
    for (const auto& b : bad)
      text += b.actual.empty() ? b.file + ": missing\n"
                               : b.file + ": expected " + b.expected + ", found " + b.actual + "\n";
    if (!report && !needed) return UVIP_OK;
    return copy_out(text, report, capacity, needed);
  });
}

}  // extern "C"
