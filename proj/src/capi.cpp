#include "qwbc.h"

#include <cstring>
#include <sstream>
#include <string>

#include "harness.hpp"

struct qwbc_graph {
  qwbc::Digraph g;
};

struct qwbc_config {
  qwbc::ExperimentConfig cfg;
};

struct qwbc_series {
  qwbc::MonteCarloResult r;
};

struct qwbc_sweep {
  std::vector<qwbc::SweepRow> rows;
};

namespace {

thread_local std::string g_last_error;

qwbc_status fail(qwbc_status code, const char* what) {
  g_last_error = what;
  return code;
}

// errno-style: failures overwrite the thread's message, successes leave it
template <typename Fn>
qwbc_status guarded(Fn&& fn) {
  try {
    fn();
    return QWBC_OK;
  } catch (const qwbc::ConfigError& e) {
    return fail(QWBC_ERR_CONFIG, e.what());
  } catch (const qwbc::InvalidParameter& e) {
    return fail(QWBC_ERR_CONFIG, e.what());
  } catch (const qwbc::OverflowError& e) {
    return fail(QWBC_ERR_ENGINE, e.what());
  } catch (const qwbc::IoError& e) {
    return fail(QWBC_ERR_RUNTIME, e.what());
  } catch (const std::exception& e) {
    return fail(QWBC_ERR_RUNTIME, e.what());
  }
}

qwbc_status run_study(const qwbc_config* cfg, const qwbc_graph* graph, const char* out_csv,
                      const char* trace_dir, qwbc_series** out, qwbc::RunMode mode) {
  if (out) *out = nullptr;
  if (!cfg) return fail(QWBC_ERR_CONFIG, "null config handle");
  return guarded([&] {
    qwbc::MonteCarloOptions opt;
    if (graph) opt.fixed_graph = &graph->g;
    if (trace_dir) opt.trace_dir = trace_dir;
    qwbc::MonteCarloResult r = qwbc::monte_carlo(cfg->cfg, mode, opt);
    if (out_csv) {
      std::ostringstream os;
      qwbc::write_aggregate_csv(r, os);
      qwbc::write_file(out_csv, os.str());
    }
    if (out) *out = new qwbc_series{std::move(r)};
  });
}

}  // namespace

extern "C" {

const char* qwbc_error_message(void) { return g_last_error.c_str(); }

qwbc_status qwbc_graph_generate(int32_t n_nodes, double edge_prob, uint64_t seed,
                                qwbc_graph** out) {
  if (!out) return fail(QWBC_ERR_CONFIG, "null output handle");
  *out = nullptr;
  return guarded([&] {
    qwbc::CounterStream rng{seed, qwbc::kDomainGraph, 0};
    *out = new qwbc_graph{qwbc::Digraph::ring_plus_random(n_nodes, edge_prob, rng)};
  });
}

qwbc_status qwbc_graph_load(const char* path, qwbc_graph** out) {
  if (!out) return fail(QWBC_ERR_CONFIG, "null output handle");
  *out = nullptr;
  if (!path) return fail(QWBC_ERR_CONFIG, "null path");
  return guarded([&] { *out = new qwbc_graph{qwbc::Digraph::load_file(path)}; });
}

qwbc_status qwbc_graph_save(const qwbc_graph* g, const char* path) {
  if (!g || !path) return fail(QWBC_ERR_CONFIG, "null argument");
  return guarded([&] { g->g.save_file(path); });
}

int32_t qwbc_graph_nodes(const qwbc_graph* g) { return g ? g->g.node_count() : 0; }

int32_t qwbc_graph_edge_count(const qwbc_graph* g) { return g ? g->g.edge_count() : 0; }

int qwbc_graph_strongly_connected(const qwbc_graph* g) {
  return g && g->g.strongly_connected() ? 1 : 0;
}

void qwbc_graph_free(qwbc_graph* g) { delete g; }

qwbc_status qwbc_config_create(qwbc_config** out) {
  if (!out) return fail(QWBC_ERR_CONFIG, "null output handle");
  *out = new qwbc_config{};
  return QWBC_OK;
}

qwbc_status qwbc_config_load(const char* path, qwbc_config** out) {
  if (!out) return fail(QWBC_ERR_CONFIG, "null output handle");
  *out = nullptr;
  if (!path) return fail(QWBC_ERR_CONFIG, "null path");
  return guarded([&] { *out = new qwbc_config{qwbc::load_config(path)}; });
}

qwbc_status qwbc_config_set(qwbc_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return fail(QWBC_ERR_CONFIG, "null argument");
  return guarded([&] { qwbc::apply_config_entry(cfg->cfg, key, value); });
}

qwbc_status qwbc_config_get(const qwbc_config* cfg, const char* key, char* buf, size_t buf_size) {
  if (!cfg || !key || !buf || buf_size == 0) return fail(QWBC_ERR_CONFIG, "null argument");
  return guarded([&] {
    const std::string v = qwbc::config_value(cfg->cfg, key);
    if (v.size() + 1 > buf_size) throw qwbc::InvalidParameter("value buffer too small");
    std::memcpy(buf, v.c_str(), v.size() + 1);
  });
}

qwbc_status qwbc_config_validate(const qwbc_config* cfg) {
  if (!cfg) return fail(QWBC_ERR_CONFIG, "null config handle");
  return guarded([&] { qwbc::validate_config(cfg->cfg); });
}

void qwbc_config_free(qwbc_config* cfg) { delete cfg; }

qwbc_status qwbc_run_balance(const qwbc_config* cfg, const qwbc_graph* graph, const char* out_csv,
                             const char* trace_dir, qwbc_series** out) {
  return run_study(cfg, graph, out_csv, trace_dir, out, qwbc::RunMode::BalanceOnly);
}

qwbc_status qwbc_run_consensus(const qwbc_config* cfg, const qwbc_graph* graph,
                               const char* out_csv, const char* trace_dir, qwbc_series** out) {
  return run_study(cfg, graph, out_csv, trace_dir, out, qwbc::RunMode::Consensus);
}

size_t qwbc_series_rows(const qwbc_series* s) { return s ? s->r.ks.size() : 0; }

int64_t qwbc_series_round(const qwbc_series* s, size_t row) { return s->r.ks[row]; }

double qwbc_series_mean_imbalance(const qwbc_series* s, size_t row) {
  return s->r.mean_imbalance[row];
}

double qwbc_series_se_imbalance(const qwbc_series* s, size_t row) {
  return s->r.se_imbalance[row];
}

double qwbc_series_mean_mse(const qwbc_series* s, size_t row) {
  return s->r.mean_mse.empty() ? 0.0 : s->r.mean_mse[row];
}

double qwbc_series_se_mse(const qwbc_series* s, size_t row) {
  return s->r.se_mse.empty() ? 0.0 : s->r.se_mse[row];
}

int qwbc_series_averages_informative(const qwbc_series* s) {
  return !s || s->r.all_averages_informative ? 1 : 0;
}

qwbc_status qwbc_series_write_csv(const qwbc_series* s, const char* path) {
  if (!s || !path) return fail(QWBC_ERR_CONFIG, "null argument");
  return guarded([&] {
    std::ostringstream os;
    qwbc::write_aggregate_csv(s->r, os);
    qwbc::write_file(path, os.str());
  });
}

void qwbc_series_free(qwbc_series* s) { delete s; }

qwbc_status qwbc_sweep_run(const qwbc_config* cfg, const int32_t* totals, size_t n_totals,
                           double target_mse, int strict, qwbc_sweep** out) {
  if (out) *out = nullptr;
  if (!cfg || !totals || n_totals == 0) return fail(QWBC_ERR_CONFIG, "null argument");
  bool unconverged = false;
  const qwbc_status st = guarded([&] {
    std::vector<int> ts(totals, totals + n_totals);
    auto rows = qwbc::sweep_bits(cfg->cfg, qwbc::kSweepSchemes, ts, target_mse);
    for (const auto& r : rows) unconverged = unconverged || !r.converged;
    if (out) *out = new qwbc_sweep{std::move(rows)};
  });
  if (st != QWBC_OK) return st;
  if (strict && unconverged)
    return fail(QWBC_ERR_NOT_CONVERGED, "sweep: some rows missed the target MSE");
  return QWBC_OK;
}

size_t qwbc_sweep_rows(const qwbc_sweep* s) { return s ? s->rows.size() : 0; }

const char* qwbc_sweep_scheme(const qwbc_sweep* s, size_t row) {
  return s->rows[row].scheme.c_str();
}

int32_t qwbc_sweep_total_bits(const qwbc_sweep* s, size_t row) { return s->rows[row].total_bits; }

int32_t qwbc_sweep_bits_wb(const qwbc_sweep* s, size_t row) { return s->rows[row].bits_wb; }

int32_t qwbc_sweep_bits_cons(const qwbc_sweep* s, size_t row) { return s->rows[row].bits_cons; }

int64_t qwbc_sweep_iterations(const qwbc_sweep* s, size_t row) { return s->rows[row].iterations; }

int64_t qwbc_sweep_comm_cost(const qwbc_sweep* s, size_t row) { return s->rows[row].comm_cost; }

int qwbc_sweep_converged(const qwbc_sweep* s, size_t row) {
  return s->rows[row].converged ? 1 : 0;
}

qwbc_status qwbc_sweep_write_csv(const qwbc_sweep* s, const char* path) {
  if (!s || !path) return fail(QWBC_ERR_CONFIG, "null argument");
  return guarded([&] {
    std::ostringstream os;
    qwbc::write_sweep_csv(s->rows, os);
    qwbc::write_file(path, os.str());
  });
}

void qwbc_sweep_free(qwbc_sweep* s) { delete s; }

}  // extern "C"
