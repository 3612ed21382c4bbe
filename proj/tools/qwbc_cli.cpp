// Command-line front end for the qwbc shared library. Talks to the engine
// exclusively through the C API in qwbc.h.

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qwbc.h"

namespace {

struct ConfigDeleter {
  void operator()(qwbc_config* c) const { qwbc_config_free(c); }
};
struct GraphDeleter {
  void operator()(qwbc_graph* g) const { qwbc_graph_free(g); }
};
struct SeriesDeleter {
  void operator()(qwbc_series* s) const { qwbc_series_free(s); }
};
struct SweepDeleter {
  void operator()(qwbc_sweep* s) const { qwbc_sweep_free(s); }
};

using ConfigPtr = std::unique_ptr<qwbc_config, ConfigDeleter>;
using GraphPtr = std::unique_ptr<qwbc_graph, GraphDeleter>;

int report(qwbc_status st) {
  if (st != QWBC_OK) std::fprintf(stderr, "error: %s\n", qwbc_error_message());
  return static_cast<int>(st);
}

struct CommonOpts {
  std::string config_path;
  std::string out_path;
  std::string trace_dir;
  std::string graph_path;
  std::vector<std::string> overrides;  // key=value
  std::int64_t max_rounds = -1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool diag_u = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_graph) {
  cmd->add_option("--config", o.config_path, "config file (key = value lines)");
  cmd->add_option("--out", o.out_path, "output CSV path");
  cmd->add_option("--trace-dir", o.trace_dir, "directory for per-trial round traces");
  cmd->add_option("--max-rounds", o.max_rounds, "override max_rounds");
  cmd->add_option("--seed", o.seed, "override seed")->each([&](const std::string&) { o.seed_set = true; });
  cmd->add_flag("--diag-u", o.diag_u, "record the balance potential diagnostic");
  cmd->add_option("--set", o.overrides, "override any config key, e.g. --set bits=simultaneous")
      ->expected(-1);
  if (with_graph) cmd->add_option("--graph", o.graph_path, "run on a fixed graph file");
}

qwbc_status build_config(const CommonOpts& o, ConfigPtr& cfg_out) {
  qwbc_config* raw = nullptr;
  qwbc_status st =
      o.config_path.empty() ? qwbc_config_create(&raw) : qwbc_config_load(o.config_path.c_str(), &raw);
  if (st != QWBC_OK) return st;
  ConfigPtr cfg(raw);
  for (const std::string& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      return QWBC_ERR_CONFIG;
    }
    st = qwbc_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
    if (st != QWBC_OK) return st;
  }
  if (o.max_rounds >= 0) {
    st = qwbc_config_set(cfg.get(), "max_rounds", std::to_string(o.max_rounds).c_str());
    if (st != QWBC_OK) return st;
  }
  if (o.seed_set) {
    st = qwbc_config_set(cfg.get(), "seed", std::to_string(o.seed).c_str());
    if (st != QWBC_OK) return st;
  }
  if (o.diag_u) {
    st = qwbc_config_set(cfg.get(), "diag_u", "1");
    if (st != QWBC_OK) return st;
  }
  if (!o.trace_dir.empty()) {
    // tracing implies at least sampled rows
    char buf[16] = {0};
    if (qwbc_config_get(cfg.get(), "trace", buf, sizeof buf) == QWBC_OK &&
        std::string(buf) == "off") {
      st = qwbc_config_set(cfg.get(), "trace", "sampled");
      if (st != QWBC_OK) return st;
    }
  }
  st = qwbc_config_validate(cfg.get());
  if (st != QWBC_OK) return st;
  cfg_out = std::move(cfg);
  return QWBC_OK;
}

int run_study(const CommonOpts& o, bool consensus) {
  ConfigPtr cfg;
  qwbc_status st = build_config(o, cfg);
  if (st != QWBC_OK) return report(st);

  GraphPtr graph;
  if (!o.graph_path.empty()) {
    qwbc_graph* raw = nullptr;
    st = qwbc_graph_load(o.graph_path.c_str(), &raw);
    if (st != QWBC_OK) return report(st);
    graph.reset(raw);
  }

  qwbc_series* series = nullptr;
  const char* out_csv = o.out_path.empty() ? nullptr : o.out_path.c_str();
  const char* trace_dir = o.trace_dir.empty() ? nullptr : o.trace_dir.c_str();
  st = consensus ? qwbc_run_consensus(cfg.get(), graph.get(), out_csv, trace_dir, &series)
                 : qwbc_run_balance(cfg.get(), graph.get(), out_csv, trace_dir, &series);
  if (st != QWBC_OK) return report(st);
  std::unique_ptr<qwbc_series, SeriesDeleter> owned(series);

  if (consensus && !qwbc_series_averages_informative(series))
    std::fprintf(stderr,
                 "warning: some initial averages fall outside [qmin, qmax]; "
                 "convergence to the average is unguaranteed\n");
  const size_t rows = qwbc_series_rows(series);
  if (rows > 0) {
    const size_t last = rows - 1;
    if (consensus)
      std::printf("rounds=%lld mean_imbalance=%.6g mean_mse=%.6g\n",
                  static_cast<long long>(qwbc_series_round(series, last)),
                  qwbc_series_mean_imbalance(series, last), qwbc_series_mean_mse(series, last));
    else
      std::printf("rounds=%lld mean_imbalance=%.6g\n",
                  static_cast<long long>(qwbc_series_round(series, last)),
                  qwbc_series_mean_imbalance(series, last));
  }
  if (!o.out_path.empty()) std::printf("wrote %s\n", o.out_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantized weight-balancing and average consensus simulator"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a ring-plus-random digraph and write it");
  CommonOpts gen_opts;
  int gen_nodes = -1;
  double gen_prob = -1.0;
  add_common(gen, gen_opts, false);
  gen->add_option("--nodes", gen_nodes, "node count");
  gen->add_option("--edge-prob", gen_prob, "extra-edge probability");

  // balance
  auto* balance = app.add_subcommand("balance", "run the weight-balancing study");
  CommonOpts bal_opts;
  add_common(balance, bal_opts, true);

  // consensus
  auto* consensus = app.add_subcommand("consensus", "run the joint consensus study");
  CommonOpts cons_opts;
  add_common(consensus, cons_opts, true);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "bit-allocation sweep at a target MSE");
  CommonOpts sweep_opts;
  std::vector<std::int32_t> totals = {2, 4, 8, 16};
  double target_mse = 1e-4;
  bool strict = false;
  add_common(sweep, sweep_opts, false);
  sweep->add_option("--totals", totals, "total bit budgets to sweep");
  sweep->add_option("--target-mse", target_mse, "target mean MSE");
  sweep->add_flag("--strict", strict, "fail when a row misses the target");

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    ConfigPtr cfg;
    qwbc_status st = build_config(gen_opts, cfg);
    if (st != QWBC_OK) return report(st);
    char buf[64] = {0};
    if (gen_nodes < 0) {
      if ((st = qwbc_config_get(cfg.get(), "nodes", buf, sizeof buf)) != QWBC_OK) return report(st);
      gen_nodes = std::stoi(buf);
    }
    if (gen_prob < 0) {
      if ((st = qwbc_config_get(cfg.get(), "edge_prob", buf, sizeof buf)) != QWBC_OK)
        return report(st);
      gen_prob = std::stod(buf);
    }
    if ((st = qwbc_config_get(cfg.get(), "seed", buf, sizeof buf)) != QWBC_OK) return report(st);
    const std::uint64_t seed = std::stoull(buf);

    qwbc_graph* graph = nullptr;
    if ((st = qwbc_graph_generate(gen_nodes, gen_prob, seed, &graph)) != QWBC_OK)
      return report(st);
    GraphPtr owned(graph);
    if (gen_opts.out_path.empty()) {
      std::fprintf(stderr, "error: gen requires --out\n");
      return QWBC_ERR_CONFIG;
    }
    if ((st = qwbc_graph_save(graph, gen_opts.out_path.c_str())) != QWBC_OK) return report(st);
    std::printf("wrote %s (%d nodes, %d edges)\n", gen_opts.out_path.c_str(),
                qwbc_graph_nodes(graph), qwbc_graph_edge_count(graph));
    return 0;
  }

  if (balance->parsed()) return run_study(bal_opts, false);
  if (consensus->parsed()) return run_study(cons_opts, true);

  if (sweep->parsed()) {
    ConfigPtr cfg;
    qwbc_status st = build_config(sweep_opts, cfg);
    if (st != QWBC_OK) return report(st);
    qwbc_sweep* result = nullptr;
    st = qwbc_sweep_run(cfg.get(), totals.data(), totals.size(), target_mse, strict ? 1 : 0,
                        &result);
    const std::string run_message = qwbc_error_message();
    if (st != QWBC_OK && result == nullptr) return report(st);
    std::unique_ptr<qwbc_sweep, SweepDeleter> owned(result);
    for (size_t i = 0; i < qwbc_sweep_rows(result); ++i)
      std::printf("%-13s total=%2d wb=%2d cons=%2d iterations=%lld cost=%lld%s\n",
                  qwbc_sweep_scheme(result, i), qwbc_sweep_total_bits(result, i),
                  qwbc_sweep_bits_wb(result, i), qwbc_sweep_bits_cons(result, i),
                  static_cast<long long>(qwbc_sweep_iterations(result, i)),
                  static_cast<long long>(qwbc_sweep_comm_cost(result, i)),
                  qwbc_sweep_converged(result, i) ? "" : " (not converged)");
    if (!sweep_opts.out_path.empty()) {
      const qwbc_status wst = qwbc_sweep_write_csv(result, sweep_opts.out_path.c_str());
      if (wst != QWBC_OK) return report(wst);
      std::printf("wrote %s\n", sweep_opts.out_path.c_str());
    }
    if (st != QWBC_OK) std::fprintf(stderr, "error: %s\n", run_message.c_str());
    return static_cast<int>(st);
  }

  return 0;
}
