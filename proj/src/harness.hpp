#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "consensus.hpp"

namespace qwbc {

struct ExperimentConfig {
  std::int32_t nodes = 6;
  double edge_prob = 0.2;
  std::int32_t graphs = 100;
  std::int32_t inits = 100;
  std::int64_t max_rounds = 100000;
  std::optional<double> target_mse;
  double gamma0 = 1.0;
  std::int64_t c1 = 2;
  std::int64_t c2 = 1;
  std::int64_t cij = 1;
  std::string alpha = "harmonic";
  std::string bits = "alternating";
  double qmin = 0.0;
  double qmax = 1.0;
  std::string y0 = "uniform";  // or a comma-separated list, one value per node
  std::uint64_t seed = 1;
  bool diag_u = false;
  TraceMode trace = TraceMode::Off;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(std::istream& is, const std::string& origin);
void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const std::string& value);
void validate_config(const ExperimentConfig& cfg);
std::string config_value(const ExperimentConfig& cfg, const std::string& key);

StepSchedule make_step_schedule(const ExperimentConfig& cfg);
AlphaSchedule make_alpha_schedule(const ExperimentConfig& cfg);
BitScheme make_bit_scheme(const ExperimentConfig& cfg);
Digraph make_trial_graph(const ExperimentConfig& cfg, std::int32_t graph_idx);
std::vector<double> make_trial_y0(const ExperimentConfig& cfg, std::int32_t graph_idx,
                                  std::int32_t init_idx);
QuantDrawFn make_trial_draw(const ExperimentConfig& cfg, std::int32_t graph_idx,
                            std::int32_t init_idx);

enum class RunMode { BalanceOnly, Consensus };

// Trial-aligned aggregates at the sampled rounds. Per-trial series are
// retained so paired comparisons and aggregation audits stay possible.
struct MonteCarloResult {
  RunMode mode = RunMode::Consensus;
  std::vector<std::int64_t> ks;
  std::vector<double> mean_imbalance, se_imbalance;
  std::vector<double> mean_mse, se_mse;                  // empty columns for balance-only runs
  std::vector<std::vector<double>> trial_imbalance;      // [trial][sample]
  std::vector<std::vector<double>> trial_mse;
  std::int32_t n_trials = 0;
  // false when some trial's initial average fell outside [qmin, qmax]; such
  // runs proceed, but convergence to the average is unguaranteed
  bool all_averages_informative = true;
};

struct MonteCarloOptions {
  int workers = 0;                      // 0: one per hardware thread, capped by trials
  const Digraph* fixed_graph = nullptr; // overrides generation; collapses the graph axis
  std::string trace_dir;                // when nonempty and cfg.trace != Off, per-trial CSVs
  bool keep_trials = true;
};

MonteCarloResult monte_carlo(const ExperimentConfig& cfg, RunMode mode,
                             const MonteCarloOptions& opt = {});

struct SweepRow {
  std::string scheme;
  int total_bits = 0;
  int bits_wb = 0;
  int bits_cons = 0;
  std::int64_t iterations = 0;
  std::int64_t comm_cost = 0;  // total_bits * iterations
  bool converged = false;
};

inline const std::vector<std::string> kSweepSchemes = {"equal_split", "one_bit_wb",
                                                       "one_bit_cons"};

// For each scheme x total: run the Monte-Carlo study and record the first
// sampled round where the aggregate mean MSE crosses the target. Rows that
// never cross are flagged, not fatal.
std::vector<SweepRow> sweep_bits(const ExperimentConfig& cfg,
                                 const std::vector<std::string>& schemes,
                                 const std::vector<int>& totals, double target_mse,
                                 const MonteCarloOptions& opt = {});

std::string format_double(double v);  // 17 significant digits, round-trip exact

void write_aggregate_csv(const MonteCarloResult& r, std::ostream& os);
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os);
void write_balance_trace(const std::vector<BalanceTraceRow>& rows, std::ostream& os);
void write_consensus_trace(const std::vector<ConsensusTraceRow>& rows, std::ostream& os);

void write_file(const std::string& path, const std::string& contents);

}  // namespace qwbc
