#include "harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace qwbc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream ss(value);
  T v{};
  char rest = 0;
  if (!(ss >> v) || ss >> rest)
    throw ConfigError("config key '" + key + "': malformed value '" + value + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "on") return true;
  if (value == "0" || value == "false" || value == "off") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + value + "'");
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<double>(key, trim(item)));
  return out;
}

}  // namespace

void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "nodes") cfg.nodes = parse_number<std::int32_t>(key, value);
  else if (key == "edge_prob") cfg.edge_prob = parse_number<double>(key, value);
  else if (key == "graphs") cfg.graphs = parse_number<std::int32_t>(key, value);
  else if (key == "inits") cfg.inits = parse_number<std::int32_t>(key, value);
  else if (key == "max_rounds") cfg.max_rounds = parse_number<std::int64_t>(key, value);
  else if (key == "target_mse") cfg.target_mse = parse_number<double>(key, value);
  else if (key == "gamma0") cfg.gamma0 = parse_number<double>(key, value);
  else if (key == "c1") cfg.c1 = parse_number<std::int64_t>(key, value);
  else if (key == "c2") cfg.c2 = parse_number<std::int64_t>(key, value);
  else if (key == "cij") cfg.cij = parse_number<std::int64_t>(key, value);
  else if (key == "alpha") cfg.alpha = value;
  else if (key == "bits") cfg.bits = value;
  else if (key == "qmin") cfg.qmin = parse_number<double>(key, value);
  else if (key == "qmax") cfg.qmax = parse_number<double>(key, value);
  else if (key == "y0") cfg.y0 = value;
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "diag_u") cfg.diag_u = parse_bool(key, value);
  else if (key == "trace") {
    if (value == "off") cfg.trace = TraceMode::Off;
    else if (value == "sampled") cfg.trace = TraceMode::Sampled;
    else if (value == "full") cfg.trace = TraceMode::Full;
    else throw ConfigError("config key 'trace': expected off|sampled|full, got '" + value + "'");
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

ExperimentConfig parse_config(std::istream& is, const std::string& origin) {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string entry = trim(line);
    if (entry.empty()) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(entry.substr(0, eq));
    const std::string value = trim(entry.substr(eq + 1));
    try {
      apply_config_entry(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  ExperimentConfig cfg = parse_config(is, path);
  validate_config(cfg);
  return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.nodes < 2) throw ConfigError("nodes must be >= 2");
  if (!(cfg.edge_prob >= 0.0 && cfg.edge_prob <= 1.0))
    throw ConfigError("edge_prob must lie in [0, 1]");
  if (cfg.graphs < 1) throw ConfigError("graphs must be >= 1");
  if (cfg.inits < 1) throw ConfigError("inits must be >= 1");
  if (cfg.max_rounds < 1) throw ConfigError("max_rounds must be >= 1");
  if (cfg.target_mse && !(*cfg.target_mse > 0.0)) throw ConfigError("target_mse must be > 0");
  if (cfg.cij < 1) throw ConfigError("cij must be a positive integer");
  if (cfg.alpha != "harmonic") throw ConfigError("alpha: only the 'harmonic' kind is shipped");
  if (!(cfg.qmin < cfg.qmax)) throw ConfigError("quantization range needs qmin < qmax");
  try {
    make_step_schedule(cfg);   // gamma0 > 0, c1 >= 2, c2 >= 1
    make_bit_scheme(cfg);      // window rule, budget ranges
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what());
  }
  if (cfg.y0 != "uniform") {
    const auto values = parse_double_list("y0", cfg.y0);
    if (static_cast<std::int32_t>(values.size()) != cfg.nodes)
      throw ConfigError("y0 list must have exactly 'nodes' entries");
  }
}

std::string config_value(const ExperimentConfig& cfg, const std::string& key) {
  std::ostringstream ss;
  if (key == "nodes") ss << cfg.nodes;
  else if (key == "edge_prob") ss << format_double(cfg.edge_prob);
  else if (key == "graphs") ss << cfg.graphs;
  else if (key == "inits") ss << cfg.inits;
  else if (key == "max_rounds") ss << cfg.max_rounds;
  else if (key == "target_mse") ss << (cfg.target_mse ? format_double(*cfg.target_mse) : "");
  else if (key == "gamma0") ss << format_double(cfg.gamma0);
  else if (key == "c1") ss << cfg.c1;
  else if (key == "c2") ss << cfg.c2;
  else if (key == "cij") ss << cfg.cij;
  else if (key == "alpha") ss << cfg.alpha;
  else if (key == "bits") ss << cfg.bits;
  else if (key == "qmin") ss << format_double(cfg.qmin);
  else if (key == "qmax") ss << format_double(cfg.qmax);
  else if (key == "y0") ss << cfg.y0;
  else if (key == "seed") ss << cfg.seed;
  else if (key == "diag_u") ss << (cfg.diag_u ? 1 : 0);
  else if (key == "trace")
    ss << (cfg.trace == TraceMode::Off ? "off" : cfg.trace == TraceMode::Sampled ? "sampled" : "full");
  else throw ConfigError("unknown config key '" + key + "'");
  return ss.str();
}

StepSchedule make_step_schedule(const ExperimentConfig& cfg) {
  return StepSchedule(cfg.gamma0, cfg.c1, cfg.c2);
}

AlphaSchedule make_alpha_schedule(const ExperimentConfig& cfg) {
  if (cfg.alpha != "harmonic") throw ConfigError("alpha: only the 'harmonic' kind is shipped");
  return AlphaSchedule::harmonic();
}

BitScheme make_bit_scheme(const ExperimentConfig& cfg) {
  return parse_bit_scheme(cfg.bits, cfg.nodes);
}

Digraph make_trial_graph(const ExperimentConfig& cfg, std::int32_t graph_idx) {
  CounterStream rng{cfg.seed, kDomainGraph, static_cast<std::uint64_t>(graph_idx)};
  return Digraph::ring_plus_random(cfg.nodes, cfg.edge_prob, rng);
}

std::vector<double> make_trial_y0(const ExperimentConfig& cfg, std::int32_t graph_idx,
                                  std::int32_t init_idx) {
  if (cfg.y0 != "uniform") {
    auto values = parse_double_list("y0", cfg.y0);
    if (static_cast<std::int32_t>(values.size()) != cfg.nodes)
      throw ConfigError("y0 list must have exactly 'nodes' entries");
    return values;
  }
  std::vector<double> y0(static_cast<std::size_t>(cfg.nodes));
  for (std::int32_t i = 0; i < cfg.nodes; ++i) {
    const double u = point_u01({cfg.seed, kDomainInitValues, static_cast<std::uint64_t>(graph_idx),
                                static_cast<std::uint64_t>(init_idx), static_cast<std::uint64_t>(i)});
    y0[static_cast<std::size_t>(i)] = cfg.qmin + (cfg.qmax - cfg.qmin) * u;
  }
  return y0;
}

QuantDrawFn make_trial_draw(const ExperimentConfig& cfg, std::int32_t graph_idx,
                            std::int32_t init_idx) {
  const std::uint64_t seed = cfg.seed;
  const std::uint64_t g = static_cast<std::uint64_t>(graph_idx);
  const std::uint64_t r = static_cast<std::uint64_t>(init_idx);
  return [seed, g, r](NodeId i, std::int64_t k) {
    return point_u01({seed, kDomainQuantizer, g, r, static_cast<std::uint64_t>(i),
                      static_cast<std::uint64_t>(k)});
  };
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

char event_code(EventKind k) {
  switch (k) {
    case EventKind::Decreasing: return 'D';
    case EventKind::Update: return 'U';
    default: return '-';
  }
}

struct TrialSeries {
  std::vector<double> imbalance;
  std::vector<double> mse;
  bool informative = true;
};

TrialSeries run_balance_trial(const ExperimentConfig& cfg, const Digraph& graph,
                              const std::vector<std::int64_t>& ks, const std::string& trace_path) {
  BalanceEngine engine(graph, cfg.cij, make_step_schedule(cfg), make_bit_scheme(cfg).wb);
  engine.enable_potential_tracking(cfg.diag_u);

  const bool tracing = !trace_path.empty() && cfg.trace != TraceMode::Off;
  std::vector<BalanceTraceRow> trace;

  TrialSeries series;
  series.imbalance.reserve(ks.size());
  std::size_t si = 0;
  for (std::int64_t k = 0; k <= cfg.max_rounds; ++k) {
    const bool sampled = si < ks.size() && ks[si] == k;
    double imb = 0.0;
    std::optional<Count> pot;
    if (sampled || tracing) {
      imb = engine.imbalance().value;
      pot = engine.potential();
    }
    if (sampled) {
      series.imbalance.push_back(imb);
      ++si;
    }
    if (k == cfg.max_rounds) {
      if (tracing) trace.push_back({k, engine.gamma(), imb, EventKind::None, 0, pot});
      break;
    }
    const StepOutcome out = engine.step();
    if (tracing && (cfg.trace == TraceMode::Full || sampled))
      trace.push_back({k, engine.schedule().gamma_of_exponent(out.exponent), imb, out.kind,
                       out.sender_count, pot});
  }
  if (tracing) {
    std::ostringstream os;
    write_balance_trace(trace, os);
    write_file(trace_path, os.str());
  }
  return series;
}

TrialSeries run_consensus_trial(const ExperimentConfig& cfg, const Digraph& graph,
                                std::int32_t graph_idx, std::int32_t init_idx,
                                const std::vector<std::int64_t>& ks,
                                const std::string& trace_path) {
  ConsensusEngine engine(graph, cfg.cij, make_step_schedule(cfg), make_alpha_schedule(cfg),
                         make_bit_scheme(cfg), cfg.qmin, cfg.qmax,
                         make_trial_y0(cfg, graph_idx, init_idx),
                         make_trial_draw(cfg, graph_idx, init_idx));

  const bool tracing = !trace_path.empty() && cfg.trace != TraceMode::Off;
  std::vector<ConsensusTraceRow> trace;

  TrialSeries series;
  series.informative = engine.average_informative();
  series.imbalance.reserve(ks.size());
  series.mse.reserve(ks.size());
  std::size_t si = 0;
  for (std::int64_t k = 0; k <= cfg.max_rounds; ++k) {
    const bool sampled = si < ks.size() && ks[si] == k;
    double imb = 0.0, m = 0.0, drift = 0.0;
    if (sampled || tracing) {
      imb = engine.imbalance().value;
      m = engine.mse();
      drift = engine.sum_y_drift();
    }
    if (sampled) {
      series.imbalance.push_back(imb);
      series.mse.push_back(m);
      ++si;
    }
    if (k == cfg.max_rounds) {
      if (tracing)
        trace.push_back({k, engine.weight_branch().gamma(), engine.alpha_at(k), imb, m, drift,
                         EventKind::None});
      break;
    }
    const StepOutcome out = engine.step();
    if (tracing && (cfg.trace == TraceMode::Full || sampled))
      trace.push_back({k, engine.weight_branch().schedule().gamma_of_exponent(out.exponent),
                       engine.alpha_at(k), imb, m, drift, out.kind});
  }
  if (tracing) {
    std::ostringstream os;
    write_consensus_trace(trace, os);
    write_file(trace_path, os.str());
  }
  return series;
}

void aggregate_column(const std::vector<std::vector<double>>& trials, std::size_t column,
                      double& mean_out, double& se_out) {
  const std::size_t m = trials.size();
  double sum = 0.0;
  for (const auto& t : trials) sum += t[column];
  const double mean = sum / static_cast<double>(m);
  double var = 0.0;
  if (m > 1) {
    for (const auto& t : trials) {
      const double d = t[column] - mean;
      var += d * d;
    }
    var /= static_cast<double>(m - 1);
  }
  mean_out = mean;
  se_out = m > 1 ? std::sqrt(var / static_cast<double>(m)) : 0.0;
}

}  // namespace

MonteCarloResult monte_carlo(const ExperimentConfig& cfg, RunMode mode,
                             const MonteCarloOptions& opt) {
  validate_config(cfg);
  if (opt.fixed_graph && !opt.fixed_graph->strongly_connected())
    throw InvalidParameter("the supplied graph must be strongly connected");

  const std::int32_t n_graphs = opt.fixed_graph ? 1 : cfg.graphs;
  const std::int32_t n_inits = mode == RunMode::Consensus ? cfg.inits : 1;
  const std::int32_t trials = n_graphs * n_inits;
  const std::vector<std::int64_t> ks = sample_rounds(cfg.max_rounds);

  std::vector<TrialSeries> all(static_cast<std::size_t>(trials));
  std::atomic<std::int32_t> next{0};
  std::mutex err_mutex;
  std::string first_error;

  auto trace_path = [&](std::int32_t g, std::int32_t r) -> std::string {
    if (opt.trace_dir.empty() || cfg.trace == TraceMode::Off) return "";
    if (mode == RunMode::BalanceOnly)
      return opt.trace_dir + "/balance_g" + std::to_string(g) + ".csv";
    return opt.trace_dir + "/consensus_g" + std::to_string(g) + "_i" + std::to_string(r) + ".csv";
  };

  auto worker = [&] {
    for (;;) {
      const std::int32_t t = next.fetch_add(1);
      if (t >= trials) return;
      const std::int32_t g = t / n_inits;
      const std::int32_t r = t % n_inits;
      try {
        const Digraph graph = opt.fixed_graph ? *opt.fixed_graph : make_trial_graph(cfg, g);
        all[static_cast<std::size_t>(t)] =
            mode == RunMode::BalanceOnly
                ? run_balance_trial(cfg, graph, ks, trace_path(g, r))
                : run_consensus_trial(cfg, graph, g, r, ks, trace_path(g, r));
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (first_error.empty())
          first_error = "trial graph=" + std::to_string(g) + " init=" + std::to_string(r) + ": " +
                        e.what();
        return;
      }
    }
  };

  int n_workers = opt.workers > 0
                      ? opt.workers
                      : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  n_workers = std::min<int>(n_workers, trials);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (!first_error.empty()) throw Error(first_error);

  MonteCarloResult res;
  res.mode = mode;
  res.ks = ks;
  res.n_trials = trials;
  res.mean_imbalance.resize(ks.size());
  res.se_imbalance.resize(ks.size());
  std::vector<std::vector<double>> imb(static_cast<std::size_t>(trials));
  std::vector<std::vector<double>> ms(static_cast<std::size_t>(trials));
  for (std::int32_t t = 0; t < trials; ++t) {
    imb[static_cast<std::size_t>(t)] = std::move(all[static_cast<std::size_t>(t)].imbalance);
    ms[static_cast<std::size_t>(t)] = std::move(all[static_cast<std::size_t>(t)].mse);
    res.all_averages_informative =
        res.all_averages_informative && all[static_cast<std::size_t>(t)].informative;
  }
  for (std::size_t c = 0; c < ks.size(); ++c)
    aggregate_column(imb, c, res.mean_imbalance[c], res.se_imbalance[c]);
  if (mode == RunMode::Consensus) {
    res.mean_mse.resize(ks.size());
    res.se_mse.resize(ks.size());
    for (std::size_t c = 0; c < ks.size(); ++c)
      aggregate_column(ms, c, res.mean_mse[c], res.se_mse[c]);
  }
  if (opt.keep_trials) {
    res.trial_imbalance = std::move(imb);
    if (mode == RunMode::Consensus) res.trial_mse = std::move(ms);
  }
  return res;
}

std::vector<SweepRow> sweep_bits(const ExperimentConfig& cfg,
                                 const std::vector<std::string>& schemes,
                                 const std::vector<int>& totals, double target_mse,
                                 const MonteCarloOptions& opt) {
  if (!(target_mse > 0.0)) throw InvalidParameter("sweep target MSE must be > 0");
  std::vector<SweepRow> rows;
  for (const std::string& scheme : schemes) {
    for (int total : totals) {
      ExperimentConfig run_cfg = cfg;
      run_cfg.bits = scheme + ":" + std::to_string(total);
      const BitScheme bits = make_bit_scheme(run_cfg);
      MonteCarloOptions run_opt = opt;
      run_opt.trace_dir.clear();
      run_opt.keep_trials = false;
      const MonteCarloResult mc = monte_carlo(run_cfg, RunMode::Consensus, run_opt);

      SweepRow row;
      row.scheme = scheme;
      row.total_bits = total;
      row.bits_wb = bits.wb.max_bits();
      row.bits_cons = bits.cons.max_bits();
      row.iterations = cfg.max_rounds;
      row.converged = false;
      for (std::size_t c = 0; c < mc.ks.size(); ++c) {
        if (mc.mean_mse[c] <= target_mse) {
          row.iterations = mc.ks[c];
          row.converged = true;
          break;
        }
      }
      row.comm_cost = static_cast<std::int64_t>(total) * row.iterations;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_aggregate_csv(const MonteCarloResult& r, std::ostream& os) {
  os << "k,mean_imbalance,se_imbalance,mean_mse,se_mse\n";
  for (std::size_t c = 0; c < r.ks.size(); ++c) {
    os << r.ks[c] << ',' << format_double(r.mean_imbalance[c]) << ','
       << format_double(r.se_imbalance[c]) << ',';
    if (r.mode == RunMode::Consensus)
      os << format_double(r.mean_mse[c]) << ',' << format_double(r.se_mse[c]);
    else
      os << ',';
    os << '\n';
  }
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
  os << "scheme,total_bits,bits_wb,bits_cons,iterations,comm_cost,converged\n";
  for (const SweepRow& r : rows)
    os << r.scheme << ',' << r.total_bits << ',' << r.bits_wb << ',' << r.bits_cons << ','
       << r.iterations << ',' << r.comm_cost << ',' << (r.converged ? 1 : 0) << '\n';
}

void write_balance_trace(const std::vector<BalanceTraceRow>& rows, std::ostream& os) {
  os << "k,gamma,imbalance_l1,event,n_senders,U\n";
  for (const BalanceTraceRow& r : rows) {
    os << r.k << ',' << format_double(r.gamma) << ',' << format_double(r.imbalance) << ','
       << event_code(r.event) << ',' << r.n_senders << ',';
    if (r.potential) os << count_to_string(*r.potential);
    os << '\n';
  }
}

void write_consensus_trace(const std::vector<ConsensusTraceRow>& rows, std::ostream& os) {
  os << "k,gamma,alpha,imbalance_l1,mse,sum_y_drift,event\n";
  for (const ConsensusTraceRow& r : rows)
    os << r.k << ',' << format_double(r.gamma) << ',' << format_double(r.alpha) << ','
       << format_double(r.imbalance) << ',' << format_double(r.mse) << ','
       << format_double(r.sum_y_drift) << ',' << event_code(r.event) << '\n';
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << contents;
  if (!os) throw IoError("write failed: " + path);
}

}  // namespace qwbc
