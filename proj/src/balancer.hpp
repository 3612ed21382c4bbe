#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "digraph.hpp"
#include "numerics.hpp"

namespace qwbc {

// Weights live on directed edges: the weight of edge (j, i) is owned by the
// receiving node i. All counts share one step exponent; value = count * gamma.
struct WeightState {
  std::vector<Count> edge_counts;  // indexed by EdgeId
  int exponent = 0;
};

struct BalanceVector {
  std::vector<Count> node_counts;  // b_i = count * gamma; sums to zero
  int exponent = 0;
};

enum class EventKind { None, Decreasing, Update };

// One round classified from the pre-round balances and the signals sent:
// Decreasing iff some sender has an out-neighbor with negative balance (the
// only round type that shrinks the total imbalance), Update iff somebody sent
// but nobody hit a negative-balance neighbor, None iff all signals were zero.
struct EventRecord {
  std::int64_t round = 0;
  EventKind kind = EventKind::None;
  std::vector<NodeId> senders;
  std::vector<std::int64_t> signals;
};

struct ImbalanceL1 {
  Count total_count = 0;
  int exponent = 0;
  double value = 0.0;
};

// Distance-ranked progress potential. Nodes with nonnegative balance are
// partitioned into levels by directed distance to the negative-balance set;
// each level contributes one mixed-radix digit, so every transfer of balance
// toward the negative set carries into a more significant digit. Bounded by
// N^(2N), increases by at least one on every Update round.
struct PotentialSnapshot {
  Count value = 0;
  std::int32_t n_max = 0;
  std::vector<std::int32_t> level_of;  // per node; 0 for negative-balance nodes
  std::vector<Count> radices;          // radices[n] for levels n = 1..n_max; radices[0] unused
};

std::pair<WeightState, BalanceVector> initial_state(const Digraph& g,
                                                    std::span<const std::int64_t> cij,
                                                    const StepSchedule& sched);

// n_i = min( floor(max(0, count) / d_out), 2^bits - 1 ), all in integers.
std::int64_t compute_signal(Count balance_count, int out_degree, int bits);

ImbalanceL1 imbalance_l1(const BalanceVector& b, const StepSchedule& sched);

EventRecord classify_event(const Digraph& g, const BalanceVector& pre_balances,
                           std::span<const std::int64_t> signals, std::int64_t round);

// Throws DiagnosticUnavailable when no node has negative balance.
PotentialSnapshot compute_potential(const Digraph& g, const BalanceVector& b);

struct StepOutcome {
  std::int64_t round = 0;
  EventKind kind = EventKind::None;
  std::int32_t sender_count = 0;
  Count imbalance_before = 0;  // counts at this round's exponent
  Count imbalance_after = 0;
  int exponent = 0;
};

// Round-synchronous engine: all signals are computed from the pre-round
// state, then all weight/balance updates are applied at once. The state is
// kept aligned to the exponent of the upcoming round, so every accessor sees
// counts normalized by the gamma currently in force.
class BalanceEngine {
public:
  BalanceEngine(Digraph g, std::span<const std::int64_t> cij, StepSchedule sched,
                WbBitSchedule bits);
  BalanceEngine(Digraph g, std::int64_t cij_all, StepSchedule sched, WbBitSchedule bits);

  StepOutcome step();

  std::int64_t round() const { return round_; }
  int exponent() const { return weights_.exponent; }
  double gamma() const { return sched_.gamma_of_exponent(weights_.exponent); }
  const Digraph& graph() const { return g_; }
  const StepSchedule& schedule() const { return sched_; }
  const WbBitSchedule& bit_schedule() const { return bits_; }
  const WeightState& weights() const { return weights_; }
  const BalanceVector& balances() const { return balances_; }
  std::span<const std::int64_t> last_signals() const { return signals_; }
  std::int64_t last_decreasing_round() const { return last_decreasing_; }

  ImbalanceL1 imbalance() const { return imbalance_l1(balances_, sched_); }
  double balance_value(NodeId i) const;
  double weight_value(EdgeId e) const;
  double in_flow_value(NodeId i) const;  // S_i^- at the current state

  // Recomputes every balance from the weights and checks flow conservation.
  bool audit_consistency() const;

  void enable_potential_tracking(bool on);
  // Potential of the current pre-round state; std::nullopt when untracked or
  // when the graph is already balanced. The distance partition is rebuilt
  // after every Decreasing round and frozen in between.
  std::optional<Count> potential();

private:
  void init(std::span<const std::int64_t> cij);
  void align_exponent();
  void rebuild_partition();

  Digraph g_;
  StepSchedule sched_;
  WbBitSchedule bits_;
  WeightState weights_;
  BalanceVector balances_;
  std::vector<std::int64_t> signals_;
  std::int64_t round_ = 0;
  std::int64_t last_decreasing_ = -1;

  bool track_potential_ = false;
  bool partition_stale_ = true;
  bool partition_available_ = false;
  std::vector<std::int32_t> level_of_;
  std::vector<Count> level_radix_;
};

enum class TraceMode { Off, Sampled, Full };

struct BalanceTraceRow {
  std::int64_t k = 0;
  double gamma = 0.0;
  double imbalance = 0.0;
  EventKind event = EventKind::None;
  std::int32_t n_senders = 0;
  std::optional<Count> potential;
};

struct BalanceRunOptions {
  std::int64_t max_rounds = 0;
  std::optional<double> imbalance_tol;
  bool diag_potential = false;
  TraceMode trace = TraceMode::Full;
};

// Iterates the engine until max_rounds or until the imbalance falls to the
// tolerance. The final recorded row carries the stopping state with no event.
std::vector<BalanceTraceRow> run_balancing(BalanceEngine& engine, const BalanceRunOptions& opts);

// Round indices recorded in sampled traces: every round up to 10, then
// geometrically spaced, plus all powers of ten and the final round.
std::vector<std::int64_t> sample_rounds(std::int64_t max_rounds);

}  // namespace qwbc
