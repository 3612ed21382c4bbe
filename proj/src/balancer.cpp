#include "balancer.hpp"

#include <algorithm>
#include <cmath>

namespace qwbc {

std::pair<WeightState, BalanceVector> initial_state(const Digraph& g,
                                                    std::span<const std::int64_t> cij,
                                                    const StepSchedule& sched) {
  (void)sched;
  if (static_cast<EdgeId>(cij.size()) != g.edge_count())
    throw InvalidParameter("initial weights: need one c_ij per edge");
  for (std::int64_t c : cij)
    if (c < 1) throw InvalidParameter("initial weights: every c_ij must be a positive integer");

  WeightState w;
  w.exponent = 0;
  w.edge_counts.assign(cij.begin(), cij.end());

  BalanceVector b;
  b.exponent = 0;
  b.node_counts.assign(static_cast<std::size_t>(g.node_count()), 0);
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    const Count c = w.edge_counts[static_cast<std::size_t>(e)];
    // in-flow at the receiver, out-flow at the sender
    b.node_counts[static_cast<std::size_t>(ed.dst)] = checked_add(b.node_counts[static_cast<std::size_t>(ed.dst)], c);
    b.node_counts[static_cast<std::size_t>(ed.src)] = checked_add(b.node_counts[static_cast<std::size_t>(ed.src)], -c);
  }
  return {std::move(w), std::move(b)};
}

std::int64_t compute_signal(Count balance_count, int out_degree, int bits) {
  if (out_degree < 1) throw InvalidParameter("signal needs a positive out-degree");
  if (bits > kMaxBitsPerRound) throw InvalidParameter("bit budget out of range");
  if (bits <= 0) return 0;
  if (balance_count <= 0) return 0;
  const Count quota = balance_count / out_degree;  // floor: both operands nonnegative
  const Count cap = (static_cast<Count>(1) << bits) - 1;
  return static_cast<std::int64_t>(quota < cap ? quota : cap);
}

ImbalanceL1 imbalance_l1(const BalanceVector& b, const StepSchedule& sched) {
  Count total = 0;
  for (Count c : b.node_counts) total = checked_add(total, c < 0 ? -c : c);
  const double gamma = sched.gamma_of_exponent(b.exponent);
  return {total, b.exponent, static_cast<double>(total) * gamma};
}

EventRecord classify_event(const Digraph& g, const BalanceVector& pre_balances,
                           std::span<const std::int64_t> signals, std::int64_t round) {
  EventRecord rec;
  rec.round = round;
  rec.signals.assign(signals.begin(), signals.end());
  bool decreasing = false;
  for (NodeId i = 0; i < g.node_count(); ++i) {
    if (signals[static_cast<std::size_t>(i)] <= 0) continue;
    rec.senders.push_back(i);
    for (NodeId j : g.out_neighbors(i))
      if (pre_balances.node_counts[static_cast<std::size_t>(j)] < 0) decreasing = true;
  }
  rec.kind = rec.senders.empty() ? EventKind::None
                                 : (decreasing ? EventKind::Decreasing : EventKind::Update);
  return rec;
}

PotentialSnapshot compute_potential(const Digraph& g, const BalanceVector& b) {
  const auto& counts = b.node_counts;
  std::vector<NodeId> negatives;
  for (NodeId i = 0; i < g.node_count(); ++i)
    if (counts[static_cast<std::size_t>(i)] < 0) negatives.push_back(i);
  if (negatives.empty())
    throw DiagnosticUnavailable("balance potential undefined: no node has negative balance");

  const std::vector<std::int32_t> dist = g.distances_to(negatives);

  PotentialSnapshot snap;
  snap.level_of.assign(static_cast<std::size_t>(g.node_count()), 0);
  for (NodeId i = 0; i < g.node_count(); ++i) {
    if (counts[static_cast<std::size_t>(i)] < 0) continue;
    const std::int32_t d = dist[static_cast<std::size_t>(i)];
    if (d == kInfiniteDistance)
      throw InvalidParameter("balance potential needs the negative set reachable from every node");
    snap.level_of[static_cast<std::size_t>(i)] = d;
    snap.n_max = std::max(snap.n_max, d);
  }

  // radix of level n: product over deeper levels of (1 + sum of out-degrees)
  std::vector<Count> degree_sum(static_cast<std::size_t>(snap.n_max) + 1, 0);
  for (NodeId i = 0; i < g.node_count(); ++i) {
    if (counts[static_cast<std::size_t>(i)] < 0) continue;
    degree_sum[static_cast<std::size_t>(snap.level_of[static_cast<std::size_t>(i)])] += g.out_degree(i);
  }
  snap.radices.assign(static_cast<std::size_t>(snap.n_max) + 1, 1);
  for (std::int32_t n = snap.n_max - 1; n >= 1; --n)
    snap.radices[static_cast<std::size_t>(n)] =
        checked_mul(snap.radices[static_cast<std::size_t>(n + 1)],
                    checked_add(1, degree_sum[static_cast<std::size_t>(n + 1)]));

  Count value = 0;
  for (NodeId i = 0; i < g.node_count(); ++i) {
    const Count c = counts[static_cast<std::size_t>(i)];
    if (c < 0) continue;
    const Count digit = std::min<Count>(c, g.out_degree(i));
    value = checked_add(value, checked_mul(snap.radices[static_cast<std::size_t>(snap.level_of[static_cast<std::size_t>(i)])], digit));
  }
  snap.value = value;
  return snap;
}

BalanceEngine::BalanceEngine(Digraph g, std::span<const std::int64_t> cij, StepSchedule sched,
                             WbBitSchedule bits)
    : g_(std::move(g)), sched_(sched), bits_(std::move(bits)) {
  init(cij);
}

BalanceEngine::BalanceEngine(Digraph g, std::int64_t cij_all, StepSchedule sched, WbBitSchedule bits)
    : g_(std::move(g)), sched_(sched), bits_(std::move(bits)) {
  const std::vector<std::int64_t> cij(static_cast<std::size_t>(g_.edge_count()), cij_all);
  init(cij);
}

void BalanceEngine::init(std::span<const std::int64_t> cij) {
  if (!g_.strongly_connected())
    throw InvalidParameter("balancing requires a strongly connected digraph");
  auto [w, b] = initial_state(g_, cij, sched_);
  weights_ = std::move(w);
  balances_ = std::move(b);
  signals_.assign(static_cast<std::size_t>(g_.node_count()), 0);
  align_exponent();
}

void BalanceEngine::align_exponent() {
  const int e = sched_.exponent_at(round_);
  if (e != weights_.exponent) {
    rescale_counts(weights_.edge_counts, weights_.exponent, e, sched_.c1());
    rescale_counts(balances_.node_counts, balances_.exponent, e, sched_.c1());
    weights_.exponent = e;
    balances_.exponent = e;
  }
}

double BalanceEngine::balance_value(NodeId i) const {
  return static_cast<double>(balances_.node_counts[static_cast<std::size_t>(i)]) * gamma();
}

double BalanceEngine::weight_value(EdgeId e) const {
  return static_cast<double>(weights_.edge_counts[static_cast<std::size_t>(e)]) * gamma();
}

double BalanceEngine::in_flow_value(NodeId i) const {
  Count s = 0;
  for (EdgeId e : g_.in_edges(i)) s = checked_add(s, weights_.edge_counts[static_cast<std::size_t>(e)]);
  return static_cast<double>(s) * gamma();
}

StepOutcome BalanceEngine::step() {
  const std::int64_t k = round_;
  auto& bc = balances_.node_counts;
  auto& wc = weights_.edge_counts;

  StepOutcome out;
  out.round = k;
  out.exponent = weights_.exponent;
  out.imbalance_before = imbalance().total_count;

  bool decreasing = false;
  int senders = 0;
  for (NodeId i = 0; i < g_.node_count(); ++i) {
    const std::int64_t n_i =
        compute_signal(bc[static_cast<std::size_t>(i)], g_.out_degree(i), bits_.bits(i, k));
    signals_[static_cast<std::size_t>(i)] = n_i;
    if (n_i > 0) {
      ++senders;
      for (NodeId j : g_.out_neighbors(i))
        if (bc[static_cast<std::size_t>(j)] < 0) decreasing = true;
    }
  }
  out.sender_count = senders;
  out.kind = senders == 0 ? EventKind::None
                          : (decreasing ? EventKind::Decreasing : EventKind::Update);

  if (senders > 0) {
    for (EdgeId e = 0; e < g_.edge_count(); ++e) {
      const std::int64_t n_src = signals_[static_cast<std::size_t>(g_.edge(e).src)];
      if (n_src > 0)
        wc[static_cast<std::size_t>(e)] = checked_add(wc[static_cast<std::size_t>(e)], n_src);
    }
    for (NodeId i = 0; i < g_.node_count(); ++i) {
      Count delta = -static_cast<Count>(g_.out_degree(i)) * signals_[static_cast<std::size_t>(i)];
      for (NodeId j : g_.in_neighbors(i)) delta += signals_[static_cast<std::size_t>(j)];
      if (delta != 0)
        bc[static_cast<std::size_t>(i)] = checked_add(bc[static_cast<std::size_t>(i)], delta);
    }
  }

  out.imbalance_after = imbalance().total_count;
  if (out.kind == EventKind::Decreasing) {
    last_decreasing_ = k;
    partition_stale_ = true;
  }
  ++round_;
  align_exponent();
  return out;
}

bool BalanceEngine::audit_consistency() const {
  if (weights_.exponent != balances_.exponent) return false;
  std::vector<Count> derived(static_cast<std::size_t>(g_.node_count()), 0);
  for (EdgeId e = 0; e < g_.edge_count(); ++e) {
    const Edge& ed = g_.edge(e);
    const Count c = weights_.edge_counts[static_cast<std::size_t>(e)];
    if (c < 1) return false;  // weights never drop below their initial positive counts
    derived[static_cast<std::size_t>(ed.dst)] += c;
    derived[static_cast<std::size_t>(ed.src)] -= c;
  }
  Count total = 0;
  for (NodeId i = 0; i < g_.node_count(); ++i) {
    if (derived[static_cast<std::size_t>(i)] != balances_.node_counts[static_cast<std::size_t>(i)])
      return false;
    total += balances_.node_counts[static_cast<std::size_t>(i)];
  }
  return total == 0;
}

void BalanceEngine::enable_potential_tracking(bool on) {
  track_potential_ = on;
  partition_stale_ = true;
}

void BalanceEngine::rebuild_partition() {
  partition_stale_ = false;
  partition_available_ = false;
  std::vector<NodeId> negatives;
  for (NodeId i = 0; i < g_.node_count(); ++i)
    if (balances_.node_counts[static_cast<std::size_t>(i)] < 0) negatives.push_back(i);
  if (negatives.empty()) return;
  const PotentialSnapshot snap = compute_potential(g_, balances_);
  level_of_ = snap.level_of;
  level_radix_ = snap.radices;
  partition_available_ = true;
}

std::optional<Count> BalanceEngine::potential() {
  if (!track_potential_) return std::nullopt;
  if (partition_stale_) rebuild_partition();
  if (!partition_available_) return std::nullopt;
  Count value = 0;
  for (NodeId i = 0; i < g_.node_count(); ++i) {
    const Count c = balances_.node_counts[static_cast<std::size_t>(i)];
    if (c < 0) continue;
    const Count digit = std::min<Count>(c, g_.out_degree(i));
    value = checked_add(value,
                        checked_mul(level_radix_[static_cast<std::size_t>(level_of_[static_cast<std::size_t>(i)])], digit));
  }
  return value;
}

std::vector<std::int64_t> sample_rounds(std::int64_t max_rounds) {
  std::vector<std::int64_t> ks;
  for (std::int64_t k = 0; k <= std::min<std::int64_t>(10, max_rounds); ++k) ks.push_back(k);
  std::int64_t v = 10;
  while (v < max_rounds) {
    v = std::max(v + 1, static_cast<std::int64_t>(std::ceil(static_cast<double>(v) * 1.2)));
    ks.push_back(std::min(v, max_rounds));
  }
  for (std::int64_t d = 10; d <= max_rounds && d > 0; d *= 10) ks.push_back(d);
  ks.push_back(max_rounds);
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  return ks;
}

std::vector<BalanceTraceRow> run_balancing(BalanceEngine& engine, const BalanceRunOptions& opts) {
  if (opts.max_rounds < 0) throw InvalidParameter("max_rounds must be nonnegative");
  if (engine.round() != 0) throw InvalidParameter("run_balancing expects a fresh engine");
  engine.enable_potential_tracking(opts.diag_potential);

  std::vector<std::int64_t> sampled;
  if (opts.trace == TraceMode::Sampled) sampled = sample_rounds(opts.max_rounds);
  std::size_t si = 0;

  std::vector<BalanceTraceRow> rows;
  for (std::int64_t k = 0;; ++k) {
    const ImbalanceL1 imb = engine.imbalance();
    const auto pot = engine.potential();
    const bool stop =
        k >= opts.max_rounds || (opts.imbalance_tol && imb.value <= *opts.imbalance_tol);
    bool record = opts.trace == TraceMode::Full || stop;
    if (opts.trace == TraceMode::Sampled) {
      while (si < sampled.size() && sampled[si] < k) ++si;
      record = record || (si < sampled.size() && sampled[si] == k);
    }
    if (stop) {
      if (opts.trace != TraceMode::Off)
        rows.push_back({k, engine.gamma(), imb.value, EventKind::None, 0, pot});
      break;
    }
    const StepOutcome out = engine.step();
    if (record && opts.trace != TraceMode::Off)
      rows.push_back({k, engine.schedule().gamma_of_exponent(out.exponent), imb.value, out.kind,
                      out.sender_count, pot});
  }
  return rows;
}

}  // namespace qwbc
