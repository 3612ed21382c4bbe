#include "consensus.hpp"

#include <algorithm>
#include <cmath>

namespace qwbc {

double clip(double y, double q_min, double q_max) {
  if (!(q_min < q_max)) throw InvalidParameter("quantization range needs q_min < q_max");
  return std::min(std::max(y, q_min), q_max);
}

double quant_step(int bits, double q_min, double q_max) {
  if (bits < 1) throw InvalidParameter("quantizer step undefined for a zero-bit budget");
  if (bits > kMaxBitsPerRound) throw InvalidParameter("quantizer bit budget out of range");
  if (!(q_min < q_max)) throw InvalidParameter("quantization range needs q_min < q_max");
  const double levels = static_cast<double>((static_cast<std::int64_t>(1) << bits) - 1);
  return (q_max - q_min) / levels;
}

QuantizerDraw quantize_prob(double y_tilde, int bits, double q_min, double q_max, double u01) {
  const double delta = quant_step(bits, q_min, q_max);
  const double r = (y_tilde - q_min) / delta;
  const double lo = std::floor(r);
  const double p = r - lo;
  const bool up = p > 0.0 && u01 < p;
  const double m = up ? lo + 1.0 : lo;
  double x = q_min + m * delta;
  x = std::min(std::max(x, q_min), q_max);
  return {x, p, bits, up};
}

double mse(std::span<const double> y, double ybar0) {
  if (y.empty()) return 0.0;
  double acc = 0.0;
  for (double v : y) {
    const double d = v - ybar0;
    acc += d * d;
  }
  return acc / static_cast<double>(y.size());
}

ConsensusEngine::ConsensusEngine(Digraph g, std::span<const std::int64_t> cij, StepSchedule sched,
                                 AlphaSchedule alpha, BitScheme bits, double q_min, double q_max,
                                 std::vector<double> y0, QuantDrawFn draw)
    : bal_(std::move(g), cij, sched, std::move(bits.wb)),
      alpha_(alpha),
      cons_bits_(std::move(bits.cons)),
      q_min_(q_min),
      q_max_(q_max),
      q_star_(std::max(std::fabs(q_min), std::fabs(q_max))),
      draw_(std::move(draw)) {
  init(std::move(y0));
}

ConsensusEngine::ConsensusEngine(Digraph g, std::int64_t cij_all, StepSchedule sched,
                                 AlphaSchedule alpha, BitScheme bits, double q_min, double q_max,
                                 std::vector<double> y0, QuantDrawFn draw)
    : bal_(std::move(g), cij_all, sched, std::move(bits.wb)),
      alpha_(alpha),
      cons_bits_(std::move(bits.cons)),
      q_min_(q_min),
      q_max_(q_max),
      q_star_(std::max(std::fabs(q_min), std::fabs(q_max))),
      draw_(std::move(draw)) {
  init(std::move(y0));
}

void ConsensusEngine::init(std::vector<double> y0) {
  if (!(q_min_ < q_max_)) throw InvalidParameter("quantization range needs q_min < q_max");
  const NodeId n = bal_.graph().node_count();
  if (static_cast<NodeId>(y0.size()) != n)
    throw InvalidParameter("initial values: need one entry per node");
  if (!draw_) throw InvalidParameter("consensus engine needs a quantizer draw function");
  y_ = std::move(y0);
  x_.assign(static_cast<std::size_t>(n), 0.0);
  b_val_.assign(static_cast<std::size_t>(n), 0.0);
  a_val_.assign(static_cast<std::size_t>(bal_.graph().edge_count()), 0.0);

  y0_sum_ = kahan_sum(y_);
  ybar0_ = y0_sum_ / static_cast<double>(n);
  average_informative_ = ybar0_ >= q_min_ && ybar0_ <= q_max_;

  alpha0_ = alpha_.at(0);
  eps0_value_ = bal_.imbalance().value;
  env_base_hi_.resize(static_cast<std::size_t>(n));
  env_base_lo_.resize(static_cast<std::size_t>(n));
  env_run_sum_.assign(static_cast<std::size_t>(n), 0.0);
  env_s_max_.resize(static_cast<std::size_t>(n));
  for (NodeId i = 0; i < n; ++i) {
    env_base_hi_[static_cast<std::size_t>(i)] = std::max(q_max_, y_[static_cast<std::size_t>(i)]);
    env_base_lo_[static_cast<std::size_t>(i)] = std::min(q_min_, y_[static_cast<std::size_t>(i)]);
    env_s_max_[static_cast<std::size_t>(i)] = bal_.in_flow_value(i);
  }
}

ConsensusEngine::Envelope ConsensusEngine::envelope(NodeId i) const {
  const std::size_t ii = static_cast<std::size_t>(i);
  const double spread =
      alpha0_ * eps0_value_ * q_star_ + alpha0_ * env_s_max_[ii] * (q_max_ - q_min_) +
      q_star_ * env_run_sum_[ii];
  return {env_base_lo_[ii] - spread, env_base_hi_[ii] + spread};
}

double ConsensusEngine::sum_y() const { return kahan_sum(y_); }

StepOutcome ConsensusEngine::step() {
  const std::int64_t k = bal_.round();
  const Digraph& g = bal_.graph();
  const NodeId n = g.node_count();
  const double a = alpha_.at(k);

  // Pre-round snapshot: the y-update and the weight update share the round-k
  // balances and weights.
  for (NodeId i = 0; i < n; ++i) {
    const std::size_t ii = static_cast<std::size_t>(i);
    b_val_[ii] = bal_.balance_value(i);
    const int bits = cons_bits_.bits(i, k);
    x_[ii] = bits == 0
                 ? 0.0
                 : quantize_prob(clip(y_[ii], q_min_, q_max_), bits, q_min_, q_max_, draw_(i, k)).x;
  }
  for (EdgeId e = 0; e < g.edge_count(); ++e)
    a_val_[static_cast<std::size_t>(e)] = bal_.weight_value(e);

  const StepOutcome out = bal_.step();

  for (NodeId i = 0; i < n; ++i) {
    const std::size_t ii = static_cast<std::size_t>(i);
    double flow = b_val_[ii] * x_[ii];
    double s_in = 0.0;
    for (EdgeId e : g.in_edges(i)) {
      const std::size_t ee = static_cast<std::size_t>(e);
      flow += a_val_[ee] * (x_[static_cast<std::size_t>(g.edge(e).src)] - x_[ii]);
      s_in += a_val_[ee];
    }
    y_[ii] += a * flow;
    env_run_sum_[ii] += a * std::fabs(b_val_[ii]);
    env_s_max_[ii] = std::max(env_s_max_[ii], s_in);
  }

  for (NodeId i = 0; i < n; ++i) {
    const Envelope env = envelope(i);
    const double v = y_[static_cast<std::size_t>(i)];
    if (v < env.lo || v > env.hi) envelope_ok_ = false;
  }
  return out;
}

ConsensusRunResult run_consensus(ConsensusEngine& engine, const ConsensusRunOptions& opts) {
  if (opts.max_rounds < 0) throw InvalidParameter("max_rounds must be nonnegative");
  if (engine.round() != 0) throw InvalidParameter("run_consensus expects a fresh engine");

  std::vector<std::int64_t> sampled;
  if (opts.trace == TraceMode::Sampled) sampled = sample_rounds(opts.max_rounds);
  std::size_t si = 0;

  ConsensusRunResult res;
  res.average_informative = engine.average_informative();
  for (std::int64_t k = 0;; ++k) {
    const double m = engine.mse();
    const double imb = engine.imbalance().value;
    const double drift = engine.sum_y_drift();
    const bool stop = k >= opts.max_rounds || (opts.target_mse && m <= *opts.target_mse);
    bool record = opts.trace == TraceMode::Full || stop;
    if (opts.trace == TraceMode::Sampled) {
      while (si < sampled.size() && sampled[si] < k) ++si;
      record = record || (si < sampled.size() && sampled[si] == k);
    }
    if (stop) {
      if (opts.trace != TraceMode::Off)
        res.rows.push_back({k, engine.weight_branch().gamma(), engine.alpha_at(k), imb, m, drift,
                            EventKind::None});
      res.rounds_run = k;
      break;
    }
    const StepOutcome out = engine.step();
    if (record && opts.trace != TraceMode::Off)
      res.rows.push_back({k, engine.weight_branch().schedule().gamma_of_exponent(out.exponent),
                          engine.alpha_at(k), imb, m, drift, out.kind});
  }
  res.envelope_ok = engine.envelope_ok();
  return res;
}

}  // namespace qwbc
