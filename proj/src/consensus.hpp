#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "balancer.hpp"

namespace qwbc {

double clip(double y, double q_min, double q_max);

// Grid spacing of a B-bit quantizer over [q_min, q_max]. B must be >= 1;
// zero-bit rounds short-circuit to x = 0 before any grid math.
double quant_step(int bits, double q_min, double q_max);

struct QuantizerDraw {
  double x = 0.0;
  double p = 0.0;  // probability of the upper grid point
  int bits = 0;
  bool took_ceil = false;
};

// Rounds a clipped value to one of its two neighboring grid points, upward
// with probability p = frac((y - q_min)/step), so the draw is conditionally
// unbiased: E[x | y] = y. Values already on the grid are returned as-is.
QuantizerDraw quantize_prob(double y_tilde, int bits, double q_min, double q_max, double u01);

double mse(std::span<const double> y, double ybar0);

// Uniform draw for the quantizer of node i at round k. Counter-based in the
// harness so rounds that transmit nothing consume nothing.
using QuantDrawFn = std::function<double(NodeId, std::int64_t)>;

// Joint engine: each round runs the weight-balancing update and one step of
// quantized consensus on the same clock. The y-update reads the pre-round
// balances and weights, which preserves sum(y) exactly in real arithmetic.
class ConsensusEngine {
public:
  ConsensusEngine(Digraph g, std::span<const std::int64_t> cij, StepSchedule sched,
                  AlphaSchedule alpha, BitScheme bits, double q_min, double q_max,
                  std::vector<double> y0, QuantDrawFn draw);
  ConsensusEngine(Digraph g, std::int64_t cij_all, StepSchedule sched, AlphaSchedule alpha,
                  BitScheme bits, double q_min, double q_max, std::vector<double> y0,
                  QuantDrawFn draw);

  StepOutcome step();

  std::int64_t round() const { return bal_.round(); }
  const Digraph& graph() const { return bal_.graph(); }
  BalanceEngine& weight_branch() { return bal_; }
  const BalanceEngine& weight_branch() const { return bal_; }
  ImbalanceL1 imbalance() const { return bal_.imbalance(); }

  const std::vector<double>& y() const { return y_; }
  std::span<const double> last_broadcast() const { return x_; }
  double alpha_at(std::int64_t k) const { return alpha_.at(k); }
  double ybar0() const { return ybar0_; }
  double q_min() const { return q_min_; }
  double q_max() const { return q_max_; }

  double mse() const { return qwbc::mse(y_, ybar0_); }
  double sum_y() const;
  double sum_y_drift() const { return sum_y() - y0_sum_; }

  // True when the initial average sits inside the quantization range; when it
  // does not, the run proceeds but convergence to the average is unguaranteed.
  bool average_informative() const { return average_informative_; }

  // Online node envelope: closed-form constants plus the running sum
  // q* . sum_{t<k} alpha(t) |b_i(t)| accumulated as simulated.
  struct Envelope {
    double lo = 0.0;
    double hi = 0.0;
  };
  Envelope envelope(NodeId i) const;
  bool envelope_ok() const { return envelope_ok_; }  // sticky over the whole run

private:
  void init(std::vector<double> y0);

  BalanceEngine bal_;
  AlphaSchedule alpha_;
  ConsBitSchedule cons_bits_;
  double q_min_, q_max_, q_star_;
  QuantDrawFn draw_;

  std::vector<double> y_;
  std::vector<double> x_;
  std::vector<double> b_val_, a_val_;
  double y0_sum_ = 0.0;
  double ybar0_ = 0.0;
  bool average_informative_ = true;

  // envelope bookkeeping
  double alpha0_ = 1.0;
  double eps0_value_ = 0.0;
  std::vector<double> env_base_hi_, env_base_lo_, env_run_sum_, env_s_max_;
  bool envelope_ok_ = true;
};

struct ConsensusTraceRow {
  std::int64_t k = 0;
  double gamma = 0.0;
  double alpha = 0.0;
  double imbalance = 0.0;
  double mse = 0.0;
  double sum_y_drift = 0.0;
  EventKind event = EventKind::None;
};

struct ConsensusRunOptions {
  std::int64_t max_rounds = 0;
  std::optional<double> target_mse;
  TraceMode trace = TraceMode::Full;
};

struct ConsensusRunResult {
  std::vector<ConsensusTraceRow> rows;
  std::int64_t rounds_run = 0;
  bool average_informative = true;
  bool envelope_ok = true;
};

ConsensusRunResult run_consensus(ConsensusEngine& engine, const ConsensusRunOptions& opts);

}  // namespace qwbc
