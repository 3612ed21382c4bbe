#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "digraph.hpp"
#include "errors.hpp"

namespace qwbc {

// Ledger count type. Balances and weights are stored as integer counts of the
// current step size, so all decrement laws can be checked with zero tolerance.
// Counts grow roughly linearly with the round index; 128 bits cover any
// desk-scale run, and every add/mul is overflow-checked.
using Count = __int128;

inline Count checked_add(Count a, Count b) {
  Count r;
  if (__builtin_add_overflow(a, b, &r)) throw OverflowError("count ledger overflow in addition");
  return r;
}

inline Count checked_mul(Count a, Count b) {
  Count r;
  if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("count ledger overflow in multiplication");
  return r;
}

std::string count_to_string(Count v);

// Multiplies every count by c1^(new_exponent - old_exponent); the physical
// values count * gamma are unchanged. Throws OverflowError instead of wrapping.
void rescale_counts(std::span<Count> counts, int old_exponent, int new_exponent, std::int64_t c1);

struct GammaValue {
  int exponent;
  double value;
};

// Step size gamma(k) = gamma0 / c1^n, where n is the unique integer with
// (c1^n - 1) c2 <= k <= (c1^(n+1) - 1) c2 - 1. Held constant over
// geometrically growing blocks so every stored count stays an integer.
class StepSchedule {
public:
  StepSchedule(double gamma0, std::int64_t c1, std::int64_t c2);

  int exponent_at(std::int64_t k) const;
  double gamma_of_exponent(int exponent) const;
  GammaValue at(std::int64_t k) const { int e = exponent_at(k); return {e, gamma_of_exponent(e)}; }

  double gamma0() const { return gamma0_; }
  std::int64_t c1() const { return c1_; }
  std::int64_t c2() const { return c2_; }

private:
  double gamma0_;
  std::int64_t c1_;
  std::int64_t c2_;
};

class AlphaSchedule {
public:
  enum class Kind { Harmonic };

  static AlphaSchedule harmonic() { return AlphaSchedule(Kind::Harmonic); }

  // alpha(k) = 1/(k+1): positive, nonincreasing, nonsummable, square-summable.
  double at(std::int64_t k) const;
  Kind kind() const { return kind_; }

private:
  explicit AlphaSchedule(Kind kind) : kind_(kind) {}
  Kind kind_;
};

inline constexpr int kMaxBitsPerRound = 62;

// Per-node periodic bit budgets for the weight-balancing signal. Construction
// rejects schedules where some node could stay silent forever: every node must
// send at least one bit within every aligned window of length window().
class WbBitSchedule {
public:
  static WbBitSchedule uniform(std::vector<int> pattern);
  static WbBitSchedule per_node(std::vector<std::vector<int>> patterns);

  int bits(NodeId i, std::int64_t k) const;
  int window() const { return window_; }
  int max_bits() const { return max_bits_; }

private:
  WbBitSchedule() = default;
  std::vector<std::vector<int>> patterns_;  // one entry shared by all nodes, or one per node
  int window_ = 1;
  int max_bits_ = 0;
};

// Consensus-side budgets. A base 0/1 pattern marks the rounds where all nodes
// transmit simultaneously; per-node budgets must be >= 1 wherever the base is
// 1 and exactly 0 elsewhere.
class ConsBitSchedule {
public:
  static ConsBitSchedule from_base(std::vector<int> base_pattern);
  static ConsBitSchedule per_node(std::vector<int> base_pattern, std::vector<std::vector<int>> patterns);

  int bits(NodeId i, std::int64_t k) const;
  int base_bits(std::int64_t k) const;
  int window() const { return window_; }
  int max_bits() const { return max_bits_; }

private:
  ConsBitSchedule() = default;
  std::vector<int> base_;
  std::vector<std::vector<int>> patterns_;
  int window_ = 1;
  int max_bits_ = 0;
};

struct BitScheme {
  WbBitSchedule wb;
  ConsBitSchedule cons;
  std::string name;
  int total_bits = 0;  // bits per node per round, for communication-cost accounting
  int window = 1;
};

// Parses a scheme spec: "alternating", "simultaneous", "equal_split:B",
// "one_bit_wb:B", "one_bit_cons:B", or "custom:<file>".
BitScheme parse_bit_scheme(const std::string& text, NodeId n_nodes);

double kahan_sum(std::span<const double> xs);

}  // namespace qwbc
