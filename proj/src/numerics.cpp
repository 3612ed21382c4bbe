#include "numerics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace qwbc {

std::string count_to_string(Count v) {
  if (v == 0) return "0";
  const bool neg = v < 0;
  // Negate via unsigned to stay defined at the extreme value.
  unsigned __int128 u = neg ? ~static_cast<unsigned __int128>(v) + 1 : static_cast<unsigned __int128>(v);
  std::string digits;
  while (u > 0) {
    digits.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) digits.push_back('-');
  std::reverse(digits.begin(), digits.end());
  return digits;
}

void rescale_counts(std::span<Count> counts, int old_exponent, int new_exponent, std::int64_t c1) {
  if (new_exponent < old_exponent) throw InvalidParameter("step exponent cannot decrease");
  if (new_exponent == old_exponent) return;
  Count factor = 1;
  for (int i = old_exponent; i < new_exponent; ++i) factor = checked_mul(factor, c1);
  for (Count& c : counts) c = checked_mul(c, factor);
}

StepSchedule::StepSchedule(double gamma0, std::int64_t c1, std::int64_t c2)
    : gamma0_(gamma0), c1_(c1), c2_(c2) {
  if (!(gamma0 > 0.0) || !std::isfinite(gamma0))
    throw InvalidParameter("step schedule: gamma0 must be a positive finite real");
  if (c1 < 2) throw InvalidParameter("step schedule: c1 must be an integer >= 2");
  if (c2 < 1) throw InvalidParameter("step schedule: c2 must be a positive integer");
}

int StepSchedule::exponent_at(std::int64_t k) const {
  if (k < 0) throw InvalidParameter("round index must be nonnegative");
  // 2^127 - 1, assembled without shifting into the sign bit
  const Count max_count = (((static_cast<Count>(1) << 125) - 1) * 4) + 3;
  int n = 0;
  Count p = 1;  // c1^n
  for (;;) {
    if (p > max_count / c1_) return n;
    const Count pc = p * c1_;
    if (pc - 1 > max_count / c2_) return n;
    const Count next_start = (pc - 1) * c2_;  // first round of exponent n + 1
    if (static_cast<Count>(k) < next_start) return n;
    ++n;
    p = pc;
  }
}

double StepSchedule::gamma_of_exponent(int exponent) const {
  double g = gamma0_;
  for (int i = 0; i < exponent; ++i) g /= static_cast<double>(c1_);
  return g;
}

double AlphaSchedule::at(std::int64_t k) const {
  if (k < 0) throw InvalidParameter("round index must be nonnegative");
  return 1.0 / static_cast<double>(k + 1);
}

namespace {

void check_pattern_entries(const std::vector<int>& pattern, const char* what) {
  if (pattern.empty()) throw ConfigError(std::string(what) + ": empty bit pattern");
  for (int b : pattern) {
    if (b < 0 || b > kMaxBitsPerRound)
      throw ConfigError(std::string(what) + ": bit budget out of range [0, 62]");
  }
}

bool has_positive(const std::vector<int>& pattern) {
  return std::any_of(pattern.begin(), pattern.end(), [](int b) { return b > 0; });
}

int lcm_window(const std::vector<std::vector<int>>& patterns, std::int64_t extra = 1) {
  std::int64_t w = extra;
  for (const auto& p : patterns) {
    w = std::lcm(w, static_cast<std::int64_t>(p.size()));
    if (w > (1 << 20)) throw ConfigError("bit schedule periods too large: window exceeds 2^20 rounds");
  }
  return static_cast<int>(w);
}

int pattern_max(const std::vector<std::vector<int>>& patterns) {
  int m = 0;
  for (const auto& p : patterns)
    for (int b : p) m = std::max(m, b);
  return m;
}

}  // namespace

WbBitSchedule WbBitSchedule::uniform(std::vector<int> pattern) {
  return per_node({std::move(pattern)});
}

WbBitSchedule WbBitSchedule::per_node(std::vector<std::vector<int>> patterns) {
  if (patterns.empty()) throw ConfigError("weight-balancing bit schedule: no patterns");
  for (const auto& p : patterns) {
    check_pattern_entries(p, "weight-balancing bit schedule");
    if (!has_positive(p))
      throw ConfigError(
          "weight-balancing bit schedule violates the window rule: "
          "every node must get at least one bit within each window");
  }
  WbBitSchedule s;
  s.window_ = lcm_window(patterns);
  s.max_bits_ = pattern_max(patterns);
  s.patterns_ = std::move(patterns);
  return s;
}

int WbBitSchedule::bits(NodeId i, std::int64_t k) const {
  const auto& p = patterns_.size() == 1 ? patterns_[0] : patterns_[static_cast<std::size_t>(i)];
  return p[static_cast<std::size_t>(k % static_cast<std::int64_t>(p.size()))];
}

ConsBitSchedule ConsBitSchedule::from_base(std::vector<int> base_pattern) {
  std::vector<int> copy = base_pattern;
  return per_node(std::move(base_pattern), {std::move(copy)});
}

ConsBitSchedule ConsBitSchedule::per_node(std::vector<int> base_pattern,
                                          std::vector<std::vector<int>> patterns) {
  check_pattern_entries(base_pattern, "consensus base pattern");
  for (int b : base_pattern)
    if (b > 1) throw ConfigError("consensus base pattern entries must be 0 or 1");
  if (!has_positive(base_pattern))
    throw ConfigError(
        "consensus bit schedule violates the window rule: the base pattern must "
        "schedule at least one simultaneous round per window");
  if (patterns.empty()) throw ConfigError("consensus bit schedule: no patterns");
  for (const auto& p : patterns) check_pattern_entries(p, "consensus bit schedule");

  ConsBitSchedule s;
  s.window_ = lcm_window(patterns, static_cast<std::int64_t>(base_pattern.size()));
  // Per-node budgets must cover the base exactly where it is active.
  for (const auto& p : patterns) {
    const std::int64_t span = std::lcm(static_cast<std::int64_t>(p.size()),
                                       static_cast<std::int64_t>(base_pattern.size()));
    for (std::int64_t t = 0; t < span; ++t) {
      const int base = base_pattern[static_cast<std::size_t>(t % static_cast<std::int64_t>(base_pattern.size()))];
      const int mine = p[static_cast<std::size_t>(t % static_cast<std::int64_t>(p.size()))];
      if (base > 0 && mine < base)
        throw ConfigError(
            "consensus bit schedule: node budget must be >= the base budget on "
            "simultaneous rounds");
      if (base == 0 && mine != 0)
        throw ConfigError(
            "consensus bit schedule: node budget must be 0 when the base budget is 0");
    }
  }
  s.max_bits_ = pattern_max(patterns);
  s.base_ = std::move(base_pattern);
  s.patterns_ = std::move(patterns);
  return s;
}

int ConsBitSchedule::bits(NodeId i, std::int64_t k) const {
  const auto& p = patterns_.size() == 1 ? patterns_[0] : patterns_[static_cast<std::size_t>(i)];
  return p[static_cast<std::size_t>(k % static_cast<std::int64_t>(p.size()))];
}

int ConsBitSchedule::base_bits(std::int64_t k) const {
  return base_[static_cast<std::size_t>(k % static_cast<std::int64_t>(base_.size()))];
}

namespace {

BitScheme make_split_scheme(const std::string& name, int wb_bits, int cons_bits, int total) {
  return BitScheme{WbBitSchedule::uniform({wb_bits}), ConsBitSchedule::per_node({1}, {{cons_bits}}),
                   name, total, 1};
}

int parse_total(const std::string& text, std::size_t colon) {
  if (colon == std::string::npos || colon + 1 >= text.size())
    throw ConfigError("bit scheme '" + text + "' needs a total bit count, e.g. equal_split:8");
  int total = 0;
  try {
    std::size_t used = 0;
    total = std::stoi(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw ConfigError("bit scheme '" + text + "': malformed bit count");
  }
  return total;
}

BitScheme parse_custom_scheme(const std::string& path, NodeId n_nodes);

}  // namespace

BitScheme parse_bit_scheme(const std::string& text, NodeId n_nodes) {
  const std::size_t colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  if (kind == "alternating") {
    // One bit per channel use: weight-balancing on odd rounds, consensus on even.
    return BitScheme{WbBitSchedule::uniform({0, 1}), ConsBitSchedule::from_base({1, 0}),
                     "alternating", 1, 2};
  }
  if (kind == "simultaneous") {
    return make_split_scheme("simultaneous", 1, 1, 2);
  }
  if (kind == "equal_split") {
    const int total = parse_total(text, colon);
    if (total < 2 || total % 2 != 0)
      throw ConfigError("equal_split needs an even total of at least 2 bits");
    return make_split_scheme("equal_split", total / 2, total / 2, total);
  }
  if (kind == "one_bit_wb") {
    const int total = parse_total(text, colon);
    if (total < 2) throw ConfigError("one_bit_wb needs a total of at least 2 bits");
    return make_split_scheme("one_bit_wb", 1, total - 1, total);
  }
  if (kind == "one_bit_cons") {
    const int total = parse_total(text, colon);
    if (total < 2) throw ConfigError("one_bit_cons needs a total of at least 2 bits");
    return make_split_scheme("one_bit_cons", total - 1, 1, total);
  }
  if (kind == "custom") {
    if (colon == std::string::npos) throw ConfigError("custom bit scheme needs a file: custom:<path>");
    return parse_custom_scheme(text.substr(colon + 1), n_nodes);
  }
  throw ConfigError("unknown bit scheme '" + text + "'");
}

namespace {

// Custom scheme file: one record per line.
//   wb <node|*> <period> b0 b1 ... b{period-1}
//   cons_base <period> p0 ... p{period-1}        (entries 0/1)
//   cons <node|*> <period> b0 ...
// '*' applies to every node without its own record; cons records default to
// the base pattern.
BitScheme parse_custom_scheme(const std::string& path, NodeId n_nodes) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open custom bit scheme file: " + path);

  std::vector<std::vector<int>> wb(static_cast<std::size_t>(n_nodes));
  std::vector<std::vector<int>> cons(static_cast<std::size_t>(n_nodes));
  std::vector<int> wb_star, cons_star, base;

  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    auto bad = [&](const std::string& why) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + why);
    };
    auto read_pattern = [&]() {
      int period = 0;
      if (!(ls >> period) || period < 1) bad("expected a positive period");
      std::vector<int> pat(static_cast<std::size_t>(period));
      for (int& b : pat)
        if (!(ls >> b)) bad("pattern shorter than its period");
      return pat;
    };
    if (tag == "cons_base") {
      base = read_pattern();
      continue;
    }
    if (tag != "wb" && tag != "cons") bad("unknown record '" + tag + "'");
    std::string node;
    if (!(ls >> node)) bad("expected a node id or '*'");
    std::vector<int> pat = read_pattern();
    if (node == "*") {
      (tag == "wb" ? wb_star : cons_star) = std::move(pat);
    } else {
      int id = -1;
      try {
        id = std::stoi(node);
      } catch (const std::exception&) {
        bad("malformed node id '" + node + "'");
      }
      if (id < 0 || id >= n_nodes) bad("node id out of range");
      (tag == "wb" ? wb : cons)[static_cast<std::size_t>(id)] = std::move(pat);
    }
  }

  if (base.empty()) base = {1};
  for (NodeId i = 0; i < n_nodes; ++i) {
    auto& w = wb[static_cast<std::size_t>(i)];
    if (w.empty()) {
      if (wb_star.empty())
        throw ConfigError(path + ": no wb pattern for node " + std::to_string(i) +
                          " and no 'wb *' default");
      w = wb_star;
    }
    auto& c = cons[static_cast<std::size_t>(i)];
    if (c.empty()) c = cons_star.empty() ? base : cons_star;
  }

  BitScheme s{WbBitSchedule::per_node(std::move(wb)),
              ConsBitSchedule::per_node(std::move(base), std::move(cons)), "custom", 0, 1};
  s.window = std::lcm(s.wb.window(), s.cons.window());
  s.total_bits = s.wb.max_bits() + s.cons.max_bits();
  return s;
}

}  // namespace

double kahan_sum(std::span<const double> xs) {
  double sum = 0.0, carry = 0.0;
  for (double x : xs) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

}  // namespace qwbc
