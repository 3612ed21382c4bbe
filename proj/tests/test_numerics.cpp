#include "numerics.hpp"

#include <cstdio>
#include <fstream>
#include <limits>

#include "doctest.h"

using namespace qwbc;

TEST_SUITE("numerics") {

TEST_CASE("step sequence for gamma0=1, c1=2, c2=1") {
  const StepSchedule s(1.0, 2, 1);
  const double expected[] = {1, 0.5, 0.5, 0.25, 0.25, 0.25, 0.25, 0.125};
  for (int k = 0; k < 8; ++k) CHECK(s.at(k).value == expected[k]);
  CHECK(s.at(0).exponent == 0);
  CHECK(s.at(7).exponent == 3);
}

TEST_CASE("round zero always sits in the first window") {
  for (std::int64_t c1 : {2, 3, 7})
    for (std::int64_t c2 : {1, 2, 5}) {
      const StepSchedule s(0.37, c1, c2);
      CHECK(s.at(0).exponent == 0);
      CHECK(s.at(0).value == 0.37);
    }
}

TEST_CASE("window placement for c1=3, c2=2 at k=4") {
  // (3 - 1) * 2 = 4 <= 4 <= (9 - 1) * 2 - 1 = 15
  const StepSchedule s(1.0, 3, 2);
  CHECK(s.at(4).exponent == 1);
  CHECK(s.at(4).value == 1.0 / 3.0);
  CHECK(s.at(3).exponent == 0);
  CHECK(s.at(15).exponent == 1);
  CHECK(s.at(16).exponent == 2);
}

TEST_CASE("schedule validation") {
  CHECK_THROWS_AS(StepSchedule(0.0, 2, 1), InvalidParameter);
  CHECK_THROWS_AS(StepSchedule(-1.0, 2, 1), InvalidParameter);
  CHECK_THROWS_AS(StepSchedule(1.0, 1, 1), InvalidParameter);
  CHECK_THROWS_AS(StepSchedule(1.0, 2, 0), InvalidParameter);
}

TEST_CASE("step sandwich bounds hold exactly over a parameter grid") {
  // gamma0 c2 / (k + c2) <= gamma(k) <= gamma0 c1 c2 / (k + c2), checked in
  // integers: c1^n c2 <= k + c2 <= c1^(n+1) c2.
  for (std::int64_t c1 : {2, 3, 5})
    for (std::int64_t c2 : {1, 2, 7}) {
      const StepSchedule s(1.0, c1, c2);
      int last_exp = 0;
      for (std::int64_t k = 0; k <= 1000000; ++k) {
        const int n = s.exponent_at(k);
        Count pow_n = 1;
        for (int i = 0; i < n; ++i) pow_n *= c1;
        REQUIRE(pow_n * c2 <= static_cast<Count>(k) + c2);
        REQUIRE(static_cast<Count>(k) + c2 <= pow_n * c1 * c2);
        REQUIRE(n >= last_exp);        // nonincreasing step
        REQUIRE(n - last_exp <= 1);    // exponent moves by at most one
        last_exp = n;
      }
    }
}

TEST_CASE("rescale multiplies counts by the step ratio") {
  std::vector<Count> counts = {3, -3};
  rescale_counts(counts, 0, 1, 2);
  CHECK(counts[0] == 6);
  CHECK(counts[1] == -6);

  std::vector<Count> one = {1};
  rescale_counts(one, 0, 3, 2);
  CHECK(one[0] == 8);

  std::vector<Count> same = {5};
  rescale_counts(same, 2, 2, 2);
  CHECK(same[0] == 5);

  CHECK_THROWS_AS(rescale_counts(same, 2, 1, 2), InvalidParameter);
}

TEST_CASE("rescale detects overflow instead of wrapping") {
  std::vector<Count> big = {(static_cast<Count>(1) << 126)};
  CHECK_THROWS_AS(rescale_counts(big, 0, 1, 2), OverflowError);
  CHECK_THROWS_AS(checked_add(big[0], big[0]), OverflowError);
  CHECK_THROWS_AS(checked_mul(big[0], 4), OverflowError);
}

TEST_CASE("count printing") {
  CHECK(count_to_string(0) == "0");
  CHECK(count_to_string(-42) == "-42");
  Count big = 1;
  for (int i = 0; i < 38; ++i) big *= 10;
  CHECK(count_to_string(big) == "1" + std::string(38, '0'));
}

TEST_CASE("harmonic step size") {
  const AlphaSchedule a = AlphaSchedule::harmonic();
  CHECK(a.at(0) == 1.0);
  CHECK(a.at(9) == 0.1);
  for (std::int64_t k = 0; k < 1000; ++k) CHECK(a.at(k + 1) < a.at(k));
}

TEST_CASE("alternating scheme: balancing on odd rounds, consensus on even") {
  const BitScheme s = parse_bit_scheme("alternating", 6);
  CHECK(s.wb.bits(0, 3) == 1);
  CHECK(s.cons.bits(0, 3) == 0);
  CHECK(s.wb.bits(2, 4) == 0);
  CHECK(s.cons.bits(2, 4) == 1);
  CHECK(s.window == 2);
  CHECK(s.wb.window() == 2);
}

TEST_CASE("simultaneous scheme: one bit each way every round") {
  const BitScheme s = parse_bit_scheme("simultaneous", 6);
  for (std::int64_t k = 0; k < 5; ++k) {
    CHECK(s.wb.bits(1, k) == 1);
    CHECK(s.cons.bits(1, k) == 1);
  }
  CHECK(s.window == 1);
}

TEST_CASE("split schemes divide the total budget") {
  const BitScheme eq = parse_bit_scheme("equal_split:8", 6);
  CHECK(eq.wb.bits(0, 0) == 4);
  CHECK(eq.cons.bits(0, 0) == 4);
  CHECK(eq.total_bits == 8);

  const BitScheme wb1 = parse_bit_scheme("one_bit_wb:8", 6);
  CHECK(wb1.wb.bits(0, 0) == 1);
  CHECK(wb1.cons.bits(0, 0) == 7);

  const BitScheme cons1 = parse_bit_scheme("one_bit_cons:8", 6);
  CHECK(cons1.wb.bits(0, 0) == 7);
  CHECK(cons1.cons.bits(0, 0) == 1);

  // at a total of 2 all three coincide at (1, 1)
  for (const char* name : {"equal_split:2", "one_bit_wb:2", "one_bit_cons:2"}) {
    const BitScheme s = parse_bit_scheme(name, 6);
    CHECK(s.wb.bits(0, 0) == 1);
    CHECK(s.cons.bits(0, 0) == 1);
  }
}

TEST_CASE("scheme validation") {
  CHECK_THROWS_AS(parse_bit_scheme("equal_split:3", 6), ConfigError);   // odd split
  CHECK_THROWS_AS(parse_bit_scheme("equal_split:0", 6), ConfigError);
  CHECK_THROWS_AS(parse_bit_scheme("one_bit_wb:1", 6), ConfigError);
  CHECK_THROWS_AS(parse_bit_scheme("nonsense", 6), ConfigError);
  CHECK_THROWS_AS(parse_bit_scheme("equal_split:x", 6), ConfigError);
}

TEST_CASE("window rule rejects silent nodes") {
  CHECK_THROWS_AS(WbBitSchedule::uniform({0, 0, 0}), ConfigError);
  CHECK_THROWS_AS(ConsBitSchedule::from_base({0, 0}), ConfigError);
  // base entries beyond one bit are not a base pattern
  CHECK_THROWS_AS(ConsBitSchedule::from_base({2, 0}), ConfigError);
  // node budget below the base on a simultaneous round
  CHECK_THROWS_AS(ConsBitSchedule::per_node({1, 0}, {{0, 0}}), ConfigError);
  // node budget spent outside simultaneous rounds
  CHECK_THROWS_AS(ConsBitSchedule::per_node({1, 0}, {{1, 1}}), ConfigError);
}

TEST_CASE("heterogeneous per-node budgets are allowed above the base") {
  const ConsBitSchedule s = ConsBitSchedule::per_node({1, 0}, {{3, 0}, {1, 0}, {2, 0}});
  CHECK(s.bits(0, 0) == 3);
  CHECK(s.bits(1, 0) == 1);
  CHECK(s.bits(2, 2) == 2);
  CHECK(s.bits(0, 1) == 0);
  CHECK(s.max_bits() == 3);
}

TEST_CASE("custom scheme file") {
  const char* path = "custom_scheme_test.txt";
  {
    std::ofstream os(path);
    os << "# three-node scheme, balancing every third round\n";
    os << "wb * 3 0 0 2\n";
    os << "wb 1 3 1 0 1\n";
    os << "cons_base 2 1 0\n";
    os << "cons * 2 1 0\n";
    os << "cons 2 2 4 0\n";
  }
  const BitScheme s = parse_bit_scheme(std::string("custom:") + path, 3);
  CHECK(s.wb.bits(0, 2) == 2);
  CHECK(s.wb.bits(1, 0) == 1);
  CHECK(s.wb.bits(1, 2) == 1);
  CHECK(s.cons.bits(0, 0) == 1);
  CHECK(s.cons.bits(2, 0) == 4);
  CHECK(s.cons.bits(2, 1) == 0);
  CHECK(s.wb.window() == 3);
  std::remove(path);
}

TEST_CASE("kahan summation") {
  std::vector<double> xs(1000, 0.1);
  CHECK(kahan_sum(xs) == doctest::Approx(100.0).epsilon(1e-15));
  CHECK(kahan_sum({}) == 0.0);
}

}  // TEST_SUITE
