#include "consensus.hpp"

#include <cmath>

#include "doctest.h"
#include "rng.hpp"

using namespace qwbc;

namespace {

QuantDrawFn fixed_draw(double u) {
  return [u](NodeId, std::int64_t) { return u; };
}

QuantDrawFn seeded_draw(std::uint64_t seed) {
  return [seed](NodeId i, std::int64_t k) {
    return point_u01({seed, kDomainQuantizer, static_cast<std::uint64_t>(i),
                      static_cast<std::uint64_t>(k)});
  };
}

Digraph two_node_pair() { return Digraph(2, {{0, 1}, {1, 0}}); }

}  // namespace

TEST_SUITE("consensus") {

TEST_CASE("clipping") {
  CHECK(clip(0.3, 0, 1) == 0.3);
  CHECK(clip(-2, 0, 1) == 0.0);
  CHECK(clip(7, 0, 1) == 1.0);
  CHECK_THROWS_AS(clip(0.5, 1, 0), InvalidParameter);
}

TEST_CASE("quantizer grid step") {
  CHECK(quant_step(1, 0, 1) == 1.0);
  CHECK(quant_step(3, 0, 1) == 1.0 / 7.0);
  CHECK(quant_step(2, -1, 1) == 2.0 / 3.0);
  CHECK_THROWS_AS(quant_step(0, 0, 1), InvalidParameter);
}

TEST_CASE("one-bit quantizer splits 0.3 with probability 0.3") {
  const QuantizerDraw up = quantize_prob(0.3, 1, 0, 1, 0.29);
  CHECK(up.x == 1.0);
  CHECK(up.p == doctest::Approx(0.3).epsilon(1e-12));
  const QuantizerDraw down = quantize_prob(0.3, 1, 0, 1, 0.31);
  CHECK(down.x == 0.0);
}

TEST_CASE("grid points are returned deterministically") {
  for (double u : {0.0, 0.3, 0.999}) {
    CHECK(quantize_prob(1.0, 1, 0, 1, u).x == 1.0);
    CHECK(quantize_prob(0.0, 3, 0, 1, u).x == 0.0);
  }
}

TEST_CASE("half-way point of the 3-bit grid") {
  const QuantizerDraw d = quantize_prob(0.5, 3, 0, 1, 0.9);
  CHECK(d.p == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("quantizer empirical mean matches the input") {
  // 1e5 counter-based draws; tolerance 3 sigma with sigma <= delta/2 per draw
  for (double y : {0.3, 0.5}) {
    for (int bits : {1, 3}) {
      const double delta = quant_step(bits, 0, 1);
      double sum = 0;
      const int n = 100000;
      for (int t = 0; t < n; ++t)
        sum += quantize_prob(y, bits, 0, 1, point_u01({9, static_cast<std::uint64_t>(t)})).x;
      const double tol = 3.0 * (delta / 2.0) / std::sqrt(static_cast<double>(n));
      CHECK(std::fabs(sum / n - y) < tol);
    }
  }
}

TEST_CASE("mse") {
  const std::vector<double> consensual = {0.5, 0.5, 0.5};
  CHECK(mse(consensual, 0.5) == 0.0);
  const std::vector<double> pair = {0.0, 1.0};
  CHECK(mse(pair, 0.5) == 0.25);
  const std::vector<double> triple = {0.0, 0.0, 3.0};
  CHECK(mse(triple, 1.0) == 2.0);
}

TEST_CASE("hand-simulated consensus round on a balanced pair") {
  // both estimates sit on the one-bit grid, so x = y deterministically and
  // the first harmonic step swaps the values while preserving the sum
  ConsensusEngine engine(two_node_pair(), 1, StepSchedule(1.0, 2, 1), AlphaSchedule::harmonic(),
                         parse_bit_scheme("simultaneous", 2), 0.0, 1.0, {0.0, 1.0},
                         fixed_draw(0.5));
  CHECK(engine.ybar0() == 0.5);
  engine.step();
  CHECK(engine.y()[0] == 1.0);
  CHECK(engine.y()[1] == 0.0);
  CHECK(engine.sum_y() == 1.0);
  CHECK(engine.sum_y_drift() == 0.0);
}

TEST_CASE("zero consensus bits leave the estimates untouched") {
  // under the alternating scheme, odd rounds carry no consensus bits
  ConsensusEngine engine(two_node_pair(), 1, StepSchedule(1.0, 2, 1), AlphaSchedule::harmonic(),
                         parse_bit_scheme("alternating", 2), 0.0, 1.0, {0.25, 0.75},
                         fixed_draw(0.9));
  engine.step();  // k = 0 is a consensus round under the alternating scheme
  const auto after_first = engine.y();
  engine.step();  // k = 1 transmits no consensus bits
  CHECK(engine.y() == after_first);
}

TEST_CASE("consensual grid state is a fixed point") {
  ConsensusEngine engine(two_node_pair(), 1, StepSchedule(1.0, 2, 1), AlphaSchedule::harmonic(),
                         parse_bit_scheme("simultaneous", 2), 0.0, 1.0, {1.0, 1.0},
                         fixed_draw(0.1));
  for (int k = 0; k < 50; ++k) engine.step();
  CHECK(engine.y()[0] == 1.0);
  CHECK(engine.y()[1] == 1.0);
  CHECK(engine.mse() == 0.0);
}

TEST_CASE("single trial with a fixed seed is reproducible bit for bit") {
  CounterStream rng{17, kDomainGraph};
  const Digraph g = Digraph::ring_plus_random(6, 0.2, rng);
  std::vector<double> y0 = {0.1, 0.9, 0.4, 0.7, 0.2, 0.6};

  auto run_once = [&](std::int64_t rounds) {
    ConsensusEngine engine(g, 1, StepSchedule(1.0, 2, 1), AlphaSchedule::harmonic(),
                           parse_bit_scheme("simultaneous", 6), 0.0, 1.0, y0, seeded_draw(21));
    for (std::int64_t k = 0; k < rounds; ++k) {
      const StepOutcome out = engine.step();
      // the embedded weight branch obeys the balancing laws unchanged
      if (out.kind == EventKind::Decreasing)
        REQUIRE(out.imbalance_after <= out.imbalance_before - 2);
      else
        REQUIRE(out.imbalance_after == out.imbalance_before);
      if (k % 100 == 0) REQUIRE(engine.weight_branch().audit_consistency());
    }
    return engine.y();
  };
  CHECK(run_once(2000) == run_once(2000));
}

TEST_CASE("sum of estimates drifts only at rounding scale") {
  CounterStream rng{23, kDomainGraph};
  const Digraph g = Digraph::ring_plus_random(6, 0.2, rng);
  ConsensusEngine engine(g, 1, StepSchedule(1.0, 2, 1), AlphaSchedule::harmonic(),
                         parse_bit_scheme("alternating", 6), 0.0, 1.0,
                         {0.15, 0.85, 0.35, 0.65, 0.05, 0.95}, seeded_draw(5));
  for (std::int64_t k = 1; k <= 20000; ++k) {
    engine.step();
    REQUIRE(std::fabs(engine.sum_y_drift()) <=
            1e-12 * static_cast<double>(k) * 6.0 * 1.0);
  }
}

TEST_CASE("estimates stay inside the online envelope") {
  CounterStream rng{29, kDomainGraph};
  const Digraph g = Digraph::ring_plus_random(6, 0.3, rng);
  // initial values partly outside the quantization range; the average is not
  std::vector<double> y0 = {-0.4, 1.3, 0.5, 0.2, 0.9, 0.4};
  ConsensusEngine engine(g, 1, StepSchedule(1.0, 2, 1), AlphaSchedule::harmonic(),
                         parse_bit_scheme("simultaneous", 6), 0.0, 1.0, y0, seeded_draw(31));
  CHECK(engine.average_informative());
  for (int k = 0; k < 20000; ++k) engine.step();
  CHECK(engine.envelope_ok());
  for (NodeId i = 0; i < 6; ++i) {
    const auto env = engine.envelope(i);
    CHECK(engine.y()[static_cast<std::size_t>(i)] >= env.lo);
    CHECK(engine.y()[static_cast<std::size_t>(i)] <= env.hi);
  }
}

TEST_CASE("uninformative average is a warning, not an error") {
  ConsensusEngine engine(two_node_pair(), 1, StepSchedule(1.0, 2, 1), AlphaSchedule::harmonic(),
                         parse_bit_scheme("simultaneous", 2), 0.0, 1.0, {5.0, 7.0},
                         fixed_draw(0.5));
  CHECK_FALSE(engine.average_informative());
  for (int k = 0; k < 10; ++k) engine.step();  // still runs
}

TEST_CASE("mse trace of a seeded trial decreases over decades") {
  CounterStream rng{41, kDomainGraph};
  const Digraph g = Digraph::ring_plus_random(6, 0.2, rng);
  std::vector<double> y0;
  for (int i = 0; i < 6; ++i)
    y0.push_back(point_u01({41, kDomainInitValues, static_cast<std::uint64_t>(i)}));
  ConsensusEngine engine(g, 1, StepSchedule(1.0, 2, 1), AlphaSchedule::harmonic(),
                         parse_bit_scheme("simultaneous", 6), 0.0, 1.0, y0, seeded_draw(43));
  double mse_at_100 = 0;
  for (std::int64_t k = 0; k < 10000; ++k) {
    if (k == 100) mse_at_100 = engine.mse();
    engine.step();
  }
  CHECK(engine.mse() < mse_at_100);
}

TEST_CASE("run_consensus records rows and stops at the target") {
  ConsensusEngine engine(two_node_pair(), 1, StepSchedule(1.0, 2, 1), AlphaSchedule::harmonic(),
                         parse_bit_scheme("simultaneous", 2), 0.0, 1.0, {1.0, 1.0},
                         fixed_draw(0.5));
  ConsensusRunOptions opts;
  opts.max_rounds = 100;
  opts.target_mse = 1e-9;
  const ConsensusRunResult res = run_consensus(engine, opts);
  CHECK(res.rounds_run == 0);  // already consensual
  REQUIRE(res.rows.size() == 1);
  CHECK(res.rows[0].mse == 0.0);
  CHECK(res.average_informative);
  CHECK(res.envelope_ok);
}

}  // TEST_SUITE
