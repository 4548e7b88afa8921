#include <doctest.h>

#include "uavrelay/error.hpp"
#include "uavrelay/relay.hpp"

using namespace uavrelay;

namespace {

PsoConfig quick_pso(std::uint64_t seed) {
  PsoConfig c;
  c.particles = 10;
  c.iterations = 20;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("little_delay") {
  CHECK(little_delay(3.0, 5.0, 0.0) == 0.0);
  CHECK(little_delay(16.0, 20.0, 8.0) == 0.5);
  CHECK(little_delay(20.0, 16.0, 8.0) == 0.5);
  CHECK(little_delay(2.0, 4.0, 6.0) == 3.0 * little_delay(2.0, 4.0, 2.0));
  try {
    little_delay(0.0, 3.0, 8.0);
    FAIL("expected ZeroRate");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroRate);
  }
  CHECK_THROWS_AS(little_delay(1.0, 1.0, -1.0), Error);
}

TEST_CASE("buffered rate: one location means both modes agree") {
  const RealizationFactory f(Scenario::desk(), 3);
  const Point2D p{40.0, 60.0};
  const auto a = buffered_rate(f, {BufferMode::WithoutBuffer, p, p, 8.0});
  const auto b = buffered_rate(f, {BufferMode::WithBuffer, p, p, 8.0});
  CHECK(a.r_total == b.r_total);
  CHECK(a.r_total == f.rates_equal(p).r_total);
}

TEST_CASE("buffered rate: split locations use each hop's rate") {
  const RealizationFactory f(Scenario::desk(), 5);
  const Point2D rx{10.0, 10.0}, tx{90.0, 90.0};
  const auto out = buffered_rate(f, {BufferMode::WithBuffer, rx, tx, 0.0});
  CHECK(out.r1 == f.rates_equal(rx).r1);
  CHECK(out.r2 == f.rates_equal(tx).r2);
  CHECK(out.r_total == df_rate(out.r1, out.r2));
  const auto nob = buffered_rate(f, {BufferMode::WithoutBuffer, rx, tx, 0.0});
  CHECK(nob.r2 == f.rates_equal(rx).r2);
}

TEST_CASE("buffering dominates the single-location optimum") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const RealizationFactory f(Scenario::desk(), seed);
    const auto single = optimize_without_buffer(f, quick_pso(seed));
    const auto fixed = fixed_policy(f);
    const auto buffered = optimize_with_buffer(f, quick_pso(seed), {single, fixed});
    CHECK(buffered.r_total >= single.r_total);
    CHECK(buffered.r_total >= fixed.r_total);
    CHECK(f.box().contains(buffered.policy.loc_rx));
    CHECK(f.box().contains(buffered.policy.loc_tx));
    CHECK(little_delay(buffered.r1, buffered.r2, 8.0) <= little_delay(fixed.r1, fixed.r2, 8.0));
  }
}
