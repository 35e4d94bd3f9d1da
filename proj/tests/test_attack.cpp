#include "gids/attack.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "doctest.h"

using namespace gids;

namespace {

TrafficProfile single_id_profile(CanId id, double period_ms, double jitter, std::uint64_t seed) {
  TrafficProfile p;
  p.id_periods[id] = {period_ms, jitter};
  p.seed = seed;
  return p;
}

}  // namespace

TEST_CASE("zero-jitter traffic is exactly periodic") {
  auto log = gen_normal_traffic(single_id_profile(0x316, 10.0, 0.0, 1), 1.0);
  REQUIRE(log.frames.size() == 100);
  for (std::size_t i = 0; i < log.frames.size(); ++i) {
    CHECK(log.frames[i].ts_us == static_cast<std::int64_t>(i) * 10000);
    CHECK(log.frames[i].id == 0x316);
    CHECK(log.frames[i].label == FrameLabel::Normal);
  }
}

TEST_CASE("traffic generation is deterministic per seed") {
  auto p = TrafficProfile::vehicle_default(42);
  auto a = gen_normal_traffic(p, 2.0);
  auto b = gen_normal_traffic(p, 2.0);
  CHECK(a == b);

  p.seed = 43;
  auto c = gen_normal_traffic(p, 2.0);
  CHECK(!(a == c));
}

TEST_CASE("multi-id traffic matches the counting oracle and stays sorted") {
  TrafficProfile p;
  p.seed = 5;
  for (CanId id : {0x100, 0x200, 0x300, 0x400, 0x500}) p.id_periods[id] = {10.0, 0.0};
  auto log = gen_normal_traffic(p, 10.0);

  // Independent oracle: per id, emissions at k*period < duration.
  std::size_t expected = 0;
  for ([[maybe_unused]] const auto& [id, timing] : p.id_periods) {
    std::size_t count = 0;
    for (std::int64_t t = 0; t < 10'000'000; t += 10'000) ++count;
    expected += count;
  }
  CHECK(log.frames.size() == expected);
  CHECK(expected == 5000);

  for (std::size_t i = 1; i < log.frames.size(); ++i)
    CHECK(log.frames[i - 1].ts_us <= log.frames[i].ts_us);
}

TEST_CASE("empty profile is rejected") {
  CHECK_THROWS_AS(gen_normal_traffic(TrafficProfile{}, 1.0), Error);
}

TEST_CASE("dos injection count equals floor(window/period)") {
  auto base = gen_normal_traffic(single_id_profile(0x316, 10.0, 0.0, 1), 2.0);
  auto spec = AttackSpec::dos(0.5, 1.5);
  auto out = inject_attack(base, spec);

  std::size_t injected = 0;
  for (const auto& f : out.frames) {
    if (f.label == FrameLabel::Injected) {
      ++injected;
      CHECK(f.id == 0x000);
    }
  }
  // 1 s window at 0.3 ms -> floor(1000000/300) = 3333.
  CHECK(injected == 3333);
}

TEST_CASE("disjoint window is rejected") {
  auto base = gen_normal_traffic(single_id_profile(0x316, 10.0, 0.0, 1), 1.0);
  try {
    inject_attack(base, AttackSpec::dos(5.0, 6.0));
    FAIL("expected WindowOutOfRange");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::WindowOutOfRange);
  }
}

TEST_CASE("fuzzy ids are in range and roughly uniform") {
  auto base = gen_normal_traffic(single_id_profile(0x316, 10.0, 0.0, 1), 12.0);
  auto spec = AttackSpec::fuzzy(0.0, 12.0, 9);
  auto out = inject_attack(base, spec);

  std::map<int, std::size_t> bins;
  std::size_t n = 0;
  for (const auto& f : out.frames) {
    if (f.label != FrameLabel::Injected) continue;
    CHECK(f.id <= kMaxCanId);
    ++bins[f.id >> 7];  // 16 bins of 128 ids
    ++n;
  }
  REQUIRE(n >= 10'000);

  // Chi-square over 16 bins; 99.9% quantile for df=15 is 37.7.
  const double expected = static_cast<double>(n) / 16.0;
  double chi2 = 0.0;
  for (int b = 0; b < 16; ++b) {
    const double diff = static_cast<double>(bins[b]) - expected;
    chi2 += diff * diff / expected;
  }
  CHECK(chi2 < 37.7);
}

TEST_CASE("targeted injection repeats the target id and payload") {
  auto base = gen_normal_traffic(single_id_profile(0x316, 10.0, 0.0, 1), 1.0);
  auto spec = AttackSpec::targeted(0x43f, 0.2, 0.8);
  auto out = inject_attack(base, spec);
  std::size_t injected = 0;
  for (const auto& f : out.frames) {
    if (f.label != FrameLabel::Injected) continue;
    ++injected;
    CHECK(f.id == 0x43f);
    CHECK(f.data[0] == 0xff);
  }
  CHECK(injected == 600);  // 0.6 s at 1 ms
}

TEST_CASE("injection preserves the base subsequence and sort order") {
  auto p = TrafficProfile::vehicle_default(7);
  auto base = gen_normal_traffic(p, 5.0);
  for (auto spec : {AttackSpec::dos(1.0, 4.0), AttackSpec::fuzzy(1.0, 4.0, 3),
                    AttackSpec::targeted(0x316, 1.0, 4.0)}) {
    auto out = inject_attack(base, spec);

    CanLog normals;
    for (const auto& f : out.frames)
      if (f.label == FrameLabel::Normal) normals.frames.push_back(f);
    CHECK(normals == base);

    for (std::size_t i = 1; i < out.frames.size(); ++i)
      CHECK(out.frames[i - 1].ts_us <= out.frames[i].ts_us);

    // Injected rate within 1% of 1/period over the window.
    std::size_t injected = out.frames.size() - base.frames.size();
    const double window_ms = 3000.0;
    const double expected = window_ms / spec.period_ms;
    CHECK(std::abs(static_cast<double>(injected) - expected) <= 0.01 * expected);
  }
}

TEST_CASE("attack spec from key=value config") {
  std::istringstream in(
      "kind=targeted\n"
      "target_id=43f\n"
      "period_ms=2.5\n"
      "start_s=1\n"
      "end_s=9\n"
      "payload=deadbeef00000000\n");
  auto spec = AttackSpec::from_config(in);
  CHECK(spec.kind == AttackKind::Targeted);
  CHECK(spec.target_id == 0x43f);
  CHECK(spec.period_ms == doctest::Approx(2.5));
  CHECK(spec.payload[0] == 0xde);
  CHECK(spec.payload[3] == 0xef);

  std::istringstream bad("nonsense\n");
  CHECK_THROWS_AS(AttackSpec::from_config(bad), Error);
}
