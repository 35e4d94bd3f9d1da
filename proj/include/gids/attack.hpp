#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "gids/can.hpp"

namespace gids {

enum class PayloadMode : std::uint8_t { Constant, Counter, Random };

// Jittered-periodic traffic model standing in for a real vehicle capture.
struct TrafficProfile {
  struct IdTiming {
    double period_ms = 10.0;
    double jitter = 0.0;  // fraction of the period, [0, 0.5]
  };

  std::map<CanId, IdTiming> id_periods;
  PayloadMode payload_mode = PayloadMode::Counter;
  std::uint64_t seed = 0;

  // 20 ids with 10-100 ms periods (~810 frames/s), 5% jitter.
  static TrafficProfile vehicle_default(std::uint64_t seed);
};

enum class AttackKind : std::uint8_t { DoS, Fuzzy, Targeted };

struct AttackSpec {
  AttackKind kind = AttackKind::DoS;
  double period_ms = 0.3;      // DoS 0.3, fuzzy 0.5, targeted 1.0
  CanId target_id = 0x316;     // Targeted only
  std::uint8_t payload[8] = {0xff, 0xff, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00};
  double start_s = 0.0;
  double end_s = 0.0;
  std::uint64_t seed = 0;

  static AttackSpec dos(double start_s, double end_s);
  static AttackSpec fuzzy(double start_s, double end_s, std::uint64_t seed);
  static AttackSpec targeted(CanId id, double start_s, double end_s);

  // key=value lines: kind, period_ms, target_id, start_s, end_s, seed, payload.
  static AttackSpec from_config(std::istream& in);
};

// Emits every profile id at its period +/- uniform jitter over
// [0, duration_s), all frames labeled Normal. Deterministic per seed.
CanLog gen_normal_traffic(const TrafficProfile& profile, double duration_s);

// Merges floor(window/period) injected frames into a copy of `base`.
// Injected frames land at start_s + k*period (k >= 1) and sort after any
// normal frame with the same timestamp. Base frames are never touched.
CanLog inject_attack(const CanLog& base, const AttackSpec& spec);

const char* attack_kind_name(AttackKind k);

}  // namespace gids
