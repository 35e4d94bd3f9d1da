#include "gids/attack.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>

#include "gids/rng.hpp"

namespace gids {

TrafficProfile TrafficProfile::vehicle_default(std::uint64_t seed) {
  // Fast powertrain-style ids first, slow body/diagnostic ids last.
  static constexpr struct { CanId id; double period_ms; } kTable[] = {
      {0x130, 10},  {0x131, 10},  {0x140, 10},  {0x316, 10},
      {0x153, 20},  {0x164, 20},  {0x18f, 20},  {0x220, 20},  {0x43f, 20},
      {0x260, 50},  {0x2a0, 50},  {0x2b0, 50},  {0x329, 50},  {0x350, 50},
      {0x370, 100}, {0x440, 100}, {0x4b1, 100}, {0x545, 100}, {0x5a0, 100},
      {0x690, 100},
  };
  TrafficProfile p;
  p.seed = seed;
  for (auto [id, period] : kTable) p.id_periods[id] = {period, 0.05};
  return p;
}

AttackSpec AttackSpec::dos(double start_s, double end_s) {
  AttackSpec s;
  s.kind = AttackKind::DoS;
  s.period_ms = 0.3;
  s.target_id = 0x000;
  s.start_s = start_s;
  s.end_s = end_s;
  for (auto& b : s.payload) b = 0x00;
  return s;
}

AttackSpec AttackSpec::fuzzy(double start_s, double end_s, std::uint64_t seed) {
  AttackSpec s;
  s.kind = AttackKind::Fuzzy;
  s.period_ms = 0.5;
  s.start_s = start_s;
  s.end_s = end_s;
  s.seed = seed;
  return s;
}

AttackSpec AttackSpec::targeted(CanId id, double start_s, double end_s) {
  AttackSpec s;
  s.kind = AttackKind::Targeted;
  s.period_ms = 1.0;
  s.target_id = id;
  s.start_s = start_s;
  s.end_s = end_s;
  return s;
}

const char* attack_kind_name(AttackKind k) {
  switch (k) {
    case AttackKind::DoS: return "dos";
    case AttackKind::Fuzzy: return "fuzzy";
    case AttackKind::Targeted: return "targeted";
  }
  return "?";
}

AttackSpec AttackSpec::from_config(std::istream& in) {
  AttackSpec s;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::MalformedLine, "expected key=value", line_no);
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    try {
      if (key == "kind") {
        if (val == "dos") s.kind = AttackKind::DoS;
        else if (val == "fuzzy") s.kind = AttackKind::Fuzzy;
        else if (val == "targeted" || val == "rpm" || val == "gear")
          s.kind = AttackKind::Targeted;
        else throw Error(ErrorKind::MalformedLine, "unknown kind '" + val + "'", line_no);
        if (val == "gear") s.target_id = 0x43f;
        if (s.kind == AttackKind::DoS) s.target_id = 0x000;
      } else if (key == "period_ms") {
        s.period_ms = std::stod(val);
      } else if (key == "target_id") {
        s.target_id = static_cast<CanId>(std::stoul(val, nullptr, 16));
      } else if (key == "start_s") {
        s.start_s = std::stod(val);
      } else if (key == "end_s") {
        s.end_s = std::stod(val);
      } else if (key == "seed") {
        s.seed = std::stoull(val);
      } else if (key == "payload") {
        for (std::size_t i = 0; i < 8 && i * 2 + 1 < val.size(); ++i)
          s.payload[i] = static_cast<std::uint8_t>(std::stoul(val.substr(i * 2, 2), nullptr, 16));
      } else {
        throw Error(ErrorKind::MalformedLine, "unknown key '" + key + "'", line_no);
      }
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::MalformedLine, "bad value for '" + key + "'", line_no);
    }
  }
  return s;
}

namespace {

void fill_payload(CanFrame& f, PayloadMode mode, std::uint32_t counter, Rng& rng) {
  f.dlc = 8;
  switch (mode) {
    case PayloadMode::Constant:
      for (int i = 0; i < 8; ++i) f.data[i] = static_cast<std::uint8_t>((f.id + i) & 0xff);
      break;
    case PayloadMode::Counter:
      f.data[0] = static_cast<std::uint8_t>(counter & 0xff);
      f.data[1] = static_cast<std::uint8_t>((counter >> 8) & 0xff);
      for (int i = 2; i < 8; ++i) f.data[i] = static_cast<std::uint8_t>((f.id + i) & 0xff);
      break;
    case PayloadMode::Random:
      for (int i = 0; i < 8; ++i) f.data[i] = static_cast<std::uint8_t>(rng.below(256));
      break;
  }
}

}  // namespace

CanLog gen_normal_traffic(const TrafficProfile& profile, double duration_s) {
  if (profile.id_periods.empty())
    throw Error(ErrorKind::EmptyProfile, "traffic profile has no ids");

  const std::int64_t duration_us = static_cast<std::int64_t>(std::llround(duration_s * 1e6));
  CanLog log;
  log.source = "synthetic";

  for (const auto& [id, timing] : profile.id_periods) {
    Rng rng(mix64(profile.seed) ^ mix64(0x747261666669cULL + id));
    const std::int64_t period_us = static_cast<std::int64_t>(std::llround(timing.period_ms * 1e3));
    std::uint32_t counter = 0;
    for (std::int64_t k = 0;; ++k) {
      std::int64_t base = k * period_us;
      if (base >= duration_us) break;
      std::int64_t jitter = 0;
      if (timing.jitter > 0.0)
        jitter = static_cast<std::int64_t>(
            std::llround(rng.uniform(-timing.jitter, timing.jitter) * static_cast<double>(period_us)));
      std::int64_t t = base + jitter;
      if (t < 0) t = 0;
      if (t >= duration_us) continue;
      CanFrame f;
      f.ts_us = t;
      f.id = id;
      f.label = FrameLabel::Normal;
      fill_payload(f, profile.payload_mode, counter++, rng);
      log.frames.push_back(f);
    }
  }

  std::stable_sort(log.frames.begin(), log.frames.end(),
                   [](const CanFrame& a, const CanFrame& b) {
                     return a.ts_us != b.ts_us ? a.ts_us < b.ts_us : a.id < b.id;
                   });
  return log;
}

CanLog inject_attack(const CanLog& base, const AttackSpec& spec) {
  if (spec.period_ms <= 0.0)
    throw Error(ErrorKind::WindowOutOfRange, "injection period must be positive");
  if (spec.start_s >= spec.end_s)
    throw Error(ErrorKind::WindowOutOfRange, "empty attack window");
  if (base.frames.empty())
    throw Error(ErrorKind::WindowOutOfRange, "base log is empty");

  const std::int64_t start_us = static_cast<std::int64_t>(std::llround(spec.start_s * 1e6));
  const std::int64_t end_us = static_cast<std::int64_t>(std::llround(spec.end_s * 1e6));
  const std::int64_t base_first = base.frames.front().ts_us;
  const std::int64_t base_last = base.frames.back().ts_us;
  if (end_us < base_first || start_us > base_last)
    throw Error(ErrorKind::WindowOutOfRange, "attack window does not overlap the log");

  const std::int64_t period_us = static_cast<std::int64_t>(std::llround(spec.period_ms * 1e3));
  if (period_us <= 0) throw Error(ErrorKind::WindowOutOfRange, "injection period is below 1us");

  Rng rng(mix64(spec.seed) ^ 0x61747461636bULL);
  std::vector<CanFrame> injected;
  injected.reserve(static_cast<std::size_t>((end_us - start_us) / period_us + 1));
  for (std::int64_t t = start_us + period_us; t <= end_us; t += period_us) {
    CanFrame f;
    f.ts_us = t;
    f.label = FrameLabel::Injected;
    f.dlc = 8;
    switch (spec.kind) {
      case AttackKind::DoS:
        f.id = 0x000;
        for (int i = 0; i < 8; ++i) f.data[i] = 0x00;
        break;
      case AttackKind::Fuzzy:
        f.id = static_cast<CanId>(rng.below(kMaxCanId + 1));
        for (int i = 0; i < 8; ++i) f.data[i] = static_cast<std::uint8_t>(rng.below(256));
        break;
      case AttackKind::Targeted:
        f.id = spec.target_id;
        for (int i = 0; i < 8; ++i) f.data[i] = spec.payload[i];
        break;
    }
    injected.push_back(f);
  }

  CanLog out;
  out.source = base.source;
  out.frames.reserve(base.frames.size() + injected.size());
  // Merge; injected frames go after base frames at equal timestamps.
  std::size_t bi = 0, ii = 0;
  while (bi < base.frames.size() || ii < injected.size()) {
    if (ii == injected.size() ||
        (bi < base.frames.size() && base.frames[bi].ts_us <= injected[ii].ts_us)) {
      out.frames.push_back(base.frames[bi++]);
    } else {
      out.frames.push_back(injected[ii++]);
    }
  }
  return out;
}

}  // namespace gids
