#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "gids/error.hpp"

namespace gids {

// Standard-frame arbitration identifier, 11 bits.
using CanId = std::uint16_t;
constexpr CanId kMaxCanId = 0x7FF;

enum class FrameLabel : std::uint8_t { Normal, Injected };

// One timestamped CAN message. Timestamps are kept as integer
// microseconds so text round trips are byte-stable.
struct CanFrame {
  std::int64_t ts_us = 0;
  CanId id = 0;
  std::uint8_t dlc = 0;
  std::uint8_t data[8] = {};
  FrameLabel label = FrameLabel::Normal;

  double seconds() const { return static_cast<double>(ts_us) * 1e-6; }

  bool operator==(const CanFrame& o) const;
};

// Time-ordered frame sequence. `source` is provenance metadata and does
// not participate in equality or serialization.
struct CanLog {
  std::vector<CanFrame> frames;
  std::string source;

  bool operator==(const CanLog& o) const { return frames == o.frames; }
};

// Renders a timestamp in microseconds as seconds with 6 decimal places.
std::string format_timestamp(std::int64_t ts_us);

// Parses one log line in the canonical CSV grammar
//   timestamp,id_hex,dlc,b0,...,b{dlc-1},flag
// with flag R (normal) or T (injected), or in the whitespace-separated
// capture-dump variant ("Timestamp: ... ID: ... DLC: ...", no flag means
// normal). Hex fields are case-insensitive.
//
// Throws Error{MalformedLine} and Error{IdOutOfRange}.
CanFrame parse_log_line(std::string_view line);

// Reads a whole log. Blank lines are skipped; the first malformed line
// aborts with its line number. Timestamps must be non-decreasing.
CanLog read_log(std::istream& in, std::string source = {});
CanLog read_log_file(const std::string& path);

// Writes the canonical CSV form: 6-decimal timestamps, 3 lowercase hex
// digits for ids, 2 for data bytes, `\n` endings. read_log(write_log(x))
// reproduces x frame-for-frame.
void write_log(const CanLog& log, std::ostream& out);
void write_log_file(const CanLog& log, const std::string& path);

std::string format_frame(const CanFrame& f);

}  // namespace gids
