#include "gids/can.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace gids {

const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::MalformedLine: return "MalformedLine";
    case ErrorKind::IdOutOfRange: return "IdOutOfRange";
    case ErrorKind::UnsortedTimestamps: return "UnsortedTimestamps";
    case ErrorKind::SinkFailure: return "SinkFailure";
    case ErrorKind::EmptyProfile: return "EmptyProfile";
    case ErrorKind::WindowOutOfRange: return "WindowOutOfRange";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::ShapeHeaderMismatch: return "ShapeHeaderMismatch";
    case ErrorKind::TruncatedStream: return "TruncatedStream";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::DivergenceDetected: return "DivergenceDetected";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::SingleClassInput: return "SingleClassInput";
  }
  return "Error";
}

bool CanFrame::operator==(const CanFrame& o) const {
  return ts_us == o.ts_us && id == o.id && dlc == o.dlc && label == o.label &&
         std::memcmp(data, o.data, dlc) == 0;
}

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

bool parse_hex(std::string_view s, std::uint32_t& out) {
  if (s.empty() || s.size() > 8) return false;
  std::uint32_t v = 0;
  for (char c : s) {
    int h = hex_value(c);
    if (h < 0) return false;
    v = (v << 4) | static_cast<std::uint32_t>(h);
  }
  out = v;
  return true;
}

// "1478198376.389427" -> microseconds. At most 6 fraction digits; fewer
// are right-padded with zeros.
bool parse_timestamp(std::string_view s, std::int64_t& out) {
  if (s.empty() || s[0] == '-' || s[0] == '+') return false;
  auto dot = s.find('.');
  std::string_view whole = s.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  if (whole.empty() || frac.size() > 6) return false;
  std::int64_t sec = 0;
  auto [p, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), sec);
  if (ec != std::errc{} || p != whole.data() + whole.size()) return false;
  std::int64_t usec = 0;
  for (char c : frac) {
    if (c < '0' || c > '9') return false;
    usec = usec * 10 + (c - '0');
  }
  for (std::size_t i = frac.size(); i < 6; ++i) usec *= 10;
  if (sec > (INT64_MAX - usec) / 1000000) return false;
  out = sec * 1000000 + usec;
  return true;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> tokenize_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

CanFrame parse_csv_line(std::string_view line) {
  auto fields = split(line, ',');
  if (fields.size() < 4) throw Error(ErrorKind::MalformedLine, "expected at least 4 fields");

  CanFrame f;
  if (!parse_timestamp(fields[0], f.ts_us))
    throw Error(ErrorKind::MalformedLine, "bad timestamp '" + std::string(fields[0]) + "'");

  std::uint32_t id = 0;
  if (!parse_hex(fields[1], id))
    throw Error(ErrorKind::MalformedLine, "bad id '" + std::string(fields[1]) + "'");
  if (id > kMaxCanId)
    throw Error(ErrorKind::IdOutOfRange, "id 0x" + std::string(fields[1]) + " exceeds 11 bits");
  f.id = static_cast<CanId>(id);

  if (fields[2].size() != 1 || fields[2][0] < '0' || fields[2][0] > '8')
    throw Error(ErrorKind::MalformedLine, "bad dlc '" + std::string(fields[2]) + "'");
  f.dlc = static_cast<std::uint8_t>(fields[2][0] - '0');

  if (fields.size() != 4u + f.dlc)
    throw Error(ErrorKind::MalformedLine, "field count does not match dlc");
  for (int i = 0; i < f.dlc; ++i) {
    std::uint32_t b = 0;
    if (!parse_hex(fields[3 + i], b) || b > 0xFF || fields[3 + i].size() > 2)
      throw Error(ErrorKind::MalformedLine, "bad data byte '" + std::string(fields[3 + i]) + "'");
    f.data[i] = static_cast<std::uint8_t>(b);
  }

  std::string_view flag = fields[3 + f.dlc];
  if (flag == "R")
    f.label = FrameLabel::Normal;
  else if (flag == "T")
    f.label = FrameLabel::Injected;
  else
    throw Error(ErrorKind::MalformedLine, "bad flag '" + std::string(flag) + "'");
  return f;
}

// Capture-dump variant:
//   Timestamp: 1478198376.389427  ID: 0316  000  DLC: 8  05 21 68 09 21 21 00 6f [R|T]
// Tokens between the id and "DLC:" are ignored; a missing flag means normal.
CanFrame parse_dump_line(std::string_view line) {
  auto tok = tokenize_ws(line);
  CanFrame f;
  std::size_t i = 0;
  auto expect = [&](std::string_view kw) {
    while (i < tok.size() && tok[i] != kw) ++i;
    if (i + 1 >= tok.size())
      throw Error(ErrorKind::MalformedLine, "missing '" + std::string(kw) + "' field");
    return tok[++i];
  };

  if (!parse_timestamp(expect("Timestamp:"), f.ts_us))
    throw Error(ErrorKind::MalformedLine, "bad timestamp");

  std::uint32_t id = 0;
  std::string_view id_tok = expect("ID:");
  if (!parse_hex(id_tok, id)) throw Error(ErrorKind::MalformedLine, "bad id");
  if (id > kMaxCanId)
    throw Error(ErrorKind::IdOutOfRange, "id 0x" + std::string(id_tok) + " exceeds 11 bits");
  f.id = static_cast<CanId>(id);

  std::string_view dlc_tok = expect("DLC:");
  if (dlc_tok.size() != 1 || dlc_tok[0] < '0' || dlc_tok[0] > '8')
    throw Error(ErrorKind::MalformedLine, "bad dlc");
  f.dlc = static_cast<std::uint8_t>(dlc_tok[0] - '0');

  if (tok.size() < i + 1 + f.dlc) throw Error(ErrorKind::MalformedLine, "missing data bytes");
  for (int b = 0; b < f.dlc; ++b) {
    std::uint32_t v = 0;
    if (!parse_hex(tok[i + 1 + b], v) || v > 0xFF)
      throw Error(ErrorKind::MalformedLine, "bad data byte");
    f.data[b] = static_cast<std::uint8_t>(v);
  }
  std::size_t next = i + 1 + f.dlc;
  if (next < tok.size()) {
    if (tok[next] == "T")
      f.label = FrameLabel::Injected;
    else if (tok[next] == "R")
      f.label = FrameLabel::Normal;
    else
      throw Error(ErrorKind::MalformedLine, "trailing garbage");
    ++next;
  }
  if (next != tok.size()) throw Error(ErrorKind::MalformedLine, "trailing garbage");
  return f;
}

}  // namespace

std::string format_timestamp(std::int64_t ts_us) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%lld.%06lld", static_cast<long long>(ts_us / 1000000),
                static_cast<long long>(ts_us % 1000000));
  return buf;
}

CanFrame parse_log_line(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.remove_suffix(1);
  if (line.find("Timestamp:") != std::string_view::npos) return parse_dump_line(line);
  return parse_csv_line(line);
}

CanLog read_log(std::istream& in, std::string source) {
  CanLog log;
  log.source = std::move(source);
  std::string line;
  std::size_t line_no = 0;
  std::int64_t prev_ts = -1;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = line;
    while (!sv.empty() && (sv.back() == '\r')) sv.remove_suffix(1);
    if (sv.empty()) continue;
    CanFrame f;
    try {
      f = parse_log_line(sv);
    } catch (const Error& e) {
      throw Error(e.kind(), e.what(), line_no);
    }
    if (f.ts_us < prev_ts)
      throw Error(ErrorKind::UnsortedTimestamps, "timestamp decreased", line_no);
    prev_ts = f.ts_us;
    log.frames.push_back(f);
  }
  return log;
}

CanLog read_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::SinkFailure, "cannot open '" + path + "'");
  return read_log(in, path);
}

std::string format_frame(const CanFrame& f) {
  std::string out = format_timestamp(f.ts_us);
  char buf[16];
  std::snprintf(buf, sizeof buf, ",%03x,%d", f.id, f.dlc);
  out += buf;
  for (int i = 0; i < f.dlc; ++i) {
    std::snprintf(buf, sizeof buf, ",%02x", f.data[i]);
    out += buf;
  }
  out += f.label == FrameLabel::Normal ? ",R" : ",T";
  return out;
}

void write_log(const CanLog& log, std::ostream& out) {
  for (const CanFrame& f : log.frames) {
    out << format_frame(f) << '\n';
    if (!out) throw Error(ErrorKind::SinkFailure, "write failed");
  }
  out.flush();
  if (!out) throw Error(ErrorKind::SinkFailure, "flush failed");
}

void write_log_file(const CanLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::SinkFailure, "cannot open '" + path + "' for writing");
  write_log(log, out);
}

}  // namespace gids
