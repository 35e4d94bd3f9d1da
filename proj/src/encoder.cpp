#include "gids/encoder.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace gids {

void EncoderConfig::validate() const {
  if (input_size < 1) throw Error(ErrorKind::ShapeMismatch, "input_size must be >= 1");
  int s = resolved_stride();
  if (s < 1 || s > input_size)
    throw Error(ErrorKind::ShapeMismatch, "stride must be in [1, input_size]");
}

std::array<std::uint8_t, 16> encode_digit(int d) {
  std::array<std::uint8_t, 16> v{};
  v[static_cast<std::size_t>(d & 0xf)] = 1;
  return v;
}

std::array<std::uint8_t, 48> encode_id(CanId id) {
  if (id > kMaxCanId) throw Error(ErrorKind::IdOutOfRange, "id exceeds 11 bits");
  std::array<std::uint8_t, 48> row{};
  row[(id >> 8) & 0xf] = 1;
  row[16 + ((id >> 4) & 0xf)] = 1;
  row[32 + (id & 0xf)] = 1;
  return row;
}

CanId decode_onehot_row(std::span<const std::uint8_t> row) {
  if (row.size() != 48) throw Error(ErrorKind::ShapeMismatch, "one-hot row must have 48 columns");
  int nibbles[3];
  for (int block = 0; block < 3; ++block) {
    int hot = -1;
    for (int i = 0; i < 16; ++i) {
      if (row[block * 16 + i]) {
        if (hot >= 0) throw Error(ErrorKind::ShapeMismatch, "row block has multiple hot bits");
        hot = i;
      }
    }
    if (hot < 0) throw Error(ErrorKind::ShapeMismatch, "row block has no hot bit");
    nibbles[block] = hot;
  }
  return static_cast<CanId>((nibbles[0] << 8) | (nibbles[1] << 4) | nibbles[2]);
}

std::vector<CanImage> build_images(const CanLog& log, const EncoderConfig& cfg) {
  cfg.validate();
  const int n = static_cast<int>(log.frames.size());
  const int size = cfg.input_size;
  const int stride = cfg.resolved_stride();
  const int cols = cfg.cols();

  std::vector<CanImage> images;
  if (n < size) return images;
  images.reserve(static_cast<std::size_t>((n - size) / stride + 1));

  for (int start = 0; start + size <= n; start += stride) {
    CanImage img;
    img.rows = size;
    img.cols = cols;
    img.pixels.assign(static_cast<std::size_t>(size) * cols, 0);
    img.first_frame = static_cast<std::size_t>(start);
    img.frame_count = static_cast<std::size_t>(size);
    bool abnormal = false;
    for (int r = 0; r < size; ++r) {
      const CanFrame& f = log.frames[static_cast<std::size_t>(start + r)];
      abnormal = abnormal || f.label == FrameLabel::Injected;
      std::uint8_t* row = img.pixels.data() + static_cast<std::size_t>(r) * cols;
      if (cfg.mode == EncodeMode::OneHot) {
        row[(f.id >> 8) & 0xf] = 1;
        row[16 + ((f.id >> 4) & 0xf)] = 1;
        row[32 + (f.id & 0xf)] = 1;
      } else {
        for (int b = 0; b < 11; ++b) row[b] = (f.id >> (10 - b)) & 1;
      }
    }
    img.label = abnormal ? ImageLabel::Abnormal : ImageLabel::Normal;
    images.push_back(std::move(img));
  }
  return images;
}

void write_images(const std::vector<CanImage>& images, std::ostream& out) {
  for (const CanImage& img : images) {
    out << (img.label == ImageLabel::Abnormal ? 1 : 0) << ' ' << img.rows << ' ' << img.cols
        << '\n';
    for (int r = 0; r < img.rows; ++r) {
      for (int c = 0; c < img.cols; ++c) out.put(img.at(r, c) ? '1' : '0');
      out.put('\n');
    }
    if (!out) throw Error(ErrorKind::SinkFailure, "image write failed");
  }
  out.flush();
}

std::vector<CanImage> read_images(std::istream& in) {
  std::vector<CanImage> images;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream hdr(line);
    int label = -1, rows = 0, cols = 0;
    if (!(hdr >> label >> rows >> cols) || (label != 0 && label != 1) || rows < 1 || cols < 1)
      throw Error(ErrorKind::MalformedLine, "bad image header", line_no);
    CanImage img;
    img.rows = rows;
    img.cols = cols;
    img.label = label ? ImageLabel::Abnormal : ImageLabel::Normal;
    img.pixels.reserve(static_cast<std::size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r) {
      if (!std::getline(in, line))
        throw Error(ErrorKind::TruncatedStream, "image body ends early", line_no);
      ++line_no;
      if (static_cast<int>(line.size()) != cols)
        throw Error(ErrorKind::MalformedLine, "image row width mismatch", line_no);
      for (char ch : line) {
        if (ch != '0' && ch != '1')
          throw Error(ErrorKind::MalformedLine, "image pixels must be 0/1", line_no);
        img.pixels.push_back(ch == '1');
      }
    }
    images.push_back(std::move(img));
  }
  return images;
}

}  // namespace gids
