#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "gids/can.hpp"

namespace gids {

enum class EncodeMode : std::uint8_t { OneHot, RawBinary };

struct EncoderConfig {
  int input_size = 64;  // frames per image
  int stride = 0;       // 0 means "= input_size" (non-overlapping groups)
  EncodeMode mode = EncodeMode::OneHot;

  int resolved_stride() const { return stride > 0 ? stride : input_size; }
  int cols() const { return mode == EncodeMode::OneHot ? 48 : 11; }
  void validate() const;
};

enum class ImageLabel : std::uint8_t { Normal, Abnormal };

// Binary matrix of a window of encoded CAN ids, one frame per row.
// OneHot rows are 48 wide (three 16-column blocks, one hot bit each);
// RawBinary rows are the 11 identifier bits, most significant first.
struct CanImage {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> pixels;  // row-major, values 0/1
  ImageLabel label = ImageLabel::Normal;
  std::size_t first_frame = 0;  // index range into the source log
  std::size_t frame_count = 0;

  std::uint8_t at(int r, int c) const { return pixels[static_cast<std::size_t>(r) * cols + c]; }
};

// One-hot vector of a nibble: bit d set, everything else clear.
std::array<std::uint8_t, 16> encode_digit(int d);

// Three nibbles of an 11-bit id, most significant first, 48 columns.
std::array<std::uint8_t, 48> encode_id(CanId id);

// Inverse of encode_id; throws Error{ShapeMismatch} if the row is not a
// valid one-hot triple.
CanId decode_onehot_row(std::span<const std::uint8_t> row);

// Groups frames into images: image k covers [k*stride, k*stride+input_size).
// The trailing partial group is discarded. A window is Abnormal iff it
// contains at least one injected frame.
std::vector<CanImage> build_images(const CanLog& log, const EncoderConfig& cfg);

// Debug/golden dump: per image a `label rows cols` header line, then one
// line of 0/1 characters per row. Label is 0 normal, 1 abnormal.
void write_images(const std::vector<CanImage>& images, std::ostream& out);
std::vector<CanImage> read_images(std::istream& in);

}  // namespace gids
