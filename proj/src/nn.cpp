#include "gids/nn.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

namespace gids::nn {

namespace {
std::atomic<int> g_threads{0};  // 0 = use hardware_concurrency
}

int hardware_threads() {
  unsigned n = std::thread::hardware_concurrency();
  return n ? static_cast<int>(n) : 1;
}

void set_threads(int n) { g_threads.store(n < 1 ? 1 : n); }

int threads() {
  int n = g_threads.load();
  return n ? n : hardware_threads();
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
  const int nt = threads();
  if (n == 0) return;
  if (nt <= 1 || n < 2 || n < static_cast<std::size_t>(nt)) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nt) - 1);
  const std::size_t chunk = (n + nt - 1) / nt;
  for (int t = 1; t < nt; ++t) {
    std::size_t lo = chunk * static_cast<std::size_t>(t);
    std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(fn, lo, hi);
  }
  fn(0, std::min(chunk, n));
  for (auto& th : pool) th.join();
}

BceResult bce_loss(double prediction, double target) {
  const double eps = 1e-7;
  double p = std::clamp(prediction, eps, 1.0 - eps);
  BceResult r;
  r.loss = -(target * std::log(p) + (1.0 - target) * std::log(1.0 - p));
  r.dloss_dp = (p - target) / (p * (1.0 - p));
  return r;
}

namespace {

float glorot_limit(int fan_in, int fan_out) {
  return std::sqrt(6.0f / static_cast<float>(fan_in + fan_out));
}

DenseT<float> init_dense(int in, int out, Activation act, Rng& rng) {
  DenseT<float> l;
  l.in_dim = in;
  l.out_dim = out;
  l.act = act;
  l.w.resize(static_cast<std::size_t>(in) * out);
  l.b.assign(static_cast<std::size_t>(out), 0.0f);
  const float lim = glorot_limit(in, out);
  for (auto& w : l.w) w = static_cast<float>(rng.uniform(-lim, lim));
  return l;
}

Deconv2dT<float> init_deconv(int in_ch, int out_ch, int kh, int kw, int sh, int sw, int ph,
                             int pw, Activation act, Rng& rng) {
  Deconv2dT<float> l;
  l.in_ch = in_ch;
  l.out_ch = out_ch;
  l.kh = kh;
  l.kw = kw;
  l.sh = sh;
  l.sw = sw;
  l.ph = ph;
  l.pw = pw;
  l.act = act;
  l.k.resize(static_cast<std::size_t>(in_ch) * out_ch * kh * kw);
  l.b.assign(static_cast<std::size_t>(out_ch), 0.0f);
  for (auto& k : l.k) k = static_cast<float>(rng.normal() * 0.02);
  return l;
}

}  // namespace

Model make_discriminator(int rows, int cols, std::uint64_t seed) {
  Rng rng(mix64(seed) ^ 0xd15c0ULL);
  Model m;
  m.tag = ArchTag::DiscriminatorDNN;
  const int in = rows * cols;
  m.layers.push_back(init_dense(in, 1024, Activation::ReLU, rng));
  m.layers.push_back(init_dense(1024, 512, Activation::ReLU, rng));
  m.layers.push_back(init_dense(512, 1, Activation::Sigmoid, rng));
  validate_model(m);
  return m;
}

Model make_generator(int rows, int cols, int noise_dim, std::uint64_t seed) {
  if (rows % 16 != 0 || rows < 16)
    throw Error(ErrorKind::ShapeMismatch, "generator needs rows divisible by 16");
  Rng rng(mix64(seed) ^ 0x9e4ULL);
  Model m;
  m.tag = ArchTag::GeneratorDeconv;

  const int h0 = rows / 16;
  const bool wide = cols % 16 == 0;  // one-hot: grow width; raw: keep it
  const int w0 = wide ? cols / 16 : cols;
  const int kw = wide ? 4 : 1;
  const int sw = wide ? 2 : 1;
  const int pw = wide ? 1 : 0;

  m.layers.push_back(init_dense(noise_dim, 128 * h0 * w0, Activation::ReLU, rng));
  m.layers.push_back(Reshape{{128, h0, w0}});
  m.layers.push_back(init_deconv(128, 64, 4, kw, 2, sw, 1, pw, Activation::ReLU, rng));
  m.layers.push_back(init_deconv(64, 32, 4, kw, 2, sw, 1, pw, Activation::ReLU, rng));
  m.layers.push_back(init_deconv(32, 16, 4, kw, 2, sw, 1, pw, Activation::ReLU, rng));
  m.layers.push_back(init_deconv(16, 1, 4, kw, 2, sw, 1, pw, Activation::Tanh, rng));
  validate_model(m);
  if (m.output_shape != std::vector<int>{1, rows, cols})
    throw Error(ErrorKind::ShapeMismatch, "generator output does not reach the image shape");
  return m;
}

namespace {

constexpr char kMagic[] = "GIDSW1\n";  // 7 bytes, no terminator written
constexpr std::uint8_t kKindDense = 1;
constexpr std::uint8_t kKindDeconv = 2;
constexpr std::uint8_t kKindReshape = 3;

void put_u8(std::ostream& out, std::uint8_t v) { out.put(static_cast<char>(v)); }

void put_i32(std::ostream& out, std::int32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f32(std::ostream& out, float f) {
  std::uint32_t u = std::bit_cast<std::uint32_t>(f);
  put_i32(out, static_cast<std::int32_t>(u));
}

std::uint8_t get_u8(std::istream& in) {
  int c = in.get();
  if (c == EOF) throw Error(ErrorKind::TruncatedStream, "unexpected end of weight stream");
  return static_cast<std::uint8_t>(c);
}

std::int32_t get_i32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw Error(ErrorKind::TruncatedStream, "unexpected end of weight stream");
  return static_cast<std::int32_t>(static_cast<std::uint32_t>(b[0]) |
                                   (static_cast<std::uint32_t>(b[1]) << 8) |
                                   (static_cast<std::uint32_t>(b[2]) << 16) |
                                   (static_cast<std::uint32_t>(b[3]) << 24));
}

float get_f32(std::istream& in) {
  return std::bit_cast<float>(static_cast<std::uint32_t>(get_i32(in)));
}

void put_params(std::ostream& out, const std::vector<float>& v) {
  for (float f : v) put_f32(out, f);
}

void get_params(std::istream& in, std::vector<float>& v, std::size_t n) {
  v.resize(n);
  for (auto& f : v) f = get_f32(in);
}

}  // namespace

void save_weights(const Model& model, std::ostream& out) {
  out.write(kMagic, 7);
  put_u8(out, static_cast<std::uint8_t>(model.tag));
  put_i32(out, static_cast<std::int32_t>(model.layers.size()));
  for (const auto& layer : model.layers) {
    std::visit(
        [&](const auto& l) {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, DenseT<float>>) {
            put_u8(out, kKindDense);
            put_u8(out, static_cast<std::uint8_t>(l.act));
            put_i32(out, l.out_dim);
            put_i32(out, l.in_dim);
            put_params(out, l.w);
            put_params(out, l.b);
          } else if constexpr (std::is_same_v<L, Deconv2dT<float>>) {
            put_u8(out, kKindDeconv);
            put_u8(out, static_cast<std::uint8_t>(l.act));
            for (int v : {l.in_ch, l.out_ch, l.kh, l.kw, l.sh, l.sw, l.ph, l.pw}) put_i32(out, v);
            put_params(out, l.k);
            put_params(out, l.b);
          } else {
            put_u8(out, kKindReshape);
            put_u8(out, 0);
            put_i32(out, static_cast<std::int32_t>(l.to.size()));
            for (int d : l.to) put_i32(out, d);
          }
        },
        layer);
  }
  if (!out) throw Error(ErrorKind::SinkFailure, "weight write failed");
}

std::string save_weights(const Model& model) {
  std::ostringstream out(std::ios::binary);
  save_weights(model, out);
  return out.str();
}

Model load_weights(std::istream& in) {
  char magic[7];
  if (!in.read(magic, 7)) throw Error(ErrorKind::TruncatedStream, "weight stream too short");
  if (std::memcmp(magic, kMagic, 7) != 0)
    throw Error(ErrorKind::BadMagic, "not a weight file");

  Model m;
  std::uint8_t tag = get_u8(in);
  if (tag != static_cast<std::uint8_t>(ArchTag::DiscriminatorDNN) &&
      tag != static_cast<std::uint8_t>(ArchTag::GeneratorDeconv))
    throw Error(ErrorKind::ShapeHeaderMismatch, "unknown arch tag");
  m.tag = static_cast<ArchTag>(tag);

  std::int32_t count = get_i32(in);
  if (count < 1 || count > 4096)
    throw Error(ErrorKind::ShapeHeaderMismatch, "implausible layer count");

  for (std::int32_t i = 0; i < count; ++i) {
    std::uint8_t kind = get_u8(in);
    std::uint8_t act = get_u8(in);
    if (act > static_cast<std::uint8_t>(Activation::Tanh))
      throw Error(ErrorKind::ShapeHeaderMismatch, "unknown activation");
    if (kind == kKindDense) {
      DenseT<float> l;
      l.act = static_cast<Activation>(act);
      l.out_dim = get_i32(in);
      l.in_dim = get_i32(in);
      if (l.out_dim < 1 || l.in_dim < 1 || static_cast<std::int64_t>(l.out_dim) * l.in_dim > (1 << 28))
        throw Error(ErrorKind::ShapeHeaderMismatch, "implausible dense shape");
      get_params(in, l.w, static_cast<std::size_t>(l.out_dim) * l.in_dim);
      get_params(in, l.b, static_cast<std::size_t>(l.out_dim));
      m.layers.push_back(std::move(l));
    } else if (kind == kKindDeconv) {
      Deconv2dT<float> l;
      l.act = static_cast<Activation>(act);
      l.in_ch = get_i32(in);
      l.out_ch = get_i32(in);
      l.kh = get_i32(in);
      l.kw = get_i32(in);
      l.sh = get_i32(in);
      l.sw = get_i32(in);
      l.ph = get_i32(in);
      l.pw = get_i32(in);
      if (l.in_ch < 1 || l.out_ch < 1 || l.kh < 1 || l.kw < 1 || l.sh < 1 || l.sw < 1 ||
          l.ph < 0 || l.pw < 0 || static_cast<std::int64_t>(l.in_ch) * l.out_ch * l.kh * l.kw > (1 << 28))
        throw Error(ErrorKind::ShapeHeaderMismatch, "implausible deconv shape");
      get_params(in, l.k, static_cast<std::size_t>(l.in_ch) * l.out_ch * l.kh * l.kw);
      get_params(in, l.b, static_cast<std::size_t>(l.out_ch));
      m.layers.push_back(std::move(l));
    } else if (kind == kKindReshape) {
      std::int32_t nd = get_i32(in);
      if (nd < 1 || nd > 8) throw Error(ErrorKind::ShapeHeaderMismatch, "implausible reshape rank");
      Reshape r;
      for (std::int32_t d = 0; d < nd; ++d) {
        std::int32_t v = get_i32(in);
        if (v < 1) throw Error(ErrorKind::ShapeHeaderMismatch, "bad reshape dim");
        r.to.push_back(v);
      }
      m.layers.push_back(std::move(r));
    } else {
      throw Error(ErrorKind::ShapeHeaderMismatch, "unknown layer kind");
    }
  }

  try {
    validate_model(m);
  } catch (const Error&) {
    throw Error(ErrorKind::ShapeHeaderMismatch, "layer shapes do not chain");
  }
  return m;
}

Model load_weights_str(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  return load_weights(in);
}

void save_weights_file(const Model& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::SinkFailure, "cannot open '" + path + "' for writing");
  save_weights(model, out);
}

Model load_weights_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::SinkFailure, "cannot open '" + path + "'");
  return load_weights(in);
}

std::size_t param_count(const Model& model) {
  std::size_t n = 0;
  for (const auto& layer : model.layers) {
    std::visit(
        [&](const auto& l) {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, DenseT<float>>) {
            n += l.w.size() + l.b.size();
          } else if constexpr (std::is_same_v<L, Deconv2dT<float>>) {
            n += l.k.size() + l.b.size();
          }
        },
        layer);
  }
  return n;
}

}  // namespace gids::nn
