#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "gids/error.hpp"
#include "gids/rng.hpp"

// Minimal training kernel: dense + transposed-convolution layers with
// hand-derived backpropagation. Everything is templated on the scalar so
// the same code paths can be gradient-checked in double; production
// models use float.

namespace gids::nn {

int hardware_threads();
void set_threads(int n);
int threads();

// Runs fn(begin, end) over contiguous chunks of [0, n). Output must be
// per-index independent so the result does not depend on the chunking.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

template <class T>
struct TensorT {
  std::vector<int> shape;
  std::vector<T> v;

  TensorT() = default;
  explicit TensorT(std::vector<int> s) : shape(std::move(s)) {
    v.assign(count(shape), T{0});
  }

  static std::size_t count(const std::vector<int>& s) {
    std::size_t n = 1;
    for (int d : s) n *= static_cast<std::size_t>(d);
    return n;
  }

  std::size_t size() const { return v.size(); }
  int batch() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t sample_size() const { return batch() ? size() / static_cast<std::size_t>(batch()) : 0; }

  bool operator==(const TensorT& o) const { return shape == o.shape && v == o.v; }
};

using Tensor = TensorT<float>;

enum class Activation : std::uint8_t { None = 0, ReLU = 1, Sigmoid = 2, Tanh = 3 };

template <class T>
struct DenseT {
  int in_dim = 0, out_dim = 0;
  Activation act = Activation::None;
  std::vector<T> w;  // out_dim x in_dim, row-major
  std::vector<T> b;  // out_dim

  bool operator==(const DenseT&) const = default;
};

// Transposed 2-D convolution. Output spatial size per axis is
// (in - 1)*stride - 2*padding + kernel; validated when models are built.
template <class T>
struct Deconv2dT {
  int in_ch = 0, out_ch = 0;
  int kh = 0, kw = 0;
  int sh = 1, sw = 1;
  int ph = 0, pw = 0;
  Activation act = Activation::None;
  std::vector<T> k;  // in_ch x out_ch x kh x kw
  std::vector<T> b;  // out_ch

  bool operator==(const Deconv2dT&) const = default;
};

struct Reshape {
  std::vector<int> to;  // per-sample shape

  bool operator==(const Reshape&) const = default;
};

template <class T>
using LayerT = std::variant<DenseT<T>, Deconv2dT<T>, Reshape>;

enum class ArchTag : std::uint8_t { DiscriminatorDNN = 1, GeneratorDeconv = 2 };

template <class T>
struct ModelT {
  ArchTag tag = ArchTag::DiscriminatorDNN;
  std::vector<LayerT<T>> layers;
  std::vector<int> input_shape;   // per-sample, no batch dimension
  std::vector<int> output_shape;

  bool operator==(const ModelT&) const = default;
};

using Model = ModelT<float>;

// acts[0] is the input batch, acts[i+1] the output of layer i.
template <class T>
struct ForwardCacheT {
  std::vector<TensorT<T>> acts;
};
using ForwardCache = ForwardCacheT<float>;

template <class T>
struct LayerGradsT {
  std::vector<T> dw;  // dense w / deconv k
  std::vector<T> db;
};

template <class T>
struct GradsT {
  std::vector<LayerGradsT<T>> layers;
};
using Grads = GradsT<float>;

template <class T>
struct AdamStateT {
  long step = 0;
  T lr = static_cast<T>(2e-4);
  T beta1 = static_cast<T>(0.5);
  T beta2 = static_cast<T>(0.999);
  T eps = static_cast<T>(1e-8);
  std::vector<LayerGradsT<T>> m, v;  // moment accumulators, grad-shaped
};
using AdamState = AdamStateT<float>;

// Shape inference + chaining validation; fills input/output_shape.
// Throws Error{ShapeMismatch} on inconsistent layers.
template <class T>
void validate_model(ModelT<T>& model);

// Batched forward pass. Input shape must be {batch, input_shape...}.
template <class T>
TensorT<T> forward(const ModelT<T>& model, const TensorT<T>& input,
                   ForwardCacheT<T>* cache = nullptr);

// Backpropagates d(loss)/d(output) to parameter gradients; optionally
// also to the input (needed to chain the generator behind the
// discriminator).
template <class T>
GradsT<T> backward(const ModelT<T>& model, const ForwardCacheT<T>& cache,
                   const TensorT<T>& dloss_dout, TensorT<T>* dloss_din = nullptr);

// Input gradient only, parameter gradients skipped.
template <class T>
TensorT<T> backward_input(const ModelT<T>& model, const ForwardCacheT<T>& cache,
                          const TensorT<T>& dloss_dout);

// Binary cross entropy with the prediction clamped to [1e-7, 1-1e-7].
struct BceResult {
  double loss = 0.0;
  double dloss_dp = 0.0;
};
BceResult bce_loss(double prediction, double target);

// Mean BCE over a {batch,1} prediction tensor; writes d(mean loss)/dp.
template <class T>
T bce_batch(const TensorT<T>& pred, const std::vector<T>& targets, TensorT<T>& dpred);

template <class T>
GradsT<T> make_grads(const ModelT<T>& model);

template <class T>
AdamStateT<T> make_adam(const ModelT<T>& model, T lr = static_cast<T>(2e-4),
                        T beta1 = static_cast<T>(0.5), T beta2 = static_cast<T>(0.999),
                        T eps = static_cast<T>(1e-8));

// Standard Adam with bias correction. Throws Error{DivergenceDetected}
// if any parameter goes non-finite.
template <class T>
void adam_step(ModelT<T>& model, const GradsT<T>& grads, AdamStateT<T>& state);

// rows x cols flattened -> 1024 -> 512 -> 1, ReLU/ReLU/Sigmoid.
Model make_discriminator(int rows, int cols, std::uint64_t seed);

// noise -> dense -> (128, rows/16, w0) -> four stride-2 deconvs reaching
// rows x cols, ReLU hidden, Tanh output. rows must be a multiple of 16.
// For one-hot images (cols % 16 == 0) the width doubles alongside the
// height; otherwise the width is held fixed with 1-wide kernels.
Model make_generator(int rows, int cols, int noise_dim, std::uint64_t seed);

constexpr int kDefaultNoiseDim = 100;

// Weight file, bit-exact round trip:
//   magic "GIDSW1\n" | u8 arch_tag | u32le layer count | per layer:
//   u8 kind (1 dense, 2 deconv, 3 reshape) | u8 activation |
//   i32le shape ints (dense: out,in; deconv: in_ch,out_ch,kh,kw,sh,sw,ph,pw;
//   reshape: ndim,dims...) | f32le parameters (w then b), row-major.
void save_weights(const Model& model, std::ostream& out);
std::string save_weights(const Model& model);
Model load_weights(std::istream& in);
Model load_weights_str(const std::string& bytes);
void save_weights_file(const Model& model, const std::string& path);
Model load_weights_file(const std::string& path);

std::size_t param_count(const Model& model);

}  // namespace gids::nn

#include "gids/nn_impl.hpp"
