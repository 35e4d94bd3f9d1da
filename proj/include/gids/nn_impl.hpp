#pragma once

// Template implementation detail of nn.hpp; do not include directly.

#include <algorithm>
#include <cstring>

namespace gids::nn {

namespace detail {

template <class T>
T apply_act(Activation a, T z) {
  switch (a) {
    case Activation::None: return z;
    case Activation::ReLU: return z > T{0} ? z : T{0};
    case Activation::Sigmoid: return T{1} / (T{1} + std::exp(-z));
    case Activation::Tanh: return std::tanh(z);
  }
  return z;
}

// Derivative expressed through the activation output y (not the
// pre-activation), so caches only need layer outputs.
template <class T>
T act_grad_from_output(Activation a, T y) {
  switch (a) {
    case Activation::None: return T{1};
    case Activation::ReLU: return y > T{0} ? T{1} : T{0};
    case Activation::Sigmoid: return y * (T{1} - y);
    case Activation::Tanh: return T{1} - y * y;
  }
  return T{1};
}

// C = A(m x k) · B(k x n), all row-major, C overwritten. The inner loop
// accumulates independent output columns, which vectorizes without
// reassociating any single sum; rows are processed four at a time so B
// streams once per block. Each C row is produced by exactly one thread
// in a fixed order, so results do not depend on the thread count.
template <class T>
void matmul(const T* a, const T* b, T* c, std::size_t m, std::size_t n, std::size_t k) {
  parallel_for(m, [&](std::size_t m0, std::size_t m1) {
    std::size_t i = m0;
    for (; i + 4 <= m1; i += 4) {
      const T* a0 = a + i * k;
      const T* a1 = a0 + k;
      const T* a2 = a1 + k;
      const T* a3 = a2 + k;
      T* c0 = c + i * n;
      T* c1 = c0 + n;
      T* c2 = c1 + n;
      T* c3 = c2 + n;
      std::fill_n(c0, 4 * n, T{0});
      for (std::size_t t = 0; t < k; ++t) {
        const T v0 = a0[t], v1 = a1[t], v2 = a2[t], v3 = a3[t];
        const T* brow = b + t * n;
        for (std::size_t j = 0; j < n; ++j) {
          const T bv = brow[j];
          c0[j] += v0 * bv;
          c1[j] += v1 * bv;
          c2[j] += v2 * bv;
          c3[j] += v3 * bv;
        }
      }
    }
    for (; i < m1; ++i) {
      const T* arow = a + i * k;
      T* crow = c + i * n;
      std::fill_n(crow, n, T{0});
      for (std::size_t t = 0; t < k; ++t) {
        const T av = arow[t];
        const T* brow = b + t * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  });
}

template <class T>
std::vector<T> transpose(const T* a, std::size_t rows, std::size_t cols) {
  std::vector<T> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = a[r * cols + c];
  return out;
}

template <class T>
std::vector<int> deconv_out_shape(const Deconv2dT<T>& l, const std::vector<int>& in) {
  if (in.size() != 3 || in[0] != l.in_ch)
    throw Error(ErrorKind::ShapeMismatch, "deconv input must be {in_ch,h,w}");
  int oh = (in[1] - 1) * l.sh - 2 * l.ph + l.kh;
  int ow = (in[2] - 1) * l.sw - 2 * l.pw + l.kw;
  if (oh < 1 || ow < 1) throw Error(ErrorKind::ShapeMismatch, "deconv output collapses");
  return {l.out_ch, oh, ow};
}

template <class T>
void dense_forward(const DenseT<T>& l, const TensorT<T>& x, TensorT<T>& y) {
  const std::size_t batch = static_cast<std::size_t>(x.batch());
  const std::size_t in = static_cast<std::size_t>(l.in_dim);
  const std::size_t out = static_cast<std::size_t>(l.out_dim);

  // Y^T = W · X^T keeps the big weight matrix streaming linearly while
  // the (small) transposed input stays cache-resident.
  auto xt = transpose(x.v.data(), batch, in);
  std::vector<T> yt(out * batch);
  matmul(l.w.data(), xt.data(), yt.data(), out, batch, in);
  parallel_for(batch, [&](std::size_t b0, std::size_t b1) {
    for (std::size_t b = b0; b < b1; ++b) {
      T* row = y.v.data() + b * out;
      for (std::size_t o = 0; o < out; ++o) row[o] = apply_act(l.act, yt[o * batch + b] + l.b[o]);
    }
  });
}

// Scatter/gather index layout shared by the deconv matmul route:
//   cols[(oc,ky,kx), (n,iy,ix)] pairs with out[n,oc, iy*sh-ph+ky, ix*sw-pw+kx].
// Xm is the input permuted to (in_ch, n*ih*iw).
template <class T>
std::vector<T> deconv_input_matrix(const Deconv2dT<T>& l, const TensorT<T>& x) {
  const std::size_t batch = static_cast<std::size_t>(x.batch());
  const std::size_t in_plane = static_cast<std::size_t>(x.shape[2]) * x.shape[3];
  const std::size_t nii = batch * in_plane;
  std::vector<T> xm(static_cast<std::size_t>(l.in_ch) * nii);
  parallel_for(static_cast<std::size_t>(l.in_ch), [&](std::size_t c0, std::size_t c1) {
    for (std::size_t c = c0; c < c1; ++c)
      for (std::size_t n = 0; n < batch; ++n)
        std::copy_n(x.v.data() + (n * l.in_ch + c) * in_plane, in_plane,
                    xm.data() + c * nii + n * in_plane);
  });
  return xm;
}

template <class T>
void deconv_forward(const Deconv2dT<T>& l, const TensorT<T>& x, TensorT<T>& y) {
  const std::size_t batch = static_cast<std::size_t>(x.batch());
  const int ih = x.shape[2], iw = x.shape[3];
  const int oh = y.shape[2], ow = y.shape[3];
  const std::size_t in_plane = static_cast<std::size_t>(ih) * iw;
  const std::size_t out_plane = static_cast<std::size_t>(oh) * ow;
  const std::size_t kimage = static_cast<std::size_t>(l.kh) * l.kw;
  const std::size_t nii = batch * in_plane;
  const std::size_t ockk = static_cast<std::size_t>(l.out_ch) * kimage;

  // cols = K^T · Xm, one matmul instead of nested kernel loops.
  auto xm = deconv_input_matrix(l, x);
  auto kt = transpose(l.k.data(), static_cast<std::size_t>(l.in_ch), ockk);
  std::vector<T> cols(ockk * nii);
  matmul(kt.data(), xm.data(), cols.data(), ockk, nii, static_cast<std::size_t>(l.in_ch));

  parallel_for(batch, [&](std::size_t b0, std::size_t b1) {
    for (std::size_t n = b0; n < b1; ++n) {
      T* out = y.v.data() + n * static_cast<std::size_t>(l.out_ch) * out_plane;
      for (int oc = 0; oc < l.out_ch; ++oc) std::fill_n(out + oc * out_plane, out_plane, l.b[oc]);
      for (int oc = 0; oc < l.out_ch; ++oc) {
        T* oplane = out + static_cast<std::size_t>(oc) * out_plane;
        for (int ky = 0; ky < l.kh; ++ky) {
          for (int kx = 0; kx < l.kw; ++kx) {
            const T* crow = cols.data() + ((static_cast<std::size_t>(oc) * l.kh + ky) * l.kw + kx) * nii +
                            n * in_plane;
            for (int iy = 0; iy < ih; ++iy) {
              const int oy = iy * l.sh - l.ph + ky;
              if (oy < 0 || oy >= oh) continue;
              for (int ix = 0; ix < iw; ++ix) {
                const int ox = ix * l.sw - l.pw + kx;
                if (ox < 0 || ox >= ow) continue;
                oplane[static_cast<std::size_t>(oy) * ow + ox] += crow[static_cast<std::size_t>(iy) * iw + ix];
              }
            }
          }
        }
      }
      for (std::size_t i = 0; i < static_cast<std::size_t>(l.out_ch) * out_plane; ++i)
        out[i] = apply_act(l.act, out[i]);
    }
  });
}

// patches[(oc,ky,kx), (n,iy,ix)] = dz at the paired output position, 0
// outside the output.
template <class T>
std::vector<T> deconv_gather_patches(const Deconv2dT<T>& l, const TensorT<T>& dz, int ih, int iw) {
  const std::size_t batch = static_cast<std::size_t>(dz.batch());
  const int oh = dz.shape[2], ow = dz.shape[3];
  const std::size_t in_plane = static_cast<std::size_t>(ih) * iw;
  const std::size_t out_plane = static_cast<std::size_t>(oh) * ow;
  const std::size_t nii = batch * in_plane;
  const std::size_t kimage = static_cast<std::size_t>(l.kh) * l.kw;
  const std::size_t ockk = static_cast<std::size_t>(l.out_ch) * kimage;

  std::vector<T> patches(ockk * nii, T{0});
  parallel_for(ockk, [&](std::size_t r0, std::size_t r1) {
    for (std::size_t r = r0; r < r1; ++r) {
      const int oc = static_cast<int>(r / kimage);
      const int ky = static_cast<int>((r % kimage) / static_cast<std::size_t>(l.kw));
      const int kx = static_cast<int>(r % static_cast<std::size_t>(l.kw));
      T* prow = patches.data() + r * nii;
      for (std::size_t n = 0; n < batch; ++n) {
        const T* dzo = dz.v.data() + (n * l.out_ch + static_cast<std::size_t>(oc)) * out_plane;
        for (int iy = 0; iy < ih; ++iy) {
          const int oy = iy * l.sh - l.ph + ky;
          if (oy < 0 || oy >= oh) continue;
          for (int ix = 0; ix < iw; ++ix) {
            const int ox = ix * l.sw - l.pw + kx;
            if (ox < 0 || ox >= ow) continue;
            prow[n * in_plane + static_cast<std::size_t>(iy) * iw + ix] =
                dzo[static_cast<std::size_t>(oy) * ow + ox];
          }
        }
      }
    }
  });
  return patches;
}

}  // namespace detail

template <class T>
void validate_model(ModelT<T>& model) {
  if (model.layers.empty()) throw Error(ErrorKind::ShapeMismatch, "model has no layers");

  std::vector<int> shape;
  if (auto* d = std::get_if<DenseT<T>>(&model.layers.front())) {
    shape = {d->in_dim};
  } else {
    throw Error(ErrorKind::ShapeMismatch, "first layer must be dense");
  }
  model.input_shape = shape;

  for (auto& layer : model.layers) {
    std::visit(
        [&](auto& l) {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, DenseT<T>>) {
            if (shape.size() != 1 || shape[0] != l.in_dim)
              throw Error(ErrorKind::ShapeMismatch, "dense input does not chain");
            if (l.w.size() != static_cast<std::size_t>(l.in_dim) * l.out_dim ||
                l.b.size() != static_cast<std::size_t>(l.out_dim))
              throw Error(ErrorKind::ShapeMismatch, "dense parameter sizes wrong");
            shape = {l.out_dim};
          } else if constexpr (std::is_same_v<L, Deconv2dT<T>>) {
            if (l.k.size() != static_cast<std::size_t>(l.in_ch) * l.out_ch * l.kh * l.kw ||
                l.b.size() != static_cast<std::size_t>(l.out_ch))
              throw Error(ErrorKind::ShapeMismatch, "deconv parameter sizes wrong");
            shape = detail::deconv_out_shape(l, shape);
          } else {
            std::size_t have = TensorT<T>::count(shape);
            std::size_t want = TensorT<T>::count(l.to);
            if (have != want) throw Error(ErrorKind::ShapeMismatch, "reshape element count differs");
            shape = l.to;
          }
        },
        layer);
  }
  model.output_shape = shape;
}

template <class T>
TensorT<T> forward(const ModelT<T>& model, const TensorT<T>& input, ForwardCacheT<T>* cache) {
  if (input.shape.empty() || input.shape.size() != model.input_shape.size() + 1 ||
      !std::equal(model.input_shape.begin(), model.input_shape.end(), input.shape.begin() + 1))
    throw Error(ErrorKind::ShapeMismatch, "forward input shape does not match model");

  const int batch = input.batch();
  if (cache) {
    cache->acts.clear();
    cache->acts.reserve(model.layers.size() + 1);
    cache->acts.push_back(input);
  }

  TensorT<T> cur = input;
  for (const auto& layer : model.layers) {
    std::visit(
        [&](const auto& l) {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, DenseT<T>>) {
            TensorT<T> next(std::vector<int>{batch, l.out_dim});
            detail::dense_forward(l, cur, next);
            cur = std::move(next);
          } else if constexpr (std::is_same_v<L, Deconv2dT<T>>) {
            std::vector<int> sample(cur.shape.begin() + 1, cur.shape.end());
            auto out = detail::deconv_out_shape(l, sample);
            TensorT<T> next(std::vector<int>{batch, out[0], out[1], out[2]});
            detail::deconv_forward(l, cur, next);
            cur = std::move(next);
          } else {
            std::vector<int> ns{batch};
            ns.insert(ns.end(), l.to.begin(), l.to.end());
            cur.shape = std::move(ns);
          }
        },
        layer);
    if (cache) cache->acts.push_back(cur);
  }
  return cur;
}

template <class T>
GradsT<T> make_grads(const ModelT<T>& model) {
  GradsT<T> g;
  g.layers.resize(model.layers.size());
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    std::visit(
        [&](const auto& l) {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, DenseT<T>>) {
            g.layers[i].dw.assign(l.w.size(), T{0});
            g.layers[i].db.assign(l.b.size(), T{0});
          } else if constexpr (std::is_same_v<L, Deconv2dT<T>>) {
            g.layers[i].dw.assign(l.k.size(), T{0});
            g.layers[i].db.assign(l.b.size(), T{0});
          }
        },
        model.layers[i]);
  }
  return g;
}

namespace detail {

template <class T>
GradsT<T> backward_impl(const ModelT<T>& model, const ForwardCacheT<T>& cache,
                        const TensorT<T>& dloss_dout, TensorT<T>* dloss_din,
                        bool want_param_grads) {
  if (cache.acts.size() != model.layers.size() + 1)
    throw Error(ErrorKind::ShapeMismatch, "cache does not match model");
  if (dloss_dout.shape != cache.acts.back().shape)
    throw Error(ErrorKind::ShapeMismatch, "loss gradient shape does not match output");

  GradsT<T> grads = make_grads(model);
  TensorT<T> dy = dloss_dout;
  const std::size_t batch = static_cast<std::size_t>(dy.batch());

  for (std::size_t li = model.layers.size(); li-- > 0;) {
    const TensorT<T>& x = cache.acts[li];
    const TensorT<T>& y = cache.acts[li + 1];
    // The bottom layer's input gradient is only needed when the caller
    // chains into an upstream model.
    const bool want_dx = li > 0 || dloss_din != nullptr;
    std::visit(
        [&](const auto& l) {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, Reshape>) {
            dy.shape = x.shape;  // element order unchanged
          } else if constexpr (std::is_same_v<L, DenseT<T>>) {
            // dz = dy ⊙ act'(y)
            TensorT<T> dz = dy;
            for (std::size_t i = 0; i < dz.size(); ++i)
              dz.v[i] *= detail::act_grad_from_output(l.act, y.v[i]);

            const std::size_t out = static_cast<std::size_t>(l.out_dim);
            const std::size_t in = static_cast<std::size_t>(l.in_dim);
            auto& lg = grads.layers[li];
            if (want_param_grads) {
              // db[o] = sum_b dz[b,o]
              for (std::size_t b = 0; b < batch; ++b)
                for (std::size_t o = 0; o < out; ++o) lg.db[o] += dz.v[b * out + o];
              // dW = dZ^T · X
              auto dzt = detail::transpose(dz.v.data(), batch, out);
              detail::matmul(dzt.data(), x.v.data(), lg.dw.data(), out, in, batch);
            }
            if (want_dx) {
              // dX = dZ · W
              TensorT<T> dx(x.shape);
              detail::matmul(dz.v.data(), l.w.data(), dx.v.data(), batch, in, out);
              dy = std::move(dx);
            } else {
              dy = std::move(dz);  // placeholder, not used below layer 0
            }
          } else if constexpr (std::is_same_v<L, Deconv2dT<T>>) {
            TensorT<T> dz = dy;
            for (std::size_t i = 0; i < dz.size(); ++i)
              dz.v[i] *= detail::act_grad_from_output(l.act, y.v[i]);

            const int ih = x.shape[2], iw = x.shape[3];
            const std::size_t in_plane = static_cast<std::size_t>(ih) * iw;
            const std::size_t out_plane = static_cast<std::size_t>(dz.shape[2]) * dz.shape[3];
            const std::size_t kimage = static_cast<std::size_t>(l.kh) * l.kw;
            const std::size_t nii = batch * in_plane;
            const std::size_t ockk = static_cast<std::size_t>(l.out_ch) * kimage;
            auto& lg = grads.layers[li];

            auto patches = detail::deconv_gather_patches(l, dz, ih, iw);

            if (want_param_grads) {
              for (std::size_t n = 0; n < batch; ++n) {
                const T* dzp = dz.v.data() + n * static_cast<std::size_t>(l.out_ch) * out_plane;
                for (int oc = 0; oc < l.out_ch; ++oc)
                  for (std::size_t i = 0; i < out_plane; ++i) lg.db[oc] += dzp[oc * out_plane + i];
              }
              // dK = Xm · patches^T, laid out exactly like the kernel block.
              auto xm = detail::deconv_input_matrix(l, x);
              auto pt = detail::transpose(patches.data(), ockk, nii);
              detail::matmul(xm.data(), pt.data(), lg.dw.data(), static_cast<std::size_t>(l.in_ch),
                             ockk, nii);
            }

            if (want_dx) {
              // dXm = K · patches: the adjoint correlation as a matmul.
              std::vector<T> dxm(static_cast<std::size_t>(l.in_ch) * nii);
              detail::matmul(l.k.data(), patches.data(), dxm.data(),
                             static_cast<std::size_t>(l.in_ch), nii, ockk);
              TensorT<T> dx(x.shape);
              parallel_for(static_cast<std::size_t>(l.in_ch), [&](std::size_t c0, std::size_t c1) {
                for (std::size_t c = c0; c < c1; ++c)
                  for (std::size_t n = 0; n < batch; ++n)
                    std::copy_n(dxm.data() + c * nii + n * in_plane, in_plane,
                                dx.v.data() + (n * l.in_ch + c) * in_plane);
              });
              dy = std::move(dx);
            } else {
              dy = std::move(dz);
            }
          }
        },
        model.layers[li]);
  }

  if (dloss_din) *dloss_din = std::move(dy);
  return grads;
}

}  // namespace detail

template <class T>
GradsT<T> backward(const ModelT<T>& model, const ForwardCacheT<T>& cache,
                   const TensorT<T>& dloss_dout, TensorT<T>* dloss_din) {
  return detail::backward_impl(model, cache, dloss_dout, dloss_din, true);
}

// Input gradient only; parameter gradients are skipped (generator steps
// backpropagate through a frozen discriminator).
template <class T>
TensorT<T> backward_input(const ModelT<T>& model, const ForwardCacheT<T>& cache,
                          const TensorT<T>& dloss_dout) {
  TensorT<T> din;
  detail::backward_impl(model, cache, dloss_dout, &din, false);
  return din;
}

template <class T>
T bce_batch(const TensorT<T>& pred, const std::vector<T>& targets, TensorT<T>& dpred) {
  if (pred.shape.size() != 2 || pred.shape[1] != 1 ||
      targets.size() != static_cast<std::size_t>(pred.batch()))
    throw Error(ErrorKind::ShapeMismatch, "bce expects {batch,1} predictions");
  const T eps = static_cast<T>(1e-7);
  const T n = static_cast<T>(pred.batch());
  dpred = TensorT<T>(pred.shape);
  T loss{0};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    T p = std::clamp(pred.v[i], eps, T{1} - eps);
    T t = targets[i];
    loss += -(t * std::log(p) + (T{1} - t) * std::log(T{1} - p));
    dpred.v[i] = (p - t) / (p * (T{1} - p)) / n;
  }
  return loss / n;
}

template <class T>
AdamStateT<T> make_adam(const ModelT<T>& model, T lr, T beta1, T beta2, T eps) {
  AdamStateT<T> s;
  s.lr = lr;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.eps = eps;
  auto zero = make_grads(model);
  s.m = zero.layers;
  s.v = zero.layers;
  return s;
}

template <class T>
void adam_step(ModelT<T>& model, const GradsT<T>& grads, AdamStateT<T>& state) {
  if (grads.layers.size() != model.layers.size() || state.m.size() != model.layers.size())
    throw Error(ErrorKind::ShapeMismatch, "optimizer state does not match model");

  state.step += 1;
  const T bc1 = T{1} - std::pow(state.beta1, static_cast<T>(state.step));
  const T bc2 = T{1} - std::pow(state.beta2, static_cast<T>(state.step));

  auto update = [&](std::vector<T>& p, const std::vector<T>& g, std::vector<T>& m,
                    std::vector<T>& v) {
    if (p.size() != g.size() || p.size() != m.size())
      throw Error(ErrorKind::ShapeMismatch, "gradient shape does not match parameters");
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = state.beta1 * m[i] + (T{1} - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (T{1} - state.beta2) * g[i] * g[i];
      T mhat = m[i] / bc1;
      T vhat = v[i] / bc2;
      p[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
      if (!std::isfinite(p[i]))
        throw Error(ErrorKind::DivergenceDetected, "parameter went non-finite");
    }
  };

  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    std::visit(
        [&](auto& l) {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, DenseT<T>>) {
            update(l.w, grads.layers[i].dw, state.m[i].dw, state.v[i].dw);
            update(l.b, grads.layers[i].db, state.m[i].db, state.v[i].db);
          } else if constexpr (std::is_same_v<L, Deconv2dT<T>>) {
            update(l.k, grads.layers[i].dw, state.m[i].dw, state.v[i].dw);
            update(l.b, grads.layers[i].db, state.m[i].db, state.v[i].db);
          }
        },
        model.layers[i]);
  }
}

}  // namespace gids::nn
