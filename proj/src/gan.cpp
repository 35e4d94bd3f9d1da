#include "gids/gan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace gids {

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorKind::ShapeMismatch, "epochs must be >= 1");
  if (batch_size < 1) throw Error(ErrorKind::ShapeMismatch, "batch_size must be >= 1");
  if (d_steps_per_g_step < 1)
    throw Error(ErrorKind::ShapeMismatch, "d_steps_per_g_step must be >= 1");
  if (label_smoothing < 0.0f || label_smoothing > 0.3f)
    throw Error(ErrorKind::ShapeMismatch, "label_smoothing must be in [0, 0.3]");
  if (noise_dim < 1) throw Error(ErrorKind::ShapeMismatch, "noise_dim must be >= 1");
  if (val_fraction < 0.0f || val_fraction >= 1.0f)
    throw Error(ErrorKind::ShapeMismatch, "val_fraction must be in [0, 1)");
  if (replay_fraction < 0.0f || replay_fraction > 2.0f)
    throw Error(ErrorKind::ShapeMismatch, "replay_fraction must be in [0, 2]");
  if (replay_capacity < 0) throw Error(ErrorKind::ShapeMismatch, "replay_capacity must be >= 0");
  if (noise_scale_max < 1.0f)
    throw Error(ErrorKind::ShapeMismatch, "noise_scale_max must be >= 1");
}

void TrainedGids::validate() const {
  if (detection_threshold <= 0.0f || detection_threshold >= 1.0f)
    throw Error(ErrorKind::ShapeMismatch, "detection threshold must be inside (0,1)");
  encoder_cfg.validate();
  const int pixels = encoder_cfg.input_size * encoder_cfg.cols();
  if (d2.input_shape != std::vector<int>{pixels})
    throw Error(ErrorKind::ShapeMismatch, "d2 input does not match encoder image size");
  if (d1 && d1->input_shape != std::vector<int>{pixels})
    throw Error(ErrorKind::ShapeMismatch, "d1 input does not match encoder image size");
  if (g) {
    std::size_t out = nn::Tensor::count(g->output_shape);
    if (out != static_cast<std::size_t>(pixels))
      throw Error(ErrorKind::ShapeMismatch, "generator output does not match d2 input");
  }
}

void write_history_csv(const TrainHistory& history, std::ostream& out) {
  out << "epoch,d_loss,g_loss,d_real_mean,d_fake_mean\n";
  char buf[160];
  for (const auto& e : history) {
    std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f,%.6f,%.6f\n", e.epoch, e.d_loss, e.g_loss,
                  e.d_real_mean, e.d_fake_mean);
    out << buf;
  }
}

nn::Tensor images_to_tensor(const std::vector<CanImage>& images) {
  if (images.empty()) throw Error(ErrorKind::EmptyDataset, "no images");
  const int rows = images[0].rows, cols = images[0].cols;
  nn::Tensor t(std::vector<int>{static_cast<int>(images.size()), rows * cols});
  std::size_t pos = 0;
  for (const auto& img : images) {
    if (img.rows != rows || img.cols != cols)
      throw Error(ErrorKind::ShapeMismatch, "images have differing shapes");
    for (std::uint8_t p : img.pixels) t.v[pos++] = static_cast<float>(p);
  }
  return t;
}

void scale_to_pm1(nn::Tensor& t) {
  for (auto& x : t.v) x = 2.0f * x - 1.0f;
}

namespace {

nn::Tensor gather_rows(const nn::Tensor& data, const std::vector<std::size_t>& idx,
                       std::size_t lo, std::size_t hi) {
  const std::size_t d = data.sample_size();
  nn::Tensor out(std::vector<int>{static_cast<int>(hi - lo), static_cast<int>(d)});
  for (std::size_t i = lo; i < hi; ++i)
    std::copy_n(data.v.begin() + static_cast<std::ptrdiff_t>(idx[i] * d), d,
                out.v.begin() + static_cast<std::ptrdiff_t>((i - lo) * d));
  return out;
}

nn::Tensor noise_batch(int n, int dim, Rng& rng) {
  nn::Tensor z(std::vector<int>{n, dim});
  for (auto& x : z.v) x = static_cast<float>(rng.normal());
  return z;
}

double mean_of(const nn::Tensor& t) {
  double s = 0.0;
  for (float x : t.v) s += x;
  return t.size() ? s / static_cast<double>(t.size()) : 0.0;
}

// Flatten a generator batch {n,1,h,w} into {n, h*w} for the discriminator.
nn::Tensor flatten(nn::Tensor t) {
  const int n = t.shape[0];
  const int d = static_cast<int>(t.size()) / n;
  t.shape = {n, d};
  return t;
}

}  // namespace

nn::Model train_first_discriminator(const std::vector<CanImage>& normal,
                                    const std::vector<CanImage>& attack, const TrainConfig& cfg,
                                    std::vector<double>* epoch_losses) {
  cfg.validate();
  if (normal.empty() || attack.empty())
    throw Error(ErrorKind::EmptyDataset, "d1 training needs both normal and attack images");

  nn::Tensor xn = images_to_tensor(normal);
  nn::Tensor xa = images_to_tensor(attack);
  if (xn.shape[1] != xa.shape[1])
    throw Error(ErrorKind::ShapeMismatch, "normal and attack image shapes differ");
  scale_to_pm1(xn);
  scale_to_pm1(xa);

  const std::size_t n_total = static_cast<std::size_t>(xn.shape[0] + xa.shape[0]);
  const std::size_t dim = static_cast<std::size_t>(xn.shape[1]);

  nn::Tensor x(std::vector<int>{static_cast<int>(n_total), static_cast<int>(dim)});
  std::vector<float> y(n_total);
  std::copy(xn.v.begin(), xn.v.end(), x.v.begin());
  std::copy(xa.v.begin(), xa.v.end(), x.v.begin() + xn.v.size());
  std::fill(y.begin(), y.begin() + xn.shape[0], 1.0f);
  std::fill(y.begin() + xn.shape[0], y.end(), 0.0f);

  nn::Model d = nn::make_discriminator(normal[0].rows, normal[0].cols, cfg.seed);
  auto adam = nn::make_adam(d, cfg.lr, cfg.beta1, cfg.beta2);

  std::vector<std::size_t> idx(n_total);
  std::iota(idx.begin(), idx.end(), 0);
  Rng shuffle_rng(mix64(cfg.seed) ^ 0xd1d1ULL);

  if (epoch_losses) epoch_losses->clear();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = n_total; i > 1; --i) std::swap(idx[i - 1], idx[shuffle_rng.below(i)]);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t lo = 0; lo < n_total; lo += static_cast<std::size_t>(cfg.batch_size)) {
      std::size_t hi = std::min(n_total, lo + static_cast<std::size_t>(cfg.batch_size));
      nn::Tensor xb = gather_rows(x, idx, lo, hi);
      std::vector<float> yb(hi - lo);
      for (std::size_t i = lo; i < hi; ++i) yb[i - lo] = y[idx[i]];

      nn::ForwardCache cache;
      nn::Tensor pred = nn::forward(d, xb, &cache);
      nn::Tensor dpred;
      loss_sum += nn::bce_batch(pred, yb, dpred);
      ++batches;
      auto grads = nn::backward(d, cache, dpred);
      nn::adam_step(d, grads, adam);
    }
    if (epoch_losses) epoch_losses->push_back(loss_sum / static_cast<double>(batches));
  }
  return d;
}

namespace {

// Reservoir of past generator samples. The discriminator keeps seeing
// the whole trajectory of fakes, not just the freshest ones.
class FakeReplay {
 public:
  FakeReplay(std::size_t capacity, std::size_t dim, std::uint64_t seed)
      : cap_(capacity), dim_(dim), rng_(seed) {}

  void push(const nn::Tensor& fakes) {
    if (cap_ == 0) return;
    for (int i = 0; i < fakes.shape[0]; ++i) {
      const float* row = fakes.v.data() + static_cast<std::size_t>(i) * dim_;
      if (count_ < cap_) {
        data_.insert(data_.end(), row, row + dim_);
        ++count_;
      } else {
        std::size_t slot = rng_.below(cap_);
        std::copy_n(row, dim_, data_.begin() + static_cast<std::ptrdiff_t>(slot * dim_));
      }
    }
  }

  std::size_t size() const { return count_; }

  void sample_into(float* dst, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t slot = rng_.below(count_);
      std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(slot * dim_), dim_, dst + i * dim_);
    }
  }

 private:
  std::size_t cap_, dim_;
  std::size_t count_ = 0;
  std::vector<float> data_;
  Rng rng_;
};

}  // namespace

GanResult train_gan(const std::vector<CanImage>& normal, const TrainConfig& cfg) {
  cfg.validate();
  if (normal.empty()) throw Error(ErrorKind::EmptyDataset, "gan training needs normal images");

  const int rows = normal[0].rows, cols = normal[0].cols;
  const std::size_t dim = static_cast<std::size_t>(rows) * cols;
  nn::Tensor x = images_to_tensor(normal);
  scale_to_pm1(x);
  const std::size_t n = static_cast<std::size_t>(x.shape[0]);

  // Deterministic split: tail of a seeded shuffle is the validation set.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng split_rng(mix64(cfg.seed) ^ 0x51234ULL);
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[split_rng.below(i)]);
  std::size_t n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * cfg.val_fraction));
  if (n > 1 && n_val == 0 && cfg.val_fraction > 0.0f) n_val = 1;
  if (n_val >= n) n_val = n - 1;
  const std::size_t n_train = n - n_val;

  nn::Tensor x_train = gather_rows(x, idx, 0, n_train);
  nn::Tensor x_val = n_val ? gather_rows(x, idx, n_train, n) : nn::Tensor{};

  nn::Model d2 = nn::make_discriminator(rows, cols, mix64(cfg.seed) ^ 2);
  nn::Model g = nn::make_generator(rows, cols, cfg.noise_dim, mix64(cfg.seed) ^ 3);
  auto adam_d = nn::make_adam(d2, cfg.lr, cfg.beta1, cfg.beta2);
  auto adam_g = nn::make_adam(g, cfg.lr, cfg.beta1, cfg.beta2);

  Rng shuffle_rng(mix64(cfg.seed) ^ 0x5affULL);
  Rng noise_rng(mix64(cfg.seed) ^ 0x4015eULL);
  FakeReplay replay(static_cast<std::size_t>(cfg.replay_capacity), dim,
                    mix64(cfg.seed) ^ 0x3e91ULL);

  // Fresh fakes for a d-step: half at unit noise, half at inflated noise
  // scales, which drives the tanh head into exaggerated patterns.
  auto fresh_noise = [&](int count) {
    nn::Tensor z(std::vector<int>{count, cfg.noise_dim});
    for (int i = 0; i < count; ++i) {
      float scale = 1.0f;
      if (cfg.noise_scale_max > 1.0f && i >= count / 2)
        scale = 1.0f + (cfg.noise_scale_max - 1.0f) * static_cast<float>(noise_rng.uniform01());
      for (int j = 0; j < cfg.noise_dim; ++j)
        z.v[static_cast<std::size_t>(i) * cfg.noise_dim + j] =
            scale * static_cast<float>(noise_rng.normal());
    }
    return z;
  };

  // Fixed probe noise for checkpoint selection.
  Rng probe_rng(mix64(cfg.seed) ^ 0xbe57ULL);
  const int probe_n = 128;
  nn::Tensor z_probe = noise_batch(probe_n, cfg.noise_dim, probe_rng);

  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), 0);

  GanResult best;
  double best_sep = -2.0;
  TrainHistory history;
  int low_real_streak = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = n_train; i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);

    double d_loss_sum = 0.0, g_loss_sum = 0.0, real_sum = 0.0, fake_sum = 0.0;
    std::size_t d_batches = 0, g_batches = 0;

    for (std::size_t lo = 0; lo < n_train; lo += static_cast<std::size_t>(cfg.batch_size)) {
      std::size_t hi = std::min(n_train, lo + static_cast<std::size_t>(cfg.batch_size));
      const int bsz = static_cast<int>(hi - lo);

      for (int step = 0; step < cfg.d_steps_per_g_step; ++step) {
        // Real half: target 1 - smoothing.
        nn::Tensor xb = gather_rows(x_train, order, lo, hi);
        nn::ForwardCache cache_r;
        nn::Tensor pred_r = nn::forward(d2, xb, &cache_r);
        std::vector<float> target_r(static_cast<std::size_t>(bsz), 1.0f - cfg.label_smoothing);
        nn::Tensor dpred_r;
        double loss_r = nn::bce_batch(pred_r, target_r, dpred_r);
        auto grads_r = nn::backward(d2, cache_r, dpred_r);

        // Fake half: fresh generator samples plus replayed ones, all
        // target 0. The generator is not updated here.
        nn::Tensor z = fresh_noise(bsz);
        nn::Tensor fresh = flatten(nn::forward(g, z));
        replay.push(fresh);
        const std::size_t n_replay = std::min(
            replay.size(), static_cast<std::size_t>(
                               std::llround(cfg.replay_fraction * static_cast<double>(bsz))));
        nn::Tensor fake(std::vector<int>{bsz + static_cast<int>(n_replay), static_cast<int>(dim)});
        std::copy(fresh.v.begin(), fresh.v.end(), fake.v.begin());
        if (n_replay) replay.sample_into(fake.v.data() + fresh.v.size(), n_replay);

        nn::ForwardCache cache_f;
        nn::Tensor pred_f = nn::forward(d2, fake, &cache_f);
        std::vector<float> target_f(static_cast<std::size_t>(bsz) + n_replay, 0.0f);
        nn::Tensor dpred_f;
        double loss_f = nn::bce_batch(pred_f, target_f, dpred_f);
        auto grads_f = nn::backward(d2, cache_f, dpred_f);

        for (std::size_t li = 0; li < grads_r.layers.size(); ++li) {
          auto& a = grads_r.layers[li];
          const auto& b = grads_f.layers[li];
          for (std::size_t k = 0; k < a.dw.size(); ++k) a.dw[k] += b.dw[k];
          for (std::size_t k = 0; k < a.db.size(); ++k) a.db[k] += b.db[k];
        }
        nn::adam_step(d2, grads_r, adam_d);

        d_loss_sum += loss_r + loss_f;
        real_sum += mean_of(pred_r);
        double fresh_mean = 0.0;
        for (int i = 0; i < bsz; ++i) fresh_mean += pred_f.v[static_cast<std::size_t>(i)];
        fake_sum += fresh_mean / bsz;
        ++d_batches;
      }

      // Generator step: non-saturating, maximize log D(G(z)) at unit
      // noise scale.
      nn::Tensor z = noise_batch(bsz, cfg.noise_dim, noise_rng);
      nn::ForwardCacheT<float> cache_g;
      nn::Tensor fake = flatten(nn::forward(g, z, &cache_g));
      nn::ForwardCache cache_d;
      nn::Tensor pred = nn::forward(d2, fake, &cache_d);
      std::vector<float> target(static_cast<std::size_t>(bsz), 1.0f);
      nn::Tensor dpred;
      g_loss_sum += nn::bce_batch(pred, target, dpred);
      ++g_batches;
      nn::Tensor dfake = nn::backward_input(d2, cache_d, dpred);
      dfake.shape = {bsz, 1, rows, cols};
      auto grads_g = nn::backward(g, cache_g, dfake);
      nn::adam_step(g, grads_g, adam_g);
    }

    EpochStats e;
    e.epoch = epoch;
    e.d_loss = d_loss_sum / static_cast<double>(std::max<std::size_t>(1, d_batches));
    e.g_loss = g_loss_sum / static_cast<double>(std::max<std::size_t>(1, g_batches));
    e.d_real_mean = real_sum / static_cast<double>(std::max<std::size_t>(1, d_batches));
    e.d_fake_mean = fake_sum / static_cast<double>(std::max<std::size_t>(1, d_batches));
    history.push_back(e);

    low_real_streak = e.d_real_mean < 0.1 ? low_real_streak + 1 : 0;
    if (low_real_streak >= 5)
      throw Error(ErrorKind::DivergenceDetected, "D(real) stayed below 0.1 for 5 epochs");

    // Checkpoint selection: separation of held-out real vs generated.
    double val_mean = n_val ? mean_of(nn::forward(d2, x_val)) : e.d_real_mean;
    nn::Tensor probe_fake = flatten(nn::forward(g, z_probe));
    double fake_mean = mean_of(nn::forward(d2, probe_fake));
    double sep = val_mean - fake_mean;
    if (sep > best_sep) {
      best_sep = sep;
      best.g = g;
      best.d2 = d2;
    }
  }

  best.history = std::move(history);
  return best;
}

nn::Tensor generate_samples(const nn::Model& g, int n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::ShapeMismatch, "sample count must be >= 1");
  Rng rng(mix64(seed) ^ 0x9a11ULL);
  nn::Tensor z = noise_batch(n, g.input_shape.at(0), rng);
  return nn::forward(g, z);
}

std::vector<float> score_images(const nn::Model& d, const std::vector<CanImage>& images) {
  if (images.empty()) return {};
  nn::Tensor x = images_to_tensor(images);
  scale_to_pm1(x);
  nn::Tensor pred = nn::forward(d, x);
  return pred.v;
}

}  // namespace gids
